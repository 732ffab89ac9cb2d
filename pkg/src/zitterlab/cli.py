"""Scenario runner: ``zitterlab run|validate|schema``.

A scenario is described by one flat JSON object. Unknown keys are errors.
Artifacts (a CSV and a JSON summary) are written next to the config file
unless absolute paths are given. Exit codes: 0 when every gate passes, 1 when
a numerical gate fails (the summary is still written), 2 for an invalid
config.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import fock, noether, spinor_algebra, wavepacket
from .momentum_grid import MomentumGrid

SCENARIOS = ("zb_qm_trajectory", "zb_spectrum_sweep", "fock_identities", "pair_zb",
             "noether_convergence", "appendix_a_audit")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "zitterlab scenario config",
    "type": "object",
    "additionalProperties": False,
    "required": ["scenario"],
    "properties": {
        "scenario": {"enum": list(SCENARIOS)},
        "seed": {"type": "integer", "minimum": 0},
        "m": _pos,
        "masses": {"type": "array", "items": _pos, "minItems": 1},
        "momenta": {"type": "array", "items": _pos, "minItems": 1},
        "p0": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
        "sigma": _pos,
        "pair_mix": _num,
        "pair_phase": _num,
        "spin_weights": {"type": "array", "minItems": 2, "maxItems": 2,
                         "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
        "spin_basis": {"enum": ["fixed", "helicity"]},
        "dim": {"type": "integer", "enum": [1, 2, 3]},
        "p_max": _pos,
        "n_per_axis": {"type": "integer", "minimum": 2},
        "spatial_N": {"type": "integer", "minimum": 3},
        "box_L": {"oneOf": [_pos, {"type": "null"}]},
        "t_span": _pos,
        "n_times": {"type": "integer", "minimum": 3},
        "dt": _pos,
        "levels": {"type": "integer", "minimum": 2, "maximum": 5},
        "n_samples": {"type": "integer", "minimum": 1},
        "reading": {"enum": ["electron_momentum", "literal"]},
        "csv_path": {"type": "string", "minLength": 1},
        "json_path": {"type": "string", "minLength": 1},
    },
}

DEFAULTS = {
    "seed": 42, "m": 1.0, "masses": None, "momenta": [0.1, 1.0, 10.0],
    "p0": [0.0, 0.0, 0.0], "sigma": 0.07, "pair_mix": 0.6, "pair_phase": 0.0,
    "spin_weights": [[1.0, 0.0], [0.0, 0.0]], "spin_basis": "fixed",
    "dim": 1, "p_max": 1.0, "n_per_axis": 64, "spatial_N": 2048, "box_L": None,
    "t_span": 10.0, "n_times": 16, "dt": 0.2, "levels": 2, "n_samples": 10000,
    "reading": "electron_momentum", "csv_path": None, "json_path": None,
}

MAX_SPATIAL_POINTS = 1 << 22


class ConfigError(Exception):
    def __init__(self, field: str | None, message: str, line: int | None = None):
        self.field, self.message, self.line = field, message, line
        super().__init__(self.render())

    def render(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field:
            where.append(f"field '{self.field}'")
        return (", ".join(where) + ": " if where else "") + self.message


def _line_of(text: str, key: str) -> int | None:
    match = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, match.start()) + 1 if match else None


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(None, f"cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(None, f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from exc
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw),
                    key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        if err.validator == "additionalProperties":
            extra = sorted(set(raw) - set(CONFIG_SCHEMA["properties"]))
            raise ConfigError(extra[0], "unknown key", _line_of(text, extra[0]))
        field = str(err.path[0]) if err.path else None
        raise ConfigError(field, err.message, _line_of(text, field) if field else None)
    cfg = {**DEFAULTS, **raw}
    cfg["_base"] = str(path.resolve().parent)
    try:
        _semantic_checks(cfg)
    except ConfigError as exc:
        exc.line = _line_of(text, exc.field) if exc.field else None
        raise
    return cfg


def _grid(cfg) -> MomentumGrid:
    return MomentumGrid(cfg["dim"], cfg["p_max"], cfg["n_per_axis"], cfg["m"])


def _semantic_checks(cfg):
    scen = cfg["scenario"]
    if cfg["n_per_axis"] % 2:
        raise ConfigError("n_per_axis", "must be even so that p = 0 is not a node")
    if scen in ("zb_qm_trajectory", "noether_convergence", "fock_identities", "pair_zb"):
        grid = _grid(cfg)
        if scen in ("zb_qm_trajectory", "noether_convergence"):
            if np.any(np.abs(cfg["p0"]) > cfg["p_max"]):
                raise ConfigError("p0", "lies outside the momentum grid")
            if not np.any(np.array(cfg["spin_weights"])):
                raise ConfigError("spin_weights", "must not be all zero")
        if scen in ("zb_qm_trajectory", "pair_zb"):
            step = cfg["t_span"] / (cfg["n_times"] - 1)
            if step * grid.e_max > 1.0:
                raise ConfigError("n_times", f"time step {step:.3g} resolves e^(2iEt) poorly: "
                                  f"need t_span*E_max/(n_times-1) <= 1, got {step * grid.e_max:.3g}")
        if scen in ("fock_identities", "pair_zb"):
            modes = 4 * grid.size
            if modes > fock.MAX_MODES:
                raise ConfigError("n_per_axis", f"{modes} Fock modes exceed the cap {fock.MAX_MODES}")
        if scen == "zb_qm_trajectory" and cfg["spatial_N"] ** cfg["dim"] > MAX_SPATIAL_POINTS:
            raise ConfigError("spatial_N", f"spatial_N^dim exceeds {MAX_SPATIAL_POINTS} points")
    if scen == "zb_spectrum_sweep" and cfg["n_times"] < 64:
        raise ConfigError("n_times", "the frequency estimator needs at least 64 samples")
    if scen == "noether_convergence":
        n_finest = cfg["spatial_N"] * 2 ** (cfg["levels"] - 1)
        if n_finest ** cfg["dim"] * 25 > MAX_SPATIAL_POINTS * 4:
            raise ConfigError("spatial_N", "finest refinement level is too large")


# -- gates --------------------------------------------------------------------

@dataclass
class Gate:
    name: str
    value: float
    tolerance: object
    comparison: str
    passed: bool


def gate_below(name, value, tol) -> Gate:
    value = float(value)
    return Gate(name, value, tol, "<", bool(value < tol))


def gate_exact(name, value, target=0.0) -> Gate:
    value = float(value)
    return Gate(name, value, target, "==", bool(value == target))


def gate_within(name, value, lo, hi) -> Gate:
    value = float(value)
    return Gate(name, value, [lo, hi], "in", bool(lo <= value <= hi))


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(r if isinstance(r, str) else _fmt(r) for r in row) + "\n")


def _amplitudes(cfg, grid):
    sw = [complex(re_, im) for re_, im in cfg["spin_weights"]]
    return wavepacket.gaussian_amplitudes(grid, cfg["p0"], cfg["sigma"], spin_weights=sw,
                                          pair_mix=cfg["pair_mix"], pair_phase=cfg["pair_phase"],
                                          spin_basis=cfg["spin_basis"])


# -- scenarios ----------------------------------------------------------------

def run_zb_qm_trajectory(cfg, rng, csv_path):
    grid = _grid(cfg)
    amps = _amplitudes(cfg, grid)
    if cfg["box_L"] is None:
        sgrid = wavepacket.auto_spatial_grid(grid, cfg["spatial_N"])
    else:
        sgrid = wavepacket.make_spatial_grid(grid.active_axes, cfg["spatial_N"], cfg["box_L"])
    times = np.linspace(0.0, cfg["t_span"], cfg["n_times"])
    traj = wavepacket.trajectory(amps, times, spatial_grid=sgrid)
    traj.to_csv(csv_path)
    gates = [gate_below("oracle_gap", traj.oracle_gap(), 1e-6),
             gate_below("norm_deviation", np.abs(traj.norms - 1).max(), 1e-6)]
    if not np.any(amps.c) or not np.any(amps.d):
        gates.append(gate_below("zb_norm_max", np.abs(traj.V_zb).max(), 1e-12))
    diag = {"edge_density": max(wavepacket.synthesize_field(amps, sgrid, t).edge_density()
                                for t in times[[0, -1]]),
            "box_L": float(sgrid.coords[grid.active_axes[0]][-1] - sgrid.coords[grid.active_axes[0]][0]
                           + sgrid.spacing[grid.active_axes[0]])}
    return gates, diag


def run_zb_spectrum_sweep(cfg, rng, csv_path):
    masses = cfg["masses"] or [cfg["m"]]
    rows, gates = [], []
    sw = [complex(re_, im) for re_, im in cfg["spin_weights"]]
    if abs(sw[0]) == 0 or abs(sw[1]) == 0:
        # a lab-frame spinor along z decouples from the transverse channels; mix both
        sw = [1.0, 0.3 + 0.2j]
    for m in masses:
        for p in cfg["momenta"]:
            grid = MomentumGrid(1, 2.0 * p, 2, m)
            e = np.sqrt(p * p + m * m)
            amps = wavepacket.gaussian_amplitudes(grid, (0.0, 0.0, 0.0), 10.0 * p, spin_weights=sw,
                                                  pair_mix=np.pi / 4, spin_basis="fixed")
            n = cfg["n_times"]
            times = np.arange(n) * (8.0 * np.pi / e / n)
            measured = wavepacket.dominant_frequency(wavepacket.zb_series(amps, times), times)
            expected = 2.0 * e
            rel = abs(measured - expected) / expected if measured is not None else np.inf
            rows.append([m, p, expected, measured if measured is not None else np.nan, rel])
            gates.append(gate_below(f"freq_rel_err[m={m:g},p={p:g}]", rel, 0.01))
    _write_csv(csv_path, ["m", "p", "expected", "measured", "rel_err"], rows)
    return gates, {}


def run_fock_identities(cfg, rng, csv_path):
    grid = _grid(cfg)
    space = fock.FockSpace(grid)
    e_max = grid.e_max
    t_probe = 0.37 / e_max
    gates = [gate_below("car_max", fock.car_residual(space), 1e-14)]
    ops = {**fock.position_operator_parts(space, t_probe, cfg["reading"]),
           **fock.current_operator_parts(space, t_probe, cfg["reading"])}
    gates.append(gate_below("hermiticity_max", max(op.hermiticity_residual() for op in ops.values()),
                            1e-14))
    if grid.size <= 4:
        for t in (0.0, t_probe):
            rep = fock.brute_force_decomposition_oracle(space, t, reading=cfg["reading"])
            gates.append(gate_below(f"oracle[t={t:.6g}]", rep.max_deviation, 1e-10))
    dt = 1e-4 / e_max
    fine = fock.derivative_identity_check(space, t_probe, dt, cfg["reading"])
    half = fock.derivative_identity_check(space, t_probe, dt / 2, cfg["reading"])
    gates.append(gate_below("dX0_dt_residual", fine["X0"]["residual"], 1e-10))
    gates.append(gate_exact("dX1_dt_residual", fine["X1"]["residual"]))
    for key in ("Xzperp", "Xzpar"):
        gates.append(gate_below(f"d{key}_dt_over_taylor_bound",
                                fine[key]["residual"] / fine[key]["bound"], 1.0))
        gates.append(gate_within(f"d{key}_dt_order_ratio",
                                 fine[key]["residual"] / half[key]["residual"], 3.5, 4.5))
    _write_csv(csv_path, ["gate", "value", "tolerance"],
               [[g.name, g.value, json.dumps(g.tolerance).replace(",", ";")] for g in gates])
    return gates, {"n_modes": space.n_modes, "dim": space.dim, "dt": dt}


def run_pair_zb(cfg, rng, csv_path):
    grid = _grid(cfg)
    space = fock.FockSpace(grid)
    node = int(np.argmax(grid.nodes @ np.array([1.0, 2.0, 3.0])))
    p = grid.nodes[node]
    e = float(np.sqrt(p @ p + grid.mass ** 2))
    tri = spinor_algebra.linear_triad(p)
    state = fock.pair_superposition_state(space, node, 2, 1)
    times = np.linspace(0.0, cfg["t_span"], cfg["n_times"])
    rows = []
    for t in times:
        z = fock.current_operator_parts(space, t, cfg["reading"])["Zperp"].expectation(state).real
        x = fock.position_operator_parts(space, t, cfg["reading"])["Xzperp"].expectation(state).real
        ref = tri.e1 * np.cos(2 * e * t) - tri.e2 * np.sin(2 * e * t)
        rows.append([t, *z, *x, *ref])
    data = np.array(rows)
    z, x, ref = data[:, 1:4], data[:, 4:7], data[:, 7:10]
    gates = [
        gate_below("zperp_unit_norm", np.abs(np.linalg.norm(z, axis=1) - 1).max(), 1e-10),
        gate_below("zperp_dot_p", np.abs(z @ p).max(), 1e-12),
        gate_below("zperp_circle", np.abs(z - ref).max(), 1e-10),
        gate_below("xzperp_amplitude", np.abs(np.linalg.norm(x, axis=1) - 1 / (2 * e)).max(), 1e-10),
    ]
    cur = fock.current_operator_parts(space, 0.37 / e, cfg["reading"])
    q, mom = space.charge, space.momentum
    comm_q = max(fock.max_abs(q @ a - a @ q) for key in ("Zperp", "Zpar")
                 for a in cur[key].components)
    comm_p = max(fock.max_abs(pk @ a - a @ pk) for pk in mom for a in cur["Zperp"].components)
    gates += [gate_below("commutator_Q_Z", comm_q, 1e-13),
              gate_below("commutator_P_Zperp", comm_p, 1e-13)]
    c = rng.normal(size=(grid.size, 2)) + 1j * rng.normal(size=(grid.size, 2))
    d = rng.normal(size=(grid.size, 2)) + 1j * rng.normal(size=(grid.size, 2))
    one = fock.one_particle_state(space, wavepacket.ModeAmplitudes(grid, c, d))
    gates.append(gate_below("one_particle_zperp", np.abs(cur["Zperp"].expectation(one)).max(), 1e-13))
    _write_csv(csv_path, ["t", "Zx", "Zy", "Zz", "Xzx", "Xzy", "Xzz", "refx", "refy", "refz"], rows)
    return gates, {"node": node, "energy": e}


def run_noether_convergence(cfg, rng, csv_path):
    grid = _grid(cfg)
    amps = _amplitudes(cfg, grid)
    study = noether.convergence_study(amps, cfg["spatial_N"], cfg["dt"], box=cfg["box_L"],
                                      levels=cfg["levels"])
    study.to_csv(csv_path)
    gates = []
    for lev, ratios in enumerate(study.ratios):
        for nu, r in enumerate(ratios):
            gates.append(gate_within(f"continuity_ratio[level={lev},nu={noether.NU_LABELS[nu]}]",
                                     r, 3.5, 4.5))
    gates.append(gate_below("charge_drift", study.charge_drift.max(), 1e-8))
    # pseudo-U(1) invariance of the lattice Lagrangian
    box = cfg["box_L"] or grid.period()
    diffs = []
    for lev in range(cfg["levels"]):
        n, dt = cfg["spatial_N"] * 2 ** lev, cfg["dt"] / 2 ** lev
        sgrid = wavepacket.make_spatial_grid(grid.active_axes, n, box, transverse_points=3)
        slab = noether.sample_slab(amps, sgrid, 1.0 + dt * np.arange(-1, 2))
        base = noether.lagrangian_density(slab, grid.mass)
        moved = noether.lagrangian_density(noether.pseudo_u1_transform(slab, [0.3, 0, 0, 0.7]),
                                           grid.mass)
        diffs.append(float(np.abs(moved - base).max()))
        if lev == 0:
            same = noether.lagrangian_density(noether.pseudo_u1_transform(slab, [0, 0, 0, 0]),
                                              grid.mass)
            gates.append(gate_below("lagrangian_identity_transform", np.abs(same - base).max(), 1e-14))
    for lev in range(len(diffs) - 1):
        gates.append(gate_within(f"lagrangian_invariance_ratio[level={lev}]",
                                 diffs[lev] / diffs[lev + 1], 3.5, 4.5))
    return gates, {"lagrangian_max_diff": diffs, "charge_drift": study.charge_drift.tolist()}


def run_appendix_a_audit(cfg, rng, csv_path):
    n = cfg["n_samples"]
    ps = rng.normal(size=(n, 3)) * np.exp(rng.uniform(-3, 3, size=(n, 1)))
    rows = []
    for p in ps:
        r = spinor_algebra.triad_residuals(p)
        rows.append([*p, r["orthonormality"], r["handedness"], r["conjugation"], r["eigen"]])
    data = np.array(rows)
    gates = [gate_below(f"{name}_max", data[:, 3 + k].max(), 1e-10)
             for k, name in enumerate(("orthonormality", "handedness", "conjugation", "eigen"))]
    gates.append(gate_below("axis_limit", spinor_algebra.axis_limit_residual(1e-8), 1e-6))
    _write_csv(csv_path, ["p1", "p2", "p3", "orthonormality", "handedness", "conjugation",
                          "eigen"], rows)
    return gates, {}


RUNNERS = {name: globals()[f"run_{name}"] for name in SCENARIOS}


def _threads() -> int | None:
    raw = os.environ.get("ZITTERLAB_THREADS")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError("ZITTERLAB_THREADS", f"must be a positive integer, got {raw!r}")
    if value < 1:
        raise ConfigError("ZITTERLAB_THREADS", f"must be a positive integer, got {raw!r}")
    return value


def run(cfg: dict) -> dict:
    base = Path(cfg["_base"])
    scen = cfg["scenario"]
    csv_path = base / (cfg["csv_path"] or f"{scen}.csv")
    json_path = base / (cfg["json_path"] or f"{scen}_summary.json")
    threads = _threads()
    rng = np.random.Generator(np.random.PCG64(cfg["seed"]))
    gates, diagnostics = RUNNERS[scen](cfg, rng, csv_path)
    summary = {
        "scenario": scen,
        "passed": all(g.passed for g in gates),
        "gates": [asdict(g) for g in gates],
        "diagnostics": diagnostics,
        "rng": {"generator": "numpy.random.PCG64", "seed": cfg["seed"]},
        "threads": threads,
        "config": {k: v for k, v in sorted(cfg.items()) if not k.startswith("_")},
        "artifacts": {"csv": csv_path.name, "json": json_path.name},
    }
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n")
    summary["_paths"] = (csv_path, json_path)
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="zitterlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario and write its artifacts")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    sub.add_parser("schema", help="print the config JSON schema")
    args = parser.parse_args(argv)

    if args.command == "schema":
        print(json.dumps(CONFIG_SCHEMA, indent=2))
        return 0
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            _threads()
            print(f"{args.config}: ok ({cfg['scenario']})")
            return 0
        summary = run(cfg)
    except ConfigError as exc:
        print(f"{args.config}: {exc.render()}", file=sys.stderr)
        return 2
    for g in summary["gates"]:
        print(f"{'PASS' if g['passed'] else 'FAIL'}  {g['name']} = {g['value']:.3e}"
              f"  ({g['comparison']} {g['tolerance']})")
    csv_path, json_path = summary["_paths"]
    print(f"wrote {csv_path} and {json_path}")
    return 0 if summary["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
