"""Command-line experiment harness.

Four subcommands: ``prepare`` (pick T from the applicable bound and evolve),
``sweep`` (error against a list of evolution times), ``verify`` (the full
inequality/identity check suite on one schedule), ``gap-scan`` (raw
eigenvalue scan). Every command writes a ``report.json`` plus its CSV
artifacts into ``--out``; a JSON config file can mirror the flags, and
explicit flags win over the file.

Exit codes: 0 success, 2 validation problem, 3 numerical failure
(gap collapse, lost continuity), 4 check-suite failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _kern, bounds, matcore, propagator, schedule, spectral
from .errors import (
    ConfigInvalid,
    ContinuityLoss,
    DomainError,
    GapCollapse,
    InterpolationGap,
    NotHermitian,
    NotNormalized,
    NumericalFailure,
    OutOfRange,
)

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_CHECKS = 4

KINDS = ("geodesic", "linear", "random", "tabulated")

_VALIDATION_ERRORS = (
    ConfigInvalid,
    DomainError,
    OutOfRange,
    NotHermitian,
    NotNormalized,
    InterpolationGap,
    ValueError,
    KeyError,
    FileNotFoundError,
    json.JSONDecodeError,
)
_NUMERICAL_ERRORS = (GapCollapse, ContinuityLoss, NumericalFailure)


@dataclass
class ExperimentConfig:
    kind: str = "geodesic"
    theta: float = math.pi / 2
    alpha: float = 0.0
    dim: int = 2
    seed: int = 0
    schedule_file: str | None = None
    branch: int = 0
    epsilon: float = 0.05
    t_override: float | None = None
    steps_per_unit_time: float | None = None
    grid_size: int = 2001
    out: str = "out"
    t_list: list[float] | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigInvalid(f"kind={self.kind!r} not one of {KINDS}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigInvalid(f"epsilon={self.epsilon} outside (0, 1]")
        if self.grid_size < 101:
            raise ConfigInvalid(f"grid_size={self.grid_size} below 101")
        if self.branch < 0:
            raise ConfigInvalid(f"branch={self.branch} negative")
        if self.dim < 2:
            raise ConfigInvalid(f"dim={self.dim} below 2")
        if self.t_override is not None and self.t_override < 0:
            raise ConfigInvalid(f"t_override={self.t_override} negative")
        if self.steps_per_unit_time is not None and self.steps_per_unit_time <= 0:
            raise ConfigInvalid("steps_per_unit_time must be positive")
        if self.kind == "tabulated" and not self.schedule_file:
            raise ConfigInvalid("kind=tabulated needs --file")

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def build_schedule(cfg: ExperimentConfig) -> schedule.HamiltonianSchedule:
    if cfg.kind == "geodesic":
        return schedule.QubitGeodesic(cfg.theta, cfg.alpha)
    if cfg.kind == "linear":
        return schedule.qubit_linear(cfg.theta, cfg.alpha)
    if cfg.kind == "random":
        return schedule.random_linear(cfg.dim, cfg.seed)
    return schedule.Tabulated.from_json(cfg.schedule_file)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _meta_line(cfg: ExperimentConfig, command: str, ts: str) -> str:
    return f"adialab {command} config={cfg.config_hash()} generated={ts}"


def _write_report(cfg: ExperimentConfig, command: str, ts: str, payload: dict) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config_hash": cfg.config_hash(),
        "timestamp": ts,
        "config": asdict(cfg),
        "backend": _kern.backend(),
        **payload,
    }
    path = out / "report.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    return path


def _write_csv(path: Path, meta: str, cols: list[str], rows: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {meta}\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, np.atleast_2d(rows), fmt="%.17g", delimiter=",")


def _print_error(exc: Exception) -> None:
    print(json.dumps({"schema": SCHEMA_VERSION, "error": {"type": type(exc).__name__, "message": str(exc)}}))


def _norms(cfg: ExperimentConfig, sched: schedule.HamiltonianSchedule) -> dict:
    """Closed-form derivative norms when available, grid scan otherwise."""
    scan = sched.derivative_norms(cfg.grid_size)
    exact = sched.exact_derivative_norms()
    if exact is None:
        return {"h1_max": scan.h1_max, "h2_max": scan.h2_max, "source": "scan",
                "scan_h1_max": scan.h1_max, "scan_h2_max": scan.h2_max,
                "discrepancy_flag": False}
    rel1 = abs(scan.h1_max - exact.h1_max) / max(exact.h1_max, 1e-12)
    rel2 = abs(scan.h2_max - exact.h2_max) / max(exact.h2_max, 1e-12)
    return {"h1_max": exact.h1_max, "h2_max": exact.h2_max, "source": "closed-form",
            "scan_h1_max": scan.h1_max, "scan_h2_max": scan.h2_max,
            "discrepancy_flag": bool(max(rel1, rel2) > 0.01)}


def _gamma_constant(trk: spectral.EigenTrack) -> bool:
    g = trk.gammas
    return bool(g.max() - g.min() <= 1e-9 * max(1.0, float(np.max(np.abs(g)))))


def _steps_for(cfg: ExperimentConfig, T: float, h_max: float) -> int:
    spu = cfg.steps_per_unit_time if cfg.steps_per_unit_time is not None else propagator.STABILITY_PER_UNIT * h_max
    return max(10, math.ceil(T * spu - 1e-9))


def envelope_slope(ts: np.ndarray, errors: np.ndarray) -> float | None:
    """Log-log slope of the right-running-max envelope of error(T).

    The raw errors oscillate under their decay envelope; fitting the
    envelope (max of all errors at times >= T) keeps trough samples from
    polluting the slope. None when the envelope touches zero.
    """
    env = np.maximum.accumulate(errors[::-1])[::-1]
    if np.any(env <= 0.0):
        return None
    return float(np.polyfit(np.log(ts), np.log(env), 1)[0])


def _knot_continuity_check(tab: schedule.Tabulated, branch: int) -> None:
    """Advisory: can the knot samples resolve the tracked branch at all?

    Walks the knots, continuing the branch by maximal overlap. A weak
    overlap means the eigenvector rotates faster than the sampling; a
    sorted-index change with strong overlap means two levels must cross
    somewhere between knots. Either way the data cannot pin the branch
    down and the caller should add samples.
    """
    knots = tab.knots
    samples = tab.samples
    prev_phi = None
    prev_idx = branch
    for k in range(len(knots)):
        dec = matcore.eig_hermitian(samples[k])
        if prev_phi is None:
            idx = branch
            phi = dec.eigenvectors[:, idx]
        else:
            overlaps = prev_phi.conj() @ dec.eigenvectors
            idx = int(np.argmax(np.abs(overlaps)))
            ov = abs(overlaps[idx])
            if ov < spectral.MIN_OVERLAP:
                raise ContinuityLoss(
                    f"tabulated knots s={knots[k - 1]:g} -> s={knots[k]:g} rotate the branch "
                    f"too fast (overlap {ov:.3f}); add samples"
                )
            if idx != prev_idx:
                raise ContinuityLoss(
                    f"tracked eigenvalue changes sorted position ({prev_idx} -> {idx}) between "
                    f"knots s={knots[k - 1]:g} and s={knots[k]:g}: levels cross where the data "
                    "cannot resolve them; add samples"
                )
            phi = dec.eigenvectors[:, idx]
        prev_phi, prev_idx = phi, idx


def cmd_prepare(cfg: ExperimentConfig) -> int:
    ts = _timestamp()
    sched = build_schedule(cfg)
    trk = spectral.track(sched, cfg.branch, cfg.grid_size)
    norms = _norms(cfg, sched)
    lam = trk.min_gap
    rep = bounds.BoundReport.from_inputs(cfg.epsilon, lam, norms["h1_max"], norms["h2_max"])
    gamma_const = _gamma_constant(trk)
    applicable = "theorem1" if gamma_const else "theorem2"
    t_bound = rep.t_theorem1 if gamma_const else rep.t_theorem2
    T = max(t_bound, cfg.t_override) if cfg.t_override is not None else t_bound

    shifted = spectral.shift_schedule(sched, trk)
    strk = spectral.track(shifted, cfg.branch, cfg.grid_size)
    steps = _steps_for(cfg, T, strk.h_max)
    res = propagator.propagate(shifted, strk, propagator.PropagationConfig(T=T, steps=steps))

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta_line(cfg, "prepare", ts)
    propagator.trajectory_to_csv(res, out / "trajectory.csv", meta)
    _write_report(cfg, "prepare", ts, {
        "bounds": rep.to_dict(),
        "norms": norms,
        "gamma_constant": gamma_const,
        "applicable_bound": applicable,
        "t_bound": t_bound,
        "t_evolution": T,
        "steps": steps,
        "measured_error": res.error,
        "within_epsilon": bool(res.error <= cfg.epsilon),
    })
    print(f"schedule {cfg.kind}  branch {cfg.branch}  min gap {lam:.9g}")
    print(f"T = {T:.9g} ({applicable}, bound {t_bound:.9g})  steps = {steps}")
    print(f"measured error = {res.error:.3e}  epsilon = {cfg.epsilon:g}  "
          f"within: {'yes' if res.error <= cfg.epsilon else 'NO'}")
    if norms["discrepancy_flag"]:
        print("warning: scanned derivative norms deviate >1% from closed form")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig) -> int:
    if not cfg.t_list:
        raise ConfigInvalid("sweep needs --t-list")
    ts = _timestamp()
    t_values = np.array(sorted(float(t) for t in cfg.t_list))
    if np.any(t_values < 0):
        raise ConfigInvalid("sweep times must be nonnegative")
    sched = build_schedule(cfg)
    trk = spectral.track(sched, cfg.branch, cfg.grid_size)
    shifted = spectral.shift_schedule(sched, trk)
    strk = spectral.track(shifted, cfg.branch, cfg.grid_size)

    if _gamma_constant(trk) and sched.exact_derivative_norms() is not None:
        exact = sched.exact_derivative_norms()
        h1, h2 = exact.h1_max, exact.h2_max
    else:
        scan = shifted.derivative_norms(cfg.grid_size)
        h1, h2 = scan.h1_max, scan.h2_max
    c_h = bounds.theorem1_constant(trk.min_gap, h1, h2)

    def run(T: float) -> tuple[int, float]:
        steps = _steps_for(cfg, T, strk.h_max)
        res = propagator.propagate(shifted, strk, propagator.PropagationConfig(T=T, steps=steps))
        return steps, res.error

    with ThreadPoolExecutor(max_workers=min(len(t_values), os.cpu_count() or 1)) as pool:
        results = list(pool.map(run, t_values))
    steps_arr = np.array([r[0] for r in results], dtype=float)
    errors = np.array([r[1] for r in results])

    products = errors * t_values
    violations = [
        {"T": float(t), "error": float(e), "error_times_T": float(p), "c_h": c_h}
        for t, e, p in zip(t_values, errors, products)
        if p > c_h + 1e-6
    ]
    slope = envelope_slope(t_values, errors)
    monotone = bool(errors[-1] < errors[0]) if len(errors) > 1 else True

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta_line(cfg, "sweep", ts)
    rows = np.column_stack([t_values, steps_arr, errors, products])
    _write_csv(out / "sweep.csv", meta, ["T", "steps", "error", "error_times_T"], rows)
    _write_report(cfg, "sweep", ts, {
        "c_h": c_h,
        "rows": [
            {"T": float(t), "steps": int(n), "error": float(e), "error_times_T": float(p)}
            for t, n, e, p in zip(t_values, steps_arr, errors, products)
        ],
        "slope_envelope": slope,
        "monotone_decay": monotone,
        "violations": violations,
    })
    print(f"C_H = {c_h:.9g}  envelope slope = {slope if slope is None else f'{slope:.3f}'}")
    for t, e, p in zip(t_values, errors, products):
        print(f"T = {t:10.4g}  error = {e:.6e}  error*T = {p:.6e}")
    if violations:
        print(f"FAIL: {len(violations)} row(s) exceed error*T <= C_H")
        return EXIT_CHECKS
    return EXIT_OK


@dataclass
class CheckRow:
    name: str
    value: float
    bound: float
    tolerance: float
    passed: bool


def _run_check_suite(cfg: ExperimentConfig, sched: schedule.HamiltonianSchedule) -> list[CheckRow]:
    trk = spectral.track(sched, cfg.branch, cfg.grid_size)
    shifted = spectral.shift_schedule(sched, trk)
    strk = spectral.track(shifted, cfg.branch, cfg.grid_size)
    interior = range(1, cfg.grid_size - 1)
    rows: list[CheckRow] = []

    def add(name: str, value: float, bound: float, tol: float) -> None:
        rows.append(CheckRow(name, float(value), float(bound), tol, bool(value <= bound + tol)))

    # Resolvent-chain inequalities on the shifted schedule, worst margin wins.
    worst = [None, None, None]
    names = ("chain_r_phi1", "chain_rp_phi1", "chain_r_phi2")
    for i in interior:
        q = spectral.chain_norm_quantities(shifted, strk, i)
        vals = (q.r_phi1, q.rp_phi1, q.r_phi2)
        for j in range(3):
            margin = q.bounds[j] - vals[j]
            if worst[j] is None or margin < worst[j][0]:
                worst[j] = (margin, vals[j], q.bounds[j])
    for j in range(3):
        add(names[j], worst[j][1], worst[j][2], 1e-4)

    # Eigenvector velocity bound ||phi'|| <= ||H'||/gap on the shifted path.
    phi1 = strk.phi_d1()
    m = None
    for i in interior:
        val = float(np.linalg.norm(phi1[i]))
        bnd = matcore.operator_norm(shifted.eval_d1(float(strk.s_grid[i]))) / strk.frames[i].gap
        if m is None or bnd - val < m[0]:
            m = (bnd - val, val, bnd)
    add("phi1_norm", m[1], m[2], 1e-4)

    # Eigenvalue derivative bounds on the original schedule.
    g1, g2 = trk.gamma_d1(), trk.gamma_d2()
    m1 = m2 = None
    for i in interior:
        s = float(trk.s_grid[i])
        h1n = matcore.operator_norm(sched.eval_d1(s))
        h2n = matcore.operator_norm(sched.eval_d2(s))
        b1 = h1n
        b2 = h2n + 4.0 * h1n**2 / trk.frames[i].gap
        if m1 is None or b1 - abs(g1[i]) < m1[0]:
            m1 = (b1 - abs(g1[i]), abs(g1[i]), b1)
        if m2 is None or b2 - abs(g2[i]) < m2[0]:
            m2 = (b2 - abs(g2[i]), abs(g2[i]), b2)
    add("gamma_d1", m1[1], m1[2], 1e-6)
    add("gamma_d2", m2[1], m2[2], 1e-4)

    # Hellmann-Feynman agreement.
    dev = max(abs(f - h) for f, h in (spectral.hellmann_feynman(sched, trk, i) for i in interior))
    add("hellmann_feynman", dev, 0.0, 1e-5)

    # Shifted-derivative norm relations.
    d1_dev = d2_dev = None
    for i in interior:
        s = float(trk.s_grid[i])
        h1n = matcore.operator_norm(sched.eval_d1(s))
        h2n = matcore.operator_norm(sched.eval_d2(s))
        s1 = matcore.operator_norm(shifted.eval_d1(s))
        s2 = matcore.operator_norm(shifted.eval_d2(s))
        b1 = 2.0 * h1n
        b2 = 2.0 * h2n + 4.0 * h1n**2 / trk.frames[i].gap
        if d1_dev is None or b1 - s1 < d1_dev[0]:
            d1_dev = (b1 - s1, s1, b1)
        if d2_dev is None or b2 - s2 < d2_dev[0]:
            d2_dev = (b2 - s2, s2, b2)
    add("shifted_d1_norm", d1_dev[1], d1_dev[2], 1e-6)
    add("shifted_d2_norm", d2_dev[1], d2_dev[2], 1e-6)

    # Integral representation of the final error on the shifted path.
    steps = max(20000, propagator.stability_steps(50.0, strk.h_max))
    chk = propagator.check_integral_representation(
        shifted, strk, propagator.PropagationConfig(T=50.0, steps=steps)
    )
    add("integral_representation", chk.residual, 0.0, max(1e-3, 10.0 / chk.steps))

    # Phase identity between the original and shifted evolutions.
    psteps = max(4000, propagator.stability_steps(20.0, 2.0 * trk.h_max))
    ph = propagator.check_phase_lemma(sched, trk, propagator.PropagationConfig(T=20.0, steps=psteps))
    add("phase_fidelity", ph.fidelity_defect, 0.0, 1e-8)
    add("phase_angle", ph.phase_defect, 0.0, 1e-4)
    return rows


def cmd_verify(cfg: ExperimentConfig) -> int:
    ts = _timestamp()
    sched = build_schedule(cfg)
    if isinstance(sched, schedule.Tabulated):
        _knot_continuity_check(sched, cfg.branch)
    rows = _run_check_suite(cfg, sched)
    _write_report(cfg, "verify", ts, {
        "checks": [asdict(r) for r in rows],
        "all_passed": all(r.passed for r in rows),
    })
    width = max(len(r.name) for r in rows)
    for r in rows:
        # Bounds of zero mark pure-tolerance checks; margin is informative either way.
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  "
              f"value={r.value:.6e}  bound={r.bound:.6e}  tol={r.tolerance:g}")
    failed = [r for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_CHECKS if failed else EXIT_OK


def cmd_gap_scan(cfg: ExperimentConfig) -> int:
    ts = _timestamp()
    sched = build_schedule(cfg)
    if not 0 <= cfg.branch < sched.dim:
        raise OutOfRange(f"branch {cfg.branch} outside [0, {sched.dim})")
    ss = np.linspace(0.0, 1.0, cfg.grid_size)
    hs = sched.eval_batch(ss)
    w = np.linalg.eigvalsh(hs)
    diffs = np.abs(w - w[:, cfg.branch][:, None])
    diffs[:, cfg.branch] = np.inf
    gap = diffs.min(axis=1)

    cols = ["s"] + [f"ev{j}" for j in range(sched.dim)] + ["gap"]
    data = [ss, *w.T, gap]
    closed_dev = None
    if cfg.kind == "linear":
        closed = schedule.linear_qubit_gap(cfg.theta, ss)
        closed_dev = float(np.max(np.abs(gap - closed)))
        cols.append("gap_closed_form")
        data.append(closed)

    k_min = int(np.argmin(gap))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "gaps.csv", _meta_line(cfg, "gap-scan", ts), cols, np.column_stack(data))
    payload = {
        "min_gap": float(gap[k_min]),
        "argmin_s": float(ss[k_min]),
        "closed_form_max_dev": closed_dev,
    }
    _write_report(cfg, "gap-scan", ts, payload)
    print(f"min gap = {gap[k_min]:.12g} at s = {ss[k_min]:g}")
    if closed_dev is not None:
        print(f"closed-form gap column max deviation = {closed_dev:.3e}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adialab",
        description="Adiabatic-evolution experiments: bounds, propagation, and checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("prepare", "choose T from the applicable bound and evolve the shifted schedule"),
        ("sweep", "propagate a list of evolution times and check error*T"),
        ("verify", "run the inequality/identity check suite on one schedule"),
        ("gap-scan", "scan eigenvalues and the branch gap across s"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file mirroring the flags; flags override it")
        p.add_argument("--kind", choices=KINDS)
        p.add_argument("--theta", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--dim", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--file", dest="schedule_file", help="tabulated schedule JSON")
        p.add_argument("--branch", type=int)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--t-override", type=float)
        p.add_argument("--steps-per-unit-time", type=float)
        p.add_argument("--grid-size", type=int)
        p.add_argument("--out")
        if name == "sweep":
            p.add_argument("--t-list", help="comma-separated evolution times")
    return parser


def _merge_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_values = json.load(fh)
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(file_values) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        values.update(file_values)
    for f in fields(ExperimentConfig):
        flag_val = getattr(args, f.name, None)
        if flag_val is not None:
            values[f.name] = flag_val
    if isinstance(values.get("t_list"), str):
        values["t_list"] = [float(x) for x in values["t_list"].split(",") if x.strip()]
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


_COMMANDS = {
    "prepare": cmd_prepare,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "gap-scan": cmd_gap_scan,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _COMMANDS[args.command](cfg)
    except _NUMERICAL_ERRORS as exc:
        _print_error(exc)
        return EXIT_NUMERICAL
    except _VALIDATION_ERRORS as exc:
        _print_error(exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
