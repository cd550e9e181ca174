"""Command line entry point: ``verify``, ``fig2``, ``bound`` and ``intermediate``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bound import bound_rhs, scan_bound, verify_constraint
from .intermediate import (
    analytic_intermediate,
    chain_step_check,
    check_nonsignalling,
    delta,
    f_analytic,
    f_mc,
    intermediate_correlation,
    tau_average,
)
from .models import (
    MIN_SAMPLES,
    BellGeneralizedModel,
    FactorizedLocalModel,
    InvalidState,
    SaturatingSigmaZModel,
    estimate_all,
)
from .quantum import Party, Setting, correlation_qm, local_expectation, make_state
from .sphere import RngStream

MODELS = {"bell": BellGeneralizedModel, "saturating": SaturatingSigmaZModel, "factorized": FactorizedLocalModel}
FIG2_HEADER = ["theta", "bound", "delta_bell", "delta_saturating"]
INTERMEDIATE_HEADER = ["tau", "f_analytic", "f_mc", "f_mc_stderr", "g_analytic", "E_tau", "E_tau_stderr"]


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    tool_version: str
    timestamp: str


def _manifest(args, command) -> RunManifest:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return RunManifest(command, params, args.seed, __version__, datetime.now(timezone.utc).isoformat())


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write(args, command, text: str):
    """Write to --output (plus a manifest sidecar) or to stdout."""
    if args.output is None:
        sys.stdout.write(text)
        return
    path = Path(args.output)
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise SystemExit(f"cannot write {path}: {exc}")
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(asdict(_manifest(args, command)), indent=2) + "\n", encoding="utf-8")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _angle(args, value):
    return math.radians(value) if args.degrees else value


# -- fig2 -------------------------------------------------------------------


def fig2_rows(theta_steps: int, alpha_a: float = 0.5 * np.pi):
    if theta_steps < 2:
        raise ValueError("theta-steps must be at least 2")
    a = Setting.in_plane(alpha_a)
    bell, sat = BellGeneralizedModel(), SaturatingSigmaZModel()
    rows = []
    for theta in np.linspace(0.0, 0.5 * np.pi, theta_steps):
        state = make_state(min(theta, 0.5 * np.pi))
        d_bell = delta(state, a, analytic_intermediate(bell, state, a)).value
        d_sat = delta(state, a, analytic_intermediate(sat, state, a)).value
        rows.append((float(theta), bound_rhs(state, a), d_bell, d_sat))
    return rows


def cmd_fig2(args) -> int:
    rows = fig2_rows(args.theta_steps, _angle(args, args.alpha_a))
    _write(args, "fig2", _csv_text(FIG2_HEADER, rows))
    return 0


# -- bound ------------------------------------------------------------------


def cmd_bound(args) -> int:
    state = make_state(_angle(args, args.theta))
    a = Setting.in_plane(_angle(args, args.alpha_a))
    report = scan_bound(
        state, a, args.n_max, restarts=args.restarts, tol=args.tol, rng=RngStream(args.seed), mode=args.mode
    )
    out = {"theta": state.theta, "alpha_a": a.alpha, **report.to_dict()}
    _write(args, "bound", json.dumps(out, indent=2) + "\n")
    return 0


# -- intermediate -----------------------------------------------------------


def intermediate_rows(model_name, theta, alpha_a, alpha_b, tau_steps, samples, seed):
    state = make_state(theta)
    model = MODELS[model_name]()
    a, b = Setting.in_plane(alpha_a), Setting.in_plane(alpha_b)
    f = analytic_intermediate(model, state, a, Party.A)
    g = analytic_intermediate(model, state, b, Party.B)
    rng = RngStream(seed)
    rows = []
    for i, tau in enumerate(np.linspace(0.0, np.pi, tau_steps)):
        fm = f_mc(model, state, a, b, tau, samples, rng.child(i).child(0))
        e = intermediate_correlation(model, state, a, b, tau, samples, rng.child(i).child(1))
        rows.append((float(tau), float(f(tau)), fm.mean, fm.stderr, float(g(tau)), e.mean, e.stderr))
    return rows


def cmd_intermediate(args) -> int:
    try:
        rows = intermediate_rows(
            args.model,
            _angle(args, args.theta),
            _angle(args, args.alpha_a),
            _angle(args, args.alpha_b),
            args.tau_steps,
            args.samples,
            args.seed,
        )
    except InvalidState as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write(args, "intermediate", _csv_text(INTERMEDIATE_HEADER, rows))
    return 0


# -- verify -----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    score: float = 0.0  # excess over the allowed deviation, for ranking failures


def _z_check(name, est, expected, nsigma) -> Check:
    dev = abs(est.mean - expected)
    allowed = nsigma * est.stderr + 1e-12
    return Check(name, dev <= allowed, f"mc={est.mean:.6f}+-{est.stderr:.1e} exact={expected:.6f}", dev - allowed)


def _guarded(name, fn) -> Check:
    try:
        return fn()
    except ValueError as exc:
        if "samples" in str(exc):
            return Check(name, False, f"insufficient statistical power: {exc}", math.inf)
        raise


def run_checks(theta_grid, samples: int, seed: int, nsigma: float = 5.0) -> list[Check]:
    rng = RngStream(seed)
    bell = BellGeneralizedModel()
    sat = SaturatingSigmaZModel()
    z = Setting.in_plane(0.5 * np.pi)
    pairs = [(0.5 * np.pi, 0.0), (0.25 * np.pi, 0.6 * np.pi), (0.9 * np.pi, 0.1 * np.pi)]
    taus = [0.3, 0.5 * np.pi, 2.2]
    checks = []
    for i, theta in enumerate(theta_grid):
        state = make_state(theta)
        tag = f"theta={theta:.4f}"
        sub = rng.child(i)
        for j, (alpha_a, alpha_b) in enumerate(pairs):
            a, b = Setting.in_plane(alpha_a), Setting.in_plane(alpha_b)

            def quantum(a=a, b=b, j=j):
                ea, eb, eab = estimate_all(bell, state, a, b, samples, sub.child(j))
                parts = [
                    _z_check("A", ea, local_expectation(state, a, Party.A), nsigma),
                    _z_check("B", eb, local_expectation(state, b, Party.B), nsigma),
                    _z_check("AB", eab, correlation_qm(state, a, b), nsigma),
                ]
                worst = max(parts, key=lambda c: c.score)
                return Check(
                    f"quantum consistency {tag} pair={j}",
                    all(c.passed for c in parts),
                    f"worst {worst.name}: {worst.detail}",
                    worst.score,
                )

            checks.append(_guarded(f"quantum consistency {tag} pair={j}", quantum))
        for k, tau in enumerate(taus):

            def fcheck(tau=tau, k=k):
                est = f_mc(bell, state, z, Setting.in_plane(0.0), tau, samples, sub.child(10 + k))
                c = _z_check("f", est, float(f_analytic(state, z, tau)), nsigma)
                return Check(f"f analytic vs mc {tag} tau={tau:.3f}", c.passed, c.detail, c.score)

            checks.append(_guarded(f"f analytic vs mc {tag} tau={tau:.3f}", fcheck))
        f = analytic_intermediate(bell, state, z)
        mean = tau_average(f)
        target = local_expectation(state, z, Party.A)
        checks.append(
            Check(f"tau average {tag}", abs(mean - target) <= 1e-8, f"{mean:.12g} vs {target:.12g}", abs(mean - target) - 1e-8)
        )

        def nosig():
            rep = check_nonsignalling(
                bell,
                state,
                z,
                [Setting.in_plane(x) for x in (0.0, 0.5 * np.pi, 0.25 * np.pi)],
                np.linspace(0.2, np.pi - 0.2, 7),
                samples,
                sub.child(20),
                nsigma,
            )
            return Check(
                f"non-signalling {tag}",
                rep.passed,
                f"worst tau={rep.worst_tau:.3f} pair={rep.worst_pair} |diff|={rep.worst_diff:.2e}",
                rep.worst_diff - nsigma * rep.worst_combined_stderr,
            )

        checks.append(_guarded(f"non-signalling {tag}", nosig))

        def chain_step():
            rep = chain_step_check(bell, state, z, Setting.in_plane(1.1), 1.2, samples, sub.child(30), nsigma=nsigma)
            return Check(f"chain step {tag}", rep.holds, f"{rep.lhs:.4f} <= {rep.rhs:.4f}", rep.lhs - rep.rhs)

        checks.append(_guarded(f"chain step {tag}", chain_step))
        report = scan_bound(state, z, 4, restarts=2, rng=sub.child(40))
        d_bell = delta(state, z, f)
        margins = verify_constraint(d_bell, state, z, report)
        checks.append(
            Check(
                f"bound constraint bell {tag}",
                margins.holds,
                f"chain margin={margins.chain_margin:.3g} conjecture margin={margins.conjecture_margin:.3g}",
                -min(margins.chain_margin, margins.conjecture_margin),
            )
        )
        d_sat = delta(state, z, analytic_intermediate(sat, state, z)).value
        rhs = bound_rhs(state, z)
        checks.append(
            Check(f"saturation {tag}", abs(d_sat - rhs) <= 1e-8, f"delta={d_sat:.12g} bound={rhs:.12g}", abs(d_sat - rhs) - 1e-8)
        )
    return checks


def cmd_verify(args) -> int:
    grid = [_angle(args, x) for x in args.theta_grid]
    checks = run_checks(grid, args.samples, args.seed)
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  detail"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL'}    {c.detail}")
    failed = [c for c in checks if not c.passed]
    lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        worst = max(failed, key=lambda c: c.score)
        lines.append(f"worst offender: {worst.name} ({worst.detail})")
    _write(args, "verify", "\n".join(lines) + "\n")
    return 1 if failed else 0


# -- parser -----------------------------------------------------------------


def _grid(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=12345, help="64-bit RNG seed")
    common.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples per estimate")
    common.add_argument("--output", default=None, help="output path (stdout if omitted)")
    common.add_argument("--degrees", action="store_true", help="read angle flags in degrees")

    p = argparse.ArgumentParser(prog="onticlab", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the consistency suite")
    v.add_argument(
        "--theta-grid",
        type=_grid,
        default=list(np.linspace(0.0, 0.5 * np.pi, 5)),
        help="comma separated theta values",
    )
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fig2", parents=[common], help="variance bound and model curves versus theta")
    f.add_argument("--theta-steps", type=int, default=91)
    f.add_argument("--alpha-a", type=float, default=0.5 * np.pi)
    f.set_defaults(func=cmd_fig2)

    b = sub.add_parser("bound", parents=[common], help="minimise the chain value for n = 1..n-max")
    b.add_argument("--theta", type=float, required=True)
    b.add_argument("--alpha-a", type=float, default=0.5 * np.pi)
    b.add_argument("--n-max", type=int, default=8)
    b.add_argument("--restarts", type=int, default=8)
    b.add_argument("--tol", type=float, default=1e-9)
    b.add_argument("--mode", choices=["plane", "sphere"], default="plane")
    b.set_defaults(func=cmd_bound)

    m = sub.add_parser("intermediate", parents=[common], help="tabulate intermediate averages over tau")
    m.add_argument("--theta", type=float, required=True)
    m.add_argument("--alpha-a", type=float, default=0.5 * np.pi)
    m.add_argument("--alpha-b", type=float, default=0.0)
    m.add_argument("--model", choices=sorted(MODELS), default="bell")
    m.add_argument("--tau-steps", type=int, default=33)
    m.set_defaults(func=cmd_intermediate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
