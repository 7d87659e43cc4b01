"""Command-line front end: seeded experiments with file outputs.

Subcommands
    simulate   circle trajectory -> trajectory.csv, trajectory.svg, summary.json
    markov     reachable set and chain analysis -> markov.json
    knudsen    kernel-iteration TV curve -> knudsen.csv, density.csv, summary.json
    caustic    caustic radius/degeneracy -> caustic.json, caustic.svg
    lyapunov   circle or pipeline exponent estimate -> lyapunov.json (+ CSV for pipeline)
    check      invariant suite (normalization, invariance residuals,
               interval family, kernel mass conservation) -> check.json

Angles: --alpha accepts "m/n" (meaning m*pi/n, kept exact), "pi/k", or a
decimal in radians; --theta0 accepts "pi/k", "m*pi/n", or a decimal.  The
base-angle constraint alpha < pi/6 is enforced at parse time.

Randomness: every run draws from a single 64-bit --seed through one
numpy SeedSequence; consumers spawn children in a fixed order (child 0:
the main trajectory/ensemble, child 1: any auxiliary Monte Carlo), so
identical configs give bitwise-identical outputs, file for file.

Exit status: 0 on success, 2 on configuration errors, 3 on contract
violations; errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, RandBilliardsError
from .feres import BaseAngle, branch_probabilities, probability_table
from . import circle, evolution, pipeline, reachable

_OUT_ENV = "RANDBILLIARDS_OUT"


def parse_alpha(text: str) -> BaseAngle:
    """Base angle from 'm/n' (= m*pi/n), 'pi/k', or decimal radians."""
    text = text.strip()
    try:
        if text.startswith("pi/"):
            return BaseAngle.rational(1, int(text[3:]))
        if "/" in text:
            m_str, n_str = text.split("/")
            m_str = m_str.removesuffix("*pi").removesuffix("pi")
            return BaseAngle.rational(int(m_str), int(n_str))
        return BaseAngle.real(float(text))
    except ValueError as e:
        raise ConfigError(f"invalid alpha {text!r}: {e}") from None


def parse_angle(text: str) -> tuple[float, Fraction | None]:
    """Angle in (0, pi) from 'm/n' (= m*pi/n), 'pi/k', 'm*pi/n', or radians.

    Returns the float value plus the exact ratio angle/pi when the input
    was a pi-multiple (so symbolic machinery can stay exact).
    """
    text = text.strip()
    try:
        if "pi" in text:
            if text == "pi":
                ratio = Fraction(1)
            elif text.startswith("pi/"):
                ratio = Fraction(1, int(text[3:]))
            else:
                m_str, n_str = text.split("/")
                ratio = Fraction(int(m_str.removesuffix("*pi").removesuffix("pi")), int(n_str))
        elif "/" in text:
            ratio = Fraction(text)
        else:
            return float(text), None
        return float(ratio) * math.pi, ratio
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"invalid angle {text!r}: {e}") from None


def _alpha_json(alpha: BaseAngle) -> dict:
    if alpha.is_rational:
        return {"form": "rational", "m": alpha.ratio.numerator, "n": alpha.ratio.denominator,
                "value": alpha.value}
    return {"form": "real", "value": alpha.value}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump_json(path: Path, obj: dict) -> None:
    _write(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _summary(args, alpha: BaseAngle, extra: dict) -> dict:
    """Every summary embeds the exact config and the library version."""
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config") and v is not None}
    cfg["alpha_parsed"] = _alpha_json(alpha)
    return {"version": __version__, "config": cfg, **extra}


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    alpha = parse_alpha(args.alpha)
    theta0, _ = parse_angle(args.theta0)
    s0, _ = parse_angle(args.s0) if args.s0 != "0" else (0.0, None)
    root = np.random.SeedSequence(args.seed)
    rng = np.random.default_rng(root.spawn(1)[0])
    traj = circle.simulate(circle.PhasePoint(s0, theta0), args.steps, alpha, rng)
    ce = circle.caustic(traj)
    out = Path(args.out)
    _write(out / "trajectory.csv", circle.trajectory_csv(traj))
    _write(out / "trajectory.svg", circle.trajectory_svg(traj, ce))
    extra = {
        "n": traj.n,
        "seed": args.seed,
        "caustic_radius": ce.radius,
        "degenerate": ce.degenerate,
        "discrepancy": (
            circle.dense_orbit_discrepancy(traj, args.bins) if traj.n + 1 >= args.bins else None
        ),
        "lyapunov": circle.lyapunov_estimate(traj, (0.0, 1.0)) if traj.n else None,
    }
    _dump_json(out / "summary.json", _summary(args, alpha, extra))
    return 0


def _cmd_markov(args) -> int:
    alpha = parse_alpha(args.alpha)
    theta0, ratio = parse_angle(args.theta0)
    rset = reachable.reachable_angles(
        ratio if ratio is not None else theta0, alpha, max_depth=args.max_depth
    )
    P = reachable.transition_matrix(rset, strict=False)
    report = rset.to_dict()
    row_defect = float(np.abs(P.sum(axis=1) - 1.0).max())
    report["matrix"] = [[float(x) for x in row] for row in P]
    report["substochastic"] = bool(row_defect > 1e-12)
    irr = reachable.is_irreducible(P)
    report["irreducible"] = bool(irr)
    if irr and not report["substochastic"]:
        report["aperiodic"] = bool(reachable.is_aperiodic(P))
        pi_vec = reachable.stationary_distribution(P)
        report["stationary"] = [float(x) for x in pi_vec]
        report["stationary_residual"] = float(np.abs(pi_vec @ P - pi_vec).max())
    out = Path(args.out)
    _dump_json(out / "markov.json", _summary(args, alpha, report))
    return 0


def _parse_initial(spec: str, bins: int, alpha: BaseAngle) -> evolution.AngleDensity:
    if spec == "mu":
        return evolution.AngleDensity.from_mu(bins)
    if spec.startswith("interval:I"):
        j = int(spec[len("interval:I"):])
        iv = evolution.invariant_intervals(alpha)
        if not 1 <= j <= len(iv):
            raise ConfigError(f"interval index I{j} out of range 1..{len(iv)}")
        lo, hi = iv[j - 1]
        return evolution.AngleDensity.uniform_interval(
            bins, float(lo) * math.pi, float(hi) * math.pi
        )
    if spec.startswith("interval:"):
        a_str, b_str = spec[len("interval:"):].split(",")
        return evolution.AngleDensity.uniform_interval(bins, float(a_str), float(b_str))
    if spec.startswith("mu:"):
        a_str, b_str = spec[3:].split(",")
        return evolution.AngleDensity.mu_restricted(bins, float(a_str), float(b_str))
    if spec.startswith("file:"):
        rows = Path(spec[5:]).read_text().strip().splitlines()[1:]
        masses = np.array([float(r.split(",")[2]) for r in rows])
        return evolution.AngleDensity(masses / masses.sum())
    raise ConfigError(
        f"invalid initial {spec!r}: expected mu, interval:I<j>, interval:a,b, mu:a,b or file:path"
    )


def _cmd_knudsen(args) -> int:
    alpha = parse_alpha(args.alpha)
    bins = args.bins
    if args.aligned:
        bins = evolution.aligned_bins(alpha, bins)
    init = _parse_initial(args.initial, bins, alpha)
    tv = evolution.knudsen_run(init, alpha, args.steps)
    out = Path(args.out)
    _write(
        out / "knudsen.csv",
        "step,tv_distance\n" + "".join(f"{k},{tv[k]:.17g}\n" for k in range(len(tv))),
    )
    _write(out / "density.csv", evolution.density_csv(init))
    extra = {
        "bins": bins,
        "tv_first": float(tv[0]),
        "tv_last": float(tv[-1]),
        "tv_min": float(tv.min()),
    }
    if alpha.is_rational:
        n = alpha.ratio.denominator
        extra["mu_invariant_union"] = evolution.invariant_union_mu(n)
        extra["tv_lower_bound"] = 1.0 - extra["mu_invariant_union"] - 2.0 / bins
    _dump_json(out / "summary.json", _summary(args, alpha, extra))
    return 0


def _cmd_caustic(args) -> int:
    alpha = parse_alpha(args.alpha)
    theta0, ratio = parse_angle(args.theta0)
    extra: dict = {}
    if alpha.is_rational:
        rset = reachable.reachable_angles(ratio if ratio is not None else theta0, alpha)
        ce = circle.caustic(rset)
        extra["states"] = len(rset)
    else:
        rset = None
        traj0 = circle.simulate(
            circle.PhasePoint(0.0, theta0), args.steps, alpha, np.random.default_rng(args.seed)
        )
        ce = circle.caustic(traj0)
    root = np.random.SeedSequence(args.seed)
    traj = circle.simulate(
        circle.PhasePoint(0.0, theta0),
        min(args.steps, 2000),
        alpha,
        np.random.default_rng(root.spawn(1)[0]),
    )
    out = Path(args.out)
    _write(out / "caustic.svg", circle.trajectory_svg(traj, ce))
    extra.update(
        {"radius": ce.radius, "degenerate": ce.degenerate, "attaining_angle": ce.attaining_angle}
    )
    _dump_json(out / "caustic.json", _summary(args, alpha, extra))
    return 0


def _cmd_lyapunov(args) -> int:
    alpha = parse_alpha(args.alpha)
    theta0, _ = parse_angle(args.theta0)
    v = tuple(float(x) for x in args.v.split(","))
    root = np.random.SeedSequence(args.seed)
    rng = np.random.default_rng(root.spawn(1)[0])
    out = Path(args.out)
    if args.table == "circle":
        traj = circle.simulate(circle.PhasePoint(0.0, theta0), args.steps, alpha, rng)
        acc = circle.accumulate_jacobian(traj.branches)
        extra = {
            "table": "circle",
            "estimate": circle.lyapunov_estimate(traj, v),
            "A_n": acc.a,
            "B_n": acc.b,
            "bound_2n_ok": abs(acc.a) <= 2 * acc.n,
        }
    else:
        run = pipeline.pipeline_simulate(
            pipeline.PipelineState(0.0, pipeline.BOTTOM, theta0), args.steps, alpha, rng
        )
        J = pipeline.accumulate_jacobian(run)
        sin_min = float(np.sin(run.theta).min())
        bound = run.n * float(run.flights.max()) / sin_min if run.n else 0.0
        extra = {
            "table": "pipeline",
            "estimate": pipeline.lyapunov_from_run(run, v),
            "offdiag": J.offdiag,
            "parity": J.parity,
            "offdiag_bound": bound,
            "bound_ok": abs(J.offdiag) <= bound,
        }
        _write(out / "pipeline.csv", pipeline.pipeline_csv(run))
    _dump_json(out / "lyapunov.json", _summary(args, alpha, extra))
    return 0


def _cmd_check(args) -> int:
    alpha = parse_alpha(args.alpha)
    grid = np.linspace(0.0, math.pi, 10_002)[1:-1]
    probs = probability_table(grid, alpha)
    report: dict = {
        "normalization_max_error": float(np.abs(probs.sum(axis=1) - 1.0).max()),
        "min_probability": float(probs.min()),
    }
    fs = [lambda t: 1.0, lambda t: t, lambda t: t * t, math.sin, lambda t: math.cos(3 * t)]
    report["liouville_residual"] = evolution.liouville_residual(alpha, fs)
    mu = evolution.AngleDensity.from_mu(args.bins)
    report["mu_pushforward_defect"] = evolution.total_variation(
        evolution.kernel_pushforward(mu, alpha), mu
    )
    if alpha.is_rational:
        fam = evolution.invariant_family_check(alpha)
        report["invariant_family_ok"] = fam.ok
        report["invariant_family_mappings"] = len(fam.mappings)
        report["invariant_family_violations"] = list(fam.violations)
    passed = (
        report["normalization_max_error"] <= 1e-10
        and report["min_probability"] >= -1e-12
        and report["liouville_residual"] <= 1e-8
        and report.get("invariant_family_ok", True)
    )
    report["passed"] = passed
    _dump_json(Path(args.out) / "check.json", _summary(args, alpha, report))
    return 0 if passed else 3


# ---------------------------------------------------------------------------
# parser


def _add_common(p, theta0=True, seeded=True):
    p.add_argument("--alpha", required=True, help="base angle: m/n (= m*pi/n), pi/k, or radians")
    if theta0:
        p.add_argument("--theta0", default="pi/20",
                       help="initial angle: m/n (= m*pi/n), pi/k, or radians")
    if seeded:
        p.add_argument("--seed", type=int, default=0, help="64-bit root seed")
    p.add_argument(
        "--out",
        default=os.environ.get(_OUT_ENV, "."),
        help=f"output directory (default: ${_OUT_ENV} or cwd)",
    )
    p.add_argument("--config", default=None, help="JSON file with defaults for these flags")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="randbilliards",
        description="random billiards with microstructure: experiments and checks",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="random circle-billiard trajectory")
    _add_common(p)
    p.add_argument("--s0", default="0", help="initial boundary position (radians)")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--bins", type=int, default=20, help="bins for the discrepancy statistic")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("markov", help="reachable set C(theta0) and its chain")
    _add_common(p, seeded=False)
    p.add_argument("--max-depth", type=int, default=None, help="BFS depth cap (irrational alpha)")
    p.set_defaults(func=_cmd_markov)

    p = sub.add_parser("knudsen", help="kernel-iteration TV curve")
    _add_common(p, theta0=False, seeded=False)
    p.add_argument(
        "--initial",
        default="mu",
        help="mu | interval:I<j> | interval:a,b (uniform) | mu:a,b (mu-restricted) | file:path",
    )
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument(
        "--aligned",
        action="store_true",
        help="round bins to a multiple of 4n (exact cell transport, rational alpha)",
    )
    p.set_defaults(func=_cmd_knudsen)

    p = sub.add_parser("caustic", help="caustic radius and degeneracy")
    _add_common(p)
    p.add_argument("--steps", type=int, default=2000, help="chords to draw / sample")
    p.set_defaults(func=_cmd_caustic)

    p = sub.add_parser("lyapunov", help="Lyapunov exponent estimate")
    _add_common(p)
    p.add_argument("--table", choices=("circle", "pipeline"), default="circle")
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--v", default="0,1", help="tangent direction v1,v2")
    p.set_defaults(func=_cmd_lyapunov)

    p = sub.add_parser("check", help="invariant suite for a base angle")
    _add_common(p, theta0=False, seeded=False)
    p.add_argument("--bins", type=int, default=256)
    p.set_defaults(func=_cmd_check)
    return ap


def _merge_config(args: argparse.Namespace, argv: list[str]) -> None:
    """Config-file values override parser defaults but not explicit flags."""
    if not getattr(args, "config", None):
        return
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {args.config!r}: {e}") from None
    explicit = {
        a.lstrip("-").replace("-", "_").split("=")[0] for a in argv if a.startswith("--")
    }
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        if attr not in explicit:
            setattr(args, attr, value)


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args, argv)
        return args.func(args)
    except ConfigError as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except RandBilliardsError as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
