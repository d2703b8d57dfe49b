"""Command-line front end.

Exit codes: 0 success, 1 identity failure, 2 input/output or usage error,
3 math-domain error (degenerate divisor, pole, point off the curve, ...).
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import goldens
from .divisor import (
    DegenerateLeading,
    Divisor,
    PointOffCurve,
    RepeatedRoots,
    ZeroXi,
    random_float_jet,
    random_rational_divisor,
    upsilon,
    upsilon_inv,
)
from .jetspace import JetPoint, ZeroScale, mu_from_jet, mu_poly, rescale
from .spectral import CurveSpec, PoleAtZero, _scalar_to_json, eval_mu, singular_count, to_exact_scalar
from .waveplane import (
    OffCurve,
    PathInconsistency,
    StepFailure,
    ZeroDenominator,
    integrate_flow,
    phi_eigen,
    phi_zero_energy,
    branch_wronskian,
    w_grid,
    w_on_axis,
)

EXIT_OK, EXIT_IDENTITY, EXIT_IO, EXIT_DOMAIN = 0, 1, 2, 3

DOMAIN_ERRORS = (
    DegenerateLeading,
    RepeatedRoots,
    PointOffCurve,
    ZeroXi,
    ZeroScale,
    PoleAtZero,
    StepFailure,
    OffCurve,
    ZeroDenominator,
    PathInconsistency,
    ZeroDivisionError,
    ArithmeticError,
)


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str | None
    tol: float
    seed: int
    mode: str
    out: Path | None
    genus: int | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise InputError("--tol must be positive")
        if self.genus is not None and self.genus < 1:
            raise InputError("--genus must be at least 1")


# ---------------------------------------------------------------------------
# I/O helpers


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_jet(path: str, mode: str) -> JetPoint:
    data = _read_json(path)
    try:
        jet = JetPoint.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid jet in {path}: {exc}") from exc
    if mode == "float":
        return jet.as_float()
    if mode == "exact" and not jet.is_exact:
        jet = JetPoint(jet.g, tuple(Fraction(v) for v in jet.a), tuple(Fraction(v) for v in jet.c))
    return jet


def _scalar(text: str):
    text = text.strip()
    if "j" in text:
        return complex(text)
    return to_exact_scalar(text)


def _emit(report: dict, cfg: RunConfig, rows: list | None = None, header: list | None = None):
    """JSON report to stdout; CSV rows (or the report, without rows) to --out."""
    if cfg.out is not None:
        try:
            if rows is not None:
                with open(cfg.out, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(header)
                    writer.writerows(rows)
                report = dict(report, csv=str(cfg.out))
            else:
                cfg.out.write_text(json.dumps(report, indent=2, default=_json_default) + "\n")
        except OSError as exc:
            raise InputError(f"cannot write {cfg.out}: {exc}") from exc
    print(json.dumps(report, indent=2, default=_json_default))


def _json_default(v):
    if isinstance(v, (Fraction, complex)):
        return _scalar_to_json(v)
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"not serialisable: {type(v)}")


def _to_float(v):
    z = complex(v)
    return z if z.imag else z.real


def _real_cols(values):
    arr = np.asarray(values)
    return arr.real, (arr.imag if np.iscomplexobj(arr) else np.zeros(arr.shape))


# ---------------------------------------------------------------------------
# subcommands


def cmd_curve(args, cfg: RunConfig) -> int:
    jet = _load_jet(args.jet, cfg.mode)
    curve = mu_from_jet(jet)
    weights = []
    for k in range(1, 2 * jet.g + 1):
        w = mu_poly(k, jet.g).weight(jet.g)
        weights.append({"mu": k, "expected": 2 * k + 2, "weight": w, "ok": w in (None, 2 * k + 2)})
    report = {
        "curve": curve.to_json(),
        "singular_count": singular_count(curve),
        "weights": weights,
    }
    _emit(report, cfg)
    return EXIT_OK if all(w["ok"] for w in weights) else EXIT_IDENTITY


def _jet_gap(a: JetPoint, b: JetPoint):
    if a.is_exact and b.is_exact:
        return max(abs(x - y) for x, y in zip(a.c, b.c))
    scale = max(1.0, max(abs(complex(v)) for v in a.c))
    return max(abs(complex(x) - complex(y)) for x, y in zip(a.c, b.c)) / scale


def _jet_roundtrip(jet: JetPoint, mode: str):
    curve, d = upsilon(jet, mode="float" if mode == "float" else "auto")
    back = upsilon_inv(curve, d)
    return curve, d, _jet_gap(jet, back)


def _random_jets(g: int, count: int, seed: int, mode: str):
    if mode == "float":
        rng = np.random.default_rng(seed)
        for _ in range(count):
            yield random_float_jet(g, rng)
        return
    rng = random.Random(seed)
    for _ in range(count):
        curve, d = random_rational_divisor(g, rng)
        yield upsilon_inv(curve, d)


def cmd_roundtrip(args, cfg: RunConfig) -> int:
    if args.jet is not None:
        jets = [_load_jet(args.jet, cfg.mode)]
    else:
        jets = list(_random_jets(cfg.genus or 2, args.count, cfg.seed, cfg.mode))
    worst = 0
    for jet in jets:
        _, _, gap = _jet_roundtrip(jet, cfg.mode)
        worst = max(worst, gap)
    exact = all(j.is_exact for j in jets) and cfg.mode != "float"
    ok = worst == 0 if exact else float(worst) <= cfg.tol
    _emit({"cases": len(jets), "exact": exact, "max_residual": worst, "tol": cfg.tol, "ok": ok}, cfg)
    return EXIT_OK if ok else EXIT_IDENTITY


def cmd_divisor(args, cfg: RunConfig) -> int:
    if not args.roundtrip:
        if args.input is None:
            raise InputError("divisor needs a jet file (or --roundtrip)")
        jet = _load_jet(args.input, cfg.mode)
        curve, d = upsilon(jet, mode="float" if cfg.mode == "float" else "auto")
        _emit({"curve": curve.to_json(), "divisor": d.to_json()}, cfg)
        return EXIT_OK
    if args.input is not None:
        data = _read_json(args.input)
        try:
            cases = [(CurveSpec.from_json(data["curve"]), Divisor.from_json(data["divisor"]))]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid curve/divisor file: {exc}") from exc
    elif cfg.mode == "float":
        rng = np.random.default_rng(cfg.seed)
        cases = [upsilon(random_float_jet(cfg.genus or 2, rng), mode="float") for _ in range(args.count)]
    else:
        rng = random.Random(cfg.seed)
        cases = [random_rational_divisor(cfg.genus or 2, rng) for _ in range(args.count)]
    worst = 0
    for curve, d in cases:
        if cfg.mode == "float":
            curve = CurveSpec(curve.g, tuple(_to_float(m) for m in curve.mu))
            d = Divisor(tuple((_to_float(x), _to_float(y)) for x, y in d.points))
        jet = upsilon_inv(curve, d, tol=max(cfg.tol, 1e-9))
        curve2, d2 = upsilon(jet, mode="float" if cfg.mode == "float" else "auto")
        if curve.exact and d.exact and cfg.mode != "float":
            gap = 0 if (d.canonical() == d2.canonical() and curve2 == curve) else 1
        else:
            gap = max(
                d.distance(d2),
                max(abs(complex(p) - complex(q)) / max(1.0, abs(complex(p))) for p, q in zip(curve.mu, curve2.mu)),
            )
        worst = max(worst, gap)
    exact = cfg.mode != "float" and all(c.exact and d.exact for c, d in cases)
    ok = worst == 0 if exact else worst <= cfg.tol
    _emit({"cases": len(cases), "exact": exact, "max_residual": worst, "ok": ok}, cfg)
    return EXIT_OK if ok else EXIT_IDENTITY


def _span(text: str):
    parts = [float(p) for p in text.split(":")]
    return parts[0] if len(parts) == 1 else (parts[0], parts[1])


def cmd_flow(args, cfg: RunConfig) -> int:
    jet = _load_jet(args.jet, "auto")
    traj = integrate_flow(jet, args.direction, _span(args.span), cfg.tol, samples=args.samples)
    header = ["t"] + [f"c{j}" for j in range(2 * jet.g + 1)]
    rows = [[t, *np.real(c)] for t, c in zip(traj.times, traj.states)]
    report = traj.report()
    report["end"] = [float(np.real(v)) for v in traj.states[-1]]
    _emit(report, cfg, rows, header)
    return EXIT_OK if traj.drift_ok else EXIT_IDENTITY


def _grid_axis(text: str):
    parts = text.split(":")
    if len(parts) != 4:
        raise InputError(f"grid axis must be k:lo:hi:n, got {text!r}")
    k, lo, hi, n = int(parts[0]), float(parts[1]), float(parts[2]), int(parts[3])
    ax = np.unique(np.concatenate([np.linspace(lo, hi, n), [0.0]]))
    return k, ax


def cmd_wfun(args, cfg: RunConfig) -> int:
    jet = _load_jet(args.jet, "auto")
    if not args.grid:
        lo, hi, n = args.xs.split(":")
        xs = np.unique(np.concatenate([np.linspace(float(lo), float(hi), int(n)), [0.0]]))
        ax = w_on_axis(jet, xs, tol=min(cfg.tol, 1e-12))
        rows = [[x, u.real, w.real] for x, u, w in zip(xs, ax.u, ax.w)]
        i0 = int(np.flatnonzero(xs == 0)[0])
        report = {"samples": int(xs.size), "w0": float(ax.w[i0]), "dlogw0": float(ax.dlogw[i0])}
        _emit(report, cfg, rows, ["x", "u", "w"])
        return EXIT_OK
    axes = [_grid_axis(t) for t in args.grid]
    grid = w_grid(jet, axes, tol=min(cfg.tol, 1e-12))
    rows = []
    g = jet.g
    for idx in np.ndindex(grid.logw.shape):
        coords = [grid.axes[d][i] for d, i in enumerate(idx)]
        rows.append(coords + [grid.logw[idx]] + list(grid.hessian[idx].ravel()))
    header = [f"t{k}" for k in grid.flows] + ["logw"] + [f"p{i}{j}" for i in range(1, g + 1) for j in range(1, g + 1)]
    report = {
        "flows": list(grid.flows),
        "shape": list(grid.logw.shape),
        "path_gap": grid.path_gap,
        "hessian_residual": grid.hessian_residual,
        "fd_asymmetry": grid.fd_asymmetry,
    }
    ok = grid.hessian_residual <= max(1e-5, 10 * cfg.tol)
    report["ok"] = ok
    _emit(report, cfg, rows, header)
    return EXIT_OK if ok else EXIT_IDENTITY


def cmd_eigen(args, cfg: RunConfig) -> int:
    jet = _load_jet(args.jet, "auto")
    traj = integrate_flow(jet, "x", _span(args.span), cfg.tol, samples=args.samples)
    if args.zero_energy:
        sample = phi_zero_energy(traj, args.sign)
        partner = phi_zero_energy(traj, -args.sign)
        wr = branch_wronskian(sample, partner)
        extra = {"wronskian": [_scalar_to_json(complex(wr.min())), _scalar_to_json(complex(wr.max()))]}
    else:
        if args.xi is None:
            raise InputError("--xi is required unless --zero-energy is given")
        xi = _scalar(args.xi)
        xi = complex(xi) if isinstance(xi, complex) else float(xi)
        if args.y is not None:
            y = _scalar(args.y)
            y = complex(y) if isinstance(y, complex) else float(y)
        else:
            m = 4 * complex(eval_mu(mu_from_jet(jet.as_float()), xi))
            y = args.sign * np.sqrt(m)
            y = y.real if y.imag == 0 else y
        sample = phi_eigen(traj, xi, y)
        extra = {"xi": _scalar_to_json(xi), "y": _scalar_to_json(y)}
    re_phi, im_phi = _real_cols(sample.phi)
    rows = [[x, np.real(u), a, b] for x, u, a, b in zip(sample.xs, sample.u, re_phi, im_phi)]
    ok = sample.riccati_residual <= 1e-8 and sample.eigen_residual <= 1e-6
    report = {
        "energy": _scalar_to_json(complex(sample.energy)),
        "riccati_residual": sample.riccati_residual,
        "eigen_residual": sample.eigen_residual,
        "ok": ok,
        **extra,
    }
    _emit(report, cfg, rows, ["x", "u", "phi_re", "phi_im"])
    return EXIT_OK if ok else EXIT_IDENTITY


def cmd_verify(args, cfg: RunConfig) -> int:
    g = cfg.genus or 1
    if args.level == "symbolic":
        if g > goldens.SYMBOLIC_GENUS_CAP:
            print(
                f"symbolic verification is capped at genus {goldens.SYMBOLIC_GENUS_CAP}; "
                f"rerun with --level numeric for genus {g}",
                file=sys.stderr,
            )
            return EXIT_IO
        checks = goldens.symbolic_suite(g)
    else:
        checks = goldens.numeric_suite(g, cfg.seed, cfg.tol)
    summary = goldens.summarize(checks)
    summary.update(genus=g, level=args.level)
    _emit(summary, cfg)
    return EXIT_OK if not summary["failed"] else EXIT_IDENTITY


def cmd_rescale_check(args, cfg: RunConfig) -> int:
    rng = random.Random(cfg.seed)
    genera = [cfg.genus] if cfg.genus else [1, 2, 3]
    failures = []
    cases = 0
    for _ in range(args.count):
        g = rng.choice(genera)
        curve, d = random_rational_divisor(g, rng)
        jet = upsilon_inv(curve, d)
        kappa = Fraction(rng.randint(1, 12), rng.randint(1, 12)) * rng.choice((1, -1))
        cases += 1
        if mu_from_jet(rescale(jet, kappa)) != curve.scaled(kappa):
            failures.append({"jet": jet.to_json(), "kappa": str(kappa)})
    _emit({"cases": cases, "failures": failures, "ok": not failures}, cfg)
    return EXIT_OK if not failures else EXIT_IDENTITY


def run_goldens(cfg: RunConfig) -> int:
    checks = goldens.formula_goldens()
    summary = goldens.summarize(checks)
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name}" + (f"  [{c.detail}]" if not c.ok else ""), file=sys.stderr)
    _emit(summary, cfg)
    return EXIT_OK if not summary["failed"] else EXIT_IDENTITY


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, suppress: bool):
    def default(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--tol", type=float, default=default(1e-10), help="numerical tolerance (default 1e-10)")
    p.add_argument("--seed", type=int, default=default(0), help="seed for randomised suites")
    p.add_argument("--mode", choices=["exact", "float", "auto"], default=default("auto"),
                   help="arithmetic: exact rationals, floats, or as given by the input")
    p.add_argument("--out", type=Path, default=default(None), help="write CSV/JSON output here")
    p.add_argument("--genus", type=int, default=default(None), help="genus for generated inputs")


def build_parser() -> argparse.ArgumentParser:
    # flags are accepted before or after the subcommand; the subcommand copies
    # carry no defaults so they never overwrite a value given up front
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)

    parser = argparse.ArgumentParser(prog="kdv", description="Stationary KdV hierarchy toolkit")
    _add_common(parser, suppress=False)
    parser.add_argument("--paper-goldens", action="store_true", help="run the printed-formula fixture suite")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("curve", parents=[common], help="curve coefficients of a jet")
    p.add_argument("jet")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("roundtrip", parents=[common], help="jet -> (curve, divisor) -> jet")
    p.add_argument("jet", nargs="?")
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("divisor", parents=[common], help="divisor of a jet, or (curve, divisor) round trip")
    p.add_argument("input", nargs="?")
    p.add_argument("--roundtrip", action="store_true")
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_divisor)

    p = sub.add_parser("flow", parents=[common], help="integrate the x or t_k flow")
    p.add_argument("jet")
    p.add_argument("--direction", default="x", help="x, or k / tk for the t_k flow")
    p.add_argument("--span", default="1.0", help="end time or lo:hi")
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("wfun", parents=[common], help="w-function on the x-axis or on a grid")
    p.add_argument("jet")
    p.add_argument("--xs", default="-1:1:201", help="lo:hi:n for the axis sampling")
    p.add_argument("--grid", action="append", help="k:lo:hi:n, repeat per axis")
    p.set_defaults(func=cmd_wfun)

    p = sub.add_parser("eigen", parents=[common], help="eigenfunction along x")
    p.add_argument("jet")
    p.add_argument("--xi", default=None)
    p.add_argument("--y", default=None, help="curve ordinate (default: branch of sqrt(4 mu(xi)))")
    p.add_argument("--sign", type=int, choices=[1, -1], default=1)
    p.add_argument("--zero-energy", action="store_true")
    p.add_argument("--span", default="1.0")
    p.add_argument("--samples", type=int, default=41)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("verify", parents=[common], help="identity suites")
    p.add_argument("--level", choices=["symbolic", "numeric"], default="symbolic")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rescale-check", parents=[common], help="curve covariance under rescaling")
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_rescale_check)
    return parser


RANGE_FLAGS = ("--span", "--xs", "--grid", "--xi", "--y")


def _attach_range_values(argv: list[str]) -> list[str]:
    """Rewrite ``--xs -1:1:11`` as ``--xs=-1:1:11`` so ranges may start with a minus sign."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in RANGE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _attach_range_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    try:
        cfg = RunConfig(args.command, args.tol, args.seed, args.mode, args.out, args.genus)
        if args.paper_goldens:
            return run_goldens(cfg)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_IO
        return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DOMAIN_ERRORS as exc:
        print(f"math-domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, IndexError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
