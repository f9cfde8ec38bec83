"""Command-line front door: ``confbubble <command> [options]``.

Every command prints a JSON report (schema ``cb-report-1``) and exits 0 on
pass, 1 on a failed check, 2 on usage or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

SCHEMA = "cb-report-1"
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

REPORT_LAYOUT = """report layout ({schema}):
  {{"schema": "{schema}", "command": <name>, "config": {{...}},
   "result": {{...}}, "passed": true|false}}
field sources: --grid PATH (CGF1 or CSV) | --fixture ID [--param k=v ...] |
               --bubbles "x1,..,xn:mu;..." (analytic superposition) | default standard bubble
exit codes: 0 pass, 1 check failure, 2 usage or I/O error""".format(schema=SCHEMA)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{REPORT_LAYOUT}\n")
        sys.exit(2)


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings "inf", "-inf", "nan"."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# argument helpers


def _vec(text: str):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _parse_bubbles(text: str, n: int | None):
    import numpy as np

    from .mobius import BubbleParams

    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise UsageError(f"bubble spec {part!r} must read x1,...,xn:mu")
        c, mu = part.split(":")
        out.append(BubbleParams(np.array(_vec(c)), float(mu)))
    if not out:
        raise UsageError("empty bubble list")
    if n is not None and any(p.n != n for p in out):
        raise UsageError("bubble centers must have n coordinates")
    return out


def _add_source(p):
    g = p.add_argument_group("field source")
    g.add_argument("--grid", help="CGF1 or CSV grid file")
    g.add_argument("--fixture", help="built-in fixture id")
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="fixture parameter (repeatable)")
    g.add_argument("--bubbles", help='analytic bubble sum "x1,..,xn:mu;..."')
    g.add_argument("--n", type=int, default=3, help="dimension for analytic sources (default 3)")


def _load_source(args):
    """Returns ``(field, description)``."""
    from .blowup.bubbles import standard_bubble, superposition
    from .fixtures import gen_fixture
    from .gridio import read_cgf1, read_csv

    chosen = [s for s in (args.grid, args.fixture, args.bubbles) if s]
    if len(chosen) > 1:
        raise UsageError("give at most one of --grid, --fixture, --bubbles")
    if args.grid:
        path = args.grid
        field = read_csv(path) if path.lower().endswith(".csv") else read_cgf1(path)
        return field, {"grid": path}
    if args.fixture:
        fx = gen_fixture(args.fixture, _params(args.param), args.seed)
        return fx.grid, {"fixture": args.fixture, "params": _params(args.param)}
    if args.bubbles:
        bubbles = _parse_bubbles(args.bubbles, None)
        return superposition(bubbles), {"bubbles": args.bubbles}
    return standard_bubble(args.n), {"bubbles": "standard", "n": args.n}


def _operator(args, n: int):
    from .opspec import parse_operator

    if getattr(args, "op", None):
        return parse_operator(args.op, n), json.loads(args.op)
    k = getattr(args, "k", None) or 1
    return parse_operator({"f": "sigma_k_root", "k": k}, n), {"f": "sigma_k_root", "k": k}


# ---------------------------------------------------------------------------
# commands; each returns (result dict, passed)


def cmd_check_invariance(args):
    import numpy as np

    from .mobius import invariance_check, random_map

    u, src = _load_source(args)
    rng = np.random.default_rng(args.seed)
    worst, worst_map = 0.0, None
    for _ in range(args.maps):
        phi = random_map(u.n, rng)
        pts = rng.uniform(-1, 1, (args.points, u.n))
        gap = invariance_check(u, phi, pts)
        if gap > worst:
            worst, worst_map = gap, phi.to_json()
    return {"source": src, "maps": args.maps, "points": args.points, "max_mismatch": worst, "worst_map": worst_map, "tol": args.tol}, worst <= args.tol


def cmd_verify_bubble(args):
    import numpy as np

    from .blowup.bubbles import bubble
    from .conformal import conformal_hessian, operator_residual
    from .fields import derivatives
    from .mobius import BubbleParams

    center = np.array(args.center if args.center else [0.0] * args.n)
    if center.size != args.n:
        raise UsageError("--center needs n coordinates")
    u = bubble(BubbleParams(center, args.mu))
    op, op_json = _operator(args, args.n)
    rng = np.random.default_rng(args.seed)
    pts = center + rng.uniform(-2, 2, (args.points, args.n))
    res, dev = [], 0.0
    for x in pts:
        r = operator_residual(op, u, x)
        res.append(abs(r.value) if r.in_cone else math.inf)
        dev = max(dev, float(np.max(np.abs(conformal_hessian(derivatives(u, x)) - 2 * np.eye(args.n)))))
    worst = max(res)
    return {"operator": op_json, "center": center, "mu": args.mu, "points": args.points, "max_residual": worst, "max_hessian_deviation": dev, "tol": args.tol}, worst <= args.tol


def cmd_residual(args):
    import numpy as np

    from .conformal import residual_field
    from .fields import GridField
    from .gridio import write_cgf1

    u, src = _load_source(args)
    if not isinstance(u, GridField):
        raise UsageError("residual needs a grid source (--grid or --fixture)")
    op, op_json = _operator(args, u.n)
    rf = residual_field(op, u, args.scheme)
    vals = np.abs(rf.values[rf.mask])
    worst = float(vals.max()) if vals.size else math.nan
    idx = np.unravel_index(int(np.nanargmax(np.abs(rf.values))), rf.values.shape) if vals.size else None
    if args.out:
        write_cgf1(args.out, rf.to_grid())
    result = {
        "source": src,
        "operator": op_json,
        "scheme": args.scheme,
        "nodes": int(rf.mask.size),
        "outside_cone": int((~rf.mask).sum()),
        "max_abs_residual": worst,
        "worst_node": None if idx is None else (rf.origin + rf.h * np.array(idx)),
        "tol": args.tol,
    }
    return result, bool(vals.size) and worst <= args.tol and bool(rf.mask.all())


def cmd_extract_bubbles(args):
    from .blowup.extraction import ExtractionConfig, extract_bubbles

    u, src = _load_source(args)
    cfg = ExtractionConfig(eps=args.eps, c_star=args.c_star, delta_star=args.delta_star, exclusion=args.exclusion)
    rep = extract_bubbles(u, cfg)
    return {"source": src, **rep.to_dict()}, rep.passed


def cmd_centered_liouville(args):
    from .blowup.liouville import centered_liouville_check

    u, src = _load_source(args)
    res = centered_liouville_check(u, args.eps, args.R)
    return {"source": src, **res.to_dict()}, res.passed


def cmd_quantitative_liouville(args):
    from .blowup.liouville import quantitative_liouville

    u, src = _load_source(args)
    res = quantitative_liouville(u, args.gamma, args.r1, args.eps, args.delta_star, args.R)
    return {"source": src, **res.to_dict()}, res.passed


def cmd_moving_sphere(args):
    from .symmetry import sphere_compare

    u, src = _load_source(args)
    res = sphere_compare(u, args.x, args.lam, args.R, rmax=args.rmax, exclude_origin=args.exclude_origin)
    return {"source": src, **res.to_dict()}, res.holds


def cmd_critical_radius(args):
    from .symmetry import critical_radius

    u, src = _load_source(args)
    res = critical_radius(u, args.x, args.R)
    lo, hi = res.bracket
    certified = res.violations[0] <= 1e-9 < res.violations[1] and hi - lo <= 1e-6 * args.R
    return {"source": src, **res.to_dict(), "identity_ratio": res.identity_ratio(u), "certified": certified}, certified


def cmd_radial_shoot(args):
    import numpy as np

    from .blowup.bubbles import bubble_values
    from .blowup.radial import radial_shoot
    from .gridio import write_profile_csv

    op, op_json = _operator(args, args.n)
    prof = radial_shoot(op, args.n, args.v0, args.rmax, args.samples)
    pts = np.zeros((prof.r.size, args.n))
    pts[:, 0] = prof.r
    err = float(np.max(np.abs(prof.v - bubble_values(np.zeros(args.n), args.v0, pts))))
    if args.csv:
        write_profile_csv(args.csv, prof.columns())
    worst = float(np.max(np.abs(prof.residual)))
    return {
        "operator": op_json,
        "v0": args.v0,
        "rmax": args.rmax,
        "stop_reason": prof.stop_reason,
        "r_end": float(prof.r[-1]),
        "max_residual": worst,
        "sup_error_vs_bubble": err,
        "tol": args.tol,
    }, worst <= args.tol


def cmd_holder_gauge(args):
    from .blowup.holder import holder_gauge

    u, src = _load_source(args)
    res = holder_gauge(u, args.x, args.alpha, args.domain_radius)
    ok = (not res.finite) or res.residual <= args.tol
    return {"source": src, **res.to_dict(), "tol": args.tol}, ok


def cmd_eps_regularity(args):
    from .blowup.bubbles import bubble_energy
    from .blowup.energy import eps_regularity_probe

    u, src = _load_source(args)
    thr = args.threshold if args.threshold is not None else 0.5 * bubble_energy(u.n)
    res = eps_regularity_probe(u, thr)
    ok = (not res.small) or res.sup_b1 <= args.factor * res.median_b2
    return {"source": src, **res.to_dict(), "factor": args.factor}, ok


def cmd_green_bound(args):
    from .harmonic import AnnulusSpec, green_estimate

    spec = AnnulusSpec(args.rho, args.rho0, args.rho1, args.rho2, 3)
    res = green_estimate(spec, walks=args.walks, seed=args.seed, method=args.method)
    return res.to_dict(), res.c > 0 and res.floor > 0


def cmd_audit_operator(args):
    from .cones import audit_conditions

    op, op_json = _operator(args, args.n)

    rep = audit_conditions(op, args.n, args.samples, args.seed)
    return {"operator": op_json, **rep.to_dict()}, rep.passed


def cmd_gen_fixture(args):
    from .fixtures import gen_fixture
    from .gridio import write_cgf1, write_csv

    fx = gen_fixture(args.id, _params(args.param), args.seed)
    if args.out.lower().endswith(".csv"):
        write_csv(args.out, fx.grid)
    else:
        write_cgf1(args.out, fx.grid)
    meta_path = args.meta or args.out + ".json"
    with open(meta_path, "w") as fh:
        fh.write(dump_report(fx.meta))
    return {"id": args.id, "out": args.out, "meta": meta_path, "dims": list(fx.grid.dims), **fx.meta}, True


# ---------------------------------------------------------------------------
# parser


COMMANDS = {
    "check-invariance": (cmd_check_invariance, "mobius.invariance_check: sorted eigenvalues of A^(u_phi)(x) against A^u(phi(x)) over random Mobius maps"),
    "verify-bubble": (cmd_verify_bubble, "conformal.operator_residual on a bubble U^{center,mu}, plus the A^U = 2I deviation"),
    "residual": (cmd_residual, "conformal.residual_field: f(lambda(A^u)) - 1 at interior grid nodes"),
    "extract-bubbles": (cmd_extract_bubbles, "blowup.extract_bubbles: greedy bubble landscape with the six property flags"),
    "centered-liouville": (cmd_centered_liouville, "blowup.centered_liouville_check: closeness profile to U^{0,u(0)} over delta0"),
    "quantitative-liouville": (cmd_quantitative_liouville, "blowup.quantitative_liouville: height, position and closeness bounds at the maximum"),
    "moving-sphere": (cmd_moving_sphere, "symmetry.sphere_compare: sup of (w_{x,lam} - w)_+ outside B_lam(x)"),
    "critical-radius": (cmd_critical_radius, "symmetry.critical_radius: bisection for the critical moving-sphere radius"),
    "radial-shoot": (cmd_radial_shoot, "blowup.radial_shoot: radial profile of f(lambda(A^v)) = 1 from v(0) = v0"),
    "holder-gauge": (cmd_holder_gauge, "blowup.holder_gauge: radius where mu^alpha [w]_{alpha,mu}(x) = 1"),
    "eps-regularity": (cmd_eps_regularity, "blowup.eps_regularity_probe: energy on B_2 against a threshold, with sup on B_1"),
    "green-bound": (cmd_green_bound, "harmonic.green_estimate: sampled annulus Green's function and fitted lower-bound constant"),
    "audit-operator": (cmd_audit_operator, "cones.audit_conditions: structural conditions of an operator on sampled eigenvalues"),
    "gen-fixture": (cmd_gen_fixture, "fixtures.gen_fixture: write a built-in fixture grid plus JSON metadata"),
}


def build_parser() -> Parser:
    parser = Parser(prog="confbubble", description="Checks for conformally invariant fully nonlinear operators.", epilog=REPORT_LAYOUT, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--threads", type=int, default=None, help="cap worker threads (also CB_THREADS)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    ps = {}
    for name, (_, doc) in COMMANDS.items():
        p = sub.add_parser(name, help=doc, description=f"Runs {doc}.")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--report", help="also write the JSON report here")
        p.add_argument("--threads", type=int, default=None, help="cap worker threads (also CB_THREADS)")
        ps[name] = p

    p = ps["check-invariance"]
    _add_source(p)
    p.add_argument("--maps", type=int, default=100)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)

    p = ps["verify-bubble"]
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--op", help="operator JSON (overrides --k)")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--center", type=_vec)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)

    p = ps["residual"]
    _add_source(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--op", help="operator JSON (overrides --k)")
    p.add_argument("--scheme", choices=["central-2", "central-4"], default="central-2")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out", help="write the residual grid (CGF1)")

    p = ps["extract-bubbles"]
    _add_source(p)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--c-star", type=float, default=None)
    p.add_argument("--delta-star", type=float, default=0.125)
    p.add_argument("--exclusion", type=float, default=None)

    p = ps["centered-liouville"]
    _add_source(p)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--R", type=float, default=1.0)

    p = ps["quantitative-liouville"]
    _add_source(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--r1", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--delta-star", type=float, default=0.125)
    p.add_argument("--R", type=float, default=8.0)

    p = ps["moving-sphere"]
    _add_source(p)
    p.add_argument("--x", type=_vec, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--R", type=float, default=4.0)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--exclude-origin", action="store_true")

    p = ps["critical-radius"]
    _add_source(p)
    p.add_argument("--x", type=_vec, required=True)
    p.add_argument("--R", type=float, default=50.0)

    p = ps["radial-shoot"]
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--op", help="operator JSON (overrides --k)")
    p.add_argument("--v0", type=float, default=1.0)
    p.add_argument("--rmax", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=501)
    p.add_argument("--csv", help="write the profile columns")
    p.add_argument("--tol", type=float, default=1e-6)

    p = ps["holder-gauge"]
    _add_source(p)
    p.add_argument("--x", type=_vec, required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--domain-radius", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-6)

    p = ps["eps-regularity"]
    _add_source(p)
    p.add_argument("--threshold", type=float, default=None, help="default: half the bubble energy")
    p.add_argument("--factor", type=float, default=10.0)

    p = ps["green-bound"]
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--rho0", type=float, default=0.5)
    p.add_argument("--rho1", type=float, default=0.7)
    p.add_argument("--rho2", type=float, default=0.9)
    p.add_argument("--walks", type=int, default=10_000)
    p.add_argument("--method", choices=["wos", "series"], default="wos")

    p = ps["audit-operator"]
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--op", help="operator JSON (overrides --k)")
    p.add_argument("--samples", type=int, default=10_000)

    p = ps["gen-fixture"]
    p.add_argument("--id", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True, help="grid path (.cgf1, or .csv for n <= 3)")
    p.add_argument("--meta", help="metadata path (default OUT.json)")
    return parser


def _apply_threads(args):
    threads = args.threads if args.threads is not None else os.environ.get("CB_THREADS")
    if threads is None:
        return None
    threads = int(threads)
    if threads < 1:
        raise UsageError("--threads must be positive")
    for var in THREAD_VARS:
        os.environ[var] = str(threads)
    return threads


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "report", "threads")}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    from .errors import ConfBubbleError, UnknownFixture

    try:
        threads = _apply_threads(args)
        result, passed = COMMANDS[args.command][0](args)
    except (UsageError, UnknownFixture, ValueError) as exc:
        sys.stderr.write(f"confbubble {args.command}: {exc}\n\n{REPORT_LAYOUT}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"confbubble {args.command}: {exc}\n")
        return 2
    except ConfBubbleError as exc:
        result, passed = {"error": type(exc).__name__, "message": str(exc)}, False
        if hasattr(exc, "lower_bound"):
            result["lower_bound"] = exc.lower_bound
    report = {"schema": SCHEMA, "command": args.command, "config": _config(args), "result": result, "passed": bool(passed)}
    if threads is not None:
        report["threads"] = threads
    text = dump_report(report)
    sys.stdout.write(text)
    if args.report:
        try:
            with open(args.report, "w") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stderr.write(f"confbubble: cannot write report: {exc}\n")
            return 2
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
