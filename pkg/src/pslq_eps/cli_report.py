"""Command-line surface and machine-readable reporting.

Commands: ``plan`` (budget only), ``find`` (end-to-end relation search),
``minpoly`` (minimal-polynomial recovery for an algebraic constant),
``sweep`` (re-run over a range of target accuracies and classify outcomes),
``verify`` (check a candidate relation), ``selftest`` (fast invariant
suites).

Exit codes: 0 found and bounded, 2 found but the forward bound was not
applicable, 3 iteration cap hit, 4 infeasible plan, 5 input error.
"""

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .error_control import (
    BoundNotApplicableError,
    InfeasiblePlanError,
    forward_bound,
    plan as make_plan,
)
from .hyperplane import TrivialRelationFound, build_h, normalize_and_permute
from .ingest import VectorSpec, perturb, verify_relation
from .numerics import real_to_str, with_precision
from .pslq_core import DEFAULT_GAMMA, RelationResult, Status, run_pslq_epsilon

REPORT_SCHEMA = 1
SWEEP_CSV_FIELDS = ["i", "log10_eps1", "log10_eps2", "outcome", "m_hash"]

EXIT_OK = 0
EXIT_UNBOUNDED = 2
EXIT_ITERATION_CAP = 3
EXIT_INFEASIBLE = 4
EXIT_INPUT = 5

_PRELIM_DIGITS = 50  # enough to extract alpha_n for planning


@dataclass
class RunReport:
    """Everything needed to reproduce and audit one search run."""

    spec: dict
    plan: object
    result: RelationResult
    residual: object = None
    bound: object = None
    bound_reason: str = ""
    wall_time: float = 0.0
    digits: int = 0
    gamma: float = float(DEFAULT_GAMMA)
    seed: object = None
    trace_path: str = ""
    schema: int = REPORT_SCHEMA
    version: str = field(default=__version__)

    def to_dict(self):
        r = self.result
        return {
            "schema": self.schema,
            "version": self.version,
            "spec": self.spec,
            "plan": self.plan.to_dict() if self.plan else None,
            "status": r.status.value,
            "m": r.m,
            "gcd": r.gcd,
            "iterations": r.iterations,
            "final_h_nn1": _num(r.final_h_nn1),
            "residual_bound": _num(r.residual_bound),
            "residual": _num(self.residual),
            "forward_bound": _num(self.bound),
            "bound_reason": self.bound_reason,
            "wall_time_s": round(self.wall_time, 3),
            "digits": self.digits,
            "gamma": self.gamma,
            "seed": self.seed,
            "trace_path": self.trace_path,
        }

    def exit_code(self):
        if self.result.status is Status.ITERATION_CAP:
            return EXIT_ITERATION_CAP
        if self.bound is None:
            return EXIT_UNBOUNDED
        return EXIT_OK


@dataclass
class SweepPoint:
    i: int
    eps1: object
    eps2: object
    outcome: str  # correct | incorrect | infeasible
    m_hash: str = ""
    m: list = None

    def csv_row(self):
        import math

        ceil_log = lambda x: "" if x is None else int(math.ceil(-math.log10(float(x))))
        return {
            "i": self.i,
            "log10_eps1": ceil_log(self.eps1),
            "log10_eps2": ceil_log(self.eps2),
            "outcome": self.outcome,
            "m_hash": self.m_hash,
        }


def _num(x):
    return None if x is None else real_to_str(x) if hasattr(x, "_mpf_") else x


def _hash_relation(m):
    return hashlib.sha256(",".join(map(str, m)).encode()).hexdigest()[:12]


def plan_for_spec(spec, eps, G, omega=0.5):
    """Extract alpha_n from the normalized source vector and build the budget."""
    ctx = with_precision(_PRELIM_DIGITS)
    alpha = normalize_and_permute(spec.build(ctx), ctx)
    return make_plan(eps, G, alpha.n, alpha.last, omega=omega)


def run_search(
    spec,
    eps,
    G,
    omega=0.5,
    gamma=DEFAULT_GAMMA,
    digits=None,
    seed=None,
    inject_noise=False,
    trace_path="",
    check_b_columns=False,
    max_iterations=None,
):
    """Plan, build the hyperplane matrix, run the search, and report.

    ``digits`` overrides the plan's working precision.  With ``inject_noise``
    the input vector is perturbed by eps1-bounded noise (deterministic in
    ``seed``) before the search, turning exact generator output into honest
    empirical data.
    """
    t0 = time.perf_counter()
    budget = plan_for_spec(spec, eps, G, omega=omega)
    working = digits or _reduction_digits(budget)
    ctx = with_precision(working)
    v = spec.build(ctx)
    if inject_noise:
        v = perturb(v, ctx.real(budget.eps1), seed if seed is not None else 0)
    try:
        alpha = normalize_and_permute(v, ctx)
    except TrivialRelationFound as tr:
        result = RelationResult(
            status=Status.TRIVIAL, m=tr.relation, iterations=0, gcd=1
        )
        return _build_report(
            spec, budget, result, v, t0, working, gamma, seed, trace_path
        )
    H = build_h(alpha)
    result = run_pslq_epsilon(
        H,
        budget.eps2,
        gamma=gamma,
        max_iterations=max_iterations,
        alpha=alpha,
        trace=bool(trace_path),
        check_b_columns=check_b_columns,
    )
    report = _build_report(
        spec, budget, result, v, t0, working, gamma, seed, trace_path
    )
    if trace_path:
        _write_trace(trace_path, result, H)
    return report


def _reduction_digits(budget):
    """Default working precision for a run with this budget.

    The plan's working_digits covers the input-accuracy requirement, but the
    reduction itself needs more headroom: the integer transform entries grow
    to roughly 1/eps2 before the termination threshold is reached, and the
    floating-point error in the maintained matrix is amplified by that
    factor.  Twice the eps2 exponent (plus the data requirement's guard)
    keeps the noise floor below the threshold.
    """
    mp = budget.eps2.context
    eps2_digits = int(mp.ceil(-mp.log10(budget.eps2)))
    return max(budget.working_digits, 2 * eps2_digits + 20)


def _build_report(spec, budget, result, v, t0, digits, gamma, seed, trace_path):
    residual = bound = None
    reason = ""
    if result.found and any(result.m):
        residual = verify_relation(v, result.m)
        ctx = v[0].context
        norm_m = ctx.sqrt(sum(x * x for x in result.m))
        if norm_m > budget.M:
            reason = f"||m|| = {float(norm_m):.6g} exceeds the planned M"
        else:
            try:
                bound = forward_bound(
                    norm_m, budget.eps2, budget.eps3, budget.n, budget.alpha_n
                )
            except BoundNotApplicableError as exc:
                reason = str(exc)
    elif result.status is Status.ITERATION_CAP:
        reason = "iteration cap exceeded"
    return RunReport(
        spec=spec.to_dict(),
        plan=budget,
        result=result,
        residual=residual,
        bound=bound,
        bound_reason=reason,
        wall_time=time.perf_counter() - t0,
        digits=digits,
        gamma=float(gamma),
        seed=seed,
        trace_path=trace_path,
    )


def _write_trace(path, result, H):
    # the per-iteration diagnostics live on the state's trace; run_pslq_epsilon
    # returns only the result, so re-expose them via the result when present
    diags = getattr(result, "trace", None)
    if diags is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        for d in diags:
            fh.write(json.dumps(d.to_dict()) + "\n")


def _sweep_one(args):
    spec_dict, i, G, omega, gamma, digits, seed, inject = args
    spec = VectorSpec.from_dict(spec_dict)
    eps = 10.0 ** (-i) if i < 300 else f"1e-{i}"
    try:
        budget = plan_for_spec(spec, eps, G, omega=omega)
    except InfeasiblePlanError:
        return SweepPoint(i=i, eps1=None, eps2=None, outcome="infeasible")
    report = run_search(
        spec, eps, G, omega=omega, gamma=gamma, digits=digits,
        seed=(seed or 0) + i, inject_noise=inject,
    )
    m = report.result.m if report.result.found else []
    return SweepPoint(
        i=i,
        eps1=float(budget.eps1),
        eps2=float(budget.eps2),
        outcome="pending",
        m_hash=_hash_relation(m) if m else "",
        m=m,
    )


def run_sweep(spec, exponents, G, omega=0.5, gamma=DEFAULT_GAMMA, digits=None, seed=None,
              reference_m=None, jobs=1, inject_noise=False):
    """Run the search at eps = 10^-i for each i and classify each outcome.

    Classification uses ``reference_m`` when given; otherwise "stability":
    agreement with the run at the smallest eps (largest i).  Points are
    independent and may run across a process pool; results merge in index
    order regardless.

    The data is built once per point at working precision and, by default,
    not perturbed: the sweep probes how the eps choice alone changes the
    outcome.  ``inject_noise`` additionally degrades each point's data to
    its own eps1 budget; note that data error at the full budget can
    legitimately flip an outcome, since eps1 certifies the residual bound,
    not recovery of a particular relation.
    """
    exponents = list(exponents)
    if not exponents:
        raise ValueError("empty exponent range")
    work = [
        (spec.to_dict(), i, G, omega, gamma, digits, seed, inject_noise)
        for i in exponents
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_sweep_one, work))
    else:
        points = [_sweep_one(w) for w in work]
    if reference_m is None:
        candidates = [p for p in sorted(points, key=lambda p: -p.i) if p.m]
        reference_m = candidates[0].m if candidates else None
    ref = _canon(reference_m) if reference_m else None
    for p in points:
        if p.outcome == "infeasible":
            continue
        p.outcome = "correct" if p.m and ref and _canon(p.m) == ref else "incorrect"
    return points


def _canon(m):
    first = next((x for x in m if x), 1)
    return tuple(m) if first > 0 else tuple(-x for x in m)


def write_sweep_csv(points, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_CSV_FIELDS)
        w.writeheader()
        for p in points:
            w.writerow(p.csv_row())


def read_sweep_csv(path):
    points = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            points.append(
                SweepPoint(
                    i=int(row["i"]),
                    eps1=None if row["log10_eps1"] == "" else 10.0 ** -int(row["log10_eps1"]),
                    eps2=None if row["log10_eps2"] == "" else 10.0 ** -int(row["log10_eps2"]),
                    outcome=row["outcome"],
                    m_hash=row["m_hash"],
                )
            )
    return points


# --------------------------------------------------------------------------
# argument parsing

def _add_vector_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--file", help="vector file (one decimal literal per line)")
    g.add_argument("--constants", help="comma-separated constant expressions")
    g.add_argument("--powers", metavar="BASE",
                   help="base constant expression for (b^d, ..., b, 1)")
    p.add_argument("--degree", type=int, help="degree d for --powers")


def _spec_from_args(args):
    if args.file:
        return VectorSpec("file", path=args.file)
    if args.constants:
        return VectorSpec(
            "constant_list", exprs=[e.strip() for e in args.constants.split(",")]
        )
    if args.degree is None:
        raise ValueError("--powers requires --degree")
    return VectorSpec("algebraic_powers", base=args.powers, degree=args.degree)


def _add_common(p):
    p.add_argument("--digits", type=int, help="working precision override")
    p.add_argument("--gamma", type=float, default=float(DEFAULT_GAMMA))
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", default="", metavar="PATH", help="JSONL trace output")
    p.add_argument("--json", default="", metavar="PATH", help="JSON report output")
    p.add_argument("--extended", action="store_true",
                   help="allow long runs (large degree, many digits)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pslq-eps",
        description="Integer relation detection with certified error control.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="derive the (eps1, eps2) budget only")
    _add_vector_args(p)
    p.add_argument("--eps", required=True, help="target bound on |<alpha, m>|")
    p.add_argument("-G", "--coeff-bound", required=True, type=float)
    _add_common(p)

    p = sub.add_parser("find", help="plan and run a relation search")
    _add_vector_args(p)
    p.add_argument("--eps", required=True)
    p.add_argument("-G", "--coeff-bound", required=True, type=float)
    p.add_argument("--perturb", action="store_true",
                   help="inject eps1-bounded noise before the search")
    p.add_argument("--max-iterations", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("minpoly", help="recover a minimal polynomial")
    p.add_argument("constant", help="base constant expression")
    p.add_argument("degree", type=int)
    p.add_argument("--eps", required=True)
    p.add_argument("-G", "--coeff-bound", required=True, type=float)
    _add_common(p)

    p = sub.add_parser("sweep", help="run over eps = 10^-i for a range of i")
    _add_vector_args(p)
    p.add_argument("--from", dest="lo", type=int, required=True)
    p.add_argument("--to", dest="hi", type=int, required=True)
    p.add_argument("-G", "--coeff-bound", required=True, type=float)
    p.add_argument("--reference-m", help="file with the known relation")
    p.add_argument("--csv", required=True, help="CSV output path")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--perturb", action="store_true",
                   help="degrade each point's data to its own eps1 budget")
    _add_common(p)

    p = sub.add_parser("verify", help="check a candidate relation")
    _add_vector_args(p)
    p.add_argument("m_file", help="file with one integer coefficient per line")
    p.add_argument("--eps2", default=None,
                   help="terminal threshold for the certified residual bound")
    p.add_argument("--tol", default=None,
                   help="residual below which the relation counts as exact")
    _add_common(p)

    p = sub.add_parser("selftest", help="fast invariant suites")
    _add_common(p)
    return ap


def _read_m_file(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read().replace(",", " ")
    return [int(tok) for tok in text.split()]


def _emit(args, payload):
    if getattr(args, "json", ""):
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)


def _print_report(report):
    r = report.result
    print(f"status     : {r.status.value}")
    if r.m:
        print(f"relation   : {r.m}  (gcd {r.gcd})")
    print(f"iterations : {r.iterations}")
    if report.residual is not None:
        print(f"residual   : {_num(report.residual)}")
    if report.bound is not None:
        print(f"bound      : {_num(report.bound)}")
    elif report.bound_reason:
        print(f"bound      : not applicable ({report.bound_reason})")
    print(f"wall time  : {report.wall_time:.2f} s at {report.digits} digits")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except InfeasiblePlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _dispatch(args):
    if args.command == "plan":
        spec = _spec_from_args(args)
        budget = plan_for_spec(spec, args.eps, args.coeff_bound, omega=args.omega)
        for k, v in budget.to_dict().items():
            print(f"{k:15s}: {v}")
        _emit(args, budget.to_dict())
        return EXIT_OK

    if args.command in ("find", "minpoly"):
        if args.command == "minpoly":
            if args.degree + 1 > 64 and not args.extended:
                raise ValueError(
                    f"degree {args.degree} needs --extended (dimension "
                    f"{args.degree + 1} > 64)"
                )
            spec = VectorSpec("algebraic_powers", base=args.constant,
                              degree=args.degree)
            inject = False
            max_it = None
        else:
            spec = _spec_from_args(args)
            inject = args.perturb
            max_it = args.max_iterations
        report = run_search(
            spec, args.eps, args.coeff_bound, omega=args.omega, gamma=args.gamma,
            digits=args.digits, seed=args.seed, inject_noise=inject,
            trace_path=args.trace, max_iterations=max_it,
        )
        _print_report(report)
        if args.command == "minpoly" and report.result.found:
            print(f"polynomial coefficients (degree-descending): {report.result.m}")
        _emit(args, report.to_dict())
        return report.exit_code()

    if args.command == "sweep":
        spec = _spec_from_args(args)
        ref = _read_m_file(args.reference_m) if args.reference_m else None
        points = run_sweep(
            spec, range(args.lo, args.hi + 1), args.coeff_bound,
            omega=args.omega, gamma=args.gamma, digits=args.digits,
            seed=args.seed, reference_m=ref, jobs=args.jobs,
            inject_noise=args.perturb,
        )
        write_sweep_csv(points, args.csv)
        for p in points:
            row = p.csv_row()
            print(f"i={row['i']:3d}  eps1@1e-{row['log10_eps1']}  "
                  f"eps2@1e-{row['log10_eps2']}  {row['outcome']}")
        _emit(args, [p.csv_row() for p in points])
        return EXIT_OK

    if args.command == "verify":
        spec = _spec_from_args(args)
        ctx = with_precision(args.digits or 2 * _PRELIM_DIGITS)
        v = spec.build(ctx)
        m = _read_m_file(args.m_file)
        residual = verify_relation(v, m)
        print(f"residual   : {_num(residual)}")
        payload = {"m": m, "residual": _num(residual)}
        if args.eps2 is not None:
            alpha = normalize_and_permute(v, ctx)
            a = alpha.entries
            bound = ctx.sqrt(a[-2] ** 2 + a[-1] ** 2) * ctx.real(args.eps2)
            print(f"terminal bound: {_num(bound)}")
            payload["terminal_bound"] = _num(bound)
        _emit(args, payload)
        tol = ctx.real(args.tol) if args.tol else ctx.real(10) ** (-ctx.digits // 2)
        return EXIT_OK if residual < tol else EXIT_INPUT

    if args.command == "selftest":
        from .selftest import run_selftest

        ok = run_selftest(verbose=True)
        return EXIT_OK if ok else 1

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
