"""Input vectors: file ingestion, generator families for known-relation demo
instances, controlled perturbation injection, and the brute-force oracle.

Vector file format: UTF-8 text, one decimal literal per line, ``#`` comments,
optional header line ``@digits N`` declaring the accuracy of the literals.
"""

import ast
import math
import random
import warnings

import numpy as np

from .numerics import eval_constant

__all__ = [
    "VectorSpec",
    "read_vector",
    "eval_expression",
    "algebraic_power_vector",
    "transcendental_demo_vector",
    "perturb",
    "brute_force_relation",
    "smallest_nonzero_residual",
    "verify_relation",
]


class VectorParseError(ValueError):
    """A vector file entry failed to parse; carries the 1-based line number."""

    def __init__(self, path, lineno, detail):
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {detail}")


def _significant_digits(literal):
    mantissa = literal.lower().split("e")[0].lstrip("+-").replace(".", "")
    return len(mantissa.lstrip("0"))


def read_vector(path, ctx):
    """Parse one decimal literal per line into Reals at ctx precision.

    Warns when a literal carries fewer significant digits than the context
    asks for: that is the empirical-accuracy budget check, since a short
    literal silently caps the achievable eps1.
    """
    out = []
    declared = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("@digits"):
                try:
                    declared = int(line.split()[1])
                except (IndexError, ValueError):
                    raise VectorParseError(path, lineno, f"bad header {line!r}")
                continue
            try:
                out.append(ctx.real(line))
            except ValueError:
                raise VectorParseError(path, lineno, f"not a decimal literal: {line!r}")
            digits = declared or _significant_digits(line)
            if digits < ctx.digits:
                warnings.warn(
                    f"{path}:{lineno}: literal has ~{digits} significant digits, "
                    f"below the working precision of {ctx.digits}",
                    stacklevel=2,
                )
    if not out:
        raise ValueError(f"{path}: no vector entries found")
    return out


_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load,
)


def eval_expression(expr, ctx):
    """Evaluate a small constant expression: +,-,*,/,^, integers, and the
    named constants pi, ln2, sqrt(k), nthroot(k, d).

    Examples: ``pi^2``, ``1/(nthroot(3,5) + nthroot(2,4))``,
    ``5 - 4*ln2 + 16*ln2^2 - pi^2``.
    """
    tree = ast.parse(expr.replace("^", "**"), mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ValueError(f"unsupported syntax in constant expression {expr!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int):
                return ctx.real(node.value)
            raise ValueError(f"only integer literals allowed, got {node.value!r}")
        if isinstance(node, ast.Name):
            return eval_constant(node.id, ctx)
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.keywords:
                raise ValueError(f"unsupported call in {expr!r}")
            args = []
            for arg in node.args:
                if not isinstance(arg, ast.Constant) or not isinstance(arg.value, int):
                    raise ValueError(f"{node.func.id} takes integer literals only")
                args.append(str(arg.value))
            return eval_constant(f"{node.func.id}({','.join(args)})", ctx)
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        left, right = ev(node.left), ev(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
        return left ** right

    return ev(tree)


def constant_entry(expr, ctx):
    """One entry of a constant list: either a plain decimal literal, kept
    digit for digit, or a small constant expression."""
    try:
        return ctx.real(expr)
    except ValueError:
        return eval_expression(expr, ctx)


class VectorSpec:
    """A recipe for an input vector: a file, a constant list, or the powers
    (b^d, ..., b, 1) of a base constant."""

    def __init__(self, kind, **params):
        if kind not in ("file", "constant_list", "algebraic_powers"):
            raise ValueError(f"unknown vector kind {kind!r}")
        if kind == "algebraic_powers" and params.get("degree", 0) < 1:
            raise ValueError("algebraic_powers needs degree >= 1")
        self.kind = kind
        self.params = params

    def build(self, ctx):
        if self.kind == "file":
            return read_vector(self.params["path"], ctx)
        if self.kind == "constant_list":
            return [constant_entry(e, ctx) for e in self.params["exprs"]]
        base = eval_expression(self.params["base"], ctx)
        return algebraic_power_vector(base, self.params["degree"], ctx)

    def to_dict(self):
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(d.pop("kind"), **d)


def algebraic_power_vector(base, degree, ctx):
    """Descending powers (base^degree, ..., base, 1); a minimal-polynomial
    candidate's coefficients are an integer relation for this vector."""
    b = ctx.real(base)
    if b == 0:
        raise ValueError("base must be nonzero")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    out = [ctx.real(1)]
    for _ in range(degree):
        out.append(out[-1] * b)
    out.reverse()
    return out


def transcendental_demo_vector(ctx):
    """The vector (t, 1, ln2, ln^2 2, pi^2) with t = 5 - 4 ln2 + 16 ln^2 2 - pi^2.

    By construction it has the exact integer relation (1, -5, 4, -16, 1);
    t equals a known double-integral constant, generated here from its
    closed form rather than by quadrature.
    """
    ln2 = ctx.ln2
    pi2 = ctx.pi ** 2
    t = 5 - 4 * ln2 + 16 * ln2 * ln2 - pi2
    return [t, ctx.real(1), ln2, ln2 * ln2, pi2]


def perturb(v, eps1, seed):
    """Add deterministic pseudo-random noise with 2-norm strictly below eps1.

    The direction is uniform on the sphere, the radius uniform in [0, eps1);
    a hard-capped radius (rather than e.g. Gaussian noise) keeps the
    perturbation inside the budget with certainty.
    """
    e1 = abs(v[0] * 0 + eps1)  # coerce into the vector's context
    if not e1 > 0:
        raise ValueError("eps1 must be positive")
    rng = random.Random(seed)
    direction = [rng.gauss(0.0, 1.0) for _ in v]
    norm = math.sqrt(sum(x * x for x in direction))
    if norm == 0:
        direction[0], norm = 1.0, 1.0
    radius = e1 * rng.random()
    return [x + radius * (d / norm) for x, d in zip(v, direction)]


def _enumerate_candidates(alpha, inf_bound):
    """Yield (float_residual, m) minima over the grid ||m||_inf <= inf_bound.

    For each prefix (m_1..m_{n-1}) the best last coordinate is the clamped
    rounding of -<prefix, alpha>/alpha_n, so the search is over the
    (2B+1)^(n-1) prefixes only, vectorized with numpy.
    """
    a = np.array([float(x) for x in alpha], dtype=np.float64)
    n = len(a)
    B = inf_bound
    rng = np.arange(-B, B + 1)
    grids = np.meshgrid(*([rng] * (n - 1)), indexing="ij")
    prefix = np.stack([g.ravel() for g in grids], axis=1)
    s = prefix @ a[:-1]
    best_last = np.clip(np.floor(-s / a[-1] + 0.5), -B, B).astype(np.int64)
    resid = np.abs(s + best_last * a[-1])
    return prefix, best_last, resid


def brute_force_relation(alpha, inf_bound, residual_tol, exclude=()):
    """Exhaustive oracle: the m minimizing |<alpha, m>| over ||m||_inf <= B.

    Returns None when the minimum is not below residual_tol.  Candidates are
    canonicalized with their first nonzero entry positive (sign symmetry),
    and residual ties broken by smallest infinity norm, then 1-norm, then
    lexicographic order.  ``exclude`` skips listed vectors (and their
    negations), e.g. a known exact relation when probing for the next-best
    residual.

    Practical only at desk scale (roughly n <= 5, inf_bound <= 60).
    """
    prefix, best_last, resid = _enumerate_candidates(alpha, inf_bound)
    excluded = {tuple(e) for e in exclude} | {tuple(-x for x in e) for e in exclude}
    order = np.argsort(resid, kind="stable")
    tol = float(residual_tol)
    best = None
    # exact re-evaluation of the float shortlist, smallest residuals first
    for idx in order[: min(len(order), 4096)]:
        m = [int(x) for x in prefix[idx]] + [int(best_last[idx])]
        if not any(m) or tuple(m) in excluded:
            continue
        if next(x for x in m if x) < 0:
            m = [-x for x in m]
        r = verify_relation(alpha, m)
        if r >= tol:
            if resid[idx] > 2 * tol:
                break
            continue
        key = (r, max(abs(x) for x in m), sum(abs(x) for x in m), m)
        if best is None or key < best:
            best = key
    return None if best is None else best[3]


def smallest_nonzero_residual(alpha, inf_bound, exclude=()):
    """min |<alpha, m>| over the grid, skipping ``exclude`` (+-): a numerical
    gap-bound probe."""
    prefix, best_last, resid = _enumerate_candidates(alpha, inf_bound)
    excluded = {tuple(e) for e in exclude} | {tuple(-x for x in e) for e in exclude}
    order = np.argsort(resid, kind="stable")
    for idx in order:
        m = [int(x) for x in prefix[idx]] + [int(best_last[idx])]
        if not any(m) or tuple(m) in excluded:
            continue
        return verify_relation(alpha, m)
    raise ValueError("grid exhausted")


def verify_relation(alpha, m):
    """|<alpha, m>| at the full working precision of alpha's entries."""
    if len(alpha) != len(m):
        raise ValueError(f"dimension mismatch: {len(alpha)} vs {len(m)}")
    return abs(sum(a * int(c) for a, c in zip(alpha, m)))
