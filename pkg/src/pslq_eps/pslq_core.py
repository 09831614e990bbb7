"""The lattice-style reduction engine: size reduction, Bergman swaps, corner
rotations, and the two search loops (exact-rational and epsilon-terminated).

State layout: H is a list of n rows of Reals (lower trapezoidal, n-1 wide);
A and B are n x n exact integer matrices with A.B = I maintained throughout.
Row operations applied to H are mirrored on A as row operations and on B as
the inverse column operations, so B = A^-1 at every step without ever
inverting anything.  The candidate relation is column n-2 (0-based) of B.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .hyperplane import HyperplaneMatrix
from .numerics import nearest_int

__all__ = [
    "DegenerateMatrixError",
    "Status",
    "PslqState",
    "IterationDiagnostic",
    "RelationResult",
    "size_reduce",
    "bergman_swap",
    "corner",
    "iterate",
    "run_pslq_epsilon",
    "run_pslq_exact",
    "pi_function",
    "invariant_gauge",
    "kernel_image",
]


# Default swap-weighting parameter: must exceed 2/sqrt(3) ~ 1.15470.  Staying
# just above the minimum keeps the integer transform entries as small as the
# theory allows, which is what limits precision loss in long reductions; large
# gamma converges in fewer iterations but inflates A roughly like 1/h_min and
# can exhaust the working precision before the termination threshold is hit.
DEFAULT_GAMMA = "1.1548"


class DegenerateMatrixError(RuntimeError):
    """A diagonal entry (or corner denominator) vanished mid-run.

    The termination test should have fired before this can happen; hitting it
    means the caller's threshold was zero or the matrix was malformed.
    """


class Status(Enum):
    FOUND = "found"
    ITERATION_CAP = "iteration_cap_exceeded"
    TRIVIAL = "trivial_relation"


@dataclass
class IterationDiagnostic:
    iteration: int
    swap_row: int
    h_nn1: object
    h_max: object
    pi_value: object
    gauge_lhs: object = None
    gauge_rhs: object = None

    def to_dict(self):
        num = lambda x: None if x is None else float(x)
        return {
            "k": self.iteration,
            "r": self.swap_row,
            "h_nn1": num(self.h_nn1),
            "h_max": num(self.h_max),
            "pi": num(self.pi_value),
            "gauge_lhs": num(self.gauge_lhs),
            "gauge_rhs": num(self.gauge_rhs),
        }


@dataclass
class RelationResult:
    status: Status
    m: list
    iterations: int
    final_h_nn1: object = None
    residual_bound: object = None
    gcd: int = 0
    trace: list = None

    @property
    def found(self):
        return self.status in (Status.FOUND, Status.TRIVIAL)


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _size_reduce_inplace(h, n, a=None, b=None):
    """One full size-reduction pass (rows top-down, columns right-to-left).

    Leaves |h[i][j]| <= |h[j][j]|/2 for j < i.  Row operations are mirrored
    on ``a`` (rows) and ``b`` (columns) when supplied.  Returns the list of
    applied (i, j, q) updates so callers can rebuild the transform if needed.
    """
    ops = []
    for i in range(1, n):
        hi = h[i]
        for j in range(min(i, n - 1) - 1, -1, -1):
            hjj = h[j][j]
            if hjj == 0:
                raise DegenerateMatrixError(f"zero diagonal at row {j}")
            q = nearest_int(hi[j] / hjj)
            if q == 0:
                continue
            ops.append((i, j, q))
            hj = h[j]
            for k in range(j + 1):
                hi[k] -= q * hj[k]
            if a is not None:
                ai, aj = a[i], a[j]
                for k in range(len(ai)):
                    ai[k] -= q * aj[k]
            if b is not None:
                for row in b:
                    row[j] += q * row[i]
    return ops


def size_reduce(H):
    """Return (D, H') with D unimodular, H' = D.H and |h'_ij| <= |h'_jj|/2.

    D is lower triangular with unit diagonal, so det D = 1.
    """
    h = H.copy_rows()
    n = H.n
    d = _identity(n)
    _size_reduce_inplace(h, n, a=d)
    return d, HyperplaneMatrix(entries=h, ctx=H.ctx)


def _bergman_choice(h, n, gpow):
    """Row index r (0-based) maximizing gamma^(r+1) |h_rr|; ties -> smallest."""
    best, best_val = 0, gpow[0] * abs(h[0][0])
    for j in range(1, n - 1):
        v = gpow[j] * abs(h[j][j])
        if v > best_val:
            best, best_val = j, v
    return best


def bergman_swap(H, gamma):
    """Pick the swap row per the weighted-diagonal rule.

    Returns (D, r) where D is the identity with rows r and r+1 exchanged
    (0-based, 0 <= r <= n-2).
    """
    ctx = H.ctx
    g = ctx.real(gamma)
    n = H.n
    gpow = [g ** (j + 1) for j in range(n - 1)]
    r = _bergman_choice(H.entries, n, gpow)
    d = _identity(n)
    d[r], d[r + 1] = d[r + 1], d[r]
    return d, r


def _corner_inplace(h, n, r, sqrt, zero, q_cum=None):
    """Restore lower-trapezoidal form after a swap at row r < n-2.

    Rotates columns r, r+1 by the Givens angle that annihilates h[r][r+1].
    Only rows >= r carry nonzeros in those columns.
    """
    beta, lam = h[r][r], h[r][r + 1]
    delta = sqrt(beta * beta + lam * lam)
    if delta == 0:
        raise DegenerateMatrixError(f"vanishing corner pivot at row {r}")
    c, s = beta / delta, lam / delta
    for i in range(r, n):
        x, y = h[i][r], h[i][r + 1]
        h[i][r] = x * c + y * s
        h[i][r + 1] = y * c - x * s
    h[r][r + 1] = zero  # exactly zero by construction
    if q_cum is not None:
        for row in q_cum:
            x, y = row[r], row[r + 1]
            row[r] = x * c + y * s
            row[r + 1] = y * c - x * s


def corner(H, r):
    """Return (Q, H') where Q is the explicit two-column rotation and H' = H.Q.

    Precondition: H was just produced by a swap of rows r, r+1 with r < n-2
    (0-based), so h[r][r+1] is the entry to annihilate.
    """
    ctx = H.ctx
    n = H.n
    beta, lam = H.entries[r][r], H.entries[r][r + 1]
    delta = ctx.sqrt(beta * beta + lam * lam)
    if delta == 0:
        raise DegenerateMatrixError(f"vanishing corner pivot at row {r}")
    zero, one = ctx.real(0), ctx.real(1)
    q = [[one if i == j else zero for j in range(n - 1)] for i in range(n - 1)]
    q[r][r] = beta / delta
    q[r][r + 1] = -lam / delta
    q[r + 1][r] = lam / delta
    q[r + 1][r + 1] = beta / delta
    h = H.copy_rows()
    _corner_inplace(h, n, r, ctx.sqrt, zero)
    return q, HyperplaneMatrix(entries=h, ctx=ctx)


@dataclass
class PslqState:
    """The evolving (H, A, B) triple of one reduction run."""

    h: list
    a: list
    b: list
    ctx: object
    gamma: object
    iteration: int = 0
    alpha: object = None  # UnitVector used to build H, for diagnostics
    trace: list = None
    q_cum: list = None
    _gpow: list = field(default=None, repr=False)

    @classmethod
    def start(cls, H0, gamma, alpha=None, trace=False, track_q=False):
        ctx = H0.ctx
        n = H0.n
        g = ctx.real(gamma)
        h = H0.copy_rows()
        a, b = _identity(n), _identity(n)
        q_cum = None
        if track_q:
            zero, one = ctx.real(0), ctx.real(1)
            q_cum = [
                [one if i == j else zero for j in range(n - 1)]
                for i in range(n - 1)
            ]
        state = cls(
            h=h, a=a, b=b, ctx=ctx, gamma=g, alpha=alpha,
            trace=[] if trace else None, q_cum=q_cum,
        )
        state._gpow = [g ** (j + 1) for j in range(n - 1)]
        _size_reduce_inplace(h, n, a=a, b=b)
        return state

    @property
    def n(self):
        return len(self.h)

    @property
    def h_nn1(self):
        return self.h[self.n - 1][self.n - 2]

    def h_max(self):
        h = self.h
        return max(abs(h[j][j]) for j in range(self.n - 1))

    def matrix(self):
        return HyperplaneMatrix(entries=[row[:] for row in self.h], ctx=self.ctx)

    def relation_column(self):
        """Column n-2 of B, the candidate relation in internal order."""
        n = self.n
        return [self.b[i][n - 2] for i in range(n)]


def iterate(state):
    """One full iteration: Bergman swap, conditional corner, size reduction."""
    h, a, b = state.h, state.a, state.b
    n = state.n
    r = _bergman_choice(h, n, state._gpow)
    h[r], h[r + 1] = h[r + 1], h[r]
    a[r], a[r + 1] = a[r + 1], a[r]
    for row in b:
        row[r], row[r + 1] = row[r + 1], row[r]
    if r < n - 2:
        _corner_inplace(h, n, r, state.ctx.sqrt, state.ctx.real(0), state.q_cum)
    _size_reduce_inplace(h, n, a=a, b=b)
    state.iteration += 1
    if state.trace is not None:
        diag = IterationDiagnostic(
            iteration=state.iteration,
            swap_row=r,
            h_nn1=abs(state.h_nn1),
            h_max=state.h_max(),
            pi_value=pi_function(state.matrix(), state.gamma),
        )
        if state.alpha is not None:
            diag.gauge_lhs, diag.gauge_rhs = invariant_gauge(state, state.alpha)
        state.trace.append(diag)
    return state


def pi_function(H, gamma):
    """Termination potential: prod_j max(|h_jj|, h_max/gamma^(n-1))^(n-j).

    Strictly decreases by a factor > tau every iteration, which is what makes
    the iteration bound in ``error_control`` work.
    """
    ctx = H.ctx
    h = H.entries
    n = H.n
    g = ctx.real(gamma)
    hmax = max(abs(h[j][j]) for j in range(n - 1))
    floor_val = hmax / g ** (n - 1)
    out = ctx.real(1)
    for j in range(n - 1):
        out *= max(abs(h[j][j]), floor_val) ** (n - 1 - j)
    return out


def kernel_image(state, alpha):
    """z = alpha . B, the input vector carried through the inverse transforms."""
    b = state.b
    n = state.n
    a = alpha.entries
    return [sum(a[i] * b[i][j] for i in range(n)) for j in range(n)]


def invariant_gauge(state, alpha):
    """The running certificate (|z_{n-1}|, sqrt(a_{n-1}^2+a_n^2) |h_{n,n-1}|).

    The left side never exceeds the right; at termination this turns the
    threshold on |h_{n,n-1}| into a bound on |<alpha, m>|.
    """
    n = state.n
    z = kernel_image(state, alpha)
    a = alpha.entries
    lhs = abs(z[n - 2])
    rhs = state.ctx.sqrt(a[n - 2] ** 2 + a[n - 1] ** 2) * abs(state.h_nn1)
    return lhs, rhs


def _canonical_sign(m):
    for x in m:
        if x != 0:
            return m if x > 0 else [-y for y in m]
    return m


def _finish(state, alpha, status, eps2=None):
    m = state.relation_column()
    g = math.gcd(*[abs(x) for x in m]) if any(m) else 0
    bound = None
    if alpha is not None and eps2 is not None:
        a = alpha.entries
        n = state.n
        bound = state.ctx.sqrt(a[n - 2] ** 2 + a[n - 1] ** 2) * eps2
        m = alpha.unpermute(m)
    m = _canonical_sign(m)
    return RelationResult(
        status=status,
        m=m,
        iterations=state.iteration,
        final_h_nn1=abs(state.h_nn1),
        residual_bound=bound,
        gcd=g,
        trace=state.trace,
    )


def run_pslq_epsilon(
    H0,
    eps2,
    gamma=DEFAULT_GAMMA,
    max_iterations=None,
    alpha=None,
    trace=False,
    track_q=False,
    check_b_columns=False,
    on_iteration=None,
):
    """Run the epsilon-terminated search until |h_{n,n-1}| < eps2.

    ``H0`` is any lower-trapezoidal matrix with nonzero diagonal (usually a
    freshly built hyperplane matrix).  When ``alpha`` (the UnitVector used to
    build H0) is given, the returned relation is mapped back to the caller's
    original entry order and a terminal residual bound is attached.

    ``max_iterations`` defaults to the certified worst-case bound for this
    (n, gamma, eps2); exceeding it returns status ITERATION_CAP rather than
    raising.  ``check_b_columns`` opts into the early exit that scans every
    column of B each iteration (off by default; the final column is the
    certified one).
    """
    ctx = H0.ctx
    n = H0.n
    e2 = ctx.real(eps2)
    if not e2 > 0:
        raise ValueError("termination threshold must be positive")
    g = ctx.real(gamma)
    if not g * ctx.sqrt(3) > 2:
        raise ValueError("gamma must exceed 2/sqrt(3)")
    if max_iterations is None:
        from .error_control import iteration_bound

        max_iterations = iteration_bound(n, g, e2)
    state = PslqState.start(H0, g, alpha=alpha, trace=trace, track_q=track_q)
    while abs(state.h_nn1) >= e2:
        if state.iteration >= max_iterations:
            return _finish(state, alpha, Status.ITERATION_CAP, e2)
        iterate(state)
        if on_iteration is not None:
            on_iteration(state)
        if check_b_columns and alpha is not None:
            a = alpha.entries
            lim = ctx.sqrt(a[n - 2] ** 2 + a[n - 1] ** 2) * e2
            for j in range(n):
                col = [state.b[i][j] for i in range(n)]
                if any(col) and abs(sum(a[i] * col[i] for i in range(n))) < lim:
                    state.b = _swap_columns_to_relation(state.b, j, n)
                    return _finish(state, alpha, Status.FOUND, e2)
    return _finish(state, alpha, Status.FOUND, e2)


def _swap_columns_to_relation(b, j, n):
    if j != n - 2:
        for row in b:
            row[j], row[n - 2] = row[n - 2], row[j]
    return b


def run_pslq_exact(alpha, gamma=DEFAULT_GAMMA, max_iterations=100000):
    """Exact-arithmetic search for rational input; terminates with h_{n,n-1} = 0.

    Only rational entries are accepted: that is the one case where the
    exact-zero termination test is decidable.  Arithmetic runs in sympy over
    Q adjoined with the square roots of the tail sums, so the result carries
    an exactly-zero residual.
    """
    import sympy

    rats = []
    for x in alpha:
        if isinstance(x, float):
            raise ValueError(
                "exact mode needs rational input (int, Fraction or sympy "
                "Rational); use the epsilon-terminated search for floats"
            )
        if isinstance(x, Fraction):
            x = sympy.Rational(x.numerator, x.denominator)
        x = sympy.sympify(x)
        if not x.is_rational:
            raise ValueError(f"exact mode needs rational input, got {x}")
        rats.append(x)
    n = len(rats)
    if n < 2:
        raise ValueError("need at least 2 entries")
    for i, x in enumerate(rats):
        if x == 0:
            m = [0] * n
            m[i] = 1
            return RelationResult(
                status=Status.TRIVIAL, m=m, iterations=0, final_h_nn1=0, gcd=1
            )

    g = sympy.Rational(gamma)
    simp = lambda e: sympy.radsimp(sympy.expand(e))
    # tail norms and hyperplane matrix, symbolically
    s = [None] * n
    acc = sympy.Integer(0)
    for i in range(n - 1, -1, -1):
        acc += rats[i] ** 2
        s[i] = sympy.sqrt(acc)
    h = [[sympy.Integer(0)] * (n - 1) for _ in range(n)]
    for i in range(n):
        for j in range(min(i, n - 1)):
            h[i][j] = simp(-rats[i] * rats[j] / (s[j] * s[j + 1]))
        if i < n - 1:
            h[i][i] = simp(s[i + 1] / s[i])
    a, b = _identity(n), _identity(n)

    def reduce_pass():
        for i in range(1, n):
            for j in range(min(i, n - 1) - 1, -1, -1):
                q = int(sympy.floor(h[i][j] / h[j][j] + sympy.Rational(1, 2)))
                if q == 0:
                    continue
                for k in range(j + 1):
                    h[i][k] = simp(h[i][k] - q * h[j][k])
                for k in range(n):
                    a[i][k] -= q * a[j][k]
                for row in b:
                    row[j] += q * row[i]

    reduce_pass()
    iterations = 0
    while not h[n - 1][n - 2].equals(0):
        if iterations >= max_iterations:
            raise DegenerateMatrixError("exact search exceeded iteration cap")
        gv = [float((g ** (j + 1) * abs(h[j][j])).evalf(30)) for j in range(n - 1)]
        r = max(range(n - 1), key=lambda j: (gv[j], -j))
        h[r], h[r + 1] = h[r + 1], h[r]
        a[r], a[r + 1] = a[r + 1], a[r]
        for row in b:
            row[r], row[r + 1] = row[r + 1], row[r]
        if r < n - 2:
            beta, lam = h[r][r], h[r][r + 1]
            delta = sympy.sqrt(simp(beta * beta + lam * lam))
            c, sn = simp(beta / delta), simp(lam / delta)
            for i in range(r, n):
                x, y = h[i][r], h[i][r + 1]
                h[i][r] = simp(x * c + y * sn)
                h[i][r + 1] = simp(y * c - x * sn)
            h[r][r + 1] = sympy.Integer(0)
        reduce_pass()
        iterations += 1
    m = _canonical_sign([b[i][n - 2] for i in range(n)])
    gg = math.gcd(*[abs(int(x)) for x in m]) if any(m) else 0
    return RelationResult(
        status=Status.FOUND,
        m=[int(x) for x in m],
        iterations=iterations,
        final_h_nn1=0,
        residual_bound=0,
        gcd=gg,
    )
