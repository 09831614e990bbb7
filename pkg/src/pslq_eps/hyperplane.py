"""Construction of the hyperplane matrix orthogonal to an input vector.

For a unit vector a = (a_1, ..., a_n) with all entries nonzero, the n x (n-1)
lower-trapezoidal matrix H with

    h[i][i] = s_{i+1} / s_i
    h[i][j] = -a_i a_j / (s_j s_{j+1})   for j < i
    s_j     = sqrt(a_j^2 + ... + a_n^2)

has orthonormal columns spanning the hyperplane orthogonal to a (a.H = 0,
H^T.H = I).  This module also provides the closed-form Frobenius norms and
the explicit inverse of the leading (n-1) x (n-1) block, which the error
calculus in ``error_control`` relies on.

Construction requires every entry nonzero.  An (effectively) zero entry at
position i means the unit vector e_i already IS an integer relation, so
instead of erroring we short-circuit with :class:`TrivialRelationFound`.
"""

from dataclasses import dataclass, field

__all__ = [
    "UnitVector",
    "HyperplaneMatrix",
    "TrivialRelationFound",
    "normalize_and_permute",
    "partial_sums",
    "build_h",
    "principal_inverse",
    "fro_norms",
]


class TrivialRelationFound(Exception):
    """An input entry is (numerically) zero, so a unit vector is a relation.

    Attributes:
        index: position of the zero entry, in the caller's original order.
        relation: the unit relation e_index as a list of ints.
    """

    def __init__(self, index, n):
        self.index = index
        self.relation = [0] * n
        self.relation[index] = 1
        super().__init__(
            f"entry {index} is numerically zero; e_{index} is an exact relation"
        )


@dataclass(frozen=True)
class UnitVector:
    """A normalized input vector with its largest-magnitude entry moved last.

    ``entries`` are Reals of ``ctx`` with 2-norm 1 and entries[-1] > 0 equal
    to the maximum magnitude.  ``perm`` maps internal position k to the
    position in the caller's original ordering, so relations computed
    internally can be mapped back via :meth:`unpermute`.
    """

    entries: list
    perm: list
    ctx: object = field(repr=False)

    @property
    def n(self):
        return len(self.entries)

    @property
    def last(self):
        """The (positive, maximal) last component."""
        return self.entries[-1]

    def unpermute(self, m):
        """Map a vector from internal order back to the caller's order."""
        out = [0] * len(m)
        for k, mk in enumerate(m):
            out[self.perm[k]] = mk
        return out


@dataclass(frozen=True)
class HyperplaneMatrix:
    """A lower-trapezoidal n x (n-1) matrix with nonzero diagonal."""

    entries: list  # list of n rows, each a list of n-1 Reals
    ctx: object = field(repr=False)

    @property
    def n(self):
        return len(self.entries)

    def copy_rows(self):
        return [row[:] for row in self.entries]


def normalize_and_permute(v, ctx):
    """Normalize ``v`` to a unit vector and move its max-magnitude entry last.

    A single transposition is used (not a sort) so the caller's ordering is
    perturbed as little as possible.  The whole vector is negated if needed
    so the last entry is positive; H is invariant under that scaling.

    Raises ValueError for an all-zero or too-short vector, and
    TrivialRelationFound when some entry is below 10^-(digits-2) of the
    vector's scale (that entry's unit vector is then reported as the answer).
    """
    if len(v) < 2:
        raise ValueError("need at least 2 entries to search for a relation")
    w = [ctx.real(x) for x in v]
    norm = ctx.sqrt(sum(x * x for x in w))
    if norm == 0:
        raise ValueError("input vector is identically zero")
    cutoff = norm * ctx.mp.mpf(10) ** (-(ctx.digits - 2))
    for i, x in enumerate(w):
        if abs(x) <= cutoff:
            raise TrivialRelationFound(i, len(w))
    w = [x / norm for x in w]
    imax = max(range(len(w)), key=lambda i: abs(w[i]))
    perm = list(range(len(w)))
    last = len(w) - 1
    w[imax], w[last] = w[last], w[imax]
    perm[imax], perm[last] = perm[last], perm[imax]
    if w[last] < 0:
        w = [-x for x in w]
    return UnitVector(entries=w, perm=perm, ctx=ctx)


def partial_sums(alpha):
    """Tail norms s_j = sqrt(a_j^2 + ... + a_n^2); s_1 = 1 for a unit vector."""
    ctx = alpha.ctx
    acc = ctx.real(0)
    out = []
    for x in reversed(alpha.entries):
        acc = acc + x * x
        out.append(ctx.sqrt(acc))
    out.reverse()
    return out


def build_h(alpha):
    """Build the hyperplane matrix for a valid UnitVector."""
    ctx = alpha.ctx
    a = alpha.entries
    n = len(a)
    s = partial_sums(alpha)
    zero = ctx.real(0)
    rows = []
    for i in range(n):
        row = [zero] * (n - 1)
        for j in range(min(i, n - 1)):
            row[j] = -a[i] * a[j] / (s[j] * s[j + 1])
        if i < n - 1:
            row[i] = s[i + 1] / s[i]
        rows.append(row)
    return HyperplaneMatrix(entries=rows, ctx=ctx)


def principal_inverse(alpha):
    """Closed-form inverse of the leading (n-1) x (n-1) block of H.

    Entry (i, j): s_i/s_{i+1} on the diagonal, a_j a_i / (s_i s_{i+1}) below
    it, zero above.
    """
    ctx = alpha.ctx
    a = alpha.entries
    n = len(a)
    s = partial_sums(alpha)
    zero = ctx.real(0)
    rows = []
    for i in range(n - 1):
        row = [zero] * (n - 1)
        denom = s[i] * s[i + 1]
        for j in range(i):
            row[j] = a[j] * a[i] / denom
        row[i] = s[i] / s[i + 1]
        rows.append(row)
    return rows


def fro_norms(alpha):
    """Frobenius norms (||H_[1..n-1]||_F, ||H_[1..n-1]^-1||_F), closed form.

    For a unit vector:  ||H||_F^2 = (n-2) + a_n^2  and
    ||H^-1||_F^2 = (n-2) + 1/a_n^2.  The closed forms avoid the O(n^2)
    cancellation of a brute-force entrywise sum.
    """
    ctx = alpha.ctx
    n = alpha.n
    an2 = alpha.last * alpha.last
    nm2 = ctx.real(n - 2)
    return ctx.sqrt(nm2 + an2), ctx.sqrt(nm2 + 1 / an2)
