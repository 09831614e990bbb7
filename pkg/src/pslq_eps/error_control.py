"""Error-budget calculus: turn a target residual bound eps on |<alpha, m>|
into an input-accuracy budget eps1 and a termination threshold eps2.

The chain, for a unit vector with its largest component alpha_n last:

    data error eps1            ->  hyperplane perturbation eps3 = 8 n^{3/2} eps1
    termination threshold eps2 ->  terminal |<alpha_bar, m>| <= ~eps2
    together                   ->  |<alpha, m>| < C (||m|| eps3 + alpha_n eps2)

with C = 2 (sqrt((n-2) alpha_n^2 + 1) + alpha_n) / alpha_n.  Splitting eps
as omega*eps + (1-omega)*eps between the two terms gives the budget below;
omega = 1/2 is the default split.  Every function here is a pure closed-form
evaluation; all the empirical validation lives in the test suite.
"""

import json
from dataclasses import dataclass

from .numerics import PrecisionContext, real_to_str

__all__ = [
    "ErrorPlan",
    "InfeasiblePlanError",
    "BoundNotApplicableError",
    "constant_C",
    "plan",
    "forward_bound",
    "h_perturbation_bound",
    "perturbed_inverse_bound",
    "unit_last_component_bound",
    "iteration_bound",
]

_PLAN_CTX = PrecisionContext(60)  # closed forms only need modest precision


class InfeasiblePlanError(ValueError):
    """The requested eps cannot be certified for this (n, alpha_n, G).

    ``constraint`` names the violated hypothesis so callers can iterate on
    eps, exactly as one does when sweeping for an unknown gap bound.
    """

    def __init__(self, constraint, detail):
        self.constraint = constraint
        super().__init__(f"infeasible error plan: {detail} [{constraint}]")


class BoundNotApplicableError(ValueError):
    """The forward-error bound's hypothesis on eps3 does not hold."""


def _r(x):
    return _PLAN_CTX.real(x)


def constant_C(n, alpha_n):
    """Forward-error constant C = 2 (sqrt((n-2) a_n^2 + 1) + a_n) / a_n."""
    if n < 2:
        raise ValueError("need n >= 2")
    a = _r(alpha_n)
    if not 0 < a <= 1:
        raise ValueError(f"alpha_n must lie in (0, 1], got {alpha_n}")
    return 2 * (_PLAN_CTX.sqrt((n - 2) * a * a + 1) + a) / a


@dataclass
class ErrorPlan:
    """A complete, feasibility-checked budget for one search run."""

    eps: object
    eps1: object
    eps2: object
    eps3: object
    C: object
    M: object
    G: object
    omega: object
    n: int
    alpha_n: object
    working_digits: int

    def to_dict(self):
        digits = 25  # decimal-string serialization, no precision loss at 3sf+
        d = {
            "n": self.n,
            "working_digits": self.working_digits,
        }
        for name in ("eps", "eps1", "eps2", "eps3", "C", "M", "G", "omega", "alpha_n"):
            d[name] = real_to_str(_r(getattr(self, name)), digits)
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def plan(eps, G, n, alpha_n, omega=0.5, guard_digits=20):
    """Derive (eps1, eps2, eps3, working digits) for a target residual eps.

    ``G`` bounds the relation coefficients in infinity norm, so M = sqrt(n) G
    bounds it in 2-norm.  omega in (0,1) splits eps between the data-error
    and termination terms; omega = 1/2 reproduces the canonical thresholds
    eps/(16 M C n^{3/2}) and eps/(2 C alpha_n).

    Raises InfeasiblePlanError when the derived eps3 violates the hypotheses
    the forward bound needs (eps is too large for this geometry).
    """
    eps = _r(eps)
    G = _r(G)
    omega = _r(omega)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not G >= 1:
        raise ValueError("G must be at least 1")
    if not 0 < omega < 1:
        raise ValueError("omega must lie strictly between 0 and 1")
    a = _r(alpha_n)
    C = constant_C(n, a)
    M = _PLAN_CTX.sqrt(n) * G
    n32 = _r(n) ** _r(1.5)
    eps1 = omega * eps / (8 * M * C * n32)
    eps2 = (1 - omega) * eps / (C * a)
    eps3 = 8 * n32 * eps1
    if not eps1 < 1 / _r(8 * n):
        raise InfeasiblePlanError(
            "eps1 < 1/(8n)",
            f"eps1 = {real_to_str(eps1, 6)} is not below 1/(8n) = {1.0 / (8 * n):.3g}; "
            "reduce eps",
        )
    lim3 = a / (2 * _PLAN_CTX.sqrt((n - 2) * a * a + 1))
    if not eps3 < lim3:
        raise InfeasiblePlanError(
            "eps3 < alpha_n/(2 sqrt((n-2) alpha_n^2 + 1))",
            f"derived eps3 = {real_to_str(eps3, 6)} is not below "
            f"{real_to_str(lim3, 6)}; reduce eps",
        )
    working = int(_PLAN_CTX.mp.ceil(-_PLAN_CTX.mp.log10(eps1))) + int(guard_digits)
    return ErrorPlan(
        eps=eps, eps1=eps1, eps2=eps2, eps3=eps3, C=C, M=M, G=G,
        omega=omega, n=n, alpha_n=a, working_digits=working,
    )


def h_perturbation_bound(n, eps1):
    """Certified hyperplane perturbation: ||H_a - H_abar||_F < 8 n^{3/2} eps1.

    Valid only under eps1 < 1/(8n).
    """
    e1 = _r(eps1)
    if not e1 < 1 / _r(8 * n):
        raise InfeasiblePlanError(
            "eps1 < 1/(8n)", f"eps1 = {real_to_str(e1, 6)} with n = {n}"
        )
    return 8 * _r(n) ** _r(1.5) * e1


def forward_bound(norm_m, eps2, eps3, n, alpha_n):
    """Guaranteed bound C (||m|| eps3 + alpha_n eps2) on |<alpha, m>|."""
    a = _r(alpha_n)
    e3 = _r(eps3)
    if not e3 < a / (2 * _PLAN_CTX.sqrt((n - 2) * a * a + 1)):
        raise BoundNotApplicableError(
            f"eps3 = {real_to_str(e3, 6)} violates the perturbation hypothesis "
            f"for n = {n}, alpha_n = {real_to_str(a, 6)}"
        )
    C = constant_C(n, a)
    return C * (_r(norm_m) * e3 + a * _r(eps2))


def perturbed_inverse_bound(n, alpha_n, eps3):
    """Upper bound on ||Hbar_[1..n-1]^-1||_F given ||H - Hbar||_F <= eps3."""
    a = _r(alpha_n)
    e3 = _r(eps3)
    inv_norm = _PLAN_CTX.sqrt((n - 2) + 1 / (a * a))
    if not e3 < 1 / inv_norm:
        raise InfeasiblePlanError(
            "eps3 < 1/||H^-1||_F",
            f"eps3 = {real_to_str(e3, 6)} but 1/||H^-1||_F = "
            f"{real_to_str(1 / inv_norm, 6)}; nonsingularity not guaranteed",
        )
    return inv_norm / (1 - e3 * inv_norm)


def unit_last_component_bound(n, alpha_n):
    """Lower bound on |abar_n| for the unit left-kernel vector of Hbar.

    abar_n >= a_n / (2 sqrt(1 - a_n^2) sqrt((n-2) a_n^2 + 1) + 2 a_n); the
    caller is responsible for the eps3 hypothesis.
    """
    a = _r(alpha_n)
    root = _PLAN_CTX.sqrt((n - 2) * a * a + 1)
    return a / (2 * _PLAN_CTX.sqrt(max(1 - a * a, _r(0))) * root + 2 * a)


def iteration_bound(n, gamma, eps2, use_proof_exponent=False):
    """Worst-case iteration count before |h_{n,n-1}| drops below eps2.

    The default multiplier is n(n+1) (the safely larger statement); passing
    ``use_proof_exponent=True`` switches to the tighter n(n-1) that the
    potential-function argument actually yields.  tau = 1/sqrt(1/4 + 1/g^2).
    """
    g = _r(gamma)
    e2 = _r(eps2)
    if not g * _PLAN_CTX.sqrt(3) > 2:
        raise ValueError("gamma must exceed 2/sqrt(3)")
    if not e2 > 0:
        raise ValueError("eps2 must be positive")
    tau = 1 / _PLAN_CTX.sqrt(_r(1) / 4 + 1 / (g * g))
    factor = n * (n - 1) if use_proof_exponent else n * (n + 1)
    bound = (
        factor
        * ((n - 1) * _PLAN_CTX.mp.log(g) + _PLAN_CTX.mp.log(1 / e2))
        / (2 * _PLAN_CTX.mp.log(tau))
    )
    return int(_PLAN_CTX.mp.ceil(bound))
