"""Scikit-learn style front end so the search composes with the wider
ecosystem (get_params/set_params, clone, pipelines)."""

import numbers

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .cli_report import run_search
from .ingest import VectorSpec
from .pslq_core import Status

__all__ = ["IntegerRelationFinder"]


class IntegerRelationFinder(BaseEstimator):
    """Find an integer relation for a 1-D vector of real constants.

    Parameters
    ----------
    eps : float or str
        Target bound on |<alpha, m>| for the returned relation m.
    coeff_bound : float
        Known (or assumed) infinity-norm bound G on the relation
        coefficients; the 2-norm budget is sqrt(n) * G.
    omega : float in (0, 1)
        Split of eps between the data-error and termination terms.
    gamma : float
        Swap-weighting parameter, must exceed 2/sqrt(3).
    digits : int or None
        Working precision override; default is derived from the plan.
    seed : int or None
        Seed for optional noise injection (``perturb=True``).
    perturb : bool
        Inject eps1-bounded noise before searching.

    Attributes (after ``fit``)
    --------------------------
    relation_ : list of int
    status_ : str
    iterations_ : int
    residual_ : float
    forward_bound_ : float or None
    plan_ : dict
    """

    def __init__(self, eps="1e-10", coeff_bound=100.0, omega=0.5, gamma=1.1548,
                 digits=None, seed=None, perturb=False):
        self.eps = eps
        self.coeff_bound = coeff_bound
        self.omega = omega
        self.gamma = gamma
        self.digits = digits
        self.seed = seed
        self.perturb = perturb

    def _validate(self, X):
        try:
            entries = list(X)
        except TypeError:
            raise ValueError("X must be a 1-D sequence of real constants")
        if len(entries) < 2:
            raise ValueError(f"need at least 2 entries, got {len(entries)}")
        exprs = []
        for x in entries:
            if hasattr(x, "_mpf_") or isinstance(x, numbers.Real):
                exprs.append(repr(float(x)) if isinstance(x, float) else str(x))
            elif isinstance(x, str):
                exprs.append(x)
            else:
                raise ValueError(f"entry {x!r} is not a real constant")
        return exprs

    def fit(self, X, y=None):
        """Search for a relation of the entries of X.

        Entries may be numbers, high-precision decimal strings, or constant
        expressions like ``"pi^2"``; strings keep all their digits.
        """
        exprs = self._validate(X)
        spec = VectorSpec("constant_list", exprs=exprs)
        report = run_search(
            spec, self.eps, self.coeff_bound, omega=self.omega,
            gamma=self.gamma, digits=self.digits, seed=self.seed,
            inject_noise=self.perturb,
        )
        r = report.result
        self.report_ = report
        self.status_ = r.status.value
        self.relation_ = r.m if r.found else None
        self.iterations_ = r.iterations
        self.residual_ = None if report.residual is None else float(report.residual)
        self.forward_bound_ = None if report.bound is None else float(report.bound)
        self.plan_ = report.plan.to_dict()
        return self

    def predict(self, X=None):
        """The fitted relation (X is ignored; kept for API compatibility)."""
        if not hasattr(self, "status_"):
            raise NotFittedError("call fit first")
        if self.status_ == Status.ITERATION_CAP.value or self.relation_ is None:
            raise ValueError("no relation was found within the iteration cap")
        return list(self.relation_)
