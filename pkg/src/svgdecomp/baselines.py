"""Reference decomposers built on the additive-separability test.

``dg_decompose`` is pairwise differential grouping; ``rdg_decompose`` is a
recursive subset variant that halves the interacting set around each
target.  Neither locates optima, so their separable entries carry ``None``.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import ConfigurationError
from .grouping import Decomposition
from .problems import BudgetExhausted, CountingObjective


@dataclass
class BaselineConfig:
    """``epsilon=None`` means ``1e-10 * (1 + |f(lb)|)``."""

    epsilon: float = None
    rel_epsilon: float = 1e-10

    def __post_init__(self):
        if self.epsilon is not None and not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ConfigurationError(f"epsilon must be finite and >= 0, got {self.epsilon}")

    def resolve(self, f_base):
        if self.epsilon is not None:
            return float(self.epsilon)
        return self.rel_epsilon * (1.0 + abs(f_base))


def _finish(obj, start, seps, nonseps, exhausted, algorithm):
    lb = np.asarray(obj.lb, dtype=float)
    return Decomposition(
        seps=[(i, None) for i in sorted(seps)],
        nonseps=[sorted(g) for g in nonseps],
        cv=lb.copy(),
        fes_used=obj.fes_used - start,
        exhausted=exhausted,
        algorithm=algorithm,
    )


def dg_decompose(problem, cfg=None, *, fe_budget=None, objective=None):
    """Differential grouping with probes at ``lb`` and the box centre.

    Variables that interact with the current target join its group and leave
    the candidate pool at once.  ``f(lb)`` and the single-variable moves
    ``f(lb <- mid_i)`` are cached, so each pair test costs one new FE.
    """
    cfg = cfg or BaselineConfig()
    obj = objective if objective is not None else CountingObjective(problem, fe_budget)
    start = obj.fes_used
    lb = np.asarray(obj.lb, dtype=float)
    mid = 0.5 * (lb + np.asarray(obj.ub, dtype=float))
    n = obj.n

    seps, nonseps = [], []
    remaining = list(range(n))
    exhausted = False
    single = {}
    try:
        f0 = obj(lb)
        eps = cfg.resolve(f0)

        def moved(idx):
            x = lb.copy()
            x[list(idx)] = mid[list(idx)]
            return obj(x)

        def f_single(i):
            if i not in single:
                single[i] = moved([i])
            return single[i]

        while remaining:
            i = remaining.pop(0)
            group = [i]
            d1 = f_single(i) - f0
            for j in list(remaining):
                d2 = moved([i, j]) - f_single(j)
                if abs(d1 - d2) >= eps:
                    group.append(j)
                    remaining.remove(j)
            if len(group) == 1:
                seps.append(i)
            else:
                nonseps.append(group)
    except BudgetExhausted:
        exhausted = True
        classified = set(seps) | {i for g in nonseps for i in g}
        seps.extend(i for i in range(n) if i not in classified)
    return _finish(obj, start, seps, nonseps, exhausted, "dg")


def rdg_decompose(problem, cfg=None, *, fe_budget=None, objective=None):
    """Recursive subset grouping.

    The interaction between sets ``X1`` and ``X2`` is tested by moving them
    from ``lb`` to the box centre: ``f(lb) - f(X1 moved)`` is compared with
    ``f(X2 moved) - f(X1, X2 moved)``.  ``f(lb)`` is shared by every test.
    An interacting ``X2`` is halved until the interacting variables are
    isolated; they join ``X1`` and the search repeats until ``X1`` is closed.
    """
    cfg = cfg or BaselineConfig()
    obj = objective if objective is not None else CountingObjective(problem, fe_budget)
    start = obj.fes_used
    lb = np.asarray(obj.lb, dtype=float)
    mid = 0.5 * (lb + np.asarray(obj.ub, dtype=float))
    n = obj.n

    seps, nonseps = [], []
    exhausted = False
    try:
        f0 = obj(lb)
        eps = cfg.resolve(f0)

        def moved(idx):
            x = lb.copy()
            x[list(idx)] = mid[list(idx)]
            return obj(x)

        def interact(x1, x2):
            d1 = f0 - moved(x1)
            d2 = moved(x2) - moved([*x1, *x2])
            return abs(d1 - d2) >= eps

        def linked(x1, x2):
            if not interact(x1, x2):
                return []
            if len(x2) == 1:
                return list(x2)
            k = (len(x2) + 1) // 2
            return linked(x1, x2[:k]) + linked(x1, x2[k:])

        rest = list(range(n))
        while rest:
            x1 = [rest.pop(0)]
            while rest:
                found = linked(x1, rest)
                if not found:
                    break
                x1.extend(found)
                taken = set(found)
                rest = [r for r in rest if r not in taken]
            if len(x1) == 1:
                seps.append(x1[0])
            else:
                nonseps.append(x1)
    except BudgetExhausted:
        exhausted = True
        classified = set(seps) | {i for g in nonseps for i in g}
        seps.extend(i for i in range(n) if i not in classified)
    return _finish(obj, start, seps, nonseps, exhausted, "rdg")


class _BaselineDecomposer(BaseEstimator):
    _func = None

    def __init__(self, epsilon=None, fe_budget=None):
        self.epsilon = epsilon
        self.fe_budget = fe_budget

    def fit(self, problem, y=None):
        dec = type(self)._func(problem, BaselineConfig(self.epsilon), fe_budget=self.fe_budget)
        self.decomposition_ = dec
        self.seps_ = dec.seps
        self.nonseps_ = dec.nonseps
        self.fes_used_ = dec.fes_used
        return self

    def transform(self, X):
        check_is_fitted(self, "decomposition_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return [X[:, block] for block in self.decomposition_.groups()]


class DGDecomposer(_BaselineDecomposer):
    """Estimator wrapper around :func:`dg_decompose`."""

    _func = staticmethod(dg_decompose)


class RDGDecomposer(_BaselineDecomposer):
    """Estimator wrapper around :func:`rdg_decompose`."""

    _func = staticmethod(rdg_decompose)
