"""Separability detection criteria.

``criterion1_separable`` is the additive test used by differential
grouping, ``criterion2_separable`` the monotonicity-sign test, and
``detect_sep`` the optimum-persistence test: a located optimum ``x_t*`` of
variable ``t`` must remain a local minimum (within ``delta``) after the
variables in ``X_u`` are moved from ``cv`` to ``cv_prime``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import DomainError

ETA = 1e-14
MIN_DELTA = 1e-9


@dataclass
class DetectionConfig:
    """Base point ``cv``, perturbed values ``cv_prime`` and thresholds.

    ``cv`` is held by reference: the grouping driver writes located optima
    into it between detections.
    """

    cv: np.ndarray
    cv_prime: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    epsilon: float = 1e-10
    eta: float = ETA

    @classmethod
    def from_bounds(cls, lb, ub, **kwargs):
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        return cls(lb.copy(), 0.5 * (lb + ub), lb, ub, **kwargs)


def _insert(cfg, cv, assignments):
    s = np.array(cv, dtype=float)
    for idx, val in assignments:
        if not cfg.lb[idx] <= val <= cfg.ub[idx]:
            raise DomainError(f"value {val} for variable {idx} is out of bounds")
        s[idx] = val
    return s


def delta_fitness(obj, cv, i, xi_a, xi_b, j, xj, cfg=None):
    """``f(cv <- xi_a, xj) - f(cv <- xi_b, xj)``; costs 2 FEs."""
    if i == j:
        raise DomainError("i and j must differ")
    if cfg is None:
        cfg = DetectionConfig.from_bounds(obj.lb, obj.ub)
    a = _insert(cfg, cv, [(i, xi_a), (j, xj)])
    b = _insert(cfg, cv, [(i, xi_b), (j, xj)])
    return obj(a) - obj(b)


def _delta_pair(obj, cfg, i, j, xi_a, xi_b, xj_a, xj_b):
    if xi_a == xi_b or xj_a == xj_b:
        raise DomainError("probe values must differ")
    d1 = delta_fitness(obj, cfg.cv, i, xi_a, xi_b, j, xj_a, cfg)
    d2 = delta_fitness(obj, cfg.cv, i, xi_a, xi_b, j, xj_b, cfg)
    return d1, d2


def criterion1_separable(obj, cfg, i, j, xi_a, xi_b, xj_a, xj_b):
    """Additive separability: both fitness differences agree to ``cfg.epsilon``."""
    d1, d2 = _delta_pair(obj, cfg, i, j, xi_a, xi_b, xj_a, xj_b)
    return bool(abs(d1 - d2) < cfg.epsilon)


def criterion2_separable(obj, cfg, i, j, xi_a, xi_b, xj_a, xj_b):
    """Monotonicity separability: both fitness differences share a sign."""
    d1, d2 = _delta_pair(obj, cfg, i, j, xi_a, xi_b, xj_a, xj_b)
    return bool(d1 * d2 > 0)


def probe_points(x_star, delta, lo, hi):
    """Three abscissae around ``x_star``, shrunk or made one-sided at a bound.

    The middle point is always ``x_star``.  A located optimum outside the
    bounds (a conditional optimum beyond the box) gets symmetric points.
    """
    floor = MIN_DELTA * (hi - lo)
    if not lo <= x_star <= hi:
        d = max(delta, floor)
        return x_star - d, x_star, x_star + d
    room = min(x_star - lo, hi - x_star)
    if room > 0:
        d = max(min(delta, room), min(floor, room))
        return x_star - d, x_star, x_star + d
    d = max(min(delta, 0.5 * (hi - lo)), floor)
    if x_star <= lo:
        return x_star + 2 * d, x_star, x_star + d
    return x_star - d, x_star, x_star - 2 * d


def detect_sep(obj, t, X_u, x_t_star, delta, cfg):
    """Optimum-persistence test of variable ``t`` against the subset ``X_u``.

    All of ``X_u`` is moved to ``cfg.cv_prime`` at once and three points
    around ``x_t_star`` are evaluated.  ``t`` is judged nonseparable only when
    a neighbour beats the centre by more than the roundoff slack
    ``eta * (1 + |f(centre)|)``; slices flat to within that slack count as
    separable.  Returns ``(is_sep, 3)``.
    """
    X_u = list(X_u)
    if not X_u:
        raise DomainError("X_u must be nonempty")
    if t in X_u:
        raise DomainError("target variable must not be in X_u")
    s = np.array(cfg.cv, dtype=float)
    s[X_u] = cfg.cv_prime[X_u]
    lo, hi = float(cfg.lb[t]), float(cfg.ub[t])
    xs = probe_points(float(x_t_star), float(delta), lo, hi)
    vals = []
    for v in xs:
        s[t] = v
        vals.append(obj(s))
    f1, f2, f3 = vals
    slack = cfg.eta * (1.0 + abs(f2))
    is_sep = f2 < min(f1, f3) + slack
    return bool(is_sep), 3
