"""Dynamic-binary-tree grouping and the surrogate-assisted variable grouping driver."""

import hashlib
import json
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import DomainError, check_random_state
from .detection import ETA, DetectionConfig, detect_sep
from .problems import BudgetExhausted, CountingObjective
from .surrogate import tlpr

LOG = logging.getLogger(__name__)


@dataclass
class Decomposition:
    """Partition of the variables produced by a decomposer.

    ``seps`` holds ``(index, value)`` pairs; ``value`` is the located optimum
    written into ``cv`` or ``None`` when the decomposer located none.
    """

    seps: list
    nonseps: list
    cv: np.ndarray
    fes_used: int
    exhausted: bool = False
    algorithm: str = "svg"
    stats: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.cv)

    def groups(self):
        """Every block of the partition; separable variables are singletons."""
        return [[i] for i, _ in self.seps] + [list(g) for g in self.nonseps]

    def located(self):
        return [(i, v) for i, v in self.seps if v is not None]

    def check(self):
        seen = [i for block in self.groups() for i in block]
        if sorted(seen) != list(range(self.n)):
            raise DomainError("decomposition is not a partition of the variables")
        for g in self.nonseps:
            if len(g) < 2:
                raise DomainError("nonseparable groups need at least two variables")
        return self

    def to_dict(self):
        cv = np.ascontiguousarray(self.cv, dtype=float)
        return {
            "algorithm": self.algorithm,
            "seps": [[int(i), None if v is None else float(v)] for i, v in self.seps],
            "nonseps": [[int(i) for i in g] for g in self.nonseps],
            "fes_used": int(self.fes_used),
            "exhausted": bool(self.exhausted),
            "cv": [float(v) for v in cv],
            "cv_digest": hashlib.sha256(cv.tobytes()).hexdigest(),
        }

    @classmethod
    def from_dict(cls, doc):
        cv = np.array(doc["cv"], dtype=float)
        if "cv_digest" in doc and hashlib.sha256(cv.tobytes()).hexdigest() != doc["cv_digest"]:
            raise DomainError("cv does not match its digest")
        return cls(
            seps=[(int(i), v) for i, v in doc["seps"]],
            nonseps=[list(g) for g in doc["nonseps"]],
            cv=cv,
            fes_used=int(doc["fes_used"]),
            exhausted=bool(doc.get("exhausted", False)),
            algorithm=doc.get("algorithm", "svg"),
        )

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def _halve(nodes):
    k = (len(nodes) + 1) // 2
    return nodes[:k], nodes[k:]


def dbtg(obj, t, X_u, x_t_star, delta, cfg, *, deduce=True, stats=None):
    """Return ``(X_t', fes)``: the members of ``X_u`` interacting with ``t``.

    Nodes judged nonseparable are halved (first half gets the extra element)
    and queued.  When the first child of a nonseparable node is separable,
    the second child must hold the interaction and is queued without a
    detection.  ``deduce=False`` detects both children, for comparison.
    """
    X_u = list(X_u)
    if t in X_u:
        raise DomainError("target variable must not be in X_u")
    found = []
    fes = 0
    detections = 0

    def detect(nodes):
        nonlocal fes, detections
        is_sep, used = detect_sep(obj, t, nodes, x_t_star, delta, cfg)
        fes += used
        detections += 1
        return is_sep

    queue = deque()
    if X_u and not detect(X_u):
        queue.append(X_u)
    while queue:
        node = queue.popleft()
        if len(node) == 1:
            found.extend(node)
            continue
        first, second = _halve(node)
        if not detect(first):
            queue.append(first)
            if not detect(second):
                queue.append(second)
        elif deduce or not detect(second):
            queue.append(second)
    if stats is not None:
        stats["detections"] = stats.get("detections", 0) + detections
    return found, fes


def svg_decompose(problem, *, random_state=0, target_order="random", eta=ETA,
                  fe_budget=None, objective=None, trace=None):
    """Decompose ``problem`` and locate the optima of its separable variables.

    Pass ``objective`` to reuse an existing counting objective (its budget
    then applies); otherwise one is created with ``fe_budget``.  When the
    budget runs out, the variables not yet classified are returned as
    separable entries without a located optimum and ``exhausted`` is set.
    """
    obj = objective if objective is not None else CountingObjective(problem, fe_budget)
    lb = np.asarray(obj.lb, dtype=float)
    ub = np.asarray(obj.ub, dtype=float)
    rng = check_random_state(random_state)
    cfg = DetectionConfig.from_bounds(lb, ub, eta=eta)
    start = obj.fes_used

    seps, nonseps = [], []
    undetected = list(range(obj.n))
    stats = {"detections": 0, "tlpr_calls": 0}
    exhausted = False
    try:
        while undetected:
            if target_order == "random":
                k = int(rng.integers(len(undetected)))
            elif target_order == "index":
                k = 0
            else:
                raise DomainError(f"unknown target_order {target_order!r}")
            t = undetected.pop(k)
            res = tlpr(obj, t, lb, ub, cfg.cv, trace=trace)
            stats["tlpr_calls"] += 1
            cfg.cv[t] = res.x_star
            if not undetected:
                seps.append((t, res.x_star))
                break
            partners, _ = dbtg(obj, t, undetected, res.x_free, res.delta, cfg, stats=stats)
            if not partners:
                seps.append((t, res.x_star))
            else:
                nonseps.append(sorted([t, *partners]))
                taken = set(partners)
                undetected = [u for u in undetected if u not in taken]
    except BudgetExhausted:
        exhausted = True
        classified = {i for i, _ in seps} | {i for g in nonseps for i in g}
        seps.extend((i, None) for i in range(obj.n) if i not in classified)
        LOG.warning("FE budget exhausted after %d FEs; decomposition is partial", obj.fes_used)

    return Decomposition(
        seps=seps,
        nonseps=nonseps,
        cv=cfg.cv.copy(),
        fes_used=obj.fes_used - start,
        exhausted=exhausted,
        algorithm="svg",
        stats=stats,
    )


class SVGDecomposer(BaseEstimator):
    """Estimator wrapper around :func:`svg_decompose`.

    Parameters
    ----------
    random_state : int or None
        Seed of the target-variable order.
    target_order : {"random", "index"}
        ``"index"`` processes variables in increasing order (debugging aid).
    eta : float
        Relative roundoff slack of the optimum-persistence test.
    fe_budget : int or None
        Cap on fitness evaluations.
    """

    def __init__(self, random_state=0, target_order="random", eta=ETA, fe_budget=None):
        self.random_state = random_state
        self.target_order = target_order
        self.eta = eta
        self.fe_budget = fe_budget

    def fit(self, problem, y=None):
        dec = svg_decompose(
            problem,
            random_state=self.random_state,
            target_order=self.target_order,
            eta=self.eta,
            fe_budget=self.fe_budget,
        )
        self.decomposition_ = dec
        self.seps_ = dec.seps
        self.nonseps_ = dec.nonseps
        self.cv_ = dec.cv
        self.fes_used_ = dec.fes_used
        return self

    def transform(self, X):
        """Split solutions (rows of ``X``) into the blocks of the partition."""
        check_is_fitted(self, "decomposition_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return [X[:, block] for block in self.decomposition_.groups()]
