"""Decomposition quality: normalized mutual information, the rho split and dis."""

import numpy as np

from ._validation import DomainError


def _labels(partition, n):
    labels = np.full(n, -1)
    for k, group in enumerate(partition):
        for i in group:
            i = int(i)
            if not 0 <= i < n:
                raise DomainError(f"index {i} outside the universe of size {n}")
            if labels[i] != -1:
                raise DomainError(f"index {i} appears in two groups")
            labels[i] = k
    if np.any(labels < 0):
        raise DomainError("partition does not cover the universe")
    return labels


def confusion_matrix(D, D_prime, n):
    """``M[i, j] = |D[i] & D_prime[j]|``."""
    a = _labels(D, n)
    b = _labels(D_prime, n)
    M = np.zeros((len(D), len(D_prime)), dtype=np.int64)
    np.add.at(M, (a, b), 1)
    return M


def nmi(D, D_prime, n):
    """Normalized mutual information of two partitions of ``range(n)``, in percent.

    Zero cells contribute nothing (``0 log 0 = 0``).  When both partitions
    are the single whole set the ratio is 0/0; the partitions are then equal
    and 100 is returned.
    """
    M = confusion_matrix(D, D_prime, n).astype(float)
    r = M.sum(axis=1)
    c = M.sum(axis=0)
    i, j = np.nonzero(M)
    m = M[i, j]
    num = -2.0 * np.sum(m * np.log2(m * n / (r[i] * c[j])))
    den = np.sum(r * np.log2(r / n)) + np.sum(c * np.log2(c / n))
    if den == 0.0:
        return 100.0
    # clip roundoff just outside [0, 100]
    return float(min(100.0, max(0.0, 100.0 * num / den)))


def _restrict(groups, universe):
    out = []
    for g in groups:
        kept = [i for i in g if i in universe]
        if kept:
            out.append(kept)
    return out


def _relabel(groups, universe):
    index = {v: k for k, v in enumerate(sorted(universe))}
    return [[index[i] for i in g] for g in groups]


def rho_split(gt, result):
    """``(rho1, rho2)``: NMI over the truly separable / nonseparable variables.

    Each truly separable variable is its own block in the ideal partition.
    The produced partition is intersected with the variable set and empty
    blocks are dropped.  ``None`` marks an empty variable set.
    """
    groups = result.groups() if hasattr(result, "groups") and callable(result.groups) else result
    sep = set(gt.separable)
    nonsep = set().union(*gt.groups) if gt.groups else set()

    rho1 = rho2 = None
    if sep:
        ideal = [[i] for i in sorted(sep)]
        got = _restrict(groups, sep)
        rho1 = nmi(_relabel(ideal, sep), _relabel(got, sep), len(sep))
    if nonsep:
        ideal = [sorted(g) for g in gt.groups]
        got = _restrict(groups, nonsep)
        rho2 = nmi(_relabel(ideal, nonsep), _relabel(got, nonsep), len(nonsep))
    return rho1, rho2


def dis(result, problem):
    """Distance between located separable optima in ``result.cv`` and ``problem.o``.

    Only separable entries that carry a located value count; with none the
    distance is 0.
    """
    idx = [i for i, v in result.seps if v is not None]
    if not idx:
        return 0.0
    cv = np.asarray(result.cv, dtype=float)
    o = np.asarray(problem.o, dtype=float)
    return float(np.linalg.norm(cv[idx] - o[idx]))
