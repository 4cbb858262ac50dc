"""Independent reference implementations used by the tests.

Everything here is written from the defining formulas with plain loops so it
shares no code with the package.
"""

import math

import numpy as np

from svgdecomp import FunctionProblem


def base_reference(kind, x):
    x = [float(v) for v in x]
    n = len(x)
    if kind == "elliptic":
        return sum((1e6 ** (i / (n - 1)) if n > 1 else 1.0) * v * v for i, v in enumerate(x))
    if kind == "rastrigin":
        return sum(v * v - 10 * math.cos(2 * math.pi * v) + 10 for v in x)
    if kind == "exponential":
        s = sum((i + 1) / n * v * v for i, v in enumerate(x))
        return 200 - 200 * math.exp(-math.sqrt(s) / n)
    if kind == "ackley":
        a = math.sqrt(sum(v * v for v in x) / n)
        b = sum(math.cos(2 * math.pi * v) for v in x) / n
        return -20 * math.exp(-0.2 * a) - math.exp(b) + 20 + math.e
    if kind == "ridge":
        return n * math.sqrt(sum(v * v for v in x))
    if kind == "schwefel":
        total, run = 0.0, 0.0
        for v in x:
            run += v
            total += run * run
        return total
    raise ValueError(kind)


def nmi_entropy(labels_a, labels_b):
    """``100 * 2 I(A;B) / (H(A) + H(B))`` from empirical label frequencies."""
    n = len(labels_a)
    pa, pb, pab = {}, {}, {}
    for a, b in zip(labels_a, labels_b):
        pa[a] = pa.get(a, 0) + 1
        pb[b] = pb.get(b, 0) + 1
        pab[(a, b)] = pab.get((a, b), 0) + 1
    ha = -sum(c / n * math.log(c / n) for c in pa.values())
    hb = -sum(c / n * math.log(c / n) for c in pb.values())
    mi = sum(c / n * math.log((c / n) / ((pa[a] / n) * (pb[b] / n))) for (a, b), c in pab.items())
    if ha + hb == 0:
        return 100.0
    return 100.0 * 2 * mi / (ha + hb)


def random_partition(n, rng, max_block=4):
    perm = [int(v) for v in rng.permutation(n)]
    blocks = []
    while perm:
        k = int(rng.integers(1, max_block + 1))
        blocks.append(sorted(perm[:k]))
        perm = perm[k:]
    return blocks


class AdditiveComposition:
    """Sum of block quadratics ``(x-c)_B^T A_B (x-c)_B`` with dense positive ``A_B``.

    ``A_B = r r^T + diag(d)`` with ``r, d > 0`` so every pair inside a block
    interacts and subset perturbations never cancel.  Singleton blocks may
    carry a quartic term as well.
    """

    def __init__(self, n, rng, half=5.0):
        self.n = n
        self.blocks = random_partition(n, rng)
        self.c = rng.uniform(-0.8 * half, 0.8 * half, n)
        self.mats = []
        self.quartic = []
        for b in self.blocks:
            r = rng.uniform(0.5, 1.5, len(b))
            d = rng.uniform(0.5, 2.0, len(b))
            self.mats.append(np.outer(r, r) + np.diag(d))
            self.quartic.append(float(rng.uniform(0, 0.1)) if len(b) == 1 else 0.0)
        self.lb = -half * np.ones(n)
        self.ub = half * np.ones(n)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for b, A, q in zip(self.blocks, self.mats, self.quartic):
            z = x[b] - self.c[b]
            total += float(z @ A @ z) + q * float(np.sum(z ** 4))
        return total

    def problem(self):
        return FunctionProblem(self, self.lb, self.ub, "additive")

    def groups(self):
        return [b for b in self.blocks if len(b) > 1]

    def separable(self):
        return sorted(b[0] for b in self.blocks if len(b) == 1)

    def slice_optimum(self, t, x):
        """Exact minimizer over ``x_t`` of the slice through ``x`` (unbounded)."""
        for b, A, q in zip(self.blocks, self.mats, self.quartic):
            if t in b:
                k = b.index(t)
                z = np.asarray(x, dtype=float)[b] - self.c[b]
                rest = sum(A[k, j] * z[j] for j in range(len(b)) if j != k)
                if q == 0.0:
                    return float(self.c[t] - rest / A[k, k])
                # 4 q u^3 + 2 A_kk u + 2 rest = 0 has one real root
                roots = np.roots([4 * q, 0.0, 2 * A[k, k], 2 * rest])
                u = float(roots[np.argmin(np.abs(roots.imag))].real)
                return float(self.c[t] + u)
        raise KeyError(t)


def components(n, edges):
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in edges:
        parent[find(i)] = find(j)
    out = {}
    for i in range(n):
        out.setdefault(find(i), []).append(i)
    return sorted(sorted(g) for g in out.values())


def canonical(groups):
    return sorted(sorted(int(i) for i in g) for g in groups)
