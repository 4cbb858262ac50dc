"""Benchmark functions with general (not only additive) separability.

Six base functions are composed into 21 test problems: fully separable
(1-5), one rotated block plus a separable tail (6-10), ``n/(2m)`` rotated
blocks plus a separable half (11-15), ``n/m`` rotated blocks (16-20) and a
fully nonseparable Schwefel problem (21).  Exponential, Ackley and Ridge are
separable only in the general sense: their optimum factorizes per variable
but the objective is not a sum over variables.

Variable indices are 0-based throughout the package.
"""

import json
import threading
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    ConfigurationError,
    DomainError,
    check_count,
    check_vector,
)

BASE_KINDS = ("elliptic", "rastrigin", "exponential", "ackley", "ridge", "schwefel")

DOMAINS = {
    "elliptic": 100.0,
    "rastrigin": 5.0,
    "exponential": 32.0,
    "ackley": 32.0,
    "ridge": 100.0,
    "schwefel": 100.0,
}

# base kind per family of problems; f10, f15 and f20 use Schwefel blocks
_FAMILY = ("elliptic", "rastrigin", "exponential", "ackley")


# ---------------------------------------------------------------------------
# base functions (vectorized over the last axis)


def _elliptic(z):
    n = z.shape[-1]
    if n == 1:
        w = np.ones(1)
    else:
        w = 1e6 ** (np.arange(n) / (n - 1))
    return np.sum(w * z * z, axis=-1)


def _rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=-1)


def _exponential(z):
    n = z.shape[-1]
    w = np.arange(1, n + 1) / n
    return 200.0 - 200.0 * np.exp(-np.sqrt(np.sum(w * z * z, axis=-1)) / n)


def _ackley(z):
    n = z.shape[-1]
    a = np.exp(-0.2 * np.sqrt(np.sum(z * z, axis=-1) / n))
    b = np.exp(np.sum(np.cos(2.0 * np.pi * z), axis=-1) / n)
    # grouped so the value at the origin is exactly zero
    return (20.0 - 20.0 * a) + (np.e - b)


def _ridge(z):
    n = z.shape[-1]
    return n * np.sqrt(np.sum(z * z, axis=-1))


def _schwefel(z):
    c = np.cumsum(z, axis=-1)
    return np.sum(c * c, axis=-1)


_BASE = {
    "elliptic": _elliptic,
    "rastrigin": _rastrigin,
    "exponential": _exponential,
    "ackley": _ackley,
    "ridge": _ridge,
    "schwefel": _schwefel,
}


def eval_base(kind, x):
    """Evaluate base function ``kind`` at vector ``x`` (its length is ``n``)."""
    if kind not in _BASE:
        raise DomainError(f"unknown base function {kind!r}")
    x = check_vector(x)
    return float(_BASE[kind](x))


# ---------------------------------------------------------------------------
# composed problems


@dataclass(frozen=True)
class Component:
    """Contiguous variable range ``[start, stop)`` split into equal blocks.

    Each block is evaluated by ``kind``; ``rotations`` (shape
    ``(n_blocks, block, block)``) is applied block-wise when present.
    """

    start: int
    stop: int
    kind: str
    block: int
    rotations: np.ndarray = None

    @property
    def n_blocks(self):
        return (self.stop - self.start) // self.block

    @property
    def nonseparable(self):
        return self.block > 1 and (self.rotations is not None or self.kind == "schwefel")

    def value(self, z):
        zb = z[self.start:self.stop].reshape(self.n_blocks, self.block)
        if self.rotations is not None:
            zb = np.einsum("kij,kj->ki", self.rotations, zb)
        return float(np.sum(_BASE[self.kind](zb)))


@dataclass(frozen=True)
class GroundTruthDecomposition:
    separable: frozenset
    groups: tuple

    def to_dict(self):
        return {
            "separable": sorted(self.separable),
            "groups": [sorted(g) for g in self.groups],
        }


@dataclass(frozen=True, eq=False)
class BenchmarkProblem:
    """One of the 21 composed benchmark functions.

    Calling the problem evaluates it without any FE bookkeeping; wrap it
    in :class:`CountingObjective` for budgeted, counted evaluation.
    """

    func_id: int
    n: int
    m: int
    seed: int
    o: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    components: tuple

    def __call__(self, x):
        z = np.asarray(x, dtype=float) - self.o
        return sum(c.value(z) for c in self.components)

    @property
    def name(self):
        return f"f{self.func_id}"

    def raw_value(self, z):
        """Value of the untranslated composition at ``z``."""
        z = np.asarray(z, dtype=float)
        return sum(c.value(z) for c in self.components)

    def ground_truth(self):
        return ground_truth(self)

    def to_dict(self):
        return {
            "func_id": self.func_id,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "o": [float(v) for v in self.o],
            "rotations": [
                None if c.rotations is None else c.rotations.tolist()
                for c in self.components
            ],
        }


def _layout(func_id, n, m):
    """Return ``(start, stop, kind, block, rotated)`` tuples for ``func_id``."""
    if func_id in (1, 2, 3, 4, 5):
        kind = (*_FAMILY, "ridge")[func_id - 1]
        return [(0, n, kind, n, False)]
    if func_id == 21:
        return [(0, n, "schwefel", n, False)]
    if func_id in range(6, 11):
        if not m < n:
            raise ConfigurationError(f"f{func_id} needs m < n (got n={n}, m={m})")
        if func_id == 10:
            return [(0, m, "schwefel", m, False), (m, n, "ridge", n - m, False)]
        kind = _FAMILY[func_id - 6]
        return [(0, m, kind, m, True), (m, n, kind, n - m, False)]
    if func_id in range(11, 16):
        if n % (2 * m):
            raise ConfigurationError(f"f{func_id} needs n divisible by 2m (got n={n}, m={m})")
        h = n // 2
        if func_id == 15:
            return [(0, h, "schwefel", m, False), (h, n, "ridge", n - h, False)]
        kind = _FAMILY[func_id - 11]
        return [(0, h, kind, m, True), (h, n, kind, n - h, False)]
    if func_id in range(16, 21):
        if n % m:
            raise ConfigurationError(f"f{func_id} needs n divisible by m (got n={n}, m={m})")
        if func_id == 20:
            return [(0, n, "schwefel", m, False)]
        return [(0, n, _FAMILY[func_id - 16], m, True)]
    raise ConfigurationError(f"unknown function id {func_id!r}; expected 1..21")


def make_rotation(m, seed):
    """Seeded ``m x m`` orthogonal matrix (QR of a Gaussian, sign-fixed)."""
    m = check_count(m, "m")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def build_problem(func_id, n=1000, m=50, seed=0, *, o=None, rotations=None):
    """Build benchmark ``func_id`` of dimension ``n`` with block size ``m``.

    ``o`` and ``rotations`` override the seeded draws; they are used when
    loading a stored problem so that round trips are bit-exact.
    """
    if isinstance(func_id, bool) or not isinstance(func_id, (int, np.integer)):
        raise ConfigurationError(f"unknown function id {func_id!r}; expected 1..21")
    func_id = int(func_id)
    n = check_count(n, "n")
    m = check_count(m, "m")
    layout = _layout(func_id, n, m)

    kinds = {kind for _, _, kind, _, _ in layout}
    half = max(DOMAINS[k] for k in kinds)
    lb = np.full(n, -half)
    ub = np.full(n, half)

    rng = np.random.default_rng(seed)
    margin = 0.1 * (ub - lb)
    drawn_o = rng.uniform(lb + margin, ub - margin)
    if o is None:
        o = drawn_o
    else:
        o = check_vector(o, "o", n).copy()

    components = []
    for k, (start, stop, kind, block, rotated) in enumerate(layout):
        rot = None
        if rotated:
            n_blocks = (stop - start) // block
            seeds = rng.integers(0, 2**63 - 1, size=n_blocks)
            if rotations is not None and rotations[k] is not None:
                rot = np.asarray(rotations[k], dtype=float)
                if rot.shape != (n_blocks, block, block):
                    raise ConfigurationError(
                        f"rotation payload for component {k} has shape {rot.shape}"
                    )
            else:
                rot = np.stack([make_rotation(block, int(s)) for s in seeds])
            rot.setflags(write=False)
        components.append(Component(start, stop, kind, block, rot))

    o.setflags(write=False)
    lb.setflags(write=False)
    ub.setflags(write=False)
    return BenchmarkProblem(func_id, n, m, seed, o, lb, ub, tuple(components))


def ground_truth(problem):
    """Ideal decomposition of ``problem`` into separable variables and groups."""
    separable = set()
    groups = []
    for c in problem.components:
        if c.nonseparable:
            for b in range(c.n_blocks):
                lo = c.start + b * c.block
                groups.append(frozenset(range(lo, lo + c.block)))
        else:
            separable.update(range(c.start, c.stop))
    return GroundTruthDecomposition(frozenset(separable), tuple(groups))


def problem_from_dict(doc):
    return build_problem(
        doc["func_id"],
        doc["n"],
        doc["m"],
        doc["seed"],
        o=doc.get("o"),
        rotations=doc.get("rotations"),
    )


def save_problem(problem, path):
    with open(path, "w") as fh:
        json.dump(problem.to_dict(), fh, indent=1)
        fh.write("\n")


def load_problem(path):
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# generic problems and FE accounting


@dataclass(frozen=True, eq=False)
class FunctionProblem:
    """Wrap an arbitrary callable with box bounds so it can be decomposed."""

    func: object
    lb: np.ndarray
    ub: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "lb", np.asarray(self.lb, dtype=float))
        object.__setattr__(self, "ub", np.asarray(self.ub, dtype=float))

    @property
    def n(self):
        return self.lb.size

    def __call__(self, x):
        return float(self.func(np.asarray(x, dtype=float)))


class BudgetExhausted(RuntimeError):
    """Raised when a capped objective has no evaluations left."""

    def __init__(self, fes_used):
        super().__init__(f"fitness evaluation budget exhausted after {fes_used} FEs")
        self.fes_used = fes_used


@dataclass(eq=False)
class CountingObjective:
    """Evaluation wrapper that counts every call and enforces a budget."""

    problem: object
    fe_budget: int = None
    fes_used: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n(self):
        return self.problem.n

    @property
    def lb(self):
        return self.problem.lb

    @property
    def ub(self):
        return self.problem.ub

    @property
    def remaining(self):
        if self.fe_budget is None:
            return None
        return self.fe_budget - self.fes_used

    def __call__(self, x):
        with self._lock:
            if self.fe_budget is not None and self.fes_used >= self.fe_budget:
                raise BudgetExhausted(self.fes_used)
            self.fes_used += 1
        return float(self.problem(x))


def evaluate(obj, x):
    """Evaluate ``x`` through ``obj``, consuming exactly one FE."""
    x = check_vector(x, "x", obj.n)
    return obj(x)
