"""Cooperative coevolution over a fixed decomposition.

Separable variables whose optimum the decomposer located stay frozen at
that value; every nonseparable group (and, for decomposers that locate no
optima, the pool of separable variables) is evolved in turn by a
self-adaptive rand/1/bin differential evolution.  Sub-solutions are scored
by inserting them into the shared context vector.
"""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import ConfigurationError, DomainError, check_index_set, check_random_state
from .problems import BudgetExhausted, CountingObjective

LOG = logging.getLogger(__name__)


@dataclass
class OptimizerConfig:
    """DE and scheduling parameters.

    ``pop_size=None`` uses ``min(50, 5 * |group|)`` (at least 4) per group.
    ``max_fes`` covers decomposition and optimization together.
    """

    max_fes: int = 3_000_000
    pop_size: int = None
    generations_per_turn: int = 50
    F: float = 0.5
    CR: float = 0.9
    F_sd: float = 0.3
    CR_sd: float = 0.1
    self_adapt: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.max_fes > 0:
            raise ConfigurationError(f"max_fes must be positive, got {self.max_fes}")
        if self.pop_size is not None and self.pop_size < 4:
            raise ConfigurationError(f"pop_size must be >= 4 for rand/1 mutation, got {self.pop_size}")
        if self.generations_per_turn < 1:
            raise ConfigurationError("generations_per_turn must be >= 1")

    def population_for(self, group_size):
        if self.pop_size is not None:
            return self.pop_size
        return max(4, min(50, 5 * group_size))


@dataclass
class Subpopulation:
    group: list
    individuals: np.ndarray
    fitnesses: np.ndarray
    F: np.ndarray
    CR: np.ndarray

    @property
    def size(self):
        return len(self.individuals)

    def best(self):
        k = int(np.argmin(self.fitnesses))
        return self.individuals[k].copy(), float(self.fitnesses[k])


def evaluate_subsolution(obj, cv, group, sub):
    """``f(cv with cv[group] = sub)``; one FE, ``cv`` untouched."""
    sub = np.asarray(sub, dtype=float)
    if sub.shape != (len(group),):
        raise DomainError(f"sub-solution of length {sub.size} for a group of {len(group)}")
    x = np.array(cv, dtype=float)
    x[list(group)] = sub
    return obj(x)


def init_subpopulation(obj, cv, group, cfg, rng):
    """Uniform random members with ``cv``'s own slice as the first one."""
    group = check_index_set(group, obj.n, "group")
    lo = np.asarray(obj.lb, dtype=float)[group]
    hi = np.asarray(obj.ub, dtype=float)[group]
    size = cfg.population_for(len(group))
    ind = rng.uniform(lo, hi, size=(size, len(group)))
    ind[0] = np.asarray(cv, dtype=float)[group]
    fit = np.array([evaluate_subsolution(obj, cv, group, v) for v in ind])
    return Subpopulation(group, ind, fit, np.full(size, cfg.F), np.full(size, cfg.CR))


def _trial_params(pop, i, cfg, rng):
    if not cfg.self_adapt:
        return cfg.F, cfg.CR
    F = rng.normal(cfg.F, cfg.F_sd)
    CR = rng.normal(cfg.CR, cfg.CR_sd)
    return float(np.clip(F, 0.05, 1.0)), float(np.clip(CR, 0.0, 1.0))


def de_generation(pop, cv, obj, cfg, rng):
    """One rand/1/bin generation with greedy replacement.

    With ``self_adapt`` every trial draws its own ``F ~ N(F, F_sd)`` and
    ``CR ~ N(CR, CR_sd)``; a successful trial passes them to its slot.  If
    the budget runs out the population is returned with the replacements
    made so far.
    """
    lo = np.asarray(obj.lb, dtype=float)[pop.group]
    hi = np.asarray(obj.ub, dtype=float)[pop.group]
    size, dim = pop.individuals.shape
    for i in range(size):
        r1, r2, r3 = rng.choice([k for k in range(size) if k != i], 3, replace=False)
        F, CR = _trial_params(pop, i, cfg, rng)
        mutant = pop.individuals[r1] + F * (pop.individuals[r2] - pop.individuals[r3])
        cross = rng.random(dim) < CR
        cross[rng.integers(dim)] = True
        trial = np.clip(np.where(cross, mutant, pop.individuals[i]), lo, hi)
        try:
            f_trial = evaluate_subsolution(obj, cv, pop.group, trial)
        except BudgetExhausted:
            break
        if f_trial <= pop.fitnesses[i]:
            pop.individuals[i] = trial
            pop.fitnesses[i] = f_trial
            pop.F[i], pop.CR[i] = F, CR
    return pop


@dataclass
class DeccResult:
    best: np.ndarray
    best_f: float
    history: list = field(default_factory=list)
    fes_used: int = 0
    optimization_fes: int = 0
    exhausted: bool = False

    def __iter__(self):
        return iter((self.best, self.best_f, self.history))


def optimization_groups(decomposition):
    """Groups to evolve: nonseparable groups, then pooled unlocated separables."""
    groups = [list(g) for g in decomposition.nonseps]
    pooled = [i for i, v in decomposition.seps if v is None]
    if pooled:
        groups.append(sorted(pooled))
    return groups


def decc_optimize(problem, decomposition, cfg=None, *, objective=None):
    """Round-robin cooperative coevolution starting from ``decomposition.cv``.

    Without ``objective`` a counter is created that already holds the
    decomposition's FEs, so ``cfg.max_fes`` bounds both phases.  Each group
    is re-scored against the current context at the start of its turn,
    evolved for ``generations_per_turn`` generations, and its best member is
    committed when that improves the context.  ``history`` rows are
    ``(fes, best_f)`` after the initial evaluation and every generation.
    """
    cfg = cfg or OptimizerConfig()
    if objective is None:
        objective = CountingObjective(problem, cfg.max_fes, fes_used=decomposition.fes_used)
    obj = objective
    rng = check_random_state(cfg.seed)
    cv = np.array(decomposition.cv, dtype=float)
    start = obj.fes_used
    groups = optimization_groups(decomposition)

    if not groups:
        # audit evaluation outside the budget
        return DeccResult(cv, float(problem(cv)), [(obj.fes_used, float(problem(cv)))], obj.fes_used, 0)

    history = []
    exhausted = False
    try:
        cv_f = obj(cv)
        history.append((obj.fes_used, cv_f))
        pops = [init_subpopulation(obj, cv, g, cfg, rng) for g in groups]
        # fitnesses stay valid until another group commits into cv
        version, scored = 0, [0] * len(pops)
        while True:
            for k, pop in enumerate(pops):
                if scored[k] != version:
                    pop.fitnesses = np.array(
                        [evaluate_subsolution(obj, cv, pop.group, v) for v in pop.individuals]
                    )
                for _ in range(cfg.generations_per_turn):
                    de_generation(pop, cv, obj, cfg, rng)
                    sub, f_sub = pop.best()
                    if f_sub < cv_f:
                        cv[pop.group] = sub
                        cv_f = f_sub
                        version += 1
                    scored[k] = version
                    history.append((obj.fes_used, cv_f))
                    if obj.remaining is not None and obj.remaining <= 0:
                        raise BudgetExhausted(obj.fes_used)
    except BudgetExhausted:
        exhausted = True
    if not history:
        return DeccResult(cv, float(problem(cv)), [], obj.fes_used, obj.fes_used - start, True)
    return DeccResult(cv, history[-1][1], history, obj.fes_used, obj.fes_used - start, exhausted)


def write_history(history, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fes", "best_f"])
        for fes, f in history:
            writer.writerow([int(fes), repr(float(f))])


def format_vector(x):
    """Shortest round-trip decimal text, one value per line."""
    return "".join(f"{float(v)!r}\n" for v in x)


class DECCOptimizer(BaseEstimator):
    """Decompose then optimize with cooperative coevolution.

    Parameters
    ----------
    decomposer : {"svg", "dg", "rdg"}
    max_fes : int
        Budget shared by decomposition and optimization.
    pop_size, generations_per_turn, F, CR, self_adapt
        See :class:`OptimizerConfig`.
    random_state : int
        Seeds both the decomposer and the DE.
    """

    def __init__(self, decomposer="svg", max_fes=3_000_000, pop_size=None,
                 generations_per_turn=50, F=0.5, CR=0.9, self_adapt=True, random_state=0):
        self.decomposer = decomposer
        self.max_fes = max_fes
        self.pop_size = pop_size
        self.generations_per_turn = generations_per_turn
        self.F = F
        self.CR = CR
        self.self_adapt = self_adapt
        self.random_state = random_state

    def fit(self, problem, y=None):
        from .baselines import dg_decompose, rdg_decompose
        from .grouping import svg_decompose

        cfg = OptimizerConfig(
            max_fes=self.max_fes,
            pop_size=self.pop_size,
            generations_per_turn=self.generations_per_turn,
            F=self.F,
            CR=self.CR,
            self_adapt=self.self_adapt,
            seed=self.random_state,
        )
        obj = CountingObjective(problem, cfg.max_fes)
        if self.decomposer == "svg":
            dec = svg_decompose(problem, random_state=self.random_state, objective=obj)
        elif self.decomposer == "dg":
            dec = dg_decompose(problem, objective=obj)
        elif self.decomposer == "rdg":
            dec = rdg_decompose(problem, objective=obj)
        else:
            raise ConfigurationError(f"unknown decomposer {self.decomposer!r}")
        res = decc_optimize(problem, dec, cfg, objective=obj)
        self.decomposition_ = dec
        self.best_ = res.best
        self.best_f_ = res.best_f
        self.history_ = res.history
        self.fes_used_ = res.fes_used
        self.optimization_fes_ = res.optimization_fes
        return self

    def transform(self, X=None):
        """Return the best solution found (``X`` is ignored)."""
        check_is_fitted(self, "best_")
        return self.best_.copy()
