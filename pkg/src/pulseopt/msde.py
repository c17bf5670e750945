"""Mixed-strategy differential evolution (maximization).

Each target vector of each generation draws its own scale factor
``F ~ N(0.5, 0.3)`` (used as drawn), crossover rate ``CR ~ N(0.5, 0.1)``
(redrawn until it lies in [0, 1]) and one of four mutation strategies:

1. DE/rand/1            ``V = X_r1 + F (X_r2 - X_r3)``
2. DE/rand-to-best/2    ``V = X_i + F (X_best - X_i) + F (X_r1 - X_r2) + F (X_r3 - X_r4)``
3. DE/rand/2            ``V = X_r1 + F (X_r2 - X_r3) + F (X_r4 - X_r5)``
4. DE/current-to-rand/1 ``V = X_i + K (X_r1 - X_i) + F (X_r2 - X_r3)``, no crossover

Trials replace their target when their fitness is equal or higher.

All random draws of a generation come from one ``numpy.random.Generator``
in a fixed order before any trial is evaluated, so a run is bitwise
reproducible from its seed whatever the evaluation order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

__all__ = [
    "SearchSpace",
    "Population",
    "StrategyParams",
    "GenerationRecord",
    "MSDEResult",
    "N_INDICES",
    "sample_strategy_params",
    "draw_indices",
    "initialize",
    "mutate",
    "crossover",
    "select",
    "repair",
    "run_msde",
    "MixedStrategyDE",
]

logger = logging.getLogger(__name__)

# number of distinct random indices each strategy consumes
N_INDICES = {1: 3, 2: 4, 3: 5, 4: 3}


@dataclass(frozen=True)
class SearchSpace:
    """Box ``lower <= x <= upper`` in D dimensions."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.array(self.lower, dtype=float))
        hi = np.atleast_1d(np.array(self.upper, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ValueError("bounds must be two vectors of equal length >= 1")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("bounds must be finite")
        if np.any(lo >= hi):
            raise ValueError("lower bounds must be strictly below upper bounds")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def box(cls, dimension: int, low: float, high: float) -> "SearchSpace":
        if int(dimension) != dimension or dimension < 1:
            raise ValueError("dimension must be a positive integer")
        return cls(np.full(int(dimension), float(low)), np.full(int(dimension), float(high)))

    @property
    def dimension(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class StrategyParams:
    """Control parameters drawn for one target vector."""

    F: float
    CR: float
    strategy: int
    K: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.CR <= 1.0:
            raise ValueError(f"CR must lie in [0, 1], got {self.CR}")
        if self.strategy not in N_INDICES:
            raise ValueError(f"strategy must be 1, 2, 3 or 4, got {self.strategy}")


@dataclass
class Population:
    """Current generation.

    Attributes
    ----------
    vectors : ndarray, shape (NP, D)
    fitness : ndarray, shape (NP,)
    generation : int
    best_index : int
        First index of the maximal fitness.
    rng_seed : int
    rng : numpy.random.Generator
        Run generator; its ``bit_generator.state`` is the resumable state.
    """

    vectors: np.ndarray
    fitness: np.ndarray
    generation: int
    best_index: int
    rng_seed: int
    rng: np.random.Generator = field(repr=False)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def best_vector(self) -> np.ndarray:
        return self.vectors[self.best_index]

    @property
    def best_fitness(self) -> float:
        return float(self.fitness[self.best_index])

    @property
    def rng_state(self) -> dict:
        return self.rng.bit_generator.state


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best: float
    average: float
    best_vector: np.ndarray = field(repr=False)


@dataclass
class MSDEResult:
    """Outcome of :func:`run_msde`."""

    best_vector: np.ndarray
    best_fitness: float
    trace: list
    population: Population
    evaluations: int

    def best_trace(self) -> np.ndarray:
        return np.array([r.best for r in self.trace])

    def average_trace(self) -> np.ndarray:
        return np.array([r.average for r in self.trace])


def sample_strategy_params(rng: np.random.Generator, F_mean: float = 0.5, F_std: float = 0.3,
                           CR_mean: float = 0.5, CR_std: float = 0.1,
                           K: float = 0.5) -> StrategyParams:
    """Draw F, CR (redrawn until in [0, 1]) and a uniform strategy, in that order."""
    F = float(rng.normal(F_mean, F_std))
    CR = float(rng.normal(CR_mean, CR_std))
    while CR < 0.0 or CR > 1.0:
        CR = float(rng.normal(CR_mean, CR_std))
    strategy = int(rng.integers(1, 5))
    return StrategyParams(F, CR, strategy, K)


def draw_indices(rng: np.random.Generator, pop_size: int, i: int, count: int) -> np.ndarray:
    """``count`` mutually distinct indices from ``0..pop_size-1``, all different from ``i``."""
    if count > pop_size - 1:
        raise ValueError(f"cannot draw {count} distinct indices other than {i} from {pop_size}")
    r = rng.choice(pop_size - 1, size=count, replace=False)
    return r + (r >= i)


def mutate(vectors, i: int, params: StrategyParams, indices, best_index: int | None = None):
    """Donor vector of strategy ``params.strategy``.

    Parameters
    ----------
    vectors : ndarray, shape (NP, D) or Population
    i : int
        Target index.
    params : StrategyParams
    indices : sequence of int
        Random indices ``r1, r2, ...`` (at least ``N_INDICES[strategy]``).
    best_index : int, optional
        Index of ``X_best``; required by strategy 2.

    Examples
    --------
    >>> X = np.array([[0., 0.], [1., 2.], [3., 4.], [1., 0.]])
    >>> mutate(X, 0, StrategyParams(0.5, 0.5, 1), [1, 2, 3])
    array([2., 4.])
    """
    if isinstance(vectors, Population):
        if best_index is None:
            best_index = vectors.best_index
        vectors = vectors.vectors
    X = np.asarray(vectors, dtype=float)
    r = [int(k) for k in indices]
    s, F, K = params.strategy, params.F, params.K
    if len(r) < N_INDICES[s]:
        raise ValueError(f"strategy {s} needs {N_INDICES[s]} indices, got {len(r)}")
    xi = X[i]
    if s == 1:
        return X[r[0]] + F * (X[r[1]] - X[r[2]])
    if s == 2:
        if best_index is None:
            raise ValueError("strategy 2 needs the best index")
        return xi + F * (X[best_index] - xi) + F * (X[r[0]] - X[r[1]]) + F * (X[r[2]] - X[r[3]])
    if s == 3:
        return X[r[0]] + F * (X[r[1]] - X[r[2]]) + F * (X[r[3]] - X[r[4]])
    return xi + K * (X[r[0]] - xi) + F * (X[r[1]] - X[r[2]])


def crossover(target, donor, CR: float, rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover with one forced donor coordinate.

    Draws ``D`` uniforms and then ``j_rand`` from ``rng``.
    """
    x = np.asarray(target, dtype=float)
    v = np.asarray(donor, dtype=float)
    if x.shape != v.shape:
        raise ValueError("target and donor must have the same length")
    u = rng.random(x.size)
    j_rand = int(rng.integers(x.size))
    mask = u <= CR
    mask[j_rand] = True
    return np.where(mask, v, x)


def select(target_fitness: float, trial_fitness: float) -> bool:
    """Keep the trial iff its fitness is at least the target's (maximization).

    A non-finite trial fitness keeps the target and logs a warning.
    """
    if not math.isfinite(trial_fitness):
        logger.warning("non-finite trial fitness %r; keeping the target", trial_fitness)
        return False
    if not math.isfinite(target_fitness):
        return True
    return trial_fitness >= target_fitness


def repair(x, space: SearchSpace) -> np.ndarray:
    """Reflect out-of-box coordinates back into the box, then clamp."""
    y = np.array(x, dtype=float)
    lo, hi = space.lower, space.upper
    for _ in range(8):
        below, above = y < lo, y > hi
        if not (below.any() or above.any()):
            break
        y = np.where(below, 2.0 * lo - y, y)
        y = np.where(above, 2.0 * hi - y, y)
    return np.clip(y, lo, hi)


def _first_argmax(f: np.ndarray) -> int:
    return int(np.argmax(f))


def _evaluate(objective, X: np.ndarray, vectorized: bool, generation: int) -> np.ndarray:
    if vectorized:
        try:
            out = np.asarray(objective(X), dtype=float)
        except Exception as exc:
            raise RuntimeError(f"objective failed in generation {generation}: {exc}") from exc
        if out.shape != (X.shape[0],):
            raise ValueError(f"vectorized objective returned shape {out.shape}, expected ({X.shape[0]},)")
        return out
    out = np.empty(X.shape[0])
    for k, x in enumerate(X):
        try:
            out[k] = float(objective(x))
        except Exception as exc:
            raise RuntimeError(
                f"objective failed in generation {generation} at index {k}: {exc}") from exc
    return out


def initialize(space: SearchSpace, pop_size: int, seed: int, objective=None,
               vectorized: bool = False) -> Population:
    """Uniform random population in the box, evaluated if ``objective`` is given.

    Raises
    ------
    ValueError
        If ``pop_size < 6`` (strategy 3 needs five indices other than the target).
    """
    if int(pop_size) != pop_size or pop_size < 6:
        raise ValueError(f"population size must be an integer >= 6, got {pop_size}")
    rng = np.random.default_rng(seed)
    X = space.lower + rng.random((int(pop_size), space.dimension)) * (space.upper - space.lower)
    X = np.clip(X, space.lower, space.upper)
    if objective is None:
        fit = np.full(int(pop_size), -np.inf)
    else:
        fit = _evaluate(objective, X, vectorized, 0)
        if not np.all(np.isfinite(fit)):
            raise ValueError("objective returned non-finite values on the initial population")
    return Population(X, fit, 0, _first_argmax(fit), int(seed), rng)


def _record(pop: Population) -> GenerationRecord:
    return GenerationRecord(pop.generation, pop.best_fitness, float(np.mean(pop.fitness)),
                            pop.best_vector.copy())


def run_msde(objective, space: SearchSpace, pop_size: int = 30, max_generations: int = 1000,
             seed: int = 0, *, vectorized: bool = False, K: float = 0.5,
             F_mean: float = 0.5, F_std: float = 0.3, CR_mean: float = 0.5,
             CR_std: float = 0.1, callback=None) -> MSDEResult:
    """Maximize ``objective`` over ``space``.

    Parameters
    ----------
    objective : callable
        ``objective(x) -> float``, or ``objective(X) -> (NP,)`` when
        ``vectorized``.
    space : SearchSpace
    pop_size : int
        NP (at least 6).
    max_generations : int
        Number of generations after the initial one.
    seed : int
    vectorized : bool
        Evaluate each generation's trials in one call.
    callback : callable, optional
        Called with each :class:`GenerationRecord`.

    Returns
    -------
    MSDEResult
        ``trace[0]`` is the initial population; one record per generation follows.
    """
    if int(max_generations) != max_generations or max_generations < 0:
        raise ValueError("max_generations must be a non-negative integer")
    pop = initialize(space, pop_size, seed, objective, vectorized)
    rng = pop.rng
    NP, D = pop.vectors.shape
    trace = [_record(pop)]
    if callback:
        callback(trace[0])
    evaluations = NP
    for g in range(1, int(max_generations) + 1):
        X = pop.vectors
        trials = np.empty_like(X)
        for i in range(NP):
            params = sample_strategy_params(rng, F_mean, F_std, CR_mean, CR_std, K)
            r = draw_indices(rng, NP, i, N_INDICES[params.strategy])
            donor = mutate(X, i, params, r, pop.best_index)
            trial = donor if params.strategy == 4 else crossover(X[i], donor, params.CR, rng)
            trials[i] = repair(trial, space)
        f_trial = _evaluate(objective, trials, vectorized, g)
        evaluations += NP
        newX = X.copy()
        newF = pop.fitness.copy()
        for i in range(NP):
            if select(newF[i], f_trial[i]):
                newX[i] = trials[i]
                newF[i] = f_trial[i]
        pop = Population(newX, newF, g, _first_argmax(newF), pop.rng_seed, rng)
        trace.append(_record(pop))
        if callback:
            callback(trace[-1])
    return MSDEResult(pop.best_vector.copy(), pop.best_fitness, trace, pop, evaluations)


class MixedStrategyDE(BaseEstimator):
    """Estimator interface to :func:`run_msde`.

    Parameters
    ----------
    pop_size : int, default=30
    max_generations : int, default=1000
    random_state : int, default=0
    K : float, default=0.5
    F_mean, F_std : float, default=(0.5, 0.3)
    CR_mean, CR_std : float, default=(0.5, 0.1)
    vectorized : bool, default=False

    Attributes
    ----------
    best_vector_ : ndarray
    best_fitness_ : float
    trace_ : list of GenerationRecord
    n_evaluations_ : int

    Examples
    --------
    >>> from pulseopt.objectives import negative_sphere
    >>> de = MixedStrategyDE(pop_size=10, max_generations=50, random_state=1)
    >>> de.fit(negative_sphere, ([-5.0] * 3, [5.0] * 3)).best_fitness_ > -0.5
    True
    """

    def __init__(self, pop_size=30, max_generations=1000, random_state=0, K=0.5,
                 F_mean=0.5, F_std=0.3, CR_mean=0.5, CR_std=0.1, vectorized=False):
        self.pop_size = pop_size
        self.max_generations = max_generations
        self.random_state = random_state
        self.K = K
        self.F_mean = F_mean
        self.F_std = F_std
        self.CR_mean = CR_mean
        self.CR_std = CR_std
        self.vectorized = vectorized

    def fit(self, objective, bounds, callback=None):
        """Run the search; ``bounds`` is a SearchSpace or ``(lower, upper)``."""
        space = bounds if isinstance(bounds, SearchSpace) else SearchSpace(*bounds)
        res = run_msde(objective, space, self.pop_size, self.max_generations,
                       self.random_state, vectorized=self.vectorized, K=self.K,
                       F_mean=self.F_mean, F_std=self.F_std, CR_mean=self.CR_mean,
                       CR_std=self.CR_std, callback=callback)
        self.result_ = res
        self.best_vector_ = res.best_vector
        self.best_fitness_ = res.best_fitness
        self.trace_ = res.trace
        self.n_evaluations_ = res.evaluations
        return self

    def score(self, objective) -> float:
        check_is_fitted(self, "best_vector_")
        return float(objective(self.best_vector_))
