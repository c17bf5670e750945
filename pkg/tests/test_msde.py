import logging

import numpy as np
import pytest
from sklearn.base import clone

from pulseopt.msde import (N_INDICES, MixedStrategyDE, SearchSpace, StrategyParams, crossover,
                           draw_indices, initialize, mutate, repair, run_msde,
                           sample_strategy_params, select)
from pulseopt.objectives import negative_sphere

N_DRAWS = 100_000


def test_strategy1_example():
    X = np.array([[9.0, 9.0], [1.0, 2.0], [3.0, 4.0], [1.0, 0.0]])
    np.testing.assert_array_equal(mutate(X, 0, StrategyParams(0.5, 0.5, 1), [1, 2, 3]), [2.0, 4.0])


def test_strategy4_vanishing_differences():
    X = np.array([[1.0, -2.0], [1.0, -2.0], [5.0, 7.0], [5.0, 7.0]])
    np.testing.assert_array_equal(mutate(X, 0, StrategyParams(0.7, 0.5, 4), [1, 2, 3]), X[0])


def test_strategy2_vanishing_terms():
    X = np.array([[3.0, 1.0], [4.0, 4.0], [4.0, 4.0], [0.5, 2.0], [0.5, 2.0], [8.0, 8.0]])
    v = mutate(X, 0, StrategyParams(0.9, 0.5, 2), [1, 2, 3, 4], best_index=0)
    np.testing.assert_array_equal(v, X[0])


def test_strategy2_and_3_arithmetic():
    X = np.arange(12, dtype=float).reshape(6, 2) ** 2
    F, K = 0.3, 0.5
    v2 = mutate(X, 0, StrategyParams(F, 0.5, 2), [1, 2, 3, 4], best_index=5)
    np.testing.assert_allclose(v2, X[0] + F * (X[5] - X[0]) + F * (X[1] - X[2]) + F * (X[3] - X[4]))
    v3 = mutate(X, 0, StrategyParams(F, 0.5, 3), [1, 2, 3, 4, 5])
    np.testing.assert_allclose(v3, X[1] + F * (X[2] - X[3]) + F * (X[4] - X[5]))
    v4 = mutate(X, 0, StrategyParams(F, 0.5, 4, K), [1, 2, 3])
    np.testing.assert_allclose(v4, X[0] + K * (X[1] - X[0]) + F * (X[2] - X[3]))


def test_mutate_needs_enough_indices():
    with pytest.raises(ValueError):
        mutate(np.zeros((6, 2)), 0, StrategyParams(0.5, 0.5, 3), [1, 2, 3])


def test_crossover_cr_one_takes_donor(rng):
    x, v = np.zeros(10), np.arange(1.0, 11.0)
    np.testing.assert_array_equal(crossover(x, v, 1.0, rng), v)


def test_crossover_cr_zero_takes_one_coordinate(rng):
    for _ in range(50):
        u = crossover(np.zeros(10), np.ones(10), 0.0, rng)
        assert np.count_nonzero(u) == 1


def test_crossover_support(rng):
    seen = set()
    for _ in range(400):
        u = crossover(np.zeros(3), np.ones(3), 0.5, rng)
        assert set(u) <= {0.0, 1.0} and u.sum() >= 1
        seen.add(tuple(u))
    assert len(seen) == 7


def test_select_rule(caplog):
    assert select(3, 5) is True
    assert select(5, 5) is True
    assert select(5, 3) is False
    with caplog.at_level(logging.WARNING):
        assert select(5, float("nan")) is False
    assert "non-finite" in caplog.text


def test_index_exclusivity_and_strategy_frequencies():
    rng = np.random.default_rng(0)
    NP = 30
    counts = np.zeros(5)
    for n in range(N_DRAWS):
        p = sample_strategy_params(rng)
        counts[p.strategy] += 1
        i = n % NP
        r = draw_indices(rng, NP, i, N_INDICES[p.strategy])
        assert len(set(r.tolist())) == len(r) and i not in r and r.min() >= 0 and r.max() < NP
    np.testing.assert_allclose(counts[1:] / N_DRAWS, 0.25, atol=0.01)


def test_control_parameter_statistics():
    rng = np.random.default_rng(1)
    draws = [sample_strategy_params(rng) for _ in range(N_DRAWS)]
    CR = np.array([d.CR for d in draws])
    F = np.array([d.F for d in draws])
    assert CR.min() >= 0 and CR.max() <= 1
    assert abs(CR.mean() - 0.5) < 0.01 and abs(CR.std() - 0.1) < 0.01
    assert abs(F.mean() - 0.5) < 0.01 and abs(F.std() - 0.3) < 0.01
    assert F.min() < 0  # F is used as drawn, negative values included


def test_search_space_validation():
    with pytest.raises(ValueError):
        SearchSpace([0.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        SearchSpace([0.0], [1.0, 2.0])


def test_initialize_rejects_small_population():
    with pytest.raises(ValueError):
        initialize(SearchSpace.box(3, 0, 1), 5, 0)


def test_initialize_bounds_and_determinism():
    space = SearchSpace.box(80, 0.0, 2 * np.pi)
    a = initialize(space, 30, 42, negative_sphere)
    b = initialize(space, 30, 42, negative_sphere)
    assert a.vectors.shape == (30, 80)
    assert np.all(a.vectors >= 0) and np.all(a.vectors <= 2 * np.pi)
    np.testing.assert_array_equal(a.vectors, b.vectors)
    assert a.best_index == int(np.argmax(a.fitness))


def test_repair_reflects_then_clamps():
    space = SearchSpace.box(4, 0.0, 1.0)
    np.testing.assert_allclose(repair([-0.3, 1.2, 0.5, 7.3], space), [0.3, 0.8, 0.5, 0.7])
    assert space.contains(repair([1e9, -1e9, 0.0, 1.0], space))


def test_constant_objective_accepts_every_trial():
    space = SearchSpace.box(4, -1.0, 1.0)
    start = initialize(space, 8, 3)
    res = run_msde(lambda x: 1.0, space, 8, 1, 3)
    assert np.all(res.best_trace() == 1.0)
    assert np.all(np.any(res.population.vectors != start.vectors, axis=1))


def test_run_properties():
    space = SearchSpace.box(6, -5.0, 5.0)
    seen = []

    def obj(x):
        assert space.contains(x)
        seen.append(1)
        return negative_sphere(x)

    res = run_msde(obj, space, 12, 40, 5)
    assert len(res.trace) == 41 and res.evaluations == 12 * 41 == len(seen)
    best = res.best_trace()
    assert np.all(np.diff(best) >= 0)
    assert np.all(best >= res.average_trace())
    assert negative_sphere(res.best_vector) == res.best_fitness


def test_vectorized_and_serial_runs_are_identical():
    space = SearchSpace.box(5, -2.0, 3.0)
    a = run_msde(negative_sphere, space, 10, 25, 11)
    b = run_msde(negative_sphere, space, 10, 25, 11, vectorized=True)
    np.testing.assert_array_equal(a.best_trace(), b.best_trace())
    np.testing.assert_array_equal(a.population.vectors, b.population.vectors)


def test_bitwise_determinism():
    space = SearchSpace.box(10, -5.0, 5.0)
    a = run_msde(negative_sphere, space, 30, 50, 123, vectorized=True)
    b = run_msde(negative_sphere, space, 30, 50, 123, vectorized=True)
    assert a.best_trace().tobytes() == b.best_trace().tobytes()
    assert a.average_trace().tobytes() == b.average_trace().tobytes()
    assert a.best_vector.tobytes() == b.best_vector.tobytes()


def test_beats_random_search_tenfold():
    space = SearchSpace.box(10, -5.0, 5.0)
    res = run_msde(negative_sphere, space, 30, 300, 9, vectorized=True)
    rs = np.random.default_rng(9).uniform(-5, 5, (res.evaluations, 10))
    best_random = negative_sphere(rs).max()
    assert abs(res.best_fitness) * 10 <= abs(best_random)


def test_objective_failure_has_context():
    def bad(x):
        raise ZeroDivisionError("boom")

    with pytest.raises(RuntimeError, match="generation 0"):
        run_msde(bad, SearchSpace.box(2, 0, 1), 6, 3, 0)


def test_estimator_interface():
    de = MixedStrategyDE(pop_size=10, max_generations=30, random_state=2)
    de.fit(negative_sphere, ([-1.0] * 3, [1.0] * 3))
    assert de.best_fitness_ == de.score(negative_sphere)
    assert len(de.trace_) == 31
    assert clone(de).get_params()["random_state"] == 2
