"""Relaxation ascent and hyperplane rounding."""

import numpy as np
import pytest

from adaptcut import (
    InvalidInstanceError,
    InvalidParameterError,
    MaxCutInstance,
    brute_force_max_cut,
    cut_value,
    expected_cut,
    generate_instance,
    gw_ratio,
    hyperplane_round,
    solve_relaxation,
)
from adaptcut.gw import cut_probability, min_relaxation_rank


def test_rank_bound():
    assert min_relaxation_rank(2) == 2
    assert min_relaxation_rank(8) == 4
    assert min_relaxation_rank(50) == 10


def test_relaxation_triangle(triangle):
    # optimum embeds the vertices at 120 degrees: objective 9/4
    sol = solve_relaxation(triangle, seed=1)
    assert sol.converged
    assert sol.objective == pytest.approx(2.25, abs=1e-6)
    gram = sol.vectors @ sol.vectors.T
    off = gram[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, -0.5, atol=1e-4)


def test_relaxation_dominates_best_cut():
    # the relaxed objective upper-bounds every cut
    for seed in range(8):
        inst = generate_instance(6, seed=seed)
        sol = solve_relaxation(inst, seed=seed)
        v_max = brute_force_max_cut(inst).value
        assert sol.objective >= v_max - 1e-6


def test_relaxation_unit_rows(inst6):
    sol = solve_relaxation(inst6, seed=0)
    norms = np.linalg.norm(sol.vectors, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)
    assert sol.rank == 6


def test_relaxation_monotone_in_restarts(inst6):
    one = solve_relaxation(inst6, restarts=1, seed=5)
    three = solve_relaxation(inst6, restarts=3, seed=5)
    assert three.objective >= one.objective - 1e-12


def test_relaxation_deterministic(inst6):
    a = solve_relaxation(inst6, seed=9)
    b = solve_relaxation(inst6, seed=9)
    assert np.array_equal(a.vectors, b.vectors)
    assert a.objective == b.objective


def test_relaxation_rejects_low_rank(inst6):
    with pytest.raises(InvalidParameterError):
        solve_relaxation(inst6, rank=2)  # bound is ceil(sqrt(12)) = 4


def test_rounding_triangle_is_exact(triangle):
    # any hyperplane cuts exactly two of the three unit edges
    sol = solve_relaxation(triangle, seed=1)
    res = hyperplane_round(triangle, sol, rounds=500, seed=3)
    assert res.mean_value == pytest.approx(2.0, abs=1e-6)
    assert res.stderr < 1e-6
    assert res.best.value == pytest.approx(2.0, abs=1e-9)


def test_rounding_statistics(inst6):
    sol = solve_relaxation(inst6, seed=0)
    res = hyperplane_round(inst6, sol, rounds=2000, seed=1)
    v_max = brute_force_max_cut(inst6).value
    assert res.rounds == 2000
    assert res.mean_value <= res.best.value + 1e-12
    assert res.best.value <= v_max + 1e-9
    assert cut_value(inst6, res.best.bits) == pytest.approx(res.best.value, abs=1e-9)
    # mean of roundings is consistent with the closed-form expectation
    assert abs(res.mean_value - expected_cut(inst6, sol)) < 5 * res.stderr + 1e-9


def test_rounding_deterministic(inst6):
    sol = solve_relaxation(inst6, seed=0)
    a = hyperplane_round(inst6, sol, rounds=200, seed=4)
    b = hyperplane_round(inst6, sol, rounds=200, seed=4)
    assert a.mean_value == b.mean_value
    assert a.best.bits == b.best.bits


def test_rounding_rejects_zero_rounds(inst6):
    sol = solve_relaxation(inst6, seed=0)
    with pytest.raises(InvalidParameterError):
        hyperplane_round(inst6, sol, rounds=0)


def test_cut_probability_matches_angle(triangle):
    sol = solve_relaxation(triangle, seed=1)
    # 120-degree separation: probability 2/3
    assert cut_probability(sol, 0, 1) == pytest.approx(2.0 / 3.0, abs=1e-4)


def test_expected_cut_triangle(triangle):
    sol = solve_relaxation(triangle, seed=1)
    assert expected_cut(triangle, sol) == pytest.approx(2.0, abs=1e-4)


def test_gw_ratio_range():
    for seed in (0, 1, 2):
        inst = generate_instance(6, seed=seed)
        ratio = gw_ratio(inst, rounds=500, seed=seed)
        assert 0.5 < ratio <= 1.0 + 1e-9


def test_gw_ratio_triangle_is_one(triangle):
    assert gw_ratio(triangle, rounds=200, seed=0) == pytest.approx(1.0, abs=1e-6)


def test_gw_ratio_rejects_empty_graph():
    inst = MaxCutInstance(3, np.zeros((3, 3)))
    with pytest.raises(InvalidInstanceError):
        gw_ratio(inst)
