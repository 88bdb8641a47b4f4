"""Dense Fock-space oracle: traces, closed forms, frequency sums."""

import itertools
import json

import numpy as np
import pytest

from hfrg.fock import (
    FockOperatorSet,
    ModeMatrix,
    closed_form_two_point,
    fourier_two_point,
    matsubara_two_point,
    thermal_two_point,
    time_ordered_average,
    verify_lemmas,
    wick_check,
)


def random_mode(rng, n, scale=1.0):
    raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return ModeMatrix(scale * (raw + raw.conj().T) / 2)


def test_single_mode_two_point_has_explicit_form():
    lam, beta, t, tbar = 0.8, 3.0, 2.0, 0.5
    expected = np.exp(-(t - tbar) * lam) / (1 + np.exp(-beta * lam))
    dense = thermal_two_point([[lam]], beta, t, tbar)[0, 0]
    assert abs(dense - expected) < 1e-12
    reversed_expected = -np.exp(-(tbar - t + beta) * lam) \
        / (1 + np.exp(-beta * lam))
    dense = thermal_two_point([[lam]], beta, tbar, t)[0, 0]
    assert abs(dense - reversed_expected) < 1e-12


def test_flat_mode_equal_time_value_is_one_half():
    assert abs(thermal_two_point([[0.0]], 2.0, 0.7, 0.7)[0, 0] - 0.5) == 0.0
    assert abs(matsubara_two_point([[0.0]], 2.0, 0.0, 50)[0, 0] - 0.5) < 1e-15


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("beta", [1.0, 5.0, 50.0])
def test_dense_trace_matches_eigenbasis_closed_form(n, beta):
    rng = np.random.default_rng(100 * n + int(beta))
    mode = random_mode(rng, n)
    for _ in range(5):
        t, tbar = rng.uniform(0, beta, size=2)
        dense = thermal_two_point(mode, beta, t, tbar)
        closed = closed_form_two_point(mode, beta, t, tbar)
        assert np.max(np.abs(dense - closed)) < 1e-10


def test_equal_time_ordering_puts_annihilator_left():
    lam, beta = 0.6, 2.0
    dense = thermal_two_point([[lam]], beta, 0.9, 0.9)[0, 0]
    # annihilator-first ordering leaves the hole weight, not the
    # occupation number
    assert abs(dense - 1.0 / (1 + np.exp(-beta * lam))) < 1e-12


def test_anticommutators_of_constructed_operators():
    rng = np.random.default_rng(3)
    for n in range(1, 5):
        ops = FockOperatorSet(random_mode(rng, n))
        eye = np.eye(1 << n)
        for i in range(n):
            for j in range(n):
                mixed = (ops.annihilators[i] @ ops.creators[j]
                         + ops.creators[j] @ ops.annihilators[i])
                target = eye if i == j else 0.0
                assert np.max(np.abs(mixed - target)) <= 1e-13
                same = (ops.annihilators[i] @ ops.annihilators[j]
                        + ops.annihilators[j] @ ops.annihilators[i])
                assert np.max(np.abs(same)) <= 1e-13


def test_quadratic_hamiltonian_is_hermitian_with_mode_spectrum():
    rng = np.random.default_rng(4)
    mode = random_mode(rng, 3)
    ops = FockOperatorSet(mode)
    h = ops.hamiltonian
    assert np.max(np.abs(h - h.conj().T)) < 1e-12
    # many-body spectrum consists of all subset sums of the mode levels
    lam = np.linalg.eigvalsh(mode.mu)
    subset_sums = sorted(
        float(np.sum(lam[list(chosen)])) if chosen else 0.0
        for size in range(4)
        for chosen in itertools.combinations(range(3), size))
    assert np.allclose(sorted(np.linalg.eigvalsh(h)), subset_sums,
                       atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("beta", [1.0, 5.0])
def test_frequency_sum_converges_to_dense_two_point(n, beta):
    rng = np.random.default_rng(10 * n + int(beta))
    mode = random_mode(rng, n)
    for frac in (0.55, -0.4, 0.2):
        tau = frac * beta
        t, tbar = (tau, 0.0) if tau >= 0 else (0.0, -tau)
        summed = matsubara_two_point(mode, beta, tau, 10 ** 4)
        dense = thermal_two_point(mode, beta, t, tbar)
        assert np.max(np.abs(summed - dense)) < 1e-6


def test_frequency_sum_jump_across_zero_is_identity():
    rng = np.random.default_rng(11)
    for n in (1, 2):
        mode = random_mode(rng, n, scale=0.1)
        for beta in (1.0, 5.0):
            jump = matsubara_two_point(mode, beta, 1e-3, 10 ** 4) \
                - matsubara_two_point(mode, beta, -1e-3, 10 ** 4)
            assert np.max(np.abs(jump - np.eye(n))) < 1e-4


def test_zero_frequency_branch_matches_principal_part_sum():
    mode = ModeMatrix([[0.4, 0.2 - 0.1j], [0.2 + 0.1j, -0.3]])
    beta, cutoff = 2.0, 400
    got = matsubara_two_point(mode, beta, 0.0, cutoff)
    k0 = (2 * np.pi / beta) * (np.arange(-cutoff, cutoff) + 0.5)
    principal = sum(
        np.linalg.inv(k * k * np.eye(2) + mode.mu @ mode.mu) @ mode.mu
        for k in k0) / beta
    assert np.max(np.abs(got - (0.5 * np.eye(2) + principal))) < 1e-12


@pytest.mark.parametrize("beta", [1.0, 5.0])
def test_quadrature_fourier_coefficient_matches_resolvent(beta):
    rng = np.random.default_rng(int(beta))
    for n in (1, 2):
        mode = random_mode(rng, n)
        lam, u = np.linalg.eigh(mode.mu)
        for k_index in range(5):
            k0 = (2 * np.pi / beta) * (k_index + 0.5)
            target = (u * (1.0 / (-1j * k0 + lam))) @ u.conj().T
            got = fourier_two_point(mode, beta, k_index, panels=10 ** 4)
            assert np.max(np.abs(got - target)) < 1e-4


def test_pairing_identity_single_pair_is_exact():
    rng = np.random.default_rng(21)
    mode = random_mode(rng, 2)
    lhs, rhs = wick_check(mode, 3.0, 1, (1.2, 0.4), (0, 1))
    assert lhs == rhs


@pytest.mark.parametrize("n_pairs", [2, 3])
def test_pairing_identity_reduces_to_signed_sum(n_pairs):
    rng = np.random.default_rng(30 + n_pairs)
    for modes in (1, 2, 3):
        mode = random_mode(rng, modes)
        beta = 2.0
        for _ in range(3):
            times = tuple(rng.uniform(0, beta, size=2 * n_pairs))
            indices = tuple(rng.integers(0, modes, size=2 * n_pairs))
            lhs, rhs = wick_check(mode, beta, n_pairs, times, indices)
            assert abs(lhs - rhs) < 1e-8


def test_repeated_creator_at_one_time_kills_both_sides():
    lhs, rhs = wick_check([[0.3]], 2.0, 2,
                          (0.5, 1.1, 0.8, 0.8), (0, 0, 0, 0))
    assert abs(lhs) < 1e-14
    assert abs(rhs) < 1e-14


def test_swapping_two_written_factors_flips_the_sign():
    rng = np.random.default_rng(40)
    mode = random_mode(rng, 2)
    factors = [(0.3, "-", 0), (1.4, "+", 1), (0.9, "-", 1), (1.9, "+", 0)]
    base = time_ordered_average(mode, 3.0, factors)
    swapped = [factors[0], factors[2], factors[1], factors[3]]
    assert abs(base + time_ordered_average(mode, 3.0, swapped)) < 1e-14
    assert abs(base) > 1e-6


def test_mode_matrix_validation():
    with pytest.raises(ValueError):
        ModeMatrix([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        ModeMatrix(np.zeros((5, 5)))
    with pytest.raises(ValueError):
        ModeMatrix(np.zeros((2, 3)))


def test_argument_validation():
    flat = [[0.0]]
    with pytest.raises(ValueError):
        thermal_two_point(flat, 51.0, 0.1, 0.2)
    with pytest.raises(ValueError):
        thermal_two_point(flat, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        thermal_two_point(flat, 2.0, 2.5, 0.2)
    with pytest.raises(ValueError):
        matsubara_two_point(flat, 2.0, 2.5, 100)
    with pytest.raises(ValueError):
        matsubara_two_point(flat, 2.0, 0.5, 0)
    with pytest.raises(ValueError):
        wick_check(flat, 2.0, 4, (0.1,) * 8, (0,) * 8)
    with pytest.raises(ValueError):
        time_ordered_average(flat, 2.0, [(0.1, "x", 0)])
    with pytest.raises(ValueError):
        time_ordered_average(flat, 2.0, [(0.1, "-", 1)])


def test_lemma_battery_passes_and_serializes():
    records = verify_lemmas()
    names = [r["lemma"] for r in records]
    assert names == [
        "anticommutation",
        "two_point_closed_form",
        "matsubara_representation",
        "equal_time_half",
        "discontinuity",
        "fourier_inversion",
        "wick_rule",
    ]
    for r in records:
        assert r["passed"], f"{r['lemma']} at {r['max_error']}"
        assert r["max_error"] <= r["tolerance"]
    json.dumps(records)
