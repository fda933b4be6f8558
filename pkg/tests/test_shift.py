import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from covercount import schottky as sk
from covercount import transfer as tr
from covercount.errors import NotAtCriticalExponent, ValidationError
from covercount.hyperbolic import geodesic_invariants
from covercount.shift import (MarkovShift, cycle_holonomy_sum,
                              cycle_roof_sum, from_schottky, parry_chain,
                              sample_cocycle, sample_cocycle_batch,
                              toy_from_json, toy_full_shift, toy_to_json)


def test_toy_full_shift_structure():
    s = toy_full_shift(2, 1.0, [[1], [-1]])
    assert s.k == 2 and s.d == 1
    assert np.all(s.transition == 1)
    assert np.all(s.tau == 1.0)
    assert s.f[0, 0, 0] == 1 and s.f[1, 0, 0] == -1
    assert s.aperiodicity_power == 1


def test_toy_shift_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        toy_full_shift(1, 1.0, [[1]])
    with pytest.raises(ValidationError):
        toy_full_shift(2, -1.0, [[1], [-1]])


def test_toy_json_roundtrip():
    s = toy_full_shift(3, 0.5, [[1, 0], [0, 1], [-1, -1]])
    back = toy_from_json(toy_to_json(s))
    assert np.array_equal(back.transition, s.transition)
    assert np.array_equal(back.f, s.f)
    assert np.array_equal(back.tau, s.tau)
    assert back.fingerprint() == s.fingerprint()


def test_from_schottky_structure(group_b, shift_b):
    s = shift_b
    assert s.k == 4
    assert s.source == "SchottkyCoding"
    assert s.analytic
    # zeros exactly on the letter-followed-by-inverse entries
    for a in range(4):
        for b in range(4):
            assert s.transition[a, b] == (0 if b == (a ^ 1) else 1)
    assert s.aperiodicity_power == 2
    # f of a transition entering letter g1 is the first homology column
    col = np.asarray(group_b.homology_matrix[:, 0])
    assert np.array_equal(s.f[sk.sym_index(1), sk.sym_index(2)], col)
    assert np.array_equal(s.f[sk.sym_index(-1), sk.sym_index(2)], -col)


def test_aperiodicity_rejects_reducible():
    A = np.array([[1, 0], [0, 1]])
    with pytest.raises(ValidationError):
        MarkovShift(k=2, transition=A, f=np.zeros((2, 2, 0), dtype=int),
                    tau=np.ones((2, 2)))


def test_cycle_roof_sums_match_translation_lengths(group_b):
    letters = [1, -1, 2, -2]
    worst = 0.0
    for n in range(1, 6):
        for word in itertools.product(letters, repeat=n):
            if not sk.is_cyclically_reduced(word):
                continue
            if word != sk.canonical_rotation(word):
                continue
            ell = geodesic_invariants(group_b.evaluate(word)).length
            worst = max(worst, abs(cycle_roof_sum(group_b, word) - ell))
    assert worst < 1e-9


def test_cycle_roof_rotation_invariance(group_b):
    word = (1, 2, -1, 2, 2)
    base = cycle_roof_sum(group_b, word)
    for r in range(1, len(word)):
        rot = word[r:] + word[:r]
        assert_allclose(cycle_roof_sum(group_b, rot), base, atol=1e-9)


def test_cycle_holonomy_sums_match_invariants(group_d0):
    letters = [1, -1, 2, -2]
    for n in range(1, 5):
        for word in itertools.product(letters, repeat=n):
            if not sk.is_cyclically_reduced(word):
                continue
            if word != sk.canonical_rotation(word):
                continue
            inv = geodesic_invariants(group_d0.evaluate(word))
            assert_allclose(cycle_roof_sum(group_d0, word), inv.length, atol=1e-9)
            dtheta = abs(cycle_holonomy_sum(group_d0, word) - inv.holonomy_angle)
            dtheta = dtheta % (2 * math.pi)
            assert min(dtheta, 2 * math.pi - dtheta) < 1e-9


# -- Parry chains ------------------------------------------------------------

def test_parry_chain_toy_uniform():
    for k in (2, 3):
        s = toy_full_shift(k, 1.0, [[1]] + [[-1]] * (k - 1))
        spec = tr.OperatorSpec(s)
        sr = tr.leading_eigenvalue(spec, math.log(k), want_measure=True)
        chain = parry_chain(s, sr)
        assert_allclose(chain.transitions, np.full((k, k), 1.0 / k), atol=1e-10)
        assert_allclose(chain.stationary, np.full(k, 1.0 / k), atol=1e-10)


def test_parry_chain_requires_critical_exponent(toy2):
    spec = tr.OperatorSpec(toy2)
    sr = tr.leading_eigenvalue(spec, 0.5, want_measure=True)
    with pytest.raises(NotAtCriticalExponent):
        parry_chain(toy2, sr)


def test_parry_chain_respects_disk_symmetry(shift_b, spectral_b):
    # z -> -z swaps each generator with its inverse: p(a -> b) = p(abar -> bbar)
    chain = parry_chain(shift_b, spectral_b)
    P = chain.transitions
    for a in range(4):
        for b in range(4):
            assert abs(P[a, b] - P[a ^ 1, b ^ 1]) < 1e-6
    assert_allclose(chain.stationary @ chain.transitions, chain.stationary,
                    atol=1e-10)


# -- cocycle sampling ----------------------------------------------------------

def test_sample_cocycle_zero_steps(toy2):
    spec = tr.OperatorSpec(toy2)
    sr = tr.leading_eigenvalue(spec, math.log(2.0), want_measure=True)
    chain = parry_chain(toy2, sr)
    sample = sample_cocycle(chain, toy2, 0, rng_seed=7)
    assert sample.tau_n == 0.0
    assert np.all(sample.f_n == 0)


def test_sample_cocycle_constant_roof_exact(toy2):
    spec = tr.OperatorSpec(toy2)
    sr = tr.leading_eigenvalue(spec, math.log(2.0), want_measure=True)
    chain = parry_chain(toy2, sr)
    tau, f = sample_cocycle_batch(chain, toy2, 250, 8, master_seed=3)
    assert_allclose(tau, 250.0, atol=1e-12)  # tau_n = n c exactly
    assert f.shape == (8, 1)


def test_sample_cocycle_zero_drift(toy2):
    spec = tr.OperatorSpec(toy2)
    sr = tr.leading_eigenvalue(spec, math.log(2.0), want_measure=True)
    chain = parry_chain(toy2, sr)
    n, m = 400, 600
    tau, f = sample_cocycle_batch(chain, toy2, n, m, master_seed=11)
    mean = f[:, 0].mean() / n
    se = f[:, 0].std(ddof=1) / n / math.sqrt(m)
    assert abs(mean) < 3 * se + 1e-12


def test_sampler_deterministic_per_trajectory(toy2):
    spec = tr.OperatorSpec(toy2)
    sr = tr.leading_eigenvalue(spec, math.log(2.0), want_measure=True)
    chain = parry_chain(toy2, sr)
    t1, f1 = sample_cocycle_batch(chain, toy2, 100, 6, master_seed=5, batch=2)
    t2, f2 = sample_cocycle_batch(chain, toy2, 100, 6, master_seed=5, batch=6)
    assert np.array_equal(t1, t2) and np.array_equal(f1, f2)
    _, f3 = sample_cocycle_batch(chain, toy2, 100, 6, master_seed=6)
    assert not np.array_equal(f1, f3)


def test_schottky_sampler_statistics(shift_b, spectral_b, surface_b):
    chain = parry_chain(shift_b, spectral_b)
    tau, f = sample_cocycle_batch(chain, shift_b, 2000, 400, master_seed=9,
                                  spectral=spectral_b)
    assert np.all(tau > 0)
    z = f[:, 0] / np.sqrt(tau)
    # loose 4-sigma-ish band around the Hessian variance at this sample size
    assert abs(z.var() / surface_b.sigma - 1.0) < 0.35
