import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from covercount import schottky as sk
from covercount.errors import (BudgetExceeded, DisksOverlap, PairingBroken,
                               RankDeficientHomology, ValidationError)
from covercount.groupfile import group_from_dict, pairing_map
from covercount.hyperbolic import Model, geodesic_invariants
from covercount.schottky import (Disk, SchottkyGroup, canonical_rotation,
                                 enumerate_orbit, enumerate_orbit_bruteforce,
                                 is_cyclically_reduced, is_primitive, is_reduced,
                                 primitive_classes, reduce_concat, word_inverse)

letters = st.integers(min_value=-2, max_value=2).filter(lambda x: x != 0)
words = st.lists(letters, max_size=10).map(tuple)


def simple_group(d=1):
    return group_from_dict({
        "model": "H2",
        "disks": [
            {"minus": {"center": [-3.0, 0.0], "radius": 1.0},
             "plus": {"center": [3.0, 0.0], "radius": 1.0}},
            {"minus": {"center": [-9.0, 0.0], "radius": 1.0},
             "plus": {"center": [9.0, 0.0], "radius": 1.0}},
        ],
        "homology_matrix": [[1, 0]] if d == 1 else np.eye(d, 2, dtype=int).tolist(),
    })


# -- word utilities ----------------------------------------------------------

def test_symbol_order_matches_spec():
    # canonical letter order 1 < -1 < 2 < -2
    assert [sk.letter_of_index(i) for i in range(4)] == [1, -1, 2, -2]
    assert sk.inverse_index(sk.sym_index(1)) == sk.sym_index(-1)


@given(words, words)
@settings(max_examples=200, deadline=None)
def test_reduce_concat_is_reduced(w1, w2):
    r1, r2 = reduce_concat((), w1), reduce_concat((), w2)
    assert is_reduced(reduce_concat(r1, r2))


@given(words)
@settings(max_examples=200, deadline=None)
def test_word_inverse_cancels(w):
    r = reduce_concat((), w)
    assert reduce_concat(r, word_inverse(r)) == ()


def test_canonical_rotation_is_least():
    word = (2, 1, -1)  # not cyclically reduced rotations matter less; use a clean one
    word = (2, 1, 2)
    rot = canonical_rotation(word)
    assert rot == (1, 2, 2)
    assert all(sk.word_key(rot) <= sk.word_key(r) for r in sk.rotations(word))


def test_primitivity():
    assert is_primitive((1, 2))
    assert not is_primitive((1, 2, 1, 2))
    assert not is_primitive((1, 1))
    assert is_primitive((1, 1, 2))


# -- group evaluation and cocycle ---------------------------------------------

def test_evaluate_matches_composition(group_b):
    w1, w2 = (1, 2, -1), (2, 2, 1)
    lhs = group_b.evaluate(w1 + w2)  # concatenation stays reduced
    from covercount.hyperbolic import compose, projectively_equal
    rhs = compose(group_b.evaluate(w1), group_b.evaluate(w2))
    assert projectively_equal(lhs, rhs, tol=1e-9)


def test_abelianize_examples():
    g = group_from_dict({
        "model": "H2",
        "disks": [
            {"minus": {"center": [-3.0, 0.0], "radius": 1.0},
             "plus": {"center": [3.0, 0.0], "radius": 1.0}},
            {"minus": {"center": [-9.0, 0.0], "radius": 1.0},
             "plus": {"center": [9.0, 0.0], "radius": 1.0}},
        ],
        "homology_matrix": [[1, 0], [0, 1]],
    })
    assert g.abelianize(()) == (0, 0)
    assert g.abelianize((1, 2, -1, -2)) == (0, 0)  # commutator
    assert g.abelianize((1, 2, 1)) == (2, 1)
    assert g.kernel_membership((1, -2, -1, 2))
    assert not g.kernel_membership((1,))


# -- validation -----------------------------------------------------------------

def test_validate_ok():
    simple_group()  # constructor validates


def test_disks_overlap_rejected():
    with pytest.raises(DisksOverlap):
        group_from_dict({
            "model": "H2",
            "disks": [
                {"minus": {"center": [-3.0, 0.0], "radius": 5.0},
                 "plus": {"center": [3.0, 0.0], "radius": 5.0}},
                {"minus": {"center": [-9.0, 0.0], "radius": 1.0},
                 "plus": {"center": [9.0, 0.0], "radius": 1.0}},
            ],
            "homology_matrix": [[1, 0]],
        })


def test_rank_deficient_homology_rejected():
    with pytest.raises(RankDeficientHomology):
        group_from_dict({
            "model": "H2",
            "disks": [
                {"minus": {"center": [-3.0, 0.0], "radius": 1.0},
                 "plus": {"center": [3.0, 0.0], "radius": 1.0}},
                {"minus": {"center": [-9.0, 0.0], "radius": 1.0},
                 "plus": {"center": [9.0, 0.0], "radius": 1.0}},
            ],
            "homology_matrix": [[0, 0]],
        })


def test_broken_pairing_rejected():
    g = simple_group()
    bad = [pairing_map(Disk(-3.0 + 0j, 1.0), Disk(3.0 + 0j, 1.0), Model.H2)] * 2
    with pytest.raises(PairingBroken):
        SchottkyGroup(bad,
                      [Disk(-3.0 + 0j, 1.0), Disk(-9.0 + 0j, 1.0)],
                      [Disk(3.0 + 0j, 1.0), Disk(9.0 + 0j, 1.0)],
                      [[1, 0]], Model.H2)


# -- orbit enumeration -----------------------------------------------------------

def test_enumerate_t0_identity_only():
    g = simple_group()
    records = []
    n = enumerate_orbit(g, 0.0, emit=records.append)
    assert n == 1
    assert records[0].word == ()
    assert records[0].displacement == 0.0


def test_enumerate_below_min_generator():
    g = simple_group()
    min_gen = min(geodesic_invariants(x).length for x in g.generators)
    n = enumerate_orbit(g, min_gen * 0.5)
    assert n == 1


def test_enumerate_matches_bruteforce_oracle(group_b):
    records = []
    enumerate_orbit(group_b, 6.0, emit=records.append)
    # longest word at T = 6 has 7 letters; 11 leaves a 4-letter safety margin
    brute = enumerate_orbit_bruteforce(group_b, 6.0, max_len=11)
    assert set(r.word for r in records) == set(r.word for r in brute)
    assert len(records) == len(brute)


def test_enumerate_no_duplicates_and_reduced(group_b):
    records = []
    enumerate_orbit(group_b, 9.0, emit=records.append)
    seen = set(r.word for r in records)
    assert len(seen) == len(records)
    assert all(is_reduced(r.word) for r in records)


def test_enumerate_count_symmetry(group_b):
    by_xi = {}
    def take(rec):
        by_xi[rec.homology] = by_xi.get(rec.homology, 0) + 1
    enumerate_orbit(group_b, 9.0, emit=take)
    for xi, n in by_xi.items():
        assert by_xi[tuple(-x for x in xi)] == n


def test_enumerate_budget():
    g = simple_group()
    with pytest.raises(BudgetExceeded):
        enumerate_orbit(g, 12.0, budget=5)


def test_enumerate_threads_deterministic(group_b):
    one, four = [], []
    enumerate_orbit(group_b, 8.0, emit=one.append, threads=1)
    enumerate_orbit(group_b, 8.0, emit=four.append, threads=4)
    assert one == four


# -- primitive classes -----------------------------------------------------------

def test_classes_below_min_length_empty(group_b):
    min_gen = min(geodesic_invariants(x).length for x in group_b.generators)
    assert primitive_classes(group_b, 0.9 * min_gen) == 0


def test_classes_orientation_reversal_pairing(group_b):
    records = []
    primitive_classes(group_b, 8.0, emit=records.append)
    assert records
    table = {r.word: r for r in records}
    for r in records:
        mirror = canonical_rotation(word_inverse(r.word))
        assert mirror in table
        rbar = table[mirror]
        assert_allclose(rbar.length, r.length, atol=1e-9)
        assert rbar.homology == tuple(-x for x in r.homology)
        assert abs(rbar.holonomy + r.holonomy) < 1e-9 or \
            abs(abs(rbar.holonomy + r.holonomy) - 2 * math.pi) < 1e-9


def test_classes_proper_powers_excluded(group_b):
    words = []
    primitive_classes(group_b, 8.0, emit=lambda r: words.append(r.word))
    assert (1, 1) not in words
    assert all(is_primitive(w) and is_cyclically_reduced(w) for w in words)
    assert all(w == canonical_rotation(w) for w in words)


def test_classes_unique(group_b):
    words = []
    primitive_classes(group_b, 9.0, emit=lambda r: words.append(r.word))
    assert len(words) == len(set(words))


def test_classes_lengths_match_invariants(group_b):
    records = []
    primitive_classes(group_b, 7.0, emit=records.append)
    for r in records:
        inv = geodesic_invariants(group_b.evaluate(r.word))
        assert_allclose(r.length, inv.length, atol=1e-10)


def test_class_growth_coarse_sanity(group_b, delta_b):
    # d = 0 view: total primitive count against e^{dL}/(dL), within [0.5, 2]
    L = 14.0
    n = primitive_classes(group_b, L)
    predicted = math.exp(delta_b * L) / (delta_b * L)
    assert 0.5 < n / predicted < 2.0


def test_classes_3d_model(group_d0):
    records = []
    primitive_classes(group_d0, 8.0, emit=records.append)
    assert records
    for r in records:
        inv = geodesic_invariants(group_d0.evaluate(r.word))
        assert_allclose(r.length, inv.length, atol=1e-10)
        dtheta = abs(r.holonomy - inv.holonomy_angle) % (2 * math.pi)
        assert min(dtheta, 2 * math.pi - dtheta) < 1e-10
        assert any(abs(r.holonomy) > 1e-3 for r in records)
