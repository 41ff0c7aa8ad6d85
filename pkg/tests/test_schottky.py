import numpy as np
import pytest

from milnorian import freegroup as fg
from milnorian.dynamics import rho_regular_decomposition, space_distance
from milnorian.errors import BudgetExhausted
from milnorian.schottky import (SLACK, SchottkyFamily, build_compatible_pair, calibrate,
                                calibration_pairs, check_transversality, neutral_translate,
                                pair_is_transverse, sample_regular, schottky_pairs,
                                select_power_and_calibrate)


def test_compatible_pair_seed_42(real5):
    pair = build_compatible_pair(real5, np.random.default_rng(42), budget=100)
    assert pair.retries < 100 and pair.C >= 1
    ok, failing = pair_is_transverse(real5, pair.g, pair.h)
    assert ok and failing == []


def test_zero_budget(real5):
    with pytest.raises(BudgetExhausted):
        build_compatible_pair(real5, np.random.default_rng(0), budget=0)


def test_same_element_rejected(real5):
    g, _ = sample_regular(real5, np.random.default_rng(5))
    ok, failing = pair_is_transverse(real5, g, g)
    assert not ok
    assert ((0, 1), (1, -1)) in failing or ((1, 1), (0, -1)) in failing


def test_schottky_pair_list():
    dyn = {(i, s): None for i in range(2) for s in (1, -1)}
    pairs = list(schottky_pairs(dyn))
    assert len(pairs) == 12
    assert all(not fg.cancels(a, b) for a, b in pairs)


def test_neutral_translation_sets_invariant(real5):
    g, _ = sample_regular(real5, np.random.default_rng(9))
    h = neutral_translate(real5, g, [0.37])
    assert np.allclose(rho_regular_decomposition(real5, h).margulis, [0.37], atol=1e-9)


def test_calibration_pairs_shape():
    rng = np.random.default_rng(0)
    pairs = calibration_pairs(2, rng, 50)
    assert len(pairs) == 50
    for u, v in pairs[:12]:
        assert len(u) == len(v) == 1
    for u, v in pairs:
        assert fg.is_cyclically_reduced(u) and fg.is_cyclically_reduced(v)
        assert fg.is_cyclically_reduced(u + v) and len(u) + len(v) <= 6


def test_family_invariants(sim5):
    fam = sim5.family
    cal = fam.calibration
    letters = fam.letter_dynamics()
    assert all(d.s_hat <= cal.s_threshold * (1 + 1e-6) for d in letters.values())
    ok, c, _ = check_transversality(letters)
    assert ok and c <= fam.C
    assert cal.sample_count >= 200 and cal.eps_additivity == max(cal.defects)
    # single-letter pairs are in the sample, so they sit below eps by construction
    for a in letters:
        for b in letters:
            if not fg.cancels(a, b):
                assert fam.defect([a], [b]) <= cal.eps_additivity


def test_split_defect_grows_at_most_linearly(sim5):
    fam = sim5.family
    eps = fam.calibration.eps_additivity
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        w = fg.random_cyclically_reduced(rng, 2, n)
        total = sum(fam.margulis([x]) for x in w)
        assert np.linalg.norm(fam.margulis(w) - total) <= (n - 1) * eps * SLACK


def test_contraction_of_words(sim5):
    fam = sim5.family
    thr = fam.calibration.s_threshold
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        w = fg.random_cyclically_reduced(rng, 2, n)
        assert fam.dynamics(w).s_hat <= 2.0 ** -(n - 1) * thr * SLACK


def test_flag_distance_envelope(sim5):
    # attracting space of a word stays close to that of its first letter, up to the C-dependent factor
    fam = sim5.family
    thr = fam.calibration.s_threshold
    rng = np.random.default_rng(3)
    for _ in range(30):
        w = fg.random_cyclically_reduced(rng, 2, int(rng.integers(2, 7)))
        d = space_distance(fam.dynamics(w).A_ge, fam.dynamics(w[:1]).A_ge)
        assert d <= fam.C * 2 * thr * SLACK


def test_power_threshold_and_recalibration(real5, sim5):
    pair = sim5.pair
    fam = select_power_and_calibrate(real5, pair.g, pair.h, pair.C, sample_count=30, seed=5)
    assert fam.N_used == sim5.family.N_used
    again = SchottkyFamily(real5, fam.generators, fam.C, fam.N_used)
    cal = calibrate(again, sample_count=30, seed=5)
    assert cal.eps_additivity == fam.calibration.eps_additivity
    bigger = calibrate(SchottkyFamily(real5, fam.generators, fam.C, fam.N_used), sample_count=60, seed=5)
    # the first 12 pairs coincide; more samples can only raise the maximum
    assert bigger.eps_additivity >= max(cal.defects[:12])
