import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cartan_leaf
from milnorian import freegroup as fg
from milnorian.errors import BelowDescentThreshold, DegenerateInvariant, NotCollinear
from milnorian.realize import LinearPart, Translation
from milnorian.schottky import SLACK, SchottkyFamily, calibrate, neutral_translate
from milnorian.words import (build_gamma_double_prime, collinear_sequence, collinearity_ratio,
                             descent_threshold, greedy_bounded_words, nonproperness_witness,
                             solve_witness, vector_norm_step, witness_radius)


# --------------------------------------------------------------------------- descent step

def test_threshold_value():
    assert descent_threshold(2) == pytest.approx(5.1087, abs=1e-4)
    assert descent_threshold(2) == pytest.approx(math.sqrt(2) * 3 + math.sqrt(3) / 2)


def test_step_examples():
    beta, new = vector_norm_step(np.array([10.0, 0.0]), 0)
    assert np.array_equal(beta, [1.0, 0.0]) and np.linalg.norm(new) == 9.0
    assert 9.0 <= 10 - 1 / (2 * math.sqrt(2))
    beta, new = vector_norm_step(np.array([4.0, -3.5]), 2)
    assert np.array_equal(beta, [1.0, -2.0])
    assert np.linalg.norm(new) <= np.linalg.norm([4.0, -3.5]) - 1 / (2 * math.sqrt(2))
    with pytest.raises(BelowDescentThreshold):
        vector_norm_step(np.array([3.0, 3.0]), 0)


def test_step_tie_breaks():
    # ties in |c_i| go to the lowest index; c_j = 0 takes tau = +1
    beta, _ = vector_norm_step(np.array([-6.0, 6.0, 0.0]), 1)
    assert np.array_equal(beta, [-1.0, 1.0, 0.0])
    beta, _ = vector_norm_step(np.array([0.0, 9.0]), 2)
    assert np.array_equal(beta, [2.0, 1.0])


def test_step_uses_runner_up_index():
    # with j = 0 (c_j = 0) and x = 2 this vector would only lose about 0.19 < 1/(2 sqrt 6)
    a = 4.11917847
    alpha = np.array([0.0, -a, -a, a, -a / 2, a])
    beta, new = vector_norm_step(alpha, 2)
    assert np.array_equal(beta, [0, -1, -2, 0, 0, 0])
    assert np.linalg.norm(new) <= np.linalg.norm(alpha) - 1 / (2 * math.sqrt(6))
    bad = alpha - np.array([2.0, -1, 0, 0, 0, 0])
    assert np.linalg.norm(bad) > np.linalg.norm(alpha) - 1 / (2 * math.sqrt(6))


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2), st.integers(0, 2 ** 31), st.floats(1.000001, 4.0))
def test_step_inequality(k, x, seed, scale):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=k)
    alpha = d / np.linalg.norm(d) * descent_threshold(k) * scale
    _, new = vector_norm_step(alpha, x)
    assert np.linalg.norm(new) <= np.linalg.norm(alpha) - 1 / (2 * math.sqrt(k)) + 1e-12


# --------------------------------------------------------------------------- collinear path

def test_collinearity_ratio_errors():
    with pytest.raises(DegenerateInvariant):
        collinearity_ratio(np.array([1.0, 0]), np.array([1e-12, 0]))
    with pytest.raises(NotCollinear):
        collinearity_ratio(np.array([1.0, 0]), np.array([0, 1.0]))
    assert collinearity_ratio(np.array([-2.0]), np.array([0.5])) == -4.0


def test_collinear_zero_invariant(real5, sim5):
    fam = sim5.family
    # g without translation has M(g) = 0, so c = 0 and the words are g^n
    g0 = LinearPart(fam.generators[0])
    fam0 = SchottkyFamily(real5, [g0, fam.generators[1]], fam.C, fam.N_used, fam.calibration)
    traces = collinear_sequence(fam0, n_max=8)
    assert [len(t.letters) for t in traces] == list(range(1, 9))
    bound = np.linalg.norm(fam.margulis([(1, 1)])) + SLACK * fam.calibration.eps_additivity
    assert all(np.linalg.norm(t.final_margulis) <= bound for t in traces)


def test_collinear_telescoping(real5, sim5):
    fam = sim5.family
    g, h = fam.generators
    # h retranslated so that M(h) = M(g): c = 1 and the words are g^n h^-n
    h1 = neutral_translate(real5, h, fam.margulis([(0, 1)]))
    fam1 = SchottkyFamily(real5, [g, h1], fam.C, fam.N_used)
    fam1.calibration = calibrate(fam1, sample_count=40, seed=1)
    traces = collinear_sequence(fam1, n_max=10)
    for n, t in enumerate(traces, start=1):
        assert fg.to_str(t.letters) == "a" * n + "B" * n
        assert np.linalg.norm(t.final_margulis) <= t.bound_R


def test_collinear_b2_seed_42(sim5):
    fam = sim5.family
    bound = np.linalg.norm(fam.margulis(sim5.h_word)) + 2 * fam.calibration.eps_additivity
    assert len(sim5.traces) == 50
    assert all(np.linalg.norm(t.final_margulis) <= bound for t in sim5.traces)


# --------------------------------------------------------------------------- basis subgroup

@pytest.mark.slow
def test_gamma_double_prime_invariants(sim14):
    gpp = sim14.gpp
    assert gpp.k == 2
    base = gpp.base
    for i, w in enumerate(gpp.basis_elements):
        assert fg.is_cyclically_reduced(w)
        e = np.zeros(gpp.k)
        e[i] = 1
        assert np.allclose(gpp.phi @ base.margulis(w), e, atol=1e-9)
    eps = gpp.family.calibration.eps_additivity
    assert gpp.N_prime >= 12 * math.sqrt(gpp.k) * gpp.phi_norm * eps
    assert gpp.R == pytest.approx(gpp.phi_inv_norm * descent_threshold(2) * gpp.N_prime)


@pytest.mark.slow
def test_gamma_double_prime_degenerate_pool(sim14):
    pool = [[(0, 1)] * n for n in range(1, 6)]
    with pytest.raises(DegenerateInvariant):
        build_gamma_double_prime(sim14.family, pool=pool)


@pytest.mark.slow
def test_gamma_double_prime_without_additivity_term(sim14):
    gpp = build_gamma_double_prime(sim14.family, seed=9, eps_override=0.0)
    assert gpp.history[0]["required"] == gpp.N_prime == gpp.history[0]["N_prime"]


# --------------------------------------------------------------------------- greedy words

@pytest.mark.slow
def test_greedy_traces(sim14):
    gpp = sim14.gpp
    eps = gpp.family.calibration.eps_additivity
    required = gpp.N_prime / (4 * math.sqrt(gpp.k)) - 2 * eps
    assert len({t.word for t in sim14.traces}) == len(sim14.traces)
    for t in sim14.traces:
        assert t.letters[:len(t.prefix)] == t.prefix
        assert t.cyclically_reduced and fg.is_cyclically_reduced(t.letters)
        assert len(t.margulis_history) == len(t.decrements) + 1
        assert all(d >= required for d in t.decrements)
        assert np.linalg.norm(gpp.coords(t.final_margulis)) < gpp.threshold
        assert np.linalg.norm(t.final_margulis) <= gpp.R
        norms = [np.linalg.norm(gpp.coords(m)) for m in t.margulis_history]
        assert all(b < a for a, b in zip(norms, norms[1:]))


@pytest.mark.slow
def test_greedy_empty_prefix_stops_at_once(sim14):
    t = greedy_bounded_words(sim14.gpp, [], seed=3)
    assert len(t.letters) == 1 and t.decrements == []


@pytest.mark.slow
def test_greedy_padding(sim14):
    t = greedy_bounded_words(sim14.gpp, fg.from_str("aaaaaaaa"))
    # the first step wants a^-1 right after a final a: a padding letter of b goes in between
    assert t.letters[8][0] == 1 and t.letters[9] == (0, -1)
    assert len(t.decrements) >= 1 and fg.is_cyclically_reduced(t.letters)


# --------------------------------------------------------------------------- witness

def test_witness_pure_translation(real5):
    v = np.array([1.0, -2.0, 0.5, 0.0, 3.0])
    res = solve_witness(real5, Translation(v), radius=np.linalg.norm(v))
    assert res["status"] == "success"
    assert np.allclose(res["x"], -v / 2, atol=1e-3)


def test_witness_huge_translation(real5):
    v = np.array([100.0, 0, 0, 0, 0])
    res = solve_witness(real5, Translation(v), radius=10.0)
    assert res["status"] == "failure" and res["lower_bound"] > 10.0


def test_witness_canonized_element(real5):
    v = np.zeros(5)
    v[real5.zero_block] = 0.8
    g = cartan_leaf(real5, 0.3 * real5.x0, v)
    res = solve_witness(real5, g, radius=1.0)
    assert res["status"] == "success" and res["verified_objective"] <= 1.0


def test_witness_report_on_collinear_traces(sim5):
    traces = sim5.traces[:5]
    rep = nonproperness_witness(traces, sim5.family, sim5.C_prime, R=sim5.R, iters=2000)
    assert rep.radius == pytest.approx(witness_radius(sim5.C_prime, sim5.R))
    assert rep.successes == 5 and rep.failures == 0 and rep.certified
    for res in rep.per_gamma:
        assert res["verified_objective"] <= rep.radius * (1 + 1e-6)
