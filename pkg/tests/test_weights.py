from collections import Counter
from fractions import Fraction
from itertools import combinations_with_replacement

import pytest
from hypothesis import given, settings, strategies as st

from milnorian.errors import ConditionNotMet, DimensionCapExceeded
from milnorian.rootsys import (build_root_system, enumerate_weyl_group, inner, longest_element,
                               minus_w0_fixed_subspace)
from milnorian.weights import (HighestWeight, condition_iii_check, has_zero_weight, weyl_dimension,
                               weight_system, x0_candidate)

F = Fraction


def ws_of(t, r, w):
    return weight_system(HighestWeight(build_root_system(t, r), tuple(w)))


def add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def test_a1_adjoint_string():
    ws = ws_of("A", 1, (2,))
    rs = ws.rs
    # sl2 string rule: labels 2, 0, -2, multiplicity one each
    assert sorted(rs.dynkin_labels(w)[0] for w in ws.entries) == [-2, 0, 2]
    assert set(ws.entries.values()) == {1} and ws.total_dim == 3


def test_b2_standard_weights():
    ws = ws_of("B", 2, (1, 0))
    expected = {(F(1), F(0)), (F(-1), F(0)), (F(0), F(1)), (F(0), F(-1)), (F(0), F(0))}
    assert set(ws.entries) == expected
    assert ws.total_dim == 5


def test_b2_sym2_character():
    # traceless Sym^2 of the 5-dim module: all sums of two weights minus one zero
    std = list(ws_of("B", 2, (1, 0)).entries)
    char = Counter(add(u, v) for u, v in combinations_with_replacement(std, 2))
    char[(F(0), F(0))] -= 1
    ws = ws_of("B", 2, (2, 0))
    assert dict(ws.entries) == {k: v for k, v in char.items() if v}
    assert ws.total_dim == 14 and ws.zero_weight_dim == 2


@pytest.mark.parametrize("t,r,w", [("A", 2, (1, 1)), ("B", 3, (0, 1, 0)), ("G", 2, (1, 0)),
                                   ("C", 3, (0, 0, 1)), ("D", 4, (0, 1, 0, 0)),
                                   ("B", 2, (1, 1)), ("A", 3, (1, 0, 1))])
def test_dimension_and_invariance(t, r, w):
    ws = ws_of(t, r, w)
    assert sum(ws.entries.values()) == ws.total_dim == weyl_dimension(ws.rs, w)
    for g in enumerate_weyl_group(ws.rs):
        for lam, m in ws.entries.items():
            assert ws.multiplicity(g.apply(lam)) == m
    total = (F(0),) * ws.rs.ambient_dim
    for lam, m in ws.entries.items():
        total = tuple(x + m * y for x, y in zip(total, lam))
    assert all(x == 0 for x in total)
    top = ws.rs.from_dynkin(w)
    for lam in ws.entries:
        coeffs = ws.rs.simple_coordinates(tuple(a - b for a, b in zip(top, lam)))
        assert all(c.denominator == 1 and c >= 0 for c in coeffs)


def test_dimension_cap():
    with pytest.raises(DimensionCapExceeded) as info:
        weight_system(HighestWeight(build_root_system("A", 3), (4, 4, 4)), cap=1000)
    assert info.value.dimension > 1000


def test_has_zero_weight_examples():
    assert has_zero_weight(ws_of("B", 2, (1, 0)))
    assert not has_zero_weight(ws_of("A", 1, (1,)))
    assert not has_zero_weight(ws_of("A", 2, (1, 0)))


def test_condition_iii_examples():
    ok, x0 = condition_iii_check(ws_of("B", 2, (1, 0)))
    assert ok
    ok, _ = condition_iii_check(ws_of("A", 2, (1, 1)))
    assert ok
    ok, weight = condition_iii_check(ws_of("A", 3, (0, 1, 0)))
    assert not ok
    # e2 + e3 in sum-zero coordinates
    assert weight == (F(-1, 2), F(1, 2), F(1, 2), F(-1, 2))


def test_x0_candidate_examples():
    x = x0_candidate(ws_of("B", 2, (1, 0))).coords
    assert all(c.denominator == 1 for c in x) and x[0] > x[1] > 0
    assert len(x0_candidate(ws_of("A", 1, (2,))).coords) == 2
    rs = build_root_system("A", 2)
    x = x0_candidate(ws_of("A", 2, (1, 1))).coords
    (f,) = minus_w0_fixed_subspace(rs)
    assert x == tuple(-c for c in f) or x == f
    with pytest.raises(ConditionNotMet):
        x0_candidate(ws_of("A", 3, (0, 1, 0)))


REPS = [("A", 1, (2,)), ("A", 2, (1, 1)), ("A", 3, (0, 1, 0)), ("A", 3, (1, 0, 1)),
        ("B", 2, (1, 0)), ("B", 2, (0, 2)), ("B", 3, (1, 0, 0)), ("C", 3, (0, 1, 0)),
        ("D", 4, (1, 0, 0, 0)), ("D", 5, (1, 0, 0, 0, 0)), ("G", 2, (0, 1)), ("A", 4, (1, 0, 0, 1))]


@settings(max_examples=len(REPS), deadline=None)
@given(st.sampled_from(REPS))
def test_condition_iii_brute_force(rep):
    ws = ws_of(*rep)
    basis = minus_w0_fixed_subspace(ws.rs)
    expected = all(any(inner(lam, f) != 0 for f in basis) for lam in ws.nonzero_weights())
    ok, witness = condition_iii_check(ws)
    assert ok == expected
    if ok:
        w0 = longest_element(ws.rs)
        assert tuple(-c for c in w0.apply(witness)) == witness
        assert ws.rs.is_dominant(witness, strict=True)
        assert all(inner(lam, witness) != 0 for lam in ws.nonzero_weights())
    else:
        assert ws.multiplicity(witness) > 0 and all(inner(witness, f) == 0 for f in basis)
