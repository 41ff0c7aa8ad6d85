from fractions import Fraction

import pytest

from milnorian import qlinalg as ql
from milnorian.errors import DimensionCapExceeded
from milnorian.irrep import (apply_w0, build_irrep, check_relations, condition_i_check,
                             irrep_from_labels, w0_representative)
from milnorian.rootsys import build_root_system, longest_element
from milnorian.weights import HighestWeight, weight_system

REPS = [("A", 1, (2,)), ("A", 1, (3,)), ("A", 2, (1, 1)), ("B", 2, (1, 0)), ("B", 2, (2, 0)),
        ("B", 2, (0, 1)), ("A", 3, (0, 1, 0)), ("G", 2, (1, 0)), ("B", 3, (1, 0, 0)),
        ("C", 3, (1, 0, 0))]


def weight_projection(m, mu):
    idx = set(m.weight_index.get(mu, []))
    return [[Fraction(int(i == j and i in idx)) for j in range(m.dim)] for i in range(m.dim)]


@pytest.mark.parametrize("t,r,w", REPS)
def test_relations_and_dimensions(t, r, w):
    m = irrep_from_labels(t, r, w)
    assert check_relations(m) == []
    ws = weight_system(HighestWeight(m.rs, w))
    assert m.dim == ws.total_dim
    for key, idx in m.weight_index.items():
        assert len(idx) == ws.dynkin_multiplicities[key]
    for op in m.e_ops + m.f_ops:
        p = op.dense()
        for _ in range(m.dim):
            p = ql.matmul(p, op.dense())
        assert ql.is_zero(p)
    for i, h in enumerate(m.h_ops):
        d = h.dense()
        for a in range(m.dim):
            for b in range(m.dim):
                if a != b:
                    assert d[a][b] == 0
            assert d[a][a] == m.basis_weights[a][i]


def test_examples():
    m = irrep_from_labels("A", 1, (2,))
    assert m.dim == 3
    assert sorted(m.h_ops[0].dense()[i][i] for i in range(3)) == [-2, 0, 2]
    assert (irrep_from_labels("B", 2, (1, 0)).dim, len(irrep_from_labels("B", 2, (1, 0)).zero_block)) == (5, 1)
    m = irrep_from_labels("B", 2, (2, 0))
    assert (m.dim, len(m.zero_block)) == (14, 2)


def test_cap():
    with pytest.raises(DimensionCapExceeded):
        irrep_from_labels("B", 2, (3, 3), cap=100)


def test_w0_examples():
    m = irrep_from_labels("A", 1, (2,))
    (z,) = m.zero_block
    assert apply_w0(m, {z: Fraction(1)}) == {z: Fraction(-1)}
    triv = irrep_from_labels("B", 2, (0, 0))
    assert w0_representative(triv).matrix == ((Fraction(1),),)
    m = irrep_from_labels("B", 2, (1, 0))
    (z,) = m.zero_block
    assert apply_w0(m, {z: Fraction(1)}) == {z: Fraction(1)}


@pytest.mark.parametrize("t,r,w", REPS)
def test_w0_permutes_weight_spaces(t, r, w):
    m = irrep_from_labels(t, r, w)
    op = w0_representative(m)
    mat = [list(row) for row in op.matrix]
    inv = ql.inverse(mat)
    w0 = longest_element(m.rs)
    for mu in m.weight_index:
        image = m.rs.dynkin_labels(w0.apply(m.rs.from_dynkin(mu)))
        lhs = ql.matmul(ql.matmul(mat, weight_projection(m, mu)), inv)
        assert lhs == weight_projection(m, image)
    sq = ql.matmul(mat, mat)
    for mu, idx in m.weight_index.items():
        signs = {sq[i][i] for i in idx}
        assert len(signs) == 1 and signs <= {Fraction(1), Fraction(-1)}
        for i in idx:
            assert all(sq[i][j] == 0 for j in range(m.dim) if j != i)


@pytest.mark.parametrize("t,r,w", REPS)
def test_zero_block_independent_of_reduced_word(t, r, w):
    m = irrep_from_labels(t, r, w)
    a = w0_representative(m, prefer="lowest")
    b = w0_representative(m, prefer="highest")
    for z in m.zero_block:
        assert [row[z] for row in a.matrix] == [row[z] for row in b.matrix]


def test_condition_i_examples():
    assert condition_i_check(irrep_from_labels("B", 2, (1, 0)))[0]
    ok, v = condition_i_check(irrep_from_labels("A", 1, (2,)))
    assert not ok and v
    assert condition_i_check(irrep_from_labels("B", 2, (2, 0)))[0]
