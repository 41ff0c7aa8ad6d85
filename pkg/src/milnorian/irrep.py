"""Irreducible highest-weight modules over the rationals.

The module is grown weight space by weight space from the highest weight
vector.  At each weight the candidate vectors ``f_i u`` are paired through the
contravariant (Shapovalov) form; the irreducible quotient is what survives
after removing its radical.  The raising operators of the candidates are
computed at the same time, so each weight space is cross-checked two ways and
against Freudenthal's multiplicities.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from . import qlinalg as ql
from .errors import DimensionCapExceeded, InternalConsistencyError
from .rootsys import longest_element
from .weights import HighestWeight, weight_system, weyl_dimension

IRREP_CAP = 2000


class SparseOp:
    """Linear operator stored column by column as ``{row: value}`` dicts."""

    def __init__(self, dim):
        self.dim = dim
        self.cols = [dict() for _ in range(dim)]

    def apply(self, vec):
        """Apply to a sparse vector ``{index: value}``."""
        out = {}
        for j, x in vec.items():
            for i, a in self.cols[j].items():
                out[i] = out.get(i, 0) + a * x
        return {i: x for i, x in out.items() if x != 0}

    def dense(self):
        m = ql.zeros(self.dim)
        for j, col in enumerate(self.cols):
            for i, a in col.items():
                m[i][j] = a
        return m

    def is_zero(self):
        return not any(self.cols)


def _exp_apply(op, vec, sign=1):
    """``exp(sign * op) vec`` for nilpotent ``op``."""
    out = dict(vec)
    term = dict(vec)
    k = 0
    while term:
        k += 1
        term = op.apply(term)
        if sign < 0 and k % 2:
            term_signed = {i: -x for i, x in term.items()}
        else:
            term_signed = term
        for i, x in term_signed.items():
            out[i] = out.get(i, 0) + x / factorial(k)
        if k > 4 * op.dim + 4:
            raise InternalConsistencyError("operator is not nilpotent")
    return {i: x for i, x in out.items() if x != 0}


@dataclass
class RepModule:
    rs: object
    highest: tuple
    dim: int
    basis_weights: list          # Dynkin labels of each basis vector
    e_ops: list
    f_ops: list
    h_ops: list
    weight_index: dict           # Dynkin labels -> list of basis indices
    gram: dict                   # Dynkin labels -> contravariant form on that weight space
    zero_block: list = field(default_factory=list)

    def ambient_weight(self, idx):
        return self.rs.from_dynkin(self.basis_weights[idx])


def _levels(rs, lam, weights):
    a_inv = ql.inverse([[Fraction(rs.cartan_matrix[i][j]) for j in range(rs.rank)]
                        for i in range(rs.rank)])
    out = {}
    for mu in weights:
        d = [Fraction(x - y) for x, y in zip(lam, mu)]
        # lam - mu = sum n_j alpha_j, and alpha_j has Dynkin labels cartan[.][j]
        n = ql.matvec(a_inv, d)
        out[mu] = int(sum(n))
    return out


def build_irrep(hw, cap=IRREP_CAP):
    rs = hw.rs
    lam = hw.fw_coords
    dim = weyl_dimension(rs, lam)
    if dim > cap:
        raise DimensionCapExceeded(dim, cap, "irreducible module")
    ws = weight_system(hw)
    r = rs.rank
    cartan = rs.cartan_matrix
    # alpha_j in Dynkin labels: <alpha_j, alpha_i^vee> = cartan[i][j]
    alpha = [tuple(cartan[i][j] for i in range(r)) for j in range(r)]

    level = _levels(rs, lam, ws.dynkin_multiplicities)
    order = sorted(ws.dynkin_multiplicities, key=lambda mu: (level[mu], tuple(-x for x in mu)))

    e_ops = [SparseOp(dim) for _ in range(r)]
    f_ops = [SparseOp(dim) for _ in range(r)]
    basis_weights = []
    weight_index = {}
    gram = {}

    def shift(mu, j, s=1):
        return tuple(x + s * y for x, y in zip(mu, alpha[j]))

    for mu in order:
        m = ws.dynkin_multiplicities[mu]
        if mu == lam:
            weight_index[mu] = [0]
            basis_weights.append(mu)
            gram[mu] = [[Fraction(1)]]
            continue
        # target blocks of the raising map V_mu -> (+)_j V_{mu + alpha_j}
        blocks = []
        offset = 0
        for j in range(r):
            up = shift(mu, j)
            if up in weight_index:
                blocks.append((j, up, offset))
                offset += len(weight_index[up])
        width = offset

        candidates = []  # (i, source index u)
        images = []      # raising image of f_i u, flattened over blocks
        for i, up_i, _ in blocks:
            for u in weight_index[up_i]:
                img = [Fraction(0)] * width
                hi = up_i[i]
                for j, up_j, off in blocks:
                    pos = {idx: k for k, idx in enumerate(weight_index[up_j])}
                    # e_j f_i u = f_i e_j u + delta_ij h_i u
                    eu = e_ops[j].apply({u: Fraction(1)})
                    vec = f_ops[i].apply(eu) if eu else {}
                    for idx, x in vec.items():
                        img[off + pos[idx]] += x
                    if i == j:
                        img[off + pos[u]] += hi
                candidates.append((i, u))
                images.append(img)

        # contravariant form <f_i u, c> = <u, e_i c>
        offsets = {j: off for j, _, off in blocks}
        g_cand = []
        for (i, u), _ in zip(candidates, images):
            up_i = shift(mu, i)
            loc = weight_index[up_i].index(u)
            grow = gram[up_i][loc]
            off = offsets[i]
            n_i = len(weight_index[up_i])
            g_cand.append([ql.dot(grow, img[off:off + n_i]) for img in images])

        chosen = ql.independent_rows(images)
        if len(chosen) != m or ql.rank(g_cand) != m:
            raise InternalConsistencyError(
                f"weight {mu}: radical quotient has dimension {len(chosen)} "
                f"(form rank {ql.rank(g_cand)}), Freudenthal gives {m}")
        new_idx = list(range(len(basis_weights), len(basis_weights) + m))
        basis_weights.extend([mu] * m)
        weight_index[mu] = new_idx
        gram[mu] = [[g_cand[a][b] for b in chosen] for a in chosen]

        # express every candidate in the chosen basis through the injective raising map
        chosen_t = ql.transpose([images[c] for c in chosen])
        coords = ql.solve(chosen_t, ql.transpose(images))
        for k, (i, u) in enumerate(candidates):
            col = {new_idx[a]: coords[a][k] for a in range(m) if coords[a][k] != 0}
            f_ops[i].cols[u] = col
        for a, c in enumerate(chosen):
            img = images[c]
            for j, up_j, off in blocks:
                for k, idx in enumerate(weight_index[up_j]):
                    x = img[off + k]
                    if x != 0:
                        e_ops[j].cols[new_idx[a]][idx] = x

    if len(basis_weights) != dim:
        raise InternalConsistencyError(f"built {len(basis_weights)} basis vectors, expected {dim}")
    h_ops = []
    for i in range(r):
        h = SparseOp(dim)
        for idx, mu in enumerate(basis_weights):
            if mu[i]:
                h.cols[idx][idx] = Fraction(mu[i])
        h_ops.append(h)
    zero = tuple([0] * r)
    return RepModule(rs, lam, dim, basis_weights, e_ops, f_ops, h_ops, weight_index, gram,
                     list(weight_index.get(zero, [])))


def irrep_from_labels(type_label, rank, fw_coords, cap=IRREP_CAP):
    from .rootsys import build_root_system
    rs = build_root_system(type_label, rank)
    return build_irrep(HighestWeight(rs, tuple(fw_coords)), cap=cap)


def check_relations(m):
    """Verify the Chevalley relations as exact matrix identities; returns a list of failures."""
    r = m.rs.rank
    a = m.rs.cartan_matrix
    E = [op.dense() for op in m.e_ops]
    F = [op.dense() for op in m.f_ops]
    H = [op.dense() for op in m.h_ops]
    bad = []
    for i in range(r):
        for j in range(r):
            target = H[i] if i == j else ql.zeros(m.dim)
            if ql.commutator(E[i], F[j]) != target:
                bad.append(f"[e{i},f{j}]")
            if ql.commutator(H[i], E[j]) != ql.scale(E[j], a[i][j]):
                bad.append(f"[h{i},e{j}]")
            if ql.commutator(H[i], F[j]) != ql.scale(F[j], -a[i][j]):
                bad.append(f"[h{i},f{j}]")
    return bad


# --------------------------------------------------------------------------- w0 representative

def _apply_simple_representative(m, i, vec):
    """``exp(f_i) exp(-e_i) exp(f_i)`` applied to a sparse vector."""
    v = _exp_apply(m.f_ops[i], vec)
    v = _exp_apply(m.e_ops[i], v, sign=-1)
    return _exp_apply(m.f_ops[i], v)


def apply_w0(m, vec, word=None):
    if word is None:
        word = longest_element(m.rs).word
    v = {i: Fraction(x) for i, x in vec.items()}
    for i in reversed(word):
        v = _apply_simple_representative(m, i, v)
    return v


@dataclass(frozen=True)
class LongestElementOperator:
    matrix: tuple
    reduced_word_used: tuple


def w0_representative(m, prefer="lowest"):
    word = longest_element(m.rs, prefer=prefer).word
    cols = [apply_w0(m, {j: Fraction(1)}, word) for j in range(m.dim)]
    mat = tuple(tuple(cols[j].get(i, Fraction(0)) for j in range(m.dim)) for i in range(m.dim))
    return LongestElementOperator(mat, word)


def condition_i_check(m):
    """Whether the Weyl representative fixes every zero-weight vector.

    Returns ``(True, None)`` or ``(False, v)`` with ``v`` (a dict over zero-block
    indices) a zero-weight basis vector that is moved.
    """
    for idx in m.zero_block:
        image = apply_w0(m, {idx: Fraction(1)})
        if image != {idx: Fraction(1)}:
            return False, {idx: Fraction(1)}
    return True, None
