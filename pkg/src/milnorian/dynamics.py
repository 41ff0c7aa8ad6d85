"""Jordan/Cartan projections, rho-regular decompositions and Margulis invariants.

Word products lose relative accuracy roughly like their condition number, so
everything that depends on the small eigen-directions of a long word is done
in Arb at a precision chosen from a condition-number estimate.
"""
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.linalg import subspace_angles
from scipy.optimize import minimize

from .errors import NotRegular
from . import hp
from .hp import HpAffine
from .realize import AffineMap, Element

GAP_TOL = 1e-3
IMAG_TOL = 1e-8
FIT_TOL = 1e-6
BASE_DPS = 30


def required_dps(log10_condition):
    """Working precision for a matrix whose condition number is ``10**log10_condition``."""
    digits = BASE_DPS + max(0.0, log10_condition)
    return int(math.ceil(digits / 20.0) * 20)


# --------------------------------------------------------------------------- projections

def _fit_logs(real, logs, restarts=6, rng=None):
    """Find J in the root span whose weight values match ``logs`` as multisets."""
    rs = real.rs
    simple = np.array([[float(x) for x in a] for a in rs.simple_roots]).T   # ambient x rank
    a_mat = real.weights @ simple
    target = np.sort(np.asarray(logs, dtype=float))[::-1]
    rho = np.array([float(x) for x in rs.weyl_vector])
    y_rho = np.linalg.lstsq(simple, rho, rcond=None)[0]
    rng = rng or np.random.default_rng(0)
    starts = [y_rho] + [y_rho * rng.uniform(0.2, 2.0, size=y_rho.shape) for _ in range(restarts)]
    best = None
    for y in starts:
        top = np.max(a_mat @ y)
        if top <= 0:
            continue
        y = y * (target[0] / top if target[0] > 0 else 1.0)
        order = None
        for _ in range(60):
            new_order = np.argsort(-(a_mat @ y), kind="stable")
            if order is not None and np.array_equal(new_order, order):
                break
            order = new_order
            y = np.linalg.lstsq(a_mat[order], target, rcond=None)[0]
        res = np.max(np.abs(np.sort(a_mat @ y)[::-1] - target))
        if best is None or res < best[0]:
            best = (res, y)
    res, y = best
    j = _fold_dominant(rs, simple @ y)
    return j, res


def _fold_dominant(rs, x):
    roots = [np.array([float(c) for c in a]) for a in rs.simple_roots]
    x = np.array(x, dtype=float)
    for _ in range(10000):
        for a in roots:
            v = x @ a
            if v < -1e-14 * (1 + np.linalg.norm(x)):
                x = x - 2 * v / (a @ a) * a
                break
        else:
            return x
    raise RuntimeError("folding into the dominant chamber did not terminate")


def _logs_of(values):
    return [float(abs(x).log()) for x in values]


def _hp_linear(g, dps):
    """(linear part as Arb matrix, dps) for any supported element type."""
    if isinstance(g, Element):
        dps = dps or required_dps(g.log10_condition())
        return g.hp(dps).linear, dps
    if isinstance(g, HpAffine):
        return g.linear, dps or _default_dps(hp.to_np(g.linear))
    lin = g.linear if isinstance(g, AffineMap) else np.asarray(g, dtype=float)
    dps = dps or _default_dps(lin)
    with hp.workdps(dps):
        return hp.mat(lin), dps


def jordan_projection(real, g, dps=None):
    """Jordan projection of ``g`` in ambient coordinates, in the closed dominant chamber."""
    lin, dps = _hp_linear(g, dps)
    with hp.workdps(dps):
        logs = _logs_of(hp.eigvals(lin))
    j, res = _fit_logs(real, logs)
    if res > FIT_TOL * (1 + max(abs(x) for x in logs)):
        raise NotRegular(f"eigenvalue moduli do not match any weight pattern (residual {res:.3g})")
    return j


def cartan_projection(real, g, dps=None):
    """Cartan projection, read off the singular values in the orthonormal frame."""
    lin, dps = _hp_linear(g, dps)
    with hp.workdps(2 * dps):
        logs = [float(x.log()) for x in hp.singular_values(lin)]
    j, res = _fit_logs(real, logs)
    if res > FIT_TOL * (1 + max(abs(x) for x in logs)):
        raise NotRegular(f"singular values do not match any weight pattern (residual {res:.3g})")
    return j


def simple_root_values(real, x):
    return np.array([np.dot([float(c) for c in a], x) for a in real.rs.simple_roots])


def _default_dps(lin):
    with np.errstate(all="ignore"):
        k = np.linalg.cond(lin)
    return required_dps(math.log10(k) if np.isfinite(k) and k > 0 else 300)


# --------------------------------------------------------------------------- decomposition

@dataclass
class AffineSpace:
    base: np.ndarray
    basis: np.ndarray          # orthonormal columns

    @property
    def dim(self):
        return self.basis.shape[1]


@dataclass
class DynamicsData:
    """Everything derived from a rho-regular affine map."""
    jordan: np.ndarray
    V_gt: np.ndarray
    V_eq: np.ndarray
    V_lt: np.ndarray
    A_ge: AffineSpace
    A_le: AffineSpace
    margulis: np.ndarray
    s_hat: float
    eigenvalues: np.ndarray        # per basis index, canonized
    canon_residual: float
    phi0: object = field(repr=False, default=None)      # Arb matrix
    center: object = field(repr=False, default=None)    # Arb column, a point on A^=
    real: object = field(repr=False, default=None)
    _canonizer: tuple = field(repr=False, default=None)

    @property
    def jordan_simple(self):
        return simple_root_values(self.real, self.jordan)

    def canonizer(self):
        """Near-optimal canonizer ``(phi, c)``: ``x -> phi @ y + c`` sends the model to ``g``'s spaces.

        ``phi`` is ``phi0 exp(H)`` with H in the Cartan subalgebra chosen to
        minimise ``max(|phi|, |phi^-1|)``.
        """
        if self._canonizer is None:
            p0 = hp.to_np(self.phi0)
            p0i = np.linalg.inv(p0)
            w = self.real.weights
            simple = np.array([[float(x) for x in a] for a in self.real.rs.simple_roots]).T

            def cost(y):
                d = np.exp(w @ (simple @ y))
                return max(np.linalg.norm(p0 * d, 2), np.linalg.norm(p0i / d[:, None], 2))

            y0 = np.zeros(simple.shape[1])
            res = minimize(lambda y: math.log(cost(y)), y0, method="Nelder-Mead",
                           options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 2000})
            y = res.x if cost(res.x) < cost(y0) else y0
            phi = p0 * np.exp(w @ (simple @ y))
            c = hp.to_np(self.center).reshape(-1)
            self._canonizer = (phi, c)
        return self._canonizer

    def canonizer_norm(self):
        phi, _ = self.canonizer()
        return max(np.linalg.norm(phi, 2), np.linalg.norm(np.linalg.inv(phi), 2))


def _orth(cols):
    if cols.shape[1] == 0:
        return cols
    q, _ = np.linalg.qr(cols)
    return q


NEUTRAL_TOL = 1e-6


def rho_regular_decomposition(real, g, gap_tol=GAP_TOL, dps=None):
    """Decompose the affine map ``g`` with respect to the fixed X0 of ``real``.

    Raises :class:`NotRegular` when ``g`` is not rho-regular with the
    required margin ``gap_tol`` (relative to the largest Jordan value).
    """
    if isinstance(g, Element):
        dps = dps or required_dps(g.log10_condition())
        g = g.hp(dps)
    elif isinstance(g, AffineMap):
        dps = dps or _default_dps(g.linear)
        with hp.workdps(dps):
            g = g.to_hp()
    dps = dps or _default_dps(hp.to_np(g.linear))
    d = real.dim
    with hp.workdps(dps):
        lin = g.linear
        ev, er = hp.eig(lin)
        for x in ev:
            if abs(float(x.imag)) > IMAG_TOL * float(abs(x)):
                raise NotRegular("non-real eigenvalue")
        evr = [x.real for x in ev]
        logs = np.array(_logs_of(evr))
        j, res = _fit_logs(real, logs)
        top = max(1.0, float(np.max(np.abs(logs))))
        if res > FIT_TOL * top:
            raise NotRegular(f"eigenvalue moduli do not fit a Jordan projection (residual {res:.3g})")
        alpha_j = simple_root_values(real, j)
        if np.min(alpha_j) < gap_tol * top:
            raise NotRegular("Jordan projection is not strictly dominant")

        blocks = real.weight_blocks()
        wkeys = list(blocks)
        amb = {mu: real.weights[blocks[mu][0]] for mu in wkeys}
        mu_j = {mu: float(amb[mu] @ j) for mu in wkeys}
        mu_x = {mu: float(amb[mu] @ real.x0) for mu in wkeys}
        ordered = sorted(wkeys, key=lambda mu: -mu_j[mu])
        for a, b in zip(ordered, ordered[1:]):
            if mu_j[a] - mu_j[b] < gap_tol * top:
                raise NotRegular("two weights are not separated by the Jordan projection")
        for mu in wkeys:
            sx, sj = mu_x[mu], mu_j[mu]
            if abs(sx) < 1e-12:
                if abs(sj) > gap_tol * top:
                    raise NotRegular("zero-weight block is not neutral")
            elif sx * sj <= 0:
                raise NotRegular("Jordan projection is not compatible with X0")

        # eigen-blocks, in the order of decreasing mu(J)
        order = np.argsort(-logs, kind="stable")
        block_cols = {}
        pos = 0
        for mu in ordered:
            m = len(blocks[mu])
            take = [int(t) for t in order[pos:pos + m]]
            pos += m
            lam = sum((evr[t] for t in take), hp.arb(0)) / m
            if all(a == 0 for a in mu) and abs(float(lam) - 1) > NEUTRAL_TOL:
                raise NotRegular("neutral block has a non-trivial rotation part")
            if m == 1:
                vec = hp.zeros(d, 1)
                t = take[0]
                for i in range(d):
                    vec[i, 0] = er[i, t].real
            else:
                vec = hp.kernel((lin - lam * hp.eye(d)).mid(), m)
            block_cols[mu] = vec

        # P in the weight order: column block for mu at mu's positions
        perm = [i for mu in ordered for i in blocks[mu]]
        p_pi = hp.zeros(d, d)
        c0 = 0
        for mu in ordered:
            vec = block_cols[mu]
            for k in range(vec.ncols()):
                for a, i in enumerate(perm):
                    p_pi[a, c0 + k] = vec[i, 0 + k]
            c0 += vec.ncols()
        # block UL: the pivot of block k is its Schur complement against later blocks
        bounds = []
        c0 = 0
        for mu in ordered:
            bounds.append(list(range(c0, c0 + len(blocks[mu]))))
            c0 += len(blocks[mu])
        corr = hp.zeros(d, d)
        for k, bk in enumerate(bounds):
            later = [i for b in bounds[k + 1:] for i in b]
            piv = hp.sub(p_pi, bk, bk)
            if later:
                s = hp.solve(hp.sub(p_pi, later, later), hp.sub(p_pi, later, bk))
                piv = (piv - hp.sub(p_pi, bk, later) * s).mid()
            pinv = hp.inv(piv)
            for a, i in enumerate(bk):
                for b, jj in enumerate(bk):
                    corr[i, jj] = pinv[a, b]
        phi_pi = hp.mul(p_pi, corr)
        phi0 = hp.zeros(d, d)
        for a, i in enumerate(perm):
            for b, jj in enumerate(perm):
                phi0[i, jj] = phi_pi[a, b]
        phi0_inv = hp.inv(phi0)
        canon = hp.mul(hp.mul(phi0_inv, lin), phi0)
        diag = [canon[i, i] for i in range(d)]
        dmax = max(float(abs(x)) for x in diag)
        off = max((float(abs(canon[i, k])) for i in range(d) for k in range(d) if i != k), default=0.0)
        canon_residual = off / dmax

        w = hp.mul(phi0_inv, g.translation)
        zero = real.zero_block
        margulis = np.array([float(w[i, 0]) for i in zero])
        cm = hp.zeros(d, 1)
        for i in range(d):
            if i not in zero:
                cm[i, 0] = w[i, 0] / (1 - diag[i])
        center = hp.mul(phi0, cm)

        # s_hat from the strict blocks
        pos_vals = [mu_j[mu] for mu in wkeys if mu_x[mu] > 1e-12]
        neg_vals = [mu_j[mu] for mu in wkeys if mu_x[mu] < -1e-12]
        s_hat = math.exp(max(neg_vals) - min(pos_vals)) if pos_vals else 0.0

        phi_np = hp.to_np(phi0)
        xw = real.weight_x0
        gt = _orth(phi_np[:, xw > 1e-12])
        eq = _orth(phi_np[:, np.abs(xw) <= 1e-12])
        lt = _orth(phi_np[:, xw < -1e-12])
        c_np = hp.to_np(center).reshape(-1)
        a_ge = AffineSpace(c_np, _orth(np.hstack([gt, eq])))
        a_le = AffineSpace(c_np, _orth(np.hstack([lt, eq])))
        eig_np = np.array([float(x) for x in diag])
    return DynamicsData(j, gt, eq, lt, a_ge, a_le, margulis, s_hat, eig_np,
                        canon_residual, phi0, center, real)


def margulis_invariant(real, g, dps=None):
    return rho_regular_decomposition(real, g, dps=dps).margulis


# --------------------------------------------------------------------------- transversality

C_MAX = 1e6
RANK_TOL = 1e-8


def extended_basis(space):
    """Orthonormal basis of the linear span of ``{(x, 1) : x in space}`` in V + R."""
    d = len(space.base)
    cols = np.zeros((d + 1, space.dim + 1))
    cols[:d, :space.dim] = space.basis
    cols[:d, space.dim] = space.base
    cols[d, space.dim] = 1.0
    q, _ = np.linalg.qr(cols)
    return q


def _rank(m, tol=RANK_TOL):
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(sv > tol * max(sv[0], 1e-300)))


def _min_sine(a, b):
    if a.shape[1] == 0 or b.shape[1] == 0:
        return 1.0
    return float(np.sin(np.min(subspace_angles(a, b))))


def transversality(a, b, c_max=C_MAX, rank_tol=RANK_TOL):
    """Whether affine spaces a, b are transverse, and how non-degenerate the pair is.

    The pair is transverse when the linear parts add up to V (the spaces
    then meet along an affine space).  The constant works with the linear
    spans of ``(a, 1)`` and ``(b, 1)`` in ``V + R``, so that it also grows
    when the intersection runs away from the origin: it is the reciprocal of
    the smallest principal-angle sine between each span's complement to the
    intersection and the other span.
    """
    d = len(a.base)
    if _rank(np.hstack([a.basis, b.basis]), rank_tol) < d:
        return False, c_max
    ea, eb = extended_basis(a), extended_basis(b)
    n = ea.shape[0]
    both = np.hstack([ea, eb])
    if _rank(both, rank_tol) < n:
        return False, c_max
    # intersection: kernel of [ea, -eb]
    _, sv, vt = np.linalg.svd(np.hstack([ea, -eb]))
    k = ea.shape[1] + eb.shape[1] - n
    coeffs = vt[vt.shape[0] - k:].T if k > 0 else np.zeros((both.shape[1], 0))
    inter = ea @ coeffs[:ea.shape[1]]
    if inter.shape[1]:
        inter, _ = np.linalg.qr(inter)

    def complement(e):
        if inter.shape[1] == 0:
            return e
        proj = e - inter @ (inter.T @ e)
        u, s, _ = np.linalg.svd(proj, full_matrices=False)
        return u[:, :e.shape[1] - inter.shape[1]]

    sine = min(_min_sine(complement(ea), eb), _min_sine(complement(eb), ea))
    if sine <= 0:
        return False, c_max
    return True, float(min(c_max, 1.0 / sine))


REFINE_DIGITS = 40


def _mp(x):
    m, e = x.mid().man_exp()
    return mpmath.ldexp(mpmath.mpf(int(m)), int(e))


def _mp_block(dyn, cols, extended):
    """Orthonormal basis (mpmath) of a span of phi0 columns, optionally extended by (center, 1)."""
    d = dyn.phi0.nrows()
    rows = d + 1 if extended else d
    m = mpmath.matrix(rows, len(cols) + (1 if extended else 0))
    for b, c in enumerate(cols):
        for i in range(d):
            m[i, b] = _mp(dyn.phi0[i, c])
    if extended:
        for i in range(d):
            m[i, len(cols)] = _mp(dyn.center[i, 0])
        m[d, len(cols)] = 1
    q, _ = mpmath.qr(m, mode="skinny")
    return q


def _mp_span_gap(qa, qb):
    """How far the spans of ``qa`` and ``qb`` are from failing to span the whole space.

    The sines of the principal angles between span(qa)^perp and span(qb)^perp
    are the singular values of ``qa^T C`` with C an orthonormal complement of
    qb; they are read off the symmetric matrix ``[[0, M], [M^T, 0]]`` so that
    no precision is lost to squaring.  Returns the smallest one (0 when the
    dimensions cannot add up).
    """
    n, ka, kb = qa.rows, qa.cols, qb.cols
    r = n - kb
    if r <= 0:
        return mpmath.mpf(1)
    if ka < r:
        return mpmath.mpf(0)
    full, _ = mpmath.qr(qb, mode="full")
    comp = full[:, kb:n]
    m = qa.T * comp
    sym = mpmath.zeros(ka + r, ka + r)
    for i in range(ka):
        for j in range(r):
            sym[i, ka + j] = m[i, j]
            sym[ka + j, i] = m[i, j]
    ev = sorted(mpmath.eigsy(sym, eigvals_only=True), reverse=True)
    return max(ev[r - 1], mpmath.mpf(0))


def _hp_gap(real, g, h, dps):
    xw = real.weight_x0
    ge = [i for i in range(real.dim) if xw[i] >= -1e-12]
    le = [i for i in range(real.dim) if xw[i] <= 1e-12]
    da = rho_regular_decomposition(real, g, dps=dps)
    db = rho_regular_decomposition(real, h, dps=dps)
    with mpmath.workdps(dps):
        lin = _mp_span_gap(_mp_block(da, ge, False), _mp_block(db, le, False))
        ext = _mp_span_gap(_mp_block(da, ge, True), _mp_block(db, le, True))
        return min(lin, ext)


def transversality_hp(real, g, h, dps=None, refine=REFINE_DIGITS):
    """Whether ``(A_ge(g), A_le(h))`` is transverse, decided in high precision.

    The gap is the smallest singular value of the stacked orthonormal bases,
    for the linear parts in V and for the extended spans in V + R.  Pairs of
    words can be transverse with gaps far below float resolution, so the gap
    is computed twice, the second time with ``refine`` more digits: a true
    degeneracy collapses with the precision, a genuine gap does not.
    Returns ``(transverse, gap)``.
    """
    if dps is None:
        dps = max(required_dps(e.log10_condition()) if isinstance(e, Element) else BASE_DPS
                  for e in (g, h))
    coarse = _hp_gap(real, g, h, dps)
    fine = _hp_gap(real, g, h, dps + refine)
    transverse = fine > 0 and fine >= coarse * mpmath.mpf(10) ** (-(refine // 2))
    return bool(transverse), float(fine)


def space_distance(a, b):
    """Sine of the largest principal angle between the extended spans of a and b."""
    ea, eb = extended_basis(a), extended_basis(b)
    if ea.shape[1] != eb.shape[1]:
        return 1.0
    return float(np.sin(np.max(subspace_angles(ea, eb))))
