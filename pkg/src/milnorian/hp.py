"""Thin helpers over Arb (python-flint) matrices used as a high-precision backend.

Error radii are dropped after every product (``.mid()``): the engine relies on
choosing enough digits up front, not on interval bounds, and radii would
otherwise blow up along long words.
"""
from fractions import Fraction

import flint
import numpy as np

workdps = flint.ctx.workdps


def arb(x):
    if isinstance(x, Fraction):
        return flint.arb(flint.fmpq(x.numerator, x.denominator))
    return flint.arb(x)


def mat(rows):
    """Arb matrix from a numpy array or nested lists of numbers/Fractions."""
    if isinstance(rows, np.ndarray):
        rows = rows.tolist()
    return flint.arb_mat([[arb(x) for x in row] for row in rows])


def col(vec):
    return flint.arb_mat([[arb(x)] for x in np.asarray(vec, dtype=float).tolist()])


def col_from_strings(digits):
    """Column from decimal strings, as written by :func:`to_strings`."""
    return flint.arb_mat([[flint.arb(x)] for x in digits])


def to_strings(m, digits):
    """Midpoints of a column as decimal strings with ``digits`` significant digits."""
    return [m[i, 0].mid().str(digits, radius=False) for i in range(m.nrows())]


def eye(n):
    return flint.arb_mat(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])


def zeros(n, m):
    return flint.arb_mat(n, m)


def to_np(m):
    return np.array([[float(x) for x in row] for row in m.tolist()], dtype=float)


def mul(a, b):
    return (a * b).mid()


def inv(a):
    return a.solve(eye(a.nrows()), algorithm="approx").mid()


def solve(a, b):
    return a.solve(b, algorithm="approx").mid()


def sub(m, rows, cols):
    out = flint.arb_mat(len(rows), len(cols))
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            out[a, b] = m[i, j]
    return out


def columns(m, cols):
    return sub(m, range(m.nrows()), cols)


def hstack(mats):
    n = mats[0].nrows()
    widths = [x.ncols() for x in mats]
    out = flint.arb_mat(n, sum(widths))
    c0 = 0
    for x, w in zip(mats, widths):
        for i in range(n):
            for j in range(w):
                out[i, c0 + j] = x[i, j]
        c0 += w
    return out


def kernel(a, k):
    """k vectors spanning the numerical kernel of a (Gaussian elimination, full pivoting)."""
    n, m = a.nrows(), a.ncols()
    rows = [[a[i, j] for j in range(m)] for i in range(n)]
    col_perm = list(range(m))
    rank = m - k
    for r in range(rank):
        best, bi, bj = -1.0, r, r
        for i in range(r, n):
            for j in range(r, m):
                v = abs(float(rows[i][j]))
                if v > best:
                    best, bi, bj = v, i, j
        rows[r], rows[bi] = rows[bi], rows[r]
        for row in rows:
            row[r], row[bj] = row[bj], row[r]
        col_perm[r], col_perm[bj] = col_perm[bj], col_perm[r]
        piv = rows[r][r]
        for i in range(n):
            if i != r:
                f = rows[i][r] / piv
                if f != 0:
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
    # free variables are the last k permuted columns
    out = flint.arb_mat(m, k)
    for t in range(k):
        free = rank + t
        out[col_perm[free], t] = 1
        for r in range(rank):
            out[col_perm[r], t] = -(rows[r][free] / rows[r][r])
    return out.mid()


def eig(a):
    """Approximate eigenvalues and right eigenvectors (as columns)."""
    e, r = flint.acb_mat(a).eig(right=True, algorithm="approx")
    return e, r


def eigvals(a):
    return flint.acb_mat(a).eig(algorithm="approx")


def singular_values(a):
    """Singular values from the eigenvalues of a^T a (enough digits are assumed)."""
    e = flint.acb_mat(mul(a.transpose(), a)).eig(algorithm="approx")
    return sorted((abs(x.real) ** 0.5 for x in e), key=float, reverse=True)


class HpAffine:
    """Affine map with Arb linear part and translation column."""

    def __init__(self, linear, translation):
        self.linear = linear
        self.translation = translation

    @property
    def dim(self):
        return self.linear.nrows()

    @classmethod
    def identity(cls, dim):
        return cls(eye(dim), zeros(dim, 1))

    def __matmul__(self, other):
        return HpAffine(mul(self.linear, other.linear),
                        (self.linear * other.translation + self.translation).mid())

    def __call__(self, x):
        return (self.linear * x + self.translation).mid()

    def inverse(self):
        li = inv(self.linear)
        return HpAffine(li, (-(li * self.translation)).mid())

    def power(self, n):
        if n < 0:
            return self.inverse().power(-n)
        result = HpAffine.identity(self.dim)
        base = self
        while n:
            if n & 1:
                result = result @ base
            n >>= 1
            if n:
                base = base @ base
        return result

    def to_float(self):
        from .realize import AffineMap
        return AffineMap(to_np(self.linear), to_np(self.translation).reshape(-1))
