"""Small exact linear algebra kernel over the rationals.

Matrices are lists of rows of :class:`fractions.Fraction`.  Everything here is
dense and meant for the modest sizes the rest of the package produces.
"""
from fractions import Fraction


def frac_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def zeros(n, m=None):
    m = n if m is None else m
    return [[Fraction(0)] * m for _ in range(n)]


def identity(n):
    out = zeros(n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def matmul(a, b):
    if not a:
        return []
    bt = transpose(b)
    out = []
    for row in a:
        nz = [(k, x) for k, x in enumerate(row) if x]
        out.append([sum((x * col[k] for k, x in nz), Fraction(0)) for col in bt])
    return out


def matvec(a, v):
    return [sum((x * v[k] for k, x in enumerate(row) if x), Fraction(0)) for row in a]


def add(a, b, scale=1):
    return [[x + scale * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(a, c):
    return [[c * x for x in row] for row in a]


def commutator(a, b):
    return add(matmul(a, b), matmul(b, a), scale=-1)


def is_zero(a):
    return all(x == 0 for row in a for x in row)


def rref(a):
    """Reduced row echelon form.  Returns ``(rows, pivot_columns)``."""
    m = [list(row) for row in a]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(a):
    return len(rref(a)[1]) if a else 0


def nullspace(a, ncols=None):
    """Basis of ``{x : a x = 0}`` as a list of vectors."""
    if not a:
        n = ncols or 0
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    n = len(a[0])
    rows, pivots = rref(a)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def independent_rows(a):
    """Indices of a maximal linearly independent subset of rows, greedy in order."""
    chosen = []
    basis = []  # echelon rows with their pivot columns
    for idx, row in enumerate(a):
        v = list(row)
        for piv, brow in basis:
            if v[piv] != 0:
                f = v[piv] / brow[piv]
                v = [x - f * y for x, y in zip(v, brow)]
        piv = next((c for c, x in enumerate(v) if x != 0), None)
        if piv is not None:
            basis.append((piv, v))
            chosen.append(idx)
    return chosen


def solve(a, b):
    """Solve ``a x = b`` (b a matrix of right-hand sides); raises if inconsistent.

    Returns one solution with free variables set to zero.
    """
    n = len(a[0])
    aug = [list(ra) + list(rb) for ra, rb in zip(a, b)]
    rows, pivots = rref(aug)
    if any(p >= n for p in pivots):
        raise ValueError("inconsistent linear system")
    k = len(b[0])
    x = zeros(n, k)
    for row, p in zip(rows, pivots):
        x[p] = row[n:]
    return x


def inverse(a):
    n = len(a)
    x = solve(a, identity(n))
    if rank(a) != n:
        raise ValueError("singular matrix")
    return x


def dot(u, v):
    return sum((x * y for x, y in zip(u, v)), Fraction(0))
