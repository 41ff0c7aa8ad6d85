"""Reduced irreducible root systems and their Weyl groups, in exact arithmetic.

Ambient coordinates follow the usual orthonormal realizations: ``A_n`` sits in
the sum-zero hyperplane of ``Q^(n+1)``, ``B_n``, ``C_n``, ``D_n`` in ``Q^n``,
``E_6``, ``E_7``, ``E_8`` inside ``Q^8``, ``F_4`` in ``Q^4`` and ``G_2`` in the
sum-zero hyperplane of ``Q^3``.  Roots are tuples of Fractions.
"""
import math
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from . import qlinalg as ql
from .errors import InvalidRootSystem, WeylGroupTooLarge

WEYL_ENUMERATION_LIMIT = 10**6

_HALF = Fraction(1, 2)


def _unit(n, i, c=1):
    v = [Fraction(0)] * n
    v[i] = Fraction(c)
    return v


def _diff(n, i, j):
    v = _unit(n, i)
    v[j] -= 1
    return v


def _e8_simple_roots():
    h = _HALF
    roots = [[h, -h, -h, -h, -h, -h, -h, h]]
    roots.append([Fraction(1), Fraction(1)] + [Fraction(0)] * 6)
    for i in range(6):
        roots.append(_diff(8, i + 1, i))
    return roots


def _simple_roots(type_label, rank):
    n = rank
    if type_label == "A":
        return [_diff(n + 1, i, i + 1) for i in range(n)]
    if type_label == "B":
        return [_diff(n, i, i + 1) for i in range(n - 1)] + [_unit(n, n - 1)]
    if type_label == "C":
        return [_diff(n, i, i + 1) for i in range(n - 1)] + [_unit(n, n - 1, 2)]
    if type_label == "D":
        last = _unit(n, n - 2)
        last[n - 1] = Fraction(1)
        return [_diff(n, i, i + 1) for i in range(n - 1)] + [last]
    if type_label == "E":
        return _e8_simple_roots()[:n]
    if type_label == "F":
        h = _HALF
        return [_diff(4, 1, 2), _diff(4, 2, 3), _unit(4, 3), [h, -h, -h, -h]]
    if type_label == "G":
        return [_diff(3, 0, 1), [Fraction(-2), Fraction(1), Fraction(1)]]
    raise InvalidRootSystem(f"unknown type letter {type_label!r}")


_MIN_RANK = {"A": 1, "B": 1, "C": 2, "D": 3}
_EXCEPTIONAL_RANKS = {"E": (6, 7, 8), "F": (4,), "G": (2,)}


def validate_type(type_label, rank):
    if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
        raise InvalidRootSystem(f"rank must be a positive integer, got {rank!r}")
    if type_label in _MIN_RANK:
        if rank < _MIN_RANK[type_label]:
            raise InvalidRootSystem(
                f"{type_label}{rank}: type {type_label} needs rank >= {_MIN_RANK[type_label]}")
    elif type_label in _EXCEPTIONAL_RANKS:
        if rank not in _EXCEPTIONAL_RANKS[type_label]:
            allowed = ", ".join(f"{type_label}{r}" for r in _EXCEPTIONAL_RANKS[type_label])
            raise InvalidRootSystem(f"{type_label}{rank} is not a root system (allowed: {allowed})")
    else:
        raise InvalidRootSystem(f"unknown type letter {type_label!r}; expected one of ABCDEFG")


def parse_type(label):
    """Parse ``"B2"`` into ``("B", 2)``."""
    m = re.fullmatch(r"\s*([A-Ga-g])\s*(\d+)\s*", str(label))
    if not m:
        raise InvalidRootSystem(f"cannot parse root system label {label!r}; expected e.g. 'B2'")
    t, r = m.group(1).upper(), int(m.group(2))
    validate_type(t, r)
    return t, r


def classical_positive_count(type_label, rank):
    n = rank
    return {
        "A": n * (n + 1) // 2,
        "B": n * n,
        "C": n * n,
        "D": n * (n - 1),
        "E": {6: 36, 7: 63, 8: 120}.get(n),
        "F": 24,
        "G": 6,
    }[type_label]


def weyl_group_order(type_label, rank):
    n = rank
    if type_label == "A":
        return math.factorial(n + 1)
    if type_label in "BC":
        return 2**n * math.factorial(n)
    if type_label == "D":
        return 2 ** (n - 1) * math.factorial(n)
    return {("E", 6): 51840, ("E", 7): 2903040, ("E", 8): 696729600,
            ("F", 4): 1152, ("G", 2): 12}[(type_label, n)]


def inner(u, v):
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def reflect(v, alpha):
    c = 2 * inner(v, alpha) / inner(alpha, alpha)
    return tuple(x - c * a for x, a in zip(v, alpha))


def reflection_matrix(alpha):
    n = len(alpha)
    aa = inner(alpha, alpha)
    return tuple(
        tuple(Fraction(int(i == j)) - 2 * alpha[i] * alpha[j] / aa for j in range(n))
        for i in range(n)
    )


@dataclass(frozen=True)
class RootSystem:
    type_label: str
    rank: int
    simple_roots: tuple
    cartan_matrix: tuple
    positive_roots: tuple

    @property
    def label(self):
        return f"{self.type_label}{self.rank}"

    @property
    def ambient_dim(self):
        return len(self.simple_roots[0])

    @cached_property
    def roots(self):
        neg = tuple(tuple(-x for x in r) for r in self.positive_roots)
        return self.positive_roots + neg

    @cached_property
    def simple_coroots(self):
        return tuple(tuple(2 * x / inner(a, a) for x in a) for a in self.simple_roots)

    @cached_property
    def fundamental_weights(self):
        """``omega_i`` with ``<omega_i, alpha_j^vee> = delta_ij``, inside the root span."""
        a_t = [list(map(Fraction, row)) for row in zip(*self.cartan_matrix)]
        coeffs = ql.inverse(a_t)
        n = self.ambient_dim
        out = []
        for row in coeffs:
            w = [Fraction(0)] * n
            for c, alpha in zip(row, self.simple_roots):
                if c:
                    w = [x + c * y for x, y in zip(w, alpha)]
            out.append(tuple(w))
        return tuple(out)

    @cached_property
    def weyl_vector(self):
        n = self.ambient_dim
        s = [Fraction(0)] * n
        for r in self.positive_roots:
            s = [x + y for x, y in zip(s, r)]
        return tuple(x / 2 for x in s)

    @cached_property
    def simple_reflections(self):
        return tuple(reflection_matrix(a) for a in self.simple_roots)

    def simple_coordinates(self, v):
        """Coefficients of ``v`` (assumed in the root span) in the simple-root basis."""
        gram = [[inner(a, b) for b in self.simple_roots] for a in self.simple_roots]
        rhs = [[inner(v, a)] for a in self.simple_roots]
        return tuple(row[0] for row in ql.solve(gram, rhs))

    def dynkin_labels(self, v):
        return tuple(inner(v, c) for c in self.simple_coroots)

    def from_dynkin(self, labels):
        n = self.ambient_dim
        w = [Fraction(0)] * n
        for c, om in zip(labels, self.fundamental_weights):
            if c:
                w = [x + c * y for x, y in zip(w, om)]
        return tuple(w)

    def is_dominant(self, v, strict=False):
        vals = [inner(v, a) for a in self.simple_roots]
        return all(x > 0 for x in vals) if strict else all(x >= 0 for x in vals)

    def weyl_group_order(self):
        return weyl_group_order(self.type_label, self.rank)


def _cartan(simple):
    return tuple(
        tuple(int(2 * inner(a, b) / inner(a, a)) for b in simple) for a in simple
    )


def build_root_system(type_label, rank=None):
    """Root system of the given type, positive roots by reflection closure.

    ``build_root_system("B", 2)`` and ``build_root_system("B2")`` are equivalent.
    """
    if rank is None:
        type_label, rank = parse_type(type_label)
    else:
        type_label = str(type_label).upper()
        validate_type(type_label, rank)
    simple = [tuple(r) for r in _simple_roots(type_label, rank)]
    cartan = _cartan(simple)

    seen = set(simple)
    queue = deque(simple)
    while queue:
        r = queue.popleft()
        for a in simple:
            s = reflect(r, a)
            if s not in seen:
                seen.add(s)
                queue.append(s)

    # height functional: positive on exactly the positive roots
    tmp = RootSystem(type_label, rank, tuple(simple), cartan, ())
    coweight_sum = [Fraction(0)] * len(simple[0])
    gram = [[inner(a, b) for b in simple] for a in simple]
    # v with <alpha_i, v> = 1 for every simple root, inside the root span
    coeffs = ql.solve(gram, [[Fraction(1)] for _ in simple])
    for c, a in zip((row[0] for row in coeffs), simple):
        coweight_sum = [x + c * y for x, y in zip(coweight_sum, a)]
    positive = sorted(
        (r for r in seen if inner(r, coweight_sum) > 0),
        key=lambda r: (inner(r, coweight_sum), tuple(-x for x in tmp.simple_coordinates(r))),
    )
    rs = RootSystem(type_label, rank, tuple(simple), cartan, tuple(positive))
    if len(positive) != classical_positive_count(type_label, rank) or len(seen) != 2 * len(positive):
        raise AssertionError(f"reflection closure produced {len(positive)} positive roots for {rs.label}")
    return rs


# --------------------------------------------------------------------------- Weyl group

def _word_matrix(rs, word):
    n = rs.ambient_dim
    m = ql.identity(n)
    for i in word:
        m = ql.matmul(m, [list(r) for r in rs.simple_reflections[i]])
    return tuple(tuple(row) for row in m)


@dataclass(frozen=True)
class WeylElement:
    """A Weyl group element stored by a reduced word in the simple reflections.

    The word is read as a product left to right, so ``(0, 1)`` is ``s_0 s_1``.
    """
    rs: RootSystem
    word: tuple

    @cached_property
    def matrix(self):
        return _word_matrix(self.rs, self.word)

    def __len__(self):
        return len(self.word)

    def apply(self, v):
        for i in reversed(self.word):
            v = reflect(v, self.rs.simple_roots[i])
        return tuple(v)

    def inversion_count(self):
        neg = set(tuple(-x for x in r) for r in self.rs.positive_roots)
        return sum(1 for r in self.rs.positive_roots if self.apply(r) in neg)

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.rs == other.rs and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)


def identity_element(rs):
    return WeylElement(rs, ())


def longest_element(rs, prefer="lowest"):
    """The longest element ``w0``.

    Walks the Weyl vector to the antidominant chamber, at every step reflecting
    in a simple root still positive on the current vector; ``prefer`` picks the
    lowest or highest such index, which yields two (generally different)
    reduced words.
    """
    v = rs.weyl_vector
    applied = []
    order = range(rs.rank) if prefer == "lowest" else range(rs.rank - 1, -1, -1)
    while True:
        i = next((i for i in order if inner(v, rs.simple_roots[i]) > 0), None)
        if i is None:
            break
        v = reflect(v, rs.simple_roots[i])
        applied.append(i)
    w0 = WeylElement(rs, tuple(reversed(applied)))
    if len(w0.word) != len(rs.positive_roots):
        raise AssertionError("longest element has the wrong length")
    return w0


def enumerate_weyl_group(rs, limit=WEYL_ENUMERATION_LIMIT):
    """All elements of ``W`` by breadth-first search over reduced words.

    Elements are identified through the image of the Weyl vector, on which
    ``W`` acts simply transitively.
    """
    order = rs.weyl_group_order()
    if order > limit:
        raise WeylGroupTooLarge(order, limit)
    rho = rs.weyl_vector
    seen = {rho: ()}
    queue = deque([rho])
    while queue:
        v = queue.popleft()
        word = seen[v]
        for i, a in enumerate(rs.simple_roots):
            u = reflect(v, a)
            if u not in seen:
                seen[u] = (i,) + word
                queue.append(u)
    if len(seen) != order:
        raise AssertionError(f"enumerated {len(seen)} Weyl elements, expected {order}")
    return [WeylElement(rs, w) for w in seen.values()]


def minus_w0_fixed_subspace(rs):
    """Rational basis of ``{X : -w0 X = X}``."""
    m = longest_element(rs).matrix
    n = rs.ambient_dim
    # -w0 X = X  <=>  (w0 + I) X = 0
    system = [[m[i][j] + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    return [tuple(v) for v in ql.nullspace(system)]


@dataclass(frozen=True)
class DominantVector:
    rs: RootSystem
    coords: tuple
    strict: bool = False

    def __post_init__(self):
        coords = tuple(Fraction(x) for x in self.coords)
        object.__setattr__(self, "coords", coords)
        if len(coords) != self.rs.ambient_dim:
            raise ValueError("coordinate vector has the wrong length")
        if not self.rs.is_dominant(coords, strict=self.strict):
            kind = "strictly dominant" if self.strict else "dominant"
            raise ValueError(f"{coords} is not {kind} for {self.rs.label}")


def weyl_weak_stabilizer_check(rs, w, X):
    """Whether ``w`` maps the roots positive on X into the roots nonnegative on X.
    For dominant X this happens exactly when ``w`` fixes X; the
    By the weak-stabilizer lemma this happens exactly when ``w`` fixes X; the
    coincidence is asserted on every call.
    """
    x = X.coords if isinstance(X, DominantVector) else tuple(map(Fraction, X))
    positive_on_x = [r for r in rs.roots if inner(r, x) > 0]
    weak = all(inner(w.apply(r), x) >= 0 for r in positive_on_x)
    fixes = w.apply(x) == x
    if weak != fixes:
        raise AssertionError(f"weak-stabilizer property violated for word {w.word} at X={x}")
    return weak


def stabilizer_intersection(rs, X, limit=WEYL_ENUMERATION_LIMIT):
    """``W_X``, computed directly and as an intersection of fundamental-weight stabilizers."""
    x = X.coords if isinstance(X, DominantVector) else tuple(map(Fraction, X))
    group = enumerate_weyl_group(rs, limit)
    direct = frozenset(w for w in group if w.apply(x) == x)
    moving = [i for i, a in enumerate(rs.simple_roots) if inner(a, x) != 0]
    via_weights = frozenset(
        w for w in group
        if all(w.apply(rs.fundamental_weights[i]) == rs.fundamental_weights[i] for i in moving)
    )
    if direct != via_weights:
        raise AssertionError("stabilizer of X differs from the intersection of fundamental-weight stabilizers")
    return direct
