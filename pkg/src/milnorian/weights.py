"""Weight systems of irreducible highest-weight modules.

Multiplicities come from Freudenthal's recursion run on integer Dynkin labels,
and are checked against the Weyl dimension formula.
"""
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import ConditionNotMet, DimensionCapExceeded, InternalConsistencyError
from .rootsys import DominantVector, inner, minus_w0_fixed_subspace

WEIGHT_SYSTEM_CAP = 10**5


@dataclass(frozen=True)
class HighestWeight:
    rs: object
    fw_coords: tuple

    def __post_init__(self):
        coords = tuple(self.fw_coords)
        if len(coords) != self.rs.rank:
            raise ValueError(f"{self.rs.label} needs {self.rs.rank} weight coordinates, got {len(coords)}")
        if any(not isinstance(c, int) or isinstance(c, bool) for c in coords):
            raise ValueError(f"highest weight coordinates must be integers: {coords}")
        if any(c < 0 for c in coords):
            raise ValueError(f"highest weight {coords} is not dominant")
        object.__setattr__(self, "fw_coords", coords)

    @property
    def ambient(self):
        return self.rs.from_dynkin(self.fw_coords)


def weyl_dimension(rs, fw_coords):
    lam = rs.from_dynkin(fw_coords)
    rho = rs.weyl_vector
    shifted = tuple(x + y for x, y in zip(lam, rho))
    num = Fraction(1)
    for a in rs.positive_roots:
        num *= inner(shifted, a) / inner(rho, a)
    if num.denominator != 1:
        raise InternalConsistencyError("Weyl dimension formula gave a non-integer")
    return int(num)


@dataclass(frozen=True)
class WeightSystem:
    rs: object
    highest: tuple
    dynkin_multiplicities: dict  # Dynkin label tuple -> multiplicity
    total_dim: int

    @cached_property
    def entries(self):
        """Ambient rational weight vector -> multiplicity."""
        return {self.rs.from_dynkin(k): m for k, m in self.dynkin_multiplicities.items()}

    def multiplicity(self, weight):
        return self.entries.get(tuple(Fraction(x) for x in weight), 0)

    def nonzero_weights(self):
        zero = tuple(Fraction(0) for _ in range(self.rs.ambient_dim))
        return sorted(w for w in self.entries if w != zero)

    @property
    def zero_weight_dim(self):
        return self.dynkin_multiplicities.get(tuple([0] * self.rs.rank), 0)


def _int_gram(rs):
    om = rs.fundamental_weights
    gram = [[inner(a, b) for b in om] for a in om]
    den = 1
    for row in gram:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    return [[int(x * den) for x in row] for row in gram]


def weight_system(hw, cap=WEIGHT_SYSTEM_CAP):
    rs = hw.rs
    lam = hw.fw_coords
    dim = weyl_dimension(rs, lam)
    if dim > cap:
        raise DimensionCapExceeded(dim, cap, "weight system")

    r = rs.rank
    gram = _int_gram(rs)

    def form(u, v):
        return sum(u[i] * gram[i][j] * v[j] for i in range(r) for j in range(r) if u[i] and v[j])

    pos = [tuple(int(x) for x in rs.dynkin_labels(a)) for a in rs.positive_roots]
    heights = [sum(rs.simple_coordinates(a)) for a in rs.positive_roots]
    simple = [tuple(rs.cartan_matrix[i][j] for i in range(r)) for j in range(r)]

    lam_rho = tuple(x + 1 for x in lam)
    top = form(lam_rho, lam_rho)
    mult = {lam: 1}
    level_of = {lam: 0}
    frontier = [lam]
    level = 0
    while frontier:
        level += 1
        candidates = sorted({tuple(m - s for m, s in zip(mu, a)) for mu in frontier for a in simple})
        nxt = []
        for mu in candidates:
            total = 0
            for a, ht in zip(pos, heights):
                k = 1
                while k * ht <= level:
                    nu = tuple(x + k * y for x, y in zip(mu, a))
                    m = mult.get(nu)
                    if m:
                        total += m * form(nu, a)
                    k += 1
            mr = tuple(x + 1 for x in mu)
            den = top - form(mr, mr)
            if den == 0:
                if total != 0:
                    raise InternalConsistencyError(f"Freudenthal recursion inconsistent at {mu}")
                continue
            q, rem = divmod(2 * total, den)
            if rem:
                raise InternalConsistencyError(f"non-integral multiplicity at {mu}")
            if q > 0:
                mult[mu] = q
                level_of[mu] = level
                nxt.append(mu)
        frontier = nxt
    total_dim = sum(mult.values())
    if total_dim != dim:
        raise InternalConsistencyError(
            f"Freudenthal total {total_dim} differs from Weyl dimension {dim}")
    return WeightSystem(rs, lam, mult, total_dim)


def has_zero_weight(ws):
    return ws.zero_weight_dim > 0


def _vanishes_on(weight, basis):
    return all(inner(weight, f) == 0 for f in basis)


def _integral(v):
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return tuple(int(x * den) for x in v)


def _primitive(v):
    g = 0
    for x in v:
        g = math.gcd(g, x)
    return tuple(x // g for x in v) if g else v


def _search_x0(ws, basis):
    rs = ws.rs
    weights = ws.nonzero_weights()
    start = _integral(tuple(2 * x for x in rs.weyl_vector))
    fb = [_integral(f) for f in basis]

    def good(x):
        xf = tuple(Fraction(c) for c in x)
        return rs.is_dominant(xf, strict=True) and all(inner(w, xf) != 0 for w in weights)

    if good(start):
        return _primitive(start)
    for radius in itertools.count(1):
        for m in range(1, 4 * radius + 2):
            box = itertools.product(range(-radius, radius + 1), repeat=len(fb))
            for c in sorted(box, key=lambda c: (sum(abs(t) for t in c), c)):
                x = tuple(m * s + sum(ci * f[j] for ci, f in zip(c, fb)) for j, s in enumerate(start))
                if good(x):
                    return _primitive(x)


def condition_iii_check(ws):
    """Whether some ``(-w0)``-fixed X is nonzero on every nonzero weight.

    Returns ``(True, X0)`` with an integral, strictly dominant, ``(-w0)``-fixed X0
    or ``(False, weight)`` with a nonzero weight vanishing on the fixed subspace.
    """
    basis = minus_w0_fixed_subspace(ws.rs)
    for w in ws.nonzero_weights():
        if _vanishes_on(w, basis):
            return False, w
    return True, tuple(Fraction(c) for c in _search_x0(ws, basis))


def x0_candidate(ws):
    ok, witness = condition_iii_check(ws)
    if not ok:
        raise ConditionNotMet(f"weight {witness} vanishes on the (-w0)-fixed subspace; no valid X0")
    return DominantVector(ws.rs, witness, strict=True)
