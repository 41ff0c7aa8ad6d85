"""Compatible pairs, Schottky families and the empirical calibration of their constants."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import freegroup as fg
from .dynamics import (C_MAX, NotRegular, rho_regular_decomposition, space_distance,
                       transversality, transversality_hp)
from .errors import BudgetExhausted, CertificationFailure, ConditionNotMet
from . import hp
from .realize import LinearPart, Translation, WordElement

DEFAULT_BUDGET = 100
DEFAULT_S_THRESHOLD = 0.01
DEFAULT_SAMPLES = 200
DEFAULT_N_MAX = 64
MAX_PAIR_LENGTH = 6
SLACK = 2.0
REGULAR_SAMPLE_TRIES = 1000
PAIR_C_LIMIT = 100.0


def schottky_pairs(dyn):
    """All ordered pairs (f1, f2) of labels in ``dyn`` that are not mutually inverse.

    ``dyn`` maps labels ``(i, sign)`` to DynamicsData.
    """
    for a in dyn:
        for b in dyn:
            if not fg.cancels(a, b):
                yield a, b


def check_transversality(dyn, c_limit=C_MAX):
    """(ok, worst C, failing pairs) for the attracting/repelling spaces in ``dyn``.

    A pair whose constant reaches ``c_limit`` counts as failing.
    """
    worst, failing = 1.0, []
    for a, b in schottky_pairs(dyn):
        ok, c = transversality(dyn[a].A_ge, dyn[b].A_le)
        worst = max(worst, c)
        if not ok or c >= c_limit:
            failing.append((a, b))
    return not failing, worst, failing


def _decompose_all(real, elements):
    dyn = {}
    for i, g in enumerate(elements):
        dyn[(i, 1)] = rho_regular_decomposition(real, g)
        dyn[(i, -1)] = rho_regular_decomposition(real, g.inverse())
    return dyn


@dataclass
class CompatiblePair:
    g: object
    h: object
    C: float
    retries: int
    power: int
    translation_mode: str
    merit: float = float("nan")


def sample_regular(real, rng, max_power=4, tries=REGULAR_SAMPLE_TRIES):
    """A random rho-regular affine element (a small power of a sample if needed)."""
    for _ in range(tries):
        g = real.sample_element(rng)
        for p in range(1, max_power + 1):
            gp = g if p == 1 else g.power(p)
            try:
                rho_regular_decomposition(real, gp)
                rho_regular_decomposition(real, gp.inverse())
            except NotRegular:
                continue
            return gp, p
    raise BudgetExhausted("sampler produced no rho-regular element", None)


TRANSLATION_MODES = ("conjugate", "independent", "neutral", "neutral-independent")


def neutral_translate(real, element, coords):
    """``element`` with its translation replaced by a vector of its neutral space.

    The new translation is ``phi0 @ coords`` placed in the zero-weight block,
    so the invariant affine subspace passes through the origin and the
    Margulis invariant equals ``coords``.
    """
    lin = LinearPart(element)
    dyn = rho_regular_decomposition(real, lin)
    phi = hp.to_np(dyn.phi0)[:, real.zero_block]
    return Translation(phi @ np.asarray(coords, dtype=float)) @ lin


def build_compatible_pair(real, rng, budget=DEFAULT_BUDGET, translation="conjugate", g=None,
                          c_limit=C_MAX):
    """Find rho-regular g, h with h linearly conjugate to g and all flag pairs transverse.

    Translation modes: ``conjugate`` takes h = phi g phi^-1 for a random affine
    phi; ``independent`` gives h a fresh random translation; ``neutral`` puts
    g's translation in its neutral space and conjugates by a linear phi (so
    M(h) = M(g)); ``neutral-independent`` also gives h its own random
    neutral translation.
    """
    if translation not in TRANSLATION_MODES:
        raise ValueError(f"unknown translation mode {translation!r}")
    if budget <= 0:
        raise BudgetExhausted("retry budget is zero", None)
    z = len(real.zero_block)
    power = 1
    if g is None:
        g, power = sample_regular(real, rng)
        if translation.startswith("neutral"):
            g = neutral_translate(real, g, rng.uniform(-1.0, 1.0, size=z))
    best = None
    for attempt in range(budget):
        phi = real.sample_element(rng)
        if translation.startswith("neutral"):
            phi = LinearPart(phi)
        h = phi @ g @ phi.inverse()
        if translation == "independent":
            h = Translation(rng.uniform(-1.0, 1.0, size=real.dim)) @ LinearPart(h)
        elif translation == "neutral-independent":
            try:
                h = neutral_translate(real, h, rng.uniform(-1.0, 1.0, size=z))
            except NotRegular:
                continue
        try:
            dyn = _decompose_all(real, [g, h])
        except NotRegular:
            continue
        ok, c, _ = check_transversality(dyn, c_limit)
        if ok:
            return CompatiblePair(g, h, c, attempt, power, translation)
        best = c if best is None else min(best, c)
    raise BudgetExhausted(f"no transverse pair within {budget} attempts", best)


def power_for_threshold(real, elements, s_threshold):
    n = 1
    for f in elements:
        for x in (f, f.inverse()):
            s = rho_regular_decomposition(real, x).s_hat
            if s > 0:
                n = max(n, math.ceil(math.log(s_threshold) / math.log(s) - 1e-12))
    return n


def pair_merit(real, pair, s_threshold=DEFAULT_S_THRESHOLD):
    """Largest two-letter additivity defect over the smaller generator invariant.

    Word lengths needed downstream grow linearly with this ratio, so smaller is better.
    """
    n = power_for_threshold(real, [pair.g, pair.h], s_threshold)
    fam = SchottkyFamily(real, [pair.g.power(n), pair.h.power(n)], pair.C, n)
    try:
        defects = measure_defects(fam, calibration_pairs(2, None, 0))
    except CertificationFailure:
        return math.inf
    m = min(np.linalg.norm(fam.margulis([(0, 1)])), np.linalg.norm(fam.margulis([(1, 1)])))
    return max(defects) / m if m > 0 else math.inf


def choose_pair(real, rng, candidates=8, budget=DEFAULT_BUDGET, translation="neutral",
                s_threshold=DEFAULT_S_THRESHOLD, c_limit=PAIR_C_LIMIT):
    """Best of several compatible pairs (C below ``c_limit``) by :func:`pair_merit`."""
    best = None
    for _ in range(candidates):
        try:
            pair = build_compatible_pair(real, rng, budget, translation, c_limit=c_limit)
        except BudgetExhausted:
            continue
        merit = pair_merit(real, pair, s_threshold)
        if best is None or merit < best[0]:
            best = (merit, pair)
    if best is None:
        raise BudgetExhausted("no compatible pair found", None)
    best[1].merit = best[0]
    return best[1]


def pair_is_transverse(real, g, h):
    ok, _, failing = check_transversality(_decompose_all(real, [g, h]))
    return ok, failing


# --------------------------------------------------------------------------- families

@dataclass
class CalibrationData:
    eps_additivity: float
    s_threshold: float
    sample_count: int
    rng_seed: int
    defects: list = field(default_factory=list, repr=False)

    def to_json(self):
        return {"eps_additivity": self.eps_additivity, "s_threshold": self.s_threshold,
                "sample_count": self.sample_count, "rng_seed": self.rng_seed}


class SchottkyFamily:
    """Generators of a Schottky subgroup together with per-word dynamics caches."""

    def __init__(self, real, generators, C, N_used, calibration=None):
        self.real = real
        self.generators = list(generators)
        self.C = C
        self.N_used = N_used
        self.calibration = calibration
        self._dyn = {}

    @property
    def k(self):
        return len(self.generators)

    def element(self, word):
        return WordElement(self.generators, word)

    def dynamics(self, word):
        key = tuple(word)
        if key not in self._dyn:
            self._dyn[key] = rho_regular_decomposition(self.real, self.element(word))
        return self._dyn[key]

    def margulis(self, word):
        return self.dynamics(word).margulis

    def transverse(self, u, v):
        """High-precision test that ``(A_ge(u), A_le(v))`` is transverse; returns (bool, gap)."""
        return transversality_hp(self.real, self.element(u), self.element(v))

    def defect(self, u, v):
        return float(np.linalg.norm(self.margulis(u + v) - self.margulis(u) - self.margulis(v)))

    def letter_dynamics(self):
        return {(i, s): self.dynamics([(i, s)]) for i in range(self.k) for s in (1, -1)}

    def generator_arrays(self):
        out = []
        for g in self.generators:
            f = g.to_float()
            out.append({"linear": f.linear.tolist(), "translation": f.translation.tolist()})
        return out


def calibration_pairs(k, rng, count, max_length=MAX_PAIR_LENGTH):
    """All single-letter pairs, then random pairs (u, v), each cyclically reduced with uv too."""
    letters = [(i, s) for i in range(k) for s in (1, -1)]
    pairs = [([a], [b]) for a in letters for b in letters if not fg.cancels(a, b)]
    while len(pairs) < count:
        total = int(rng.integers(2, max_length + 1))
        lu = int(rng.integers(1, total))
        u = fg.random_cyclically_reduced(rng, k, lu)
        v = fg.random_cyclically_reduced(rng, k, total - lu)
        if fg.is_cyclically_reduced(u + v):
            pairs.append((u, v))
    return pairs


def measure_defects(family, pairs):
    out = []
    for u, v in pairs:
        try:
            out.append(family.defect(u, v))
        except NotRegular as exc:
            raise CertificationFailure(f"word {fg.to_str(u + v)} is not rho-regular: {exc}")
    return out


def select_power_and_calibrate(real, g, h, C, s_threshold=DEFAULT_S_THRESHOLD,
                               sample_count=DEFAULT_SAMPLES, seed=0, n_max=DEFAULT_N_MAX,
                               dominance=None, max_rounds=6):
    """Raise g, h to the smallest common power N meeting the contraction threshold, then calibrate.

    With ``dominance = q`` the power is also raised until both generators have
    Margulis invariants of norm at least ``q * eps_additivity``; since the
    defects stay bounded while invariants grow linearly in N, this terminates.
    """
    base = {}
    for name, f in (("g", g), ("G", g.inverse()), ("h", h), ("H", h.inverse())):
        base[name] = rho_regular_decomposition(real, f)
    n = 1
    for d in base.values():
        if d.s_hat > 0:
            n = max(n, math.ceil(math.log(s_threshold) / math.log(d.s_hat) - 1e-12))
    m_min = min(np.linalg.norm(base["g"].margulis), np.linalg.norm(base["h"].margulis))
    for _ in range(max_rounds):
        if n > n_max:
            raise ConditionNotMet(f"the power needs N = {n} > n_max = {n_max}")
        family = _family_at_power(real, g, h, C, n, s_threshold)
        rng = np.random.default_rng(seed)
        defects = measure_defects(family, calibration_pairs(2, rng, sample_count))
        family.calibration = CalibrationData(max(defects), s_threshold, len(defects), seed, defects)
        if dominance is None:
            return family
        eps = family.calibration.eps_additivity
        need = math.ceil(dominance * eps / m_min) if m_min > 0 else n_max + 1
        if need <= n:
            return family
        n = need
    raise ConditionNotMet("the power did not stabilise")


def _family_at_power(real, g, h, C, n, s_threshold):
    gens = [g.power(n), h.power(n)] if n > 1 else [g, h]
    family = SchottkyFamily(real, gens, C, n)
    for i in range(2):
        for s in (1, -1):
            measured = family.dynamics([(i, s)]).s_hat
            if measured > s_threshold * (1 + 1e-6):
                raise CertificationFailure(f"s_hat {measured:.3g} of a generator exceeds {s_threshold}")
    ok, c, failing = check_transversality(family.letter_dynamics())
    if not ok:
        raise CertificationFailure(f"generator spaces not transverse: {failing}")
    family.C = max(C, c)
    return family


def calibrate(family, sample_count=DEFAULT_SAMPLES, seed=0, s_threshold=DEFAULT_S_THRESHOLD):
    """Additivity calibration for an already assembled family."""
    rng = np.random.default_rng(seed)
    defects = measure_defects(family, calibration_pairs(family.k, rng, sample_count))
    family.calibration = CalibrationData(max(defects), s_threshold, len(defects), seed, defects)
    return family.calibration
