"""Words with bounded Margulis invariants, and the non-properness witness.

Two routes produce infinitely many words whose invariants stay bounded: when
the invariants of the family are collinear, ``g^n h^(-floor(c n))`` does; in
general a greedy descent in the coordinates given by a basis of invariants
extends any prefix until the invariant falls inside a fixed ball.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import freegroup as fg
from . import hp
from .dynamics import NotRegular, required_dps, rho_regular_decomposition, transversality
from .errors import (BelowDescentThreshold, BudgetExhausted, CertificationFailure,
                     ConditionNotMet, DegenerateInvariant, NotCollinear)
from .realize import Power, WordElement
from .schottky import SLACK, SchottkyFamily, calibrate

DEGENERATE_TOL = 1e-9
COLLINEAR_TOL = 1e-6
INDEPENDENCE_TOL = 1e-8
DEFAULT_POOL = 40
DEFAULT_STEP_BUDGET = 200


def descent_threshold(k):
    """Norm above which one greedy step is guaranteed to shrink a vector in R^k."""
    return math.sqrt(k) * (3 + math.sqrt(3) / (2 * math.sqrt(k)))


@dataclass
class WordTrace:
    letters: list
    margulis_history: list
    final_margulis: np.ndarray
    cyclically_reduced: bool
    bound_R: float
    prefix: list = field(default_factory=list)
    decrements: list = field(default_factory=list)
    defects: list = field(default_factory=list)
    s_hat: float = float("nan")

    @property
    def word(self):
        return fg.to_str(self.letters)

    def to_json(self):
        return {"word": self.word, "prefix": fg.to_str(self.prefix),
                "length": len(self.letters),
                "margulis_history": [list(map(float, m)) for m in self.margulis_history],
                "final_margulis": list(map(float, self.final_margulis)),
                "cyclically_reduced": self.cyclically_reduced, "bound_R": self.bound_R,
                "decrements": list(self.decrements), "defects": list(self.defects),
                "s_hat": self.s_hat}


# --------------------------------------------------------------------------- vector step

def vector_norm_step(alpha, x):
    """One step of the greedy descent in R^k.

    Picks the largest coordinate ``c_i`` (lowest index on ties) with sign
    sigma, and among the other indices the one with the largest ``|c_j|``
    (again lowest index on ties) with sign tau (+1 when ``c_j = 0``).
    Returns ``(beta, alpha - beta)`` for ``beta = sigma e_i + x tau e_j``.

    Taking j as the runner-up matters for x = 2: since |beta|^2 = 1 + x^2,
    a choice with c_j = 0 can fall short of the 1/(2 sqrt k) decrement once
    k >= 4, while the runner-up always clears it above the threshold.
    """
    alpha = np.asarray(alpha, dtype=float)
    k = len(alpha)
    if k < 2:
        raise ValueError("the descent step needs at least two coordinates")
    if x not in (0, 1, 2):
        raise ValueError("x must be 0, 1 or 2")
    norm = float(np.linalg.norm(alpha))
    if norm < descent_threshold(k):
        raise BelowDescentThreshold(f"|alpha| = {norm:.6g} is below {descent_threshold(k):.6g}")
    i, sigma, j, tau = step_indices(alpha)
    beta = np.zeros(k)
    beta[i] = sigma
    beta[j] += x * tau
    new = alpha - beta
    if np.linalg.norm(new) > norm - 1 / (2 * math.sqrt(k)) + 1e-12 * max(1.0, norm):
        raise CertificationFailure("descent inequality violated")
    return beta, new


def step_indices(alpha):
    """(i, sigma, j, tau) used by :func:`vector_norm_step`."""
    mags = np.abs(np.asarray(alpha, dtype=float))
    i = int(np.argmax(mags))
    sigma = 1 if alpha[i] >= 0 else -1
    rest = mags.copy()
    rest[i] = -1.0
    j = int(np.argmax(rest))
    tau = 1 if alpha[j] >= 0 else -1
    return i, sigma, j, tau


# --------------------------------------------------------------------------- collinear path

def collinearity_ratio(mg, mh):
    """c with M(g) = c M(h), or an error when that is not (numerically) the case."""
    nh = float(np.linalg.norm(mh))
    if nh < DEGENERATE_TOL:
        raise DegenerateInvariant(f"|M(h)| = {nh:.3g} is too small")
    c = float(np.dot(mg, mh)) / nh ** 2
    resid = float(np.linalg.norm(np.asarray(mg) - c * np.asarray(mh)))
    if resid > COLLINEAR_TOL * max(nh, float(np.linalg.norm(mg))):
        raise NotCollinear("Margulis invariants are not collinear; use the basis construction")
    if abs(c - round(c)) < 1e-9:
        c = float(round(c))
    return c


def collinear_sequence(family, calibration=None, n_max=50, g_word=((0, 1),), h_word=((1, 1),),
                       slack=SLACK, strict=True):
    """Words ``g^n h^(-floor(c n))`` for n = 1..n_max with their measured invariants."""
    calibration = calibration or family.calibration
    g_word, h_word = list(g_word), list(h_word)
    mg, mh = family.margulis(g_word), family.margulis(h_word)
    c = collinearity_ratio(mg, mh)
    bound = float(np.linalg.norm(mh)) + slack * calibration.eps_additivity
    traces, bad = [], []
    for n in range(1, n_max + 1):
        m = math.floor(c * n)
        letters = fg.reduce(fg.power(g_word, n) + fg.power(h_word, -m))
        dyn = family.dynamics(letters)
        mw = dyn.margulis
        trace = WordTrace(letters, [mw], mw, fg.is_cyclically_reduced(letters), bound,
                          s_hat=dyn.s_hat)
        trace.defects.append(float(np.linalg.norm(mw - n * mg + m * mh)))
        traces.append(trace)
        if np.linalg.norm(mw) > bound:
            bad.append(n)
    if bad and strict:
        raise CertificationFailure(f"collinear words exceed the bound {bound:.6g} at n = {bad}")
    return traces


# --------------------------------------------------------------------------- Gamma''

@dataclass
class GammaPrimePrime:
    basis_elements: list          # words in the base family
    phi: np.ndarray               # k x z, phi @ M(g_i) = e_i
    N_prime: int
    family: SchottkyFamily        # generators gamma_i = g_i^N'
    C_prime: float
    k: int
    base: SchottkyFamily = None
    history: list = field(default_factory=list)

    @property
    def threshold(self):
        return descent_threshold(self.k) * self.N_prime

    @property
    def phi_norm(self):
        return float(np.linalg.norm(self.phi, 2))

    @property
    def phi_inv_norm(self):
        """Norm of the inverse map from coordinates back to invariants."""
        return float(np.linalg.norm(np.linalg.pinv(self.phi), 2))

    @property
    def R(self):
        return self.phi_inv_norm * self.threshold

    def coords(self, m):
        return self.phi @ np.asarray(m, dtype=float)

    def to_json(self):
        return {"basis_elements": [fg.to_str(w) for w in self.basis_elements],
                "phi": self.phi.tolist(), "N_prime": self.N_prime, "k": self.k,
                "C_prime": self.C_prime, "R": self.R, "threshold": self.threshold,
                "eps_additivity": self.family.calibration.eps_additivity,
                "history": self.history}


def word_pool(k, rng, size, max_length=3):
    """Single letters followed by distinct random cyclically reduced words."""
    pool = [[(i, s)] for i in range(k) for s in (1, -1)]
    seen = {tuple(w) for w in pool}
    tries = 0
    while len(pool) < size and tries < 100 * size:
        tries += 1
        w = fg.random_cyclically_reduced(rng, k, int(rng.integers(2, max_length + 1)))
        if tuple(w) not in seen:
            seen.add(tuple(w))
            pool.append(w)
    return pool


def select_basis(invariants, tol=INDEPENDENCE_TOL):
    """Greedy volume maximisation: indices of a maximal independent subset."""
    vecs = [np.asarray(m, dtype=float) for m in invariants]
    scale = max((np.linalg.norm(v) for v in vecs), default=0.0)
    chosen, q = [], []
    while True:
        best, best_i = 0.0, None
        for i, v in enumerate(vecs):
            if i in chosen:
                continue
            r = v - sum((np.dot(v, b) * b for b in q), np.zeros_like(v))
            nr = np.linalg.norm(r)
            if nr > best:
                best, best_i = nr, i
        if best_i is None or best <= tol * max(scale, 1e-300):
            return chosen
        r = vecs[best_i] - sum((np.dot(vecs[best_i], b) * b for b in q), np.zeros_like(vecs[best_i]))
        q.append(r / np.linalg.norm(r))
        chosen.append(best_i)


def build_gamma_double_prime(family, pool=None, pool_size=DEFAULT_POOL, seed=0,
                             sample_count=None, n_max=64, eps_override=None, max_rounds=8):
    """Assemble the subgroup generated by powers of words with independent invariants."""
    rng = np.random.default_rng(seed)
    pool = pool if pool is not None else word_pool(family.k, rng, pool_size)
    invariants, usable = [], []
    for w in pool:
        if not fg.is_cyclically_reduced(w):
            continue
        try:
            invariants.append(family.margulis(w))
        except NotRegular:
            continue
        usable.append(w)
    chosen = select_basis(invariants)
    k = len(chosen)
    if k < 2:
        raise DegenerateInvariant(f"pool spans only a {k}-dimensional space of invariants")
    words = [usable[i] for i in chosen]
    mmat = np.column_stack([invariants[i] for i in chosen])
    phi = np.linalg.pinv(mmat)

    # transversality of the (2k)^2 - 2k pairs
    dyn = {(i, s): family.dynamics(words[i] if s > 0 else fg.inverse(words[i]))
           for i in range(k) for s in (1, -1)}
    c_prime = 1.0
    for a in dyn:
        for b in dyn:
            if fg.cancels(a, b):
                continue
            ok, c = transversality(dyn[a].A_ge, dyn[b].A_le)
            if not ok:
                raise CertificationFailure(f"basis words {a}, {b} have non-transverse spaces")
            c_prime = max(c_prime, c)

    s_thr = family.calibration.s_threshold
    n_s = 1
    for d in dyn.values():
        if d.s_hat > 0:
            n_s = max(n_s, math.ceil(math.log(s_thr) / math.log(d.s_hat) - 1e-12))
    sample_count = sample_count or family.calibration.sample_count
    phi_norm = float(np.linalg.norm(phi, 2))
    n_prime, history = n_s, []
    for _ in range(max_rounds):
        if n_prime > n_max:
            raise ConditionNotMet(f"N' = {n_prime} exceeds n_max = {n_max}")
        gens = [Power(WordElement(family.generators, w), n_prime) for w in words]
        sub = SchottkyFamily(family.real, gens, c_prime, n_prime)
        if eps_override is not None:
            from .schottky import CalibrationData
            sub.calibration = CalibrationData(float(eps_override), s_thr, 0, seed)
        else:
            calibrate(sub, sample_count=sample_count, seed=seed + 1, s_threshold=s_thr)
        eps = sub.calibration.eps_additivity
        need = max(n_s, math.ceil(12 * math.sqrt(k) * phi_norm * eps))
        history.append({"N_prime": n_prime, "eps_additivity": eps, "required": need})
        if need <= n_prime:
            return GammaPrimePrime(words, phi, n_prime, sub, c_prime, k, family, history)
        n_prime = need
    raise ConditionNotMet("N' did not stabilise")


# --------------------------------------------------------------------------- greedy words

def greedy_bounded_words(gpp, prefix=None, budget=DEFAULT_STEP_BUDGET, seed=0, slack=SLACK,
                         strict=True):
    """Extend ``prefix`` until its invariant is inside the stopping shell.

    Every appended block is ``l1 gamma_i^-sigma l2`` with padding letters
    ``gamma_j^-tau`` placed exactly where cancellation could otherwise occur,
    so every intermediate word stays cyclically reduced.
    """
    fam = gpp.family
    k, n_prime = gpp.k, gpp.N_prime
    if prefix is None or len(prefix) == 0:
        rng = np.random.default_rng(seed)
        prefix = [(int(rng.integers(k)), int(rng.choice([-1, 1])))]
    w = list(prefix)
    if not fg.is_cyclically_reduced(w):
        raise ValueError(f"prefix {fg.to_str(w)} is not cyclically reduced")
    eps = fam.calibration.eps_additivity
    required = n_prime / (4 * math.sqrt(k)) - slack * eps
    m = fam.margulis(w)
    trace = WordTrace(list(w), [m], m, True, gpp.R, prefix=list(prefix))
    steps = 0
    while np.linalg.norm(gpp.coords(m)) >= gpp.threshold:
        if steps >= budget:
            raise BudgetExhausted(f"descent budget {budget} exhausted for prefix {fg.to_str(prefix)}",
                                  float(np.linalg.norm(gpp.coords(m))))
        alpha = gpp.coords(m) / n_prime
        i, sigma, j, tau = step_indices(alpha)
        target = (i, sigma)
        pad = (j, -tau)
        l1 = [pad] if w[-1] == target else []
        l2 = [pad] if w[0] == target else []
        u = l1 + [(i, -sigma)] + l2
        vector_norm_step(alpha, len(l1) + len(l2))   # certifies the exact inequality
        new_w = w + u
        if not fg.is_cyclically_reduced(new_w):
            raise CertificationFailure(f"extension produced a non-reduced word {fg.to_str(new_w)}")
        new_m = fam.margulis(new_w)
        dec = float(np.linalg.norm(gpp.coords(m)) - np.linalg.norm(gpp.coords(new_m)))
        trace.decrements.append(dec)
        trace.defects.append(float(np.linalg.norm(new_m - m - fam.margulis(u))))
        if dec < required and strict:
            raise CertificationFailure(
                f"decrement {dec:.6g} below the envelope {required:.6g} at step {steps + 1}")
        w, m = new_w, new_m
        trace.margulis_history.append(m)
        steps += 1
    trace.letters = w
    trace.final_margulis = m
    trace.cyclically_reduced = fg.is_cyclically_reduced(w)
    trace.s_hat = fam.dynamics(w).s_hat
    return trace


# --------------------------------------------------------------------------- witness

@dataclass
class WitnessReport:
    radius: float
    R: float
    C_prime: float
    successes: int
    inconclusive: int
    failures: int
    per_gamma: list
    note: str = ("C_prime is the measured principal-angle constant; the radius uses it in place "
                 "of the exact non-degeneracy constant")

    @property
    def certified(self):
        return self.failures == 0 and self.inconclusive == 0 and self.successes > 0

    def to_json(self):
        return {"radius": self.radius, "R": self.R, "C_prime": self.C_prime,
                "successes": self.successes, "inconclusive": self.inconclusive,
                "failures": self.failures, "certified": self.certified,
                "note": self.note, "per_gamma": self.per_gamma}


def witness_radius(C_prime, R):
    return math.sqrt((2 * C_prime) ** 2 * (R ** 2 + 1) - 1)


def _subgradient(f_and_grad, x0, rng, restarts=5, iters=10_000, scale=1.0):
    """Minimise a convex max-of-norms objective by subgradient descent with step 1/t."""
    best_x, best_f = np.array(x0, dtype=float), f_and_grad(x0)[0]
    starts = [best_x] + [best_x + scale * rng.normal(size=best_x.shape) for _ in range(restarts - 1)]
    for x in starts:
        x = np.array(x, dtype=float)
        step0 = max(scale, 1e-3)
        for t in range(1, iters + 1):
            f, g = f_and_grad(x)
            if f < best_f:
                best_f, best_x = f, x.copy()
            ng = np.linalg.norm(g)
            if ng == 0:
                break
            x = x - (step0 / t) * g / ng
    return best_x, best_f


def _max_norm_objective(a, b):
    """f(s) = max(|a0 + A s|, |b0 + B s|) with a subgradient, for a = (a0, A), b = (b0, B)."""
    a0, am = a
    b0, bm = b

    def fg_(s):
        ra, rb = a0 + am @ s, b0 + bm @ s
        na, nb = np.linalg.norm(ra), np.linalg.norm(rb)
        if na >= nb:
            return na, (am.T @ ra) / max(na, 1e-300)
        return nb, (bm.T @ rb) / max(nb, 1e-300)
    return fg_


def _hp_objective(element, x_hp, dps):
    with hp.workdps(dps):
        gx = element.hp(dps)(x_hp)
        nx = sum((x_hp[i, 0] ** 2 for i in range(x_hp.nrows())), hp.arb(0)).sqrt()
        ngx = sum((gx[i, 0] ** 2 for i in range(gx.nrows())), hp.arb(0)).sqrt()
        return max(float(nx), float(ngx))


def solve_witness(real, element, radius, seed=0, restarts=5, iters=10_000):
    """Look for x with ``max(|x|, |gamma x|) <= radius`` around the origin of the chart.

    For a rho-regular gamma the search runs on its invariant affine subspace,
    where gamma is the translation by its Margulis invariant; this keeps the
    problem well conditioned however long the word is.  Any success is
    re-evaluated in high precision at the returned point, which is also
    given to full precision as decimal strings (``x_digits``).  ``lower_bound`` is
    a certified lower bound on the objective over all of V.
    """
    rng = np.random.default_rng(seed)
    try:
        dyn = rho_regular_decomposition(real, element)
    except NotRegular:
        dyn = None
    if dyn is not None:
        zero = real.zero_block
        phi = hp.to_np(dyn.phi0)[:, zero]
        c = hp.to_np(dyn.center).reshape(-1)
        m = dyn.margulis
        f = _max_norm_objective((c, phi), (c + phi @ m, phi))
        s0 = -m / 2 - np.linalg.lstsq(phi, c, rcond=None)[0]
        s, val = _subgradient(f, s0, rng, restarts, iters, scale=max(1.0, float(np.linalg.norm(m))))
        dps = required_dps(element.log10_condition())
        with hp.workdps(dps):
            x_hp = (dyn.center + dyn.phi0 * _embed(s, zero, real.dim)).mid()
            # the point is handed out as decimal strings and checked exactly as handed out
            x_digits = hp.to_strings(x_hp, dps)
            x_hp = hp.col_from_strings(x_digits)
        verified = _hp_objective(element, x_hp, dps)
        x = hp.to_np(x_hp).reshape(-1)
        # gamma x - x has canonized zero-block component M for every x
        canon, _ = dyn.canonizer()
        lower = float(np.linalg.norm(m)) / (2 * np.linalg.norm(np.linalg.inv(canon), 2))
    else:
        fl = element.to_float()
        lin, v = fl.linear, fl.translation
        d = real.dim
        x0 = np.linalg.lstsq(np.vstack([np.eye(d), lin]), np.concatenate([np.zeros(d), -v]),
                             rcond=None)[0]
        f = _max_norm_objective((np.zeros(d), np.eye(d)), (v, lin))
        x, val = _subgradient(f, x0, rng, restarts, iters, scale=max(1.0, float(np.linalg.norm(v))))
        verified = float(max(np.linalg.norm(x), np.linalg.norm(lin @ x + v)))
        lower = _translation_lower_bound(lin, v)
        x_digits = [repr(float(c)) for c in x]
    if verified <= radius * (1 + 1e-6):
        status = "success"
    elif lower > radius:
        status = "failure"
    else:
        status = "inconclusive"
    return {"status": status, "objective": float(val), "verified_objective": float(verified),
            "lower_bound": float(lower), "x": list(map(float, x)), "x_digits": x_digits}


def _embed(s, zero, dim):
    v = np.zeros(dim)
    v[zero] = s
    return hp.col(v)


def _translation_lower_bound(lin, v):
    """Half the distance from v to the range of L - I."""
    d = len(v)
    u, sv, _ = np.linalg.svd(lin - np.eye(d))
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
    return float(np.linalg.norm(u[:, rank:].T @ v)) / 2


def nonproperness_witness(traces, family, C_prime, R=None, seed=0, restarts=5, iters=10_000):
    """Check that gamma K meets K for every traced word gamma."""
    R = R if R is not None else max(t.bound_R for t in traces)
    radius = witness_radius(C_prime, R)
    per, succ, inc, fail = [], 0, 0, 0
    for n, t in enumerate(traces):
        res = solve_witness(family.real, family.element(t.letters), radius,
                            seed=seed + n, restarts=restarts, iters=iters)
        res["word"] = t.word
        per.append(res)
        if res["status"] == "success":
            succ += 1
        elif res["status"] == "failure":
            fail += 1
        else:
            inc += 1
    return WitnessReport(radius, R, C_prime, succ, inc, fail, per)
