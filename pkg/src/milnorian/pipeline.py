"""End-to-end simulation: Schottky family, bounded-invariant words, witness.

All randomness is drawn from generators seeded by fixed offsets of one
integer seed, so a run is a pure function of its parameters.
"""
from dataclasses import dataclass, field

import numpy as np

from . import freegroup as fg
from .realize import realize_group
from .schottky import (DEFAULT_BUDGET, DEFAULT_S_THRESHOLD, DEFAULT_SAMPLES, choose_pair,
                       select_power_and_calibrate)
from .words import (DEFAULT_POOL, DEFAULT_STEP_BUDGET, build_gamma_double_prime,
                    collinear_sequence, greedy_bounded_words, nonproperness_witness)

DEFAULT_N_MAX = 50
DEFAULT_PREFIXES = 20
PREFIX_MAX_LENGTH = 8
PREFIX_PERSISTENCE = 0.75
TRANSLATION_MODE = "neutral-independent"


@dataclass
class Simulation:
    rep_id: tuple
    seed: int
    real: object
    pair: object
    family: object
    path: str                      # "collinear" or "basis"
    traces: list
    gpp: object = None
    g_word: list = None
    h_word: list = None
    params: dict = field(default_factory=dict)

    @property
    def working_family(self):
        """The family whose letters spell the traced words."""
        return self.family if self.gpp is None else self.gpp.family

    @property
    def C_prime(self):
        return self.family.C if self.gpp is None else self.gpp.C_prime

    @property
    def R(self):
        return max(t.bound_R for t in self.traces)

    def to_json(self):
        fam = self.working_family
        out = {"rep_id": [self.rep_id[0], self.rep_id[1], list(self.rep_id[2])],
               "seed": self.seed, "path": self.path, "params": dict(self.params),
               "pair": {"C": self.pair.C, "retries": self.pair.retries,
                        "power": self.pair.power, "merit": self.pair.merit,
                        "translation_mode": self.pair.translation_mode},
               "family": {"C": self.family.C, "N_used": self.family.N_used,
                          "calibration": self.family.calibration.to_json(),
                          "generators": self.family.generator_arrays()},
               "C_prime": self.C_prime, "R": self.R,
               "traces": [t.to_json() for t in self.traces]}
        if self.gpp is not None:
            out["gamma_double_prime"] = self.gpp.to_json()
            out["gamma_double_prime"]["generators"] = fam.generator_arrays()
        else:
            out["collinear"] = {"g_word": fg.to_str(self.g_word), "h_word": fg.to_str(self.h_word)}
        return out


def distinct_prefixes(k, rng, count, max_length=PREFIX_MAX_LENGTH, persistence=PREFIX_PERSISTENCE):
    """``count`` distinct cyclically reduced words of length 1..max_length.

    Letters repeat with probability ``persistence`` so that a good share of
    the prefixes starts outside the stopping shell.
    """
    out, seen = [], set()
    while len(out) < count:
        w = fg.random_cyclically_reduced(rng, k, int(rng.integers(1, max_length + 1)), persistence)
        if tuple(w) not in seen:
            seen.add(tuple(w))
            out.append(w)
    return out


def simulate(rep_id, seed, n_max=DEFAULT_N_MAX, budget=DEFAULT_BUDGET, sample_count=DEFAULT_SAMPLES,
             pool_size=DEFAULT_POOL, prefixes=DEFAULT_PREFIXES, step_budget=DEFAULT_STEP_BUDGET,
             s_threshold=DEFAULT_S_THRESHOLD):
    """Build a calibrated Schottky family for ``rep_id`` and bounded-invariant words in it.

    One-dimensional zero-weight blocks use the collinear words
    ``g^n h^(-floor(c n))`` (g the generator with the larger invariant);
    larger blocks go through the basis subgroup and the greedy descent.
    """
    t, r, w = rep_id
    rep_id = (str(t).upper(), int(r), tuple(int(x) for x in w))
    params = {"n_max": n_max, "budget": budget, "sample_count": sample_count,
              "pool_size": pool_size, "prefixes": prefixes, "step_budget": step_budget,
              "s_threshold": s_threshold}
    real = realize_group(rep_id)
    rng = np.random.default_rng(seed)
    pair = choose_pair(real, rng, budget=budget, translation=TRANSLATION_MODE,
                       s_threshold=s_threshold)
    family = select_power_and_calibrate(real, pair.g, pair.h, pair.C, s_threshold=s_threshold,
                                        sample_count=sample_count, seed=seed + 1, n_max=n_max)
    if len(real.zero_block) == 1:
        a, b = [(0, 1)], [(1, 1)]
        if np.linalg.norm(family.margulis(a)) < np.linalg.norm(family.margulis(b)):
            a, b = b, a
        traces = collinear_sequence(family, n_max=n_max, g_word=a, h_word=b)
        return Simulation(rep_id, seed, real, pair, family, "collinear", traces,
                          g_word=a, h_word=b, params=params)
    gpp = build_gamma_double_prime(family, pool_size=pool_size, seed=seed + 2, n_max=n_max)
    prng = np.random.default_rng(seed + 3)
    traces = [greedy_bounded_words(gpp, p, budget=step_budget, seed=seed + 3)
              for p in distinct_prefixes(gpp.k, prng, prefixes)]
    return Simulation(rep_id, seed, real, pair, family, "basis", traces, gpp=gpp, params=params)


def witness(sim, seed=None, restarts=5, iters=10_000):
    """Non-properness witness for every trace of a simulation."""
    seed = sim.seed + 4 if seed is None else seed
    return nonproperness_witness(sim.traces, sim.working_family, sim.C_prime, R=sim.R,
                                 seed=seed, restarts=restarts, iters=iters)
