"""Single verdict per representation, and batch scans over catalogs."""
from dataclasses import dataclass
from fractions import Fraction

from .errors import MilnorianError
from .irrep import build_irrep, condition_i_check
from .rootsys import build_root_system, inner, longest_element
from .weights import HighestWeight, condition_iii_check, weight_system

MILNORIAN = "Milnorian"
NON_MILNORIAN_CRITERION = "non-Milnorian-criterion"
MILNORIAN_TRIVIALLY = "Milnorian-trivially"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class CriterionReport:
    rep_id: tuple
    dim: int
    zero_weight_dim: int
    cond_i: bool
    cond_iii: bool
    x0: tuple
    verdict: str

    def to_json(self):
        t, r, w = self.rep_id
        return {
            "rep_id": [t, r, list(w)],
            "dim": self.dim,
            "zero_weight_dim": self.zero_weight_dim,
            "cond_i": self.cond_i,
            "cond_iii": self.cond_iii,
            "x0": None if self.x0 is None else [str(x) for x in self.x0],
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class ScanFailure:
    rep_id: tuple
    error: str

    def to_json(self):
        t, r, w = self.rep_id
        return {"rep_id": [t, r, list(w)], "error": self.error}


def normalize_rep_id(rep_id):
    t, r, w = rep_id
    return (str(t).upper(), int(r), tuple(int(x) for x in w))


def standard_weight(type_label, rank):
    """Highest weight of the defining representation of a classical type.

    For ``B1`` (that is, SO(2,1)) the vector representation is the adjoint one,
    of highest weight twice the fundamental weight.
    """
    if type_label == "B" and rank == 1:
        return (2,)
    if type_label in "ABCD":
        return (1,) + (0,) * (rank - 1)
    raise ValueError(f"no standard representation registered for type {type_label}")


def _recheck_x0(rs, ws, x0):
    w0 = longest_element(rs)
    if tuple(-x for x in w0.apply(x0)) != tuple(x0):
        raise AssertionError("X0 certificate is not fixed by -w0")
    if any(inner(w, x0) == 0 for w in ws.nonzero_weights()):
        raise AssertionError("X0 certificate vanishes on a nonzero weight")


def evaluate(rep_id):
    t, r, w = normalize_rep_id(rep_id)
    rs = build_root_system(t, r)
    ws = weight_system(HighestWeight(rs, w))
    z = ws.zero_weight_dim
    cond_iii, witness = condition_iii_check(ws)
    x0 = tuple(witness) if cond_iii else None
    if z == 0:
        cond_i = True
        verdict = MILNORIAN_TRIVIALLY
    else:
        module = build_irrep(HighestWeight(rs, w))
        cond_i, _ = condition_i_check(module)
        if not cond_i:
            verdict = NON_MILNORIAN_CRITERION
        elif cond_iii:
            verdict = MILNORIAN
        else:
            verdict = UNDECIDED
    if verdict == MILNORIAN:
        _recheck_x0(rs, ws, tuple(Fraction(x) for x in x0))
    return CriterionReport((t, r, w), ws.total_dim, z, cond_i, cond_iii, x0, verdict)


def scan(catalog):
    """One report per catalog entry, in order; errors are recorded, not raised."""
    out = []
    for rep_id in catalog:
        try:
            out.append(evaluate(rep_id))
        except (MilnorianError, ValueError) as exc:
            try:
                key = normalize_rep_id(rep_id)
            except (TypeError, ValueError):
                key = tuple(rep_id)
            out.append(ScanFailure(key, f"{type(exc).__name__}: {exc}"))
    return out


def format_table(reports):
    rows = [("rep", "dim", "dim V0", "cond i", "cond iii", "verdict")]
    for rep in reports:
        t, r, w = rep.rep_id
        name = f"{t}{r} ({','.join(map(str, w))})"
        if isinstance(rep, ScanFailure):
            rows.append((name, "-", "-", "-", "-", "error: " + rep.error))
        else:
            rows.append((name, str(rep.dim), str(rep.zero_weight_dim), str(rep.cond_i),
                         str(rep.cond_iii), rep.verdict))
    widths = [max(len(row[k]) for row in rows) for k in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip() for row in rows)
