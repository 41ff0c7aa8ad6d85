"""Milnorian criterion for real split representations and the numerics behind it.

The exact half (``rootsys``, ``weights``, ``irrep``, ``criterion``) decides the
criterion in rational arithmetic.  The numeric half (``realize``,
``dynamics``, ``schottky``, ``words``, ``pipeline``) builds Schottky families
of affine maps, measures Margulis invariants, constructs words with bounded
invariants and checks non-properness witnesses.
"""
from .criterion import evaluate, scan
from .rootsys import build_root_system, longest_element
from .weights import HighestWeight, weight_system

__all__ = ["evaluate", "scan", "build_root_system", "longest_element", "HighestWeight",
           "weight_system"]
__version__ = "0.1.0"
