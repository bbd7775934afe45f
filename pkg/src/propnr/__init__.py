"""Propelinear structures on the Nordstrom-Robinson code and their extensions to H16."""

from __future__ import annotations

from .constructions import hamming16, nordstrom_robinson, octacode, reed_muller
from .gf2core import Code, CodeError, kernel, min_distance, span
from .permgroup import Automorphism, PermGroupSet, sym_h16
from .structure import PropStructure, fingerprint, is_normalized, validate_structure

__version__ = "0.1.0"

__all__ = [
    "Automorphism",
    "Code",
    "CodeError",
    "PermGroupSet",
    "PropStructure",
    "fingerprint",
    "hamming16",
    "is_normalized",
    "kernel",
    "min_distance",
    "nordstrom_robinson",
    "octacode",
    "reed_muller",
    "span",
    "sym_h16",
    "validate_structure",
]
