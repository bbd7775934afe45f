"""Reed-Muller codes, the octacode, the Gray map and the Nordstrom-Robinson code."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .gf2core import Code, CodeError, kernel, min_distance, span, span_words
from .permgroup import Automorphism, perm_inverse, permute_words


def reed_muller(r: int, m: int) -> Code:
    """RM(r, m); coordinate ``i`` is the evaluation point with bits of ``i``."""
    if not (0 <= r <= m <= 5):
        raise CodeError(f"RM({r},{m}) out of range")
    n = 1 << m
    rows = []
    for deg in range(r + 1):
        for mono in itertools.combinations(range(m), deg):
            mask = sum(1 << j for j in mono)
            rows.append(sum(1 << i for i in range(n) if i & mask == mask))
    return Code(n, span_words(rows).tolist())


@lru_cache(maxsize=None)
def hamming16() -> Code:
    return reed_muller(2, 4)


@lru_cache(maxsize=None)
def rm14() -> Code:
    return reed_muller(1, 4)


# ------------------------------------------------------------------- Z4 side

# digit -> (bit 2i, bit 2i+1)
GRAY_PAIRS = {0: (0, 0), 1: (0, 1), 2: (1, 1), 3: (1, 0)}
_GRAY_BITS = np.array([0b00, 0b10, 0b11, 0b01], dtype=np.int64)  # as (bit 2i) | (bit 2i+1) << 1


def gray(z: Sequence[int]) -> int:
    w = 0
    for i, d in enumerate(z):
        w |= int(_GRAY_BITS[int(d) % 4]) << (2 * i)
    return w


def gray_array(zs: np.ndarray) -> np.ndarray:
    zs = np.asarray(zs, dtype=np.int64) % 4
    shifts = 2 * np.arange(zs.shape[-1], dtype=np.int64)
    return (_GRAY_BITS[zs] << shifts).sum(axis=-1)


_UNGRAY = {0b00: 0, 0b10: 1, 0b11: 2, 0b01: 3}


def gray_inverse(w: int, length: int) -> Tuple[int, ...]:
    return tuple(_UNGRAY[(w >> (2 * i)) & 3] for i in range(length))


@dataclass(frozen=True)
class Z4Code:
    generators: Tuple[Tuple[int, ...], ...]
    elements: np.ndarray  # (M, n) digits, rows sorted

    @property
    def length(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return len(self.elements)

    def binary_image(self) -> Code:
        return Code(2 * self.length, gray_array(self.elements).tolist())


def z4_span(generators: Sequence[Sequence[int]]) -> Z4Code:
    gens = np.array(generators, dtype=np.int64) % 4
    elems = np.zeros((1, gens.shape[1]), dtype=np.int64)
    for g in gens:
        elems = np.concatenate([(elems + k * g) % 4 for k in range(4)])
        elems = np.unique(elems, axis=0)
    return Z4Code(tuple(tuple(int(v) for v in g) for g in gens), elems)


def z4_inner_products_vanish(c: Z4Code) -> bool:
    e = c.elements
    return bool(((e @ e.T) % 4 == 0).all())


# x^3 + 2x^2 + x + 3, the Hensel lift of x^3 + x + 1 to Z4
OCTACODE_POLY = (3, 1, 2, 1)


@lru_cache(maxsize=None)
def octacode() -> Z4Code:
    rows = []
    for s in range(4):
        r = [0] * 7
        for i, c in enumerate(OCTACODE_POLY):
            r[(i + s) % 7] = c
        rows.append(r + [(-sum(r)) % 4])
    code = z4_span(rows)
    if len(code) != 256 or not z4_inner_products_vanish(code):
        raise AssertionError("octacode construction is not self-dual of size 256")
    img = code.binary_image()
    if (len(img), min_distance(img)) != (256, 6):
        raise AssertionError("octacode Gray image is not a (16,256,6) code")
    return code


# Coordinate relabeling carrying the raw Gray image of the octacode into
# RM(2,4) with kernel RM(1,4): canonical coordinate i holds raw coordinate
# NR_RELABEL[i].  Found once by find_relabeling(); frozen for reproducibility.
NR_RELABEL = (15, 9, 11, 1, 13, 7, 3, 5, 14, 8, 10, 0, 12, 6, 2, 4)


def find_relabeling(raw: Code) -> tuple:
    """A permutation ``tau`` with ``tau . kernel(raw) = RM(1,4)``.

    Picks four kernel words which, with the all-one word, give every raw
    coordinate a distinct 4-bit label; canonical coordinate ``v`` then takes
    the raw coordinate labelled ``v``.
    """
    ker = [w for w in kernel(raw).words if w not in (0, 0xFFFF)]
    for quad in itertools.combinations(ker, 4):
        labels = [sum(((quad[j] >> c) & 1) << j for j in range(4)) for c in range(16)]
        if len(set(labels)) == 16:
            tau = [0] * 16
            for c, v in enumerate(labels):
                tau[v] = c
            tau = tuple(tau)
            if relabel_code(raw, tau).issubset(hamming16()):
                return tau
    raise AssertionError("no relabeling found")


def relabel_code(c: Code, tau: Sequence[int]) -> Code:
    return Code(c.length, permute_words(tau, c.array).tolist())


@lru_cache(maxsize=None)
def nordstrom_robinson_raw() -> Code:
    return octacode().binary_image()


@lru_cache(maxsize=None)
def nordstrom_robinson() -> Code:
    nr = relabel_code(nordstrom_robinson_raw(), NR_RELABEL)
    if nr.parameters() != (16, 256, 6) or not nr.is_reduced:
        raise AssertionError("Nordstrom-Robinson parameters")
    if span(nr).code != hamming16() or kernel(nr) != rm14():
        raise AssertionError("Nordstrom-Robinson is not aligned with RM(1,4) < NR < RM(2,4)")
    return nr


def relabel_automorphism(a: Automorphism, tau: Sequence[int]) -> Automorphism:
    """Transport ``a`` along the relabeling ``y -> tau . y``."""
    tau = tuple(tau)
    inv = perm_inverse(tau)
    x = int(permute_words(tau, np.array([a.x]))[0])
    return Automorphism(x, tuple(inv[a.p[tau[i]]] for i in range(len(tau))))


def z4_structure(c: Z4Code, relabel: Sequence[int] | None = None) -> Dict[int, tuple]:
    """Map each Gray codeword ``x`` to ``pi_x``, which swaps ``2i, 2i+1`` for odd digits.

    With ``relabel`` the structure is transported to relabeled coordinates.
    Raises if the result is not a regular group on the Gray image.
    """
    from .structure import PropStructure

    n = 2 * c.length
    perm_of = {}
    for z in c.elements:
        p = list(range(n))
        for i, d in enumerate(z):
            if d % 2:
                p[2 * i], p[2 * i + 1] = 2 * i + 1, 2 * i
        a = Automorphism(gray(z), tuple(p))
        if relabel is not None:
            a = relabel_automorphism(a, relabel)
        perm_of[a.x] = a.p
    code = Code(n, perm_of.keys())
    s = PropStructure(code, perm_of)
    ok, why = s.check()
    if not ok:
        raise AssertionError(f"Z4-linear structure is not regular: {why}")
    return s


def nr_z4_structure():
    """The Z4-linear structure of the octacode, in canonical NR coordinates."""
    return z4_structure(octacode(), NR_RELABEL)


@lru_cache(maxsize=None)
def hamming_z4() -> Z4Code:
    """The Z4 preimage of span(raw NR); a Z4-linear extended perfect code."""
    h = span(nordstrom_robinson_raw()).code
    zs = np.array([gray_inverse(w, 8) for w in h.words], dtype=np.int64)
    members = {tuple(z) for z in zs}
    gens = _z4_generators(zs)
    code = z4_span(gens)
    if {tuple(r) for r in code.elements} != members:
        raise AssertionError("Gray preimage of H16 is not Z4-linear")
    return code


def _z4_generators(zs: np.ndarray) -> List[tuple]:
    gens: List[tuple] = []
    have = {tuple([0] * zs.shape[1])}
    for z in zs:
        t = tuple(int(v) for v in z)
        if t in have:
            continue
        gens.append(t)
        have = {tuple(r) for r in z4_span(gens).elements}
    return gens


def format_z4_code(c: Z4Code) -> str:
    lines = [f"{c.length} {len(c)}"]
    lines.extend(" ".join(str(int(d)) for d in row) for row in c.elements)
    return "\n".join(lines) + "\n"


def save_z4_code(c: Z4Code, path) -> None:
    Path(path).write_text(format_z4_code(c))
