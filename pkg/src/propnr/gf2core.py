"""Binary words and codes over F2.

A word of length ``n`` is a plain Python ``int`` whose bit ``i`` holds
coordinate ``i`` (coordinates are numbered ``0..n-1``).  A :class:`Code`
keeps its words sorted and duplicate free, so list equality is set equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

MAX_LENGTH = 32


class CodeError(ValueError):
    pass


def weight(w: int) -> int:
    return int(w).bit_count()


def distance(x: int, y: int) -> int:
    return weight(x ^ y)


def word_from_bits(bits: Sequence[int]) -> int:
    w = 0
    for i, b in enumerate(bits):
        if b:
            w |= 1 << i
    return w


def word_to_str(w: int, n: int) -> str:
    return "".join("1" if (w >> i) & 1 else "0" for i in range(n))


def word_from_str(s: str) -> int:
    s = s.strip()
    if set(s) - {"0", "1"}:
        raise CodeError(f"bad word line {s!r}")
    return word_from_bits([c == "1" for c in s])


def popcount_array(a: np.ndarray) -> np.ndarray:
    """Vectorised Hamming weight of an integer array (values < 2**32)."""
    a = np.asarray(a, dtype=np.uint32)
    a = a - ((a >> 1) & 0x55555555)
    a = (a & 0x33333333) + ((a >> 2) & 0x33333333)
    a = (a + (a >> 4)) & 0x0F0F0F0F
    return ((a * np.uint32(0x01010101)) >> 24).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Code:
    """A set of binary words of common length, kept in canonical order."""

    length: int
    words: tuple = field(default=())

    def __post_init__(self) -> None:
        if not 1 <= self.length <= MAX_LENGTH:
            raise CodeError(f"length {self.length} outside 1..{MAX_LENGTH}")
        ws = tuple(sorted(set(int(w) for w in self.words)))
        if ws and (ws[0] < 0 or ws[-1] >> self.length):
            raise CodeError("word wider than code length")
        object.__setattr__(self, "words", ws)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, w: int) -> bool:
        return int(w) in self.wordset

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Code):
            return NotImplemented
        return self.length == other.length and self.words == other.words

    def __hash__(self) -> int:
        return hash((self.length, self.words))

    def __repr__(self) -> str:
        return f"Code(n={self.length}, M={len(self)})"

    @cached_property
    def wordset(self) -> frozenset:
        return frozenset(self.words)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.words, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def index(self) -> dict:
        """Map word -> position in ``words``."""
        return {w: i for i, w in enumerate(self.words)}

    @property
    def is_reduced(self) -> bool:
        return bool(self.words) and self.words[0] == 0

    def parameters(self) -> tuple:
        return self.length, len(self), min_distance(self)

    def issubset(self, other: "Code") -> bool:
        return self.length == other.length and self.wordset <= other.wordset

    def isdisjoint(self, other: "Code") -> bool:
        return self.wordset.isdisjoint(other.wordset)


def min_distance(c: Code) -> int:
    if len(c) < 2:
        raise CodeError("degenerate code")
    arr = c.array
    best = c.length + 1
    # rows of the pairwise XOR table, one word at a time keeps memory at O(M)
    for i in range(len(arr) - 1):
        d = int(popcount_array(arr[i + 1:] ^ arr[i]).min())
        if d < best:
            best = d
    return best


def weight_distribution(c: Code) -> dict:
    ws, counts = np.unique(popcount_array(c.array), return_counts=True)
    return {int(w): int(k) for w, k in zip(ws, counts)}


def _echelon(vectors: Iterable[int]) -> List[int]:
    """Reduced basis keyed by leading bit; returns the basis list."""
    pivots: dict = {}
    for v in vectors:
        v = int(v)
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                v ^= pivots[top]
            else:
                pivots[top] = v
                break
    return [pivots[k] for k in sorted(pivots, reverse=True)]


def basis(vectors: Iterable[int]) -> List[int]:
    """A basis of the F2-span of ``vectors`` (fully reduced echelon form)."""
    b = _echelon(vectors)
    # back-substitute so every pivot bit appears in exactly one basis vector
    for i in range(len(b)):
        top = b[i].bit_length() - 1
        for j in range(len(b)):
            if j != i and (b[j] >> top) & 1:
                b[j] ^= b[i]
    return sorted(b, reverse=True)


def rank(vectors: Iterable[int]) -> int:
    return len(_echelon(vectors))


def in_span(v: int, vectors: Iterable[int]) -> bool:
    b = _echelon(vectors)
    return rank(b + [v]) == len(b)


def span_words(basis_vectors: Sequence[int]) -> np.ndarray:
    """All ``2**k`` combinations of ``k`` independent vectors (raises if dependent)."""
    if rank(basis_vectors) != len(basis_vectors):
        raise CodeError("span_words needs linearly independent vectors")
    out = np.zeros(1, dtype=np.int64)
    for v in basis_vectors:
        out = np.concatenate([out, out ^ int(v)])
    return out


@dataclass(frozen=True)
class Span:
    code: Code
    basis: tuple

    @property
    def dimension(self) -> int:
        return len(self.basis)


def span(c: Code) -> Span:
    if not len(c):
        raise CodeError("span of empty code")
    b = basis(c.words)
    return Span(Code(c.length, span_words(b).tolist()), tuple(b))


def is_linear(c: Code) -> bool:
    if not c.is_reduced:
        return False
    return len(span(c).code) == len(c)


def kernel(c: Code) -> Code:
    """The kernel ``{x in c : x + c = c}``, tested word by word."""
    if not c.is_reduced:
        raise CodeError("kernel requires reduced code")
    arr = c.array
    members = np.zeros(1 << c.length, dtype=bool) if c.length <= 24 else None
    if members is not None:
        members[arr] = True
        keep = [int(x) for x in arr if members[arr ^ int(x)].all()]
    else:
        ws = c.wordset
        keep = [x for x in c.words if all((x ^ y) in ws for y in c.words)]
    return Code(c.length, keep)


def translate(c: Code, v: int) -> Code:
    v = int(v)
    if v < 0 or v >> c.length:
        raise CodeError("length mismatch")
    return Code(c.length, (c.array ^ v).tolist())


@dataclass(frozen=True)
class CosetDecomposition:
    """``base = kernel  U  (reps[i] + kernel)``, reps minimal in their coset."""

    base: Code
    kernel: Code
    reps: tuple

    def cosets(self) -> List[Code]:
        return [self.kernel] + [translate(self.kernel, a) for a in self.reps]

    def coset_of(self, w: int) -> int:
        """0 for the kernel, ``i`` for ``reps[i-1] + kernel``, -1 if outside."""
        for i, cos in enumerate(self.cosets()):
            if w in cos:
                return i
        return -1


def coset_decomposition(c: Code) -> CosetDecomposition:
    k = kernel(c)
    seen = set(k.words)
    reps = []
    for w in c.words:  # ascending, so the first unseen word is the coset minimum
        if w in seen:
            continue
        reps.append(w)
        seen.update(int(u) for u in k.array ^ w)
    return CosetDecomposition(c, k, tuple(reps))


# ---------------------------------------------------------------- file format


def format_code(c: Code) -> str:
    lines = [f"{c.length} {len(c)}"]
    lines.extend(word_to_str(w, c.length) for w in c.words)
    return "\n".join(lines) + "\n"


def parse_code(text: str) -> Code:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CodeError("empty code file")
    try:
        n, m = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise CodeError(f"bad header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != m:
        raise CodeError(f"header says {m} words, found {len(body)}")
    words = []
    for ln in body:
        if len(ln.strip()) != n:
            raise CodeError(f"word of wrong length: {ln!r}")
        words.append(word_from_str(ln))
    code = Code(n, words)
    if len(code) != m:
        raise CodeError("duplicate words in code file")
    return code


def save_code(c: Code, path) -> None:
    Path(path).write_text(format_code(c))


def load_code(path) -> Code:
    return parse_code(Path(path).read_text())
