"""Coordinate permutations and automorphisms ``(x, pi)`` of F2^n.

Conventions (used by every other module):

* a permutation is a tuple ``p`` of images, ``p[i] = pi(i)``;
* it acts on words by ``(pi . y)_i = y_{pi(i)}``;
* the automorphism ``(x, pi)`` sends ``y`` to ``x + pi . y``;
* ``compose(a, b)`` is "apply ``b`` first, then ``a``", which forces
  ``r.x = a.x + a.p . b.x`` and ``r.p[i] = b.p[a.p[i]]``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence

import numpy as np

from .gf2core import Code, CodeError, span, word_from_str, word_to_str


class Automorphism(NamedTuple):
    x: int
    p: tuple

    @property
    def n(self) -> int:
        return len(self.p)


def identity_perm(n: int) -> tuple:
    return tuple(range(n))


def identity(n: int) -> Automorphism:
    return Automorphism(0, identity_perm(n))


def is_perm(p: Sequence[int]) -> bool:
    return sorted(p) == list(range(len(p)))


def perm_inverse(p: Sequence[int]) -> tuple:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def perm_then(p: Sequence[int], q: Sequence[int]) -> tuple:
    """Permutation part of ``compose((_, p), (_, q))``: ``i -> q[p[i]]``."""
    return tuple(q[i] for i in p)


def permute_word(p: Sequence[int], y: int) -> int:
    out, y = 0, int(y)
    for i, j in enumerate(p):
        if (y >> int(j)) & 1:
            out |= 1 << i
    return out


def permute_words(p: Sequence[int], ys: np.ndarray) -> np.ndarray:
    """``p . y`` for every word of an integer array."""
    ys = np.asarray(ys, dtype=np.int64)
    p = np.asarray(p, dtype=np.int64)
    bits = (ys[..., None] >> p) & 1
    return (bits << np.arange(len(p), dtype=np.int64)).sum(axis=-1)


def permute_word_many(perms: np.ndarray, y) -> np.ndarray:
    """``p . y`` for every row ``p`` of ``perms``; ``y`` may broadcast."""
    perms = np.asarray(perms, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    bits = (y[..., None] >> perms) & 1
    return (bits << np.arange(perms.shape[-1], dtype=np.int64)).sum(axis=-1)


def _check(a: Automorphism, b: Automorphism) -> None:
    if len(a.p) != len(b.p):
        raise ValueError("length mismatch")


def apply(a: Automorphism, y: int) -> int:
    if y >> len(a.p):
        raise ValueError("length mismatch")
    return a.x ^ permute_word(a.p, y)


def compose(a: Automorphism, b: Automorphism) -> Automorphism:
    _check(a, b)
    return Automorphism(a.x ^ permute_word(a.p, b.x), perm_then(a.p, b.p))


def inverse(a: Automorphism) -> Automorphism:
    ip = perm_inverse(a.p)
    return Automorphism(permute_word(ip, a.x), ip)


def conjugate(g: Automorphism, h: Automorphism) -> Automorphism:
    """``g h g^-1``."""
    return compose(compose(g, h), inverse(g))


def element_order(a: Automorphism) -> int:
    e = identity(a.n)
    k, cur = 1, a
    while cur != e:
        cur = compose(cur, a)
        k += 1
    return k


def fixes_code(a: Automorphism, c: Code) -> bool:
    ws = c.wordset
    return all(apply(a, y) in ws for y in c.words)


# ------------------------------------------------------------------ groups


class PermGroupSet:
    """A finite set of automorphisms stored as parallel arrays.

    ``xs[k]`` and ``perms[k]`` describe element ``k``; rows are sorted by
    ``(x, perm)`` so two sets compare equal iff their arrays do.
    """

    def __init__(self, xs, perms, *, closed: bool = False, generators=None, presorted=False):
        perms = np.asarray(perms, dtype=np.uint8)
        if perms.ndim != 2:
            raise ValueError("perms must be 2-d")
        xs = np.zeros(len(perms), dtype=np.int64) if xs is None else np.asarray(xs, dtype=np.int64)
        if not presorted and len(perms):
            keys = np.column_stack([xs, perms.astype(np.int64)])
            keys, idx = np.unique(keys, axis=0, return_index=True)
            xs, perms = xs[idx], perms[idx]
        self.xs = xs
        self.perms = perms
        self.closed = closed
        self.generators = list(generators) if generators is not None else None

    @classmethod
    def from_elements(cls, elements: Iterable[Automorphism], **kw) -> "PermGroupSet":
        els = list(elements)
        if not els:
            raise ValueError("empty element list")
        return cls([e.x for e in els], [e.p for e in els], **kw)

    @property
    def n(self) -> int:
        return self.perms.shape[1]

    @property
    def order(self) -> int:
        return len(self.perms)

    def __len__(self) -> int:
        return self.order

    def __iter__(self) -> Iterator[Automorphism]:
        for x, p in zip(self.xs.tolist(), self.perms.tolist()):
            yield Automorphism(x, tuple(p))

    def __contains__(self, a: Automorphism) -> bool:
        return a in self.element_set

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermGroupSet):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.perms, other.perms)

    def __hash__(self) -> int:
        return hash((self.xs.tobytes(), self.perms.tobytes()))

    def __repr__(self) -> str:
        return f"PermGroupSet(order={self.order}, n={self.n}, closed={self.closed})"

    @property
    def element_set(self) -> frozenset:
        if not hasattr(self, "_eset"):
            self._eset = frozenset(self)
        return self._eset

    def is_pure(self) -> bool:
        return not self.xs.any()

    def is_closed_under_products(self, sample: Optional[int] = None, seed: int = 0) -> bool:
        els = list(self)
        if sample is None:
            pairs = itertools.product(els, repeat=2)
        else:
            rng = np.random.default_rng(seed)
            ij = rng.integers(0, len(els), size=(sample, 2))
            pairs = ((els[i], els[j]) for i, j in ij)
        eset = self.element_set
        return all(compose(a, b) in eset for a, b in pairs)


def closure(gens: Sequence[Automorphism], bound: int) -> Optional[PermGroupSet]:
    """The group generated by ``gens``, or ``None`` once it exceeds ``bound``."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    e = identity(gens[0].n)
    seen = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = compose(a, g)
                if b not in seen:
                    seen.add(b)
                    if len(seen) > bound:
                        return None
                    nxt.append(b)
        frontier = nxt
    return PermGroupSet.from_elements(seen, closed=True, generators=gens)


def conjugate_subgroup(s: PermGroupSet, g: Automorphism) -> PermGroupSet:
    return PermGroupSet.from_elements((conjugate(g, h) for h in s), closed=s.closed)


def element_order_multiset(s: PermGroupSet) -> List[int]:
    return sorted(element_order(a) for a in s)


# ------------------------------------------------------ affine group AGL(4,2)


_KEY_COLS = (0, 1, 2, 4, 8)


class AffineGroup:
    """All permutations of 16 coordinates induced by ``v -> Av + b`` on F2^4.

    Coordinate ``i`` is identified with the vector whose ``j``-th entry is bit
    ``j`` of ``i``.  Elements are addressed by row index into ``perms``; rows
    are sorted lexicographically, so row 0 is the identity.
    """

    ORDER = 322560

    def __init__(self) -> None:
        cols = np.arange(1, 16)
        c = np.array(list(itertools.product(cols, repeat=4)), dtype=np.int64)
        # invertible iff the 16 combinations of the columns are distinct
        combos = np.zeros((len(c), 16), dtype=np.int64)
        for v in range(16):
            acc = np.zeros(len(c), dtype=np.int64)
            for j in range(4):
                if (v >> j) & 1:
                    acc ^= c[:, j]
            combos[:, v] = acc
        srt = np.sort(combos, axis=1)
        ok = (np.diff(srt, axis=1) != 0).all(axis=1)
        lin = combos[ok]  # (20160, 16): image of v under A
        perms = (lin[:, None, :] ^ np.arange(16)[None, :, None]).reshape(-1, 16)
        order = np.lexsort(perms.T[::-1])
        self.perms = perms[order].astype(np.uint8)
        self.perms.setflags(write=False)
        self._lookup = np.full(1 << 20, -1, dtype=np.int32)
        self._lookup[self._key(self.perms)] = np.arange(len(self.perms), dtype=np.int32)
        self._flat = self.perms.astype(np.int64).ravel()
        self._keycols = self.perms[:, list(_KEY_COLS)].astype(np.int64)
        inv = np.empty_like(self.perms)
        rows = np.arange(len(self.perms))[:, None]
        inv[rows, self.perms.astype(np.int64)] = np.arange(16, dtype=np.uint8)
        self.inv = self.ids(inv)
        self.sq = self.mul(np.arange(len(self.perms)), np.arange(len(self.perms)))
        self.codes = perm_codes(self.perms)

    @staticmethod
    def _key(perms: np.ndarray) -> np.ndarray:
        """Images of 0 and the unit vectors determine an affine map."""
        p = np.asarray(perms, dtype=np.int64)[..., list(_KEY_COLS)]
        return p[..., 0] | (p[..., 1] << 4) | (p[..., 2] << 8) | (p[..., 3] << 12) | (p[..., 4] << 16)

    def __len__(self) -> int:
        return len(self.perms)

    def ids(self, perms: np.ndarray) -> np.ndarray:
        """Row indices of affine permutations (no validation of the full row)."""
        return self._lookup[self._key(perms)]

    def id_of(self, p: Sequence[int]) -> int:
        i = int(self.ids(np.asarray(p)))
        if i < 0 or tuple(self.perms[i]) != tuple(p):
            raise KeyError("not an affine permutation")
        return i

    def mul(self, a, b) -> np.ndarray:
        """Id of the permutation part of ``compose((_, a), (_, b))``."""
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        # only the key entries of the product pb[pa] are needed
        k = self._flat[b[..., None] * 16 + self._keycols[a]]
        return self._lookup[k[..., 0] | (k[..., 1] << 4) | (k[..., 2] << 8) | (k[..., 3] << 12) | (k[..., 4] << 16)]

    def conj(self, g, h) -> np.ndarray:
        """Id of ``g h g^-1`` on permutation parts."""
        return self.mul(self.mul(g, h), self.inv[np.asarray(g)])


_NIB = (np.uint64(1) << (np.uint64(4) * np.arange(15, -1, -1, dtype=np.uint64))).astype(np.uint64)


def perm_codes(perms: np.ndarray) -> np.ndarray:
    """Encode degree-16 permutations as uint64 in lexicographic order."""
    p = np.asarray(perms, dtype=np.uint64)
    return (p * _NIB).sum(axis=-1, dtype=np.uint64)


@lru_cache(maxsize=1)
def affine_group() -> AffineGroup:
    return AffineGroup()


def sym_h16() -> PermGroupSet:
    ag = affine_group()
    return PermGroupSet(None, ag.perms, closed=True, presorted=True)


def translation_subgroup() -> PermGroupSet:
    """The 16 maps ``v -> v + b``."""
    perms = np.arange(16)[None, :] ^ np.arange(16)[:, None]
    return PermGroupSet(None, perms, closed=True)


def _stabilizer_ids(c: Code, ids: Optional[np.ndarray] = None) -> np.ndarray:
    ag = affine_group()
    member = np.zeros(1 << 16, dtype=bool)
    member[c.array] = True
    cand = np.arange(len(ag)) if ids is None else np.asarray(ids)
    order = np.random.default_rng(0).permutation(len(c))
    for w in c.array[order]:
        img = permute_word_many(ag.perms[cand], int(w))
        cand = cand[member[img]]
    return cand


def sym_of_subcode(c: Code) -> PermGroupSet:
    """Coordinate symmetries of a subcode of H16 whose span is all of H16."""
    from .constructions import hamming16

    if c.length != 16 or span(c).code != hamming16():
        raise CodeError("filter method inapplicable")
    ids = _stabilizer_ids(c)
    return PermGroupSet(None, affine_group().perms[ids], closed=True, presorted=True)


def sym_ids_of_subcode(c: Code) -> np.ndarray:
    """Same as :func:`sym_of_subcode` but as row ids of :func:`affine_group`."""
    from .constructions import hamming16

    if c.length != 16 or span(c).code != hamming16():
        raise CodeError("filter method inapplicable")
    if len(c) == len(hamming16()):
        return np.arange(len(affine_group()))  # c is H16 itself
    return _stabilizer_ids(c)


def induced_label_perms(g: PermGroupSet, cosets: Sequence[Code]) -> np.ndarray:
    """Row ``k``: where element ``k`` sends each coset label (setwise)."""
    lab = np.full(1 << g.n, -1, dtype=np.int64)
    for i, cos in enumerate(cosets):
        lab[cos.array] = i
    out = np.empty((g.order, len(cosets)), dtype=np.int64)
    for i, cos in enumerate(cosets):
        imgs = np.stack([permute_words(p, cos.array) for p in g.perms]) ^ g.xs[:, None]
        labels = lab[imgs]
        if (labels < 0).any() or (labels != labels[:, :1]).any():
            raise ValueError("element maps a coset off the coset system")
        out[:, i] = labels[:, 0]
    return out


def action_on_cosets(g: PermGroupSet, d) -> PermGroupSet:
    """Induced permutation group on the nontrivial cosets ``1..k`` of ``d``.

    Labels are shifted to ``0..k-1`` (label ``i`` is ``reps[i]``).
    """
    cosets = d.cosets()
    lp = induced_label_perms(g, cosets)
    if (lp[:, 0] != 0).any():
        raise ValueError("element moves the kernel")
    induced = np.unique(lp[:, 1:] - 1, axis=0)
    return PermGroupSet(None, induced, closed=True)


def is_k_transitive(g: PermGroupSet, k: int) -> bool:
    n = g.n
    target = list(itertools.permutations(range(n), k))
    start = tuple(range(k))
    images = {tuple(int(p[i]) for i in start) for p in g.perms}
    return len(images) == len(target)


# ------------------------------------------------------------- file formats


def format_perms(perms: Iterable[Sequence[int]]) -> str:
    return "".join(" ".join(str(int(i)) for i in p) + "\n" for p in perms)


def parse_perms(text: str) -> List[tuple]:
    out = []
    for ln in text.splitlines():
        if not ln.strip():
            continue
        p = tuple(int(t) for t in ln.split())
        if not is_perm(p):
            raise ValueError(f"not a permutation: {ln!r}")
        out.append(p)
    return out


def format_automorphisms(elements: Iterable[Automorphism]) -> str:
    lines = []
    for a in elements:
        lines.append(word_to_str(a.x, a.n))
        lines.append(" ".join(str(i) for i in a.p))
    return "\n".join(lines) + "\n"


def parse_automorphisms(text: str) -> List[Automorphism]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) % 2:
        raise ValueError("automorphism records come in word/perm line pairs")
    out = []
    for wl, pl in zip(lines[::2], lines[1::2]):
        p = tuple(int(t) for t in pl.split())
        if not is_perm(p) or len(wl.strip()) != len(p):
            raise ValueError(f"bad automorphism record {wl!r} / {pl!r}")
        out.append(Automorphism(word_from_str(wl), p))
    return out


def save_perms(perms, path) -> None:
    Path(path).write_text(format_perms(perms))


def load_perms(path) -> List[tuple]:
    return parse_perms(Path(path).read_text())
