"""Partitions of H16 into Nordstrom-Robinson translates, indexed by Fano planes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .constructions import hamming16, nordstrom_robinson
from .gf2core import Code, CodeError, coset_decomposition, min_distance, translate
from .permgroup import affine_group, permute_word_many, sym_ids_of_subcode

POINTS = tuple(range(1, 8))

Line = Tuple[int, int, int]


@dataclass(frozen=True)
class FanoPlane:
    lines: Tuple[Line, ...]

    def __post_init__(self) -> None:
        lines = tuple(sorted(tuple(sorted(l)) for l in self.lines))
        object.__setattr__(self, "lines", lines)
        if not is_fano(lines):
            raise ValueError(f"not a Fano plane: {lines}")

    def relabel(self, perm: Dict[int, int]) -> "FanoPlane":
        return FanoPlane(tuple(tuple(perm[p] for p in l) for l in self.lines))

    def lines_through(self, point: int) -> List[Line]:
        return [l for l in self.lines if point in l]


def is_fano(lines: Sequence[Sequence[int]]) -> bool:
    if len(lines) != 7 or any(len(set(l)) != 3 or not set(l) <= set(POINTS) for l in lines):
        return False
    pairs = [pr for l in lines for pr in itertools.combinations(sorted(l), 2)]
    return len(pairs) == 21 and len(set(pairs)) == 21


def all_fano_planes() -> List[FanoPlane]:
    """Every Steiner triple system on {1..7}, by backtracking on the least uncovered pair."""
    out: List[FanoPlane] = []
    all_pairs = list(itertools.combinations(POINTS, 2))

    def extend(lines: List[Line], covered: set) -> None:
        if len(covered) == 21:
            out.append(FanoPlane(tuple(lines)))
            return
        i, j = next(pr for pr in all_pairs if pr not in covered)
        for k in POINTS:
            if k in (i, j):
                continue
            tri = tuple(sorted((i, j, k)))
            new = set(itertools.combinations(tri, 2))
            if new & covered:
                continue
            extend(lines + [tri], covered | new)

    extend([], set())
    return sorted(out, key=lambda f: f.lines)


def _is_even(perm: Sequence[int]) -> bool:
    seen, parity = set(), 0
    for s in range(len(perm)):
        if s in seen:
            continue
        length, j = 0, s
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity == 0


def a7_orbits(planes: Sequence[FanoPlane]) -> List[List[FanoPlane]]:
    evens = [p for p in itertools.permutations(range(7)) if _is_even(p)]
    remaining = set(planes)
    orbits = []
    for f in planes:
        if f not in remaining:
            continue
        orb = {f.relabel({i + 1: p[i] + 1 for i in range(7)}) for p in evens}
        if not orb <= set(planes):
            raise ValueError("plane list not closed under A7")
        remaining -= orb
        orbits.append(sorted(orb, key=lambda g: g.lines))
    if sorted(len(o) for o in orbits) != [15, 15]:
        raise AssertionError(f"unexpected A7 orbit sizes {[len(o) for o in orbits]}")
    return orbits


def pasch_switch(f: FanoPlane, point: int) -> FanoPlane:
    """Trade the Pasch configuration formed by the four lines missing ``point``."""
    pasch = [l for l in f.lines if point not in l]
    a, b, c = pasch[0]
    # pasch = {abc, ade, bdf, cef}; replace by {abd, ace, bcf, def}
    ade = next(l for l in pasch[1:] if a in l)
    d, e = sorted(set(ade) - {a})
    bdf = next(l for l in pasch[1:] if b in l)
    if d not in bdf:
        d, e = e, d
    (fpt,) = set(bdf) - {b, d}
    new = [(a, b, d), (a, c, e), (b, c, fpt), (d, e, fpt)]
    return FanoPlane(tuple(l for l in f.lines if point in l) + tuple(new))


# ---------------------------------------------------------- coset machinery


@dataclass(frozen=True)
class CosetPartitionReport:
    """H16 as the 64 kernel cosets ``sum_{i in I} a_i + Ker``, ``|I| <= 3``."""

    base: Code
    kernel: Code
    reps: Tuple[int, ...]  # a_1..a_7
    coset_rep: Dict[FrozenSet[int], int]
    label: np.ndarray = field(repr=False)  # word -> index into ``subsets`` (-1 off H16)
    subsets: Tuple[FrozenSet[int], ...] = field(repr=False)

    def subset_of(self, w: int) -> FrozenSet[int]:
        i = int(self.label[w])
        if i < 0:
            raise CodeError("word not in H16")
        return self.subsets[i]


def hamming_representation(n: Code) -> CosetPartitionReport:
    h = hamming16()
    if not n.issubset(h) or not n.is_reduced:
        raise CodeError("need a reduced NR code inside H16")
    dec = coset_decomposition(n)
    if len(dec.reps) != 7:
        raise CodeError("expected 7 nontrivial kernel cosets")
    subsets = [frozenset(s) for r in range(4) for s in itertools.combinations(POINTS, r)]
    label = np.full(1 << 16, -1, dtype=np.int64)
    reps = {}
    for idx, s in enumerate(subsets):
        a = 0
        for i in s:
            a ^= dec.reps[i - 1]
        reps[s] = a
        words = dec.kernel.array ^ a
        if (label[words] >= 0).any():
            raise CodeError(f"coset collision at {sorted(s)}")
        label[words] = idx
    covered = np.flatnonzero(label >= 0)
    if len(covered) != len(h) or set(covered.tolist()) != h.wordset:
        raise CodeError("cosets do not cover H16 exactly")
    return CosetPartitionReport(n, dec.kernel, dec.reps, reps, label, tuple(subsets))


@lru_cache(maxsize=8)
def _rep_for(n: Code) -> CosetPartitionReport:
    return hamming_representation(n)


def disjoint_by_criterion(a: int, b: int, n: Code) -> bool:
    """``a + N`` and ``b + N`` are disjoint iff ``a + b`` is a triple-sum kernel coset."""
    rep = _rep_for(n)
    s = a ^ b
    if s not in hamming16():
        raise CodeError("a + b not in H16")
    return len(rep.subset_of(s)) == 3


def lemma2_holds(n: Code) -> bool:
    dec = coset_decomposition(n)
    total = 0
    for a in dec.reps:
        total ^= a
    return total in dec.kernel


# ---------------------------------------------------------------- partitions


@dataclass(frozen=True)
class Partition:
    base: Code
    translators: Tuple[int, ...]  # 7 words; blocks are base and t + base
    plane: Optional[FanoPlane] = None

    def blocks(self) -> List[Code]:
        return [self.base] + [translate(self.base, t) for t in self.translators]

    def block_labels(self) -> np.ndarray:
        lab = np.full(1 << 16, -1, dtype=np.int64)
        for i, b in enumerate(self.blocks()):
            lab[b.array] = i
        return lab

    def block_set(self) -> frozenset:
        return frozenset(b.words for b in self.blocks())

    def is_valid(self) -> bool:
        seen = set()
        for b in self.blocks():
            if not seen.isdisjoint(b.wordset):
                return False
            seen |= b.wordset
        return seen == hamming16().wordset


def partition_for_plane(n: Code, f: FanoPlane) -> Partition:
    rep = _rep_for(n)
    ts = tuple(rep.coset_rep[frozenset(l)] for l in f.lines)
    return Partition(n, ts, f)


def partitions_containing(n: Code) -> List[Partition]:
    out = []
    for f in all_fano_planes():
        p = partition_for_plane(n, f)
        if not p.is_valid():
            raise AssertionError(f"plane {f.lines} does not give a partition")
        out.append(p)
    return out


def brute_force_partitions(n: Code) -> List[FrozenSet[int]]:
    """All partitions of H16 into ``n`` and 7 translates ``b + n``, found by set intersection.

    Each translate is determined by ``b`` modulo the kernel, so candidates are
    the 63 nontrivial kernel cosets of H16; disjointness is tested on the
    actual word sets.  Returns each partition as a set of coset representatives.
    """
    h = hamming16()
    dec = coset_decomposition(n)
    ker = dec.kernel
    seen = set(ker.words)
    coset_reps = []
    for w in h.words:
        if w not in seen:
            coset_reps.append(w)
            seen.update((ker.array ^ w).tolist())
    nset = n.wordset
    blocks = {b: translate(n, b).wordset for b in coset_reps}
    cands = [b for b in coset_reps if nset.isdisjoint(blocks[b])]
    adj = {b: {c for c in cands if c != b and blocks[b].isdisjoint(blocks[c])} for b in cands}
    found = []

    def grow(chosen: List[int], pool: List[int]) -> None:
        if len(chosen) == 7:
            found.append(frozenset(chosen))
            return
        for i, b in enumerate(pool):
            grow(chosen + [b], [c for c in pool[i + 1:] if c in adj[b]])

    grow([], sorted(cands))
    out = []
    for fs in found:
        union = set(nset)
        for b in fs:
            union |= blocks[b]
        if union == h.wordset:
            out.append(fs)
    return out


def partitions_isomorphic(p: Partition, q: Partition) -> bool:
    if p.base == q.base and p.plane is not None and q.plane is not None:
        orbits = a7_orbits(all_fano_planes())
        return any(p.plane in o and q.plane in o for o in orbits)
    return find_partition_isomorphism(p, q) is not None


def find_partition_isomorphism(p: Partition, q: Partition) -> Optional[tuple]:
    """A coordinate symmetry of H16 mapping the blocks of ``p`` onto those of ``q``."""
    ag = affine_group()
    lab_q = q.block_labels()
    cand = np.arange(len(ag))
    rng = np.random.default_rng(0)
    blocks = p.blocks()
    # probe a few words per block first, then every word
    for rounds in (2, 8, None):
        for b in blocks:
            words = b.array if rounds is None else rng.choice(b.array, size=rounds, replace=False)
            img = lab_q[permute_word_many(ag.perms[cand][:, None, :], words[None, :])]
            cand = cand[(img == img[:, :1]).all(axis=1)]
            if not len(cand):
                return None
    return tuple(int(v) for v in ag.perms[cand[0]])


def partition_iso_classes(parts: Sequence[Partition]) -> List[List[int]]:
    classes: List[List[int]] = []
    for i, p in enumerate(parts):
        for cl in classes:
            if partitions_isomorphic(parts[cl[0]], p):
                cl.append(i)
                break
        else:
            classes.append([i])
    return classes


# ------------------------------------------------- the 8 reduced NR codes


def reduced_nr_codes_in_h16(n: Optional[Code] = None) -> List[Code]:
    n = nordstrom_robinson() if n is None else n
    dec = coset_decomposition(n)
    codes = [n] + [translate(n, a) for a in dec.reps]
    if len(set(codes)) != 8:
        raise AssertionError("translates a_i + N not distinct")
    for c in codes:
        if not c.is_reduced or len(c) != 256 or min_distance(c) != 6 or not c.issubset(hamming16()):
            raise AssertionError("translate is not a reduced (16,256,6) code in H16")
    return codes


def conjugates_of_sym(n: Optional[Code] = None) -> List[bytes]:
    """The distinct subgroups ``g Sym(N) g^-1`` for g in Sym(H16).

    Conjugating by ``g`` and by ``g h`` (h in Sym(N)) agree, so one g per left
    coset of Sym(N) suffices; cosets are swept out as they are visited.
    """
    n = nordstrom_robinson() if n is None else n
    ag = affine_group()
    sym = np.sort(sym_ids_of_subcode(n))
    visited = np.zeros(len(ag), dtype=bool)
    subgroups = set()
    for g in range(len(ag)):
        if visited[g]:
            continue
        visited[ag.mul(g, sym)] = True
        subgroups.add(np.sort(ag.conj(g, sym)).tobytes())
    return sorted(subgroups)
