"""Narrow extensions of propelinear structures from a reduced NR code to H16.

A structure ``S`` on a Nordstrom-Robinson code ``N`` extends narrowly when a
regular group ``D`` on H16 contains ``S`` and uses the same permutations.
Then ``D = W . S`` where ``W = L + C_id`` is the group of identity-permutation
elements, ``C_id`` those of ``S`` and ``L`` an order-8 group of translations
picking one word in each block of a partition of H16 into translates of
``N``.  ``D`` is a group exactly when ``W`` is invariant under every
permutation of ``S``, a linear condition solved here over GF(2).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .constructions import NR_RELABEL, hamming16, hamming_z4, nordstrom_robinson, nr_z4_structure, z4_structure
from .gf2core import Code, CodeError, basis, kernel, span_words, translate
from .partition import Partition, partitions_containing
from .permgroup import Automorphism, closure, compose, identity_perm, inverse, permute_word
from .structure import PropStructure, _generating_set, canonical_form, element_orders, fingerprint

SCHEMA_VERSION = 1


@dataclass
class ExtensionResult:
    source: PropStructure
    partition: Partition
    generators: Tuple[int, int, int]
    extended: PropStructure

    @property
    def translations(self) -> List[int]:
        """``W``: words whose permutation in the extension is the identity."""
        return sorted(self.extended.identity_part())


# ------------------------------------------------------------ GF(2) helpers


def _coords(basis_vecs: Sequence[int]) -> Dict[int, int]:
    """Map every word of the span to its coordinate bitmask in ``basis_vecs``."""
    out = {}
    for mask in range(1 << len(basis_vecs)):
        w = 0
        for j, b in enumerate(basis_vecs):
            if mask >> j & 1:
                w ^= b
        out[w] = mask
    return out


def _solve(rows: List[Tuple[int, int]], nvars: int) -> Optional[Tuple[int, List[int]]]:
    """Solve ``<row, u> = rhs`` over GF(2); returns a particular solution and a null-space basis."""
    pivots: List[Tuple[int, int, int]] = []  # (pivot bit, row, rhs)
    for r, b in rows:
        for pbit, pr, pb in pivots:
            if r >> pbit & 1:
                r ^= pr
                b ^= pb
        if r == 0:
            if b:
                return None
            continue
        pbit = r.bit_length() - 1
        # keep the system reduced: clear the new pivot from earlier rows
        pivots = [(q, pr ^ r, pb ^ b) if pr >> pbit & 1 else (q, pr, pb) for q, pr, pb in pivots]
        pivots.append((pbit, r, b))
    particular = 0
    for pbit, r, b in pivots:
        if b:
            particular |= 1 << pbit
    pivot_bits = {p for p, _, _ in pivots}
    null = []
    for f in range(nvars):
        if f in pivot_bits:
            continue
        v = 1 << f
        for pbit, r, _ in pivots:
            if r >> f & 1:
                v |= 1 << pbit
        null.append(v)
    return particular, null


# --------------------------------------------------------------- the search


class _SourceData:
    """Per-source linear data: ``C_id``, a complement of it in the kernel, the permutations."""

    def __init__(self, s: PropStructure) -> None:
        if not s.code.issubset(hamming16()) or len(s.code) * 8 != len(hamming16()):
            raise CodeError("source must be a structure on a reduced NR code inside H16")
        self.s = s
        self.kernel = kernel(s.code)
        self.c_id = sorted(s.identity_part())
        self.c_id_basis = basis(self.c_id)
        full = list(self.c_id_basis)
        self.q = []  # complement of C_id in the kernel
        for k in basis(self.kernel.words):
            if len(basis(full + [k])) > len(full):
                full.append(k)
                self.q.append(k)
        self.d = len(self.q)
        coords = _coords(self.c_id_basis + self.q)
        nc = len(self.c_id_basis)
        self.proj = {w: m >> nc for w, m in coords.items()}  # kernel word -> coordinates mod C_id
        self.perms = sorted(s.perm_set())


def _lift(data: _SourceData, mask: int) -> int:
    w = 0
    for l, q in enumerate(data.q):
        if mask >> l & 1:
            w ^= q
    return w


def _line_basis(partition: Partition, ker: Code) -> List[int]:
    """Three translators independent modulo the kernel."""
    chosen: List[int] = []
    kb = basis(ker.words)
    for t in partition.translators:
        if len(basis(kb + chosen + [t])) > len(kb) + len(chosen):
            chosen.append(t)
        if len(chosen) == 3:
            return chosen
    raise CodeError("partition translators do not span an 8-block quotient")


def _solutions(data: _SourceData, partition: Partition) -> List[Tuple[int, int, int]]:
    """All triples ``t_i = b_i + k_i`` (``k_i`` modulo ``C_id``) making ``W`` invariant."""
    ker = data.kernel
    b = _line_basis(partition, ker)
    vmap = _coords(basis(ker.words) + b)  # word of V -> mask; low 5 bits kernel part
    kdim = len(basis(ker.words))
    kb = basis(ker.words)
    d = data.d
    rows: List[Tuple[int, int]] = []
    pq_cache: Dict[tuple, List[int]] = {}
    for p in data.perms:
        if p not in pq_cache:
            img = []
            for q in data.q:
                pw = permute_word(p, q)
                if pw not in data.proj:
                    raise CodeError("a source permutation does not preserve the kernel")
                img.append(data.proj[pw])
            pq_cache[p] = img
        pq = pq_cache[p]
        for i in range(3):
            u = permute_word(p, b[i])
            m = vmap.get(u)
            if m is None:
                return []  # this permutation moves the partition's translation space
            e = m >> kdim
            r = 0
            for j in range(kdim):
                if m >> j & 1:
                    r ^= kb[j]
            pr = data.proj[r]
            for bit in range(d):
                row = 0
                for l in range(d):
                    if pq[l] >> bit & 1:
                        row ^= 1 << (i * d + l)
                for j in range(3):
                    if e >> j & 1:
                        row ^= 1 << (j * d + bit)
                rows.append((row, pr >> bit & 1))
    sol = _solve(rows, 3 * d)
    if sol is None:
        return []
    particular, null = sol
    out = []
    for combo in range(1 << len(null)):
        u = particular
        for j, v in enumerate(null):
            if combo >> j & 1:
                u ^= v
        ks = [_lift(data, (u >> (i * d)) & ((1 << d) - 1)) for i in range(3)]
        out.append(tuple(b[i] ^ ks[i] for i in range(3)))
    return out


def _build_extension(data: _SourceData, partition: Partition, ts: Sequence[int]) -> PropStructure:
    s = data.s
    h = hamming16()
    lwords = span_words(list(ts))
    if len(lwords) != 8:
        raise CodeError("translations are dependent")
    lab = np.full(1 << 16, -1, dtype=np.int64)
    for t in lwords.tolist():
        blk = translate(s.code, t)
        if (lab[blk.array] >= 0).any():
            raise CodeError("translations do not pick distinct blocks")
        lab[blk.array] = t
    perm_of = {}
    for w in h.words:
        t = int(lab[w])
        perm_of[w] = s.perm_of[w ^ t]
    return PropStructure(h, perm_of)


def _triple_sum_cosets(partition: Partition) -> set:
    ker = kernel(partition.base)
    return {w for t in partition.translators for w in (ker.array ^ t).tolist()}


def extend_structure(
    s: PropStructure,
    partitions: Optional[Sequence[Partition]] = None,
    check: bool = True,
) -> List[ExtensionResult]:
    """All narrow extensions of ``s`` to H16."""
    data = _SourceData(s)
    parts = partitions_containing(s.code) if partitions is None else partitions
    out = []
    seen = set()
    for part in parts:
        allowed = _triple_sum_cosets(part)
        for ts in _solutions(data, part):
            lwords = span_words(list(ts)).tolist()
            if not all(t in allowed for t in lwords if t):
                raise AssertionError("translation outside the partition's triple-sum cosets")
            ext = _build_extension(data, part, ts)
            key = tuple(sorted(ext.identity_part())), part.translators
            if key in seen:
                raise AssertionError("duplicate extension")
            seen.add(key)
            if check:
                ok, why = ext.check()
                if not ok:
                    raise AssertionError(f"extension is not a structure: {why}")
            out.append(ExtensionResult(s, part, tuple(int(t) for t in ts), ext))
    return out


def extend_by_closure(s: PropStructure, partition: Partition) -> List[PropStructure]:
    """Independent route: close ``S`` with three translations and keep groups of order |H16|.

    Each ``t_i`` runs over ``b_i + K`` modulo ``C_id`` (other choices generate
    the same groups).  Only practical when ``C_id`` is large.
    """
    data = _SourceData(s)
    b = _line_basis(partition, data.kernel)
    table = s.cayley_table()
    gens_s = [s.element(int(s.words[g])) for g in _generating_set(table, -element_orders(table))]
    e = identity_perm(16)
    reps = [_lift(data, m) for m in range(1 << data.d)]
    found = {}
    for ks in itertools.product(reps, repeat=3):
        ts = [b[i] ^ ks[i] for i in range(3)]
        g = closure(gens_s + [Automorphism(t, e) for t in ts], len(hamming16()))
        if g is None or g.order != len(hamming16()):
            continue
        perm_of = {a.x: a.p for a in g}
        if set(perm_of) != hamming16().wordset:
            continue
        st = PropStructure(hamming16(), perm_of)
        found[tuple(sorted(st.identity_part()))] = st
    return [found[k] for k in sorted(found)]


# -------------------------------------------------------- structural checks


@dataclass
class Statement5Report:
    identity_part_ok: bool
    normal: bool
    cosets_are_translates: bool
    coset_count: int
    restriction_ok: bool
    blocks_match_partition: bool
    messages: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.identity_part_ok
            and self.normal
            and self.cosets_are_translates
            and self.coset_count == 8
            and self.restriction_ok
            and self.blocks_match_partition
        )


def verify_statement5(e: ExtensionResult) -> Statement5Report:
    """Check the semidirect shape of an extension ``D`` of ``C``.

    (a) identity-permutation words of ``D`` form a linear space containing
    those of ``C`` with index 8; (b) they form a normal subgroup; (c) each
    left coset ``x * C`` is a translate ``a + C``, where ``a`` is the word of
    ``L`` in the block of ``x`` (not ``x`` itself in general).
    """
    d, c = e.extended, e.source
    msgs = []
    w = sorted(d.identity_part())
    cset = c.code.wordset
    cw = set(c.identity_part())
    wset = set(w)
    lin = len(w) == 1 << len(basis(w))  # a set containing 0 is a space iff it fills its span
    a_ok = lin and 0 in wset and cw <= wset and len(w) == 8 * len(cw)
    if not a_ok:
        msgs.append("identity part is not an index-8 linear extension of the source's")
    # normality: enough to conjugate by a generating set of D
    table = d.cayley_table()
    gens = [d.element(int(d.words[g])) for g in _generating_set(table, -element_orders(table))]
    e_id = identity_perm(d.code.length)
    normal = True
    for g in gens:
        gi = inverse(g)
        for t in w:
            h = compose(compose(g, Automorphism(t, e_id)), gi)
            if h.p != e_id or h.x not in wset:
                normal = False
                break
        if not normal:
            msgs.append(f"identity part not normalized by the element at {g.x}")
            break
    # left cosets x * C from the Cayley table
    cidx = np.flatnonzero(np.isin(d.words, c.code.array))
    words = d.words
    cosets = {frozenset(words[row[cidx]].tolist()) for row in table}
    translate_ok = True
    for left in cosets:
        # a translate a + C with a in the coset; a must lie in a + Ker(C)
        if not any(left == frozenset(a ^ y for y in cset) for a in sorted(left)[:64]):
            translate_ok = False
            msgs.append("a left coset is not a translate of the source code")
            break
    restriction = all(d.perm_of[x] == c.perm_of[x] for x in c.code.words)
    if not restriction:
        msgs.append("extension does not restrict to the source")
    blocks = frozenset(frozenset(b.words) for b in e.partition.blocks())
    match = cosets == blocks
    if not match:
        msgs.append("left cosets differ from the partition blocks")
    return Statement5Report(a_ok, normal, translate_ok, len(cosets), restriction, match, msgs)


@dataclass
class Statement4Report:
    h16_size: int
    contains_source: bool
    perm_sets_equal: bool
    perm_count: int
    perm_iff_double: bool
    found_by_search: bool

    @property
    def ok(self) -> bool:
        return (
            self.h16_size == 2048
            and self.contains_source
            and self.perm_sets_equal
            and self.perm_iff_double
            and self.found_by_search
        )


def z4_h16_structure() -> PropStructure:
    """The Z4-linear structure on H16, in the canonical NR coordinates."""
    return z4_structure(hamming_z4(), NR_RELABEL)


def verify_statement4(search: bool = True) -> Statement4Report:
    """The Z4-linear NR structure extends narrowly to the Z4-linear structure on H16."""
    from .constructions import gray, gray_inverse

    z = hamming_z4()
    big = z4_structure(z, NR_RELABEL)
    small = nr_z4_structure()
    contains = all(big.perm_of.get(x) == p for x, p in small.perm_of.items())
    equal = small.perm_set() == big.perm_set()
    # in raw coordinates, pi_x depends exactly on the doubled preimage
    raw = z4_structure(z)
    by_perm: Dict[tuple, set] = {}
    for x, p in raw.perm_of.items():
        dbl = tuple(2 * v % 4 for v in gray_inverse(x, z.length))
        by_perm.setdefault(p, set()).add(dbl)
    iff = all(len(v) == 1 for v in by_perm.values()) and len({next(iter(v)) for v in by_perm.values()}) == len(by_perm)
    found = True
    if search:
        found = any(r.extended == big for r in extend_structure(small, check=False))
    return Statement4Report(len(z), contains, equal, small.num_distinct_perms(), iff, found)


# ------------------------------------------------------------ classification


def canonical_hash(s: PropStructure) -> str:
    return hashlib.sha256(canonical_form(s)[0]).hexdigest()


def fingerprint_key(s: PropStructure) -> str:
    return json.dumps(fingerprint(s).as_list(), separators=(",", ":"))


def source_report(source_id: int, s: PropStructure, results: Sequence[ExtensionResult]) -> dict:
    """Per-source record: extensions found and their conjugacy classes in Sym(H16)."""
    reps: Dict[str, dict] = {}
    for r in results:
        h = canonical_hash(r.extended)
        if h not in reps:
            reps[h] = {
                "hash": h,
                "partition": list(r.partition.translators),
                "generators": list(r.generators),
                "distinct_perms": r.extended.num_distinct_perms(),
                "fingerprint": fingerprint(r.extended).as_list(),
            }
    return {
        "schema_version": SCHEMA_VERSION,
        "source_id": source_id,
        "partitions_tried": 30,
        "extensions_found": len(results),
        "conjugacy_class_reps": [reps[k] for k in sorted(reps)],
        "fingerprints": sorted({json.dumps(v["fingerprint"]) for v in reps.values()}),
    }


def extend_source_cached(source_id: int, s: PropStructure, cache_dir) -> dict:
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / f"source_{source_id:03d}.json"
    if path.exists():
        rep = json.loads(path.read_text())
        if rep.get("schema_version") == SCHEMA_VERSION:
            return rep
    rep = source_report(source_id, s, extend_structure(s))
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(rep))
    tmp.replace(path)
    return rep


@dataclass
class ExtensionSummary:
    sources: int
    non_extendable: List[int]
    total_extensions: int
    conjugacy_classes: int
    fingerprint_classes: int

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "sources": self.sources,
            "non_extendable_sources": len(self.non_extendable),
            "non_extendable_ids": self.non_extendable,
            "extensions": self.total_extensions,
            "conj": self.conjugacy_classes,
            "iso_lb": self.fingerprint_classes,
        }


def classify_extensions(reports: Iterable[dict]) -> ExtensionSummary:
    """Aggregate per-source reports: global conjugacy classes and fingerprint classes."""
    reports = list(reports)
    classes: Dict[str, list] = {}
    for rep in reports:
        for c in rep["conjugacy_class_reps"]:
            classes.setdefault(c["hash"], c["fingerprint"])
    fps = {json.dumps(v) for v in classes.values()}
    return ExtensionSummary(
        sources=len(reports),
        non_extendable=sorted(r["source_id"] for r in reports if r["extensions_found"] == 0),
        total_extensions=sum(r["extensions_found"] for r in reports),
        conjugacy_classes=len(classes),
        fingerprint_classes=len(fps),
    )


def classify_results(results: Sequence[ExtensionResult]) -> Tuple[int, int]:
    """Conjugacy-class count and fingerprint-class count of explicit extensions."""
    hashes = {}
    for r in results:
        h = canonical_hash(r.extended)
        if h not in hashes:
            hashes[h] = fingerprint_key(r.extended)
    return len(hashes), len(set(hashes.values()))
