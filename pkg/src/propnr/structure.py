"""Propelinear structures: regular groups of automorphisms of a code.

A structure on a reduced code ``C`` assigns to every codeword ``x`` a
permutation ``pi_x`` such that ``{(x, pi_x)}`` is a group acting regularly
on ``C``; the product is ``x * y = x + pi_x . y``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .gf2core import Code, CodeError, kernel, word_from_str, word_to_str
from .permgroup import Automorphism, identity_perm, is_perm, permute_word, permute_word_many


class PropStructure:
    def __init__(self, code: Code, perm_of: Dict[int, Sequence[int]]) -> None:
        self.code = code
        self.perm_of = {int(x): tuple(int(v) for v in p) for x, p in perm_of.items()}
        self._arr = None
        self._table = None

    def __len__(self) -> int:
        return len(self.code)

    def __repr__(self) -> str:
        return f"PropStructure(n={self.code.length}, M={len(self.code)}, perms={self.num_distinct_perms()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropStructure):
            return NotImplemented
        return self.code == other.code and self.perm_of == other.perm_of

    def __hash__(self) -> int:
        return hash((self.code, tuple(sorted(self.perm_of.items()))))

    @property
    def words(self) -> np.ndarray:
        return self.code.array

    @property
    def perms(self) -> np.ndarray:
        """Rows aligned with ``self.words``."""
        if self._arr is None:
            self._arr = np.array([self.perm_of[w] for w in self.code.words], dtype=np.int64)
        return self._arr

    def elements(self) -> List[Automorphism]:
        return [Automorphism(w, self.perm_of[w]) for w in self.code.words]

    def element(self, x: int) -> Automorphism:
        return Automorphism(x, self.perm_of[x])

    def star(self, x: int, y: int) -> int:
        return x ^ permute_word(self.perm_of[x], y)

    def perm_set(self) -> set:
        return set(self.perm_of.values())

    def num_distinct_perms(self) -> int:
        return len(self.perm_set())

    def identity_part(self) -> List[int]:
        """Words ``x`` with ``pi_x`` the identity (the translation subgroup)."""
        e = identity_perm(self.code.length)
        return [x for x, p in self.perm_of.items() if p == e]

    def check(self) -> Tuple[bool, str]:
        """Verify the structure invariants; returns ``(ok, first failure)``."""
        c = self.code
        if not c.is_reduced:
            return False, "code not reduced"
        if set(self.perm_of) != c.wordset:
            return False, "permutations not indexed by the codewords"
        if any(not is_perm(p) or len(p) != c.length for p in self.perm_of.values()):
            return False, "entry is not a permutation of the coordinates"
        if self.perm_of[0] != identity_perm(c.length):
            return False, "pi_0 is not the identity"
        ok, why = self._product_table()
        if not ok:
            return False, why
        return True, "ok"

    def _product_table(self) -> Tuple[bool, str]:
        """Fill the Cayley table, checking closure on the way."""
        c = self.code
        pos = _positions(c)
        words = self.words
        # work with the distinct permutations only: pi_x . y depends on pi_x
        uniq, idx = np.unique(self.perms, axis=0, return_inverse=True)
        idx = idx.ravel()
        moved = permute_word_many(uniq[:, None, :], words[None, :])  # (k, M)
        prod = pos[moved[idx] ^ words[:, None]]
        if (prod < 0).any():
            return False, "x + pi_x . y leaves the code"
        # perm part of (x, pi_x)(y, pi_y) is pi_y[pi_x]
        comp = uniq[np.arange(len(uniq))[None, :, None], uniq[:, None, :]]  # comp[k, l] = uniq[l][uniq[k]]
        lookup = {row.tobytes(): i for i, row in enumerate(uniq)}
        comp_idx = np.array([[lookup.get(r.tobytes(), -1) for r in blk] for blk in comp], dtype=np.int64)
        if (comp_idx < 0).any():
            return False, "closure fails: composed permutation missing from the structure"
        if not np.array_equal(idx[prod], comp_idx[idx][:, idx]):
            return False, "closure fails: pi_{x*y} differs from the composed permutation"
        self._table = prod.astype(np.int32)
        return True, "ok"

    def cayley_table(self) -> np.ndarray:
        """``T[i, j]`` = index of ``words[i] * words[j]``."""
        if getattr(self, "_table", None) is None:
            ok, why = self._product_table()
            if not ok:
                raise CodeError(f"not a structure: {why}")
        return self._table

    def conjugate_by_perm(self, sigma: Sequence[int]) -> "PropStructure":
        """Conjugate by ``(0, sigma)``; the result lives on ``sigma . C``."""
        from .permgroup import conjugate

        g = Automorphism(0, tuple(int(v) for v in sigma))
        new = {}
        for a in self.elements():
            b = conjugate(g, a)
            new[b.x] = b.p
        return PropStructure(Code(self.code.length, new.keys()), new)


def _positions(c: Code) -> np.ndarray:
    pos = np.full(1 << c.length, -1, dtype=np.int64)
    pos[c.array] = np.arange(len(c))
    return pos


def validate_structure(s: PropStructure) -> bool:
    return s.check()[0]


def translation_structure(c: Code) -> PropStructure:
    """All-identity permutations; a structure iff ``c`` is linear."""
    e = identity_perm(c.length)
    return PropStructure(c, {w: e for w in c.words})


def structure_from_group(code: Code, elements: Iterable[Automorphism]) -> PropStructure:
    perm_of = {}
    for a in elements:
        if a.x in perm_of:
            raise CodeError("group is not regular: two elements share an image of 0")
        perm_of[a.x] = a.p
    return PropStructure(code, perm_of)


def is_normalized(s: PropStructure) -> bool:
    """Distinct permutations attain ``|C| / |Ker(C)|``."""
    return s.num_distinct_perms() * len(kernel(s.code)) == len(s.code)


# ------------------------------------------------------------- invariants


def element_orders(table: np.ndarray) -> np.ndarray:
    n = len(table)
    idx = np.arange(n)
    cur = idx.copy()
    order = np.zeros(n, dtype=np.int64)
    for k in range(1, n + 1):
        done = (cur == 0) & (order == 0)
        order[done] = k
        if (order > 0).all():
            break
        cur = table[cur, idx]
    return order


def centralizer_orders(table: np.ndarray) -> np.ndarray:
    return (table == table.T).sum(axis=1)


@dataclass(frozen=True)
class GroupFingerprint:
    pairs: Tuple[Tuple[Tuple[int, int], int], ...]  # ((order, centralizer order), multiplicity)

    def as_list(self) -> List[List[int]]:
        return [[o, c, m] for (o, c), m in self.pairs]


def fingerprint_from_table(table: np.ndarray) -> GroupFingerprint:
    cnt = Counter(zip(element_orders(table).tolist(), centralizer_orders(table).tolist()))
    return GroupFingerprint(tuple(sorted(cnt.items())))


def fingerprint(s: PropStructure) -> GroupFingerprint:
    return fingerprint_from_table(s.cayley_table())


# ------------------------------------------------------------ isomorphism


class SearchBudgetExceeded(Exception):
    pass


def _generating_set(table: np.ndarray, priority: np.ndarray) -> List[int]:
    """Generating set taking elements in increasing ``priority``.

    An element is kept only if it is new modulo the subgroup generated by the
    chosen elements and all squares; for a 2-group the squares generate the
    Frattini subgroup, so the result is a minimal generating set.
    """
    n = len(table)
    squares = sorted(set(table[np.arange(n), np.arange(n)].tolist()))
    gens: List[int] = []
    sub = _subgroup(table, squares)
    for g in sorted(range(n), key=lambda i: (priority[i], i)):
        if g in sub:
            continue
        gens.append(g)
        sub = _subgroup(table, squares + gens)
        if len(sub) == n:
            break
    if len(_subgroup(table, gens)) != n:
        # not a 2-group: fall back to growing without the squares
        gens, sub = [], {0}
        for g in sorted(range(n), key=lambda i: (priority[i], i)):
            if g not in sub:
                gens.append(g)
                sub = _subgroup(table, gens)
                if len(sub) == n:
                    break
    return gens


def _subgroup(table: np.ndarray, gens: Sequence[int]) -> set:
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = int(table[a, g])
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


def _element_classes(table: np.ndarray) -> np.ndarray:
    """Isomorphism-invariant label per element: order, centralizer, and those of its square."""
    orders = element_orders(table)
    cents = centralizer_orders(table)
    sq = table[np.arange(len(table)), np.arange(len(table))]
    key = orders * 10**6 + cents
    return key * 10**8 + key[sq] % 10**8


class _Refiner:
    """Shared invariant labels for two groups, refined to a fixed point.

    Each round adds, for every element ``g``, the label of ``g^2``, the
    multiset of labels over the centralizer of ``g`` and the multiset of
    pairs (label of ``h``, label of ``gh``).  Any isomorphism preserves
    labels that started out preserved, so differing label multisets rule
    one out.
    """

    def __init__(self, a: np.ndarray, b: np.ndarray) -> None:
        self.tabs = (a, b)
        self.comm = [t == t.T for t in self.tabs]
        self.sqs = [t[np.arange(len(t)), np.arange(len(t))] for t in self.tabs]
        self.commutators = []
        for t in self.tabs:
            inv = np.argmax(t == 0, axis=1)
            # [g, h] = g h g^-1 h^-1
            self.commutators.append(t[t, t[inv[:, None], inv[None, :]]])

    def initial(self) -> Tuple[np.ndarray, np.ndarray]:
        la, lb = _element_classes(self.tabs[0]), _element_classes(self.tabs[1])
        _, inv = np.unique(np.concatenate([la, lb]), return_inverse=True)
        inv = inv.ravel().astype(np.int64)
        return self.refine(inv[: len(la)], inv[len(la):])

    def refine(self, la: np.ndarray, lb: np.ndarray, rounds: int = 8) -> Tuple[np.ndarray, np.ndarray]:
        # multisets are hashed as sums of random 64-bit weights; a collision
        # can only merge labels, which weakens pruning but never breaks it
        labels = [la, lb]
        rng = np.random.default_rng(0x5EED)
        for _ in range(rounds):
            width = int(max(labels[0].max(), labels[1].max())) + 1
            w = rng.integers(1, 2**63, size=(7, width), dtype=np.uint64)
            sigs = []
            for lab, cm, sq, t, cx in zip(labels, self.comm, self.sqs, self.tabs, self.commutators):
                cen = np.where(cm, w[1][lab][None, :], np.uint64(0)).sum(axis=1, dtype=np.uint64)
                pair = (w[2][lab][None, :] * w[3][lab[t]]).sum(axis=1, dtype=np.uint64)
                com = (w[2][lab][None, :] * w[4][lab[cx]]).sum(axis=1, dtype=np.uint64)
                roots = np.zeros(len(lab), dtype=np.uint64)
                np.add.at(roots, sq, w[5][lab])
                sigs.append(np.stack([lab.astype(np.uint64), w[0][lab[sq]], cen, pair, com, roots], axis=1))
            both = np.concatenate(sigs)
            _, inv = np.unique(both, axis=0, return_inverse=True)
            inv = inv.ravel().astype(np.int64)
            new = [inv[: len(la)], inv[len(la):]]
            stable = all(len(np.unique(n)) == len(np.unique(o)) for n, o in zip(new, labels))
            labels = new
            if stable:
                break
        return labels[0], labels[1]


def _same_multiset(x: np.ndarray, y: np.ndarray) -> bool:
    return np.array_equal(np.sort(x), np.sort(y))


def groups_isomorphic_tables(a: np.ndarray, b: np.ndarray, budget: int = 200_000) -> Optional[bool]:
    """Backtracking isomorphism test between Cayley tables (identity at index 0).

    Generators of ``a`` are mapped one at a time; after each choice the pair
    is given a fresh shared label and the labels are refined again
    (individualization-refinement), which prunes the next generator's
    images.  Returns ``None`` when the node budget runs out.
    """
    if len(a) != len(b):
        return False
    if fingerprint_from_table(a) != fingerprint_from_table(b):
        return False
    refiner = _Refiner(a, b)
    ca, cb = refiner.initial()
    if not _same_multiset(ca, cb):
        return False
    sizes = np.bincount(cb, minlength=int(max(ca.max(), cb.max())) + 1)
    gens = _generating_set(a, sizes[ca])
    nodes = 0
    phi_gen: List[int] = []

    def rec(i: int, phi: Dict[int, int], la: np.ndarray, lb: np.ndarray) -> bool:
        nonlocal nodes
        if i == len(gens):
            return True
        g = gens[i]
        # products with the already-mapped subgroup must keep their labels
        xs = np.fromiter(phi.keys(), dtype=np.int64)
        ys = np.fromiter(phi.values(), dtype=np.int64)
        cand = np.flatnonzero(lb == la[g])
        ok = (lb[b[cand[:, None], ys[None, :]]] == la[a[g, xs]][None, :]).all(axis=1)
        ok &= (lb[b[ys[None, :], cand[:, None]]] == la[a[xs, g]][None, :]).all(axis=1)
        for img in cand[ok].tolist():
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded
            phi_gen.append(img)
            ext = _extend_hom(a, b, gens[: i + 1], phi_gen)
            if ext is not None:
                na, nb = la.copy(), lb.copy()
                fresh = int(max(la.max(), lb.max())) + 1
                na[g], nb[img] = fresh, fresh
                na, nb = refiner.refine(na, nb)
                if _same_multiset(na, nb) and rec(i + 1, ext, na, nb):
                    return True
            phi_gen.pop()
        return False

    try:
        return rec(0, {0: 0}, ca, cb)
    except SearchBudgetExceeded:
        return None


def _extend_hom(a, b, gens, imgs) -> Optional[Dict[int, int]]:
    """Extend ``gens[k] -> imgs[k]`` to a homomorphism on ``<gens>``; ``None`` if inconsistent or not injective."""
    phi = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            fx = phi[x]
            for g, h in zip(gens, imgs):
                y = int(a[x, g])
                fy = int(b[fx, h])
                if y in phi:
                    if phi[y] != fy:
                        return None
                else:
                    phi[y] = fy
                    nxt.append(y)
        frontier = nxt
    if len(set(phi.values())) != len(phi):
        return None
    return phi


def groups_isomorphic(s: PropStructure, t: PropStructure, budget: int = 200_000) -> Optional[bool]:
    """``True``/``False``, or ``None`` if the search budget was exhausted."""
    if len(s) != len(t):
        raise ValueError("groups of different order")
    return groups_isomorphic_tables(s.cayley_table(), t.cayley_table(), budget)


# ------------------------------------------------------------ file format


def format_structure(s: PropStructure) -> str:
    n = s.code.length
    lines = [f"{n} {len(s)}"]
    for w in s.code.words:
        lines.append(word_to_str(w, n))
        lines.append(" ".join(str(i) for i in s.perm_of[w]))
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> PropStructure:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n, m = (int(t) for t in lines[0].split())
    body = lines[1:]
    if len(body) != 2 * m:
        raise CodeError(f"expected {m} word/perm records")
    perm_of = {}
    for wl, pl in zip(body[::2], body[1::2]):
        p = tuple(int(t) for t in pl.split())
        if len(wl.strip()) != n or len(p) != n or not is_perm(p):
            raise CodeError(f"bad record {wl!r} / {pl!r}")
        perm_of[word_from_str(wl)] = p
    return PropStructure(Code(n, perm_of.keys()), perm_of)


def save_structure(s: PropStructure, path) -> None:
    Path(path).write_text(format_structure(s))


def load_structure(path) -> PropStructure:
    return parse_structure(Path(path).read_text())


# ------------------------------------------------------------- enumeration


@dataclass
class SemiregularPartial:
    """A semiregular subgroup of Aut(C) of order ``2**level``.

    ``xs[k]`` is the image of 0 under element ``k`` (the orbit of 0, one
    element per orbit word); ``pids`` are the affine ids of the permutations.
    ``stab`` holds positions in Sym(C) of the conjugators fixing the group.
    """

    xs: np.ndarray
    pids: np.ndarray
    gens: List[Tuple[int, int]]
    stab: Optional[np.ndarray] = None

    @property
    def level(self) -> int:
        return len(self.xs).bit_length() - 1

    @property
    def orbit0(self) -> np.ndarray:
        return np.sort(self.xs)

    def group(self, ctx) -> "PermGroupSet":
        from .permgroup import PermGroupSet

        return PermGroupSet(self.xs, ctx.ag.perms[self.pids], closed=True)


class _Search:
    """Level-by-level chain search for regular 2-subgroups of Aut(C)."""

    def __init__(self, ctx) -> None:
        self.ctx = ctx
        self.ag = ctx.ag
        self.M = ctx.M
        self.bw = np.stack(ctx.block_words)
        self.all_sym = np.arange(len(ctx.sym))

    def table(self, xs, pids) -> np.ndarray:
        t = np.full(self.M, -1, dtype=np.int64)
        t[self.ctx.pos[xs]] = pids
        return t

    def candidates(self, s: SemiregularPartial):
        """Pairs ``(x, pi)`` with ``a = (x, pi)`` outside S, ``a^2`` in S, ``a`` normalizing S."""
        ctx, ag = self.ctx, self.ag
        tab = self.table(s.xs, s.pids)
        perms_s = np.unique(s.pids)
        cand = np.flatnonzero(np.isin(ag.sq, perms_s))
        for gp in np.unique([g[1] for g in s.gens]):
            cand = cand[np.isin(ag.conj(cand, gp), perms_s)]
        in_orbit = np.zeros(self.M, dtype=bool)
        in_orbit[ctx.pos[s.xs]] = True
        # (x, pi) lies in Aut(C) iff x is in the translate block of pi
        X = self.bw[ctx.block[cand]]
        PI = np.repeat(cand[:, None], X.shape[1], axis=1)
        X, PI = X.ravel(), PI.ravel()
        keep = ~in_orbit[ctx.pos[X]]
        X, PI = X[keep], PI[keep]
        sq_x = X ^ ctx.act(PI, X)
        ok = tab[ctx.pos[sq_x]] == ag.sq[PI]
        X, PI = X[ok], PI[ok]
        for gx, gp in s.gens:
            cx, cp = ctx.conj(X, PI, gx, gp)
            ok = tab[ctx.pos[cx]] == cp
            X, PI = X[ok], PI[ok]
        return X, PI, tab

    def extensions(self, s: SemiregularPartial) -> List[SemiregularPartial]:
        ctx, ag = self.ctx, self.ag
        X, PI, tab = self.candidates(s)
        seen = set()
        found = []
        for x, p in zip(X.tolist(), PI.tolist()):
            if (x, p) in seen:
                continue
            # the new coset aS; every candidate in it generates the same group
            cx, cp = ctx.mul(s.xs, s.pids, x, p)
            seen.update(zip(cx.tolist(), cp.tolist()))
            if not ctx.fixed_point_free(cx, cp).all():
                continue
            t = tab.copy()
            t[ctx.pos[cx]] = cp
            found.append((t, x, p))
        # keep one extension per orbit of the stabilizer of S
        stab = self.all_sym if s.stab is None else s.stab
        visited = set()
        out = []
        rows = np.arange(len(stab))[:, None]
        for t, x, p in found:
            if t.tobytes() in visited:
                continue
            occ = np.flatnonzero(t >= 0)
            imgs = np.full((len(stab), self.M), -1, dtype=np.int64)
            imgs[rows, ctx.sym_act[stab][:, occ]] = ag.conj(ctx.sym[stab][:, None], t[occ][None, :])
            visited.update(r.tobytes() for r in imgs)
            out.append(SemiregularPartial(ctx.words[occ], t[occ], s.gens + [(x, p)]))
        return out

    def canonical(self, s: SemiregularPartial) -> Tuple[bytes, np.ndarray]:
        """Lex-min image under Sym(C) conjugation, and the stabilizing conjugators."""
        ctx, ag = self.ctx, self.ag
        act = ctx.sym_act
        opos = ctx.pos[s.xs]
        mask = np.zeros((len(ctx.sym), self.M), dtype=bool)
        mask[np.arange(len(ctx.sym))[:, None], act[:, opos]] = True
        packed = np.packbits(mask, axis=1)
        cand = self.all_sym
        for col in range(packed.shape[1]):
            v = packed[cand, col]
            cand = cand[v == v.min()]
        orbit = np.flatnonzero(mask[cand[0]])
        tab = self.table(s.xs, s.pids)
        seq = []
        for xp in orbit[1:]:
            z = act[ctx.sym_inv_pos[cand], xp]
            c = ag.conj(ctx.sym[cand], tab[z])
            m = c.min()
            cand = cand[c == m]
            seq.append(m)
        s0 = ctx.sym[cand[0]]
        stab = ctx.sym_pos[ag.mul(ag.inv[s0], ctx.sym[cand])]
        key = packed[cand[0]].tobytes() + np.array(seq, dtype=np.int32).tobytes()
        return key, np.sort(stab)

    def step(self, level: List[SemiregularPartial]) -> List[SemiregularPartial]:
        nxt: Dict[bytes, SemiregularPartial] = {}
        for s in level:
            for t in self.extensions(s):
                key, stab = self.canonical(t)
                if key not in nxt:
                    t.stab = stab
                    nxt[key] = t
        return [nxt[k] for k in sorted(nxt)]


def _save_level(path: Path, level: List[SemiregularPartial], ctx) -> None:
    k = level[0].level if level else 0
    xs = np.array([s.xs for s in level], dtype=np.int64).reshape(len(level), 1 << k)
    perms = ctx.ag.perms[np.array([s.pids for s in level], dtype=np.int64).reshape(len(level), 1 << k)]
    gens = np.array([[(gx, gp) for gx, gp in s.gens] for s in level], dtype=np.int64).reshape(len(level), k, 2)
    gen_perms = ctx.ag.perms[gens[:, :, 1]]
    tmp = path.with_suffix(".tmp.npz")
    np.savez_compressed(tmp, level=k, xs=xs, perms=perms, gen_xs=gens[:, :, 0], gen_perms=gen_perms)
    tmp.replace(path)


def _load_level(path: Path, ctx) -> List[SemiregularPartial]:
    with np.load(path) as f:
        xs, perms, gxs, gperms = f["xs"], f["perms"], f["gen_xs"], f["gen_perms"]
    out = []
    for i in range(len(xs)):
        pids = ctx.ag.ids(perms[i].astype(np.int64))
        gp = ctx.ag.ids(gperms[i].astype(np.int64)) if gperms.shape[1] else []
        out.append(SemiregularPartial(xs[i], pids, [(int(a), int(b)) for a, b in zip(gxs[i], gp)]))
    return out


def enumerate_structures(
    c: Optional[Code] = None,
    checkpoint_dir=None,
    log=None,
    stop_level: Optional[int] = None,
) -> List[PropStructure]:
    """One representative per conjugacy class of regular subgroups of Aut(c).

    ``c`` must be a code inside H16 spanning it (the Nordstrom-Robinson code
    by default).  Classes are taken under conjugation by Sym(c), which for
    regular subgroups agrees with conjugation by Aut(c).  With
    ``checkpoint_dir`` each level is written to ``level_<k>.npz`` and an
    interrupted run resumes from the deepest saved level.  ``stop_level``
    returns after that level (partial groups are then not structures and the
    return value is empty).
    """
    from .autgroup import aut_context
    from .constructions import nordstrom_robinson

    c = nordstrom_robinson() if c is None else c
    levels = enumerate_levels(c, checkpoint_dir, log, stop_level)
    top = levels[-1]
    if not top or len(top[0].xs) != len(c):
        return []
    ctx = aut_context(c)
    out = []
    for s in top:
        st = PropStructure(c, {int(x): tuple(int(v) for v in ctx.ag.perms[p]) for x, p in zip(s.xs, s.pids)})
        out.append(st)
    return sorted(out, key=_structure_key)


def enumerate_levels(c: Code, checkpoint_dir=None, log=None, stop_level: Optional[int] = None) -> List[List[SemiregularPartial]]:
    """All levels of the chain search; entry ``k`` holds the class representatives of order ``2**k``."""
    import time

    from .autgroup import aut_context

    if not c.is_reduced or len(c) & (len(c) - 1):
        raise CodeError("enumeration needs a reduced code of 2-power size")
    ctx = aut_context(c)
    search = _Search(ctx)
    top = len(c).bit_length() - 1
    stop = top if stop_level is None else min(stop_level, top)
    ckpt = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if ckpt is not None:
        ckpt.mkdir(parents=True, exist_ok=True)
    levels = [[SemiregularPartial(np.array([0]), np.array([0]), [], search.all_sym)]]
    for k in range(1, stop + 1):
        path = ckpt / f"level_{k}.npz" if ckpt is not None else None
        if path is not None and path.exists():
            cur = _load_level(path, ctx)
            for s in cur:
                s.stab = search.canonical(s)[1]
            src = "loaded"
        else:
            t0 = time.time()
            cur = search.step(levels[-1])
            if path is not None:
                _save_level(path, cur, ctx)
            src = f"{time.time() - t0:.1f}s"
        if log is not None:
            log(f"level {k}: {len(cur)} classes ({src})")
        levels.append(cur)
    return levels


def _structure_key(s: PropStructure) -> tuple:
    return tuple(s.perm_of[w] for w in s.code.words)


# -------------------------------------------------------- conjugacy classes


def canonical_form(s: PropStructure, conjugators: Optional[np.ndarray] = None) -> Tuple[bytes, np.ndarray]:
    """Lex-min conjugate of a structure on a code spanning H16 under coordinate symmetries.

    ``conjugators`` are affine ids fixing the code (default: all of Sym(code)).
    The symmetries must fix the code, so the conjugate of a structure is again
    a structure on the same code and only the permutations need comparing.
    Returns the key and the ids of the minimizing conjugators.
    """
    from .permgroup import affine_group, sym_ids_of_subcode

    ag = affine_group()
    c = s.code
    cand = np.sort(sym_ids_of_subcode(c)) if conjugators is None else np.asarray(conjugators)
    pos = _positions(c)
    words = c.array
    tab = ag.ids(s.perms)
    inv = ag.inv
    seq: List[np.ndarray] = []
    i = 1
    while i < len(words):
        # a block of words at a time, sized to the surviving candidates
        step = max(1, min(len(words) - i, (1 << 16) // len(cand)))
        block = words[i:i + step]
        pre = permute_word_many(ag.perms[inv[cand]][:, None, :], block[None, :])
        vals = ag.conj(cand[:, None], tab[pos[pre]])
        best = vals[np.lexsort(vals.T[::-1])[0]]
        cand = cand[(vals == best).all(axis=1)]
        seq.append(best)
        i += step
    return np.concatenate(seq).astype(np.int32).tobytes(), cand


def are_conjugate(s: PropStructure, t: PropStructure) -> bool:
    if s.code != t.code:
        raise ValueError("structures on different codes")
    return canonical_form(s)[0] == canonical_form(t)[0]


def conjugacy_classes(structures: Sequence[PropStructure], conjugators: Optional[np.ndarray] = None) -> List[List[int]]:
    """Indices of ``structures`` grouped by conjugacy under the given symmetry ids."""
    groups: Dict[bytes, List[int]] = {}
    for i, s in enumerate(structures):
        groups.setdefault(canonical_form(s, conjugators)[0], []).append(i)
    return sorted(groups.values())


# ------------------------------------------------------ multi-structure files


def format_structures(structures: Iterable[PropStructure]) -> str:
    return "".join(format_structure(s) + "\n" for s in structures)


def parse_structures(text: str) -> List[PropStructure]:
    out, block = [], []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    i = 0
    while i < len(lines):
        n, m = (int(t) for t in lines[i].split())
        block = lines[i:i + 1 + 2 * m]
        out.append(parse_structure("\n".join(block)))
        i += 1 + 2 * m
    return out


def save_structures(structures: Iterable[PropStructure], path) -> None:
    Path(path).write_text(format_structures(structures))


def load_structures(path) -> List[PropStructure]:
    return parse_structures(Path(path).read_text())
