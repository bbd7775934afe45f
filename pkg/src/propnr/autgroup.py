"""Vectorised arithmetic in Aut(C) for a subcode C of H16 spanning H16.

Every automorphism of such a code has the form ``(x, pi)`` with ``pi`` affine
(it preserves the span), so an element is stored as a word ``x`` together with
the row id of ``pi`` in :func:`permgroup.affine_group`.  Arrays of elements are
pairs ``(xs, pids)`` of equal shape.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Tuple

import numpy as np

from .gf2core import Code, CodeError, coset_decomposition, translate
from .permgroup import Automorphism, affine_group, permute_word_many, sym_ids_of_subcode

_CHUNK = 2048


class AutContext:
    """Precomputed tables for Aut(C): symmetry ids, their action on C, translates."""

    def __init__(self, code: Code) -> None:
        self.code = code
        self.ag = ag = affine_group()
        self.words = code.array
        self.M = len(code)
        self.pos = np.full(1 << 16, -1, dtype=np.int32)
        self.pos[self.words] = np.arange(self.M, dtype=np.int32)
        self.sym = np.sort(sym_ids_of_subcode(code))  # Sym(C) as affine ids
        self.sym_pos = np.full(len(ag), -1, dtype=np.int32)
        self.sym_pos[self.sym] = np.arange(len(self.sym), dtype=np.int32)
        self.sym_inv_pos = self.sym_pos[ag.inv[self.sym]]
        # action of Sym(C) on the codewords, as positions
        act = np.empty((len(self.sym), self.M), dtype=np.int32)
        for lo in range(0, len(self.sym), _CHUNK):
            ids = self.sym[lo:lo + _CHUNK]
            img = permute_word_many(ag.perms[ids][:, None, :], self.words[None, :])
            act[lo:lo + _CHUNK] = self.pos[img]
        if (act < 0).any():
            raise CodeError("symmetry table inconsistent")
        self.sym_act = act
        self._init_translates()

    def _init_translates(self) -> None:
        """Label each affine pi by the translate ``t + C`` equal to ``pi . C``.

        One probe word per kernel coset suffices: ``pi . C`` is a union of
        kernel cosets and distinct translates share too few of them.
        """
        ag = self.ag
        dec = coset_decomposition(self.code)
        self.kernel = dec.kernel
        probe = np.array((0,) + dec.reps, dtype=np.int64)
        self.translators = [0]
        masks = [self._member(self.code)]
        img = np.concatenate([
            permute_word_many(ag.perms[lo:lo + 8 * _CHUNK][:, None, :], probe[None, :])
            for lo in range(0, len(ag), 8 * _CHUNK)
        ])
        labels = np.full(len(ag), -1, dtype=np.int32)
        labels[masks[0][img].all(axis=1)] = 0
        while (labels < 0).any():
            pid = int(np.flatnonzero(labels < 0)[0])
            full = Code(16, permute_word_many(ag.perms[pid], self.words).tolist())
            self.translators.append(_find_translator(self.code, full))
            masks.append(self._member(full))
            hit = (labels < 0) & masks[-1][img].all(axis=1)
            labels[hit] = len(masks) - 1
        rng = np.random.default_rng(0)
        for lab, t in enumerate(self.translators):
            ids = np.flatnonzero(labels == lab)
            for pid in rng.choice(ids, size=min(4, len(ids)), replace=False):
                full = Code(16, permute_word_many(ag.perms[pid], self.words).tolist())
                if full != translate(self.code, t):
                    raise CodeError("translate labelling inconsistent")
        self.block = labels
        # words x with x + C = t_j + C, i.e. t_j + Ker(C)
        self.block_words = [np.sort(self.kernel.array ^ t) for t in self.translators]

    @staticmethod
    def _member(c: Code) -> np.ndarray:
        m = np.zeros(1 << 16, dtype=bool)
        m[c.array] = True
        return m

    # ---------------------------------------------------------- arithmetic

    def act(self, pids, ys) -> np.ndarray:
        """``pi . y`` elementwise (broadcasting)."""
        return permute_word_many(self.ag.perms[np.asarray(pids)], np.asarray(ys))

    def mul(self, x1, p1, x2, p2) -> Tuple[np.ndarray, np.ndarray]:
        """Elementwise ``compose((x1,p1), (x2,p2))``."""
        return np.asarray(x1) ^ self.act(p1, x2), self.ag.mul(p1, p2)

    def inv(self, x, p) -> Tuple[np.ndarray, np.ndarray]:
        ip = self.ag.inv[np.asarray(p)]
        return self.act(ip, x), ip

    def conj(self, gx, gp, hx, hp) -> Tuple[np.ndarray, np.ndarray]:
        """``g h g^-1`` elementwise."""
        ax, ap = self.mul(gx, gp, hx, hp)
        ix, ip = self.inv(gx, gp)
        return self.mul(ax, ap, ix, ip)

    def conj_by_sym(self, spos, xs, pids) -> Tuple[np.ndarray, np.ndarray]:
        """Conjugate elements ``(x, pi)`` (x in C) by symmetries given by Sym position."""
        spos = np.asarray(spos)
        sid = self.sym[spos]
        nx = self.words[self.sym_act[spos, self.pos[np.asarray(xs)]]]
        return nx, self.ag.conj(sid, pids)

    def to_automorphisms(self, xs, pids):
        return [Automorphism(int(x), tuple(int(v) for v in self.ag.perms[p])) for x, p in zip(xs, pids)]

    def from_automorphisms(self, elements) -> Tuple[np.ndarray, np.ndarray]:
        xs = np.array([a.x for a in elements], dtype=np.int64)
        pids = self.ag.ids(np.array([a.p for a in elements], dtype=np.int64))
        return xs, pids

    def fixed_point_free(self, xs, pids) -> np.ndarray:
        """Elementwise: does ``(x, pi)`` move every codeword?"""
        xs = np.asarray(xs)
        pids = np.asarray(pids)
        out = np.empty(len(xs), dtype=bool)
        step = max(1, 8192 // max(1, self.M // 32))
        for lo in range(0, len(xs), step):
            img = self.act(pids[lo:lo + step, None], self.words[None, :]) ^ xs[lo:lo + step, None]
            out[lo:lo + step] = ~(img == self.words[None, :]).any(axis=1)
        return out


def _find_translator(code: Code, img: Code) -> int:
    """The minimal ``t`` in ``code`` with ``img = t + code`` (img must be a translate)."""
    for t in code.words:
        if img.wordset == translate(code, t).wordset:
            return t
    raise CodeError("image is not a translate of the code")


@lru_cache(maxsize=4)
def aut_context(code: Code) -> AutContext:
    return AutContext(code)
