from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propnr.constructions import hamming16, reed_muller
from propnr.gf2core import Code
from propnr.permgroup import (
    Automorphism,
    affine_group,
    compose,
    identity_perm,
    permute_word,
    permute_word_many,
    sym_ids_of_subcode,
)
from propnr.structure import (
    PropStructure,
    are_conjugate,
    canonical_form,
    centralizer_orders,
    conjugacy_classes,
    element_orders,
    enumerate_levels,
    fingerprint,
    fingerprint_from_table,
    format_structures,
    groups_isomorphic,
    groups_isomorphic_tables,
    is_normalized,
    load_structure,
    parse_structure,
    parse_structures,
    save_structure,
    structure_from_group,
    translation_structure,
    validate_structure,
)


# ------------------------------------------------------------ small groups


def cyclic_product(*ns: int) -> np.ndarray:
    """Cayley table of Z_n1 x ... x Z_nk, elements in mixed-radix order."""
    shape = ns
    elems = np.array(np.unravel_index(np.arange(int(np.prod(ns))), shape)).T
    summed = (elems[:, None, :] + elems[None, :, :]) % np.array(ns)
    return np.ravel_multi_index(tuple(np.moveaxis(summed, -1, 0)), shape)


def dihedral(n: int) -> np.ndarray:
    """D_n of order 2n: element (r, s) = rho^r sigma^s."""
    elems = [(r, s) for s in range(2) for r in range(n)]
    idx = {e: i for i, e in enumerate(elems)}
    t = np.empty((2 * n, 2 * n), dtype=np.int64)
    for i, (r1, s1) in enumerate(elems):
        for j, (r2, s2) in enumerate(elems):
            r = (r1 + (-r2 if s1 else r2)) % n
            t[i, j] = idx[(r, s1 ^ s2)]
    return t


def quaternion() -> np.ndarray:
    # unit quaternions +-1, +-i, +-j, +-k as (sign, unit)
    mult = {("1", u): (1, u) for u in "1ijk"}
    mult.update({(u, "1"): (1, u) for u in "1ijk"})
    mult.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1")})
    mult.update({("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j")})
    mult.update({("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})
    elems = [(s, u) for s in (1, -1) for u in "1ijk"]
    idx = {e: i for i, e in enumerate(elems)}
    t = np.empty((8, 8), dtype=np.int64)
    for a, (s1, u1) in enumerate(elems):
        for b, (s2, u2) in enumerate(elems):
            s, u = mult[(u1, u2)]
            t[a, b] = idx[(s1 * s2 * s, u)]
    return t


def relabel(table: np.ndarray, seed: int) -> np.ndarray:
    """Isomorphic copy under a random bijection fixing the identity."""
    rng = np.random.default_rng(seed)
    r = np.concatenate([[0], 1 + rng.permutation(len(table) - 1)])
    out = np.empty_like(table)
    out[r[:, None], r[None, :]] = r[table]
    return out


def test_element_orders_and_centralizers():
    t = dihedral(4)
    assert sorted(element_orders(t).tolist()) == [1, 2, 2, 2, 2, 2, 4, 4]
    assert sorted(centralizer_orders(t).tolist()) == [4, 4, 4, 4, 4, 4, 8, 8]
    q = quaternion()
    assert sorted(element_orders(q).tolist()) == [1, 2, 4, 4, 4, 4, 4, 4]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["z4z2", "d4", "q8", "z4z4", "z2z2z4", "d8"]))
def test_isomorphic_to_relabeled_copy(seed, name):
    t = {
        "z4z2": cyclic_product(4, 2),
        "d4": dihedral(4),
        "q8": quaternion(),
        "z4z4": cyclic_product(4, 4),
        "z2z2z4": cyclic_product(2, 2, 4),
        "d8": dihedral(8),
    }[name]
    assert groups_isomorphic_tables(t, relabel(t, seed)) is True
    assert fingerprint_from_table(t) == fingerprint_from_table(relabel(t, seed))


def test_non_isomorphic_small_groups():
    groups = [cyclic_product(8), cyclic_product(4, 2), cyclic_product(2, 2, 2), dihedral(4), quaternion()]
    for i, a in enumerate(groups):
        for j, b in enumerate(groups):
            assert groups_isomorphic_tables(a, b) is (i == j)


def test_budget_exhaustion_returns_none():
    t = cyclic_product(2, 2, 2, 2)
    assert groups_isomorphic_tables(t, relabel(t, 1), budget=0) is None


# ------------------------------------------------------------ structures


def test_translation_structure_of_linear_code():
    c = reed_muller(1, 4)
    s = translation_structure(c)
    assert validate_structure(s)
    assert s.identity_part() == sorted(c.words) or set(s.identity_part()) == c.wordset
    assert is_normalized(s)
    assert fingerprint(s).pairs == (((1, 32), 1), ((2, 32), 31))


def test_translation_structure_of_nonlinear_code_fails(nr):
    ok, why = translation_structure(nr).check()
    assert not ok and "leaves the code" in why


def test_z4_structure_valid(z4s, nr):
    assert validate_structure(z4s)
    assert z4s.code == nr
    assert z4s.num_distinct_perms() == 16
    assert not is_normalized(z4s)  # 16 * 32 != 256
    # Z4^4: 16 elements of order <= 2, all others of order 4, abelian
    fp = fingerprint(z4s)
    assert fp.pairs == (((1, 256), 1), ((2, 256), 15), ((4, 256), 240))


def test_cayley_table_is_group(z4s):
    t = z4s.cayley_table().astype(np.int64)
    n = len(t)
    assert (np.sort(t, axis=1) == np.arange(n)).all()
    assert (np.sort(t, axis=0) == np.arange(n)[:, None]).all()
    rng = np.random.default_rng(3)
    a, b, c = rng.integers(0, n, size=(3, 2000))
    assert np.array_equal(t[t[a, b], c], t[a, t[b, c]])


def test_star_matches_composition(z4s):
    rng = np.random.default_rng(4)
    w = z4s.words
    for x, y in rng.choice(w, size=(200, 2)):
        x, y = int(x), int(y)
        r = compose(z4s.element(x), z4s.element(y))
        assert r.x == z4s.star(x, y)
        assert r.p == z4s.perm_of[r.x]


def test_perturbed_structure_rejected(z4s):
    perm_of = dict(z4s.perm_of)
    x = next(w for w, p in perm_of.items() if p != identity_perm(16))
    perm_of[x] = identity_perm(16)
    ok, why = PropStructure(z4s.code, perm_of).check()
    assert not ok
    perm_of = dict(z4s.perm_of)
    perm_of[0] = perm_of[x]
    assert PropStructure(z4s.code, perm_of).check() == (False, "pi_0 is not the identity")
    perm_of = dict(z4s.perm_of)
    perm_of[x] = (0,) * 16
    assert not PropStructure(z4s.code, perm_of).check()[0]


def test_structure_from_group_rejects_non_regular():
    e = identity_perm(4)
    sw = (1, 0, 2, 3)
    with pytest.raises(Exception):
        structure_from_group(Code(4, [0, 3]), [Automorphism(0, e), Automorphism(0, sw)])


def test_conjugation_invariants(z4s):
    ag = affine_group()
    sym = sym_ids_of_subcode(z4s.code)
    rng = np.random.default_rng(5)
    for g in rng.choice(sym, size=3):
        t = z4s.conjugate_by_perm(tuple(ag.perms[g]))
        assert t.code == z4s.code
        assert validate_structure(t)
        assert fingerprint(t) == fingerprint(z4s)
        assert groups_isomorphic(t, z4s) is True
        assert canonical_form(t)[0] == canonical_form(z4s)[0]
        assert are_conjugate(t, z4s)


def test_conjugation_outside_sym_moves_code(z4s, h16):
    ag = affine_group()
    sym = set(sym_ids_of_subcode(z4s.code).tolist())
    g = next(i for i in range(len(ag)) if i not in sym)
    t = z4s.conjugate_by_perm(tuple(ag.perms[g]))
    assert t.code != z4s.code and t.code.issubset(h16)
    assert validate_structure(t)


def test_conjugacy_classes_groups_conjugates(z4s):
    ag = affine_group()
    sym = sym_ids_of_subcode(z4s.code)
    ss = [z4s] + [z4s.conjugate_by_perm(tuple(ag.perms[g])) for g in sym[:3]]
    assert conjugacy_classes(ss) == [[0, 1, 2, 3]]


def test_file_roundtrip(z4s, tmp_path):
    p = tmp_path / "s.txt"
    save_structure(z4s, p)
    assert load_structure(p) == z4s
    t = translation_structure(reed_muller(1, 4))
    assert parse_structures(format_structures([z4s, t])) == [z4s, t]
    with pytest.raises(Exception):
        parse_structure("16 1\n" + "0" * 16 + "\n0 1 2\n")


# ------------------------------------------------------------ enumeration


def involution_classes_oracle(n: Code) -> int:
    """Sym(N)-classes of fixed-point-free involutions of Aut(N), found directly.

    Works from the definition: ``(x, pi)`` with pi a symmetry of the span and
    ``x + pi.N = N``; an involution needs ``pi^2 = 1`` and ``pi.x = x``.
    """
    ag = affine_group()
    e = ag.id_of(identity_perm(16))
    words = n.array
    member = np.zeros(1 << 16, dtype=bool)
    member[words] = True
    invols = []
    for pid in np.flatnonzero(ag.sq == e):
        img = permute_word_many(ag.perms[pid], words)
        # 0 is fixed by pi, so x lies in N
        xs = words[member[words[:, None] ^ img[None, :]].all(axis=1)]
        xs = xs[(xs != 0) & (permute_word_many(ag.perms[pid], xs) == xs)]
        moves_all = ~((xs[:, None] ^ img[None, :]) == words[None, :]).any(axis=1)
        invols += [(int(x) << 20) | int(pid) for x in xs[moves_all]]
    assert invols
    # sweep out Sym(N)-orbits
    sym = np.sort(sym_ids_of_subcode(n))
    remaining = set(invols)
    orbits = 0
    while remaining:
        key = next(iter(remaining))
        x, pid = key >> 20, key & ((1 << 20) - 1)
        nx = permute_word_many(ag.perms[sym], x)
        orbit = (nx.astype(np.int64) << 20) | ag.conj(sym, pid)
        remaining -= set(orbit.tolist())
        orbits += 1
    return orbits


@pytest.mark.medium
def test_level_one_matches_direct_oracle(nr):
    levels = enumerate_levels(nr, stop_level=1)
    assert len(levels[1]) == involution_classes_oracle(nr) == 7


@pytest.mark.medium
def test_checkpoint_resume(nr, tmp_path):
    first = enumerate_levels(nr, checkpoint_dir=tmp_path, stop_level=2)
    assert (tmp_path / "level_2.npz").exists()
    logs = []
    again = enumerate_levels(nr, checkpoint_dir=tmp_path, log=logs.append, stop_level=3)
    assert "loaded" in logs[1] and "loaded" not in logs[2]
    assert [len(l) for l in again] == [1, 7, 39, 207]
    for a, b in zip(first[2], again[2]):
        assert np.array_equal(a.xs, b.xs) and np.array_equal(a.pids, b.pids)
        assert np.array_equal(a.stab, b.stab)


@pytest.mark.medium
def test_partial_groups_are_semiregular(nr):
    from propnr.autgroup import aut_context

    ctx = aut_context(nr)
    levels = enumerate_levels(nr, stop_level=2)
    for s in levels[2]:
        assert len(set(s.xs.tolist())) == 4
        assert ctx.fixed_point_free(s.xs[1:], s.pids[1:]).all()
        g = s.group(ctx)
        assert len(g) == 4


LEVEL_COUNTS = [7, 39, 207, 684, 1137, 1289, 858, 338]


@pytest.mark.long
def test_cached_levels_are_semiregular(nr):
    from conftest import results_dir
    from propnr.autgroup import aut_context
    from propnr.structure import _load_level

    levels = results_dir() / "levels"
    if not (levels / "level_8.npz").exists():
        pytest.skip("long-tier cache absent")
    ctx = aut_context(nr)
    counts = []
    for k in range(1, 9):
        level = _load_level(levels / f"level_{k}.npz", ctx)
        counts.append(len(level))
        for s in level:
            assert len(s.xs) == 1 << k and len(set(s.xs.tolist())) == 1 << k
            assert ctx.fixed_point_free(s.xs[1:], s.pids[1:]).all()
    # class counts rise to level 6 and then fall to the 338 regular classes
    assert counts == LEVEL_COUNTS


def test_fingerprint_matches_composition_oracle(z4s):
    from collections import Counter

    from propnr.permgroup import element_order

    els = z4s.elements()[::3]
    full = z4s.elements()
    cnt = Counter()
    for a in els:
        cnt[(element_order(a), sum(compose(a, b) == compose(b, a) for b in full))] += 1
    fp = dict(fingerprint(z4s).pairs)
    assert all(fp.get(k, 0) >= v for k, v in cnt.items())


def metacyclic(m: int, n: int, r: int) -> np.ndarray:
    """Z_m x| Z_n with y x y^-1 = x^r; element (i, j) = x^i y^j at index i * n + j."""
    i, j = np.divmod(np.arange(m * n), n)
    rj = np.array([pow(r, int(k), m) for k in range(n)])
    ii = (i[:, None] + rj[j][:, None] * i[None, :]) % m
    jj = (j[:, None] + j[None, :]) % n
    return ii * n + jj


def metacyclic_family(order: int):
    out = {}
    for m in (2, 4, 8, 16, 32):
        n = order // m
        if n < 2:
            continue
        for r in range(1, m, 2):
            if pow(r, n, m) == 1:
                out[(m, n, r)] = metacyclic(m, n, r)
    return out


def two_generator_oracle(a: np.ndarray, gx: int, gy: int, b: np.ndarray) -> bool:
    """Brute force over images of the two generators of ``a``; words x^i y^j cover ``a``."""
    n = len(a)

    def powers(t, g):
        out, cur = [0], 0
        for _ in range(n):
            cur = int(t[cur, g])
            if cur == 0:
                break
            out.append(cur)
        return out

    px, py = powers(a, gx), powers(a, gy)
    word = {}
    for i, u in enumerate(px):
        for j, v in enumerate(py):
            word.setdefault(int(a[u, v]), (i, j))
    assert len(word) == n
    orders_b = element_orders(b)
    for X in np.flatnonzero(orders_b == len(px)):
        qx = powers(b, int(X))
        for Y in np.flatnonzero(orders_b == len(py)):
            qy = powers(b, int(Y))
            phi = np.empty(n, dtype=np.int64)
            for g, (i, j) in word.items():
                phi[g] = b[qx[i], qy[j]]
            if len(set(phi.tolist())) == n and (phi[a] == b[phi[:, None], phi[None, :]]).all():
                return True
    return False


@pytest.mark.medium
@pytest.mark.parametrize("order", [32, 64])
def test_isomorphism_matches_oracle_on_metacyclic_groups(order):
    fam = metacyclic_family(order)
    keys = sorted(fam)
    by_fp = {}
    for k in keys:
        by_fp.setdefault(fingerprint_from_table(fam[k]), []).append(k)
    hard = 0
    for ks in by_fp.values():
        for i, k1 in enumerate(ks):
            for k2 in ks[i + 1:]:
                m, n, _ = k1
                expect = two_generator_oracle(fam[k1], n, 1, fam[k2])
                assert groups_isomorphic_tables(fam[k1], fam[k2]) is expect
                hard += 1
    assert hard > 0
