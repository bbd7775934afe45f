from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propnr.gf2core import (
    Code,
    CodeError,
    basis,
    coset_decomposition,
    distance,
    format_code,
    in_span,
    is_linear,
    kernel,
    load_code,
    min_distance,
    parse_code,
    popcount_array,
    rank,
    save_code,
    span,
    span_words,
    translate,
    weight,
    weight_distribution,
    word_from_bits,
    word_from_str,
    word_to_str,
)

words8 = st.integers(min_value=0, max_value=255)


def brute_span(vectors):
    out = {0}
    for v in vectors:
        out |= {w ^ v for w in out}
    return out


@given(words8, words8)
def test_distance_is_weight_of_sum(x, y):
    assert distance(x, y) == weight(x ^ y) == bin(x ^ y).count("1")


@given(st.lists(st.integers(0, 1), min_size=1, max_size=16))
def test_word_string_roundtrip(bits):
    w = word_from_bits(bits)
    s = word_to_str(w, len(bits))
    assert s == "".join(map(str, bits))
    assert word_from_str(s) == w


def test_popcount_array():
    a = np.arange(1 << 12)
    assert popcount_array(a).tolist() == [bin(int(v)).count("1") for v in a]


@settings(max_examples=60)
@given(st.lists(words8, max_size=6))
def test_span_matches_brute_force(vectors):
    assert set(span_words(basis(vectors)).tolist()) == brute_span(vectors)
    assert rank(vectors) == len(basis(vectors))
    assert 2 ** rank(vectors) == len(brute_span(vectors))


@settings(max_examples=60)
@given(st.lists(words8, max_size=5), words8)
def test_in_span(vectors, v):
    assert in_span(v, vectors) == (v in brute_span(vectors))


def brute_kernel(c: Code):
    return {v for v in c.words if all((v ^ w) in c.wordset for w in c.words)}


@settings(max_examples=50)
@given(st.sets(words8, min_size=1, max_size=20))
def test_kernel_definition(ws):
    c = Code(8, ws | {0})
    k = kernel(c)
    assert k.wordset == brute_kernel(c)
    assert is_linear(k)


@settings(max_examples=40)
@given(st.lists(words8, min_size=1, max_size=4))
def test_linear_code_is_its_own_kernel(gens):
    c = Code(8, span_words(basis(gens)).tolist())
    assert is_linear(c)
    assert kernel(c) == c
    assert span(c).code == c


def test_code_normalizes_words():
    c = Code(4, [3, 1, 3, 0])
    assert c.words == (0, 1, 3)
    assert len(c) == 3 and c.is_reduced
    assert c == Code(4, [0, 1, 3]) and hash(c) == hash(Code(4, (3, 1, 0)))


def test_min_distance_and_weights():
    rep = Code(3, [0, 7])
    assert min_distance(rep) == 3
    assert weight_distribution(rep) == {0: 1, 3: 1}
    assert rep.parameters() == (3, 2, 3)
    with pytest.raises(CodeError):
        min_distance(Code(3, [5]))


def test_kernel_needs_reduced_code():
    with pytest.raises(CodeError):
        kernel(Code(3, [1, 2]))


def test_translate_and_length_check():
    c = Code(4, [0, 3])
    assert translate(c, 1).words == (1, 2)
    with pytest.raises(CodeError):
        translate(c, 1 << 5)


def test_coset_decomposition_partitions_code():
    # the union of two cosets of a linear code is nonlinear with that kernel
    lin = span_words([0b0011, 0b1100]).tolist()
    c = Code(4, lin + [w ^ 0b0101 for w in lin])
    dec = coset_decomposition(c)
    cos = dec.cosets()
    assert sum(len(k) for k in cos) == len(c)
    assert set().union(*[k.wordset for k in cos]) == c.wordset
    for a, b in itertools.combinations(cos, 2):
        assert a.isdisjoint(b)
    for w in c.words:
        assert w in cos[dec.coset_of(w)]


def test_code_file_roundtrip(tmp_path):
    c = Code(6, [0, 5, 17, 63])
    text = format_code(c)
    assert text.splitlines()[0] == "6 4"
    assert parse_code(text) == c
    save_code(c, tmp_path / "c.txt")
    assert load_code(tmp_path / "c.txt") == c


def test_parse_code_rejects_bad_input():
    with pytest.raises(CodeError):
        parse_code("4 2\n0000\n011\n")
    with pytest.raises(CodeError):
        parse_code("4 3\n0000\n0110\n")
