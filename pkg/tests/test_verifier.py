import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vdw.colorings import Certificate, Coloring, assemble_certificate, rabung_coloring
from vdw.errors import DomainError, ResourceLimitError
from vdw.verifier import (
    ApWitness,
    brute_force_W,
    find_mono_ap,
    find_mono_ap_cyclic,
    has_mono_ap,
    has_mono_ap_cyclic,
    longest_ap,
    maximal_colorings,
    naive_has_mono_ap,
    naive_has_mono_ap_cyclic,
    naive_longest_ap,
    verify_certificate,
)

L = Coloring.from_letters


def _witness_holds(arr, w, cyclic=False):
    n = len(arr)
    pos = [(w.start + i * w.spacing) for i in range(w.length)]
    if cyclic:
        pos = [x % n for x in pos]
        assert len(set(pos)) == w.length
    else:
        assert 0 <= pos[0] and pos[-1] < n
    assert all(arr[x] == w.color for x in pos)


# ---------------------------------------------------------------- examples


def test_longest_ap_examples():
    assert longest_ap(L("BGGBBGGB")).length == 2
    assert longest_ap(L("BGGBBGGBB")) == ApWitness(0, 0, 4, 3)
    assert longest_ap(L("BGGBBGGBG")) == ApWitness(1, 2, 3, 3)


def test_longest_ap_tie_break():
    # two runs of length 2 with spacing 1: the earlier one wins
    assert longest_ap(Coloring([0, 1, 1, 0, 0], 2)) == ApWitness(1, 1, 1, 2)
    assert longest_ap(Coloring([1], 2)) == ApWitness(1, 0, 1, 1)


def test_has_mono_ap_examples():
    assert not has_mono_ap(L("BGGBBGGB"), 3)
    assert not has_mono_ap(assemble_certificate(rabung_coloring(11, 2, 2), 4).coloring, 4)
    assert has_mono_ap(Coloring([1] * 5, 2), 5)


def test_cyclic_examples():
    assert has_mono_ap_cyclic(Coloring([0] * 6, 2), 3)
    z5 = [0, 0, 1, 1, 0]
    assert has_mono_ap_cyclic(z5, 3) == naive_has_mono_ap_cyclic(z5, 3)
    assert has_mono_ap_cyclic(z5, 3)  # 4, 0, 1 with spacing 1
    assert has_mono_ap_cyclic(L("BGGBBGGB"), 3) == naive_has_mono_ap_cyclic([0, 1, 1, 0, 0, 1, 1, 0], 3)


def test_cyclic_needs_distinct_terms():
    # spacing 4 in Z_8 revisits residues after two steps, so it never counts
    arr = [0, 1, 1, 0, 0, 1, 1, 0]
    assert not has_mono_ap_cyclic(arr, 3)
    with pytest.raises(DomainError):
        has_mono_ap_cyclic([0, 1], 3)


# ---------------------------------------------------------------- oracle agreement


@settings(max_examples=1000, deadline=None)
@given(st.integers(2, 4).flatmap(lambda r: st.tuples(st.just(r), st.lists(st.integers(0, r - 1), min_size=1, max_size=200))), st.integers(3, 6))
def test_scanner_matches_naive(rc, k):
    r, colors = rc
    assert has_mono_ap(colors, k) == naive_has_mono_ap(colors, k)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=80))
def test_longest_ap_matches_naive(colors):
    w = longest_ap(colors)
    assert w.length == naive_longest_ap(colors)
    _witness_holds(colors, w)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=3, max_size=40), st.integers(3, 5))
def test_cyclic_matches_naive(colors, k):
    if len(colors) < k:
        return
    w = find_mono_ap_cyclic(colors, k)
    assert (w is not None) == naive_has_mono_ap_cyclic(colors, k)
    if w is not None:
        _witness_holds(colors, w, cyclic=True)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=120), st.integers(3, 7))
def test_witness_is_canonical(colors, k):
    w = find_mono_ap(colors, k)
    if w is None:
        return
    _witness_holds(colors, w)
    # nothing with a smaller spacing, or the same spacing and earlier start
    for d in range(1, w.spacing + 1):
        last = w.start if d == w.spacing else len(colors)
        for a in range(0, min(last, len(colors) - (k - 1) * d)):
            assert len({colors[a + i * d] for i in range(k)}) > 1


# ---------------------------------------------------------------- properties


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=100), st.integers(3, 8))
def test_monotone_in_k(colors, k):
    if has_mono_ap(colors, k):
        assert all(has_mono_ap(colors, j) for j in range(1, k))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=2, max_size=100), st.data())
def test_restriction_keeps_freedom(colors, data):
    k = 4
    if has_mono_ap(colors, k):
        return
    a = data.draw(st.integers(0, len(colors) - 1))
    b = data.draw(st.integers(a + 1, len(colors)))
    assert not has_mono_ap(colors[a:b], k)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=5, max_size=60), st.integers(3, 5))
def test_cyclic_dominates_linear(colors, k):
    if has_mono_ap(colors, k):
        assert has_mono_ap_cyclic(colors, k)


# ---------------------------------------------------------------- certificates


def test_verify_certificate_examples():
    ok = verify_certificate(assemble_certificate(rabung_coloring(11, 2, 2), 4))
    assert isinstance(ok, Certificate) and ok.verified == "direct" and ok.n == 34
    ok = verify_certificate(assemble_certificate(rabung_coloring(97, 5, 3), 4))
    assert ok.verified == "direct" and ok.n == 292
    bad = verify_certificate(Certificate(Coloring([0] * 10, 2), 3))
    assert bad == ApWitness(0, 0, 1, 3)


def test_verify_cap(monkeypatch):
    cert = Certificate(Coloring([0, 1] * 30, 2), 3)
    with pytest.raises(ResourceLimitError, match="cap"):
        verify_certificate(cert, cap=50)
    monkeypatch.setenv("VDW_CAP", "10")
    with pytest.raises(ResourceLimitError):
        verify_certificate(cert)


# ---------------------------------------------------------------- exact solver


def test_brute_force_small():
    assert brute_force_W(3, 2, 20) == 9
    assert brute_force_W(3, 2, 8) is None
    assert brute_force_W(4, 2, 40) == 35
    assert brute_force_W(4, 2, 34) is None


def test_brute_force_w33():
    assert brute_force_W(3, 3, 40) == 27


def test_brute_force_matches_enumeration():
    # exhaustive over all 2-colorings, no pruning, as an independent check
    def longest_free(k, limit):
        best = 0
        for n in range(1, limit + 1):
            if any(not naive_has_mono_ap(c, k) for c in itertools.product((0, 1), repeat=n)):
                best = n
        return best

    assert brute_force_W(3, 2, 12) == longest_free(3, 12) + 1


def test_maximal_colorings_of_length_eight():
    found = {tuple(c) for c in maximal_colorings(3, 2, 8)}
    oracle = {
        c for c in itertools.product((0, 1), repeat=8)
        if c[0] == 0 and not naive_has_mono_ap(c, 3)
    }
    assert found == oracle
    assert (0, 1, 1, 0, 0, 1, 1, 0) in found
    assert maximal_colorings(3, 2, 9) == []
