import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from g2wall.threeman import (AbelianGroupPresentation, ConeSmoothingInput, cone_smoothings, connect_sum_i,
                             direct_sum, i_invariant, rho_kernel, smith_decomposition, smith_normal_form)


def _det(m):
    if len(m) == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * _det([r[:j] + r[j + 1:] for r in m[1:]]) for j in range(len(m)))


def determinantal_divisors(m):
    """Oracle: D_k = gcd of all k x k minors; d_k = D_k / D_{k-1}."""
    r, c = len(m), len(m[0])
    out, prev = [], 1
    for k in range(1, min(r, c) + 1):
        g = 0
        for rows in itertools.combinations(range(r), k):
            for cols in itertools.combinations(range(c), k):
                g = math.gcd(g, _det([[m[i][j] for j in cols] for i in rows]))
        if g == 0:
            out.append(0)
            prev = 0
            continue
        out.append(g // prev if prev else 0)
        prev = g
    return out


matrices = st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)))


@given(matrices)
def test_smith_matches_determinantal_divisors(m):
    divs, rank = smith_normal_form(m)
    assert [abs(d) for d in divs] == determinantal_divisors(m)
    assert all(b % a == 0 for a, b in zip(divs, divs[1:]) if a)


@given(matrices)
def test_smith_transforms_are_exact(m):
    sf = smith_decomposition(m)
    U, V = [list(r) for r in sf.U], [list(r) for r in sf.V]
    prod = [[sum(U[i][k] * m[k][l] * V[l][j] for k in range(len(m)) for l in range(len(m[0])))
             for j in range(len(m[0]))] for i in range(len(m))]
    for i, row in enumerate(prod):
        for j, x in enumerate(row):
            assert x == (sf.divisors[i] if i == j else 0)
    assert abs(_det(U)) == 1 and abs(_det(V)) == 1


def test_three_generators_four_relations():
    # Z^3 modulo four relations: order equals the gcd of the 3 x 3 minors
    rels = [[2, 4, 0], [0, 6, 3], [4, 2, 6], [2, 0, 9]]
    p = AbelianGroupPresentation(3, tuple(map(tuple, rels)))
    d = determinantal_divisors(rels)
    assert p.order() == d[0] * d[1] * d[2]


def test_lens_space_and_s1xs2():
    assert i_invariant(AbelianGroupPresentation(1, ((5,),))) == 5
    assert i_invariant(AbelianGroupPresentation(1, ())) == 0
    assert i_invariant(AbelianGroupPresentation(0, ())) == 1


@given(st.lists(st.lists(st.integers(-5, 5), min_size=2, max_size=2), max_size=3),
       st.lists(st.lists(st.integers(-5, 5), min_size=1, max_size=1), max_size=2))
def test_connect_sum_multiplicative(r1, r2):
    p1 = AbelianGroupPresentation(2, tuple(map(tuple, r1)))
    p2 = AbelianGroupPresentation(1, tuple(map(tuple, r2)))
    assert i_invariant(direct_sum(p1, p2)) == connect_sum_i(i_invariant(p1), i_invariant(p2))


def random_cone_input(rng: random.Random):
    """A (presentation, rho) with rank-one kernel, or None."""
    g = rng.randint(1, 3)
    rels = [[rng.randint(-4, 4) for _ in range(g)] for _ in range(rng.randint(0, g))]
    rho = [[rng.randint(-3, 3) for _ in range(g)] for _ in range(2)]
    inp = ConeSmoothingInput(AbelianGroupPresentation(g, tuple(map(tuple, rels))), tuple(map(tuple, rho)))
    return inp if len(rho_kernel(inp)) == 1 else None


def _in_kernel(inp, lam):
    # lam is in the kernel iff adding its image as a relation does not change the group
    p = inp.presentation
    return p.with_relations([inp.image(lam)]).invariant_factors() == p.invariant_factors()


def test_kernel_slope_is_in_kernel():
    rng = random.Random(4)
    seen = 0
    while seen < 100:
        inp = random_cone_input(rng)
        if inp is None:
            continue
        seen += 1
        b = rho_kernel(inp)[0]
        assert _in_kernel(inp, b)
        g = math.gcd(*b)
        for k in range(2, g + 1):
            if g % k == 0:
                assert not _in_kernel(inp, (b[0] // k, b[1] // k))


def test_cone_smoothing_identities():
    rng = random.Random(7)
    seen = 0
    while seen < 200:
        inp = random_cone_input(rng)
        if inp is None:
            continue
        seen += 1
        rep = cone_smoothings(inp)
        for c, i in zip(rep.pairings, rep.i_fillings):
            assert i == abs(c) * rep.i_link
        assert rep.signed_sum == 0
        assert rep.ok


def test_worked_example():
    inp = ConeSmoothingInput.from_json({"generators": 2, "relations": [[0, 6]], "rho": [[1, 0], [2, 3]]})
    rep = cone_smoothings(inp)
    assert rep.i_link == 3
    assert rep.i_fillings == (6, 12, 18)
    assert rep.to_json()["check"] == "PASS"


def test_bad_input_rejected():
    with pytest.raises(ValueError):
        ConeSmoothingInput.from_json({"generators": 2, "relations": []})
    with pytest.raises(ValueError):
        ConeSmoothingInput.from_json({"generators": 2, "relations": [], "rho": [[1, 0]]})
