import json
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from g2wall.g2forms import (PHI0, STAR_PHI0, Form, NotPositiveError, OrientedPlane, associative_plane,
                            calibration_value, coassociative_complement, coassociative_witness, cross,
                            cy_decomposition_check, e, find_frame, is_coassociative, pullback,
                            random_orthonormal_pair, reference_planes, stabilizer_dimension, tameness_check)


def _perm_parity(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def hodge_star(f: Form) -> Form:
    """Oracle: Euclidean Hodge star from the permutation sign of (I, I^c)."""
    out = {}
    for idx, c in f.terms.items():
        comp = tuple(i for i in range(7) if i not in idx)
        out[comp] = _perm_parity(idx + comp) * c
    return Form(7 - f.degree, out)


def test_star_phi0_is_hodge_dual():
    assert hodge_star(PHI0) == STAR_PHI0
    vol = PHI0.wedge(STAR_PHI0)
    assert vol.terms == {tuple(range(7)): Fraction(7)}


def test_reference_values_exact():
    assert calibration_value(PHI0, OrientedPlane((e(1), e(2), e(3)))) == 1
    assert calibration_value(PHI0, OrientedPlane((e(3), e(5), e(6)))) == -1
    assert calibration_value(STAR_PHI0, OrientedPlane((e(4), e(5), e(6), e(7)))) == 1
    assert calibration_value(STAR_PHI0, OrientedPlane((e(1), e(2), e(4), e(7)))) == -1
    for p in reference_planes():
        assert calibration_value(PHI0, p) == 1


def test_cross_product_table():
    assert cross(e(1), e(2)) == e(3)
    assert cross(e(2), e(1)) == [-x for x in e(3)]
    assert cross(e(1), e(1)) == [0] * 7


def test_cross_product_identities():
    rng = np.random.default_rng(0)
    for _ in range(200):
        u, v = rng.normal(size=7), rng.normal(size=7)
        w = np.array(cross(u, v))
        assert abs(w @ u) < 1e-12 and abs(w @ v) < 1e-12
        assert abs(w @ w - ((u @ u) * (v @ v) - (u @ v) ** 2)) < 1e-9


def test_associative_planes_calibrate():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p = associative_plane(*random_orthonormal_pair(rng))
        assert abs(calibration_value(PHI0, p) - 1) < 1e-12


def test_calibration_inequality():
    rng = np.random.default_rng(2)
    for _ in range(500):
        q, _ = np.linalg.qr(rng.normal(size=(7, 3)))
        assert calibration_value(PHI0, OrientedPlane(tuple(map(tuple, q.T)))) <= 1 + 1e-12
        q4, _ = np.linalg.qr(rng.normal(size=(7, 4)))
        assert calibration_value(STAR_PHI0, OrientedPlane(tuple(map(tuple, q4.T)))) <= 1 + 1e-12


def test_coassociative_complement():
    rng = np.random.default_rng(3)
    for _ in range(50):
        V = associative_plane(*random_orthonormal_pair(rng))
        W = coassociative_complement(V)
        assert is_coassociative(W, tol=1e-10)
        assert abs(calibration_value(STAR_PHI0, W) - 1) < 1e-10


def test_cy_decomposition():
    assert cy_decomposition_check()
    assert not cy_decomposition_check(omega_scale=2)


def test_stabilizer_is_g2():
    assert stabilizer_dimension() == 14
    assert stabilizer_dimension(Form.from_1based(3, {(1, 2, 3): 1})) != 14


def test_form_algebra():
    a = Form.from_1based(1, {(1,): 1})
    b = Form.from_1based(1, {(2,): 1})
    assert a.wedge(b) == b.wedge(a).scale(-1)
    assert a.wedge(a) == Form(2, {})
    assert Form.from_json(json.loads(json.dumps(PHI0.to_json()))) == PHI0
    assert Form.from_1based(3, {(2, 1, 3): 1}) == Form.from_1based(3, {(1, 2, 3): -1})


@given(st.lists(st.floats(-2, 2), min_size=49, max_size=49))
def test_pullback_matches_direct_evaluation(xs):
    b = np.array(xs).reshape(7, 7)
    pb = pullback(PHI0, b, tol=0)
    for idx in list(combinations(range(7), 3))[:10]:
        vecs = [np.eye(7)[i] for i in idx]
        direct = PHI0.evaluate([b @ v for v in vecs])
        assert abs(pb.terms.get(idx, 0.0) - direct) < 1e-9


# -- tameness -------------------------------------------------------------------

def test_torsion_free_pair_is_tame():
    rep = tameness_check(PHI0, STAR_PHI0, samples=1000, seed=0)
    assert rep.passed
    assert abs(rep.minimum - 1) < 1e-12


def test_scaled_phi_is_tame_and_negated_is_not():
    assert abs(tameness_check(PHI0.scale(3), STAR_PHI0, 200).minimum - 3) < 1e-12
    assert not tameness_check(PHI0.scale(-1), STAR_PHI0, 200).passed
    assert not tameness_check(Form.from_1based(3, {(1, 2, 3): -1}), STAR_PHI0, 200).passed


def test_tameness_is_a_convex_cone():
    # positive combinations of tame phi's stay tame for fixed psi
    phi2 = PHI0 + Form.from_1based(3, {(1, 2, 3): Fraction(1, 2)})
    r1 = tameness_check(phi2, STAR_PHI0, 200, seed=1)
    r2 = tameness_check(PHI0.scale(2) + phi2, STAR_PHI0, 200, seed=1)
    assert r1.passed and r2.passed
    assert r2.minimum >= 2 + r1.minimum - 1e-9


def test_frame_recovers_pulled_back_psi():
    rng = np.random.default_rng(4)
    a = np.eye(7) + 0.05 * rng.normal(size=(7, 7))
    psi = pullback(STAR_PHI0, a)
    b = find_frame(psi)
    assert np.linalg.det(b) > 0
    assert np.allclose(pullback(STAR_PHI0, b).components(), psi.components(), atol=1e-9)
    phi = pullback(PHI0, a)
    rep = tameness_check(phi, psi, 200)
    assert rep.passed and abs(rep.minimum - 1) < 1e-8


def test_non_positive_psi_rejected():
    with pytest.raises(NotPositiveError):
        find_frame(Form.from_1based(4, {(1, 2, 3, 4): 1}), restarts=2)


def test_coassociative_witness():
    V = OrientedPlane((e(1, False), e(2, False), e(4, False)))
    assert abs(calibration_value(PHI0, V)) < 1e-15
    W = coassociative_witness(V)
    assert is_coassociative(W, tol=1e-10)
    m = W.matrix()
    for v in V.basis:
        assert np.allclose(m @ (m.T @ np.array(v)), v)
