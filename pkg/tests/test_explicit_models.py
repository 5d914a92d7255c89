import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from g2wall import explicit_models as em
from g2wall.g2forms import PHI0


# -- Lawlor necks -----------------------------------------------------------------

def mp_angle(a, k):
    """Oracle: the angle integral over the real line with mpmath."""
    a1, a2, a3 = (mpmath.mpf(x) for x in a)

    def f(x):
        p = (a1 + a2 + a3) + (a1 * a2 + a1 * a3 + a2 * a3) * x ** 2 + a1 * a2 * a3 * x ** 4
        return mpmath.mpf(a[k]) / ((1 + mpmath.mpf(a[k]) * x ** 2) * mpmath.sqrt(p))
    return float(mpmath.quad(f, [-mpmath.inf, 0, mpmath.inf]))


def test_symmetric_neck():
    ang = em.lawlor_angles(em.LawlorParams((1, 1, 1)))
    for phi in ang.phi:
        assert abs(phi - math.pi / 3) < 1e-10
    assert abs(ang.s - 1 / 3) < 1e-12


def test_angles_match_oracle():
    for a in [(0.3, 2.0, 5.0), (1.0, 7.5, 0.2)]:
        ang = em.lawlor_angles(em.LawlorParams(a))
        for k in range(3):
            assert abs(ang.phi[k] - mp_angle(a, k)) < 1e-10


def test_angle_sum_is_pi():
    rng = random.Random(0)
    for _ in range(40):
        a = tuple(rng.uniform(0.1, 10) for _ in range(3))
        assert abs(em.lawlor_angles(em.LawlorParams(a)).total - math.pi) < 1e-9


def test_inversion_round_trip():
    rng = random.Random(1)
    for _ in range(5):
        a = tuple(rng.uniform(0.3, 5) for _ in range(3))
        ang = em.lawlor_angles(em.LawlorParams(a))
        back = em.lawlor_invert(ang.phi[0], ang.phi[1], ang.s)
        assert max(abs(x - y) for x, y in zip(a, back.a)) < 1e-6


def test_invert_rejects_bad_angles():
    with pytest.raises(ValueError):
        em.lawlor_invert(2.0, 2.0, 0.1)
    with pytest.raises(ValueError):
        em.lawlor_invert(1.0, 1.0, -1)
    with pytest.raises(ValueError):
        em.LawlorParams((1, 0, 1))


def test_neck_profile():
    p = em.LawlorParams((1.0, 2.0, 0.5))
    z0 = em.lawlor_z(p, 0.0)
    assert np.allclose(np.abs(z0), [1 / math.sqrt(x) for x in p.a])
    far = em.lawlor_z(p, 1e6)
    ang = em.lawlor_angles(p)
    assert np.allclose(np.angle(far), ang.phi, atol=1e-5)


def test_neck_is_special_lagrangian():
    p = em.LawlorParams((1.0, 2.0, 0.5))
    rng = np.random.default_rng(0)
    h = 1e-5
    phases = []
    for _ in range(10):
        y = rng.uniform(-3, 3)
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        t1 = np.cross(x, rng.normal(size=3))
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(x, t1)
        vs = [(em.lawlor_point(p, y + h, x) - em.lawlor_point(p, y - h, x)) / (2 * h)]
        for t in (t1, t2):
            vs.append((em.lawlor_point(p, y, x + h * t) - em.lawlor_point(p, y, x - h * t)) / (2 * h))
        for i in range(3):
            for j in range(i + 1, 3):
                assert abs(np.sum(np.conj(vs[i]) * vs[j]).imag) < 1e-6
        phases.append(np.linalg.det(np.array(vs)))
    # the phase is constant modulo pi (orientation of the frame is arbitrary)
    ref = phases[0] / abs(phases[0])
    for d in phases:
        assert abs((d / ref).imag) / abs(d) < 1e-5


def test_asymptotic_rate():
    s = 0.01
    ak = (1 / (3 * s)) ** (2 / 3)
    p = em.LawlorParams((ak, 2 * ak, ak / 2))
    rep = em.lawlor_asymptote_check(p, [10, 20, 40], direction=(1, 2, 3))
    for ratio in rep.ratios():
        assert abs(ratio - 1 / 16) < 0.01


# -- Harvey-Lawson cone -------------------------------------------------------------

def test_cone_membership_exact():
    z = [(3, 4), (5, 0), (Fraction(3), Fraction(-4))]
    res, pos = em.hl_cone_membership_exact(z, 0)
    assert res == (0, 0, 0) and pos
    res, _ = em.hl_cone_membership_exact([(2, 0), (1, 0), (1, 0)], 1, 3)
    assert res == (0, 0, 0)
    res, _ = em.hl_cone_membership_exact([(1, 1), (1, 0), (1, 0)], 0)
    assert res != (0, 0, 0)


def test_smoothing_points_satisfy_equations():
    rng = np.random.default_rng(1)
    for a in (1, 2, 3):
        for _ in range(20):
            z = em.hl_point(a, rng.uniform(0.1, 2), rng.uniform(-3, 3, 2), 0.3)
            res, pos = em.hl_cone_membership(z, a, 0.3)
            assert max(abs(r) for r in res) < 1e-12 and pos


def test_zeta_sections_sum_to_zero():
    z = np.array([1 + 1j, 2 - 1j, 0.5j])
    assert np.allclose(em.zeta(1, z) + em.zeta(2, z) + em.zeta(3, z), 0)


@pytest.mark.parametrize("a", [1, 2, 3])
def test_graph_residual_is_quadratic(a):
    r1 = em.hl_graph_check(a, 1e-3, samples=20)
    r2 = em.hl_graph_check(a, 2e-3, samples=20)
    assert r1 < 1e-5
    assert abs(r2 / r1 - 4) < 0.1


# -- U(1) reduction -------------------------------------------------------------------

def test_y_identity_exact():
    rng = random.Random(0)
    for _ in range(200):
        x = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(7)]
        y = em.u1_reduce(x)
        assert y[3] ** 2 + y[4] ** 2 + y[5] ** 2 == sum(v * v for v in x[3:]) ** 2


def test_quotient_is_orbit_invariant():
    rng = random.Random(1)
    for _ in range(100):
        x = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(7)]
        c, s = em.rational_rotation(Fraction(rng.randint(-9, 9), rng.randint(1, 5)))
        assert c * c + s * s == 1
        assert em.u1_reduce(em.u1_act(x, c, s)) == em.u1_reduce(x)


def test_generator_is_tangent_to_orbit_and_killed():
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = rng.normal(size=7)
        xi = em.u1_generator(x)
        h = 1e-6
        c, s = math.cos(h), math.sin(h)
        assert np.allclose((np.array(em.u1_act(x, c, s), dtype=float) - x) / h, xi, atol=1e-5)
        assert np.allclose(em.u1_jacobian(x) @ xi, 0, atol=1e-12)


def test_j_squared_is_minus_one():
    rng = np.random.default_rng(3)
    for _ in range(200):
        y = rng.normal(size=6)
        j = em.j_matrix(y)
        assert np.max(np.abs(j @ j + np.eye(6))) < 1e-12
    with pytest.raises(em.SingularLocusError):
        em.j_matrix([1, 2, 3, 0, 0, 0])


def test_example_half_plane():
    rng = np.random.default_rng(4)
    plane = np.eye(6)[:, [0, 3]]
    for _ in range(50):
        y = (rng.normal(), 0, 0, abs(rng.normal()) + 0.01, 0, 0)
        assert em.jholo_residual(y, plane) < 1e-12
        x = np.array([rng.normal(), 0, 0, rng.normal(), rng.normal(), 0, 0])
        lifted = em.reduced_tangent(x, np.eye(7)[:, [0, 3, 4]])
        assert em.jholo_residual(em.u1_reduce(x), lifted) < 1e-10
    assert em.jholo_residual((0, 0, 0, 1, 0, 0), np.eye(6)[:, [0, 1]]) > 0.5


def test_invariant_associative_planes_reduce_to_holomorphic_curves():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.normal(size=7)
        V = em.invariant_associative_plane(x, rng.normal(size=7))
        assert abs(PHI0.evaluate([V[:, 0], V[:, 1], V[:, 2]]) - 1) < 1e-12
        assert em.jholo_residual(em.u1_reduce(x), em.reduced_tangent(x, V)) < 1e-10
    x = rng.normal(size=7)
    q, _ = np.linalg.qr(np.column_stack([em.u1_generator(x), rng.normal(size=(7, 2))]))
    assert em.jholo_residual(em.u1_reduce(x), em.reduced_tangent(x, q)) > 1e-3
