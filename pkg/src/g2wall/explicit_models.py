"""Numerics for explicit calibrated models.

* the Lawlor neck family of special Lagrangian 3-folds asymptotic to two planes;
* the Harvey-Lawson T^2-cone L_0 and its three smoothings L^a_s;
* the U(1) quotient R^7 -> R^6 and its singular almost complex structure J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from . import g2forms

# -- Lawlor necks --------------------------------------------------------------


@dataclass(frozen=True)
class LawlorParams:
    a: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        if len(a) != 3 or any(not x > 0 for x in a):
            raise ValueError("Lawlor parameters must be three positive reals")
        object.__setattr__(self, "a", a)

    def big_p(self, x: float) -> float:
        """P(x) = p(x)/x^2, written as a polynomial so it is finite at 0."""
        a1, a2, a3 = self.a
        return (a1 + a2 + a3) + (a1 * a2 + a1 * a3 + a2 * a3) * x * x + a1 * a2 * a3 * x ** 4

    def s(self) -> float:
        a1, a2, a3 = self.a
        return 1.0 / (3.0 * math.sqrt(a1 * a2 * a3))


@dataclass(frozen=True)
class LawlorAngles:
    phi: tuple
    s: float

    @property
    def total(self) -> float:
        return sum(self.phi)


class QuadratureError(RuntimeError):
    pass


def _integrand_t(p: LawlorParams, k: int):
    """The angle integrand after x = tan t, on (-pi/2, pi/2)."""
    ak = p.a[k]

    def f(t):
        x = math.tan(t)
        sec2 = 1.0 + x * x
        return ak * sec2 / ((1.0 + ak * x * x) * math.sqrt(p.big_p(x)))
    return f


def _quad(f, lo, hi, tol):
    val, err = quad(f, lo, hi, epsabs=tol, epsrel=1e-13, limit=200)
    if not np.isfinite(val) or err > max(tol, 1e-13 * abs(val)) * 10:
        raise QuadratureError(f"quadrature did not converge (error estimate {err:g})")
    return val


def lawlor_angles(p: LawlorParams, tol: float = 1e-10) -> LawlorAngles:
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    # the integrand is even in x, so integrate over t in [0, pi/2] and double
    phis = tuple(2.0 * _quad(_integrand_t(p, k), 0.0, math.pi / 2, tol / 2) for k in range(3))
    return LawlorAngles(phis, p.s())


def lawlor_psi(p: LawlorParams, k: int, y: float, tol: float = 1e-13) -> float:
    """psi_k(y) = a_k int_{-inf}^y dx / ((1 + a_k x^2) sqrt P(x))."""
    return _quad(_integrand_t(p, k), -math.pi / 2, math.atan(y), tol)


def lawlor_z(p: LawlorParams, y: float, tol: float = 1e-13) -> np.ndarray:
    return np.array([np.exp(1j * lawlor_psi(p, k, y, tol)) * math.sqrt(1.0 / p.a[k] + y * y)
                     for k in range(3)])


def lawlor_point(p: LawlorParams, y: float, x, tol: float = 1e-13) -> np.ndarray:
    """The point (z_1(y) x_1, z_2(y) x_2, z_3(y) x_3) of K_{phi,s}, with |x| = 1."""
    x = np.asarray(x, dtype=float)
    return lawlor_z(p, y, tol) * x


class ConvergenceError(RuntimeError):
    pass


def lawlor_invert(phi1: float, phi2: float, s: float, tol: float = 1e-8,
                  max_iter: int = 100) -> LawlorParams:
    """Recover (a_1, a_2, a_3) from two angles and s.

    The angles depend only on the ratios a_1/a_3, a_2/a_3, so damped Newton
    (finite-difference Jacobian) solves for the two log-ratios; the overall
    scale is then fixed by s = (a_1 a_2 a_3)^{-1/2} / 3.
    """
    if not (0 < phi1 < math.pi and 0 < phi2 < math.pi and phi1 + phi2 < math.pi and s > 0):
        raise ValueError("need phi_1, phi_2 in (0, pi) with phi_1 + phi_2 < pi and s > 0")
    target = np.array([phi1, phi2])
    qtol = min(1e-12, tol * 1e-3)

    def angles(u):
        a = (math.exp(u[0]), math.exp(u[1]), 1.0)
        return np.array(lawlor_angles(LawlorParams(a), qtol).phi[:2])

    u = np.zeros(2)
    r = angles(u) - target
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol * 1e-2:
            break
        h = 1e-6
        jac = np.column_stack([(angles(u + h * np.eye(2)[i]) - angles(u - h * np.eye(2)[i])) / (2 * h)
                               for i in range(2)])
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        while lam > 1e-6:
            cand = u + lam * step
            rc = angles(cand) - target
            if np.linalg.norm(rc) < np.linalg.norm(r):
                u, r = cand, rc
                break
            lam /= 2
        else:
            raise ConvergenceError("damped Newton step failed to reduce the residual")
    else:
        raise ConvergenceError(f"no convergence in {max_iter} iterations")
    ratio = (math.exp(u[0]), math.exp(u[1]), 1.0)
    prod = ratio[0] * ratio[1]
    c = (1.0 / (9.0 * s * s * prod)) ** (1.0 / 3.0)
    out = LawlorParams(tuple(c * x for x in ratio))
    got = lawlor_angles(out, qtol)
    if max(abs(got.phi[0] - phi1), abs(got.phi[1] - phi2), abs(got.s - s)) >= tol:
        raise ConvergenceError("inverted parameters miss the target within tolerance")
    return out


@dataclass
class AsymptoteReport:
    radii: list
    residuals: list

    def ratios(self) -> list:
        return [b / a for a, b in zip(self.residuals, self.residuals[1:])]


def lawlor_asymptote_check(p: LawlorParams, radii, direction=(1.0, 1.0, 1.0)) -> AsymptoteReport:
    """Distance of K_{phi,s} from the graph (1 + i s r^-3) x near the real plane.

    For each radius r, the point of K on the y < 0 end with real part of norm
    r in the given direction is compared with the model graph over its real
    part.
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    x = np.asarray(direction, dtype=float)
    x = x / np.linalg.norm(x)
    s = p.s()
    out = []
    for r in radii:
        y = brentq(lambda yy: np.linalg.norm(lawlor_point(p, yy, x).real) - r, -4 * r - 10, -1e-3,
                   xtol=1e-14)
        w = lawlor_point(p, y, x)
        re = w.real
        rr = np.linalg.norm(re)
        out.append(float(np.linalg.norm(w.imag - s * rr ** -3 * re)))
    return AsymptoteReport(radii, out)


# -- Harvey-Lawson cone and smoothings -----------------------------------------

def hl_cone_membership(z, which: int, s: float = 0.0) -> tuple[tuple, bool]:
    """Residuals of the defining equations of L_0 (which = 0) or L^a_s.

    Returns ((m1 - m2, m2 - m3, Im z1 z2 z3), Re z1 z2 z3 >= 0) with
    m_k = |z_k|^2 - s [k = a].
    """
    if which not in (0, 1, 2, 3):
        raise ValueError("which must be 0 (the cone) or a family 1, 2, 3")
    if s < 0 or (which == 0 and s != 0):
        raise ValueError("s must be >= 0, and 0 for the cone")
    z = [complex(c) for c in z]
    m = [abs(c) ** 2 - (s if which == k + 1 else 0.0) for k, c in enumerate(z)]
    prod = z[0] * z[1] * z[2]
    return (m[0] - m[1], m[1] - m[2], prod.imag), prod.real >= 0


def hl_cone_membership_exact(z, which: int, s=Fraction(0)) -> tuple[tuple, bool]:
    """Same residuals with Gaussian-rational input ((re, im) pairs)."""
    zs = [g2forms.Gauss(Fraction(a), Fraction(b)) for a, b in z]
    s = Fraction(s)
    m = [c.re * c.re + c.im * c.im - (s if which == k + 1 else 0) for k, c in enumerate(zs)]
    prod = zs[0] * zs[1] * zs[2]
    return (m[0] - m[1], m[1] - m[2], prod.im), prod.re >= 0


_ZETA = {1: (1 / 3, -1 / 6, -1 / 6), 2: (-1 / 6, 1 / 3, -1 / 6), 3: (-1 / 6, -1 / 6, 1 / 3)}


def zeta(a: int, z) -> np.ndarray:
    """The normal sections: zeta_1, zeta_2, and zeta_3 = -zeta_1 - zeta_2."""
    z = np.asarray(z, dtype=complex)
    return np.array(_ZETA[a]) / np.conj(z)


def hl_point(a: int, t: float, angles, s: float) -> np.ndarray:
    """Point of L^a_s with |z_k|^2 = t^2 + s [k = a] and phases summing to 0."""
    th1, th2 = angles
    phases = np.exp(1j * np.array([th1, th2, -th1 - th2]))
    mods = np.array([math.sqrt(t * t + (s if k + 1 == a else 0.0)) for k in range(3)])
    return phases * mods


def hl_graph_residual(a: int, s: float, r: float, angles) -> float:
    """Distance from the L^a_s point at cone radius r to the graph of s*zeta_a over L_0.

    Both sets are invariant under the diagonal torus, so the graph point is
    sought over cone points with the same phases.
    """
    t = r / math.sqrt(3.0)
    p = hl_point(a, t, angles, s)
    phases = p / np.abs(p)

    def dist(tp):
        q = phases * tp
        return float(np.linalg.norm(p - (q + s * zeta(a, q))))

    res = minimize_scalar(dist, bracket=(t * 0.9, t, t * 1.1), tol=1e-14)
    return float(res.fun)


def hl_graph_check(a: int, s: float, samples: int = 50, r: float = 1.0, seed: int = 0) -> float:
    if a not in (1, 2, 3):
        raise ValueError("family must be 1, 2 or 3")
    if s <= 0:
        raise ValueError("s must be positive")
    rng = np.random.default_rng(seed)
    return max(hl_graph_residual(a, s, r, rng.uniform(-math.pi, math.pi, 2)) for _ in range(samples))


# -- U(1) reduction ------------------------------------------------------------

def u1_reduce(x) -> tuple:
    """Pi = (x1, x2, x3, y1, y2, y3); exact for rational input."""
    x1, x2, x3, x4, x5, x6, x7 = x
    y1 = x4 * x4 + x5 * x5 - x6 * x6 - x7 * x7
    y2 = 2 * (x4 * x7 + x5 * x6)
    y3 = 2 * (x4 * x6 - x5 * x7)
    return (x1, x2, x3, y1, y2, y3)


def u1_act(x, c, s) -> tuple:
    """The U(1) action with (cos theta, sin theta) = (c, s); exact for rational c, s."""
    x1, x2, x3, x4, x5, x6, x7 = x
    return (x1, x2, x3, c * x4 - s * x5, s * x4 + c * x5, c * x6 + s * x7, -s * x6 + c * x7)


def rational_rotation(t: Fraction) -> tuple[Fraction, Fraction]:
    """(cos, sin) of a rational point on the unit circle."""
    t = Fraction(t)
    d = 1 + t * t
    return (1 - t * t) / d, 2 * t / d


def u1_generator(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([0.0, 0.0, 0.0, -x[4], x[3], x[6], -x[5]])


def u1_jacobian(x) -> np.ndarray:
    """d Pi at x, a 6 x 7 matrix."""
    x = np.asarray(x, dtype=float)
    _, _, _, x4, x5, x6, x7 = x
    d = np.zeros((6, 7))
    d[0, 0] = d[1, 1] = d[2, 2] = 1.0
    d[3, 3:] = [2 * x4, 2 * x5, -2 * x6, -2 * x7]
    d[4, 3:] = [2 * x7, 2 * x6, 2 * x5, 2 * x4]
    d[5, 3:] = [2 * x6, -2 * x7, 2 * x4, -2 * x5]
    return d


class SingularLocusError(ValueError):
    pass


def u_value(y) -> float:
    return math.sqrt(float(y[3]) ** 2 + float(y[4]) ** 2 + float(y[5]) ** 2)


def j_matrix(y) -> np.ndarray:
    u = u_value(y)
    if u == 0:
        raise SingularLocusError("J is singular on u = 0")
    j = np.zeros((6, 6))
    for k in range(3):
        j[k, 3 + k] = -0.5 / math.sqrt(u)
        j[3 + k, k] = 2.0 * math.sqrt(u)
    return j


def jholo_residual(y, tangent) -> float:
    """||(I - P) J T|| / ||J T|| for the plane spanned by the columns of T (6 x 2)."""
    t = np.asarray(tangent, dtype=float)
    if t.shape[0] != 6:
        t = t.T
    q, _ = np.linalg.qr(t)
    jt = j_matrix(y) @ q
    return float(np.linalg.norm(jt - q @ (q.T @ jt)) / np.linalg.norm(jt))


def reduced_tangent(x, V) -> np.ndarray:
    """Image under d Pi of a 3-plane V through x (columns), as an orthonormal 6 x 2 basis."""
    img = u1_jacobian(x) @ np.asarray(V, dtype=float)
    uu, sv, _ = np.linalg.svd(img)
    return uu[:, :2]


def invariant_associative_plane(x, v) -> np.ndarray:
    """span(xi, v, xi x v) for the U(1) generator xi at x, with v orthogonalized."""
    xi = u1_generator(x)
    xi = xi / np.linalg.norm(xi)
    v = np.asarray(v, dtype=float)
    v = v - v.dot(xi) * xi
    v = v / np.linalg.norm(v)
    w = np.array(g2forms.cross(xi, v), dtype=float)
    return np.column_stack([xi, v, w])
