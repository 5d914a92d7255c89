"""Constant G2 structures on R^7: model forms, calibrations and tameness.

Forms are stored sparsely as ``{sorted index tuple: coefficient}`` with
0-based indices; coefficients may be Fractions (exact identities) or
floats (sampled checks).  Serialized forms use 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .novikov import as_fraction, fmt_rational
from .ratlinalg import rank as rational_rank

DIM = 7


def _perm_sign(seq: Sequence[int]) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Form:
    """A constant k-form on R^7."""

    degree: int
    terms: Mapping

    def __post_init__(self):
        clean: dict = {}
        for idx, c in dict(self.terms).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.degree:
                raise ValueError(f"term {idx} does not have degree {self.degree}")
            if any(not 0 <= i < DIM for i in idx):
                raise ValueError(f"index out of range in {idx}")
            if len(set(idx)) < len(idx):
                continue
            key = tuple(sorted(idx))
            clean[key] = clean.get(key, 0) + _perm_sign(idx) * c
        object.__setattr__(self, "terms", {k: v for k, v in sorted(clean.items()) if v != 0})

    @classmethod
    def from_1based(cls, degree: int, spec: Mapping) -> "Form":
        return cls(degree, {tuple(i - 1 for i in k): v for k, v in spec.items()})

    def __add__(self, other: "Form") -> "Form":
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Form(self.degree, out)

    def __neg__(self) -> "Form":
        return Form(self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        return Form(self.degree, {k: c * v for k, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Form) and self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.degree, tuple(self.terms.items())))

    def wedge(self, other: "Form") -> "Form":
        out: dict = {}
        for a, x in self.terms.items():
            for b, y in other.terms.items():
                if set(a) & set(b):
                    continue
                idx = a + b
                key = tuple(sorted(idx))
                out[key] = out.get(key, 0) + _perm_sign(idx) * x * y
        return Form(self.degree + other.degree, out)

    def evaluate(self, vectors) -> object:
        """f(v_1, ..., v_k); exact when the vectors hold Fractions."""
        vecs = [list(v) for v in vectors]
        if len(vecs) != self.degree:
            raise ValueError(f"a {self.degree}-form needs {self.degree} vectors, got {len(vecs)}")
        total = 0
        for idx, c in self.terms.items():
            total = total + c * _minor(vecs, idx)
        return total

    def components(self) -> np.ndarray:
        keys = combinations(range(DIM), self.degree)
        return np.array([float(self.terms.get(k, 0)) for k in keys])

    def to_json(self) -> list:
        return [{"indices": [i + 1 for i in k], "coeff": fmt_rational(as_fraction(v))}
                for k, v in self.terms.items()]

    @classmethod
    def from_json(cls, obj) -> "Form":
        if not isinstance(obj, list) or not obj:
            raise ValueError("a form is a nonempty list of {indices, coeff} terms")
        degs = {len(t.get("indices", [])) for t in obj}
        if len(degs) != 1:
            raise ValueError("form terms have mixed degrees")
        terms: dict = {}
        for n, t in enumerate(obj):
            try:
                idx = tuple(int(i) - 1 for i in t["indices"])
                terms[idx] = terms.get(idx, Fraction(0)) + as_fraction(t["coeff"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"form term {n}: {exc}") from exc
        return cls(degs.pop(), terms)


def _minor(vecs, idx) -> object:
    k = len(idx)
    total = 0
    for perm in permutations(range(k)):
        term = _perm_sign(perm)
        for row, col in enumerate(perm):
            term = term * vecs[row][idx[col]]
        total = total + term
    return total


PHI0 = Form.from_1based(3, {(1, 2, 3): 1, (1, 4, 5): 1, (1, 6, 7): 1, (2, 4, 6): 1,
                            (2, 5, 7): -1, (3, 4, 7): -1, (3, 5, 6): -1})
STAR_PHI0 = Form.from_1based(4, {(4, 5, 6, 7): 1, (2, 3, 6, 7): 1, (2, 3, 4, 5): 1, (1, 3, 5, 7): 1,
                                 (1, 3, 4, 6): -1, (1, 2, 5, 6): -1, (1, 2, 4, 7): -1})


def e(i: int, exact: bool = True) -> list:
    """Standard basis vector e_i (1-based)."""
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    return [one if j == i - 1 else zero for j in range(DIM)]


# -- planes ---------------------------------------------------------------------

@dataclass(frozen=True)
class OrientedPlane:
    """An oriented k-plane given by an ordered orthonormal basis."""

    basis: tuple

    def __post_init__(self):
        vecs = tuple(tuple(v) for v in self.basis)
        if any(len(v) != DIM for v in vecs):
            raise ValueError("plane basis vectors must lie in R^7")
        exact = all(isinstance(x, (int, Fraction)) for v in vecs for x in v)
        for i, u in enumerate(vecs):
            for j, v in enumerate(vecs):
                g = sum(a * b for a, b in zip(u, v))
                want = 1 if i == j else 0
                if (g != want) if exact else abs(g - want) > 1e-9:
                    raise ValueError("plane basis is not orthonormal")
        object.__setattr__(self, "basis", vecs)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def span(cls, *vectors) -> "OrientedPlane":
        """Orthonormalize (Gram-Schmidt, floating point) preserving orientation."""
        q, r = np.linalg.qr(np.array(vectors, dtype=float).T)
        q = q * np.sign(np.diag(r))
        return cls(tuple(tuple(col) for col in q.T))

    def matrix(self) -> np.ndarray:
        return np.array(self.basis, dtype=float).T


def calibration_value(f: Form, p: OrientedPlane):
    if f.degree != p.dim:
        raise ValueError(f"a {f.degree}-form cannot be evaluated on a {p.dim}-plane")
    return f.evaluate(p.basis)


def is_coassociative(W: OrientedPlane, phi: Form = PHI0, tol: float = 1e-12) -> bool:
    """phi|_W = 0 on every 3-subset of the basis."""
    for trip in combinations(W.basis, 3):
        val = phi.evaluate(trip)
        if (val != 0) if isinstance(val, Fraction) else abs(val) > tol:
            return False
    return True


def cross(u, v, phi: Form = PHI0) -> list:
    """u x v with <u x v, w> = phi(u, v, w)."""
    exact = all(isinstance(x, (int, Fraction)) for x in list(u) + list(v))
    basis = [e(k + 1, exact) for k in range(DIM)]
    return [phi.evaluate([u, v, b]) for b in basis]


def associative_plane(u, v) -> OrientedPlane:
    """span(u, v, u x v) for orthonormal u, v (floating point)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return OrientedPlane((tuple(u), tuple(v), tuple(np.array(cross(u, v), dtype=float))))


def random_orthonormal_pair(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u = rng.normal(size=DIM)
    u /= np.linalg.norm(u)
    v = rng.normal(size=DIM)
    v -= v.dot(u) * u
    v /= np.linalg.norm(v)
    return u, v


def reference_planes() -> list[OrientedPlane]:
    """The seven oriented planes on which phi_0 has a +-1 term, oriented so phi_0 = 1."""
    out = []
    for idx, c in PHI0.terms.items():
        vecs = [e(i + 1) for i in idx]
        if c < 0:
            vecs[1], vecs[2] = vecs[2], vecs[1]
        out.append(OrientedPlane(tuple(vecs)))
    return out


def coassociative_complement(V: OrientedPlane) -> OrientedPlane:
    """The orthogonal complement of an associative 3-plane, oriented so *phi_0 > 0."""
    m = V.matrix()
    q, _ = np.linalg.qr(np.hstack([m, np.eye(DIM)]))
    W = q[:, 3:7]
    if STAR_PHI0.evaluate([W[:, i] for i in range(4)]) < 0:
        W[:, 0] = -W[:, 0]
    return OrientedPlane(tuple(tuple(c) for c in W.T))


# -- Calabi-Yau decomposition ---------------------------------------------------

@dataclass(frozen=True)
class Gauss:
    """Gaussian rational re + i*im."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __add__(self, o):
        o = _gauss(o)
        return Gauss(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Gauss(-self.re, -self.im)

    def __mul__(self, o):
        o = _gauss(o)
        return Gauss(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __ne__(self, o):
        o = _gauss(o)
        return self.re != o.re or self.im != o.im

    def __eq__(self, o):
        return not self.__ne__(o)

    def __hash__(self):
        return hash((self.re, self.im))


def _gauss(x) -> Gauss:
    return x if isinstance(x, Gauss) else Gauss(Fraction(x))


def _real_part(f: Form) -> Form:
    return Form(f.degree, {k: _gauss(v).re for k, v in f.terms.items()})


def _imag_part(f: Form) -> Form:
    return Form(f.degree, {k: _gauss(v).im for k, v in f.terms.items()})


def cy_forms(omega_scale=Fraction(1)) -> dict:
    """omega_0, Re Omega_0, Im Omega_0 and dx_1 under R^7 = R x C^3,
    (x1, x2 + i x3, x4 + i x5, x6 + i x7)."""
    i_unit = Gauss(Fraction(0), Fraction(1))
    dz = [Form(1, {(2 * k + 1,): Gauss(Fraction(1)), (2 * k + 2,): i_unit}) for k in range(3)]
    dzbar = [Form(1, {(2 * k + 1,): Gauss(Fraction(1)), (2 * k + 2,): -i_unit}) for k in range(3)]
    omega = Form(2, {})
    for a, b in zip(dz, dzbar):
        omega = omega + a.wedge(b)
    omega = _real_part(omega.scale(Gauss(Fraction(0), Fraction(1, 2)) * omega_scale))
    big = dz[0].wedge(dz[1]).wedge(dz[2])
    dx1 = Form(1, {(0,): Fraction(1)})
    return {"omega": omega, "re_Omega": _real_part(big), "im_Omega": _imag_part(big), "dx1": dx1}


def cy_decomposition_check(omega_scale=Fraction(1)) -> bool:
    """phi_0 = dx1^omega_0 + Re Omega_0 and *phi_0 = omega_0^omega_0/2 - dx1^Im Omega_0, exactly."""
    f = cy_forms(omega_scale)
    phi = f["dx1"].wedge(f["omega"]) + f["re_Omega"]
    psi = f["omega"].wedge(f["omega"]).scale(Fraction(1, 2)) - f["dx1"].wedge(f["im_Omega"])
    return phi == PHI0 and psi == STAR_PHI0


# -- stabilizer ------------------------------------------------------------------

def stabilizer_dimension(f: Form = PHI0) -> int:
    """dim of {A in gl(7) : sum_i f(.., A v_i, ..) = 0}, by exact rank of a 35 x 49 system."""
    keys = list(combinations(range(DIM), f.degree))
    rows = [[Fraction(0)] * (DIM * DIM) for _ in keys]
    for col in range(DIM * DIM):
        a, b = divmod(col, DIM)  # elementary matrix E_ab: e_b -> e_a
        for r, idx in enumerate(keys):
            val = Fraction(0)
            for pos, j in enumerate(idx):
                if j != b:
                    continue
                new = list(idx)
                new[pos] = a
                if len(set(new)) < len(new):
                    continue
                val += _perm_sign(new) * f.terms.get(tuple(sorted(new)), 0)
            rows[r][col] = val
    return DIM * DIM - rational_rank(rows)


# -- tameness -------------------------------------------------------------------

class NotPositiveError(ValueError):
    """No oriented frame identifies the 4-form with *phi_0."""


def find_frame(psi: Form, seed: int = 0, restarts: int = 20, tol: float = 1e-12) -> np.ndarray:
    """B with det B > 0 and psi(u_1..u_4) = *phi_0(B u_1, ..., B u_4)."""
    target = psi.components()
    keys = list(combinations(range(DIM), 4))

    def resid(x):
        b = x.reshape(DIM, DIM)
        return pullback_components(STAR_PHI0, b, keys) - target

    rng = np.random.default_rng(seed)
    starts = [np.eye(DIM)] + [np.eye(DIM) + 0.5 * rng.normal(size=(DIM, DIM)) for _ in range(restarts)]
    for x0 in starts:
        sol = least_squares(resid, x0.ravel(), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
        if np.max(np.abs(sol.fun)) < tol ** 0.5:
            b = sol.x.reshape(DIM, DIM)
            sv = np.linalg.svd(b, compute_uv=False)
            if np.prod(sv / sv[0]) < 1e-8:
                continue  # a degenerate frame: psi sits on the boundary of the orbit
            if np.linalg.det(b) < 0:
                b = -b  # *phi_0 is even, -I reverses the orientation of R^7
            if np.max(np.abs(resid(b.ravel()))) < 1e-9:
                return b
    raise NotPositiveError("psi is not a positive 4-form (no normal frame found)")


def pullback_components(f: Form, b: np.ndarray, keys=None) -> np.ndarray:
    """Components, in sorted index order, of B^*f: (u_i) -> f(B u_1, ..., B u_k)."""
    keys = list(combinations(range(DIM), f.degree)) if keys is None else keys
    out = np.zeros(len(keys))
    for idx, c in f.terms.items():
        sub = b[list(idx), :]
        for n, k in enumerate(keys):
            out[n] += float(c) * np.linalg.det(sub[:, list(k)])
    return out


def pullback(f: Form, b: np.ndarray, tol: float = 1e-14) -> Form:
    keys = list(combinations(range(DIM), f.degree))
    comp = pullback_components(f, b, keys)
    return Form(f.degree, {k: float(c) for k, c in zip(keys, comp) if abs(c) > tol})


@dataclass
class TamenessReport:
    minimum: float
    worst_plane: tuple
    samples: int
    passed: bool

    def to_json(self) -> dict:
        return {"min_phi_on_V": self.minimum, "samples": self.samples, "pass": self.passed,
                "worst_plane": [list(map(float, v)) for v in self.worst_plane]}


def tameness_check(phi: Form, psi: Form, samples: int = 1000, seed: int = 0) -> TamenessReport:
    """min of phi|_V over sampled psi-associative planes V (unit g_psi-volume)."""
    if phi.degree != 3 or psi.degree != 4:
        raise ValueError("tameness needs a 3-form phi and a 4-form psi")
    b = np.eye(DIM) if psi == STAR_PHI0 else find_frame(psi, seed)
    binv = np.linalg.inv(b)
    rng = np.random.default_rng(seed)
    planes = [p.matrix() for p in reference_planes()]
    for _ in range(samples):
        planes.append(associative_plane(*random_orthonormal_pair(rng)).matrix())
    best, worst = np.inf, None
    for m in planes:
        vecs = (binv @ m).T
        val = float(phi.evaluate(list(vecs)))
        if val < best:
            best, worst = val, tuple(map(tuple, vecs))
    return TamenessReport(best, worst, len(planes), bool(best > 0))


def coassociative_witness(V: OrientedPlane, phi: Form = PHI0, tol: float = 1e-9) -> OrientedPlane:
    """For a 3-plane V with phi|_V = 0, the phi-coassociative 4-plane W containing V.

    W is the orthogonal complement of the span of the pairwise cross products.
    """
    vs = [np.asarray(v, dtype=float) for v in V.basis]
    if abs(float(phi.evaluate(vs))) > tol:
        raise ValueError("phi does not vanish on V")
    a = np.array([cross(vs[i], vs[j], phi) for i, j in ((0, 1), (0, 2), (1, 2))], dtype=float)
    if np.linalg.matrix_rank(a, tol) != 3:
        raise ValueError("cross products of V do not span a 3-plane")
    q, _ = np.linalg.qr(np.hstack([a.T, np.eye(DIM)]))
    W = q[:, 3:7]
    return OrientedPlane(tuple(tuple(c) for c in W.T))
