"""G2 quantum cohomology at a critical point of the superpotential.

The ordinary cohomology of the 7-manifold is given as exact data: Betti
numbers, cup-product structure constants, Poincare duality H_3 -> H^4 and
the pairing H^3 x H_3 -> Q.  At a critical point theta the Hessian
contraction d: H^3 -> H^4 deforms degrees 3 and 4 into its kernel and
cokernel over the truncated valuation ring; every other degree is unchanged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from . import valring
from .ratlinalg import rank as _rank
from .novikov import INF, NovikovSeries, as_cutoff, as_fraction, fmt_cutoff, fmt_rational
from .superpotential import GwTable, ThetaPoint, grad_phi

TOP = 7


class QcohError(ValueError):
    """Raised when ring data or inputs violate a structural requirement."""


def _sign(k: int, l: int) -> int:
    return -1 if (k * l) % 2 else 1


# -- ring data -----------------------------------------------------------------

@dataclass(frozen=True)
class CohRingData:
    """Rational cohomology ring of a compact oriented 7-manifold.

    ``cup[(k, l)][(i, j)]`` maps output indices m to the coefficient of
    e^{k+l}_m in e^k_i cup e^l_j.  Products with the unit, and the mirror
    pairs (l, k), are filled in from the given ones; explicit entries must
    agree with the filled values.  ``pd[k][i]`` is the k-th coordinate of
    Pd(e_i) in H^4 and ``pairing[j][i]`` the value of the j-th H^3 basis
    class on e_i.
    """

    betti: tuple
    cup: Mapping
    pd: tuple
    pairing: tuple
    table: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        betti = tuple(int(b) for b in self.betti)
        object.__setattr__(self, "betti", betti)
        object.__setattr__(self, "pd", tuple(tuple(as_fraction(x) for x in r) for r in self.pd))
        object.__setattr__(self, "pairing", tuple(tuple(as_fraction(x) for x in r) for r in self.pairing))
        self._check_shapes()
        object.__setattr__(self, "table", self._complete_table())
        self._check_axioms()

    # -- construction helpers -------------------------------------------------
    def _check_shapes(self):
        b = self.betti
        if len(b) != TOP + 1:
            raise QcohError(f"betti must have 8 entries, got {len(b)}")
        if b[0] != 1 or b[TOP] != 1:
            raise QcohError("b0 and b7 must both be 1")
        if any(x < 0 for x in b):
            raise QcohError("Betti numbers must be nonnegative")
        if b[3] != b[4]:
            raise QcohError(f"Poincare duality needs b3 = b4, got {b[3]} and {b[4]}")
        for name, m in (("pd", self.pd), ("pairing", self.pairing)):
            if len(m) != b[3] or any(len(r) != b[3] for r in m):
                raise QcohError(f"{name} must be a {b[3]}x{b[3]} matrix")

    def _complete_table(self) -> dict:
        b = self.betti
        table: dict = {}

        def put(k, l, i, j, vec, where):
            cur = table.setdefault((k, l), {})
            vec = {m: c for m, c in vec.items() if c != 0}
            if (i, j) in cur and cur[(i, j)] != vec:
                raise QcohError(f"cup {where}: e^{k}_{i} * e^{l}_{j} conflicts with "
                                f"graded commutativity or the unit")
            cur[(i, j)] = vec

        for (k, l), entries in dict(self.cup).items():
            k, l = int(k), int(l)
            if k + l > TOP:
                raise QcohError(f"cup ({k},{l}) lands above degree 7")
            for (i, j), vec in dict(entries).items():
                if not (0 <= i < b[k] and 0 <= j < b[l]):
                    raise QcohError(f"cup ({k},{l}): index ({i},{j}) out of range")
                vec = {int(m): as_fraction(c) for m, c in dict(vec).items()}
                if any(not 0 <= m < b[k + l] for m in vec):
                    raise QcohError(f"cup ({k},{l}): output index out of range")
                put(k, l, i, j, vec, f"({k},{l})")
        for d in range(TOP + 1):
            for i in range(b[d]):
                put(0, d, 0, i, {i: Fraction(1)}, "unit")
                put(d, 0, i, 0, {i: Fraction(1)}, "unit")
        for (k, l), entries in list(table.items()):
            s = _sign(k, l)
            for (i, j), vec in list(entries.items()):
                put(l, k, j, i, {m: s * c for m, c in vec.items()}, f"({l},{k})")
        return table

    def _check_axioms(self):
        b = self.betti
        for k in range(TOP + 1):
            for l in range(TOP + 1 - k):
                for m in range(TOP + 1 - k - l):
                    for i, j, h in product(range(b[k]), range(b[l]), range(b[m])):
                        lhs = self._cup_rat(k + l, self.basis_cup(k, i, l, j), m, {h: Fraction(1)})
                        rhs = self._cup_rat(k, {i: Fraction(1)}, l + m, self.basis_cup(l, j, m, h))
                        if lhs != rhs:
                            raise QcohError(f"cup is not associative on (e^{k}_{i}, e^{l}_{j}, e^{m}_{h})")
        if _rank([list(r) for r in self.pd]) != b[3]:
            raise QcohError("Pd matrix is not invertible")
        if _rank([list(r) for r in self.pairing]) != b[3]:
            raise QcohError("pairing H^3 x H_3 is degenerate")
        # eta cup Pd(e_i) = eta(e_i) [X]: ties Pd, the pairing and cup(3,4)
        for j in range(b[3]):
            for i in range(b[3]):
                pd_i = {k: self.pd[k][i] for k in range(b[4])}
                top = self._cup_rat(3, {j: Fraction(1)}, 4, pd_i).get(0, Fraction(0))
                if top != self.pairing[j][i]:
                    raise QcohError(f"e^3_{j} cup Pd(e_{i}) = {top} but the pairing gives {self.pairing[j][i]}")

    def basis_cup(self, k: int, i: int, l: int, j: int) -> dict:
        if k + l > TOP:
            return {}
        return self.table.get((k, l), {}).get((i, j), {})

    def _cup_rat(self, k, x: dict, l, y: dict) -> dict:
        out: dict = {}
        for i, a in x.items():
            for j, c in y.items():
                for m, v in self.basis_cup(k, i, l, j).items():
                    out[m] = out.get(m, Fraction(0)) + a * c * v
        return {m: v for m, v in out.items() if v != 0}

    # -- public algebra -----------------------------------------------------
    @property
    def b3(self) -> int:
        return self.betti[3]

    def cup_product(self, k: int, x: list, l: int, y: list) -> list:
        """Cup product of coefficient vectors (Fractions or NovikovSeries)."""
        if len(x) != self.betti[k] or len(y) != self.betti[l]:
            raise QcohError(f"vector lengths do not match b{k}, b{l}")
        if k + l > TOP:
            return []
        out = [NovikovSeries.zero() for _ in range(self.betti[k + l])]
        for i, a in enumerate(x):
            a = _series(a)
            if a.is_zero():
                continue
            for j, c in enumerate(y):
                c = _series(c)
                if c.is_zero():
                    continue
                ac = a * c
                for m, v in self.basis_cup(k, i, l, j).items():
                    out[m] = out[m] + ac * v
        return out

    def pd_vector(self, cls) -> list[Fraction]:
        return [sum((self.pd[k][i] * cls[i] for i in range(self.b3)), Fraction(0)) for k in range(self.b3)]

    def pair_vector(self, cls) -> list[Fraction]:
        """(beta_j(cls))_j for the H^3 basis."""
        return [sum((self.pairing[j][i] * cls[i] for i in range(self.b3)), Fraction(0)) for j in range(self.b3)]

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        cup = {}
        for (k, l), entries in sorted(self.cup.items()):
            rows = []
            for (i, j), vec in sorted(dict(entries).items()):
                for m, c in sorted(dict(vec).items()):
                    rows.append([i, j, m, fmt_rational(as_fraction(c))])
            cup[f"{k},{l}"] = rows
        return {"betti": list(self.betti), "cup": cup,
                "pd": [[fmt_rational(x) for x in r] for r in self.pd],
                "pairing": [[fmt_rational(x) for x in r] for r in self.pairing]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "CohRingData":
        if not isinstance(obj, Mapping):
            raise QcohError("ring must be a JSON object")
        for key in ("betti", "pd", "pairing"):
            if key not in obj:
                raise QcohError(f"ring: missing field '{key}'")
        cup: dict = {}
        for deg, rows in dict(obj.get("cup", {})).items():
            try:
                k, l = (int(s) for s in str(deg).split(","))
            except ValueError as exc:
                raise QcohError(f"cup key '{deg}' must look like 'k,l'") from exc
            entries = cup.setdefault((k, l), {})
            for n, row in enumerate(rows):
                try:
                    i, j, m, c = row
                    vec = entries.setdefault((int(i), int(j)), {})
                    vec[int(m)] = vec.get(int(m), Fraction(0)) + as_fraction(c)
                except (TypeError, ValueError) as exc:
                    raise QcohError(f"cup['{deg}'][{n}]: expected [i, j, m, coeff]") from exc
        try:
            return cls(tuple(obj["betti"]), cup, tuple(tuple(r) for r in obj["pd"]),
                       tuple(tuple(r) for r in obj["pairing"]))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, QcohError):
                raise
            raise QcohError(str(exc)) from exc


def _series(x) -> NovikovSeries:
    return x if isinstance(x, NovikovSeries) else NovikovSeries.const(as_fraction(x))


def connected_sum_s3s4(m: int) -> CohRingData:
    """The ring of #m (S^3 x S^4): x_i cup y_j = delta_ij [X], Pd and pairing the identity."""
    betti = (1, 0, 0, m, m, 0, 0, 1)
    cup = {(3, 4): {(i, i): {0: 1} for i in range(m)}}
    ident = tuple(tuple(1 if i == j else 0 for j in range(m)) for i in range(m))
    return CohRingData(betti, cup, ident, ident)


# -- QHS constraints -----------------------------------------------------------

def check_qhs(ring: CohRingData, gw: GwTable) -> None:
    """Require (H^1 cup H^2)(alpha) = 0 and H^{1,2} cup Pd(alpha) = 0 for every
    class alpha with GW_alpha != 0; raise with the first failing triple."""
    if gw.n != ring.b3:
        raise QcohError(f"GW table has rank {gw.n} but b3 = {ring.b3}")
    b = ring.betti
    for alpha in gw.coeffs:
        for i, j in product(range(b[1]), range(b[2])):
            prod = ring.basis_cup(1, i, 2, j)
            vec = [prod.get(m, Fraction(0)) for m in range(b[3])]
            val = sum((x * y for x, y in zip(vec, ring.pair_vector(alpha))), Fraction(0))
            if val != 0:
                raise QcohError(f"QHS constraint fails: (e^1_{i} cup e^2_{j})({list(alpha)}) = {fmt_rational(val)}")
        pd = dict(enumerate(ring.pd_vector(alpha)))
        for k in (1, 2):
            for i in range(b[k]):
                if ring._cup_rat(k, {i: Fraction(1)}, 4, pd):
                    raise QcohError(f"QHS constraint fails: e^{k}_{i} cup Pd({list(alpha)}) != 0")


# -- the differential and the groups -------------------------------------------

def build_d(ring: CohRingData, gw: GwTable, theta: ThetaPoint, cutoff=None) -> list[list[NovikovSeries]]:
    """d[k][j] = sum_alpha GW_alpha q^{gamma.alpha} theta(alpha) (Pd alpha)_k beta_j(alpha)."""
    if gw.n != ring.b3 or theta.n != ring.b3:
        raise QcohError(f"dimension mismatch: b3 = {ring.b3}, GW rank {gw.n}, theta rank {theta.n}")
    cut = gw.cutoff if cutoff is None else min(gw.cutoff, as_cutoff(cutoff))
    if not all(g.is_zero() for g in grad_phi(gw, theta, cut)):
        warnings.warn("theta is not a critical point; QH products may be ill defined", stacklevel=2)
    n = ring.b3
    d = [[NovikovSeries.zero(cut) for _ in range(n)] for _ in range(n)]
    for cls, g in gw.coeffs.items():
        w = NovikovSeries.monomial(g, gw.area(cls), cut) * theta(cls, cut)
        pd, pv = ring.pd_vector(cls), ring.pair_vector(cls)
        for k in range(n):
            if pd[k]:
                for j in range(n):
                    if pv[j]:
                        d[k][j] = d[k][j] + w * (pd[k] * pv[j])
    return d


def apply_d(d, x: list) -> list[NovikovSeries]:
    return valring.matvec(d, [_series(v) for v in x])


@dataclass
class QcohResult:
    """Kernel and cokernel of d over the truncated valuation ring."""

    ring: CohRingData
    d: list
    cutoff: object
    elimination: valring.Elimination
    kernel: list          # basis vectors of QH^3
    free_rank: int        # free rank of QH^4
    torsion: list         # exponents v with a summand Lambda_{>=0}/q^v
    unresolved: object = None
    notes: list = field(default_factory=list)

    @property
    def rank_d(self) -> int:
        return self.elimination.rank

    def ranks(self) -> list[int]:
        b = list(self.ring.betti)
        b[3] = len(self.kernel)
        b[4] = self.free_rank
        return b

    def in_kernel(self, x: list) -> bool:
        return all(v.truncate(self.cutoff).is_zero() for v in apply_d(self.d, x))

    def normal_form(self, y: list) -> tuple:
        """Coordinates of y + Im d: P y, reduced mod q^{v_i} on torsion summands."""
        el = self.elimination
        z = valring.matvec(el.P, [_series(v) for v in y])
        out = []
        for i, s in enumerate(z):
            cut = el.valuations[i] if i < el.rank else self.cutoff
            out.append(s.truncate(cut).with_cutoff(cut).terms)
        return tuple(out)

    def equal_in_h4(self, y1: list, y2: list) -> bool:
        return self.normal_form(y1) == self.normal_form(y2)

    def to_json(self) -> dict:
        return {
            "cutoff": fmt_cutoff(self.cutoff),
            "d": [[str(e) for e in r] for r in self.d],
            "rank_d": self.rank_d,
            "QH3_rank": len(self.kernel),
            "QH3_basis": [[str(e) for e in v] for v in self.kernel],
            "QH4_free_rank": self.free_rank,
            "QH4_torsion": [fmt_rational(v) for v in self.torsion],
            "ranks": self.ranks(),
            "unresolved_below": None if self.unresolved is None else fmt_cutoff(self.unresolved),
            "notes": list(self.notes),
        }


def qh_groups(ring: CohRingData, d: list, cutoff=None) -> QcohResult:
    """Valuation-pivot elimination of d: kernel basis and cokernel normal form."""
    n = ring.b3
    if len(d) != n or any(len(r) != n for r in d):
        raise QcohError(f"d must be a {n}x{n} matrix")
    cut = valring.min_cutoff(d) if cutoff is None else as_cutoff(cutoff)
    for r in d:
        for e in r:
            if not e.is_zero() and e.valuation() <= 0:
                raise QcohError("entries of d must have positive valuation")
    el = valring.eliminate(d, cut)
    notes = []
    if el.unresolved is not None and el.rank < n:
        notes.append(f"remaining block vanishes mod q^{fmt_cutoff(el.unresolved)}; "
                     f"any further torsion has exponent >= {fmt_cutoff(el.unresolved)}")
    for v in el.valuations:
        if cut != INF and v >= cut:
            raise QcohError(f"pivot q^{fmt_rational(v)} is not resolved below the cutoff")
    kernel = [[e.truncate(cut) for e in v] for v in el.kernel_basis()]
    return QcohResult(ring, d, cut, el, kernel, n - el.rank, sorted(el.valuations), el.unresolved, notes)


def compute(ring: CohRingData, gw: GwTable, theta: ThetaPoint, cutoff=None) -> QcohResult:
    check_qhs(ring, gw)
    cut = gw.cutoff if cutoff is None else min(gw.cutoff, as_cutoff(cutoff))
    return qh_groups(ring, build_d(ring, gw, theta, cut), cut)


# -- products ------------------------------------------------------------------

def qh_product(result: QcohResult, k: int, x: list, l: int, y: list) -> list[NovikovSeries]:
    """Representative of x * y in QH^{k+l}.

    Degree-3 inputs must lie in Ker d; degree-4 inputs are any coset
    representatives.  Degree-4 outputs are representatives modulo Im d,
    to be compared with :meth:`QcohResult.equal_in_h4`.
    """
    ring = result.ring
    for deg, v in ((k, x), (l, y)):
        if not 0 <= deg <= TOP:
            raise QcohError(f"degree {deg} out of range")
        if len(v) != ring.betti[deg]:
            raise QcohError(f"vector of length {len(v)} does not match b{deg} = {ring.betti[deg]}")
        if deg == 3 and not result.in_kernel(v):
            raise QcohError("degree-3 input is not in Ker d")
    if k + l > TOP:
        return []
    out = ring.cup_product(k, x, l, y)
    return [e.truncate(result.cutoff) for e in out]


def qh_equal(result: QcohResult, deg: int, x: list, y: list) -> bool:
    if deg == 4:
        return result.equal_in_h4(x, y)
    return all((_series(a) - _series(b)).truncate(result.cutoff).is_zero() for a, b in zip(x, y))


def hessian_pairing(ring: CohRingData, d: list, eta: list, zeta: list) -> NovikovSeries:
    """Top-degree coefficient of eta cup d(zeta)."""
    cut = valring.min_cutoff(d)
    top = ring.cup_product(3, eta, 4, apply_d(d, zeta))
    return top[0].truncate(cut).with_cutoff(cut)
