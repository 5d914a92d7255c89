"""The labelled-tree superpotential and its critical points.

Phi(theta) is a sum over trees whose vertices carry catalog records.  Each
vertex contributes ``Or*I/|Iso| * q^{area} * theta(class)`` and each edge the
linking value of its endpoint records.  Trees are enumerated on numbered
vertices through Prufer sequences; summing over label assignments and
dividing by k! reproduces the 1/|Aut| weighting without any isomorphism
testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Callable, Iterator, Mapping

from .catalog import Catalog, HomologyClass, as_class, class_add, pair
from .novikov import (INF, NovikovSeries, as_cutoff, as_fraction, exp_pos, fmt_cutoff,
                      fmt_rational, log_unit, unit_pow)
from . import valring


# -- theta points --------------------------------------------------------------

@dataclass(frozen=True)
class ThetaPoint:
    """theta in Hom(H_3, 1 + Lambda_{>0}), stored as theta(e_i) = 1 + lambdas[i]."""

    lambdas: tuple

    def __post_init__(self):
        lams = tuple(self.lambdas)
        for i, lam in enumerate(lams):
            if not isinstance(lam, NovikovSeries):
                raise TypeError(f"lambda[{i}] is not a NovikovSeries")
            if lam.valuation() <= 0:
                raise ValueError(f"lambda[{i}] must have positive valuation")
        object.__setattr__(self, "lambdas", lams)

    @classmethod
    def one(cls, n: int) -> "ThetaPoint":
        return cls(tuple(NovikovSeries.zero() for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.lambdas)

    def basis_value(self, i: int, cutoff=INF) -> NovikovSeries:
        return (self.lambdas[i] + 1).truncate(cutoff)

    def __call__(self, cls: HomologyClass, cutoff=INF) -> NovikovSeries:
        """theta(cls) = prod (1 + lambda_i)^{cls_i}, truncated at ``cutoff``."""
        if len(cls) != self.n:
            raise ValueError("class length does not match theta")
        out = NovikovSeries.one(cutoff)
        for i, k in enumerate(cls):
            if k:
                out = out * unit_pow(self.basis_value(i, cutoff), k)
        return out

    def truncate(self, cutoff) -> "ThetaPoint":
        return ThetaPoint(tuple(l.truncate(cutoff) for l in self.lambdas))

    def to_json(self) -> dict:
        return {"lambdas": [l.to_json() for l in self.lambdas]}

    @classmethod
    def from_json(cls, obj) -> "ThetaPoint":
        if isinstance(obj, Mapping):
            obj = obj.get("lambdas")
        if not isinstance(obj, list):
            raise ValueError("theta must be {'lambdas': [series, ...]}")
        lams = []
        for i, s in enumerate(obj):
            try:
                lams.append(NovikovSeries.from_json(s))
            except ValueError as exc:
                raise ValueError(f"lambdas[{i}]: {exc}") from exc
        return cls(tuple(lams))


# -- tree enumeration ----------------------------------------------------------

def prufer_decode(seq: tuple, k: int) -> list[tuple[int, int]]:
    """Edges of the tree on 0..k-1 with Prufer sequence ``seq`` (length k-2)."""
    if k == 1:
        return []
    degree = [1] * k
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(k) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = (i for i in range(k) if degree[i] == 1)
    edges.append((u, v))
    return edges


def labelled_trees(k: int) -> Iterator[list[tuple[int, int]]]:
    """All k^{k-2} trees on the numbered vertex set {0, ..., k-1}."""
    if k == 1:
        yield []
        return
    for seq in product(range(k), repeat=k - 2):
        yield prufer_decode(seq, k)


PRUFER_MAX_VERTICES = 6


def tree_sum_prufer(labels: tuple, link: Callable, one=Fraction(1), zero=Fraction(0)):
    """Sum over trees on len(labels) numbered vertices of the product of
    ``link(labels[u], labels[v])`` over edges, by Prufer enumeration."""
    k = len(labels)
    total = zero
    for edges in labelled_trees(k):
        term = one
        for u, v in edges:
            term = term * link(labels[u], labels[v])
        total = total + term
    return total


def _det_division_free(a: list, zero):
    """Determinant using only ring operations (Bird's algorithm)."""
    n = len(a)
    x = [row[:] for row in a]
    for _ in range(n - 1):
        mu = [[zero] * n for _ in range(n)]
        tail = zero
        for i in range(n - 1, -1, -1):
            mu[i][i] = -tail
            tail = tail + x[i][i]
            for j in range(i + 1, n):
                mu[i][j] = x[i][j]
        x = [[sum((mu[i][k] * a[k][j] for k in range(i, n)), zero) for j in range(n)] for i in range(n)]
    return x[0][0] if n % 2 else -x[0][0]


def tree_sum_kirchhoff(labels: tuple, link: Callable, one=Fraction(1), zero=Fraction(0)):
    """Same sum via the weighted matrix-tree theorem (any cofactor of the
    weighted Laplacian), using a division-free determinant."""
    k = len(labels)
    if k == 1:
        return one
    lap = [[zero] * k for _ in range(k)]
    for i in range(k):
        deg = zero
        for j in range(k):
            if i != j:
                w = link(labels[i], labels[j])
                deg = deg + w
                lap[i][j] = -w
        lap[i][i] = deg
    return _det_division_free([row[1:] for row in lap[1:]], zero)


def tree_sum(labels: tuple, link: Callable, one=Fraction(1), zero=Fraction(0), method: str = "auto"):
    """Weighted count of labelled trees on the vertices of ``labels``.

    ``method`` is "prufer", "kirchhoff" or "auto" (Prufer enumeration up to
    PRUFER_MAX_VERTICES vertices, the matrix-tree theorem beyond).
    """
    if method == "prufer" or (method == "auto" and len(labels) <= PRUFER_MAX_VERTICES):
        return tree_sum_prufer(labels, link, one, zero)
    if method in ("kirchhoff", "auto"):
        return tree_sum_kirchhoff(labels, link, one, zero)
    raise ValueError(f"unknown tree-sum method '{method}'")


def record_multisets(areas: list, cutoff) -> Iterator[tuple[int, ...]]:
    """Count vectors m >= 0 (not all 0) with sum m_i * areas[i] < cutoff."""
    r = len(areas)

    def rec(i, budget, acc):
        if i == r:
            if any(acc):
                yield tuple(acc)
            return
        m = 0
        while m * areas[i] < budget:
            yield from rec(i + 1, budget - m * areas[i], acc + [m])
            m += 1

    yield from rec(0, cutoff, [])


def _live_records(c: Catalog):
    return [r for r in c.records if r.i_inv != 0]


def tree_terms(c: Catalog, cutoff, link: Callable | None = None,
               one=Fraction(1), zero=Fraction(0), method: str = "auto"):
    """Yield (counts, records, coefficient) for each record multiset below the cutoff.

    ``coefficient`` is ``TreeSum / prod m_i!`` for a canonical labelling of
    the multiset; the record weights and q-powers are left to the caller.
    The linking accessor may return any ring element (e.g. dual numbers).
    """
    cutoff = as_cutoff(cutoff)
    if cutoff == INF:
        raise ValueError("the superpotential needs a finite area cutoff")
    recs = _live_records(c)
    areas = [c.area(r.cls) for r in recs]
    if link is None:
        link = c.link
    cache = {}
    for counts in record_multisets(areas, cutoff):
        labels = tuple(r.id for r, m in zip(recs, counts) for _ in range(m))
        if labels not in cache:
            cache[labels] = tree_sum(labels, link, one, zero, method)
        denom = reduce(lambda acc, m: acc * math.factorial(m), counts, 1)
        yield counts, recs, cache[labels] * Fraction(1, denom)


def eval_phi(c: Catalog, theta: ThetaPoint, cutoff) -> NovikovSeries:
    """Phi(theta) modulo q^cutoff, vertex weights multiplied tree by tree."""
    cutoff = as_cutoff(cutoff)
    if theta.n != c.n:
        raise ValueError(f"theta has {theta.n} components, catalog has n = {c.n}")
    if cutoff == INF:
        raise ValueError("the superpotential needs a finite area cutoff")
    recs = _live_records(c)
    weights = {r.id: NovikovSeries.monomial(r.weight, c.area(r.cls), cutoff) * theta(r.cls, cutoff)
               for r in recs}
    total = NovikovSeries.zero(cutoff)
    for counts, rs, coef in tree_terms(c, cutoff):
        if coef == 0:
            continue
        term = NovikovSeries.const(coef, cutoff)
        for r, m in zip(rs, counts):
            for _ in range(m):
                term = term * weights[r.id]
        total = total + term
    return total


def main_term(c: Catalog, theta: ThetaPoint, cutoff) -> NovikovSeries:
    """Single-vertex part of Phi: a weighted count of the records themselves."""
    cutoff = as_cutoff(cutoff)
    total = NovikovSeries.zero(cutoff)
    for r in _live_records(c):
        a = c.area(r.cls)
        if a < cutoff:
            total = total + NovikovSeries.monomial(r.weight, a, cutoff) * theta(r.cls, cutoff)
    return total


# -- GW tables -----------------------------------------------------------------

@dataclass(frozen=True)
class GwTable:
    """Coefficients GW_alpha with Phi = sum GW_alpha q^{gamma.alpha} theta(alpha)."""

    n: int
    gamma: tuple
    cutoff: object
    coeffs: Mapping  # class tuple -> Fraction

    def __post_init__(self):
        gamma = tuple(as_fraction(g) for g in self.gamma)
        cut = as_cutoff(self.cutoff)
        clean = {}
        for cls, v in dict(self.coeffs).items():
            cls = as_class(cls, self.n)
            v = as_fraction(v)
            a = pair(gamma, cls)
            if not (0 < a < cut):
                raise ValueError(f"class {list(cls)} has area {a} outside (0, {fmt_cutoff(cut)})")
            if v:
                clean[cls] = clean.get(cls, Fraction(0)) + v
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "cutoff", cut)
        object.__setattr__(self, "coeffs", {k: v for k, v in sorted(clean.items()) if v})

    def area(self, cls) -> Fraction:
        return pair(self.gamma, cls)

    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate(self, theta: ThetaPoint, cutoff=None) -> NovikovSeries:
        cut = self.cutoff if cutoff is None else min(self.cutoff, as_cutoff(cutoff))
        total = NovikovSeries.zero(cut)
        for cls, gw in self.coeffs.items():
            total = total + NovikovSeries.monomial(gw, self.area(cls), cut) * theta(cls, cut)
        return total

    def to_json(self) -> list:
        return [{"class": list(k), "gw": fmt_rational(v)} for k, v in self.coeffs.items()]

    @classmethod
    def from_json(cls, obj, n: int, gamma, cutoff) -> "GwTable":
        coeffs = {}
        for i, e in enumerate(obj):
            try:
                coeffs[as_class(e["class"], n)] = as_fraction(e["gw"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"gw[{i}]: {exc}") from exc
        return cls(n, tuple(gamma), cutoff, coeffs)


def extract_gw(c: Catalog, cutoff) -> GwTable:
    """Collapse the tree sum by total class, exactly over Q."""
    cutoff = as_cutoff(cutoff)
    acc: dict = {}
    for counts, rs, coef in tree_terms(c, cutoff):
        if coef == 0:
            continue
        cls = tuple([0] * c.n)
        w = coef
        for r, m in zip(rs, counts):
            if m:
                w *= r.weight ** m
                cls = class_add(cls, tuple(m * x for x in r.cls))
        acc[cls] = acc.get(cls, Fraction(0)) + w
    return GwTable(c.n, c.gamma, cutoff, acc)


# -- gradient, Hessian, critical points ----------------------------------------

def grad_phi(gw: GwTable, theta: ThetaPoint, cutoff=None) -> list[NovikovSeries]:
    """Components sum_alpha GW_alpha q^{gamma.alpha} theta(alpha) alpha_i.

    This is the derivative along log theta(e_i); it differs from d/d lambda_i
    by the unit (1 + lambda_i) and has the same zero locus.
    """
    cut = gw.cutoff if cutoff is None else min(gw.cutoff, as_cutoff(cutoff))
    out = [NovikovSeries.zero(cut) for _ in range(gw.n)]
    for cls, g in gw.coeffs.items():
        term = NovikovSeries.monomial(g, gw.area(cls), cut) * theta(cls, cut)
        for i, k in enumerate(cls):
            if k:
                out[i] = out[i] + term * k
    return out


def hessian(gw: GwTable, theta: ThetaPoint, cutoff=None) -> list[list[NovikovSeries]]:
    """Second derivatives along log theta: sum GW q^{area} theta(alpha) alpha_i alpha_j."""
    cut = gw.cutoff if cutoff is None else min(gw.cutoff, as_cutoff(cutoff))
    return _hessian_at(gw, theta, cut)


def _hessian_at(gw: GwTable, theta: ThetaPoint, cut) -> list[list[NovikovSeries]]:
    # the Hessian of the truncated table, at any working precision
    n = gw.n
    out = [[NovikovSeries.zero(cut) for _ in range(n)] for _ in range(n)]
    for cls, g in gw.coeffs.items():
        term = NovikovSeries.monomial(g, gw.area(cls), cut) * theta(cls, cut)
        for i in range(n):
            for j in range(n):
                if cls[i] and cls[j]:
                    out[i][j] = out[i][j] + term * (cls[i] * cls[j])
    return out


def is_critical(gw: GwTable, theta: ThetaPoint, cutoff=None) -> bool:
    return all(g.is_zero() for g in grad_phi(gw, theta, cutoff))


@dataclass(frozen=True)
class Obstructed:
    """No critical point: the gradient cannot be cancelled at ``level``."""

    level: Fraction
    leading: tuple  # leading gradient coefficients at that level
    reason: str = "leading gradient term not cancellable by a positive-valuation step"

    def to_json(self) -> dict:
        return {"obstructed": True, "level": fmt_rational(self.level),
                "leading": [fmt_rational(x) for x in self.leading], "reason": self.reason}


def _theta_from_log(mu: list[NovikovSeries], cutoff) -> ThetaPoint:
    lams = []
    for m in mu:
        lam = exp_pos(m.truncate(cutoff)) - 1
        lams.append(lam.with_cutoff(INF))
    return ThetaPoint(tuple(lams))


def _leading_step(h, lead: tuple, v, cut):
    """A positive-valuation dmu with H dmu = -lead q^v modulo q^{>v}, or None.

    With P H Q = diag(q^{v_i}) every row i of P(-lead q^v) whose q^v
    coefficient is nonzero needs a pivot v_i < v; rows already of higher
    valuation are left for later iterations.
    """
    el = valring.eliminate(h, cut)
    rhs = [NovikovSeries.monomial(-c, v, cut) for c in lead]
    prhs = valring.matvec(el.P, rhs)
    y = []
    for i in range(el.cols):
        c = prhs[i].coeff(v) if i < el.rows else Fraction(0)
        if prhs[i].cutoff <= v:
            raise ValueError("precision exhausted while solving for a critical point")
        if c == 0:
            y.append(NovikovSeries.zero(cut))
        elif i < el.rank and el.valuations[i] < v:
            y.append(NovikovSeries.monomial(c, v - el.valuations[i], cut))
        else:
            return None
    for i in range(el.cols, el.rows):
        if prhs[i].coeff(v) != 0:
            return None
    return valring.matvec(el.Q, y)


def solve_critical(gw: GwTable, cutoff=None, max_iter: int = 1000):
    """Find theta with grad_phi == 0 mod q^cutoff, or report an obstruction.

    Order-by-order (Hensel) iteration in the logarithmic coordinates
    mu_i = log theta(e_i): each step removes the lowest-valuation part of
    the gradient with a positive-valuation correction computed from the
    Hessian over the valuation ring.  The gradient valuation strictly
    increases, so the loop ends at the cutoff or at an obstruction.
    Free parameters are pinned to 0.
    """
    cut = gw.cutoff if cutoff is None else min(gw.cutoff, as_cutoff(cutoff))
    if cut == INF:
        raise ValueError("solve_critical needs a finite cutoff")
    n = gw.n
    mu = [NovikovSeries.zero() for _ in range(n)]
    for _ in range(max_iter):
        theta = _theta_from_log(mu, cut)
        g = grad_phi(gw, theta, cut)
        v = min(x.valuation() for x in g) if g else INF
        if v == INF:
            return theta
        lead = tuple(x.coeff(v) for x in g)
        step = _leading_step(hessian(gw, theta, cut), lead, v, cut)
        if step is None:
            return Obstructed(Fraction(v), lead)
        mu = [(m + s.truncate(cut)).with_cutoff(INF) for m, s in zip(mu, step)]
    raise RuntimeError("critical-point iteration did not converge")


def log_coordinates(theta: ThetaPoint, cutoff) -> list[NovikovSeries]:
    return [log_unit(theta.basis_value(i, cutoff)) for i in range(theta.n)]
