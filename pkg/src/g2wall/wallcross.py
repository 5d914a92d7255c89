"""Wall-crossing transitions on catalogs and quasi-identity reparametrizations.

A :class:`Transition` rewrites a catalog the way a generic one-parameter
family of G_2-structures changes its associative 3-folds.  Kinds:

* ``A``  birth of a pair of records with opposite orientation;
* ``B``  a crossing of two records, producing their connected sum;
* ``C``  a self connected sum with S^1 x S^2 (weight zero);
* ``D``  a self crossing, producing a record in twice the class;
* ``E``  a cone splitting, one record replaced by two;
* ``X``  a record sweeping across a 3-cycle, shifting its linking data.

The superpotential is invariant under A-E (under the stated hypotheses) and
changes by the reparametrization returned by :func:`cycle_cross` under X.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .catalog import (AssocRecord, Catalog, CatalogError, class_add, link_key, pair,
                      transition_flag_offset)
from .novikov import INF, NovikovSeries, as_cutoff, as_fraction, exp_pos, fmt_cutoff, fmt_rational
from .superpotential import ThetaPoint, eval_phi, tree_terms

KINDS = ("A", "B", "C", "D", "E", "X")


class TransitionError(ValueError):
    """A transition's preconditions do not hold."""


# -- dual numbers --------------------------------------------------------------

@dataclass(frozen=True)
class DualScalar:
    """re + inf * eps with eps^2 = 0, exact rationals."""

    re: Fraction = Fraction(0)
    inf: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "inf", Fraction(self.inf))

    @staticmethod
    def lift(x) -> "DualScalar":
        return x if isinstance(x, DualScalar) else DualScalar(Fraction(x), Fraction(0))

    def __add__(self, o):
        o = DualScalar.lift(o)
        return DualScalar(self.re + o.re, self.inf + o.inf)

    __radd__ = __add__

    def __neg__(self):
        return DualScalar(-self.re, -self.inf)

    def __sub__(self, o):
        return self + (-DualScalar.lift(o))

    def __mul__(self, o):
        o = DualScalar.lift(o)
        return DualScalar(self.re * o.re, self.re * o.inf + self.inf * o.re)

    __rmul__ = __mul__


@dataclass(frozen=True)
class DualSeries:
    """A pair (re, inf) of Novikov series standing for re + inf * eps."""

    re: NovikovSeries
    inf: NovikovSeries

    @staticmethod
    def lift(x, cutoff) -> "DualSeries":
        if isinstance(x, DualSeries):
            return x
        if isinstance(x, DualScalar):
            return DualSeries(NovikovSeries.const(x.re, cutoff), NovikovSeries.const(x.inf, cutoff))
        if isinstance(x, NovikovSeries):
            return DualSeries(x, NovikovSeries.zero(x.cutoff))
        return DualSeries(NovikovSeries.const(as_fraction(x), cutoff), NovikovSeries.zero(cutoff))

    def __add__(self, o):
        return DualSeries(self.re + o.re, self.inf + o.inf)

    def __sub__(self, o):
        return DualSeries(self.re - o.re, self.inf - o.inf)

    def __mul__(self, o):
        return DualSeries(self.re * o.re, self.re * o.inf + self.inf * o.re)


# -- transitions ---------------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    kind: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TransitionError(f"unknown transition kind '{self.kind}'")

    @classmethod
    def from_json(cls, obj: Mapping, kind: str | None = None) -> "Transition":
        k = kind or obj.get("kind")
        if k is None:
            raise TransitionError("transition parameters need a 'kind'")
        if obj.get("kind") not in (None, k):
            raise TransitionError(f"parameter file is tagged '{obj.get('kind')}', not '{k}'")
        return cls(k, {key: v for key, v in obj.items() if key != "kind"})

    def to_json(self) -> dict:
        return {"kind": self.kind, **dict(self.params)}


def _sign(x, name) -> int:
    x = int(x)
    if x not in (1, -1):
        raise TransitionError(f"{name} must be +1 or -1")
    return x


def _row(c: Catalog, rid: str) -> dict:
    return {x: c.link(rid, x) for x in c.ids()}


def _need(params, key, kind):
    if key not in params:
        raise TransitionError(f"({kind}) missing parameter '{key}'")
    return params[key]


def _record(obj, where) -> AssocRecord:
    try:
        return AssocRecord.from_json(obj, where)
    except (TypeError, ValueError) as exc:
        raise TransitionError(str(exc)) from exc


def _apply_A(c: Catalog, p) -> Catalog:
    recs = _need(p, "records", "A")
    if len(recs) != 2:
        raise TransitionError("(A) needs exactly two records")
    r1, r2 = (_record(r, f"records[{i}]") for i, r in enumerate(recs))
    if r1.cls != r2.cls:
        raise TransitionError("(A) records must have identical classes")
    if r1.orientation != -r2.orientation:
        raise TransitionError("(A) records must have opposite orientations")
    if r1.i_inv != r2.i_inv or r1.iso != r2.iso:
        raise TransitionError("(A) records must have equal I-invariant and isotropy order")
    row = {str(k): as_fraction(v) for k, v in dict(p.get("row", {})).items()}
    for x in row:
        c.index(x)
    s = as_fraction(p.get("self", 0))
    link = dict(c.linking)
    for x, v in row.items():
        link[link_key(r1.id, x)] = v
        link[link_key(r2.id, x)] = v
    link[link_key(r1.id, r1.id)] = s
    link[link_key(r2.id, r2.id)] = s
    link[link_key(r1.id, r2.id)] = s
    return Catalog(c.n, c.gamma, c.records + (r1, r2), link)


def _apply_B(c: Catalog, p, corrupt_sign: bool = False) -> Catalog:
    plus, minus = str(_need(p, "plus", "B")), str(_need(p, "minus", "B"))
    if plus == minus:
        raise TransitionError("(B) needs two distinct records; use (D) for a self crossing")
    eps = _sign(_need(p, "eps", "B"), "eps")
    rp, rm = c.record(plus), c.record(minus)
    new_id = str(p.get("new_id", f"{plus}#{minus}"))
    if new_id in c.ids():
        raise TransitionError(f"(B) new id '{new_id}' already in use")
    orient = rp.orientation * rm.orientation * eps * (-1 if corrupt_sign else 1)
    flag = transition_flag_offset(rp.flag + rm.flag, _sign(p.get("delta_sign", 1), "delta_sign"))
    new = AssocRecord(new_id, class_add(rp.cls, rm.cls), orient, rp.i_inv * rm.i_inv,
                      rp.iso * rm.iso, flag)
    l_pm = c.link(plus, minus)
    l_pp, l_mm = c.link(plus, plus), c.link(minus, minus)
    link = dict(c.linking)
    link[link_key(plus, minus)] = l_pm - eps
    for x in c.ids():
        if x not in (plus, minus):
            link[link_key(new_id, x)] = c.link(plus, x) + c.link(minus, x)
    convention = p.get("convention", "additive")
    if convention == "balanced":
        # rows towards the parents use the mean of the old and new (+,-) entry;
        # with this diagonal every tree of parent-degree (2,1), (1,2), (2,2) cancels
        mid = l_pm - Fraction(eps, 2)
        link[link_key(new_id, plus)] = l_pp + mid
        link[link_key(new_id, minus)] = l_mm + mid
        link[link_key(new_id, new_id)] = l_pp + l_mm + 2 * l_pm - Fraction(eps, 2)
    elif convention == "additive":
        link[link_key(new_id, plus)] = l_pp + l_pm
        link[link_key(new_id, minus)] = l_mm + l_pm
        link[link_key(new_id, new_id)] = l_pp + l_mm + 2 * (l_pm - eps)
    else:
        raise TransitionError(f"(B) unknown linking convention '{convention}'")
    return Catalog(c.n, c.gamma, c.records + (new,), link)


def _apply_C(c: Catalog, p) -> Catalog:
    base = c.record(str(_need(p, "base", "C")))
    obj = dict(_need(p, "record", "C"))
    obj.setdefault("class", list(base.cls))
    obj.setdefault("i", 0)
    new = _record(obj, "record")
    if new.i_inv != 0:
        raise TransitionError("(C) new record must have I = 0 (b^1 > 0)")
    if new.cls != base.cls:
        raise TransitionError("(C) new record must lie in the class of its base")
    if new.id in c.ids():
        raise TransitionError(f"(C) new id '{new.id}' already in use")
    row = {str(k): as_fraction(v) for k, v in dict(p.get("row", {})).items()}
    for x in row:
        c.index(x)
    link = dict(c.linking)
    for x, v in row.items():
        link[link_key(new.id, x)] = v
    link[link_key(new.id, new.id)] = as_fraction(p.get("self", 0))
    return Catalog(c.n, c.gamma, c.records + (new,), link)


def _apply_D(c: Catalog, p, corrupt_sign: bool = False) -> Catalog:
    rid = str(_need(p, "record", "D"))
    r = c.record(rid)
    eps = _sign(_need(p, "eps", "D"), "eps")
    new_id = str(p.get("new_id", f"{rid}#{rid}"))
    if new_id in c.ids():
        raise TransitionError(f"(D) new id '{new_id}' already in use")
    flag = transition_flag_offset(2 * r.flag, _sign(p.get("delta_sign", 1), "delta_sign"))
    new = AssocRecord(new_id, tuple(2 * x for x in r.cls), eps * (-1 if corrupt_sign else 1),
                      r.i_inv ** 2, r.iso ** 2, flag)
    l_rr = c.link(rid, rid)
    link = dict(c.linking)
    link[link_key(rid, rid)] = l_rr - 2 * eps
    for x in c.ids():
        if x != rid:
            link[link_key(new_id, x)] = 2 * c.link(rid, x)
    link[link_key(new_id, rid)] = 2 * (l_rr - eps)
    # cancels the trees with up to five vertices in the self-crossing record
    link[link_key(new_id, new_id)] = 4 * l_rr - Fraction(4 * eps, 3)
    return Catalog(c.n, c.gamma, c.records + (new,), link)


def _apply_E(c: Catalog, p) -> Catalog:
    rid = str(_need(p, "replace", "E"))
    old = c.record(rid)
    news = _need(p, "records", "E")
    if len(news) != 2:
        raise TransitionError("(E) needs exactly two replacement records")
    objs = []
    for i, o in enumerate(news):
        o = dict(o)
        o.setdefault("class", list(old.cls))
        objs.append(_record(o, f"records[{i}]"))
    r2, r3 = objs
    if r2.cls != old.cls or r3.cls != old.cls:
        raise TransitionError("(E) replacements must share the class of the replaced record")
    if old.weight != r2.weight + r3.weight:
        raise TransitionError(
            f"(E) weights do not split: Or*I/|Iso| = {old.weight} but replacements give "
            f"{r2.weight} + {r3.weight}")
    others = [x for x in c.ids() if x != rid]
    for r in (r2, r3):
        if r.id in others:
            raise TransitionError(f"(E) new id '{r.id}' already in use")
    if r2.id == r3.id:
        raise TransitionError("(E) replacement ids must differ")
    base = c.remove_record(rid)
    link = dict(base.linking)
    for x in others:
        v = c.link(rid, x)
        link[link_key(r2.id, x)] = v
        link[link_key(r3.id, x)] = v
    s = c.link(rid, rid)
    link[link_key(r2.id, r2.id)] = s
    link[link_key(r3.id, r3.id)] = s
    link[link_key(r2.id, r3.id)] = s
    return Catalog(c.n, c.gamma, base.records + (r2, r3), link)


def _apply_X(c: Catalog, p) -> Catalog:
    return cycle_cross(c, str(_need(p, "record", "X")), _need(p, "delta", "X"),
                       int(p.get("eps", 1)))[0]


def apply(c: Catalog, t: Transition) -> Catalog:
    """Return the catalog after transition ``t``."""
    p = t.params
    try:
        if t.kind == "A":
            return _apply_A(c, p)
        if t.kind == "B":
            return _apply_B(c, p, bool(p.get("corrupt_sign", False)))
        if t.kind == "C":
            return _apply_C(c, p)
        if t.kind == "D":
            return _apply_D(c, p, bool(p.get("corrupt_sign", False)))
        if t.kind == "E":
            return _apply_E(c, p)
        return _apply_X(c, p)
    except KeyError as exc:
        raise TransitionError(f"({t.kind}) {exc.args[0]}") from exc
    except CatalogError as exc:
        raise TransitionError(f"({t.kind}) resulting catalog invalid: {exc}") from exc


# -- quasi-identity morphisms ---------------------------------------------------

@dataclass(frozen=True)
class QIGenerator:
    coeff: Fraction
    base: tuple
    delta: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_fraction(self.coeff))
        object.__setattr__(self, "base", tuple(int(x) for x in self.base))
        object.__setattr__(self, "delta", tuple(as_fraction(x) for x in self.delta))


@dataclass(frozen=True)
class QuasiIdentity:
    """Composite of maps theta(alpha) -> theta(alpha) exp(c q^{gamma.a0} theta(a0) (alpha.delta)).

    Generators are applied in list order, each one seeing the output of the
    previous ones.
    """

    n: int
    gamma: tuple
    generators: tuple = ()

    def __post_init__(self):
        gamma = tuple(as_fraction(g) for g in self.gamma)
        object.__setattr__(self, "gamma", gamma)
        gens = tuple(self.generators)
        for g in gens:
            if len(g.base) != self.n or len(g.delta) != self.n:
                raise ValueError("generator dimensions do not match n")
            if pair(gamma, g.base) <= 0:
                raise ValueError("generator base class must have positive area")
        object.__setattr__(self, "generators", gens)

    @property
    def epsilon(self):
        """Minimal generator area: the gain in valuation of every increment."""
        return min((pair(self.gamma, g.base) for g in self.generators), default=INF)

    def to_json(self) -> dict:
        return {"generators": [{"coeff": fmt_rational(g.coeff), "base": list(g.base),
                                "delta": [fmt_rational(x) for x in g.delta]} for g in self.generators]}


def qi_compose(u: QuasiIdentity, w: QuasiIdentity) -> QuasiIdentity:
    """The map 'apply u, then w'."""
    if u.n != w.n or u.gamma != w.gamma:
        raise ValueError("quasi-identities over different lattices")
    return QuasiIdentity(u.n, u.gamma, u.generators + w.generators)


def qi_apply(u: QuasiIdentity, theta: ThetaPoint, cutoff) -> ThetaPoint:
    cutoff = as_cutoff(cutoff)
    if theta.n != u.n:
        raise ValueError("theta dimension mismatch")
    lams = [l.truncate(cutoff) for l in theta.lambdas]
    for g in u.generators:
        cur = ThetaPoint(tuple(lams))
        w = NovikovSeries.monomial(g.coeff, pair(u.gamma, g.base), cutoff) * cur(g.base, cutoff)
        for j in range(u.n):
            if g.delta[j]:
                factor = exp_pos(w * g.delta[j])
                lams[j] = (lams[j] + 1) * factor - 1
    return ThetaPoint(tuple(lams))


@dataclass
class QICheckReport:
    ok: bool
    epsilon: object
    trials: int
    failures: list

    def to_json(self) -> dict:
        return {"ok": self.ok, "epsilon": fmt_cutoff(self.epsilon), "trials": self.trials,
                "failures": self.failures}


def _random_series(rng: random.Random, vmin: Fraction, cutoff, denom: int = 2) -> NovikovSeries:
    terms = []
    for _ in range(rng.randint(0, 3)):
        e = vmin + Fraction(rng.randint(0, 6), denom)
        terms.append((e, Fraction(rng.randint(-3, 3), rng.randint(1, 3))))
    return NovikovSeries(tuple(terms), cutoff)


def qi_check(u, theta_pairs_or_n: int = 20, cutoff=Fraction(5), seed: int = 0,
             epsilon=None, n: int | None = None) -> QICheckReport:
    """Check condition (ii) on random pairs theta, theta'.

    With lambda' - lambda in q^d Lambda_{>=0}, every increment difference
    Y_j(lambda') - lambda'_j - Y_j(lambda) + lambda_j must lie in
    q^{d + epsilon} Lambda_{>=0}.  ``u`` is a :class:`QuasiIdentity` or any
    callable ``(theta, cutoff) -> theta``; for a callable the claimed
    ``epsilon`` and ``n`` must be given.
    """
    cutoff = as_cutoff(cutoff)
    if isinstance(u, QuasiIdentity):
        fn = lambda th, cut: qi_apply(u, th, cut)  # noqa: E731
        eps = u.epsilon if epsilon is None else as_fraction(epsilon)
        dim = u.n
    else:
        fn = u
        eps = as_fraction(epsilon)
        dim = int(n)
    rng = random.Random(seed)
    failures = []
    trials = int(theta_pairs_or_n)
    for t in range(trials):
        d = Fraction(rng.randint(1, 4), 2)
        lam = [_random_series(rng, Fraction(1, 2), cutoff) for _ in range(dim)]
        lam2 = [l + _random_series(rng, d, cutoff) for l in lam]
        th, th2 = ThetaPoint(tuple(lam)), ThetaPoint(tuple(lam2))
        d_eff = min((b - a).valuation() for a, b in zip(lam, lam2))
        if d_eff == INF:
            continue
        y1, y2 = fn(th, cutoff), fn(th2, cutoff)
        bound = d_eff + eps
        for j in range(dim):
            inc = (y2.lambdas[j] - lam2[j]) - (y1.lambdas[j] - lam[j])
            if inc.valuation() < min(bound, cutoff):
                failures.append({"trial": t, "component": j, "delta": fmt_rational(d_eff),
                                 "valuation": fmt_cutoff(inc.valuation()), "required": fmt_cutoff(bound)})
    return QICheckReport(not failures, eps, trials, failures)


# -- cycle crossing --------------------------------------------------------------

def cycle_cross(c: Catalog, record_id: str, delta: Sequence, eps: int = 1):
    """Move record ``record_id`` across a 3-cycle with pairing vector ``delta``.

    Returns the new catalog and the single-generator quasi-identity that
    reparametrizes theta.  The effective pairing is ``eps * delta``.
    """
    r = c.record(record_id)
    eps = _sign(eps, "eps")
    if len(delta) != c.n:
        raise TransitionError(f"(X) delta has length {len(delta)}, expected {c.n}")
    d = tuple(eps * as_fraction(x) for x in delta)
    link = dict(c.linking)
    for x in c.records:
        if x.id != record_id:
            link[link_key(record_id, x.id)] = c.link(record_id, x.id) + pair(x.cls, d)
    link[link_key(record_id, record_id)] = c.link(record_id, record_id) + 2 * pair(r.cls, d)
    new = Catalog(c.n, c.gamma, c.records, link)
    if all(x == 0 for x in d):
        return new, QuasiIdentity(c.n, c.gamma, ())
    return new, QuasiIdentity(c.n, c.gamma, (QIGenerator(r.weight, r.cls, d),))


def dual_phi_after(c: Catalog, record_id: str, delta: Sequence, theta: ThetaPoint, cutoff) -> DualSeries:
    """Phi of the crossed catalog with the pairing delta made infinitesimal."""
    cutoff = as_cutoff(cutoff)
    r0 = c.record(record_id)
    cls_of = {x.id: x.cls for x in c.records}
    d = tuple(as_fraction(x) for x in delta)

    def link(a, b):
        base = c.link(a, b)
        if a == record_id and b == record_id:
            return DualScalar(base, 2 * pair(r0.cls, d))
        if a == record_id:
            return DualScalar(base, pair(cls_of[b], d))
        if b == record_id:
            return DualScalar(base, pair(cls_of[a], d))
        return DualScalar(base, 0)

    return _dual_tree_sum(c, theta, cutoff, link, None)


def dual_phi_before_reparam(c: Catalog, record_id: str, delta: Sequence, theta: ThetaPoint,
                            cutoff) -> DualSeries:
    """Phi of the original catalog at the first-order reparametrized theta."""
    cutoff = as_cutoff(cutoff)
    r0 = c.record(record_id)
    d = tuple(as_fraction(x) for x in delta)
    w0 = NovikovSeries.monomial(r0.weight, c.area(r0.cls), cutoff) * theta(r0.cls, cutoff)
    # theta(alpha) -> theta(alpha) (1 + eps w0 (alpha.delta))
    scale = {x.id: w0 * pair(x.cls, d) for x in c.records}
    return _dual_tree_sum(c, theta, cutoff, lambda a, b: DualScalar(c.link(a, b), 0), scale)


def _dual_tree_sum(c, theta, cutoff, link, scale) -> DualSeries:
    weights = {}
    for x in c.records:
        if x.i_inv == 0:
            continue
        w = NovikovSeries.monomial(x.weight, c.area(x.cls), cutoff) * theta(x.cls, cutoff)
        inf = w * scale[x.id] if scale is not None else NovikovSeries.zero(cutoff)
        weights[x.id] = DualSeries(w, inf)
    total = DualSeries(NovikovSeries.zero(cutoff), NovikovSeries.zero(cutoff))
    one, zero = DualScalar(1, 0), DualScalar(0, 0)
    for counts, rs, coef in tree_terms(c, cutoff, link, one, zero):
        term = DualSeries.lift(coef, cutoff)
        for r, m in zip(rs, counts):
            for _ in range(m):
                term = term * weights[r.id]
        total = total + term
    return total


def first_order_defect(c: Catalog, record_id: str, delta: Sequence, theta: ThetaPoint, cutoff) -> DualSeries:
    """Phi_after - Phi_before o Y0 as a dual number (both parts should vanish)."""
    return (dual_phi_after(c, record_id, delta, theta, cutoff)
            - dual_phi_before_reparam(c, record_id, delta, theta, cutoff))


# -- invariance verification ----------------------------------------------------

@dataclass
class InvarianceReport:
    ok: bool
    cutoff: object
    samples: int
    worst_valuation: object
    differences: list

    def to_json(self) -> dict:
        return {"result": "PASS" if self.ok else "FAIL", "cutoff": fmt_cutoff(self.cutoff),
                "samples": self.samples, "min_valuation_of_difference": fmt_cutoff(self.worst_valuation),
                "differences": [str(d) for d in self.differences]}

    def summary(self) -> str:
        if self.ok:
            return f"PASS: dPhi = 0 mod q^{fmt_cutoff(self.cutoff)}"
        return (f"FAIL: dPhi != 0 mod q^{fmt_cutoff(self.cutoff)} "
                f"(valuation {fmt_cutoff(self.worst_valuation)})")


def random_theta(n: int, rng: random.Random, cutoff) -> ThetaPoint:
    lams = []
    for _ in range(n):
        terms = [(Fraction(rng.randint(1, 6), 2), Fraction(rng.randint(-4, 4), rng.randint(1, 4)))
                 for _ in range(rng.randint(0, 3))]
        lams.append(NovikovSeries(tuple(terms), cutoff))
    return ThetaPoint(tuple(lams))


def verify_invariance(before: Catalog, after: Catalog, cutoff, samples: int = 3, seed: int = 0,
                      thetas: Sequence[ThetaPoint] | None = None) -> InvarianceReport:
    """Compare Phi before and after at theta = 1 and random theta, exactly."""
    cutoff = as_cutoff(cutoff)
    if before.n != after.n or before.gamma != after.gamma:
        raise ValueError("catalogs live over different (n, gamma)")
    rng = random.Random(seed)
    pts = [ThetaPoint.one(before.n)]
    pts += list(thetas) if thetas is not None else [random_theta(before.n, rng, cutoff) for _ in range(samples)]
    diffs = []
    worst = INF
    for th in pts:
        d = eval_phi(after, th, cutoff) - eval_phi(before, th, cutoff)
        diffs.append(d)
        worst = min(worst, d.valuation())
    return InvarianceReport(worst == INF, cutoff, len(pts), worst, diffs)


def verify_reparam(before: Catalog, after: Catalog, u: QuasiIdentity, cutoff, samples: int = 3,
                   seed: int = 0) -> InvarianceReport:
    """Compare Phi_after(theta) with Phi_before(u(theta)), exactly."""
    cutoff = as_cutoff(cutoff)
    rng = random.Random(seed)
    pts = [ThetaPoint.one(before.n)] + [random_theta(before.n, rng, cutoff) for _ in range(samples)]
    diffs = []
    worst = INF
    for th in pts:
        d = eval_phi(after, th, cutoff) - eval_phi(before, qi_apply(u, th, cutoff), cutoff)
        diffs.append(d)
        worst = min(worst, d.valuation())
    return InvarianceReport(worst == INF, cutoff, len(pts), worst, diffs)
