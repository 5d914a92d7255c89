"""Synthetic moduli data: associative records, linking data and flag signs.

A :class:`Catalog` fixes a rank ``n`` for H_3(X; Z)/torsion, a rational area
class ``gamma`` and a finite list of :class:`AssocRecord` entries together
with a symmetric rational linking map.  Catalogs are immutable; transitions
build new ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping

from .novikov import as_fraction, fmt_rational

HomologyClass = tuple  # tuple of ints, length n


def as_class(v, n: int | None = None) -> HomologyClass:
    out = tuple(int(x) for x in v)
    if any(Fraction(x) != int(Fraction(x)) for x in v):
        raise ValueError(f"class {list(v)} has non-integer entries")
    if n is not None and len(out) != n:
        raise ValueError(f"class {list(v)} has length {len(out)}, expected {n}")
    return out


def pair(a: Iterable, b: Iterable) -> Fraction:
    """Euclidean pairing of two coordinate vectors."""
    return sum((Fraction(x) * Fraction(y) for x, y in zip(a, b)), Fraction(0))


def class_add(a: HomologyClass, b: HomologyClass) -> HomologyClass:
    return tuple(x + y for x, y in zip(a, b))


def class_scale(k: int, a: HomologyClass) -> HomologyClass:
    return tuple(k * x for x in a)


@dataclass(frozen=True)
class AssocRecord:
    """One associative 3-fold, modelled by its discrete data.

    ``weight`` is the rational factor Or * I / |Iso| entering the tree sum.
    """

    id: str
    cls: HomologyClass
    orientation: int = 1
    i_inv: int = 1
    iso: int = 1
    flag: int = 0

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "cls", tuple(int(x) for x in self.cls))
        if self.orientation not in (1, -1):
            raise ValueError(f"record {self.id}: orientation must be +1 or -1")
        if int(self.i_inv) < 0:
            raise ValueError(f"record {self.id}: I-invariant must be nonnegative")
        if int(self.iso) < 1:
            raise ValueError(f"record {self.id}: isotropy order must be positive")

    @property
    def weight(self) -> Fraction:
        return Fraction(self.orientation * self.i_inv, self.iso)

    def to_json(self) -> dict:
        return {"id": self.id, "class": list(self.cls), "or": self.orientation,
                "i": self.i_inv, "iso": self.iso, "flag": self.flag}

    @classmethod
    def from_json(cls, obj: Mapping, where: str = "record") -> "AssocRecord":
        try:
            return cls(
                id=str(obj["id"]),
                cls=as_class(obj["class"]),
                orientation=int(obj.get("or", 1)),
                i_inv=int(obj.get("i", 1)),
                iso=int(obj.get("iso", 1)),
                flag=int(obj.get("flag", 0)),
            )
        except KeyError as exc:
            raise ValueError(f"{where}: missing field {exc}") from exc


def link_key(a: str, b: str) -> tuple[str, str]:
    """Canonical (unordered) key of a linking entry."""
    return (a, b) if a <= b else (b, a)


_key = link_key


class CatalogError(ValueError):
    """Raised when catalog data violates an invariant."""


@dataclass(frozen=True)
class Catalog:
    n: int
    gamma: tuple
    records: tuple = ()
    linking: Mapping = field(default_factory=dict)

    def __post_init__(self):
        gamma = tuple(as_fraction(g) for g in self.gamma)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "records", tuple(self.records))
        # store linking with unordered keys; the symmetric check happens in validate
        link = {}
        for (a, b), v in dict(self.linking).items():
            v = as_fraction(v)
            k = _key(a, b)
            if k in link and link[k] != v:
                raise CatalogError(f"linking({a},{b}) is not symmetric: {link[k]} vs {v}")
            if v != 0:
                link[k] = v
        object.__setattr__(self, "linking", link)
        self.validate()

    # -- accessors ----------------------------------------------------------
    def index(self, rid: str) -> int:
        for i, r in enumerate(self.records):
            if r.id == rid:
                return i
        raise KeyError(f"unknown record id '{rid}'")

    def record(self, rid: str) -> AssocRecord:
        return self.records[self.index(rid)]

    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def link(self, a: str, b: str) -> Fraction:
        return self.linking.get(_key(a, b), Fraction(0))

    def area(self, cls: HomologyClass) -> Fraction:
        return pair(self.gamma, cls)

    def record_area(self, r: AssocRecord) -> Fraction:
        return self.area(r.cls)

    def link_matrix(self) -> list[list[Fraction]]:
        ids = self.ids()
        return [[self.link(a, b) for b in ids] for a in ids]

    # -- validation ---------------------------------------------------------
    def validate(self) -> dict:
        """Check invariants and return a report listing records by area."""
        if self.n < 0:
            raise CatalogError("n must be nonnegative")
        if len(self.gamma) != self.n:
            raise CatalogError(f"gamma has length {len(self.gamma)}, expected n = {self.n}")
        seen = set()
        for r in self.records:
            if r.id in seen:
                raise CatalogError(f"duplicate record id '{r.id}'")
            seen.add(r.id)
            if len(r.cls) != self.n:
                raise CatalogError(f"record {r.id}: class length {len(r.cls)}, expected {self.n}")
            if self.area(r.cls) <= 0:
                raise CatalogError(f"record {r.id}: area gamma.class = {self.area(r.cls)} is not positive")
        for a, b in self.linking:
            if a not in seen or b not in seen:
                raise CatalogError(f"linking entry ({a},{b}) refers to an unknown record")
        by_area = sorted(((self.area(r.cls), r.id) for r in self.records))
        return {"valid": True, "records_by_area": [(fmt_rational(a), rid) for a, rid in by_area]}

    # -- functional updates -------------------------------------------------
    def with_records(self, records, linking=None) -> "Catalog":
        return Catalog(self.n, self.gamma, tuple(records), self.linking if linking is None else linking)

    def with_linking(self, linking) -> "Catalog":
        return Catalog(self.n, self.gamma, self.records, linking)

    def add_record(self, rec: AssocRecord, row: Mapping[str, Fraction] | None = None) -> "Catalog":
        link = dict(self.linking)
        for other, v in (row or {}).items():
            link[_key(rec.id, other)] = as_fraction(v)
        return Catalog(self.n, self.gamma, self.records + (rec,), link)

    def remove_record(self, rid: str) -> "Catalog":
        self.index(rid)
        recs = tuple(r for r in self.records if r.id != rid)
        link = {k: v for k, v in self.linking.items() if rid not in k}
        return Catalog(self.n, self.gamma, recs, link)

    def set_link(self, a: str, b: str, value) -> "Catalog":
        link = dict(self.linking)
        link[_key(a, b)] = as_fraction(value)
        return Catalog(self.n, self.gamma, self.records, link)

    def replace_record(self, rec: AssocRecord) -> "Catalog":
        i = self.index(rec.id)
        recs = list(self.records)
        recs[i] = rec
        return Catalog(self.n, self.gamma, tuple(recs), self.linking)

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "gamma": [fmt_rational(g) for g in self.gamma],
            "records": [r.to_json() for r in self.records],
            "linking": [{"a": a, "b": b, "value": fmt_rational(v)}
                        for (a, b), v in sorted(self.linking.items())],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Catalog":
        if not isinstance(obj, Mapping):
            raise CatalogError("catalog must be a JSON object")
        for key in ("n", "gamma"):
            if key not in obj:
                raise CatalogError(f"catalog: missing field '{key}'")
        records = tuple(AssocRecord.from_json(r, f"records[{i}]") for i, r in enumerate(obj.get("records", [])))
        link: dict = {}
        for i, e in enumerate(obj.get("linking", [])):
            try:
                a, b, v = str(e["a"]), str(e["b"]), as_fraction(e["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise CatalogError(f"linking[{i}]: {exc}") from exc
            k = _key(a, b)
            if k in link and link[k] != v:
                raise CatalogError(f"linking[{i}]: entry ({a},{b}) = {v} contradicts its transpose {link[k]}")
            link[k] = v
        try:
            gamma = tuple(as_fraction(g) for g in obj["gamma"])
        except (TypeError, ValueError) as exc:
            raise CatalogError(f"gamma: {exc}") from exc
        return cls(int(obj["n"]), gamma, records, link)


def catalog_from_matrix(n: int, gamma, records, matrix) -> Catalog:
    """Build a catalog from a full linking matrix (checked for symmetry)."""
    ids = [r.id for r in records]
    link = {}
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            v = as_fraction(matrix[i][j])
            if as_fraction(matrix[j][i]) != v:
                raise CatalogError(f"linking matrix not symmetric at ({a},{b})")
            if j >= i and v:
                link[(a, b)] = v
    return Catalog(n, tuple(gamma), tuple(records), link)


# -- flag structures -----------------------------------------------------------

@dataclass(frozen=True)
class FlagStructureModel:
    """A flag structure modelled by its values on a basis of H_3.

    ``signs[i]`` is the sign attached to the basis class e_i at offset 0,
    offsets being measured from a fixed reference flag.  The sign of a
    general flagged class is the multiplicative extension times
    ``(-1)^offset``.
    """

    signs: tuple

    def __post_init__(self):
        s = tuple(int(x) for x in self.signs)
        if any(x not in (1, -1) for x in s):
            raise ValueError("flag signs must be +1 or -1")
        object.__setattr__(self, "signs", s)

    @property
    def n(self) -> int:
        return len(self.signs)


def eps_value(eps: Iterable[int], cls: HomologyClass) -> int:
    """Value of the morphism H_3 -> {+1,-1} with basis values ``eps`` on ``cls``."""
    out = 1
    for e, c in zip(eps, cls):
        if e == -1 and c % 2:
            out = -out
    return out


def flag_sign(F: FlagStructureModel, cls: HomologyClass, offset: int) -> int:
    """Sign of a flagged class: multiplicative in cls, (-1)^offset in the flag."""
    if len(cls) != F.n:
        raise ValueError("class length does not match the flag structure")
    s = eps_value(F.signs, cls)
    return s * (-1 if offset % 2 else 1)


def twist_structure(F: FlagStructureModel, eps) -> FlagStructureModel:
    eps = tuple(int(e) for e in eps)
    if len(eps) != F.n or any(e not in (1, -1) for e in eps):
        raise ValueError("eps must be a +-1 vector of length n")
    return FlagStructureModel(tuple(a * b for a, b in zip(F.signs, eps)))


def compare_structures(F: FlagStructureModel, G: FlagStructureModel) -> tuple[int, ...]:
    """The morphism eps with F = G * eps."""
    if F.n != G.n:
        raise ValueError("flag structures over different lattices")
    return tuple(a * b for a, b in zip(F.signs, G.signs))


def all_structures(n: int) -> list[FlagStructureModel]:
    return [FlagStructureModel(s) for s in product((1, -1), repeat=n)]


def offset_difference(before: Mapping[str, int], after: Mapping[str, int], a: str, b: str) -> int:
    """Abstract D-difference between two flagged records: D changes by
    -k_a + k_b when the offsets move by k_a and k_b."""
    ka = after[a] - before[a]
    kb = after[b] - before[b]
    return -ka + kb


def transition_flag_offset(base: int, delta_sign: int) -> int:
    """Offset of a record born at a transition: +1 if delta > 0, else +0."""
    if delta_sign not in (1, -1):
        raise ValueError("delta sign must be +1 or -1")
    return base + (1 if delta_sign > 0 else 0)


def with_flag(rec: AssocRecord, flag: int) -> AssocRecord:
    return replace(rec, flag=flag)
