"""Integer homology of 3-manifolds from presentations.

Finitely presented abelian groups are handled through the Smith normal form.
The invariant ``I(N)`` is ``|H_1(N; Z)|`` when finite and 0 otherwise; the
cone-smoothing report computes it for the cone link and its three fillings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Matrix = list[list[int]]

FILLING_SLOPES = ((1, 0), (0, 1), (-1, -1))


def _copy(m) -> Matrix:
    return [[int(x) for x in row] for row in m]


def _identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class SmithForm:
    """Result of :func:`smith_decomposition`: ``U @ M @ V == D``."""

    divisors: tuple[int, ...]
    rank: int
    rows: int
    cols: int
    U: tuple = field(repr=False, default=())
    V: tuple = field(repr=False, default=())


def smith_decomposition(m) -> SmithForm:
    """Smith normal form with unimodular transforms U (rows) and V (columns).

    The diagonal ``d_1 | d_2 | ...`` has ``min(rows, cols)`` entries, zeros
    last.  Works on Python integers, so there is no overflow.
    """
    a = _copy(m)
    r = len(a)
    c = len(a[0]) if r else 0
    U = _identity(r)
    V = _identity(c)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row_dst += k * row_src
        if k:
            a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
            U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, k):  # col_dst += k * col_src
        if k:
            for row in a:
                row[dst] += k * row[src]
            for row in V:
                row[dst] += k * row[src]

    t = 0
    while t < min(r, c):
        nz = [(abs(a[i][j]), i, j) for i in range(t, r) for j in range(t, c) if a[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            done = True
            for i in range(t + 1, r):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        done = False
                        if abs(a[i][t]) < abs(a[t][t]):
                            swap_rows(t, i)
            for j in range(t + 1, c):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        done = False
                        if abs(a[t][j]) < abs(a[t][t]):
                            swap_cols(t, j)
            if not done:
                continue
            # divisibility: pivot must divide every remaining entry
            bad = next(((i, j) for i in range(t + 1, r) for j in range(t + 1, c)
                        if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diag = tuple(a[i][i] for i in range(min(r, c)))
    rank = sum(1 for d in diag if d)
    return SmithForm(diag, rank, r, c, tuple(map(tuple, U)), tuple(map(tuple, V)))


def smith_normal_form(m) -> tuple[list[int], int]:
    """Elementary divisors and rank of an integer matrix."""
    sf = smith_decomposition(m)
    return list(sf.divisors), sf.rank


@dataclass(frozen=True)
class AbelianGroupPresentation:
    """Z^generators modulo the row span of ``relations``."""

    generators: int
    relations: tuple = ()

    def __post_init__(self):
        if self.generators < 0:
            raise ValueError("generator count must be nonnegative")
        rels = tuple(tuple(int(x) for x in row) for row in self.relations)
        for k, row in enumerate(rels):
            if len(row) != self.generators:
                raise ValueError(f"relation {k} has {len(row)} entries, expected {self.generators}")
        object.__setattr__(self, "relations", rels)

    def invariant_factors(self) -> tuple[list[int], int]:
        """(torsion orders > 1, free rank)."""
        if self.generators == 0:
            return [], 0
        if not self.relations:
            return [], self.generators
        divs, rank = smith_normal_form([list(r) for r in self.relations])
        torsion = [d for d in divs if d > 1]
        return torsion, self.generators - rank

    def order(self) -> int:
        """Group order, 0 meaning infinite."""
        torsion, free = self.invariant_factors()
        if free:
            return 0
        out = 1
        for d in torsion:
            out *= d
        return out

    def with_relations(self, extra) -> "AbelianGroupPresentation":
        return AbelianGroupPresentation(self.generators, self.relations + tuple(tuple(r) for r in extra))


def i_invariant(p: AbelianGroupPresentation) -> int:
    """|H_1| if finite, else 0."""
    return p.order()


def connect_sum_i(i1: int, i2: int) -> int:
    if i1 < 0 or i2 < 0:
        raise ValueError("I-invariants are nonnegative")
    return i1 * i2


def direct_sum(p1: AbelianGroupPresentation, p2: AbelianGroupPresentation) -> AbelianGroupPresentation:
    """Block-diagonal presentation of p1 (+) p2 (H_1 of a connected sum)."""
    g1, g2 = p1.generators, p2.generators
    rels = [list(r) + [0] * g2 for r in p1.relations]
    rels += [[0] * g1 + list(r) for r in p2.relations]
    return AbelianGroupPresentation(g1 + g2, tuple(map(tuple, rels)))


def _left_kernel(rows: Matrix) -> Matrix:
    """Integer basis of {x : x @ rows == 0}."""
    if not rows:
        return []
    sf = smith_decomposition(rows)
    return [list(sf.U[i]) for i in range(sf.rank, sf.rows)]


def _lattice_basis_2d(vectors) -> list[tuple[int, int]]:
    """Echelon basis of the sublattice of Z^2 spanned by ``vectors``."""
    rows = [list(v) for v in vectors if any(v)]
    basis = []
    for col in (0, 1):
        live = [r for r in rows if r[col]]
        rest = [r for r in rows if not r[col]]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv, others = live[0], live[1:]
            live = [piv]
            for r in others:
                k = r[col] // piv[col]
                r = [r[0] - k * piv[0], r[1] - k * piv[1]]
                (live if r[col] else rest).append(r)
        basis.extend(tuple(r) for r in live)
        rows = [r for r in rest if any(r)]
    return basis


def _normalize_slope(b: tuple[int, int]) -> tuple[int, int]:
    b1, b2 = b
    if b1 < 0 or (b1 == 0 and b2 < 0):
        return (-b1, -b2)
    return (b1, b2)


@dataclass(frozen=True)
class ConeSmoothingInput:
    presentation: AbelianGroupPresentation
    rho: tuple  # two rows: rho(1,0), rho(0,1), each of length g

    def __post_init__(self):
        rho = tuple(tuple(int(x) for x in row) for row in self.rho)
        if len(rho) != 2:
            raise ValueError("rho must list exactly two images, rho(1,0) and rho(0,1)")
        g = self.presentation.generators
        for k, row in enumerate(rho):
            if len(row) != g:
                raise ValueError(f"rho[{k}] has {len(row)} entries, expected {g}")
        object.__setattr__(self, "rho", rho)

    def image(self, lam: tuple[int, int]) -> tuple[int, ...]:
        m, n = lam
        return tuple(m * x + n * y for x, y in zip(*self.rho))

    @classmethod
    def from_json(cls, obj: dict) -> "ConeSmoothingInput":
        for key in ("generators", "relations", "rho"):
            if key not in obj:
                raise ValueError(f"missing field '{key}'")
        p = AbelianGroupPresentation(int(obj["generators"]), tuple(map(tuple, obj["relations"])))
        return cls(p, tuple(map(tuple, obj["rho"])))


def rho_kernel(inp: ConeSmoothingInput) -> list[tuple[int, int]]:
    """Basis of Ker(rho: Z^2 -> H_1(P))."""
    p = inp.presentation
    rows = [list(inp.rho[0]), list(inp.rho[1])] + [list(r) for r in p.relations]
    if p.generators == 0:
        return [(1, 0), (0, 1)]
    ker = _left_kernel(rows)
    proj = [(v[0], v[1]) for v in ker]
    return _lattice_basis_2d(proj)


def sign(x: int) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class ConeSmoothingReport:
    slope: tuple[int, int]
    i_link: int
    i_fillings: tuple[int, int, int]
    pairings: tuple[int, int, int]
    signed_sum: int

    @property
    def ok(self) -> bool:
        return self.i_link == 0 or self.signed_sum == 0

    def to_json(self) -> dict:
        return {
            "slope": list(self.slope),
            "I_N0": self.i_link,
            "I_fillings": list(self.i_fillings),
            "pairings": list(self.pairings),
            "signed_sum": self.signed_sum,
            "check": "PASS" if self.ok else "FAIL",
        }


def cone_smoothings(inp: ConeSmoothingInput) -> ConeSmoothingReport:
    """I-invariants of the link N0 and the three fillings, plus the signed sum.

    The pairing ``c_a = det(lambda_a, b)`` of each filling slope against the
    kernel slope ``b`` is reported alongside the directly computed orders.
    """
    ker = rho_kernel(inp)
    if len(ker) != 1:
        raise ValueError(f"kernel of rho has rank {len(ker)}, expected 1")
    b = _normalize_slope(ker[0])
    p = inp.presentation
    i0 = i_invariant(p.with_relations([inp.rho[0], inp.rho[1]]))
    ifill = tuple(i_invariant(p.with_relations([inp.image(lam)])) for lam in FILLING_SLOPES)
    pair = tuple(lam[0] * b[1] - lam[1] * b[0] for lam in FILLING_SLOPES)
    signed = sum(sign(c) * i for c, i in zip(pair, ifill))
    return ConeSmoothingReport(b, i0, ifill, pair, signed)
