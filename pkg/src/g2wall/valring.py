"""Linear algebra over the truncated valuation ring Lambda_{>=0}.

Matrices are lists of rows of :class:`NovikovSeries`.  Elimination always
pivots on an entry of least valuation, so every quotient ``entry / pivot``
stays inside Lambda_{>=0}; the result is a Smith-like normal form
``P @ M @ Q = diag(q^{v_1}, ..., q^{v_r}, 0, ...)`` with P, Q invertible
over Lambda_{>=0}.
"""

from __future__ import annotations

from dataclasses import dataclass

from .novikov import INF, NovikovSeries, precise_mul

Matrix = list[list[NovikovSeries]]


def identity(n: int, cutoff=INF) -> Matrix:
    return [[NovikovSeries.one(cutoff) if i == j else NovikovSeries.zero(cutoff) for j in range(n)]
            for i in range(n)]


def zeros(r: int, c: int, cutoff=INF) -> Matrix:
    return [[NovikovSeries.zero(cutoff) for _ in range(c)] for _ in range(r)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    rows, inner = len(a), len(b)
    cols = len(b[0]) if b else 0
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = None
            for k in range(inner):
                t = precise_mul(a[i][k], b[k][j])
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else NovikovSeries.zero())
        out.append(row)
    return out


def matvec(a: Matrix, x: list[NovikovSeries]) -> list[NovikovSeries]:
    return [row[0] for row in matmul(a, [[v] for v in x])]


def min_cutoff(m: Matrix):
    return min((e.cutoff for row in m for e in row), default=INF)


@dataclass
class Elimination:
    """Normal form data of one matrix.

    ``valuations`` are the pivot exponents v_i in elimination order, so that
    ``P M Q`` equals q^{v_i} in position (i, i) for i < rank and vanishes
    elsewhere (modulo the tracked precision).  ``unresolved`` is the
    precision below which the remaining block is known to vanish, or None
    if nothing was left over.
    """

    P: Matrix
    Q: Matrix
    valuations: list
    rank: int
    rows: int
    cols: int
    unresolved: object = None

    def kernel_basis(self) -> list[list[NovikovSeries]]:
        """Columns of Q beyond the rank: a basis of the kernel."""
        return [[self.Q[i][j] for i in range(self.cols)] for j in range(self.rank, self.cols)]


def eliminate(m: Matrix, cutoff=None) -> Elimination:
    """Valuation-pivot elimination; ``cutoff`` optionally truncates the input."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[e if cutoff is None else e.truncate(cutoff) for e in r] for r in m]
    P = identity(rows)
    Q = identity(cols)
    vals = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = a[i][j].valuation()
                if v != INF and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, pi, pj = best
        a[t], a[pi] = a[pi], a[t]
        P[t], P[pi] = P[pi], P[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        for row in Q:
            row[t], row[pj] = row[pj], row[t]
        # normalize the pivot to q^v
        unit_inv = a[t][t].shift(-v).inverse()
        a[t] = [precise_mul(unit_inv, x) for x in a[t]]
        P[t] = [precise_mul(unit_inv, x) for x in P[t]]
        for i in range(rows):
            if i == t or a[i][t].is_zero():
                continue
            f = a[i][t].shift(-v)
            a[i] = [x - precise_mul(f, y) for x, y in zip(a[i], a[t])]
            P[i] = [x - precise_mul(f, y) for x, y in zip(P[i], P[t])]
        for j in range(t + 1, cols):
            if a[t][j].is_zero():
                continue
            f = a[t][j].shift(-v)
            for row in a:
                row[j] = row[j] - precise_mul(f, row[t])
            for row in Q:
                row[j] = row[j] - precise_mul(f, row[t])
        vals.append(v)
        t += 1
    leftover = [a[i][j] for i in range(t, rows) for j in range(t, cols)]
    unresolved = min((e.cutoff for e in leftover), default=None)
    return Elimination(P, Q, vals, t, rows, cols, unresolved)


def solve_positive(m: Matrix, rhs: list[NovikovSeries], cutoff=None):
    """Solve ``m @ x = rhs`` with free parameters pinned to 0.

    Returns ``x`` when a solution with every entry of positive valuation
    exists at the tracked precision, otherwise None.
    """
    el = eliminate(m, cutoff)
    prhs = matvec(el.P, rhs)
    y = []
    for i in range(el.cols):
        if i < el.rank:
            v = el.valuations[i]
            if prhs[i].valuation() <= v:
                return None
            y.append(prhs[i].shift(-v))
        else:
            y.append(NovikovSeries.zero())
    for i in range(el.rank, el.rows):
        if not prhs[i].is_zero():
            return None
    return matvec(el.Q, y)
