"""Exact dense linear algebra over Q(zeta_n).

Matrices are plain list-of-rows of Cyclo entries, all of one conductor.
Everything here is fraction-free in spirit but uses exact field division,
so results are certified: a None from solve() means genuinely inconsistent.
"""

from __future__ import annotations

from .exactalg import Cyclo


def _clone(rows):
    return [list(r) for r in rows]


def rref(rows, conductor: int):
    """Reduced row echelon form.  Returns (rref_rows, pivot_columns)."""
    m = _clone(rows)
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, nrows):
            if not m[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = m[r][c].inverse()
        m[r] = [e if e.is_zero() else e * inv for e in m[r]]
        support = [not p.is_zero() for p in m[r]]
        for i in range(nrows):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [
                    e - f * p if live else e
                    for e, p, live in zip(m[i], m[r], support)
                ]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def rank(rows, conductor: int) -> int:
    return len(rref(rows, conductor)[1])


def nullspace(rows, conductor: int, ncols: int | None = None):
    """Basis of {x : A x = 0} as a list of length-ncols vectors."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if ncols == 0:
        return []
    if not rows:
        rows = [[Cyclo.zero(conductor)] * ncols]
    m, pivots = rref(rows, conductor)
    free = [c for c in range(ncols) if c not in pivots]
    zero, one = Cyclo.zero(conductor), Cyclo.one(conductor)
    basis = []
    for fc in free:
        v = [zero] * ncols
        v[fc] = one
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


def solve(rows, rhs, conductor: int):
    """One solution of A x = rhs (free coordinates zero), or None."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    zero = Cyclo.zero(conductor)
    if nrows == 0:
        return [zero] * ncols
    aug = [list(r) + [v] for r, v in zip(rows, rhs)]
    m, pivots = rref(aug, conductor)
    if ncols in pivots:
        return None  # pivot in the constants column: inconsistent
    x = [zero] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = m[i][ncols]
    return x


def in_span(rows, vector, conductor: int) -> bool:
    """Whether vector lies in the row span of rows."""
    if not rows:
        return all(v.is_zero() for v in vector)
    base = rank(rows, conductor)
    return rank(rows + [list(vector)], conductor) == base


def quotient_dimension(closed_rows, exact_rows, conductor: int, ncols: int) -> int:
    """dim(span(closed) / span(exact)); exact must be a subspace of closed."""
    rc = rank(closed_rows, conductor) if closed_rows else 0
    re = rank(exact_rows, conductor) if exact_rows else 0
    return rc - re


class Echelon:
    """Growing row-echelon basis supporting incremental rank queries."""

    def __init__(self, conductor: int):
        self.conductor = conductor
        self.rows = []  # kept sorted by pivot column; rows are pivot-normalized

    @property
    def rank(self) -> int:
        return len(self.rows)

    def insert(self, vector) -> bool:
        """Reduce vector against the basis; add the residue if independent."""
        v = list(vector)
        for pc, row in self.rows:
            f = v[pc]
            if f.is_zero():
                continue
            v = [e if p.is_zero() else e - f * p for e, p in zip(v, row)]
        pivot = next((c for c, e in enumerate(v) if not e.is_zero()), None)
        if pivot is None:
            return False
        inv = v[pivot].inverse()
        v = [e if e.is_zero() else e * inv for e in v]
        self.rows.append((pivot, v))
        self.rows.sort(key=lambda t: t[0])
        return True
