"""Small dense linear algebra over Fractions (rank, nullspace, determinant)."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Sequence

Matrix = list[list[Any]]


def _inverse(v: Any) -> Any:
    return Fraction(1, v) if isinstance(v, int) else 1 / v


def _copy(rows: Sequence[Sequence[Any]]) -> Matrix:
    return [list(r) for r in rows]


def row_echelon(rows: Sequence[Sequence[Any]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns. Entries must support field ops."""
    m = _copy(rows)
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = _inverse(m[r][c])
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Any]]) -> int:
    return len(row_echelon(rows)[1])


def nullspace(rows: Sequence[Sequence[Any]], ncols: int) -> list[list[Any]]:
    """Basis of {x : rows @ x = 0}."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    rref, pivots = row_echelon(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec: list[Any] = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -rref[r][f]
        basis.append(vec)
    return basis


def determinant(rows: Sequence[Sequence[Any]]) -> Any:
    m = _copy(rows)
    n = len(m)
    det: Any = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c]), None)
        if pivot is None:
            return Fraction(0) * det
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det = det * m[c][c]
        inv = _inverse(m[c][c])
        for i in range(c + 1, n):
            if m[i][c]:
                factor = m[i][c] * inv
                m[i] = [a - factor * b for a, b in zip(m[i], m[c])]
    return det
