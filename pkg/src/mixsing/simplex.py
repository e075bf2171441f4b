"""Exact rational simplex (Bland's rule) for feasibility of {A x = b, x >= 0}.

Infeasible systems come back with a Farkas vector y satisfying y^T A >= 0 and
y^T b < 0, read off the final phase-one tableau.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    x: tuple[Fraction, ...] | None = None
    farkas: tuple[Fraction, ...] | None = None


def solve_feasibility(a_rows: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> FeasibilityResult:
    """Phase one of the simplex method with artificial variables.

    Minimises the sum of artificials; a positive optimum proves infeasibility and
    the optimal dual multipliers give the Farkas certificate.
    """
    m = len(a_rows)
    n = len(a_rows[0]) if m else 0
    a = [[Fraction(v) for v in row] for row in a_rows]
    rhs = [Fraction(v) for v in b]
    signs = [Fraction(1)] * m
    for i in range(m):
        if rhs[i] < 0:
            a[i] = [-v for v in a[i]]
            rhs[i] = -rhs[i]
            signs[i] = Fraction(-1)
    # tableau columns: x (n), artificials (m), rhs
    tab = [a[i] + [Fraction(int(i == j)) for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    cost = [Fraction(0)] * n + [Fraction(1)] * m

    def reduced(col: int) -> Fraction:
        return cost[col] - sum(cost[basis[i]] * tab[i][col] for i in range(m))

    width = n + m
    while True:
        entering = next((c for c in range(width) if reduced(c) < 0), None)
        if entering is None:
            break
        best: tuple[Fraction, int] | None = None
        leave_row = -1
        for i in range(m):
            if tab[i][entering] > 0:
                ratio = tab[i][-1] / tab[i][entering]
                key = (ratio, basis[i])
                if best is None or key < best:
                    best, leave_row = key, i
        if leave_row < 0:  # unbounded cannot happen for phase one; guard anyway
            break
        piv = tab[leave_row][entering]
        tab[leave_row] = [v / piv for v in tab[leave_row]]
        for i in range(m):
            if i != leave_row and tab[i][entering] != 0:
                factor = tab[i][entering]
                tab[i] = [u - factor * w for u, w in zip(tab[i], tab[leave_row])]
        basis[leave_row] = entering

    objective = sum(cost[basis[i]] * tab[i][-1] for i in range(m))
    if objective == 0:
        x = [Fraction(0)] * n
        for i, col in enumerate(basis):
            if col < n:
                x[col] = tab[i][-1]
        return FeasibilityResult(True, x=tuple(x))
    # dual multipliers y_j = c_B^T B^{-1} e_j; B^{-1} sits in the artificial columns
    y = [sum(cost[basis[i]] * tab[i][n + j] for i in range(m)) for j in range(m)]
    # phase-one duals satisfy y^T A <= 0 and y^T b > 0 on the sign-flipped system
    farkas = tuple(-y[j] * signs[j] for j in range(m))
    return FeasibilityResult(False, farkas=farkas)
