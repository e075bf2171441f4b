"""Siegel frames with exact certificates, and constructors for structured maps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linprog

from .exact_linalg import determinant, rank
from .mixed_core import ComplexRational, MixedMap, MixedPolynomial
from .simplex import solve_feasibility

Subset = tuple[int, ...]


def _matrix(rows: Sequence[Sequence[Any]]) -> tuple[tuple[ComplexRational, ...], ...]:
    return tuple(tuple(ComplexRational.from_json(v) if isinstance(v, (list, tuple)) else ComplexRational.of(v) for v in row) for row in rows)


@dataclass(frozen=True)
class SiegelFrame:
    """k x n matrix whose columns Lambda_i are the eigenvalue vectors in C^k."""

    lam: tuple[tuple[ComplexRational, ...], ...]

    def __init__(self, rows: Sequence[Sequence[Any]]):
        lam = _matrix(rows)
        if not lam or not lam[0]:
            raise ValueError("frame needs at least one row and one column")
        if any(len(r) != len(lam[0]) for r in lam):
            raise ValueError("ragged frame matrix")
        if rank([list(r) for r in lam]) != len(lam):
            raise ValueError("frame matrix must have full complex rank k")
        object.__setattr__(self, "lam", lam)

    @property
    def k(self) -> int:
        return len(self.lam)

    @property
    def n(self) -> int:
        return len(self.lam[0])

    def column_real(self, i: int) -> tuple[Fraction, ...]:
        """Column i (0-based) as a vector of R^{2k}: (Re, Im) per row."""
        out: list[Fraction] = []
        for row in self.lam:
            out.extend((row[i].re, row[i].im))
        return tuple(out)

    def to_json(self) -> dict[str, Any]:
        return {"k": self.k, "n": self.n, "lambda": [[c.to_json() for c in row] for row in self.lam]}

    @classmethod
    def from_json(cls, data: Any) -> "SiegelFrame":
        rows = data["lambda"] if isinstance(data, dict) else data
        return cls(rows)


@dataclass(frozen=True)
class AdmissibilityCertificate:
    """Exact proof objects: hull weights for 0 and one separating functional per 2k-subset."""

    siegel_weights: tuple[Fraction, ...]
    separators: dict[Subset, tuple[Fraction, ...]] = field(default_factory=dict)

    def verify(self, frame: SiegelFrame) -> bool:
        t = self.siegel_weights
        if len(t) != frame.n or any(v < 0 for v in t) or sum(t) != 1:
            return False
        dim = 2 * frame.k
        cols = [frame.column_real(i) for i in range(frame.n)]
        if any(sum(t[i] * cols[i][d] for i in range(frame.n)) != 0 for d in range(dim)):
            return False
        expected = set(itertools.combinations(range(frame.n), dim))
        if set(self.separators) != expected:
            return False
        return all(
            all(sum(c[d] * cols[i][d] for d in range(dim)) > 0 for i in subset)
            for subset, c in self.separators.items()
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "siegel_weights": [str(v) for v in self.siegel_weights],
            "separators": [
                {"subset": [i + 1 for i in s], "functional": [str(v) for v in c]}
                for s, c in sorted(self.separators.items())
            ],
        }


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    siegel: bool
    certificate: AdmissibilityCertificate | None
    violating_subset: Subset | None

    def to_json(self, frame: SiegelFrame) -> dict[str, Any]:
        out: dict[str, Any] = {"admissible": self.admissible, "siegel": self.siegel}
        out["certificate"] = self.certificate.to_json() if self.certificate else None
        if self.violating_subset is not None:
            out["violating_subset"] = [i + 1 for i in self.violating_subset]
            out["violating_values"] = [
                [frame.lam[r][i].to_json() for r in range(frame.k)] for i in self.violating_subset
            ]
        else:
            out["violating_subset"] = None
        return out


def _hull_lp(frame: SiegelFrame, subset: Sequence[int]) -> tuple[tuple[Fraction, ...] | None, tuple[Fraction, ...] | None]:
    """Decide 0 in conv(columns in subset). Returns (weights, None) or (None, separator)."""
    dim = 2 * frame.k
    cols = [frame.column_real(i) for i in subset]
    rows = [[Fraction(1)] * len(cols)] + [[c[d] for c in cols] for d in range(dim)]
    rhs = [Fraction(1)] + [Fraction(0)] * dim
    res = solve_feasibility(rows, rhs)
    if res.feasible:
        assert res.x is not None
        return res.x, None
    assert res.farkas is not None
    # y0 + <c, Lambda_i> >= 0 with y0 < 0 gives <c, Lambda_i> >= -y0 > 0
    return None, tuple(res.farkas[1:])


def is_siegel(frame: SiegelFrame) -> tuple[Fraction, ...] | None:
    """Exact convex weights t with sum t_i Lambda_i = 0, or None when 0 is outside the hull."""
    weights, _ = _hull_lp(frame, range(frame.n))
    return weights


def separate_subset(frame: SiegelFrame, subset: Sequence[int]) -> tuple[Fraction, ...] | None:
    """Functional c with <c, Lambda_i> > 0 on the subset, or None if 0 is in its hull."""
    weights, sep = _hull_lp(frame, subset)
    return None if weights is not None else sep


def is_admissible(frame: SiegelFrame) -> AdmissibilityReport:
    t = is_siegel(frame)
    if t is None:
        return AdmissibilityReport(False, False, None, None)
    separators: dict[Subset, tuple[Fraction, ...]] = {}
    for subset in itertools.combinations(range(frame.n), 2 * frame.k):
        c = separate_subset(frame, subset)
        if c is None:
            return AdmissibilityReport(False, True, None, subset)
        separators[subset] = c
    cert = AdmissibilityCertificate(t, separators)
    if not cert.verify(frame):
        raise RuntimeError("admissibility certificate failed exact re-verification")
    return AdmissibilityReport(True, True, cert, None)


def is_strongly_admissible(frame: SiegelFrame) -> bool:
    """Every column subset of size >= 2k is admissible in the restricted sense.

    A subset whose hull misses 0 passes when it has an exact separating
    functional; a subset whose hull contains 0 must itself be admissible
    (Siegel weights plus separated 2k-subsets).
    """
    if is_siegel(frame) is None:
        return False
    dim = 2 * frame.k
    separated: dict[Subset, bool] = {}
    for subset in itertools.combinations(range(frame.n), dim):
        separated[subset] = separate_subset(frame, subset) is not None
        if not separated[subset]:
            return False
    for size in range(dim + 1, frame.n + 1):
        for subset in itertools.combinations(range(frame.n), size):
            if separate_subset(frame, subset) is not None:
                continue
            if not all(separated[s] for s in itertools.combinations(subset, dim)):
                return False
    return True


@dataclass(frozen=True)
class AdvisoryReport:
    """Floating-point admissibility estimate; carries margins, never certificates."""

    siegel: bool
    admissible: bool
    siegel_weights: tuple[float, ...] | None
    min_margin: float | None
    violating_subset: Subset | None

    def to_json(self) -> dict[str, Any]:
        return {
            "advisory": True,
            "siegel": self.siegel,
            "admissible": self.admissible,
            "siegel_weights": list(self.siegel_weights) if self.siegel_weights is not None else None,
            "min_margin": self.min_margin,
            "violating_subset": [i + 1 for i in self.violating_subset] if self.violating_subset else None,
            "certificate": None,
        }


def _float_columns(lam: np.ndarray) -> np.ndarray:
    """n x 2k real matrix: column i of the frame as (Re, Im) per row."""
    lam = np.atleast_2d(np.asarray(lam, dtype=complex))
    out = np.empty((lam.shape[1], 2 * lam.shape[0]))
    out[:, 0::2] = lam.T.real
    out[:, 1::2] = lam.T.imag
    return out


def separation_margin(cols: np.ndarray) -> float:
    """max s over |c|_inf <= 1 with <c, v> >= s for every row v; positive iff 0 is outside the hull."""
    m, dim = cols.shape
    # variables (c, s); minimise -s subject to s - <c, v_i> <= 0
    cost = np.zeros(dim + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-cols, np.ones((m, 1))])
    bounds = [(-1.0, 1.0)] * dim + [(None, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(m), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"separation LP failed: {res.message}")
    return float(-res.fun) + 0.0  # no negative zero in reports


def advisory_admissibility(lam: Sequence[Sequence[complex]], tol: float = 1e-9) -> AdvisoryReport:
    """Admissibility of a frame with floating-point entries (for example roots of unity).

    Uses floating LPs, so the verdict is an estimate and no certificate is produced.
    """
    cols = _float_columns(np.asarray(lam, dtype=complex))
    n, dim = cols.shape
    if not 0 < dim < n:
        raise ValueError("advisory check needs 0 < 2k < n")
    a_eq = np.vstack([np.ones(n), cols.T])
    b_eq = np.zeros(dim + 1)
    b_eq[0] = 1.0
    res = linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        return AdvisoryReport(False, False, None, None, None)
    weights = tuple(float(v) for v in res.x)
    worst = None
    for subset in itertools.combinations(range(n), dim):
        margin = separation_margin(cols[list(subset)])
        if margin <= tol:
            return AdvisoryReport(True, False, weights, margin, subset)
        worst = margin if worst is None else min(worst, margin)
    return AdvisoryReport(True, True, weights, worst, None)


# ---------------------------------------------------------------------------
# constructors


def build_siegel_map(frame: SiegelFrame) -> MixedMap:
    """Components psi^j = sum_i lambda_ji z_i zbar_i."""
    n = frame.n
    comps = []
    for row in frame.lam:
        terms = []
        for i, lam in enumerate(row):
            e = tuple(int(j == i) for j in range(n))
            terms.append((e, e, lam))
        comps.append(MixedPolynomial(n, terms))
    return MixedMap(comps)


def twisted_pham_brieskorn(a: Sequence[int], sigma: Sequence[int], lam: Sequence[Any] | None = None) -> MixedPolynomial:
    """sum_i lambda_i z_i^{a_i} zbar_{sigma(i)} with sigma a 1-based permutation."""
    n = len(a)
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError("sigma must be a permutation of 1..n")
    if any(int(x) < 1 for x in a):
        raise ValueError("exponents a_i must be at least 1")
    coeffs = [1] * n if lam is None else list(lam)
    if len(coeffs) != n:
        raise ValueError("need one coefficient per variable")
    terms = []
    for i in range(n):
        mu = tuple(int(a[i]) if j == i else 0 for j in range(n))
        nu = tuple(1 if j == sigma[i] - 1 else 0 for j in range(n))
        terms.append((mu, nu, coeffs[i]))
    return MixedPolynomial(n, terms)


@dataclass(frozen=True)
class MixedCovering:
    """phi(w) = (w_j^{a_j} wbar_j^{b_j})_j with a_j != b_j positive integers."""

    a: tuple[int, ...]
    b: tuple[int, ...]

    def __init__(self, a: Sequence[int], b: Sequence[int]):
        aa, bb = tuple(int(x) for x in a), tuple(int(x) for x in b)
        if len(aa) != len(bb) or not aa:
            raise ValueError("a and b must be nonempty and of equal length")
        if min(aa + bb) < 1:
            raise ValueError("covering exponents must be positive integers")
        if any(x == y for x, y in zip(aa, bb)):
            raise ValueError("covering needs a_j != b_j for every j")
        object.__setattr__(self, "a", aa)
        object.__setattr__(self, "b", bb)

    @classmethod
    def homogeneous(cls, a: int, b: int, n: int) -> "MixedCovering":
        return cls([a] * n, [b] * n)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.a)) == 1 and len(set(self.b)) == 1

    def apply(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return w ** np.array(self.a) * np.conj(w) ** np.array(self.b)

    def to_json(self) -> dict[str, Any]:
        return {"a": list(self.a), "b": list(self.b), "homogeneous": self.is_homogeneous}


def pullback_polynomial(phi: MixedCovering, f: MixedPolynomial) -> MixedPolynomial:
    if phi.n != f.nvars:
        raise ValueError("covering dimension does not match nvars")
    a, b = phi.a, phi.b
    terms = []
    for t in f.terms:
        mu = tuple(a[j] * t.mu[j] + b[j] * t.nu[j] for j in range(f.nvars))
        nu = tuple(b[j] * t.mu[j] + a[j] * t.nu[j] for j in range(f.nvars))
        terms.append((mu, nu, t.coeff))
    return MixedPolynomial(f.nvars, terms)


def pullback(phi: MixedCovering, fmap: MixedMap | MixedPolynomial) -> Any:
    """Substitute z_j -> w_j^a wbar_j^b and zbar_j -> wbar_j^a w_j^b."""
    if isinstance(fmap, MixedPolynomial):
        return pullback_polynomial(phi, fmap)
    return MixedMap([pullback_polynomial(phi, c) for c in fmap.components])


def hamm_minors(lam: Sequence[Sequence[Any]]) -> dict[Subset, ComplexRational]:
    m = _matrix(lam)
    k, n = len(m), len(m[0])
    out = {}
    for cols in itertools.combinations(range(n), k):
        out[cols] = ComplexRational.of(determinant([[m[r][c] for c in cols] for r in range(k)]))
    return out


def all_minors_nonzero(lam: Sequence[Sequence[Any]]) -> bool:
    return all(bool(v) for v in hamm_minors(lam).values())


def hamm_map(lam: Sequence[Sequence[Any]], a: Sequence[int]) -> MixedMap:
    """Components sum_j lambda_ij z_j^{a_j}."""
    return mixed_hamm_map(lam, a, [0] * len(a))


def mixed_hamm_map(lam: Sequence[Sequence[Any]], a: Sequence[int], b: Sequence[int]) -> MixedMap:
    """Components sum_j lambda_ij z_j^{a_j + b_j} zbar_j^{b_j}."""
    m = _matrix(lam)
    n = len(a)
    if any(len(r) != n for r in m) or len(b) != n:
        raise ValueError("matrix columns, a and b must have the same length")
    if any(int(x) < 1 for x in a) or any(int(x) < 0 for x in b):
        raise ValueError("need a_j >= 1 and b_j >= 0")
    comps = []
    for row in m:
        terms = []
        for j in range(n):
            mu = tuple(int(a[j]) + int(b[j]) if i == j else 0 for i in range(n))
            nu = tuple(int(b[j]) if i == j else 0 for i in range(n))
            terms.append((mu, nu, row[j]))
        comps.append(MixedPolynomial(n, terms))
    return MixedMap(comps)


def hamm_family(g_map: MixedMap, f_map: MixedMap, t: Any) -> MixedMap:
    """(1 - t) G + t F with exact rational t in [0, 1]."""
    tt = Fraction(repr(t)) if isinstance(t, float) else Fraction(t)
    if not 0 <= tt <= 1:
        raise ValueError("t must lie in [0, 1]")
    if g_map.k != f_map.k or g_map.nvars != f_map.nvars:
        raise ValueError("G and F must have the same shape")
    return MixedMap([g.scale(1 - tt) + f.scale(tt) for g, f in zip(g_map.components, f_map.components)])


def random_hamm_matrix(k: int, n: int, seed: int, low: int = -4, high: int = 4) -> list[list[int]]:
    """Small-integer k x n matrix with every k x k minor nonzero (rejection sampling)."""
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    rng = np.random.default_rng([int(seed) & (2**63 - 1), k, n])
    while True:
        cand = rng.integers(low, high + 1, size=(k, n)).tolist()
        if all_minors_nonzero(cand):
            return cand
