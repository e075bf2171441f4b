"""Newton data of mixed polynomials: radial supports, faces, weights, convenience."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exact_linalg import nullspace, rank
from .mixed_core import MixedMap, MixedPolynomial
from .simplex import solve_feasibility

WeightVector = tuple[int, ...]
Point = tuple[int, ...]

DEFAULT_BOUND = 8
HULL_MAX_DIM = 4


@dataclass(frozen=True)
class FaceSelection:
    weight: WeightVector
    degree: int
    selected: tuple[int, ...]


def radial_support(f: MixedPolynomial) -> frozenset[Point]:
    return frozenset(tuple(a + b for a, b in zip(t.mu, t.nu)) for t in f.terms)


def _pair(weight: Sequence[int], point: Sequence[int]) -> int:
    return sum(w * e for w, e in zip(weight, point))


def _check_weight(weight: Sequence[int], nvars: int) -> WeightVector:
    w = tuple(int(x) for x in weight)
    if len(w) != nvars or min(w) < 1:
        raise ValueError("weight vector must have nvars strictly positive integer entries")
    return w


@lru_cache(maxsize=4096)
def newton_vertices(f: MixedPolynomial) -> tuple[Point, ...]:
    """Vertices of Gamma+(f) = conv(radial support) + positive orthant.

    A support point is a vertex unless it lies in conv(other points) + orthant,
    which is decided by an exact feasibility LP.
    """
    pts = sorted(radial_support(f))
    verts = []
    for q in pts:
        others = [p for p in pts if p != q]
        if not others:
            verts.append(q)
            continue
        n = len(q)
        # sum t_p p + s = q, sum t_p = 1, t, s >= 0
        rows = [[Fraction(p[i]) for p in others] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        rows.append([Fraction(1)] * len(others) + [Fraction(0)] * n)
        if not solve_feasibility(rows, [Fraction(v) for v in q] + [Fraction(1)]).feasible:
            verts.append(q)
    return tuple(verts)


def face_selection(f: MixedPolynomial, weight: Sequence[int]) -> FaceSelection:
    if f.is_zero():
        raise ValueError("face of the zero polynomial is undefined")
    w = _check_weight(weight, f.nvars)
    degree = min(_pair(w, v) for v in newton_vertices(f))
    chosen = tuple(
        i for i, t in enumerate(f.terms) if _pair(w, tuple(a + b for a, b in zip(t.mu, t.nu))) == degree
    )
    return FaceSelection(w, degree, chosen)


def face_function(f: MixedPolynomial, weight: Sequence[int]) -> MixedPolynomial:
    """Sum of the terms of f minimising <P, mu+nu>."""
    sel = face_selection(f, weight)
    terms = f.terms
    return MixedPolynomial(f.nvars, [(terms[i].mu, terms[i].nu, terms[i].coeff) for i in sel.selected])


def face_function_or_zero(f: MixedPolynomial, weight: Sequence[int]) -> MixedPolynomial:
    return f if f.is_zero() else face_function(f, weight)


def face_tuple(fmap: MixedMap, weight: Sequence[int]) -> tuple[MixedPolynomial, ...]:
    return tuple(face_function_or_zero(c, weight) for c in fmap.components)


def _primitive(vec: Sequence[Fraction]) -> WeightVector:
    den = math.lcm(*(v.denominator for v in vec))
    ints = [int(v * den) for v in vec]
    g = math.gcd(*ints)
    return tuple(x // g for x in ints)


@lru_cache(maxsize=1024)
def facet_normals(f: MixedPolynomial) -> tuple[WeightVector, ...]:
    """Strictly positive primitive normals of the compact facets of Gamma+(f).

    Computed exactly by testing every n-subset of support points; only used
    for n <= HULL_MAX_DIM.
    """
    n = f.nvars
    pts = sorted(radial_support(f))
    if n == 1:
        return ((1,),) if pts else ()
    found: set[WeightVector] = set()
    for combo in itertools.combinations(pts, n):
        base = combo[0]
        diffs = [[Fraction(p[i] - base[i]) for i in range(n)] for p in combo[1:]]
        if rank(diffs) != n - 1:
            continue
        basis = nullspace(diffs, n)
        if len(basis) != 1:
            continue
        normal = basis[0]
        if all(v < 0 for v in normal):
            normal = [-v for v in normal]
        if not all(v > 0 for v in normal):
            continue
        level = sum(normal[i] * base[i] for i in range(n))
        if all(sum(normal[i] * p[i] for i in range(n)) >= level for p in pts):
            found.add(_primitive(normal))
    return tuple(sorted(found))


def _face_key(fmap: MixedMap, weight: WeightVector) -> tuple[tuple[int, ...], ...]:
    return tuple(
        () if c.is_zero() else face_selection(c, weight).selected for c in fmap.components
    )


def face_classes(fmap: MixedMap, bound: int = DEFAULT_BOUND, use_hull: bool = True) -> list[tuple[WeightVector, tuple[MixedPolynomial, ...]]]:
    """Distinct face tuples with one representative weight each, sorted by weight.

    Candidates are the box {1..bound}^n plus, for n <= 4, the positive facet
    normals of every component. The representative of a class is the candidate
    with the smallest (entry sum, lexicographic) key.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    n = fmap.nvars
    candidates: set[WeightVector] = set(itertools.product(range(1, bound + 1), repeat=n))
    if use_hull and n <= HULL_MAX_DIM:
        for comp in fmap.components:
            if not comp.is_zero():
                candidates.update(facet_normals(comp))
    best: dict[tuple[tuple[int, ...], ...], WeightVector] = {}
    for w in sorted(candidates, key=lambda v: (sum(v), v)):
        key = _face_key(fmap, w)
        if key not in best:
            best[key] = w
    reps = sorted(best.values())
    return [(w, face_tuple(fmap, w)) for w in reps]


def enumerate_weights(fmap: MixedMap, bound: int = DEFAULT_BOUND, use_hull: bool = True) -> list[WeightVector]:
    return [w for w, _ in face_classes(fmap, bound, use_hull)]


def is_convenient(f: MixedPolynomial) -> bool:
    """True iff every coordinate axis carries a pure-axis term."""
    if f.is_zero():
        raise ValueError("convenience of the zero polynomial is undefined")
    support = radial_support(f)
    n = f.nvars
    return all(
        any(p[i] > 0 and all(p[j] == 0 for j in range(n) if j != i) for p in support) for i in range(n)
    )


def purely_mixed(f: MixedPolynomial) -> tuple[bool, list[int | None]]:
    """Check that every term has a variable i with mu_i, nu_i >= 1 and mu_i + nu_i >= 3.

    Returns the verdict and, per term, the first witnessing 1-based variable
    (None when the term has no witness).
    """
    witnesses: list[int | None] = []
    for t in f.terms:
        w = next(
            (i + 1 for i in range(f.nvars) if t.mu[i] >= 1 and t.nu[i] >= 1 and t.mu[i] + t.nu[i] >= 3),
            None,
        )
        witnesses.append(w)
    return (bool(witnesses) and all(w is not None for w in witnesses)), witnesses
