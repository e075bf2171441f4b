"""Sparse exterior algebra over R^m with a fixed ordered basis e_0..e_{m-1}."""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

Blade = tuple[int, ...]


def _merge_sign(a: Blade, b: Blade) -> int:
    """Sign of the permutation sorting the concatenation a + b (both sorted, disjoint)."""
    inversions = 0
    j = 0
    for x in a:
        while j < len(b) and b[j] < x:
            j += 1
        inversions += j
    return -1 if inversions % 2 else 1


class SparseMultivector:
    """Homogeneous or mixed-grade multivector stored as {sorted index tuple: coefficient}."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Blade, float] | Iterable[tuple[Blade, float]] = ()):
        self.dim = dim
        items = terms.items() if isinstance(terms, Mapping) else terms
        self.terms: dict[Blade, float] = {}
        for blade, c in items:
            if c == 0:
                continue
            key = tuple(blade)
            if any(i < 0 or i >= dim for i in key) or len(set(key)) != len(key):
                raise ValueError(f"invalid blade {key!r}")
            order = sorted(range(len(key)), key=key.__getitem__)
            sign = _permutation_sign(order)
            canon = tuple(sorted(key))
            self.terms[canon] = self.terms.get(canon, 0.0) + sign * c

    @classmethod
    def covector(cls, coeffs: Sequence[float]) -> "SparseMultivector":
        return cls(len(coeffs), (((i,), float(c)) for i, c in enumerate(coeffs)))

    def __xor__(self, other: "SparseMultivector") -> "SparseMultivector":
        return self.wedge(other)

    def wedge(self, other: "SparseMultivector") -> "SparseMultivector":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        out: dict[Blade, float] = {}
        for a, ca in self.terms.items():
            sa = set(a)
            for b, cb in other.terms.items():
                if sa.intersection(b):
                    continue
                key = tuple(sorted(a + b))
                out[key] = out.get(key, 0.0) + _merge_sign(a, b) * ca * cb
        res = SparseMultivector(self.dim)
        res.terms = {k: v for k, v in out.items() if v != 0}
        return res

    def power(self, m: int) -> "SparseMultivector":
        out = SparseMultivector(self.dim, {(): 1.0})
        for _ in range(m):
            out = out.wedge(self)
        return out

    def __add__(self, other: "SparseMultivector") -> "SparseMultivector":
        res = SparseMultivector(self.dim, self.terms)
        for k, v in other.terms.items():
            res.terms[k] = res.terms.get(k, 0.0) + v
        return res

    def scale(self, s: float) -> "SparseMultivector":
        return SparseMultivector(self.dim, {k: s * v for k, v in self.terms.items()})

    def __neg__(self) -> "SparseMultivector":
        return self.scale(-1.0)

    def coefficient(self, blade: Iterable[int]) -> float:
        return self.terms.get(tuple(blade), 0.0)

    def top(self) -> float:
        return self.coefficient(range(self.dim))

    def grades(self) -> set[int]:
        return {len(k) for k in self.terms}


def _permutation_sign(order: Sequence[int]) -> int:
    seen = [False] * len(order)
    sign = 1
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign
