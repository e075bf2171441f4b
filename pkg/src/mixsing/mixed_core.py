"""Exact mixed polynomials in z and z-bar, plus their numeric evaluation.

Symbolic work (Wirtinger derivatives, restriction, conjugation, complexification)
stays in exact complex-rational arithmetic. Floating point only appears when a
polynomial is evaluated at a point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

import numpy as np

Exponent = tuple[int, ...]
Key = tuple[Exponent, Exponent]
Scalar = Union[int, Fraction, "ComplexRational"]


def _frac(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite coefficient")
        return Fraction(repr(value))
    raise TypeError(f"cannot read {value!r} as a rational")


@dataclass(frozen=True, slots=True, eq=False)
class ComplexRational:
    """Complex number re + i*im with exact rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def of(cls, value: Any) -> "ComplexRational":
        if isinstance(value, ComplexRational):
            return value
        if isinstance(value, complex):
            return cls(_frac(value.real), _frac(value.imag))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return cls(_frac(value[0]), _frac(value[1]))
        return cls(_frac(value), Fraction(0))

    def __add__(self, other: Any) -> "ComplexRational":
        o = ComplexRational.of(other)
        return ComplexRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "ComplexRational":
        o = ComplexRational.of(other)
        return ComplexRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: Any) -> "ComplexRational":
        return ComplexRational.of(other) - self

    def __mul__(self, other: Any) -> "ComplexRational":
        o = ComplexRational.of(other)
        return ComplexRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "ComplexRational":
        o = ComplexRational.of(other)
        den = o.abs2()
        if den == 0:
            raise ZeroDivisionError("division by zero complex rational")
        num = self * o.conjugate()
        return ComplexRational(num.re / den, num.im / den)

    def __rtruediv__(self, other: Any) -> "ComplexRational":
        return ComplexRational.of(other) / self

    def __neg__(self) -> "ComplexRational":
        return ComplexRational(-self.re, -self.im)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ComplexRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def conjugate(self) -> "ComplexRational":
        return ComplexRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def to_json(self) -> list[str]:
        return [str(self.re), str(self.im)]

    @classmethod
    def from_json(cls, data: Any) -> "ComplexRational":
        if isinstance(data, (list, tuple)):
            if len(data) != 2:
                raise ValueError("complex coefficient must be a [re, im] pair")
            return cls(_frac(data[0]), _frac(data[1]))
        return cls.of(data)


ZERO = ComplexRational()
ONE = ComplexRational(Fraction(1))
I_UNIT = ComplexRational(Fraction(0), Fraction(1))


class MixedMonomial(NamedTuple):
    coeff: ComplexRational
    mu: Exponent
    nu: Exponent


class MixedPolynomial:
    """Finite sum of c * z^mu * zbar^nu kept in canonical order.

    Terms are sorted by (mu, nu), duplicates merged, exact zeros dropped, so
    equality of two polynomials is plain equality of their term tuples.
    Variable indices in the public API are 1-based.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Key, Any] | Iterable[tuple[Exponent, Exponent, Any]] = ()):
        if not isinstance(nvars, int) or nvars < 1:
            raise ValueError("nvars must be a positive integer")
        self.nvars = nvars
        acc: dict[Key, ComplexRational] = {}
        items = terms.items() if isinstance(terms, Mapping) else (((mu, nu), c) for mu, nu, c in terms)
        for (mu, nu), c in items:
            mu_t, nu_t = tuple(int(e) for e in mu), tuple(int(e) for e in nu)
            if len(mu_t) != nvars or len(nu_t) != nvars:
                raise ValueError("exponent vector length does not match nvars")
            if min(mu_t + nu_t, default=0) < 0:
                raise ValueError("negative exponent")
            key = (mu_t, nu_t)
            acc[key] = acc.get(key, ZERO) + ComplexRational.of(c)
        self._terms: tuple[MixedMonomial, ...] = tuple(
            MixedMonomial(c, mu, nu) for (mu, nu), c in sorted(acc.items()) if c
        )
        self._hash: int | None = None

    # construction helpers
    @classmethod
    def zero(cls, nvars: int) -> "MixedPolynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: Any) -> "MixedPolynomial":
        return cls(nvars, {((0,) * nvars, (0,) * nvars): c})

    @classmethod
    def monomial(cls, nvars: int, mu: Sequence[int], nu: Sequence[int], c: Any = 1) -> "MixedPolynomial":
        return cls(nvars, {(tuple(mu), tuple(nu)): c})

    @classmethod
    def var(cls, nvars: int, j: int) -> "MixedPolynomial":
        _check_index(nvars, j)
        mu = tuple(1 if i == j - 1 else 0 for i in range(nvars))
        return cls(nvars, {(mu, (0,) * nvars): 1})

    @classmethod
    def conj_var(cls, nvars: int, j: int) -> "MixedPolynomial":
        _check_index(nvars, j)
        nu = tuple(1 if i == j - 1 else 0 for i in range(nvars))
        return cls(nvars, {((0,) * nvars, nu): 1})

    # basic protocol
    @property
    def terms(self) -> tuple[MixedMonomial, ...]:
        return self._terms

    def __iter__(self) -> Iterator[MixedMonomial]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedPolynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, self._terms))
        return self._hash

    def __repr__(self) -> str:
        from .expr_parser import format_polynomial

        return f"MixedPolynomial({self.nvars}, {format_polynomial(self)!r})"

    def __str__(self) -> str:
        from .expr_parser import format_polynomial

        return format_polynomial(self)

    def as_dict(self) -> dict[Key, ComplexRational]:
        return {(t.mu, t.nu): t.coeff for t in self._terms}

    # arithmetic
    def _coerce(self, other: Any) -> "MixedPolynomial":
        if isinstance(other, MixedPolynomial):
            if other.nvars != self.nvars:
                raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        return MixedPolynomial.constant(self.nvars, other)

    def __add__(self, other: Any) -> "MixedPolynomial":
        o = self._coerce(other)
        return MixedPolynomial(self.nvars, [(t.mu, t.nu, t.coeff) for t in (*self._terms, *o._terms)])

    __radd__ = __add__

    def __neg__(self) -> "MixedPolynomial":
        return MixedPolynomial(self.nvars, [(t.mu, t.nu, -t.coeff) for t in self._terms])

    def __sub__(self, other: Any) -> "MixedPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "MixedPolynomial":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "MixedPolynomial":
        o = self._coerce(other)
        out: dict[Key, ComplexRational] = {}
        for a in self._terms:
            for b in o._terms:
                key = (_vadd(a.mu, b.mu), _vadd(a.nu, b.nu))
                out[key] = out.get(key, ZERO) + a.coeff * b.coeff
        return MixedPolynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "MixedPolynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = MixedPolynomial.constant(self.nvars, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def scale(self, c: Any) -> "MixedPolynomial":
        cc = ComplexRational.of(c)
        return MixedPolynomial(self.nvars, [(t.mu, t.nu, t.coeff * cc) for t in self._terms])

    def conjugate(self) -> "MixedPolynomial":
        return MixedPolynomial(self.nvars, [(t.nu, t.mu, t.coeff.conjugate()) for t in self._terms])

    # calculus
    def wirtinger_z(self, j: int) -> "MixedPolynomial":
        _check_index(self.nvars, j)
        return self._differentiate(j - 1, conj=False)

    def wirtinger_zbar(self, j: int) -> "MixedPolynomial":
        _check_index(self.nvars, j)
        return self._differentiate(j - 1, conj=True)

    def _differentiate(self, idx: int, conj: bool) -> "MixedPolynomial":
        out = []
        for t in self._terms:
            exps = t.nu if conj else t.mu
            e = exps[idx]
            if e == 0:
                continue
            lowered = exps[:idx] + (e - 1,) + exps[idx + 1 :]
            mu, nu = (t.mu, lowered) if conj else (lowered, t.nu)
            out.append((mu, nu, t.coeff * e))
        return MixedPolynomial(self.nvars, out)

    def restrict(self, subset: Iterable[int]) -> "MixedPolynomial":
        """Restriction to the coordinate subspace C^I (other variables set to 0).

        Keeps the ambient variable count; ``subset`` holds 1-based indices.
        """
        keep = set(subset)
        if not keep:
            raise ValueError("restriction needs a nonempty index set")
        for j in keep:
            _check_index(self.nvars, j)
        drop = [i for i in range(self.nvars) if i + 1 not in keep]
        return MixedPolynomial(
            self.nvars,
            [(t.mu, t.nu, t.coeff) for t in self._terms if all(t.mu[i] + t.nu[i] == 0 for i in drop)],
        )

    def is_holomorphic(self) -> bool:
        return all(not any(t.nu) for t in self._terms)

    def radial_degree(self) -> int:
        return max((sum(t.mu) + sum(t.nu) for t in self._terms), default=0)

    def evaluate(self, point: Sequence[complex]) -> complex:
        """Direct term-by-term evaluation with compensated (fsum) accumulation."""
        z = [complex(v) for v in point]
        if len(z) != self.nvars:
            raise ValueError("point dimension does not match nvars")
        zb = [v.conjugate() for v in z]
        re_parts: list[float] = []
        im_parts: list[float] = []
        for t in self._terms:
            val = complex(t.coeff)
            for i in range(self.nvars):
                if t.mu[i]:
                    val *= z[i] ** t.mu[i]
                if t.nu[i]:
                    val *= zb[i] ** t.nu[i]
            re_parts.append(val.real)
            im_parts.append(val.imag)
        return complex(math.fsum(re_parts), math.fsum(im_parts))

    def substitute_monomials(self, images: Sequence["MixedPolynomial"], conj_images: Sequence["MixedPolynomial"]) -> "MixedPolynomial":
        """Replace z_j by images[j] and zbar_j by conj_images[j] (any target nvars)."""
        if len(images) != self.nvars or len(conj_images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0].nvars
        total = MixedPolynomial.zero(target)
        pow_cache: dict[tuple[int, bool, int], MixedPolynomial] = {}

        def power(i: int, conj: bool, e: int) -> MixedPolynomial:
            key = (i, conj, e)
            if key not in pow_cache:
                pow_cache[key] = (conj_images[i] if conj else images[i]) ** e
            return pow_cache[key]

        for t in self._terms:
            piece = MixedPolynomial.constant(target, t.coeff)
            for i in range(self.nvars):
                if t.mu[i]:
                    piece = piece * power(i, False, t.mu[i])
                if t.nu[i]:
                    piece = piece * power(i, True, t.nu[i])
            total = total + piece
        return total

    # serialization
    def to_json(self) -> dict[str, Any]:
        return {
            "nvars": self.nvars,
            "terms": [{"c": t.coeff.to_json(), "mu": list(t.mu), "nu": list(t.nu)} for t in self._terms],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "MixedPolynomial":
        nvars = data["nvars"]
        return cls(
            nvars,
            [(tuple(t["mu"]), tuple(t["nu"]), ComplexRational.from_json(t["c"])) for t in data.get("terms", [])],
        )


def _vadd(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def _check_index(nvars: int, j: int) -> None:
    if not isinstance(j, int) or not 1 <= j <= nvars:
        raise IndexError(f"variable index {j} outside 1..{nvars}")


class MixedMap:
    """Ordered tuple of k mixed polynomials over the same variables."""

    __slots__ = ("nvars", "components")

    def __init__(self, components: Sequence[MixedPolynomial]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a mixed map needs at least one component")
        nvars = comps[0].nvars
        if any(c.nvars != nvars for c in comps):
            raise ValueError("all components must share nvars")
        self.nvars = nvars
        self.components = comps

    @property
    def k(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[MixedPolynomial]:
        return iter(self.components)

    def __getitem__(self, i: int) -> MixedPolynomial:
        return self.components[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MixedMap) and self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    def __repr__(self) -> str:
        return f"MixedMap({[str(c) for c in self.components]!r}, nvars={self.nvars})"

    def conjugate(self) -> "MixedMap":
        return MixedMap([c.conjugate() for c in self.components])

    def restrict(self, subset: Iterable[int]) -> "MixedMap":
        s = list(subset)
        return MixedMap([c.restrict(s) for c in self.components])

    def is_holomorphic(self) -> bool:
        return all(c.is_holomorphic() for c in self.components)

    def evaluate(self, point: Sequence[complex]) -> np.ndarray:
        return np.array([c.evaluate(point) for c in self.components], dtype=complex)

    def to_json(self) -> dict[str, Any]:
        return {"nvars": self.nvars, "components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "MixedMap":
        """Read {"nvars", "components": [...]}; a component is text or a term object."""
        from .expr_parser import ParseError, parse_polynomial

        nvars = data["nvars"]
        comps = []
        for item in data["components"]:
            if isinstance(item, str):
                poly = parse_polynomial(item, nvars)
                if not isinstance(poly, MixedPolynomial):
                    raise ParseError(poly)
                comps.append(poly)
            else:
                poly = MixedPolynomial.from_json(item)
                if poly.nvars != nvars:
                    raise ValueError("component nvars disagrees with map nvars")
                comps.append(poly)
        return cls(comps)


# ---------------------------------------------------------------------------
# numeric compilation


class CompiledPolynomial:
    """Vectorised evaluator for one polynomial over batches of points."""

    __slots__ = ("nvars", "coef", "mu", "nu")

    def __init__(self, poly: MixedPolynomial):
        self.nvars = poly.nvars
        self.coef = np.array([complex(t.coeff) for t in poly.terms], dtype=complex)
        self.mu = np.array([t.mu for t in poly.terms], dtype=np.int64).reshape(len(poly), poly.nvars)
        self.nu = np.array([t.nu for t in poly.terms], dtype=np.int64).reshape(len(poly), poly.nvars)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        z = np.asarray(points, dtype=complex)
        if z.ndim == 1:
            return self(z[None, :])[0]
        if self.coef.size == 0:
            return np.zeros(z.shape[0], dtype=complex)
        zp = z[:, None, :] ** self.mu[None, :, :]
        zbp = np.conj(z)[:, None, :] ** self.nu[None, :, :]
        mons = np.prod(zp * zbp, axis=2)
        return np.sum(mons * self.coef[None, :], axis=1)


class CompiledMap:
    """Vectorised values and Wirtinger derivatives of a mixed map.

    Batched calls take an (N, n) array of points. Results for a point depend
    only on that point and the batch shape, so fixed chunking keeps output
    reproducible.
    """

    def __init__(self, fmap: MixedMap):
        self.map = fmap
        self.n = fmap.nvars
        self.k = fmap.k
        self._vals = [CompiledPolynomial(c) for c in fmap.components]
        self._dz = [[CompiledPolynomial(c.wirtinger_z(j + 1)) for j in range(self.n)] for c in fmap.components]
        self._dzb = [[CompiledPolynomial(c.wirtinger_zbar(j + 1)) for j in range(self.n)] for c in fmap.components]

    def values(self, points: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(points, dtype=complex))
        return np.stack([f(z) for f in self._vals], axis=1)

    def wirtinger(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (dF/dz, dF/dzbar), each of shape (N, k, n)."""
        z = np.atleast_2d(np.asarray(points, dtype=complex))
        dz = np.stack([np.stack([d(z) for d in row], axis=1) for row in self._dz], axis=1)
        dzb = np.stack([np.stack([d(z) for d in row], axis=1) for row in self._dzb], axis=1)
        return dz, dzb

    def real_jacobian(self, points: np.ndarray) -> np.ndarray:
        dz, dzb = self.wirtinger(points)
        return real_jacobian_from_wirtinger(dz, dzb)


def real_jacobian_from_wirtinger(dz: np.ndarray, dzb: np.ndarray) -> np.ndarray:
    """Assemble the (N, 2k, 2n) real differential of (Re f, Im f) in (x, y).

    Uses d/dx = d/dz + d/dzbar and d/dy = i (d/dz - d/dzbar).
    """
    ddx = dz + dzb
    ddy = 1j * (dz - dzb)
    n_pts, k, n = dz.shape
    jac = np.empty((n_pts, 2 * k, 2 * n), dtype=float)
    jac[:, 0::2, 0::2] = ddx.real
    jac[:, 0::2, 1::2] = ddy.real
    jac[:, 1::2, 0::2] = ddx.imag
    jac[:, 1::2, 1::2] = ddy.imag
    return jac


def real_jacobian(fmap: MixedMap, point: Sequence[complex]) -> np.ndarray:
    """2k x 2n real Jacobian of F at one point; rows (Re f1, Im f1, ...), columns (x1, y1, ...)."""
    p = np.asarray(point, dtype=complex)
    if p.shape != (fmap.nvars,):
        raise ValueError("point dimension does not match nvars")
    dz = np.array([[c.wirtinger_z(j + 1).evaluate(p) for j in range(fmap.nvars)] for c in fmap.components])
    dzb = np.array([[c.wirtinger_zbar(j + 1).evaluate(p) for j in range(fmap.nvars)] for c in fmap.components])
    return real_jacobian_from_wirtinger(dz[None], dzb[None])[0]


def point_to_real(point: np.ndarray) -> np.ndarray:
    """(x1, y1, ..., xn, yn) coordinates of a complex point or batch."""
    p = np.asarray(point, dtype=complex)
    out = np.empty(p.shape[:-1] + (2 * p.shape[-1],), dtype=float)
    out[..., 0::2] = p.real
    out[..., 1::2] = p.imag
    return out


def real_to_point(coords: np.ndarray) -> np.ndarray:
    c = np.asarray(coords, dtype=float)
    return c[..., 0::2] + 1j * c[..., 1::2]


# ---------------------------------------------------------------------------
# complexification


def complexify(fmap: MixedMap) -> list[MixedPolynomial]:
    """Real and imaginary parts of each component after z = xi1 + i xi2, zbar = xi1 - i xi2.

    The result lives in 2n holomorphic variables ordered (xi1_1..xi1_n, xi2_1..xi2_n),
    two polynomials per component: Re f^i then Im f^i.
    """
    n = fmap.nvars
    m = 2 * n
    xi1 = [MixedPolynomial.var(m, j + 1) for j in range(n)]
    xi2 = [MixedPolynomial.var(m, n + j + 1) for j in range(n)]
    z_img = [a + b.scale(I_UNIT) for a, b in zip(xi1, xi2)]
    zb_img = [a - b.scale(I_UNIT) for a, b in zip(xi1, xi2)]
    half = ComplexRational(Fraction(1, 2))
    minus_half_i = ComplexRational(Fraction(0), Fraction(-1, 2))
    out: list[MixedPolynomial] = []
    for f in fmap.components:
        fc = f.conjugate()
        real_part = (f + fc).scale(half)
        imag_part = (f - fc).scale(minus_half_i)
        out.append(real_part.substitute_monomials(z_img, zb_img))
        out.append(imag_part.substitute_monomials(z_img, zb_img))
    return out


class PolynomialBank:
    """Evaluate many polynomials and their Wirtinger gradients from one monomial table.

    ``evaluate`` returns values (N, L) and gradients dz, dzb of shape (N, L, n).
    """

    def __init__(self, polys: Sequence[MixedPolynomial], nvars: int):
        self.nvars = nvars
        index: dict[Key, int] = {}

        def slot(mu: Exponent, nu: Exponent) -> int:
            return index.setdefault((mu, nu), len(index))

        entries: list[tuple[int, int, int, int, complex]] = []  # (kind, var, poly, monomial, coeff)
        for l, p in enumerate(polys):
            if p.nvars != nvars:
                raise ValueError("polynomial nvars disagrees with bank nvars")
            for t in p.terms:
                c = complex(t.coeff)
                entries.append((0, 0, l, slot(t.mu, t.nu), c))
                for j in range(nvars):
                    if t.mu[j]:
                        mu = t.mu[:j] + (t.mu[j] - 1,) + t.mu[j + 1:]
                        entries.append((1, j, l, slot(mu, t.nu), c * t.mu[j]))
                    if t.nu[j]:
                        nu = t.nu[:j] + (t.nu[j] - 1,) + t.nu[j + 1:]
                        entries.append((2, j, l, slot(t.mu, nu), c * t.nu[j]))
        m = len(index)
        keys = sorted(index, key=index.__getitem__)
        self.mu = np.array([k[0] for k in keys], dtype=np.int64).reshape(m, nvars)
        self.nu = np.array([k[1] for k in keys], dtype=np.int64).reshape(m, nvars)
        self.c0 = np.zeros((len(polys), m), dtype=complex)
        self.cz = np.zeros((nvars, len(polys), m), dtype=complex)
        self.czb = np.zeros((nvars, len(polys), m), dtype=complex)
        for kind, j, l, s, c in entries:
            if kind == 0:
                self.c0[l, s] += c
            elif kind == 1:
                self.cz[j, l, s] += c
            else:
                self.czb[j, l, s] += c

    def evaluate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        z = np.atleast_2d(np.asarray(points, dtype=complex))
        mons = np.prod(z[:, None, :] ** self.mu[None] * np.conj(z)[:, None, :] ** self.nu[None], axis=2)
        vals = mons @ self.c0.T
        dz = np.einsum("bm,jlm->blj", mons, self.cz)
        dzb = np.einsum("bm,jlm->blj", mons, self.czb)
        return vals, dz, dzb
