"""Shared random generators and hypothesis strategies."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from mixsing.mixed_core import ComplexRational, MixedMap, MixedPolynomial

small_fraction = st.fractions(min_value=-5, max_value=5, max_denominator=6)
coefficient = st.builds(ComplexRational, small_fraction, small_fraction)


@st.composite
def mixed_polys(draw, nvars: int | None = None, max_deg: int = 4, max_terms: int = 5, holomorphic: bool = False):
    n = nvars if nvars is not None else draw(st.integers(1, 3))
    terms = []
    for _ in range(draw(st.integers(0, max_terms))):
        mu = draw(st.lists(st.integers(0, max_deg), min_size=n, max_size=n))
        nu = [0] * n if holomorphic else draw(st.lists(st.integers(0, max_deg), min_size=n, max_size=n))
        terms.append((mu, nu, draw(coefficient)))
    return MixedPolynomial(n, terms)


def random_poly(rng: np.random.Generator, n: int, max_deg: int = 5, nterms: int = 4, holomorphic: bool = False,
                min_deg: int = 0) -> MixedPolynomial:
    """Random mixed polynomial with small complex-rational coefficients and total degree <= max_deg."""
    terms = []
    while len(terms) < nterms:
        deg = int(rng.integers(min_deg, max_deg + 1))
        split = rng.multinomial(deg, [1.0 / (2 * n)] * (2 * n)) if not holomorphic else np.concatenate(
            [rng.multinomial(deg, [1.0 / n] * n), np.zeros(n, dtype=int)]
        )
        mu, nu = split[:n].tolist(), split[n:].tolist()
        re, im = (Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(2))
        if re == 0 and im == 0:
            continue
        terms.append((mu, nu, ComplexRational(re, im)))
    return MixedPolynomial(n, terms)


def random_map(rng: np.random.Generator, n: int, k: int, **kw) -> MixedMap:
    return MixedMap([random_poly(rng, n, **kw) for _ in range(k)])


def random_point(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
