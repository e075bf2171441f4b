"""Contact-geometric coefficients of mixed maps on spheres and the sign of D."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Literal, Sequence

import numpy as np

from . import links
from .exterior import SparseMultivector
from .geometry import MixedCovering
from .mixed_core import CompiledMap, MixedMap, MixedPolynomial, real_jacobian
from .nondegen import is_rank_deficient, relation_sigmas
from .parallel import chunks, pmap, rng_for


@dataclass(frozen=True)
class SphereFrame:
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")


def _pt(p: Sequence[complex]) -> np.ndarray:
    return np.asarray(p, dtype=complex)


def _grads(f: MixedPolynomial, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = f.nvars
    if len(p) != n:
        raise ValueError("point dimension does not match nvars")
    dz = np.array([f.wirtinger_z(j + 1).evaluate(p) for j in range(n)], dtype=complex)
    dzb = np.array([f.wirtinger_zbar(j + 1).evaluate(p) for j in range(n)], dtype=complex)
    return dz, dzb


def coeff_A(p: Sequence[complex]) -> np.ndarray:
    z = _pt(p)
    return 2 * np.outer(np.conj(z), z)


def coeff_B(f: MixedPolynomial, p: Sequence[complex]) -> np.ndarray:
    dz, dzb = _grads(f, _pt(p))
    return 0.5 * (np.outer(dz, np.conj(dz)) - np.outer(np.conj(dzb), dzb))


def coeff_C(f: MixedPolynomial, p: Sequence[complex]) -> np.ndarray:
    """C_ij = |zb_i f_zj - zb_j f_zi|^2 - |z_i f_zbj - z_j f_zbi|^2."""
    z = _pt(p)
    dz, dzb = _grads(f, z)
    hol = np.outer(np.conj(z), dz)
    anti = np.outer(z, dzb)
    return np.abs(hol - hol.T) ** 2 - np.abs(anti - anti.T) ** 2


# ---------------------------------------------------------------------------
# the exterior-algebra oracle


def _contact_pieces(z: np.ndarray) -> tuple[SparseMultivector, SparseMultivector, SparseMultivector]:
    n = len(z)
    drho = np.empty(2 * n)
    drho[0::2], drho[1::2] = 2 * z.real, 2 * z.imag
    alpha = np.empty(2 * n)
    alpha[0::2], alpha[1::2] = -2 * z.imag, 2 * z.real
    dalpha = SparseMultivector(2 * n, {(2 * j, 2 * j + 1): 4.0 for j in range(n)})
    return SparseMultivector.covector(drho), SparseMultivector.covector(alpha), dalpha


def top_form(fmap: MixedMap, p: Sequence[complex]) -> float:
    """Top coefficient of drho ^ alpha ^ (dalpha)^(n-k-1) ^ dRe f1 ^ dIm f1 ^ ... at p.

    The basis is (dx1, dy1, ..., dxn, dyn).
    """
    z = _pt(p)
    n, k = fmap.nvars, fmap.k
    if n < k + 1:
        raise ValueError("need n >= k + 1")
    drho, alpha, dalpha = _contact_pieces(z)
    jac = real_jacobian(fmap, z)
    form = drho.wedge(alpha).wedge(dalpha.power(n - k - 1))
    for row in jac:
        form = form.wedge(SparseMultivector.covector(row))
    return form.top()


@lru_cache(maxsize=None)
def normalization(n: int, k: int) -> float:
    """Top coefficient for F = (z1, ..., zk) at p = e_n; D is measured in this unit."""
    if n < k + 1:
        raise ValueError("need n >= k + 1")
    ref = MixedMap([MixedPolynomial.var(n, j + 1) for j in range(k)])
    p = np.zeros(n, dtype=complex)
    p[-1] = 1.0
    return top_form(ref, p)


def D_oracle(fmap: MixedMap, p: Sequence[complex]) -> float:
    """D(p): the contact top form divided by its value on the reference configuration."""
    return top_form(fmap, p) / normalization(fmap.nvars, fmap.k)


def D_closed(fmap: MixedMap, p: Sequence[complex]) -> float:
    """Sum over (k+1)-subsets T of determinants of complex (2k+2)-square blocks.

    Rows are z-bar dz, z dz-bar and (df, conj df) per component, restricted to
    the dz_t, dz-bar_t with t in T. The sum is divided by its value on the
    reference configuration used by the oracle.
    """
    return float(sum(D_closed_terms(fmap, p).values()))


@lru_cache(maxsize=None)
def _closed_unit(n: int, k: int) -> float:
    ref = MixedMap([MixedPolynomial.var(n, j + 1) for j in range(k)])
    p = np.zeros(n, dtype=complex)
    p[-1] = 1.0
    return sum(_raw_closed_terms(ref, p).values())


def D_closed_terms(fmap: MixedMap, p: Sequence[complex]) -> dict[tuple[int, ...], float]:
    unit = _closed_unit(fmap.nvars, fmap.k)
    return {t: v / unit for t, v in _raw_closed_terms(fmap, p).items()}


def _raw_closed_terms(fmap: MixedMap, p: Sequence[complex]) -> dict[tuple[int, ...], float]:
    z = _pt(p)
    n, k = fmap.nvars, fmap.k
    if n < k + 1:
        raise ValueError("need n >= k + 1")
    grads = [_grads(f, z) for f in fmap.components]
    out: dict[tuple[int, ...], float] = {}
    for subset in itertools.combinations(range(n), k + 1):
        idx = list(subset)
        zero = np.zeros(k + 1)
        rows = [
            np.concatenate([np.conj(z[idx]), zero]),
            np.concatenate([zero, z[idx]]),
        ]
        for dz, dzb in grads:
            rows.append(np.concatenate([dz[idx], dzb[idx]]))
            rows.append(np.concatenate([np.conj(dzb[idx]), np.conj(dz[idx])]))
        out[tuple(t + 1 for t in subset)] = float(np.linalg.det(np.array(rows)).real)
    return out


def pullback_D_factor(fmap: MixedMap, phi: MixedCovering, w: Sequence[complex]) -> dict[tuple[int, ...], float]:
    """Closed-form D contribution per (k+1)-subset for G = phi^* F, F holomorphic.

    For phi = phi_{a,b} homogeneous the subset T contributes
    (a^2 - b^2)^k * prod_{t in T} |w_t|^2 * |det M_T|^2, where M_T has a first
    row of ones and rows f^l_{z_t}(phi(w)) w_t^(a-1) wbar_t^(b-1).
    """
    if not phi.is_homogeneous:
        raise ValueError("the closed form needs a homogeneous covering")
    if not fmap.is_holomorphic():
        raise ValueError("the closed form needs a holomorphic map")
    a, b = phi.a[0], phi.b[0]
    wv = _pt(w)
    n, k = fmap.nvars, fmap.k
    image = phi.apply(wv)
    grads = np.array([_grads(f, image)[0] for f in fmap.components]).reshape(k, n)
    scale = wv ** (a - 1) * np.conj(wv) ** (b - 1)
    out: dict[tuple[int, ...], float] = {}
    for subset in itertools.combinations(range(n), k + 1):
        idx = list(subset)
        mat = np.vstack([np.ones(k + 1), grads[:, idx] * scale[idx]])
        det = np.linalg.det(mat)
        out[tuple(t + 1 for t in subset)] = float(
            (a * a - b * b) ** k * np.prod(np.abs(wv[idx]) ** 2) * abs(det) ** 2
        )
    return out


# ---------------------------------------------------------------------------
# scanning


Verdict = Literal["strictly_positive_on_samples", "strictly_negative_on_samples", "mixed_sign", "all_zero"]


@dataclass
class DScanReport:
    samples: int
    min_D: float | None
    max_D: float | None
    violations: list[tuple[list[list[float]], float]]
    verdict: Verdict | Literal["sampling_failure"]
    normalization: float
    radius: float
    on_link: bool
    excluded_singular: int = 0
    excluded_points: list[list[list[float]]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "min_D": self.min_D,
            "max_D": self.max_D,
            "violations": [{"point": p, "D": d} for p, d in self.violations],
            "verdict": self.verdict,
            "normalization": self.normalization,
            "radius": self.radius,
            "on_link": self.on_link,
            "excluded_singular": self.excluded_singular,
            "excluded_points": self.excluded_points,
        }


def _ball_points(n: int, r: float, count: int, seed: int) -> np.ndarray:
    pts = np.empty((count, n), dtype=complex)
    for i in range(count):
        rng = rng_for(seed, i)
        v = rng.normal(size=2 * n)
        rad = r * rng.random() ** (1.0 / (2 * n))
        v *= rad / np.linalg.norm(v)
        pts[i] = v[0::2] + 1j * v[1::2]
    return pts


def _d_chunk(args: tuple[MixedMap, np.ndarray]) -> list[float]:
    fmap, pts = args
    return [D_oracle(fmap, p) for p in pts]


def _as_json_point(p: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in p]


def classify(values: np.ndarray, zero_tol: float) -> Verdict:
    pos = values > zero_tol
    neg = values < -zero_tol
    if pos.all():
        return "strictly_positive_on_samples"
    if neg.all():
        return "strictly_negative_on_samples"
    if not pos.any() and not neg.any():
        return "all_zero"
    return "mixed_sign"


def holomorphic_like_scan(
    fmap: MixedMap,
    r: float = 1.0,
    samples: int = 500,
    seed: int = 0,
    on_link: bool = True,
    singular_tol: float = 1e-8,
    zero_tol: float = 1e-12,
    workers: int = 1,
    max_violations: int = 20,
) -> DScanReport:
    """Sign of D on link samples (or ball samples with ``on_link=False``).

    Points where F is mixed-singular are set aside and counted separately.
    ``zero_tol`` is relative to the largest |D| seen.
    """
    norm = normalization(fmap.nvars, fmap.k)
    if on_link:
        sample = links.sample_link(fmap, r, samples, seed, workers)
        pts = sample.points
        if sample.failed:
            return DScanReport(0, None, None, [], "sampling_failure", norm, r, on_link)
    else:
        pts = _ball_points(fmap.nvars, r, samples, seed)
    smin, smax = relation_sigmas(CompiledMap(fmap), pts)
    singular = np.array([is_rank_deficient(a, b, singular_tol) for a, b in zip(smin, smax)], dtype=bool)
    kept = pts[~singular]
    excluded = [_as_json_point(p) for p in pts[singular][:max_violations]]
    if len(kept) == 0:
        return DScanReport(0, None, None, [], "all_zero", norm, r, on_link, int(singular.sum()), excluded)
    jobs = [(fmap, kept[lo:hi]) for lo, hi in chunks(len(kept), links.CHUNK)]
    values = np.array([v for part in pmap(_d_chunk, jobs, workers) for v in part])
    tol = zero_tol * max(1.0, float(np.max(np.abs(values))))
    verdict = classify(values, tol)
    if verdict == "mixed_sign":
        majority_positive = np.sum(values > tol) >= np.sum(values < -tol)
        bad = np.flatnonzero(values <= tol) if majority_positive else np.flatnonzero(values >= -tol)
    else:
        bad = np.zeros(0, dtype=int)
    violations = [(_as_json_point(kept[i]), float(values[i])) for i in bad[:max_violations]]
    return DScanReport(
        len(kept), float(values.min()), float(values.max()), violations, verdict, norm, r, on_link,
        int(singular.sum()), excluded,
    )
