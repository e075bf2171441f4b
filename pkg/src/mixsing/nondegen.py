"""Mixed singularities, searches for degenerate faces, structural certificates, ICIS probes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal, Sequence

import numpy as np

from . import links
from .exact_linalg import rank as exact_rank
from .geometry import (
    MixedCovering,
    SiegelFrame,
    all_minors_nonzero,
    hamm_minors,
    is_strongly_admissible,
)
from .mixed_core import (
    ComplexRational,
    CompiledMap,
    MixedMap,
    MixedPolynomial,
    PolynomialBank,
    complexify,
)
from .newton import (
    DEFAULT_BOUND,
    HULL_MAX_DIM,
    WeightVector,
    face_classes,
    face_function_or_zero,
    facet_normals,
    purely_mixed,
)
from .parallel import pmap, rng_for

Mode = Literal["plain", "strong", "partial"]
TorusReading = Literal["subset", "ambient"]

DEFAULT_TOL = 1e-8
DEFAULT_BUDGET = 64
TORUS_GUARD = 1e-3


# ---------------------------------------------------------------------------
# the alpha relation


def relation_matrix(dz: np.ndarray, dzb: np.ndarray) -> np.ndarray:
    """Real matrix of alpha -> sum_i alpha_i Dbar f_i - conj(alpha_i) conj(D f_i).

    Inputs have shape (..., k, n); output (..., 2n, 2k) with rows (Re, Im) per
    coordinate and columns (Re alpha_i, Im alpha_i).
    """
    dz = np.asarray(dz, dtype=complex)
    dzb = np.asarray(dzb, dtype=complex)
    col_re = dzb - np.conj(dz)
    col_im = 1j * (dzb + np.conj(dz))
    shape = dz.shape[:-2] + (2 * dz.shape[-1], 2 * dz.shape[-2])
    out = np.empty(shape, dtype=float)
    # swap to (..., n, k) so rows index coordinates
    re = np.swapaxes(col_re, -1, -2)
    im = np.swapaxes(col_im, -1, -2)
    out[..., 0::2, 0::2] = re.real
    out[..., 1::2, 0::2] = re.imag
    out[..., 0::2, 1::2] = im.real
    out[..., 1::2, 1::2] = im.imag
    return out


def _padded_singular_values(mat: np.ndarray) -> np.ndarray:
    """Singular values of (..., r, c) padded with zeros up to c (kernel dimension counts)."""
    s = np.linalg.svd(mat, compute_uv=False)
    missing = mat.shape[-1] - s.shape[-1]
    if missing > 0:
        s = np.concatenate([s, np.zeros(s.shape[:-1] + (missing,))], axis=-1)
    return s


def is_rank_deficient(sigma_min: float, sigma_max: float, tol: float) -> bool:
    return sigma_min < tol * max(1.0, sigma_max)


@dataclass(frozen=True)
class SingularityCheck:
    singular: bool
    sigma_min: float
    sigma_max: float
    alpha: tuple[complex, ...] | None


def _exact_wirtinger(polys: Sequence[MixedPolynomial], point: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    n = len(point)
    dz = np.array([[f.wirtinger_z(j + 1).evaluate(point) for j in range(n)] for f in polys], dtype=complex)
    dzb = np.array([[f.wirtinger_zbar(j + 1).evaluate(point) for j in range(n)] for f in polys], dtype=complex)
    return dz.reshape(len(polys), n), dzb.reshape(len(polys), n)


def _kernel_from_matrix(mat: np.ndarray) -> tuple[float, float, tuple[complex, ...]]:
    _, s, vt = np.linalg.svd(mat, full_matrices=True)
    ncols = mat.shape[1]
    sig = np.concatenate([s, np.zeros(max(0, ncols - s.size))])
    v = vt[-1]
    alpha = tuple(complex(v[2 * i], v[2 * i + 1]) for i in range(ncols // 2))
    return float(sig[-1]), float(sig[0]) if sig.size else 0.0, alpha


def mixed_singular_at(fmap: MixedMap, point: Sequence[complex], tol: float = DEFAULT_TOL) -> SingularityCheck:
    """Decide whether ``point`` is a mixed singular point of F.

    The test is the alpha relation, decided by the smallest singular value of
    its 2n x 2k real matrix against tol * max(1, largest singular value). On a
    positive answer a unit kernel vector alpha is returned.
    """
    p = [complex(v) for v in point]
    if len(p) != fmap.nvars:
        raise ValueError("point dimension does not match nvars")
    dz, dzb = _exact_wirtinger(fmap.components, p)
    smin, smax, alpha = _kernel_from_matrix(relation_matrix(dz, dzb))
    singular = is_rank_deficient(smin, smax, tol)
    return SingularityCheck(singular, smin, smax, alpha if singular else None)


# ---------------------------------------------------------------------------
# reports


def _cjson(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class SingularityWitness:
    point: tuple[complex, ...]
    alpha: tuple[complex, ...]
    residual: float
    weight: WeightVector | None = None
    subset: tuple[int, ...] | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "point": [_cjson(z) for z in self.point],
            "alpha": [_cjson(a) for a in self.alpha],
            "residual": self.residual,
            "weight": list(self.weight) if self.weight is not None else None,
            "subset": list(self.subset) if self.subset is not None else None,
        }


@dataclass(frozen=True)
class StructuralCertificate:
    """A named reason why F is non-degenerate, possibly resting on an inner certificate."""

    kind: str
    properties: frozenset[str]
    details: dict[str, Any]
    inner: "StructuralCertificate | None" = None

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "properties": sorted(self.properties),
            "details": self.details,
            "inner": self.inner.to_json() if self.inner is not None else None,
        }


@dataclass
class NondegReport:
    mode: str
    verdict: Literal["refuted", "no_counterexample_found", "certified"]
    witnesses: list[SingularityWitness]
    faces_checked: int
    bound: int
    seed: int
    budget: int
    tol: float
    torus: str = "subset"
    certificate: StructuralCertificate | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "verdict": self.verdict,
            "witnesses": [w.to_json() for w in self.witnesses],
            "faces_checked": self.faces_checked,
            "bound": self.bound,
            "seed": self.seed,
            "budget": self.budget,
            "tol": self.tol,
            "torus": self.torus,
            "certificate": self.certificate.to_json() if self.certificate is not None else None,
        }


# ---------------------------------------------------------------------------
# search problems


@dataclass(frozen=True)
class SearchProblem:
    """Torus search for a point where ``values`` vanish and the alpha relation holds.

    ``dz[i][j]`` and ``dzb[i][j]`` are the polynomials standing in for the
    Wirtinger derivatives of component i in variable j. Only the ``active``
    coordinates (0-based) move; the rest stay at 0.
    """

    weight: WeightVector
    subset: tuple[int, ...] | None
    values: tuple[MixedPolynomial, ...]
    dz: tuple[tuple[MixedPolynomial, ...], ...]
    dzb: tuple[tuple[MixedPolynomial, ...], ...]
    active: tuple[int, ...]
    guard: tuple[int, ...]

    def content_key(self) -> tuple:
        return (self.values, self.dz, self.dzb, self.active, self.guard)


def _gradients(faces: Sequence[MixedPolynomial], n: int) -> tuple[tuple, tuple]:
    dz = tuple(tuple(f.wirtinger_z(j + 1) for j in range(n)) for f in faces)
    dzb = tuple(tuple(f.wirtinger_zbar(j + 1) for j in range(n)) for f in faces)
    return dz, dzb


def _candidate_weights(fmap: MixedMap, bound: int, use_hull: bool) -> list[WeightVector]:
    n = fmap.nvars
    cands: set[WeightVector] = set(itertools.product(range(1, bound + 1), repeat=n))
    if use_hull and n <= HULL_MAX_DIM:
        for c in fmap.components:
            if not c.is_zero():
                cands.update(facet_normals(c))
    return sorted(cands, key=lambda v: (sum(v), v))


def build_problems(
    fmap: MixedMap,
    mode: Mode,
    bound: int = DEFAULT_BOUND,
    weights: Sequence[WeightVector] | None = None,
    torus: TorusReading = "subset",
    use_hull: bool = True,
) -> list[SearchProblem]:
    n = fmap.nvars
    everything = tuple(range(n))
    problems: list[SearchProblem] = []
    if mode in ("plain", "strong"):
        pairs = (
            [(tuple(w), tuple(face_function_or_zero(c, w) for c in fmap.components)) for w in weights]
            if weights is not None
            else face_classes(fmap, bound, use_hull)
        )
        seen: set = set()
        for w, faces in pairs:
            dz, dzb = _gradients(faces, n)
            prob = SearchProblem(w, None, tuple(faces) if mode == "plain" else (), dz, dzb, everything, everything)
            if prob.content_key() not in seen:
                seen.add(prob.content_key())
                problems.append(prob)
        return problems
    if mode != "partial":
        raise ValueError(f"unknown mode {mode!r}")
    cands = [tuple(w) for w in weights] if weights is not None else _candidate_weights(fmap, bound, use_hull)
    full_dz, full_dzb = _gradients(fmap.components, n)
    seen = set()
    subsets = [s for size in range(1, n + 1) for s in itertools.combinations(range(1, n + 1), size)]
    for subset in subsets:
        restricted = fmap.restrict(subset)
        rdz = tuple(tuple(d.restrict(subset) for d in row) for row in full_dz)
        rdzb = tuple(tuple(d.restrict(subset) for d in row) for row in full_dzb)
        active = everything if torus == "ambient" else tuple(j - 1 for j in subset)
        for w in cands:
            faces = tuple(face_function_or_zero(c, w) for c in restricted.components)
            dz = tuple(tuple(face_function_or_zero(d, w) for d in row) for row in rdz)
            dzb = tuple(tuple(face_function_or_zero(d, w) for d in row) for row in rdzb)
            prob = SearchProblem(w, subset, faces, dz, dzb, active, active)
            if prob.content_key() not in seen:
                seen.add(prob.content_key())
                problems.append(prob)
    return problems


class _Residual:
    """Stacked real residual and analytic Jacobian for a batch of search states.

    Unknowns per state: (x_a, y_a) for active coordinates, then (Re alpha_i, Im alpha_i).
    Residuals: Re/Im of the value polynomials, Re/Im of the relation, |alpha|^2 - 1,
    and |p|^2 - len(active) which pins a slice through the unit polycircle.
    """

    def __init__(self, prob: SearchProblem, n: int):
        self.n = n
        self.k = len(prob.dz)
        self.kv = len(prob.values)
        self.active = np.array(prob.active, dtype=np.int64)
        polys = list(prob.values) + [d for row in prob.dz for d in row] + [d for row in prob.dzb for d in row]
        self.bank = PolynomialBank(polys, n)
        self.na = len(prob.active)
        self.dim = 2 * self.na + 2 * self.k

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pr = x[:, : 2 * self.na]
        ar = x[:, 2 * self.na :]
        return pr[:, 0::2] + 1j * pr[:, 1::2], ar[:, 0::2] + 1j * ar[:, 1::2]

    def full_point(self, p: np.ndarray) -> np.ndarray:
        z = np.zeros((p.shape[0], self.n), dtype=complex)
        z[:, self.active] = p
        return z

    def __call__(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        b = x.shape[0]
        n, k, kv, na = self.n, self.k, self.kv, self.na
        p, alpha = self.split(x)
        vals, gz, gzb = self.bank.evaluate(self.full_point(p))
        gz = gz[:, :, self.active]
        gzb = gzb[:, :, self.active]
        dx = gz + gzb
        dy = 1j * (gz - gzb)
        kn = k * n
        e_val = vals[:, kv : kv + kn].reshape(b, k, n)
        g_val = vals[:, kv + kn :].reshape(b, k, n)
        e_dx = dx[:, kv : kv + kn].reshape(b, k, n, na)
        e_dy = dy[:, kv : kv + kn].reshape(b, k, n, na)
        g_dx = dx[:, kv + kn :].reshape(b, k, n, na)
        g_dy = dy[:, kv + kn :].reshape(b, k, n, na)
        ac = np.conj(alpha)
        rel = np.einsum("bi,bij->bj", alpha, g_val) - np.einsum("bi,bij->bj", ac, np.conj(e_val))
        rel_dx = np.einsum("bi,bija->bja", alpha, g_dx) - np.einsum("bi,bija->bja", ac, np.conj(e_dx))
        rel_dy = np.einsum("bi,bija->bja", alpha, g_dy) - np.einsum("bi,bija->bja", ac, np.conj(e_dy))
        rel_dre = np.swapaxes(g_val - np.conj(e_val), 1, 2)  # (b, n, k)
        rel_dim = np.swapaxes(1j * (g_val + np.conj(e_val)), 1, 2)

        ncomplex = kv + n
        cres = np.concatenate([vals[:, :kv], rel], axis=1)
        cjac = np.zeros((b, ncomplex, self.dim), dtype=complex)
        cjac[:, :kv, 0 : 2 * na : 2] = dx[:, :kv]
        cjac[:, :kv, 1 : 2 * na : 2] = dy[:, :kv]
        cjac[:, kv:, 0 : 2 * na : 2] = rel_dx
        cjac[:, kv:, 1 : 2 * na : 2] = rel_dy
        cjac[:, kv:, 2 * na :: 2] = rel_dre
        cjac[:, kv:, 2 * na + 1 :: 2] = rel_dim

        nres = 2 * ncomplex + 2
        res = np.empty((b, nres))
        jac = np.zeros((b, nres, self.dim))
        res[:, 0 : 2 * ncomplex : 2] = cres.real
        res[:, 1 : 2 * ncomplex : 2] = cres.imag
        jac[:, 0 : 2 * ncomplex : 2] = cjac.real
        jac[:, 1 : 2 * ncomplex : 2] = cjac.imag
        ar = x[:, 2 * na :]
        pr = x[:, : 2 * na]
        res[:, -2] = np.sum(ar**2, axis=1) - 1.0
        jac[:, -2, 2 * na :] = 2 * ar
        res[:, -1] = np.sum(pr**2, axis=1) - na
        jac[:, -1, : 2 * na] = 2 * pr
        return res, jac


def levenberg_marquardt(fun, x0: np.ndarray, max_iter: int = 200, target: float = 1e-30) -> np.ndarray:
    """Batched damped Gauss-Newton; every row of x0 is an independent start."""
    x = np.array(x0, dtype=float)
    r, jac = fun(x)
    cost = np.sum(r**2, axis=1)
    lam = np.full(x.shape[0], 1e-3)
    eye = np.eye(x.shape[1])
    for _ in range(max_iter):
        live = (cost > target) & (lam < 1e12)
        if not live.any():
            break
        jtj = np.einsum("bri,brj->bij", jac, jac)
        grad = np.einsum("bri,br->bi", jac, r)
        diag = np.einsum("bii->bi", jtj) + 1e-12
        lhs = jtj + lam[:, None, None] * diag[:, :, None] * eye
        try:
            step = np.linalg.solve(lhs, -grad[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(a, -g, rcond=None)[0] for a, g in zip(lhs, grad)])
        trial = x + np.where(live[:, None], step, 0.0)
        r_new, jac_new = fun(trial)
        cost_new = np.sum(r_new**2, axis=1)
        better = live & np.isfinite(cost_new) & (cost_new < cost)
        x = np.where(better[:, None], trial, x)
        r = np.where(better[:, None], r_new, r)
        jac = np.where(better[:, None, None], jac_new, jac)
        cost = np.where(better, cost_new, cost)
        lam = np.where(better, np.maximum(lam / 3, 1e-12), np.where(live, lam * 4, lam))
    return x


def verify_witness(prob: SearchProblem, point: Sequence[complex], tol: float) -> SingularityWitness | None:
    """Fresh exact-coefficient re-evaluation of a candidate; None when it fails."""
    pt = [complex(v) for v in point]
    if any(abs(pt[j]) < TORUS_GUARD for j in prob.guard):
        return None
    values = [f.evaluate(pt) for f in prob.values]
    dz = np.array([[d.evaluate(pt) for d in row] for row in prob.dz], dtype=complex)
    dzb = np.array([[d.evaluate(pt) for d in row] for row in prob.dzb], dtype=complex)
    smin, _, alpha = _kernel_from_matrix(relation_matrix(dz, dzb))
    merit = sum(abs(v) ** 2 for v in values) + smin**2
    if not merit < tol**2:
        return None
    return SingularityWitness(tuple(pt), alpha, float(np.sqrt(merit)), prob.weight, prob.subset)


def _solve_problem(args: tuple[SearchProblem, int, int, int, int, float]) -> SingularityWitness | None:
    prob, n, index, seed, budget, tol = args
    fun = _Residual(prob, n)
    starts = np.empty((budget, fun.dim))
    for r in range(budget):
        rng = rng_for(seed, index, r)
        p = rng.normal(size=2 * fun.na)
        p *= np.sqrt(fun.na) / np.linalg.norm(p)
        a = rng.normal(size=2 * fun.k)
        a /= np.linalg.norm(a)
        starts[r] = np.concatenate([p, a])
    final = levenberg_marquardt(fun, starts)
    points, _ = fun.split(final)
    full = fun.full_point(points)
    for r in range(budget):
        if not np.all(np.isfinite(full[r])):
            continue
        wit = verify_witness(prob, full[r], tol)
        if wit is not None:
            return wit
    return None


def _search(
    fmap: MixedMap,
    mode: Mode,
    weights: Sequence[WeightVector] | None,
    bound: int,
    budget: int,
    seed: int,
    tol: float,
    workers: int,
    torus: TorusReading,
    certify: bool,
    assume_holomorphic_partial: bool,
) -> NondegReport:
    if budget < 1:
        raise ValueError("budget must be positive")
    if certify and mode != "strong":
        cert = certify_structured(fmap, assume_holomorphic_partial)
        if cert is not None and mode in cert.properties:
            return NondegReport(mode, "certified", [], 0, bound, seed, budget, tol, torus, cert)
    problems = build_problems(fmap, mode, bound, weights, torus)
    jobs = [(p, fmap.nvars, i, seed, budget, tol) for i, p in enumerate(problems)]
    found = [w for w in pmap(_solve_problem, jobs, workers) if w is not None]
    verdict = "refuted" if found else "no_counterexample_found"
    return NondegReport(mode, verdict, found, len(problems), bound, seed, budget, tol, torus)


def refute_nondegeneracy(
    fmap: MixedMap,
    weights: Sequence[WeightVector] | None = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    *,
    bound: int = DEFAULT_BOUND,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    certify: bool = True,
) -> NondegReport:
    """Look for torus zeros of face maps F_P where the alpha relation holds."""
    return _search(fmap, "plain", weights, bound, budget, seed, tol, workers, "subset", certify, False)


def refute_strong_nondegeneracy(
    fmap: MixedMap,
    weights: Sequence[WeightVector] | None = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    *,
    bound: int = DEFAULT_BOUND,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> NondegReport:
    """Like the plain search, but any torus point of a face map counts."""
    return _search(fmap, "strong", weights, bound, budget, seed, tol, workers, "subset", False, False)


def refute_partial_nondegeneracy(
    fmap: MixedMap,
    weights: Sequence[WeightVector] | None = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    *,
    bound: int = DEFAULT_BOUND,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    torus: TorusReading = "subset",
    certify: bool = True,
    assume_holomorphic_partial: bool = False,
) -> NondegReport:
    """Search over coordinate subspaces C^I using derivative-first face objects.

    Each Wirtinger derivative of F is restricted to C^I and then replaced by
    its own face for P, so the objects differ from derivatives of the face map.
    ``torus="subset"`` searches the torus of C^I. ``torus="ambient"`` searches
    the full torus of C^n; the objects ignore coordinates outside I, so those
    only have to stay away from zero.
    """
    return _search(fmap, "partial", weights, bound, budget, seed, tol, workers, torus, certify, assume_holomorphic_partial)


def refute(fmap: MixedMap, mode: Mode, **kwargs: Any) -> NondegReport:
    funcs = {
        "plain": refute_nondegeneracy,
        "strong": refute_strong_nondegeneracy,
        "partial": refute_partial_nondegeneracy,
    }
    if mode not in funcs:
        raise ValueError(f"unknown mode {mode!r}")
    return funcs[mode](fmap, **kwargs)


# ---------------------------------------------------------------------------
# structural certificates

HAMM_PROPERTIES = frozenset({"plain", "partial"})
SIEGEL_PROPERTIES = frozenset({"plain"})


def _hamm_shape(fmap: MixedMap) -> tuple[list[list[ComplexRational]], list[int], list[int]] | None:
    n, k = fmap.nvars, fmap.k
    exps: list[tuple[int, int] | None] = [None] * n
    lam = [[ComplexRational() for _ in range(n)] for _ in range(k)]
    for i, comp in enumerate(fmap.components):
        for t in comp.terms:
            support = [j for j in range(n) if t.mu[j] or t.nu[j]]
            if len(support) != 1:
                return None
            j = support[0]
            pair = (t.mu[j], t.nu[j])
            if exps[j] is None:
                exps[j] = pair
            elif exps[j] != pair:
                return None
            lam[i][j] = t.coeff
    if any(e is None or e[0] <= e[1] for e in exps):
        return None
    return lam, [e[0] - e[1] for e in exps], [e[1] for e in exps]


def _certify_hamm(fmap: MixedMap) -> StructuralCertificate | None:
    shape = _hamm_shape(fmap)
    if shape is None or fmap.k > fmap.nvars:
        return None
    lam, a, b = shape
    if not all_minors_nonzero(lam):
        return None
    minors = {",".join(map(str, s)): v.to_json() for s, v in hamm_minors(lam).items()}
    return StructuralCertificate("hamm_minors", HAMM_PROPERTIES, {"a": a, "b": b, "minors": minors})


def _certify_siegel(fmap: MixedMap) -> StructuralCertificate | None:
    n, k = fmap.nvars, fmap.k
    if k >= n:
        return None
    rows = [[ComplexRational() for _ in range(n)] for _ in range(k)]
    for i, comp in enumerate(fmap.components):
        for t in comp.terms:
            hits = [j for j in range(n) if t.mu[j] or t.nu[j]]
            if len(hits) != 1 or t.mu[hits[0]] != 1 or t.nu[hits[0]] != 1:
                return None
            rows[i][hits[0]] = t.coeff
    try:
        frame = SiegelFrame(rows)
    except ValueError:
        return None
    if not is_strongly_admissible(frame):
        return None
    return StructuralCertificate("siegel_strongly_admissible", SIEGEL_PROPERTIES, {"frame": frame.to_json()})


def _covering_for(pairs: set[tuple[int, int]], limit: int) -> tuple[int, int] | None:
    if not pairs:
        return (2, 1)
    for total in range(3, limit + 1):
        for a in range(total - 1, 0, -1):
            b = total - a
            if a == b:
                continue
            det = a * a - b * b
            if all((a * m - b * l) % det == 0 and (a * l - b * m) % det == 0
                   and (a * m - b * l) * det >= 0 and (a * l - b * m) * det >= 0 for m, l in pairs):
                return a, b
    return None


def covering_preimage(fmap: MixedMap) -> tuple[MixedCovering, MixedMap] | None:
    """Find a mixed covering phi and a map H with phi^* H = F, or None.

    Per variable the covering with the smallest a + b that explains every
    exponent pair is chosen.
    """
    n = fmap.nvars
    pairs: list[set[tuple[int, int]]] = [set() for _ in range(n)]
    for comp in fmap.components:
        for t in comp.terms:
            for j in range(n):
                if t.mu[j] or t.nu[j]:
                    pairs[j].add((t.mu[j], t.nu[j]))
    choice = []
    for j in range(n):
        limit = max((m + l for m, l in pairs[j]), default=3)
        ab = _covering_for(pairs[j], limit)
        if ab is None:
            return None
        choice.append(ab)
    comps = []
    for comp in fmap.components:
        terms = []
        for t in comp.terms:
            mu, nu = [], []
            for j, (a, b) in enumerate(choice):
                det = a * a - b * b
                mu.append((a * t.mu[j] - b * t.nu[j]) // det)
                nu.append((a * t.nu[j] - b * t.mu[j]) // det)
            terms.append((tuple(mu), tuple(nu), t.coeff))
        comps.append(MixedPolynomial(n, terms))
    phi = MixedCovering([a for a, _ in choice], [b for _, b in choice])
    return phi, MixedMap(comps)


def certify_structured(fmap: MixedMap, assume_holomorphic_partial: bool = False) -> StructuralCertificate | None:
    """Recognise Hamm maps, Siegel maps and covering pullbacks of certified maps.

    With ``assume_holomorphic_partial`` a holomorphic preimage under a covering
    is taken to be partially non-degenerate on the caller's word.
    """
    if not fmap.is_holomorphic():
        pre = covering_preimage(fmap)
        if pre is not None:
            phi, inner_map = pre
            inner = _certify_leaf(inner_map, assume_holomorphic_partial)
            if inner is None:
                inner = certify_structured(inner_map, assume_holomorphic_partial)
            if inner is not None:
                return StructuralCertificate(
                    "covering_pullback",
                    inner.properties,
                    {"covering": phi.to_json(), "preimage": inner_map.to_json()},
                    inner,
                )
    return _certify_hamm(fmap) or _certify_siegel(fmap)


def _certify_leaf(fmap: MixedMap, assume_holomorphic_partial: bool) -> StructuralCertificate | None:
    cert = _certify_hamm(fmap) or _certify_siegel(fmap)
    if cert is None and assume_holomorphic_partial and fmap.is_holomorphic():
        cert = StructuralCertificate("assumed_partially_nondegenerate", frozenset({"partial"}), {"map": fmap.to_json()})
    return cert


# ---------------------------------------------------------------------------
# ICIS probe


def _lowest_degree(fmap: MixedMap) -> int:
    return min(sum(t.mu) + sum(t.nu) for c in fmap.components for t in c.terms)


@dataclass
class RadiusProbe:
    radius: float
    requested: int
    found: int
    singular: int
    sigma_min: float | None
    sigma_min_scaled: float | None

    def to_json(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class IcisProbeReport:
    verdict: Literal["regular_on_samples", "singular_points_found", "sampling_failure"]
    scale_degree: int
    radii: list[RadiusProbe] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {"verdict": self.verdict, "scale_degree": self.scale_degree, "radii": [r.to_json() for r in self.radii]}


def relation_sigmas(compiled: CompiledMap, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest singular values of the alpha relation at each point."""
    if len(points) == 0:
        return np.zeros(0), np.zeros(0)
    dz, dzb = compiled.wirtinger(points)
    s = _padded_singular_values(relation_matrix(dz, dzb))
    return s[:, -1], s[:, 0]


def icis_probe(
    fmap: MixedMap,
    radii: Sequence[float],
    samples: int,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> IcisProbeReport:
    """Sample the link of V_F at each radius and test every sample for singularity."""
    if fmap.nvars <= fmap.k:
        raise ValueError("ICIS probe needs n > k")
    compiled = CompiledMap(fmap)
    deg = _lowest_degree(fmap)
    rows = []
    singular_total = 0
    failure = False
    for r in radii:
        sample = links.sample_link(fmap, r, samples, seed=seed, workers=workers)
        pts = sample.points
        smin, smax = relation_sigmas(compiled, pts)
        bad = int(sum(is_rank_deficient(a, b, tol) for a, b in zip(smin, smax)))
        singular_total += bad
        if len(pts) == 0:
            failure = True
        low = float(np.min(smin)) if len(pts) else None
        rows.append(RadiusProbe(float(r), samples, len(pts), bad, low, low / r ** (deg - 1) if low is not None else None))
    if singular_total:
        verdict = "singular_points_found"
    elif failure:
        verdict = "sampling_failure"
    else:
        verdict = "regular_on_samples"
    return IcisProbeReport(verdict, deg, rows)


# ---------------------------------------------------------------------------
# algebraic obstruction


def _exact_eval(poly: MixedPolynomial, point: Sequence[ComplexRational]) -> ComplexRational:
    total = ComplexRational()
    for t in poly.terms:
        val = t.coeff
        for i, (m, l) in enumerate(zip(t.mu, t.nu)):
            for _ in range(m):
                val = val * point[i]
            for _ in range(l):
                val = val * point[i].conjugate()
        total = total + val
    return total


@dataclass(frozen=True)
class LineCheck:
    variable: int
    sign: int
    vanishes: bool
    jacobian_rank_deficient: bool

    @property
    def passed(self) -> bool:
        return self.vanishes and self.jacobian_rank_deficient

    def to_json(self) -> dict[str, Any]:
        return {
            "variable": self.variable,
            "sign": "+" if self.sign > 0 else "-",
            "vanishes": self.vanishes,
            "jacobian_rank_deficient": self.jacobian_rank_deficient,
        }


@dataclass
class ObstructionReport:
    verdict: Literal["not_algebraic_icis", "inconclusive"]
    purely_mixed: list[bool]
    term_witnesses: list[list[int | None]]
    line_check: LineCheck | None

    def to_json(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "purely_mixed": self.purely_mixed,
            "term_witnesses": self.term_witnesses,
            "line_check": self.line_check.to_json() if self.line_check is not None else None,
        }


def complexified_line_check(fmap: MixedMap, variable: int, sign: int) -> LineCheck:
    """Exact test on the line xi1_i = sign * i * xi2_i (other coordinates zero).

    Checks that every complexified component vanishes identically there and
    that the complexified Jacobian has rank < 2k along the whole line. Both
    are polynomial identities in the line parameter, settled by exact
    evaluation at more points than the relevant degree.
    """
    n, k = fmap.nvars, fmap.k
    comps = complexify(fmap)
    m = 2 * n
    jac = [[c.wirtinger_z(j + 1) for j in range(m)] for c in comps]
    deg = max((c.radial_degree() for c in comps), default=0)
    samples = 2 * k * max(deg, 1) + 1
    unit = ComplexRational(Fraction(0), Fraction(sign))
    vanishes = True
    deficient = True
    for s in range(1, samples + 1):
        pt = [ComplexRational() for _ in range(m)]
        pt[n + variable - 1] = ComplexRational(Fraction(s))
        pt[variable - 1] = unit * s
        if vanishes and any(_exact_eval(c, pt) for c in comps):
            vanishes = False
        if deficient:
            rows = [[_exact_eval(d, pt) for d in row] for row in jac]
            if exact_rank(rows) >= 2 * k:
                deficient = False
        if not (vanishes or deficient):
            break
    return LineCheck(variable, sign, vanishes, deficient)


def algebraic_icis_obstruction(fmap: MixedMap) -> ObstructionReport:
    """Flag maps whose every component is purely mixed; also run the line check."""
    flags, wits = [], []
    for c in fmap.components:
        ok, w = purely_mixed(c)
        flags.append(ok)
        wits.append(w)
    verdict = "not_algebraic_icis" if flags and all(flags) else "inconclusive"
    chosen: LineCheck | None = None
    for i in range(1, fmap.nvars + 1):
        for sign in (1, -1):
            check = complexified_line_check(fmap, i, sign)
            if check.passed:
                chosen = check
                break
        if chosen is not None:
            break
    return ObstructionReport(verdict, flags, wits, chosen)
