"""Links of mixed zero sets: sampling, transversality, Reeb and angle machinery, open-book scans."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np

from .mixed_core import CompiledMap, MixedMap, MixedPolynomial, point_to_real, real_to_point
from .parallel import chunks, pmap, rng_for

ACCEPT_TOL = 1e-9
MAX_ITER = 200
CHUNK = 64
BINDING_MARGIN = 1e-6
DEFAULT_C_SCHEDULE = (0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)

Projection = Literal["complex", "real"]


class SamplingError(RuntimeError):
    """No point of the requested link or fiber could be found."""


# ---------------------------------------------------------------------------
# projection onto {F = target, |z| = r}


def _stacked_residual(compiled: CompiledMap, z: np.ndarray, r: float, targets: np.ndarray) -> np.ndarray:
    vals = compiled.values(z) - targets
    out = np.empty((z.shape[0], 2 * compiled.k + 1))
    out[:, 0:-1:2] = vals.real
    out[:, 1:-1:2] = vals.imag
    out[:, -1] = np.sum(np.abs(z) ** 2, axis=1) - r * r
    return out


def stacked_differential(compiled: CompiledMap, z: np.ndarray) -> np.ndarray:
    """Real (2k+1) x 2n differential of (Re F, Im F, rho) at each point of a batch."""
    jac = compiled.real_jacobian(z)
    rho = 2 * point_to_real(z)[:, None, :]
    return np.concatenate([jac, rho], axis=1)


def gauss_newton_project(
    compiled: CompiledMap,
    starts: np.ndarray,
    r: float,
    targets: np.ndarray | None = None,
    max_iter: int = MAX_ITER,
) -> np.ndarray:
    """Minimum-norm Gauss-Newton steps with Armijo backtracking, batched over starts."""
    z = np.array(starts, dtype=complex)
    tgt = np.zeros((z.shape[0], compiled.k), dtype=complex) if targets is None else np.asarray(targets, dtype=complex)
    res = _stacked_residual(compiled, z, r, tgt)
    for _ in range(max_iter):
        jac = stacked_differential(compiled, z)
        # merit rows are scaled by the current Jacobian row norms, which makes
        # the sufficient-decrease test insensitive to the r^d vs r^2 imbalance
        # (floored relative to the largest row, since rows vanish where F is singular)
        norms = np.linalg.norm(jac, axis=2)
        weight = 1.0 / np.maximum(norms, 1e-8 * np.max(norms, axis=1, keepdims=True))
        cost = np.sum((res * weight) ** 2, axis=1)
        live = np.max(np.abs(res), axis=1) > 1e-16 * max(1.0, r * r)
        if not live.any():
            break
        step = -np.einsum("bij,bj->bi", np.linalg.pinv(jac), res)
        t = np.ones(z.shape[0])
        accepted = ~live
        new_z, new_res = z.copy(), res.copy()
        for _ in range(40):
            pending = ~accepted
            if not pending.any():
                break
            trial = z[pending] + t[pending, None] * real_to_point(step[pending])
            tr = _stacked_residual(compiled, trial, r, tgt[pending])
            tc = np.sum((tr * weight[pending]) ** 2, axis=1)
            ok = np.isfinite(tc) & (tc <= (1 - 1e-4 * t[pending]) * cost[pending])
            idx = np.flatnonzero(pending)
            good = idx[ok]
            new_z[good], new_res[good] = trial[ok], tr[ok]
            accepted[good] = True
            t[idx[~ok]] *= 0.5
        if not np.any(accepted & live):
            break
        z, res = new_z, new_res
    return z


@dataclass
class LinkSample:
    radius: float
    seed: int
    requested: int
    points: np.ndarray
    residuals: np.ndarray
    indices: list[int]

    @property
    def acceptance_ratio(self) -> float:
        return len(self.indices) / self.requested if self.requested else 0.0

    @property
    def failed(self) -> bool:
        return len(self.indices) == 0

    def to_json(self, include_points: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "radius": self.radius,
            "seed": self.seed,
            "requested": self.requested,
            "accepted": len(self.indices),
            "acceptance_ratio": self.acceptance_ratio,
            "sampling_failure": self.failed,
        }
        if include_points:
            out["points"] = [[[float(v.real), float(v.imag)] for v in p] for p in self.points]
            out["residuals"] = self.residuals.tolist()
        return out


def _start_points(n: int, r: float, seed: int, lo: int, hi: int, k: int, delta: float | None):
    starts = np.empty((hi - lo, n), dtype=complex)
    targets = np.zeros((hi - lo, k), dtype=complex)
    for row, idx in enumerate(range(lo, hi)):
        rng = rng_for(seed, idx)
        v = rng.normal(size=2 * n)
        starts[row] = real_to_point(r * v / np.linalg.norm(v))
        if delta is not None:
            c = rng.normal(size=2 * k)
            targets[row] = real_to_point(delta * c / np.linalg.norm(c))
    return starts, targets


def _sample_chunk(args: tuple[MixedMap, float, int, int, int, float | None]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    fmap, r, seed, lo, hi, delta = args
    compiled = CompiledMap(fmap)
    starts, targets = _start_points(fmap.nvars, r, seed, lo, hi, fmap.k, delta)
    z = gauss_newton_project(compiled, starts, r, targets)
    f_res = np.linalg.norm(compiled.values(z) - targets, axis=1)
    r_res = np.abs(np.linalg.norm(z, axis=1) - r)
    ok = np.isfinite(f_res) & np.isfinite(r_res) & (f_res < ACCEPT_TOL) & (r_res < ACCEPT_TOL)
    return z, np.stack([f_res, r_res], axis=1), ok


def _sample(fmap: MixedMap, r: float, count: int, seed: int, workers: int, delta: float | None) -> LinkSample:
    if r <= 0:
        raise ValueError("radius must be positive")
    if all(c.is_zero() for c in fmap.components):
        raise ValueError("the map is identically zero")
    jobs = [(fmap, float(r), seed, lo, hi, delta) for lo, hi in chunks(count, CHUNK)]
    pts, res, idx = [], [], []
    for (lo, _), (z, rr, ok) in zip(chunks(count, CHUNK), pmap(_sample_chunk, jobs, workers)):
        pts.append(z[ok])
        res.append(rr[ok])
        idx.extend(int(lo + i) for i in np.flatnonzero(ok))
    points = np.concatenate(pts) if pts else np.zeros((0, fmap.nvars), dtype=complex)
    residuals = np.concatenate(res) if res else np.zeros((0, 2))
    return LinkSample(float(r), seed, count, points, residuals, idx)


def sample_link(fmap: MixedMap, r: float, count: int, seed: int = 0, workers: int = 1) -> LinkSample:
    """Project ``count`` random points of the r-sphere onto V_F.

    Start i depends only on (seed, i), never on r, so for a weighted-homogeneous
    map the samples at different radii are (numerically) rescaled copies.
    """
    return _sample(fmap, r, count, seed, workers, None)


def sample_fiber(fmap: MixedMap, r: float, delta: float, count: int, seed: int = 0, workers: int = 1) -> LinkSample:
    """Points with |z| = r and F(z) = c, where c is random with |c| = delta per start."""
    return _sample(fmap, r, count, seed, workers, delta)


# ---------------------------------------------------------------------------
# transversality


@dataclass
class RadiusTransversality:
    radius: float
    requested: int
    found: int
    failures: int
    sigma_min: float | None

    def to_json(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class TransversalityReport:
    entries: list[RadiusTransversality] = field(default_factory=list)
    delta_factor: float | None = None

    @property
    def failing_radii(self) -> list[float]:
        return [e.radius for e in self.entries if e.failures]

    @property
    def clean_prefix(self) -> int:
        """Number of leading schedule entries with points found and no failures."""
        count = 0
        for e in self.entries:
            if e.failures or e.found == 0:
                break
            count += 1
        return count

    @property
    def r0_estimate(self) -> float | None:
        """Largest tested radius lying below every failing radius (None if there is none)."""
        bad = self.failing_radii
        ceiling = min(bad) if bad else float("inf")
        good = [e.radius for e in self.entries if e.found and not e.failures and e.radius < ceiling]
        return max(good) if good else None

    @property
    def ok(self) -> bool:
        return all(e.found and not e.failures for e in self.entries)

    def to_json(self) -> dict[str, Any]:
        return {
            "entries": [e.to_json() for e in self.entries],
            "failing_radii": self.failing_radii,
            "clean_prefix": self.clean_prefix,
            "r0_estimate": self.r0_estimate,
            "delta_factor": self.delta_factor,
        }


def stacked_sigmas(fmap: MixedMap, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(points) == 0:
        return np.zeros(0), np.zeros(0)
    s = np.linalg.svd(stacked_differential(CompiledMap(fmap), points), compute_uv=False)
    return s[:, -1], s[:, 0]


def _entry(fmap: MixedMap, sample: LinkSample, tol: float) -> RadiusTransversality:
    smin, smax = stacked_sigmas(fmap, sample.points)
    fails = int(np.sum(smin < tol * np.maximum(1.0, smax)))
    low = float(np.min(smin)) if len(smin) else None
    return RadiusTransversality(sample.radius, sample.requested, len(sample.indices), fails, low)


def transversality_check(fmap: MixedMap, sample: LinkSample, tol: float = 1e-8) -> TransversalityReport:
    """Full-rank test of d(F, rho) at every accepted sample point."""
    if 2 * fmap.k + 1 > 2 * fmap.nvars:
        raise ValueError("the stacked differential cannot have full rank when 2k+1 > 2n")
    return TransversalityReport([_entry(fmap, sample, tol)])


def milnor_radius_probe(
    fmap: MixedMap,
    radii: Sequence[float],
    samples: int,
    seed: int = 0,
    delta_factor: float = 0.1,
    tol: float = 1e-8,
    workers: int = 1,
) -> TransversalityReport:
    """Transversality of nearby fibers |F| = delta(r) = delta_factor * r^2 to the r-sphere."""
    radii = list(radii)
    if any(b > a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be given in decreasing order")
    report = TransversalityReport(delta_factor=delta_factor)
    for r in radii:
        sample = sample_fiber(fmap, r, delta_factor * r * r, samples, seed, workers)
        report.entries.append(_entry(fmap, sample, tol))
    return report


# ---------------------------------------------------------------------------
# contact form, Reeb field, angle function


def _on_sphere(p: Sequence[complex], r: float | None) -> tuple[np.ndarray, float]:
    z = np.asarray(p, dtype=complex)
    norm = float(np.linalg.norm(z))
    if r is not None and abs(norm - r) > 1e-9:
        raise ValueError("point is not on the sphere of the given radius")
    if norm == 0:
        raise ValueError("the origin carries no Reeb vector")
    return z, norm


def reeb(p: Sequence[complex], r: float | None = None) -> np.ndarray:
    """Reeb vector of the natural contact form on the sphere through p, as a complex vector.

    Real form (1/2r^2) sum(x_j d/dy_j - y_j d/dx_j), i.e. i z / (2 r^2).
    """
    z, norm = _on_sphere(p, r)
    return 1j * z / (2 * norm**2)


def alpha_at(p: Sequence[complex], v: Sequence[complex]) -> float:
    """alpha = 2 sum(x dy - y dx) applied to v, which equals 2 Im <v, z>."""
    return float(2 * np.imag(np.vdot(np.asarray(p), np.asarray(v))))


def dalpha_at(p: Sequence[complex], u: Sequence[complex], v: Sequence[complex]) -> float:
    """d alpha = 4 sum dx ^ dy evaluated on (u, v); constant in p."""
    return float(4 * np.imag(np.vdot(np.asarray(u), np.asarray(v))))


def drho_at(p: Sequence[complex], v: Sequence[complex]) -> float:
    return float(2 * np.real(np.vdot(np.asarray(p), np.asarray(v))))


def _g_data(g: MixedPolynomial, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    compiled = CompiledMap(MixedMap([g]))
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    vals = compiled.values(pts)[:, 0]
    dz, dzb = compiled.wirtinger(pts)
    return vals, dz[:, 0, :], dzb[:, 0, :]


def theta_grad(g: MixedPolynomial, p: Sequence[complex]) -> np.ndarray:
    """Complex gradient of Theta = arg g: i (conj(g_z)/conj(g) - g_zbar/g).

    d Theta(v) = Re sum_j v_j conj(grad_j).
    """
    val, dz, dzb = _g_data(g, np.asarray(p)[None])
    if abs(val[0]) == 0:
        raise ValueError("the angle of g is undefined where g vanishes")
    return 1j * (np.conj(dz[0]) / np.conj(val[0]) - dzb[0] / val[0])


def dtheta(grad: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.real(np.sum(np.asarray(v) * np.conj(grad), axis=-1))


def project_off_reeb(v: np.ndarray, z: np.ndarray, projection: Projection = "complex") -> np.ndarray:
    """Remove from v its component along C*z (default) or along the real line R*(i z)."""
    norm2 = np.sum(np.abs(z) ** 2, axis=-1, keepdims=True)
    if projection == "complex":
        coef = np.sum(v * np.conj(z), axis=-1, keepdims=True) / norm2
        return v - coef * z
    if projection == "real":
        iz = 1j * z
        coef = np.real(np.sum(v * np.conj(iz), axis=-1, keepdims=True)) / norm2
        return v - coef * iz
    raise ValueError(f"unknown projection {projection!r}")


def v1v2_batch(g: MixedPolynomial, points: np.ndarray, projection: Projection = "complex") -> tuple[np.ndarray, np.ndarray]:
    """Squared norms of v1 = pi(g conj(Dg)) and v2 = pi(conj(g) Dbar g) at each point."""
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    val, dz, dzb = _g_data(g, pts)
    v1 = project_off_reeb(val[:, None] * np.conj(dz), pts, projection)
    v2 = project_off_reeb(np.conj(val)[:, None] * dzb, pts, projection)
    return np.sum(np.abs(v1) ** 2, axis=1), np.sum(np.abs(v2) ** 2, axis=1)


def v1v2(g: MixedPolynomial, p: Sequence[complex], projection: Projection = "complex") -> tuple[float, float]:
    pts = np.asarray(p, dtype=complex)[None]
    if abs(_g_data(g, pts)[0][0]) == 0:
        raise ValueError("v1, v2 need g(p) != 0")
    a, b = v1v2_batch(g, pts, projection)
    return float(a[0]), float(b[0])


def dtheta_reeb_c(dtheta_r: np.ndarray, g_abs2: np.ndarray, gap: np.ndarray, c: float) -> np.ndarray:
    """d Theta_g(R_c) from d Theta_g(R), |g|^2 and ||v1||^2 - ||v2||^2."""
    return np.exp(c * g_abs2) * (dtheta_r + 0.5 * c * gap / g_abs2)


# ---------------------------------------------------------------------------
# open-book scan


def _tangent_basis_projector(compiled: CompiledMap, z: np.ndarray) -> np.ndarray:
    """Orthogonal projectors (2n x 2n) onto ker d(G, rho) at each point."""
    jac = stacked_differential(compiled, z)
    _, s, vt = np.linalg.svd(jac, full_matrices=True)
    rank = jac.shape[1]
    kernel = vt[:, rank:, :]
    return np.einsum("bki,bkj->bij", kernel, kernel)


def _covector_real(grad: np.ndarray) -> np.ndarray:
    """Real covector (d/dx, d/dy coefficients) of v -> Re sum v conj(grad)."""
    return point_to_real(grad)


@dataclass
class OpenBookScanReport:
    samples: int
    excluded_near_binding: int
    c_schedule: list[float]
    min_by_c: list[float]
    c_used: float | None
    min_dtheta_rc: float | None
    v1v2_margin: float | None
    consistency_error: float | None
    eta_estimate: float | None
    projection: str
    verdict: Literal["positive", "inconclusive", "sampling_failure"]

    def to_json(self) -> dict[str, Any]:
        return dict(self.__dict__)


def openbook_scan(
    big_g: MixedMap,
    g: MixedPolynomial,
    r: float = 1.0,
    c_schedule: Sequence[float] = DEFAULT_C_SCHEDULE,
    samples: int = 400,
    seed: int = 0,
    projection: Projection = "complex",
    workers: int = 1,
    tol: float = 1e-8,
) -> OpenBookScanReport:
    """Scan d Theta_g(R_c) over K_G minus a margin around K_g, ascending in c."""
    if g.nvars != big_g.nvars:
        raise ValueError("g and G must live in the same space")
    sample = sample_link(big_g, r, samples, seed, workers)
    schedule = [float(c) for c in c_schedule]
    if sample.failed:
        return OpenBookScanReport(0, 0, schedule, [], None, None, None, None, None, projection, "sampling_failure")
    pts = sample.points
    vals, dz, dzb = _g_data(g, pts)
    keep = np.abs(vals) >= BINDING_MARGIN
    dense = pts[keep]
    if len(dense) == 0:
        return OpenBookScanReport(0, len(pts), schedule, [], None, None, None, None, None, projection, "sampling_failure")
    gv, gz, gzb = vals[keep], dz[keep], dzb[keep]
    norm2 = np.sum(np.abs(dense) ** 2, axis=1)
    reeb_v = 1j * dense / (2 * norm2[:, None])
    grad = 1j * (np.conj(gz) / np.conj(gv)[:, None] - gzb / gv[:, None])
    dth_grad = dtheta(grad, reeb_v)
    # independent route: d Theta = Im(dg / g)
    dg_r = np.sum(gz * reeb_v + gzb * np.conj(reeb_v), axis=1)
    dth_direct = np.imag(dg_r / gv)
    g2 = np.abs(gv) ** 2
    consistency = float(np.max(np.abs(g2 * dth_grad - g2 * dth_direct) / np.maximum(np.abs(g2 * dth_direct), 1e-300)))
    a, b = v1v2_batch(g, dense, projection)
    gap = a - b
    mins, c_used, best = [], None, None
    for c in schedule:
        m = float(np.min(dtheta_reeb_c(dth_grad, g2, gap, c)))
        mins.append(m)
        if m > 0:
            c_used, best = c, m
            break
    eta = _eta_estimate(big_g, g, pts, vals, dz, dzb, tol)
    verdict = "positive" if c_used is not None else "inconclusive"
    return OpenBookScanReport(
        len(dense), int(np.sum(~keep)), schedule, mins, c_used, best, float(np.min(gap)), consistency, eta, projection, verdict
    )


def _eta_estimate(
    big_g: MixedMap, g: MixedPolynomial, pts: np.ndarray, vals: np.ndarray, dz: np.ndarray, dzb: np.ndarray, tol: float
) -> float | None:
    """Largest eta with d(G, g, rho) regular where |g| <= eta and d Theta tangent-nonzero where |g| >= eta."""
    compiled = CompiledMap(big_g)
    ext = CompiledMap(MixedMap(list(big_g.components) + [g]))
    mags = np.abs(vals)
    s = np.linalg.svd(stacked_differential(ext, pts), compute_uv=False) if 2 * ext.k + 1 <= 2 * ext.n else None
    full_rank = (s[:, -1] >= tol * np.maximum(1.0, s[:, 0])) if s is not None else np.zeros(len(pts), dtype=bool)
    safe = np.where(mags > 0, vals, 1.0)
    grad = 1j * (np.conj(dz) / np.conj(safe)[:, None] - dzb / safe[:, None])
    proj = _tangent_basis_projector(compiled, pts)
    tangential = np.linalg.norm(np.einsum("bij,bj->bi", proj, _covector_real(grad)), axis=1)
    angle_ok = (mags > 0) & (tangential > tol)
    order = np.argsort(mags)
    m_sorted = mags[order]
    best = None
    for cut in np.unique(np.concatenate([[0.0], m_sorted])):
        low = m_sorted <= cut
        if np.all(full_rank[order][low]) and np.all(angle_ok[order][m_sorted >= cut]):
            best = float(cut)
    return best


def binding_contact_check(big_g: MixedMap, drop_index: int, **kwargs: Any):
    """Holomorphic-like scan of G restricted to the coordinate hyperplane z_i = 0."""
    from .contact import holomorphic_like_scan

    if not 1 <= drop_index <= big_g.nvars:
        raise ValueError("variable index out of range")
    untouched = all(not (t.mu[drop_index - 1] or t.nu[drop_index - 1]) for c in big_g for t in c.terms)
    # restricting to z_i = 0 changes nothing when z_i never appears, so scan G itself
    reduced = big_g if untouched else drop_variable(big_g, drop_index)
    return holomorphic_like_scan(reduced, **kwargs)


def drop_variable(fmap: MixedMap, index: int) -> MixedMap:
    """Restrict to z_index = 0 and renumber the remaining variables (1-based index)."""
    n = fmap.nvars
    if not 1 <= index <= n:
        raise ValueError("variable index out of range")
    if n == 1:
        raise ValueError("cannot drop the only variable")
    keep = [j for j in range(n) if j != index - 1]
    comps = []
    for c in fmap.restrict([j + 1 for j in keep]).components:
        comps.append(MixedPolynomial(n - 1, [(tuple(t.mu[j] for j in keep), tuple(t.nu[j] for j in keep), t.coeff) for t in c.terms]))
    return MixedMap(comps)
