import math

import numpy as np
import pytest

from mixsing.contact import holomorphic_like_scan
from mixsing.expr_parser import parse, parse_map_or_raise
from mixsing.geometry import MixedCovering, SiegelFrame, build_siegel_map, hamm_family, hamm_map, mixed_hamm_map, pullback
from mixsing.links import (
    ACCEPT_TOL,
    TransversalityReport,
    RadiusTransversality,
    alpha_at,
    binding_contact_check,
    dalpha_at,
    drop_variable,
    dtheta,
    dtheta_reeb_c,
    milnor_radius_probe,
    openbook_scan,
    project_off_reeb,
    reeb,
    sample_fiber,
    sample_link,
    theta_grad,
    transversality_check,
    v1v2,
    v1v2_batch,
)
from mixsing.mixed_core import MixedMap, point_to_real, real_to_point

LAM = [[1, 1, 1], [1, 2, 3]]
SQUARES = MixedMap([parse("z1^2+z2^2+z3^2", 3)])
G21 = pullback(MixedCovering.homogeneous(2, 1, 3), SQUARES)
ANGLE31 = pullback(MixedCovering.homogeneous(3, 1, 3), parse("z1+z2+z3", 3))
SEPARABLE = parse_map_or_raise(
    ["z1^2*zb1+z2^2*zb2+z3^2*zb3", "z4^2*zb4+z5^2*zb5+z6^2*zb6"], 6
)
# quadratic blocks, so the default fiber level r^2/10 stays reachable as r shrinks
SEPARABLE_QUADRATIC = parse_map_or_raise(["z1^2+z2^2+z3^2", "z4^2+2*z5^2+3*z6^2"], 6)


def sphere_points(rng, n, count, r=1.0):
    p = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return r * p / np.linalg.norm(p, axis=1, keepdims=True)


def tangent_vectors(rng, z, count):
    out = []
    for _ in range(count):
        v = rng.normal(size=z.size) + 1j * rng.normal(size=z.size)
        v -= np.real(np.vdot(z, v)) / np.vdot(z, z).real * z
        out.append(v)
    return out


def test_linear_link():
    s = sample_link(MixedMap([parse("z1", 2)]), 1.0, 30, seed=0)
    assert len(s.indices) == 30
    assert np.allclose(s.points[:, 0], 0, atol=1e-9)
    assert np.allclose(np.abs(s.points[:, 1]), 1, atol=1e-9)


def test_siegel_link_equal_moduli():
    psi = build_siegel_map(SiegelFrame([[1, 1j, (-1, -1)]]))
    s = sample_link(psi, 1.0, 40, seed=1)
    assert len(s.indices) > 0
    assert np.allclose(np.abs(s.points), 1 / math.sqrt(3), atol=1e-6)


def test_cone_nonempty_at_every_radius():
    for r in (2.0, 1.0, 0.1, 0.01):
        s = sample_link(SQUARES, r, 20, seed=0)
        assert not s.failed
        assert np.all(s.residuals < ACCEPT_TOL)


def test_sampling_guards():
    with pytest.raises(ValueError):
        sample_link(SQUARES, -1.0, 5)
    with pytest.raises(ValueError):
        sample_link(MixedMap([parse("0", 2)]), 1.0, 5)


def test_accepted_points_reverify():
    s = sample_link(mixed_hamm_map(LAM, [2, 2, 2], [1, 1, 1]), 0.5, 50, seed=3)
    for p in s.points:
        assert np.linalg.norm(mixed_hamm_map(LAM, [2, 2, 2], [1, 1, 1]).evaluate(p)) < 1e-9
        assert abs(np.linalg.norm(p) - 0.5) < 1e-9


def test_sampling_determinism_across_workers():
    a = sample_link(G21, 1.0, 150, seed=5, workers=1)
    b = sample_link(G21, 1.0, 150, seed=5, workers=3)
    assert a.indices == b.indices and np.array_equal(a.points, b.points)


def test_fiber_sampling():
    s = sample_fiber(SQUARES, 1.0, 0.1, 20, seed=0)
    assert not s.failed
    vals = np.abs([SQUARES.evaluate(p)[0] for p in s.points])
    assert np.allclose(vals, 0.1, atol=1e-9)


def test_transversality_examples():
    for t in (0, "1/2", 1):
        g_t = hamm_family(mixed_hamm_map(LAM, [2, 2, 2], [1, 1, 1]), hamm_map(LAM, [2, 2, 2]), t)
        for r in (0.5, 1.0):
            rep = transversality_check(g_t, sample_link(g_t, r, 40, seed=0))
            assert rep.ok and rep.entries[0].failures == 0
    bad = MixedMap([parse("z1*zb1", 2)])
    s = sample_link(bad, 1.0, 20, seed=0)
    rep = transversality_check(bad, s)
    assert rep.entries[0].failures == rep.entries[0].found == 20
    sep = transversality_check(SEPARABLE, sample_link(SEPARABLE, 1.0, 40, seed=0))
    assert sep.ok


def test_transversality_report_logic():
    rep = TransversalityReport(
        [
            RadiusTransversality(1.0, 5, 5, 1, 0.0),
            RadiusTransversality(0.5, 5, 5, 0, 0.1),
            RadiusTransversality(0.1, 5, 5, 0, 0.1),
        ]
    )
    assert rep.failing_radii == [1.0] and rep.clean_prefix == 0 and rep.r0_estimate == 0.5
    assert rep.r0_estimate <= min(rep.failing_radii)
    assert TransversalityReport().to_json()["entries"] == []


def test_milnor_probe():
    rep = milnor_radius_probe(SEPARABLE_QUADRATIC, [1.0, 0.1, 0.01], 30, seed=0)
    assert rep.ok and rep.clean_prefix == 3 and rep.r0_estimate == 1.0
    real_valued = milnor_radius_probe(MixedMap([parse("z1*zb1-z2*zb2", 2)]), [1.0, 0.1], 10, seed=0)
    assert not real_valued.ok and real_valued.clean_prefix == 0
    assert milnor_radius_probe(SQUARES, [], 10).entries == []
    # a cubic map never reaches |F| = r^2/10 on small spheres: reported, never hidden
    cubic = milnor_radius_probe(SEPARABLE, [1.0, 0.1], 10, seed=0)
    assert cubic.entries[1].found == 0 and not cubic.ok
    with pytest.raises(ValueError):
        milnor_radius_probe(SQUARES, [0.1, 1.0], 10)


def test_reeb_identities():
    rng = np.random.default_rng(0)
    for r in (1.0, 0.3):
        for z in sphere_points(rng, 3, 100, r):
            R = reeb(z, r)
            assert abs(alpha_at(z, R) - 1) < 1e-9
            for v in tangent_vectors(rng, z, 10):
                assert abs(dalpha_at(z, R, v)) < 1e-8
    with pytest.raises(ValueError):
        reeb([1.0, 0.0], 2.0)


def test_dtheta_of_linear_angle():
    rng = np.random.default_rng(1)
    g = parse("z1", 3)
    for r in (1.0, 0.5):
        for z in sphere_points(rng, 3, 20, r):
            assert math.isclose(dtheta(theta_grad(g, z), reeb(z, r)), 1 / (2 * r * r), rel_tol=1e-12)
            # finite differences along the Reeb flow z -> exp(i t / 2r^2) z
            h = 1e-6
            fwd, bwd = z * np.exp(1j * h / (2 * r * r)), z * np.exp(-1j * h / (2 * r * r))
            fd = (np.angle(g.evaluate(fwd)) - np.angle(g.evaluate(bwd))) / (2 * h)
            assert math.isclose(fd, 1 / (2 * r * r), rel_tol=1e-6)


def test_theta_grad_formula_and_fd():
    assert np.allclose(theta_grad(parse("z1", 2), [1, 0.3]), [1j, 0])
    rng = np.random.default_rng(2)
    g = parse("z1^2*zb2+3*z3*zb1-z2^3+i*z1*zb1*z3", 3)
    for z in sphere_points(rng, 3, 10):
        grad = theta_grad(g, z)
        for _ in range(5):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            h = 1e-6
            fd = np.angle(g.evaluate(z + h * v) / g.evaluate(z - h * v)) / (2 * h)
            exact = dtheta(grad, v)
            assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))
    with pytest.raises(ValueError):
        theta_grad(parse("z1", 2), [0, 1])


def test_projection_variants():
    rng = np.random.default_rng(3)
    z = sphere_points(rng, 3, 1)[0]
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    pc = project_off_reeb(v, z, "complex")
    assert abs(np.vdot(z, pc)) < 1e-12
    pr = project_off_reeb(v, z, "real")
    assert abs(np.real(np.vdot(1j * z, pr))) < 1e-12
    with pytest.raises(ValueError):
        project_off_reeb(v, z, "other")


def test_v1v2_examples():
    s = sample_link(G21, 1.0, 100, seed=0)
    a, b = v1v2_batch(ANGLE31, s.points)
    assert np.all(a >= b)
    rng = np.random.default_rng(4)
    for z in sphere_points(rng, 3, 10):
        one, two = v1v2(parse("z1^2+z2*z3", 3), z)
        assert two == 0 and one >= 0
        one, two = v1v2(parse("zb1", 3), z)
        assert one == 0 and two > 0


def _direct_reeb_c(g, z, c):
    """Solve alpha_c(R) = 1, d alpha_c(R, .) = 0 on T_z S for alpha_c = exp(-c|g|^2) alpha."""
    n = z.size
    x = point_to_real(z)
    alpha = np.empty(2 * n)
    alpha[0::2], alpha[1::2] = -2 * z.imag, 2 * z.real
    omega = np.zeros((2 * n, 2 * n))
    for j in range(n):
        omega[2 * j, 2 * j + 1], omega[2 * j + 1, 2 * j] = 4, -4
    gv = g.evaluate(z)
    gz = np.array([g.wirtinger_z(j + 1).evaluate(z) for j in range(n)])
    gzb = np.array([g.wirtinger_zbar(j + 1).evaluate(z) for j in range(n)])
    beta = np.empty(2 * n)  # d|g|^2 = 2 Re(conj(g) dg)
    dg_dx, dg_dy = gz + gzb, 1j * (gz - gzb)
    beta[0::2], beta[1::2] = 2 * np.real(np.conj(gv) * dg_dx), 2 * np.real(np.conj(gv) * dg_dy)
    weight = np.exp(-c * abs(gv) ** 2)
    dalpha_c = weight * (omega - c * (np.outer(beta, alpha) - np.outer(alpha, beta)))
    basis = np.linalg.svd(x[None, :])[2][1:].T
    rows = np.vstack([basis.T @ dalpha_c @ basis, weight * alpha @ basis])
    rhs = np.zeros(rows.shape[0])
    rhs[-1] = 1
    s, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    assert np.linalg.norm(rows @ s - rhs) < 1e-10
    return real_to_point(basis @ s)


def test_reeb_c_formula_matches_direct_solve():
    s = sample_link(G21, 1.0, 20, seed=1)
    for z in s.points:
        grad = theta_grad(ANGLE31, z)
        g2 = abs(ANGLE31.evaluate(z)) ** 2
        one, two = v1v2(ANGLE31, z)
        base = dtheta(grad, reeb(z))
        for c in (0.0, 1.0, 5.0):
            direct = dtheta(grad, _direct_reeb_c(ANGLE31, z, c))
            formula = dtheta_reeb_c(np.array(base), np.array(g2), np.array(one - two), c)
            assert abs(direct - formula) <= 1e-8 * max(1.0, abs(direct))


def test_bracket_monotone_in_c():
    rng = np.random.default_rng(5)
    base, g2, gap = rng.normal(size=50), rng.uniform(0.1, 2, 50), rng.uniform(0.01, 1, 50)
    cs = np.linspace(0, 10, 21)
    brackets = np.array([dtheta_reeb_c(base, g2, gap, c) * np.exp(-c * g2) for c in cs])
    assert np.all(np.diff(brackets, axis=0) > 0)
    # and the full value grows once the bracket is positive
    values = np.array([dtheta_reeb_c(base, g2, gap, c) for c in cs])
    positive = brackets[:-1] > 0
    assert np.all(np.diff(values, axis=0)[positive] > 0)


def test_openbook_scan_small():
    rep = openbook_scan(G21, ANGLE31, samples=80, seed=0)
    assert rep.verdict == "positive" and rep.min_dtheta_rc > 0
    assert rep.v1v2_margin >= 0 and rep.consistency_error < 1e-6
    assert rep.c_used <= 64
    linear = openbook_scan(SQUARES, parse("z1", 3), samples=40, seed=0)
    assert linear.verdict == "positive" and linear.c_used == 0
    assert math.isclose(linear.min_by_c[0], 0.5, rel_tol=1e-9)
    unreachable = openbook_scan(MixedMap([parse("z1", 3)]), parse("z1", 3), samples=10, seed=0)
    assert unreachable.verdict == "sampling_failure"


def test_binding_checks():
    lam4 = [[1, 1, 1, 1], [1, 2, 3, 4]]
    mixed = mixed_hamm_map(lam4, [2, 2, 2, 2], [1, 1, 1, 1])
    rep = binding_contact_check(mixed, 1, samples=40, seed=0)
    assert rep.verdict == "strictly_positive_on_samples"
    holo = binding_contact_check(hamm_map(lam4, [2, 2, 2, 2]), 1, samples=40, seed=0)
    assert holo.min_D >= 0
    spare = MixedMap([parse("z1^2*zb1+z2^2*zb2+z3^2*zb3", 4)])
    assert binding_contact_check(spare, 4, samples=20, seed=0).to_json() == holomorphic_like_scan(
        spare, samples=20, seed=0
    ).to_json()


def test_drop_variable():
    f = MixedMap([parse("z1^2+z2*zb3+z3^2", 3)])
    assert drop_variable(f, 1).components[0] == parse("z1*zb2+z2^2", 2)
    assert drop_variable(f, 2).components[0] == parse("z1^2+z2^2", 2)
    with pytest.raises(ValueError):
        drop_variable(f, 4)
