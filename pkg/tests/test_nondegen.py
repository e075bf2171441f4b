import numpy as np
import pytest

from conftest import random_map, random_point
from mixsing.expr_parser import parse, parse_map_or_raise
from mixsing.geometry import (
    MixedCovering,
    SiegelFrame,
    build_siegel_map,
    hamm_map,
    mixed_hamm_map,
    pullback,
    twisted_pham_brieskorn,
)
from mixsing.mixed_core import MixedMap, real_jacobian
from mixsing.newton import face_tuple
from mixsing.nondegen import (
    algebraic_icis_obstruction,
    certify_structured,
    complexified_line_check,
    icis_probe,
    is_rank_deficient,
    mixed_singular_at,
    refute,
    refute_nondegeneracy,
    refute_partial_nondegeneracy,
    refute_strong_nondegeneracy,
)

PNDND = parse_map_or_raise(["z1+(z2+z3)^2", "z1^2+z2^2+z3^2"], 3)
LAM = [[1, 1, 1], [1, 2, 3]]


def rank_deficient_real(fmap, p, tol=1e-8):
    s = np.linalg.svd(real_jacobian(fmap, p), compute_uv=False)
    full = np.zeros(2 * fmap.k)
    full[: s.size] = s[: 2 * fmap.k]
    return is_rank_deficient(full[-1], full[0], tol)


def test_singular_examples():
    assert mixed_singular_at(MixedMap([parse("z1^2+zb2^2", 2)]), [0, 0]).singular
    check = mixed_singular_at(MixedMap([parse("z1*zb1", 1)]), [0.6 + 0.8j])
    assert check.singular
    (alpha,) = check.alpha
    # with the relation alpha * Dbar f = conj(alpha) * conj(D f), alpha must be real here
    assert abs(abs(alpha) - 1) < 1e-12 and abs(alpha.imag) < 1e-12
    assert not mixed_singular_at(MixedMap([parse("z1", 1)]), [0.3]).singular


def test_criterion_equivalence_small():
    rng = np.random.default_rng(21)
    for _ in range(100):
        n, k = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        fmap = random_map(rng, n, k, max_deg=3)
        p = random_point(rng, n)
        assert mixed_singular_at(fmap, p).singular == rank_deficient_real(fmap, p)


def test_criterion_on_singular_points():
    fmap = MixedMap([parse("(z1-z2)^2", 2), parse("z1*zb1-z2*zb2", 2)])
    p = [0.5 + 0.2j, 0.5 + 0.2j]
    assert rank_deficient_real(fmap, p)
    assert mixed_singular_at(fmap, p).singular


def test_unit_alpha_for_single_component():
    rng = np.random.default_rng(4)
    for _ in range(30):
        f = MixedMap([parse("z1*zb1+z2^2*zb2", 2) * parse("1", 2)])
        p = random_point(rng, 2)
        p[1] = 0
        check = mixed_singular_at(f, p)
        assert check.singular
        assert abs(np.linalg.norm(check.alpha) - 1) < 1e-6


def test_pndnd_verdicts():
    strong = refute_strong_nondegeneracy(PNDND, bound=4, seed=0)
    assert strong.verdict == "refuted"
    assert any(w.weight == (3, 1, 1) for w in strong.witnesses)
    assert all(w.residual < 1e-8 for w in strong.witnesses)
    assert refute_nondegeneracy(PNDND, bound=4, seed=0).verdict == "no_counterexample_found"
    assert refute_partial_nondegeneracy(PNDND, bound=4, seed=0).verdict == "no_counterexample_found"


def test_pndnd_face_torus_zero_set_empty():
    face = MixedMap(list(face_tuple(PNDND, (3, 1, 1))))
    assert face.components[0] == parse("(z2+z3)^2", 3)
    # z2 = -z3 then z2^2 + z3^2 = 2 z3^2 vanishes only at z3 = 0
    for z3 in (0.3, 1j, 2 - 1j):
        assert abs(face.evaluate([1, -z3, z3])[1]) > 0
    # but the rank drops at (1,1,1)
    assert mixed_singular_at(face, [1, 1, 1]).singular


def test_square_difference_refuted_everywhere():
    fmap = MixedMap([parse("(z1-z2)^2", 2)])
    for mode in ("plain", "strong", "partial"):
        rep = refute(fmap, mode, bound=3, seed=0)
        assert rep.verdict == "refuted"
        assert any(w.weight == (1, 1) for w in rep.witnesses)


def test_linear_never_refuted():
    fmap = MixedMap([parse("z1", 2)])
    assert refute_strong_nondegeneracy(fmap, bound=3, seed=0).verdict == "no_counterexample_found"


def test_pham_brieskorn_strong():
    fmap = MixedMap([twisted_pham_brieskorn([2, 3, 2], [1, 2, 3])])
    assert refute_strong_nondegeneracy(fmap, bound=3, seed=1).verdict == "no_counterexample_found"


def test_pullback_partial_spot_check():
    g = pullback(MixedCovering.homogeneous(2, 1, 2), MixedMap([parse("z1^2+z2^2", 2)]))
    rep = refute_partial_nondegeneracy(g, bound=4, seed=0, certify=False)
    assert rep.verdict == "no_counterexample_found"


def test_witnesses_reverify():
    rep = refute_strong_nondegeneracy(PNDND, bound=4, seed=0)
    for w in rep.witnesses:
        face = MixedMap(list(face_tuple(PNDND, w.weight)))
        assert mixed_singular_at(face, w.point).singular
        assert min(abs(z) for z in w.point) >= 1e-3


def test_refuter_determinism():
    a = refute_strong_nondegeneracy(PNDND, bound=3, seed=7).to_json()
    b = refute_strong_nondegeneracy(PNDND, bound=3, seed=7).to_json()
    c = refute_strong_nondegeneracy(PNDND, bound=3, seed=7, workers=3).to_json()
    assert a == b == c


def test_certificates():
    cert = certify_structured(hamm_map([[1, 1, 1, 1], [1, 2, 3, 4]], [2, 2, 2, 2]))
    assert cert is not None and cert.kind == "hamm_minors"
    assert sorted(cert.details["minors"].values()) == sorted(
        [[str(v), "0"] for v in (1, 2, 3, 1, 2, 1)]
    )
    assert certify_structured(hamm_map([[1, 1], [1, 1]], [2, 2])) is None
    pulled = pullback(MixedCovering.homogeneous(2, 1, 3), hamm_map(LAM, [2, 2, 2]))
    chain = certify_structured(pulled)
    assert chain.kind == "covering_pullback" and chain.inner.kind == "hamm_minors"
    siegel = certify_structured(build_siegel_map(SiegelFrame([[1, 1j, (-1, -1)]])))
    assert siegel.kind == "siegel_strongly_admissible" and siegel.properties == {"plain"}
    rep = refute_nondegeneracy(hamm_map(LAM, [2, 2, 2]), bound=3)
    assert rep.verdict == "certified" and rep.certificate is not None


def test_assumption_flag():
    g = pullback(MixedCovering.homogeneous(2, 1, 3), MixedMap([parse("z1^2+z2^2+z3^2+z1*z2", 3)]))
    assert certify_structured(g) is None
    cert = certify_structured(g, assume_holomorphic_partial=True)
    assert cert.kind == "covering_pullback" and cert.inner.kind == "assumed_partially_nondegenerate"
    assert cert.properties == {"partial"}


def test_icis_probe_examples():
    siegel = build_siegel_map(SiegelFrame([[1, 1j, (-1, -1)]]))
    rep = icis_probe(siegel, [1.0, 0.1], 40, seed=0)
    assert rep.verdict == "regular_on_samples"
    scaled = [r.sigma_min_scaled for r in rep.radii]
    assert max(scaled) / min(scaled) < 2
    rep = icis_probe(MixedMap([parse("z1*zb1", 2)]), [1.0], 10, seed=0)
    assert rep.verdict == "singular_points_found"
    hamm = mixed_hamm_map(LAM, [2, 2, 2], [1, 1, 1])
    assert icis_probe(hamm, [1.0, 0.1], 40, seed=0).verdict == "regular_on_samples"


def test_obstruction():
    mixed = algebraic_icis_obstruction(mixed_hamm_map(LAM, [2, 2, 2], [1, 1, 1]))
    assert mixed.verdict == "not_algebraic_icis" and mixed.line_check.passed
    holo = algebraic_icis_obstruction(hamm_map(LAM, [2, 2, 2]))
    assert holo.verdict == "inconclusive"
    siegel = algebraic_icis_obstruction(build_siegel_map(SiegelFrame([[1, 1j, (-1, -1)]])))
    assert siegel.verdict == "inconclusive" and siegel.line_check.passed
    assert not complexified_line_check(MixedMap([parse("z1", 1)]), 1, 1).passed


def test_bad_mode():
    with pytest.raises(ValueError):
        refute(PNDND, "weird")
