"""Acceptance criteria, one test each, at their stated tolerances and time budgets.

Every test prints a single PASS/FAIL line with its runtime straight to the terminal.
"""

from __future__ import annotations

import cmath
import contextlib
import io
import itertools
import math
import re
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_map, random_point, random_poly
from mixsing import cli
from mixsing.contact import D_closed, D_oracle, coeff_C, holomorphic_like_scan
from mixsing.expr_parser import ParseDiagnostic, format_polynomial, parse, parse_polynomial
from mixsing.geometry import (
    MixedCovering,
    SiegelFrame,
    build_siegel_map,
    hamm_family,
    hamm_map,
    is_admissible,
    is_strongly_admissible,
    mixed_hamm_map,
    pullback,
)
from mixsing.links import openbook_scan, sample_link, transversality_check, v1v2_batch
from mixsing.mixed_core import MixedMap, MixedPolynomial, point_to_real, real_jacobian, real_to_point
from mixsing.newton import face_function
from mixsing.nondegen import (
    algebraic_icis_obstruction,
    icis_probe,
    is_rank_deficient,
    mixed_singular_at,
    refute_partial_nondegeneracy,
    refute_strong_nondegeneracy,
)

LAM = [[1, 1, 1], [1, 2, 3]]


@pytest.fixture
def criterion(capsys):
    """Run the body, print one PASS/FAIL line and enforce the time budget."""

    @contextlib.contextmanager
    def run(number: int, title: str, budget: float):
        start = time.perf_counter()
        status, detail = "PASS", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if elapsed >= budget:
                status, detail = "FAIL", f" over budget {budget:g}s"
                raise AssertionError(f"criterion {number} took {elapsed:.2f}s, budget {budget:g}s")
        except BaseException as exc:
            status = "FAIL"
            detail = detail or f" {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            raise
        finally:
            elapsed = time.perf_counter() - start
            with capsys.disabled():
                print(f"\n[{status}] criterion {number:2d} {title} ({elapsed:.2f}s){detail}")

    return run


# -- 1 ---------------------------------------------------------------------------------


def fd_jacobian(fmap, p, h=1e-6):
    x = point_to_real(np.asarray(p, dtype=complex))
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        d = (fmap.evaluate(real_to_point(x + e)) - fmap.evaluate(real_to_point(x - e))) / (2 * h)
        cols.append(np.ravel(np.column_stack([d.real, d.imag])))
    return np.array(cols).T


def test_wirtinger_correctness(criterion):
    rng = np.random.default_rng(101)
    with criterion(1, "Wirtinger derivatives vs finite differences", 10):
        for _ in range(200):
            n = int(rng.integers(1, 5))
            f, g = random_poly(rng, n, max_deg=5), random_poly(rng, n, max_deg=5)
            p = random_point(rng, n)
            exact, fd = real_jacobian(MixedMap([f]), p), fd_jacobian(MixedMap([f]), p)
            assert np.linalg.norm(exact - fd) < 1e-6 * max(1.0, np.linalg.norm(exact))
            j = int(rng.integers(1, n + 1))
            assert (f * g).wirtinger_z(j) == f.wirtinger_z(j) * g + f * g.wirtinger_z(j)
            assert (f * g).wirtinger_zbar(j) == f.wirtinger_zbar(j) * g + f * g.wirtinger_zbar(j)
            assert f.conjugate().wirtinger_zbar(j) == f.wirtinger_z(j).conjugate()


# -- 2 ---------------------------------------------------------------------------------


def real_rank_deficient(fmap, p, tol=1e-8):
    s = np.linalg.svd(real_jacobian(fmap, p), compute_uv=False)
    full = np.zeros(2 * fmap.k)
    full[: min(s.size, 2 * fmap.k)] = s[: 2 * fmap.k]
    return is_rank_deficient(full[-1], full[0], tol)


def complex_rank_deficient(fmap, p, tol=1e-8):
    jac = np.array([[f.wirtinger_z(j + 1).evaluate(p) for j in range(fmap.nvars)] for f in fmap.components])
    s = np.linalg.svd(jac, compute_uv=False)
    full = np.zeros(fmap.k)
    full[: min(s.size, fmap.k)] = s[: fmap.k]
    return is_rank_deficient(full[-1], full[0], tol)


def test_criterion_equivalence(criterion):
    rng = np.random.default_rng(202)
    with criterion(2, "relation kernel test vs real and complex rank", 30):
        disagreements = 0
        singular_seen = 0
        for i in range(500):
            n, k = int(rng.integers(1, 5)), int(rng.integers(1, 3))
            holo = i % 4 == 0
            fmap = random_map(rng, n, k, max_deg=4, holomorphic=holo)
            p = random_point(rng, n)
            if i % 5 == 1:
                # force genuine singular points: a repeated component, or the critical origin
                fmap = MixedMap([fmap.components[0]] * 2) if k == 2 else MixedMap([fmap.components[0] * fmap.components[0]])
                if k == 1:
                    p = np.zeros(n, dtype=complex)
            verdict = mixed_singular_at(fmap, p).singular
            singular_seen += verdict
            disagreements += verdict != real_rank_deficient(fmap, p)
            if holo:
                disagreements += verdict != complex_rank_deficient(fmap, p)
        assert disagreements == 0
        assert singular_seen > 0


# -- 3 ---------------------------------------------------------------------------------


def brute_face(f, w):
    degs = [sum(p * (a + b) for p, a, b in zip(w, t.mu, t.nu)) for t in f.terms]
    low = min(degs)
    return MixedPolynomial(f.nvars, [(t.mu, t.nu, t.coeff) for t, d in zip(f.terms, degs) if d == low])


def test_face_function_oracle(criterion):
    rng = np.random.default_rng(303)
    with criterion(3, "face functions vs brute-force argmin", 5):
        for _ in range(200):
            n = int(rng.integers(1, 5))
            f = random_poly(rng, n, max_deg=6, nterms=int(rng.integers(1, 8)))
            w = tuple(int(x) for x in rng.integers(1, 8, size=n))
            assert face_function(f, w) == brute_face(f, w)


# -- 4 ---------------------------------------------------------------------------------


def test_pndnd_reproduction(criterion):
    pndnd = MixedMap([parse("z1+(z2+z3)^2", 3), parse("z1^2+z2^2+z3^2", 3)])
    with criterion(4, "degenerate but partially non-degenerate pair", 120):
        strong = refute_strong_nondegeneracy(pndnd, bound=4, budget=64, seed=0)
        assert strong.verdict == "refuted"
        hits = [w for w in strong.witnesses if w.weight == (3, 1, 1)]
        assert hits and all(w.residual < 1e-8 for w in hits)
        partial = refute_partial_nondegeneracy(pndnd, bound=4, budget=64, seed=0)
        assert partial.verdict == "no_counterexample_found" and not partial.witnesses


# -- 5 ---------------------------------------------------------------------------------


def test_siegel_certificates(criterion):
    with criterion(5, "exact admissibility certificates", 1):
        frame = SiegelFrame([[1, 1j, (-1, -1)]])
        rep = is_admissible(frame)
        assert rep.admissible
        assert rep.certificate.siegel_weights == (Fraction(1, 3),) * 3
        assert set(rep.certificate.separators) == set(itertools.combinations(range(3), 2))
        assert rep.certificate.verify(frame)
        rejected = is_admissible(SiegelFrame([[1, -1, 1j]]))
        assert not rejected.admissible
        # columns 1 and -1 cannot be separated
        assert tuple(rejected.violating_subset) == (0, 1)


# -- 6 ---------------------------------------------------------------------------------


def random_strong_frames(rng, count):
    frames = []
    while len(frames) < count:
        n = 3 + len(frames) % 2
        cols = [cmath.exp(2j * math.pi * (j + rng.uniform(-0.15, 0.15)) / n) * rng.uniform(0.5, 2) for j in range(n)]
        cols = [complex(round(c.real, 3), round(c.imag, 3)) for c in cols]
        frame = SiegelFrame([cols])
        if is_strongly_admissible(frame):
            frames.append(frame)
    return frames


def test_siegel_icis_probe(criterion):
    rng = np.random.default_rng(606)
    with criterion(6, "Siegel maps are regular on sampled links", 60):
        for frame in random_strong_frames(rng, 3):
            rep = icis_probe(build_siegel_map(frame), [1.0, 0.1, 0.01], 200, seed=0)
            assert rep.verdict == "regular_on_samples"
            assert all(r.found >= 200 and r.singular == 0 and r.sigma_min > 0 for r in rep.radii)
            scaled = [r.sigma_min_scaled for r in rep.radii]
            assert max(scaled) / min(scaled) <= 2


# -- 7 ---------------------------------------------------------------------------------


def test_contact_oracle_vs_closed_forms(criterion):
    rng = np.random.default_rng(707)
    with criterion(7, "contact top form vs closed forms", 30):
        for _ in range(50):
            fmap = random_map(rng, 3, 1, holomorphic=True, max_deg=4, min_deg=1)
            p = random_point(rng, 3)
            c = coeff_C(fmap.components[0], p)
            expected = sum(c[i, j] for i, j in itertools.combinations(range(3), 2))
            got = D_oracle(fmap, p)
            assert abs(got - expected) < 1e-9 * max(abs(expected), 1e-300)
        for i in range(50):
            n = 3 + i % 2
            fmap = random_map(rng, n, 2, max_deg=3, min_deg=1)
            p = random_point(rng, n)
            oracle, closed = D_oracle(fmap, p), D_closed(fmap, p)
            assert abs(oracle - closed) < 1e-9 * max(abs(oracle), 1e-300)


# -- 8 ---------------------------------------------------------------------------------


def partially_nondegenerate_maps(rng, count):
    found = []
    while len(found) < count:
        degs = rng.integers(2, 5, size=3)
        coeffs = [complex(*rng.integers(1, 6, size=2)) for _ in range(4)]
        text = "+".join(f"({c.real:g}+{c.imag:g}*i)*z{j + 1}^{d}" for j, (c, d) in enumerate(zip(coeffs, degs)))
        text += f"+({coeffs[3].real:g}+{coeffs[3].imag:g}*i)*z1*z2*z3"
        fmap = MixedMap([parse(text, 3)])
        if refute_partial_nondegeneracy(fmap, bound=3, budget=16, seed=0).verdict != "refuted":
            found.append(fmap)
    return found


def test_pullback_sign_law(criterion):
    rng = np.random.default_rng(808)
    with criterion(8, "sign of D on (2,1) and (1,2) pullbacks", 120):
        for fmap in partially_nondegenerate_maps(rng, 5):
            pos = holomorphic_like_scan(pullback(MixedCovering.homogeneous(2, 1, 3), fmap), samples=520, seed=0)
            neg = holomorphic_like_scan(pullback(MixedCovering.homogeneous(1, 2, 3), fmap), samples=520, seed=0)
            assert pos.samples >= 500 and neg.samples >= 500
            assert pos.verdict == "strictly_positive_on_samples" and not pos.violations
            assert neg.verdict == "strictly_negative_on_samples" and not neg.violations


# -- 9 ---------------------------------------------------------------------------------


def test_openbook_scan(criterion):
    big_g = pullback(MixedCovering.homogeneous(2, 1, 3), MixedMap([parse("z1^2+z2^2+z3^2", 3)]))
    g = pullback(MixedCovering.homogeneous(3, 1, 3), parse("z1+z2+z3", 3))
    with criterion(9, "open book angle derivative along R_c", 180):
        rep = openbook_scan(big_g, g, samples=320, seed=0)
        assert rep.samples >= 300
        assert rep.verdict == "positive" and rep.c_used <= 64 and rep.min_dtheta_rc > 0
        assert rep.v1v2_margin >= 0
        assert rep.consistency_error < 1e-6
        pts = sample_link(big_g, 1.0, 320, seed=0).points
        a, b = v1v2_batch(g, pts)
        assert np.all(a >= b)


# -- 10 --------------------------------------------------------------------------------


def test_hamm_family(criterion):
    mixed, holo = mixed_hamm_map(LAM, [2, 2, 2], [1, 1, 1]), hamm_map(LAM, [2, 2, 2])
    radii = [1.0, 0.3, 0.1]
    with criterion(10, "Hamm interpolation stays regular and transverse", 120):
        for t in ("0", "1/4", "1/2", "3/4", "1"):
            g_t = hamm_family(mixed, holo, Fraction(t))
            probe = icis_probe(g_t, radii, 100, seed=0)
            assert probe.verdict == "regular_on_samples"
            assert all(r.found >= 100 for r in probe.radii)
            for r in radii:
                sample = sample_link(g_t, r, 100, seed=0)
                assert len(sample.indices) >= 100
                rep = transversality_check(g_t, sample)
                assert rep.entries[0].failures == 0


# -- 11 --------------------------------------------------------------------------------


def test_algebraic_obstruction(criterion):
    with criterion(11, "purely mixed Hamm is not an algebraic ICIS", 5):
        mixed = algebraic_icis_obstruction(mixed_hamm_map(LAM, [2, 2, 2], [1, 1, 1]))
        assert mixed.verdict == "not_algebraic_icis"
        assert mixed.line_check is not None and mixed.line_check.passed
        holo = algebraic_icis_obstruction(hamm_map(LAM, [2, 2, 2]))
        assert holo.verdict == "inconclusive"


# -- 12 --------------------------------------------------------------------------------


def random_expression(rng, n, depth=0):
    """expr := term (("+"|"-") term)*"""
    out = random_term(rng, n, depth)
    for _ in range(int(rng.integers(0, 3 if depth < 2 else 1))):
        out += str(rng.choice(["+", "-"])) + random_term(rng, n, depth)
    return out


def random_term(rng, n, depth):
    """term := ("-")? factor ("*" factor)*"""
    out = "-" if rng.random() < 0.2 else ""
    out += random_factor(rng, n, depth)
    for _ in range(int(rng.integers(0, 3))):
        out += "*" + random_factor(rng, n, depth)
    return out


def random_factor(rng, n, depth):
    """factor := base ("^" UINT)? with base one of VAR, CONJ, LIT or a parenthesized expr."""
    kind = int(rng.integers(0, 7 if depth < 2 else 6))
    if kind == 0:
        base = str(int(rng.integers(0, 20)))
    elif kind == 1:
        base = f"{int(rng.integers(0, 9))}/{int(rng.integers(1, 9))}"
    elif kind == 2:
        base = "i"
    elif kind == 3:
        base = f"({int(rng.integers(0, 5))}/{int(rng.integers(1, 5))}+{int(rng.integers(1, 5))}i)"
    elif kind in (4, 5):
        base = ("z" if kind == 4 else "zb") + str(int(rng.integers(1, n + 1)))
    else:
        base = "(" + random_expression(rng, n, depth + 1) + ")"
    if rng.random() < 0.3:
        base += "^" + str(int(rng.integers(0, 4)))
    return base


def numeric_value(text, point):
    """Evaluate the expression text with Python arithmetic as an independent oracle."""
    env = {f"zb{j + 1}": complex(z).conjugate() for j, z in enumerate(point)}
    env.update({f"z{j + 1}": complex(z) for j, z in enumerate(point)})
    env["i"] = 1j
    py = re.sub(r"(\d+)i", r"(\1*i)", text)
    py = re.sub(r"(\d+)/(\d+)", r"(\1/\2)", py).replace("^", "**")
    return eval(py, {"__builtins__": {}}, env)  # noqa: S307 - generated grammar only


MUTATION_ALPHABET = "z b 0123456789+-*^()/i é"


def test_parser_fuzz(criterion):
    rng = np.random.default_rng(1212)
    with criterion(12, "parser round-trips and positioned diagnostics", 30):
        valid = []
        for _ in range(10_000):
            n = int(rng.integers(1, 4))
            text = random_expression(rng, n)
            f = parse(text, n)
            assert parse(format_polynomial(f), n) == f
            valid.append((text, n))
            if len(valid) % 20 == 0:
                p = random_point(rng, n)
                want = numeric_value(text, p)
                assert abs(f.evaluate(p) - want) <= 1e-9 * max(1.0, abs(want))
        invalid = 0
        attempts = 0
        while invalid < 1000:
            attempts += 1
            text, n = valid[int(rng.integers(0, len(valid)))]
            chars = list(text)
            for _ in range(int(rng.integers(1, 4))):
                pos = int(rng.integers(0, len(chars) + 1))
                action = rng.integers(0, 3)
                if action == 0 or not chars:
                    chars.insert(pos, MUTATION_ALPHABET[int(rng.integers(0, len(MUTATION_ALPHABET)))])
                elif action == 1:
                    del chars[min(pos, len(chars) - 1)]
                else:
                    chars[min(pos, len(chars) - 1)] = MUTATION_ALPHABET[int(rng.integers(0, len(MUTATION_ALPHABET)))]
            mutated = "".join(chars)
            res = parse_polynomial(mutated, n)
            if isinstance(res, ParseDiagnostic):
                invalid += 1
                assert res.kind in {"syntax", "arity", "exponent", "coefficient"}
                assert 0 <= res.position <= len(mutated.encode())
            else:
                assert isinstance(res, MixedPolynomial)
        assert attempts < 20_000


# -- 13 --------------------------------------------------------------------------------


def test_manifest_determinism(criterion):
    with criterion(13, "bundled manifest is byte-identical for 1, 4, 8 workers", 600):
        outputs = []
        for workers in ("1", "4", "8"):
            buf = io.StringIO()
            with contextlib.redirect_stdout(buf):
                code = cli.main(["batch", "paper_suite.manifest", "--workers", workers])
            assert code == cli.EXIT_OK
            outputs.append(buf.getvalue().encode())
        assert outputs[0] == outputs[1] == outputs[2]
        assert b'"failures": 0' in outputs[0]
