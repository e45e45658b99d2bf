from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slaterint import amplitudes as amp
from slaterint.errors import ConsistencyError, DivergentParameterError, DomainError

PI = math.pi
eta = st.floats(min_value=0.3, max_value=3.0)
xs = st.floats(min_value=0.3, max_value=3.0)


def s2_ref(e1, e12, x):
    return 4 * PI * (math.exp(-e12 * x) - math.exp(-e1 * x)) / (x * (e1 * e1 - e12 * e12))


# S2

def test_s2_closed_examples():
    assert amp.s2_closed(1, 2, 1) == pytest.approx(4 * PI / 3 * (math.exp(-1) - math.exp(-2)), rel=1e-15)
    assert amp.s2_closed(1, 2, 1) == pytest.approx(0.974078691, rel=1e-9)
    assert amp.s2_closed(1, 1, 1) == pytest.approx(2 * PI * math.exp(-1), rel=1e-15)
    assert amp.s2_closed(1, 0, 1) == pytest.approx(4 * PI * (1 - math.exp(-1)), rel=1e-15)
    assert amp.s2_closed(3, 3, 2) == pytest.approx(2 * PI * math.exp(-6) / 3, rel=1e-15)


def test_s2_closed_extremes():
    # e^(-eta1 x2) underflows but the value does not
    v = amp.s2_closed(800.0, 1.0, 1.0)
    assert v == pytest.approx(4 * PI * math.exp(-1) / (800.0 ** 2 - 1), rel=1e-12)
    assert amp.s2_closed(0.0, 2.0, 1.5) == pytest.approx(amp.s2_closed(2.0, 0.0, 1.5), rel=1e-15)


@pytest.mark.parametrize("args", [(0, 0, 1), (-1, 1, 1), (1, 1, 0)])
def test_s2_rejects(args):
    with pytest.raises(DomainError):
        amp.s2_closed(*args)
    with pytest.raises(DivergentParameterError):
        amp.s2_closed(0, 0, 1)


@pytest.mark.parametrize("args", [(1, 2, 1), (2, 1, 0.5), (1, 0, 1), (0, 1.3, 0.7), (3, 3, 2), (0.2, 5.0, 4.0)])
def test_s2_routes(args):
    ref = amp.s2_closed(*args)
    for fn in (amp.s2_via_gaussian, amp.s2_via_new_transform):
        res = fn(*args)
        assert res.converged
        assert res.value == pytest.approx(ref, rel=1e-10)


def test_s2_gaussian_near_seam():
    res = amp.s2_via_gaussian(1.0, 1.0 + 1e-6, 1.0)
    assert res.value == pytest.approx(2 * PI * math.exp(-1), rel=1e-5)


def test_s2_direct_oracle():
    spec = amp.AmplitudeSpec("S2", (1.0, 2.0), 1.0)
    assert amp.direct_oracle(spec).value == pytest.approx(amp.s2_closed(1, 2, 1), rel=1e-10)
    spec = amp.AmplitudeSpec("s2-coulomb-limit", (1.3,), 0.6)
    assert amp.direct_oracle(spec).value == pytest.approx(amp.s2_closed(1.3, 0, 0.6), rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(eta, st.floats(min_value=-1e-7, max_value=1e-7), xs)
def test_s2_seam_continuity(e, d, x):
    limit = 2 * PI * math.exp(-e * x) / e
    assert amp.s2_closed(e, e * (1 + d), x) == pytest.approx(limit, rel=1e-5)


@settings(max_examples=100, deadline=None)
@given(eta, eta, xs)
def test_s2_against_difference_form(e1, e12, x):
    if abs(e1 - e12) > 1e-2:
        assert amp.s2_closed(e1, e12, x) == pytest.approx(s2_ref(e1, e12, x), rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(eta, eta, xs)
def test_s2_symmetric(e1, e12, x):
    assert amp.s2_closed(e1, e12, x) == pytest.approx(amp.s2_closed(e12, e1, x), rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(eta, eta, xs, st.floats(min_value=0.2, max_value=5.0))
def test_s2_scaling(e1, e12, x, lam):
    # S2 has the dimension of a length
    assert amp.s2_closed(lam * e1, lam * e12, x / lam) == pytest.approx(amp.s2_closed(e1, e12, x) / lam, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(eta, eta, xs, st.floats(min_value=1e-3, max_value=2.0))
def test_s2_positive_decreasing(e1, e12, x, dx):
    a, b = amp.s2_closed(e1, e12, x), amp.s2_closed(e1, e12, x + dx)
    assert 0 < b < a


# S3

def test_s3_closed_examples():
    assert amp.s3_closed(1, 1, 1) == pytest.approx(2 * PI ** 2, rel=1e-15)
    assert amp.s3_closed(1, 2, 3) == pytest.approx(4 * PI ** 2 / 15, rel=1e-15)
    assert amp.s3_closed(2, 2, 2) == pytest.approx(PI ** 2 / 4, rel=1e-15)
    assert amp.s3_closed(2, 1, 1) == pytest.approx(16 * PI ** 2 / 18, rel=1e-15)


def test_s3_rejects():
    with pytest.raises(DivergentParameterError):
        amp.s3_closed(0, 0, 1)
    with pytest.raises(DomainError):
        amp.s3_closed(-1, 1, 1)


@settings(max_examples=50, deadline=None)
@given(eta, eta, eta, st.floats(min_value=0.2, max_value=5.0))
def test_s3_symmetry_and_scaling(a, b, c, lam):
    ref = amp.s3_closed(a, b, c)
    for p in itertools.permutations((a, b, c)):
        assert amp.s3_closed(*p) == pytest.approx(ref, rel=1e-13)
    assert amp.s3_closed(lam * a, lam * b, lam * c) == pytest.approx(ref / lam ** 3, rel=1e-13)


S3_CASES = [(1, 1, 1), (1, 2, 3), (3, 2, 1), (2, 1, 1), (0.3, 2.7, 1.1), (0, 1, 2), (1, 0, 2), (1, 2, 0)]


@pytest.mark.parametrize("etas", S3_CASES)
@pytest.mark.parametrize("route", ["new-sequential", "new-simultaneous", "zeta-last", "rho-form"])
def test_s3_routes(etas, route):
    spec = amp.AmplitudeSpec("S3", etas)
    res = amp.evaluate(spec, route)
    assert res.converged
    assert res.value == pytest.approx(amp.s3_closed(*etas), rel=1e-8)


@pytest.mark.parametrize("etas", S3_CASES + [(1.0, 1.0 + 1e-5, 2.0), (2.0, 0.5, 2.0)])
def test_s3_simultaneous_1d(etas):
    res = amp.s3_via_simultaneous(*etas, reduction="1d")
    assert res.value == pytest.approx(amp.s3_closed(*etas), rel=1e-8)


def test_s3_three_term_integrand_matches_1d():
    z = np.geomspace(0.01, 100, 25)
    a = amp.s3_three_term_integrand(z, 1.0, 2.0, 3.0)
    b = amp.s3_1d_integrand(z, 1.0, 2.0, 3.0)
    assert np.allclose(a, b, rtol=1e-10, atol=0)


def test_s3_rho_intermediate():
    pair = amp.s3_rho_intermediate((1.0, 1.0, 1.0), 1.0, 1.0)
    want = 2 * PI * math.exp(-math.sqrt(2 / 2)) / (2 ** 1.5 * math.sqrt(2)) * math.exp(-1.0)
    assert pair.rhs == pytest.approx(want, rel=1e-14)
    assert pair.passed
    assert amp.s3_rho_intermediate((0.7, 1.9, 1.3), 0.4, 2.2).passed


def test_s3_k0_rule_enforced(monkeypatch):
    assert amp.s3_k0_integrand(1.0, np.array([2.0]), 1.0, 1.0, 1.0)[0] > 0
    exact = amp.ids.eq40_params

    def perturbed(*args):
        a, b, c, xe = exact(*args)
        return a, 1.1 * b, c, xe

    monkeypatch.setattr(amp.ids, "eq40_params", perturbed)
    with pytest.raises(ConsistencyError):
        amp.s3_k0_integrand(1.0, np.array([2.0]), 1.0, 1.0, 1.0)


def test_s3_oracles():
    spec = amp.AmplitudeSpec("S3", (1.0, 1.0, 1.0))
    assert amp.direct_oracle(spec, "semi-direct").value == pytest.approx(2 * PI ** 2, rel=1e-9)
    mc = amp.direct_oracle(spec, seed=1, n=1_000_000)
    assert abs(mc.value - 2 * PI ** 2) <= 4 * mc.err_estimate
    assert mc.err_estimate < 2e-3 * mc.value
    with pytest.raises(DomainError):
        amp.direct_oracle(spec, "bogus")


def test_s3_mc_seed_reproducible():
    spec = amp.AmplitudeSpec("S3", (0.5, 1.0, 2.0))
    assert amp.direct_oracle(spec, seed=3, n=100_000) == amp.direct_oracle(spec, seed=3, n=100_000)


# S4

def test_s4_closed_examples():
    assert amp.s4_closed(1, 1, 1, 1) == pytest.approx(8 * PI ** 3, rel=1e-15)
    assert amp.s4_closed(1, 2, 3, 2) == pytest.approx(4 * PI ** 3 / 15, rel=1e-15)
    for e in [(1, 2, 3, 2), (0.5, 1.1, 0.2, 3.0)]:
        assert amp.s4_closed(*e) == pytest.approx(amp.s3_closed(*e[:3]) * 4 * PI / e[3] ** 2, rel=1e-15)
    with pytest.raises(DivergentParameterError):
        amp.s4_closed(1, 1, 1, 0)


@settings(max_examples=30, deadline=None)
@given(eta, eta, eta, eta, st.floats(min_value=0.2, max_value=5.0))
def test_s4_scaling(a, b, c, d, lam):
    ref = amp.s4_closed(a, b, c, d)
    assert amp.s4_closed(lam * a, lam * b, lam * c, lam * d) == pytest.approx(ref / lam ** 5, rel=1e-13)


@pytest.mark.parametrize("etas", [(1, 1, 1, 1), (0.5, 1.2, 2.0, 0.8), (0, 1, 2, 1)])
def test_s4_routes(etas):
    ref = amp.s4_closed(*etas)
    for route in ("new-simultaneous", "new-sequential"):
        res = amp.evaluate(amp.AmplitudeSpec("s4", etas), route)
        assert res.value == pytest.approx(ref, rel=1e-6)


def test_s4_stages():
    assert all(p.passed for p in amp.s4_stage_checks((1.0, 1.0, 1.0, 1.0)))
    assert all(p.passed for p in amp.s4_stage_checks((0.4, 2.0, 1.3, 0.7), zeta1=2.1, x3=1.7))
    assert amp.s4_h0().value == pytest.approx(128 * PI, rel=1e-10)


def test_zeta3_closed_matches_numeric():
    for q, p, e3, x3 in [(1.0, 1.0, 1.0, 1.0), (3.2, 0.4, 2.0, 0.3), (0.2, 5.0, 0.6, 2.5)]:
        assert amp.zeta3_numeric(q, p, e3, x3).value == pytest.approx(amp.zeta3_closed(q, p, e3, x3), rel=1e-9)


def test_s4_oracles():
    spec = amp.AmplitudeSpec("S4", (1.0, 1.0, 1.0, 1.0))
    assert amp.direct_oracle(spec, "semi-direct").value == pytest.approx(8 * PI ** 3, rel=1e-9)
    mc = amp.direct_oracle(spec, seed=2, n=1_000_000)
    assert abs(mc.value - 8 * PI ** 3) <= 4 * mc.err_estimate


# AmplitudeSpec and dispatch

def test_spec_validation():
    s = amp.AmplitudeSpec("s2-Coulomb-Limit", (1.0, 0.0), 1.0)
    assert s.kind == "S2-coulomb-limit" and s.etas == (1.0,)
    for kind, etas, x2 in [("S5", (1,), None), ("S2", (1, 1), None), ("S2", (1,), 1.0),
                           ("S2-coulomb-limit", (1, 1), 1.0), ("S3", (1, 1), None), ("S4", (1, 1, 1, 0), None)]:
        with pytest.raises(DomainError):
            amp.AmplitudeSpec(kind, etas, x2)


def test_route_matrix():
    assert amp.PipelineRoute("closed").route == "closed-form"
    assert amp.PipelineRoute("new-transform").route == "new-sequential"
    with pytest.raises(DomainError):
        amp.PipelineRoute("nope")
    with pytest.raises(DomainError):
        amp.evaluate(amp.AmplitudeSpec("S2", (1, 2), 1.0), "rho-form")
    with pytest.raises(DomainError):
        amp.evaluate(amp.AmplitudeSpec("S4", (1, 1, 1, 1)), "gaussian")
    for kind, routes in amp.ROUTE_MATRIX.items():
        assert "closed-form" in routes
        assert all(r in amp.ROUTES for r in routes)


def test_evaluate_every_valid_route():
    specs = [amp.AmplitudeSpec("S2", (1.0, 2.0), 1.0), amp.AmplitudeSpec("S2-coulomb-limit", (1.0,), 1.0),
             amp.AmplitudeSpec("S3", (1.0, 2.0, 3.0)), amp.AmplitudeSpec("S4", (1.0, 2.0, 3.0, 2.0))]
    for spec in specs:
        truth = amp.closed_value(spec)
        for route in amp.ROUTE_MATRIX[spec.kind]:
            res = amp.evaluate(spec, route)
            assert res.rel_err(truth) < 1e-6, (spec.kind, route)
