from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.special as sc

from slaterint import specfun as sf
from slaterint.quadrature import (EvalResult, QuadraturePlan, eval_budget, fit_log_proposal,
                                  integrate_1d, integrate_nd, log_student_t_sampler,
                                  monte_carlo_oracle)

INF = math.inf


def _corpus():
    out = []
    for n in range(5):
        for a in (0.5, 1.0, 3.0):
            out.append((lambda x, n=n, a=a: x ** n * np.exp(-a * x), 0.0, INF, math.factorial(n) / a ** (n + 1)))
    for a in (0.3, 1.0, 4.0):
        out.append((lambda x, a=a: np.exp(-a * x) / np.sqrt(x), 0.0, INF, math.sqrt(math.pi / a)))
        out.append((lambda x, a=a: np.exp(-a * x * x), 0.0, INF, 0.5 * math.sqrt(math.pi / a)))
    for a in (0.5, 2.0):
        out.append((lambda x, a=a: sf.bessel_k(0, a * x), 0.0, INF, math.pi / (2 * a)))
    for k in range(10):
        out.append((lambda x, k=k: x ** k, 0.0, 1.0, 1.0 / (k + 1)))
    out += [
        (lambda x: 1 / (1 + x * x), 0.0, INF, math.pi / 2),
        (np.log, 0.0, 1.0, -1.0),
        (lambda x: x ** -0.5, 0.0, 1.0, 2.0),
        (lambda x: x ** (-1 / 3), 0.0, 1.0, 1.5),
        (np.sin, 0.0, math.pi, 2.0),
        (np.cos, 0.0, math.pi / 2, 1.0),
        (lambda x: (1 + x) ** -2, 0.0, INF, 1.0),
        (lambda x: (1 + x) ** -3, 0.0, INF, 0.5),
        (lambda x: np.exp(-x) * np.cos(x), 0.0, INF, 0.5),
        (lambda x: np.log(x) * np.exp(-x), 0.0, INF, -np.euler_gamma),
        (lambda x: x / np.expm1(x), 0.0, INF, math.pi ** 2 / 6),
        (lambda x: np.sqrt(x) * np.exp(-x), 0.0, INF, math.sqrt(math.pi) / 2),
        (lambda x: 1 / np.sqrt(1 - x * x), 0.0, 1.0, math.pi / 2),
        (np.exp, 0.0, 1.0, math.e - 1),
        (lambda x: 1 / x, 1.0, math.e, 1.0),
        (lambda x: np.log(x) ** 2, 0.0, 1.0, 2.0),
        (lambda x: sc.k1(x) * x, 0.0, INF, math.pi / 2),
    ]
    return out


CORPUS = _corpus()


def test_corpus_size():
    assert len(CORPUS) >= 50


@pytest.mark.parametrize("method", ["adaptive-subdivision", "double-exponential"])
def test_corpus_accuracy_and_error_honesty(method):
    honest = 0
    for f, a, b, truth in CORPUS:
        res = integrate_1d(f, QuadraturePlan(lower=a, upper=b, rel_tol=1e-10, method=method))
        assert res.converged
        assert res.value == pytest.approx(truth, rel=1e-8, abs=1e-12)
        if abs(res.value - truth) <= 10 * res.err_estimate + 4e-16 * abs(truth):
            honest += 1
    assert honest >= 0.95 * len(CORPUS)


def test_examples_1d():
    assert integrate_1d(lambda x: np.exp(-x)).value == pytest.approx(1.0, abs=1e-12)
    assert integrate_1d(lambda x: sf.bessel_k(0, x)).value == pytest.approx(math.pi / 2, rel=1e-10)
    assert integrate_1d(lambda x: np.exp(-x) / np.sqrt(x)).value == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_kwargs_and_mappings():
    ref = integrate_1d(np.exp, lower=-1.0, upper=0.0)
    assert ref.value == pytest.approx(1 - math.exp(-1), rel=1e-13)
    f = lambda x: np.exp(-x) * x ** 2 / (1 + x)
    r = integrate_1d(f, QuadraturePlan(mapping="rational", rel_tol=1e-12))
    e = integrate_1d(f, QuadraturePlan(mapping="exponential", rel_tol=1e-12))
    assert r.value == pytest.approx(e.value, rel=1e-11)


def test_determinism():
    plan = QuadraturePlan(rel_tol=1e-12, points=(0.7,))
    f = lambda x: np.exp(-x) * np.abs(np.sin(3 * x))
    assert integrate_1d(f, plan) == integrate_1d(f, plan)


@pytest.mark.parametrize("kw", [dict(rel_tol=1e-15), dict(max_evals=10), dict(lower=1.0, upper=1.0),
                                dict(method="simpson"), dict(mapping="log"), dict(lower=-INF),
                                dict(scale=0.0), dict(abs_tol=-1.0)])
def test_plan_validation(kw):
    with pytest.raises(ValueError):
        QuadraturePlan(**kw)


def test_budget_exhaustion_is_flagged():
    f = lambda x: np.sin(1 / x) / x ** 0.5
    res = integrate_1d(f, QuadraturePlan(lower=1e-6, upper=1.0, max_evals=45, rel_tol=1e-12))
    assert not res.converged


def test_eval_budget_caps_evaluations():
    f = lambda x: np.exp(-x) / np.sqrt(x)
    with eval_budget(30):
        res = integrate_1d(f, QuadraturePlan(rel_tol=1e-13))
    assert res.n_evals <= 45
    with pytest.raises(ValueError):
        with eval_budget(5):
            pass


def test_converged_implies_error_bound():
    for f, a, b, _ in CORPUS[:20]:
        plan = QuadraturePlan(lower=a, upper=b, rel_tol=1e-9)
        res = integrate_1d(f, plan)
        if res.converged:
            assert res.err_estimate <= max(plan.rel_tol * abs(res.value), plan.abs_tol)


def test_nd_examples():
    r = integrate_nd(lambda x, y: np.exp(-x - y), [QuadraturePlan(), QuadraturePlan()])
    assert r.value == pytest.approx(1.0, rel=1e-10) and r.converged
    r = integrate_nd(lambda x, y: np.exp(-x * x - y * y), [QuadraturePlan(), QuadraturePlan()])
    assert r.value == pytest.approx(math.pi / 4, rel=1e-10)
    f = lambda z1, z2: 4 * math.pi ** 2 / (z1 + z2 + 1.0) ** 3
    r = integrate_nd(f, [QuadraturePlan(), QuadraturePlan()])
    assert r.value == pytest.approx(2 * math.pi ** 2, rel=1e-9)


def test_nd_variable_limits_and_3d():
    # triangle 0 < y < x < 1
    r = integrate_nd(lambda x, y: np.ones_like(y),
                     [QuadraturePlan(lower=0.0, upper=1.0), lambda x: QuadraturePlan(lower=0.0, upper=x)])
    assert r.value == pytest.approx(0.5, rel=1e-12)
    r = integrate_nd(lambda x, y, z: np.exp(-x - 2 * y - 3 * z), [QuadraturePlan()] * 3)
    assert r.value == pytest.approx(1 / 6, rel=1e-9)
    with pytest.raises(ValueError):
        integrate_nd(lambda x: x, [QuadraturePlan()])


def test_monte_carlo():
    r = monte_carlo_oracle(lambda X: np.exp(-X[:, 0]), [(0.0, INF)], seed=1, n=10 ** 6, scales=[2.0])
    assert abs(r.value - 1.0) <= 3 * r.err_estimate
    r2 = monte_carlo_oracle(lambda X: X[:, 0] * np.exp(-X[:, 0]), [(0.0, INF)], seed=1, n=10 ** 6, scales=[2.0])
    assert abs(r2.value - 1.0) <= 3 * r2.err_estimate
    again = monte_carlo_oracle(lambda X: np.exp(-X[:, 0]), [(0.0, INF)], seed=1, n=10 ** 6, scales=[2.0])
    assert again == r
    with pytest.raises(ValueError):
        monte_carlo_oracle(lambda X: X[:, 0], [(0.0, 1.0)], n=100)


def test_monte_carlo_s2_direct():
    # spherical coordinates about x2 = (0,0,1): x1, cos(theta), azimuth factor 2 pi
    e1, e12, x2 = 1.0, 2.0, 1.0

    def f(X):
        x1, c = X[:, 0], X[:, 1]
        x12 = np.sqrt(x1 * x1 + x2 * x2 - 2 * x1 * x2 * c)
        return 2 * math.pi * x1 * np.exp(-e1 * x1 - e12 * x12) / x12

    r = monte_carlo_oracle(f, [(0.0, INF), (-1.0, 1.0)], seed=3, n=2 * 10 ** 6)
    assert abs(r.value - 0.974078691) <= 4 * r.err_estimate


def test_log_student_t_proposal():
    f = lambda X: np.exp(-X[:, 0] - X[:, 1]) / np.sqrt(X[:, 0] * X[:, 1])
    pilot = log_student_t_sampler(np.zeros(2), np.eye(2) * 4.0)
    mu, cov = fit_log_proposal(f, pilot, seed=0)
    r = monte_carlo_oracle(f, [(0, INF)] * 2, seed=2, n=10 ** 6, sampler=log_student_t_sampler(mu, cov * 1.5))
    assert abs(r.value - math.pi) <= 4 * r.err_estimate
    assert r.err_estimate < 1e-2 * math.pi


def test_eval_result_rel_err():
    assert EvalResult(1.1, 0.0, 1, True).rel_err(1.0) == pytest.approx(0.1)
