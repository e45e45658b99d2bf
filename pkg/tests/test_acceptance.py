"""Acceptance criteria 1-10, one printed PASS/FAIL line each.

Tolerances are pinned here and never loosened.
"""
from __future__ import annotations

import json
import math
import time

import numpy as np

from conftest import record
from slaterint import amplitudes as amp
from slaterint import identities as ids
from slaterint import specfun as sf
from slaterint import transforms as tr
from slaterint.cli import main

TOL_S2 = 1e-8
TOL_S3 = 1e-6
TOL_S4 = 1e-4
TOL_RECON = 1e-6
TOL_RECON_MC = 1e-3
TOL_IDENT = 1e-7
TOL_PBM = 1e-6
TOL_DET = 1e-12
TOL_REC = 1e-10
TOL_REC_FD = 1e-6
TOL_SPECFUN = 1e-10


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_two_orbital():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for e1, e12, x2 in rng.uniform(0.2, 5.0, (100, 3)):
        ref = amp.s2_closed(e1, e12, x2)
        worst = max(worst, rel(amp.s2_via_new_transform(e1, e12, x2).value, ref),
                    rel(amp.s2_via_gaussian(e1, e12, x2).value, ref))
    wall = time.perf_counter() - t0
    ok = worst <= TOL_S2 and wall < 10.0
    record(1, ok, f"S2 max rel err {worst:.2e} (tol {TOL_S2:g}), {wall:.2f} s (< 10 s)")
    assert ok


def test_criterion_02_three_orbital():
    rng = np.random.default_rng(202)
    worst = 0.0
    for etas in rng.uniform(0.2, 5.0, (25, 3)):
        ref = amp.s3_closed(*etas)
        worst = max(worst, rel(amp.s3_via_simultaneous(*etas).value, ref),
                    rel(amp.s3_zeta2_first(*etas).value, ref))
    unit = amp.s3_closed(1.0, 1.0, 1.0)
    ok = worst <= TOL_S3 and rel(unit, 2 * math.pi ** 2) <= 1e-14 and abs(unit - 19.7392088) < 5e-8
    record(2, ok, f"S3 max rel err {worst:.2e} (tol {TOL_S3:g}), S3(1,1,1) = {unit:.7f}")
    assert ok


def test_criterion_03_four_orbital():
    sets = [(1.0, 1.0, 1.0, 1.0), (0.5, 1.2, 2.0, 0.8), (2.5, 0.4, 1.1, 1.7),
            (0.3, 3.0, 0.9, 2.2), (1.6, 1.6, 0.5, 0.6)]
    t0 = time.perf_counter()
    worst = max(rel(amp.s4_via_simultaneous(*e).value, amp.s4_closed(*e)) for e in sets)
    wall = time.perf_counter() - t0
    unit = amp.s4_closed(1.0, 1.0, 1.0, 1.0)
    ok = worst <= TOL_S4 and wall < 300.0 and abs(unit - 248.0502134) < 5e-7
    record(3, ok, f"S4 max rel err {worst:.2e} (tol {TOL_S4:g}), {wall:.1f} s, S4(1,1,1,1) = {unit:.7f}")
    assert ok


def test_criterion_04_kernel_reconstruction():
    rng = np.random.default_rng(404)
    worst = 0.0
    for m in (2, 3):
        for _ in range(10):
            k = tr.ZetaKernel(m, tuple(rng.uniform(0.5, 3.0, m)), tuple(rng.uniform(0.3, 3.0, m)))
            worst = max(worst, rel(tr.reconstruct_nested(k).value, k.target()))
    worst_mc = 0.0
    for m in (4, 5):
        k = tr.ZetaKernel.uniform(m)
        worst_mc = max(worst_mc, rel(tr.reconstruct_mc(k, seed=4).value, k.target()))
    ok = worst <= TOL_RECON and worst_mc <= TOL_RECON_MC
    record(4, ok, f"M=2,3 max rel err {worst:.2e} (tol {TOL_RECON:g}); "
                  f"M=4,5 MC {worst_mc:.2e} (tol {TOL_RECON_MC:g})")
    assert ok


def test_criterion_05_identity_suite():
    reports = [ids.verify_record(r, seed=5, n_draws=50, tol=TOL_IDENT) for r in ids.REGISTRY.values()]
    sign = ids.sign_resolution()
    worst = max(r.max_rel_err for r in reports)
    ok = all(r.passed for r in reports) and sign["resolved_sign"] == 1
    names = ", ".join(r.name for r in reports)
    record(5, ok, f"{names}: max rel err {worst:.2e} over 50 draws each (tol {TOL_IDENT:g}); "
                  f"w=-1/2 sign {sign['resolved_sign']:+d}")
    assert ok


def test_criterion_06_fixed_pbm():
    profiles = [(lambda t: np.ones_like(t), 1.0, 1.0),
                (lambda t: np.exp(-t), 0.7, 1.9),
                (lambda t: t ** 2, 2.0, 0.5)]
    worst = max(ids.fixed_pbm(f, p, q).rel_err for f, p, q in profiles)
    ok = worst <= TOL_PBM
    record(6, ok, f"3 profiles, max rel err {worst:.2e} (tol {TOL_PBM:g})")
    assert ok


def test_criterion_07_determinant():
    rng = np.random.default_rng(707)
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(2, 7))
        k = tr.ZetaKernel(m, tuple(rng.uniform(0.5, 3.0, m)), tuple(rng.uniform(0.3, 3.0, m)))
        qf = tr.build_quadratic_form(k, tuple(np.exp(rng.uniform(-2, 2, m - 1))),
                                     float(np.exp(rng.uniform(-1, 1))))
        worst = max(worst, rel(qf.omega() / qf.lam, qf.c_prime_closed()))
    ok = worst <= TOL_DET
    record(7, ok, f"200 configurations M<=6, max rel err {worst:.2e} (tol {TOL_DET:g})")
    assert ok


def test_criterion_08_recursion():
    rng = np.random.default_rng(808)
    w_an = w_fd = 0.0
    for _ in range(100):
        k = tr.ZetaKernel(3, tuple(rng.uniform(0.5, 3.0, 3)), tuple(rng.uniform(0.3, 3.0, 3)))
        zs = tuple(np.exp(rng.uniform(-1.5, 1.5, 2)))
        ref = float(tr.m_kernel(k, zs))
        w_an = max(w_an, rel(tr.recursion_trio(k, zs), ref))
        w_fd = max(w_fd, rel(tr.recursion_trio_fd(k, zs), ref))
    ok = w_an <= TOL_REC and w_fd <= TOL_REC_FD
    record(8, ok, f"analytic {w_an:.2e} (tol {TOL_REC:g}), finite difference {w_fd:.2e} (tol {TOL_REC_FD:g})")
    assert ok


def test_criterion_09_special_functions():
    z = np.geomspace(1e-3, 500.0, 200)
    w_rec = 0.0
    for twice in range(2, 13):
        nu = twice / 2.0
        hi = sf.bessel_k_scaled(nu + 1, z)
        res = hi - sf.bessel_k_scaled(nu - 1, z) - (2 * nu / z) * sf.bessel_k_scaled(nu, z)
        w_rec = max(w_rec, float(np.max(np.abs(res) / hi)))
    y = np.geomspace(0.01, 300.0, 100)
    w_u = 0.0
    for nu in (0, 2):
        back = math.sqrt(math.pi) * (2 * y) ** nu * sf.tricomi_u_special(nu, 2 * y)
        ref = sf.bessel_k_scaled(nu, y)
        w_u = max(w_u, float(np.max(np.abs(back - ref) / ref)))
    zz = np.geomspace(0.01, 100.0, 100)
    w_g = 0.0
    for nu in (0.0, 0.5, 1.0):
        g = sf.meijer_g2002(zz, nu)
        w_g = max(w_g, float(np.max(np.abs(g - 2 * sf.bessel_k(2 * nu, 2 * np.sqrt(zz))) / g)))
    ok = max(w_rec, w_u, w_g) <= TOL_SPECFUN
    record(9, ok, f"K recurrence {w_rec:.2e}, U closure {w_u:.2e}, G reduction {w_g:.2e} "
                  f"(tol {TOL_SPECFUN:g})")
    assert ok


def _verify_all(capsys, seed):
    code = main(["verify", "--suite", "all", "--seed", str(seed), "--format", "json"])
    rep = json.loads(capsys.readouterr().out)
    rep.pop("wall_ms")
    return code, rep


def test_criterion_10_cli(capsys):
    code1, rep1 = _verify_all(capsys, 0)
    code2, rep2 = _verify_all(capsys, 0)
    failed = [c["name"] for c in rep1["checks"] if not c["passed"]]
    ok = code1 == 0 and code2 == 0 and rep1 == rep2
    record(10, ok, f"verify --suite all exit {code1}, {len(rep1['checks'])} checks, "
                   f"failed {failed or 'none'}, deterministic={rep1 == rep2}")
    assert ok
