"""Verification suites run by ``slaterint verify``.

Each suite returns a list of :class:`Check`.  A check compares a measured
error with a tolerance; boolean identities use measured 0 (holds) or 1
(fails) against tolerance 0.5.  Random draws come from generators seeded by
``(seed, crc32(check name))`` so every check is reproducible on its own.
"""
from __future__ import annotations

import itertools
import math
import warnings
import zlib
from dataclasses import dataclass

import numpy as np

from . import amplitudes as amp
from . import identities as ids
from . import specfun as sf
from . import transforms as tr
from .errors import BranchWarning

SUITES = ("specfun", "kernels", "amplitudes", "identities")


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tol: float
    n: int = 1
    boolean: bool = False

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.measured) and self.measured <= self.tol)

    def as_dict(self) -> dict:
        return {"name": self.name, "measured": self.measured, "tol": self.tol,
                "n": self.n, "passed": self.passed}


def _rng(seed, name):
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _rel(a, b):
    return abs(a - b) / abs(b)


def _bool_check(name, ok):
    return Check(name, 0.0 if ok else 1.0, 0.5, boolean=True)


# frozen high-precision values (50-digit evaluation, rounded)
BESSEL_REFERENCE = {
    (0, 1.0): 0.421024438240708333,
    (1, 1.0): 0.601907230197234575,
    (2, 1.0): 1.62483889863517748,
}
BESSEL_SCALED_REFERENCE = {(0, 700.0): 0.0473623694546135721}
TRICOMI_REFERENCE = {(0, 2.0): 0.645694148382034666, (2, 2.0): 0.622973914113047295}
MEIJER_REFERENCE = {(1.0, 0.0): 0.227787745499066871, (0.25, 0.0): 0.842048876481416667,
                    (1.0, 0.5): 0.279731763633044855}


# ---------------------------------------------------------------------------


def suite_specfun(seed=0, **_) -> list:
    out = []
    worst = max(_rel(sf.bessel_k(nu, z), v) for (nu, z), v in BESSEL_REFERENCE.items())
    worst = max(worst, *(_rel(sf.bessel_k_scaled(nu, z), v) for (nu, z), v in BESSEL_SCALED_REFERENCE.items()))
    out.append(Check("specfun.bessel_reference", worst, 1e-13, 4))

    z = np.geomspace(1e-3, 500.0, 200)
    worst = 0.0
    for twice in range(2, 13):
        nu = twice / 2.0
        hi = sf.bessel_k_scaled(nu + 1, z)
        res = hi - sf.bessel_k_scaled(nu - 1, z) - (2 * nu / z) * sf.bessel_k_scaled(nu, z)
        worst = max(worst, float(np.max(np.abs(res) / hi)))
    out.append(Check("specfun.recurrence_residual", worst, 1e-10, 11 * z.size))

    # K_nu(y) = sqrt(pi) (2y)^nu e^-y U(nu + 1/2, 2nu + 1, 2y)
    y = np.geomspace(0.01, 300.0, 100)
    worst = 0.0
    for nu in (0, 2):
        u = sf.tricomi_u_special(nu, 2 * y)
        back = math.sqrt(math.pi) * (2 * y) ** nu * u
        worst = max(worst, float(np.max(np.abs(back - sf.bessel_k_scaled(nu, y)) / sf.bessel_k_scaled(nu, y))))
    worst = max(worst, *(_rel(sf.tricomi_u_special(nu, x), v) for (nu, x), v in TRICOMI_REFERENCE.items()))
    out.append(Check("specfun.tricomi_closure", worst, 1e-10, 2 * y.size + 2))

    zz = np.geomspace(0.01, 100.0, 100)
    worst = 0.0
    for nu in (0.0, 0.5, 1.0):
        g = sf.meijer_g2002(zz, nu)
        worst = max(worst, float(np.max(np.abs(g - 2 * sf.bessel_k(2 * nu, 2 * np.sqrt(zz))) / g)))
    worst = max(worst, *(_rel(sf.meijer_g2002(x, nu), v) for (x, nu), v in MEIJER_REFERENCE.items()))
    out.append(Check("specfun.meijer_reduction", worst, 1e-10, 303))

    x = np.linspace(-3, 3, 61)
    h5 = 32 * x ** 5 - 160 * x ** 3 + 120 * x
    out.append(Check("specfun.hermite_h5", float(np.max(np.abs(sf.hermite(5, x) - h5))), 1e-9, x.size))

    from .quadrature import QuadraturePlan, integrate_1d
    rng = _rng(seed, "specfun.gamma_exp_integral")
    worst = 0.0
    for _ in range(10):
        nu = rng.choice([-1.5, -0.5, 0.0, 0.5, 1.0, 2.5])
        b, g = np.exp(rng.uniform(-1.5, 1.5, 2))
        peak = math.sqrt(b / g)
        q = integrate_1d(lambda t: t ** (nu - 1) * np.exp(-b / t - g * t),
                         QuadraturePlan(rel_tol=1e-12, scale=peak, points=(peak,)))
        worst = max(worst, _rel(q.value, sf.gamma_exp_integral(nu, b, g)))
    out.append(Check("specfun.gamma_exp_integral", worst, 1e-9, 10))
    return out


# ---------------------------------------------------------------------------


def _random_kernel(rng, m):
    return tr.ZetaKernel(m, tuple(rng.uniform(0.5, 3.0, m)), tuple(rng.uniform(0.3, 3.0, m)))


def suite_kernels(seed=0, m=None, n_draws=50, mc_n=4_000_000, **_) -> list:
    out = []
    ms = (2, 3, 4, 5) if m is None else (int(m),)
    for mm in ms:
        name = f"kernels.reconstruct_m{mm}"
        rng = _rng(seed, name)
        if mm <= 3:
            worst = 0.0
            for i in range(n_draws):
                k = _random_kernel(rng, mm)
                worst = max(worst, _rel(tr.reconstruct_nested(k).value, k.target()))
            out.append(Check(name, worst, 1e-6, n_draws))
            worst = 0.0
            for i in range(10):
                k = _random_kernel(rng, mm)
                worst = max(worst, _rel(tr.reconstruct_nested(k, "inverse").value, k.target()))
            out.append(Check(name + "_inverse", worst, 1e-6, 10))
        else:
            k = tr.ZetaKernel.uniform(mm)
            res = tr.reconstruct_mc(k, seed=seed, n=mc_n)
            out.append(Check(name + "_mc", _rel(res.value, k.target()), 1e-3, mc_n))
    if m is not None:
        return out

    rng = _rng(seed, "kernels.determinant")
    worst = 0.0
    for _ in range(200):
        mm = int(rng.integers(2, 7))
        k = _random_kernel(rng, mm)
        qf = tr.build_quadratic_form(k, tuple(np.exp(rng.uniform(-2, 2, mm - 1))), float(np.exp(rng.uniform(-1, 1))))
        worst = max(worst, _rel(qf.omega() / qf.lam, qf.c_prime_closed()))
    out.append(Check("kernels.determinant_c_prime", worst, 1e-12, 200))

    rng = _rng(seed, "kernels.recursion")
    w_an = w_fd = 0.0
    for _ in range(100):
        k = _random_kernel(rng, 3)
        zs = tuple(np.exp(rng.uniform(-1.5, 1.5, 2)))
        ref = float(tr.m_kernel(k, zs))
        w_an = max(w_an, _rel(tr.recursion_trio(k, zs), ref))
        w_fd = max(w_fd, _rel(tr.recursion_trio_fd(k, zs), ref))
    out.append(Check("kernels.recursion_analytic", w_an, 1e-10, 100))
    out.append(Check("kernels.recursion_fd", w_fd, 1e-6, 100))

    rng = _rng(seed, "kernels.forms")
    w_rho = w_inv = 0.0
    for _ in range(10):
        k = _random_kernel(rng, 3)
        zs = tuple(np.exp(rng.uniform(-1, 1, 2)))
        w_rho = max(w_rho, tr.reconstruct_rho(k, zs).rel_err)
        # inverse(xi) = compact(1/xi) prod xi^-2
        w_inv = max(w_inv, _rel(float(tr.m_kernel_inverse(k, tuple(1 / z for z in zs))),
                                float(tr.m_kernel(k, zs)) * math.prod(z ** 2 for z in zs)))
    out.append(Check("kernels.rho_form", w_rho, 1e-8, 10))
    out.append(Check("kernels.inverse_form", w_inv, 1e-12, 10))

    k = tr.ZetaKernel.uniform(2)
    z1 = np.geomspace(0.05, 20, 9)
    w = max(_rel(float(tr.pair_kernel(k, z)), float(tr.m_kernel(k, (z,)))) for z in z1)
    out.append(Check("kernels.pair_equals_compact", w, 1e-12, z1.size))

    factor = tr.SlaterFactor(1.3, 0.8)
    out.append(Check("kernels.gaussian_transform",
                     _rel(tr.gaussian_reconstruct(factor).value, factor.value()), 1e-8))
    pd = [tr.power_denominator_reconstruct(0.7, 1.9, p1, s) for p1, s in ((0.5, 1.0), (1.0, 2.0), (0.5, 2.5))]
    out.append(Check("kernels.power_denominator", max(c.rel_err for c in pd), 1e-8, len(pd)))
    cp = [tr.cosine_pair_reconstruct(x, eta) for x, eta in ((0.5, 1.0), (2.0, 0.7))]
    out.append(Check("kernels.cosine_pair", max(c.rel_err for c in cp), 1e-8, len(cp)))
    j0 = [tr.j0_transform_identity(r, lam) for r, lam in ((1.0, 1.0), (0.6, 2.2))]
    out.append(Check("kernels.j0_transform", max(c.rel_err for c in j0), 1e-8, len(j0)))
    return out


# ---------------------------------------------------------------------------


S2_ROUTE_TOL = 1e-8
S3_ROUTE_TOL = 1e-6
S4_ROUTE_TOL = 1e-4


def suite_amplitudes(seed=0, n_draws=25, mc_n=4_000_000, **_) -> list:
    out = []
    rng = _rng(seed, "amplitudes.route_agreement")
    table = {("S2", "gaussian"): S2_ROUTE_TOL, ("S2", "new-sequential"): S2_ROUTE_TOL,
             ("S3", "new-sequential"): S3_ROUTE_TOL, ("S3", "new-simultaneous"): S3_ROUTE_TOL,
             ("S3", "zeta-last"): S3_ROUTE_TOL, ("S3", "rho-form"): S3_ROUTE_TOL,
             ("S4", "new-sequential"): S4_ROUTE_TOL, ("S4", "new-simultaneous"): S4_ROUTE_TOL}
    worst = {key: 0.0 for key in table}
    w1d = 0.0
    for _ in range(n_draws):
        e = rng.uniform(0.3, 3.0, 4)
        x2 = float(rng.uniform(0.3, 3.0))
        specs = {"S2": amp.AmplitudeSpec("S2", e[:2], x2), "S3": amp.AmplitudeSpec("S3", e[:3]),
                 "S4": amp.AmplitudeSpec("S4", e)}
        for (kind, route) in table:
            s = specs[kind]
            worst[kind, route] = max(worst[kind, route],
                                     _rel(amp.evaluate(s, route).value, amp.closed_value(s)))
        w1d = max(w1d, _rel(amp.s3_simultaneous_1d(*e[:3]).value, amp.s3_closed(*e[:3])))
    for (kind, route), tol in table.items():
        out.append(Check(f"amplitudes.{kind}.{route}", worst[kind, route], tol, n_draws))
    out.append(Check("amplitudes.S3.new-simultaneous-1d", w1d, S3_ROUTE_TOL, n_draws))

    cl = amp.AmplitudeSpec("S2-coulomb-limit", (1.3,), 0.9)
    worst_c = max(_rel(amp.evaluate(cl, r).value, amp.closed_value(cl)) for r in ("gaussian", "new-sequential"))
    out.append(Check("amplitudes.S2-coulomb-limit.routes", worst_c, S2_ROUTE_TOL, 2))

    seam = max(_rel(amp.s2_closed(eta, eta + d, x), 2 * math.pi * math.exp(-eta * x) / eta)
               for eta, x in ((1.0, 1.0), (0.4, 2.5), (3.0, 0.3)) for d in (1e-7, -1e-7))
    out.append(Check("amplitudes.s2_seam_continuity", seam, 1e-5, 6))

    rng = _rng(seed, "amplitudes.closed_form_laws")
    w_sym = w_scale = 0.0
    mono = True
    for _ in range(20):
        e = rng.uniform(0.3, 3.0, 4)
        lam = float(rng.uniform(0.5, 2.0))
        x = float(rng.uniform(0.3, 3.0))
        base3 = amp.s3_closed(*e[:3])
        for p in itertools.permutations(e[:3]):
            w_sym = max(w_sym, _rel(amp.s3_closed(*p), base3))
        w_sym = max(w_sym, _rel(amp.s2_closed(e[1], e[0], x), amp.s2_closed(e[0], e[1], x)))
        w_scale = max(w_scale,
                      # S2 has the dimension of a length, so it scales as 1/lambda
                      _rel(amp.s2_closed(lam * e[0], lam * e[1], x / lam), amp.s2_closed(e[0], e[1], x) / lam),
                      _rel(amp.s3_closed(*(lam * e[:3])), lam ** -3 * base3),
                      _rel(amp.s4_closed(*(lam * e)), lam ** -5 * amp.s4_closed(*e)))
        xs = np.linspace(0.1, 10, 50)
        vals = [amp.s2_closed(e[0], e[1], xi) for xi in xs]
        mono &= all(v > 0 for v in vals) and all(a > b for a, b in zip(vals, vals[1:]))
    out.append(Check("amplitudes.closed_symmetry", w_sym, 1e-13, 20))
    out.append(Check("amplitudes.closed_scaling", w_scale, 1e-12, 20))
    out.append(_bool_check("amplitudes.s2_positive_decreasing", mono))

    out.append(Check("amplitudes.S3.rho_intermediate",
                     amp.s3_rho_intermediate((1.0, 1.0, 1.0), 1.0, 1.0).rel_err, 1e-8))
    stages = amp.s4_stage_checks((1.0, 2.0, 3.0, 2.0))
    out.append(Check("amplitudes.S4.stages", max(c.rel_err for c in stages), 1e-7, len(stages)))

    w = 0.0
    for e, x in (((1.0, 2.0), 1.0), ((2.5, 0.4), 0.7), ((1.0, 0.0), 1.0)):
        s = amp.AmplitudeSpec("S2", e, x)
        w = max(w, _rel(amp.direct_oracle(s).value, amp.closed_value(s)))
    out.append(Check("amplitudes.oracle.S2_direct", w, 1e-8, 3))
    w = 0.0
    for kind, e in (("S3", (1.0, 2.0, 3.0)), ("S4", (0.7, 1.1, 2.0, 1.5))):
        s = amp.AmplitudeSpec(kind, e)
        w = max(w, _rel(amp.direct_oracle(s, "semi-direct").value, amp.closed_value(s)))
    out.append(Check("amplitudes.oracle.semi_direct", w, 1e-8, 2))
    for kind, e in (("S3", (1.0, 1.0, 1.0)), ("S4", (1.0, 1.0, 1.0, 1.0))):
        s = amp.AmplitudeSpec(kind, e)
        res = amp.direct_oracle(s, "direct", seed=seed, n=mc_n)
        out.append(Check(f"amplitudes.oracle.{kind}_monte_carlo", _rel(res.value, amp.closed_value(s)), 1e-3, mc_n))
    return out


# ---------------------------------------------------------------------------


def _in_branch(a, g, b, h, c, f):
    return a * f - c * g >= 0 and b * f - c * h >= 0


def suite_identities(seed=0, n_draws=50, **_) -> list:
    out = []
    for name, rec in sorted(ids.REGISTRY.items()):
        rep = ids.verify_record(rec, seed=seed, n_draws=n_draws)
        out.append(Check(f"identities.{name}", rep.max_rel_err, rec.tol, n_draws))

    profiles = {"exp": lambda t: np.exp(-t), "one": lambda t: np.ones_like(t),
                "t_exp": lambda t: t * np.exp(-t)}
    for (label, f), (p, q) in zip(profiles.items(), ((1.0, 1.0), (1.0, 1.0), (4.0, 1.0))):
        out.append(Check(f"identities.fixed_pbm.{label}", ids.fixed_pbm(f, p, q).rel_err, 1e-6))

    rng = _rng(seed, "identities.sqrt_ratio")
    worst = 0.0
    got = resampled = 0
    while got < 20:
        a, g, b, h, f = np.exp(rng.uniform(-1, 1, 5))
        c = float(rng.uniform(-0.5, 2.0))
        x = float(np.exp(rng.uniform(-1, 1)))
        if not _in_branch(a, g, b, h, c, f) or abs(c + f * x) < 0.1:
            resampled += 1
            continue
        worst = max(worst, ids.antiderivative_check(a, g, b, h, c, f, x).rel_err)
        got += 1
    out.append(Check("identities.sqrt_ratio_derivative", worst, 1e-6, 20 + resampled))
    from .quadrature import QuadraturePlan, integrate_1d
    par = (1.0, 1.0, 2.0, 1.0, 3.0, 1.0)
    q = integrate_1d(lambda x: ids.sqrt_ratio_integrand(*par, x),
                     QuadraturePlan(lower=1.0, upper=2.0, rel_tol=1e-13))
    out.append(Check("identities.sqrt_ratio_definite",
                     _rel(ids.sqrt_ratio_definite(*par, 1.0, 2.0), q.value), 1e-9))

    rng = _rng(seed, "identities.representations")
    worst = 0.0
    for _ in range(10):
        a, b, c = np.exp(rng.uniform(math.log(0.1), math.log(10), 3))
        xs = math.sqrt(c / a) * np.geomspace(0.2, 5, 5)
        k = ids.k0_integrand(xs, a, b, c)
        worst = max(worst, float(np.max(np.abs(ids.k0_integrand_u(xs, a, b, c) - k) / k)),
                    float(np.max(np.abs(ids.k0_integrand_g(xs, a, b, c) - k) / k)))
        for w in ids.WEIGHTS:
            _, reps = ids.k2_weighted_integrals(w, a, b, c) if _ == 0 else (None, [])
            kk = ids.k2_integrand(w, xs, a, b, c)
            worst = max(worst, float(np.max(np.abs(ids.k2_integrand_u(w, xs, a, b, c) - kk) / kk)),
                        float(np.max(np.abs(ids.k2_integrand_g(w, xs, a, b, c) - kk) / kk)),
                        *(r.rel_err for r in reps))
    out.append(Check("identities.integrand_representations", worst, 1e-10, 10))

    ok = (ids.substitution_rule_check("eq40", zeta1=1.0, eta1=1.0, eta12=1.0, eta2=1.0, x2=2.0)
          and ids.substitution_rule_check("eq45", q_form=1.0, p_form=1.0, eta3=1.0, x3=1.0)
          and not ids.substitution_rule_check("eq40", b_scale=1.1, zeta1=1.0, eta1=1.0, eta12=1.0, eta2=1.0, x2=2.0))
    rng = _rng(seed, "identities.substitution")
    for _ in range(20):
        z, e1, e12, e2, x = np.exp(rng.uniform(-1, 1, 5))
        qq, pp, e3, x3 = np.exp(rng.uniform(-1, 1, 4))
        ok &= ids.substitution_rule_check("eq40", zeta1=z, eta1=e1, eta12=e12, eta2=e2, x2=x)
        ok &= ids.substitution_rule_check("eq45", q_form=qq, p_form=pp, eta3=e3, x3=x3)
    out.append(_bool_check("identities.substitution_rule", ok))

    # (a/k, b, c k): x -> k y gives k^(-1/2) for K_0 and k^w for the K_2 family
    rng = _rng(seed, "identities.metamorphic")
    worst = 0.0
    for _ in range(5):
        a, b, c = np.exp(rng.uniform(math.log(0.3), math.log(3), 3))
        kap = float(np.exp(rng.uniform(-1, 1)))
        worst = max(worst, _rel(ids.k0_quadrature(a / kap, b, c * kap).value,
                                kap ** -0.5 * ids.k0_quadrature(a, b, c).value))
        for w in ids.WEIGHTS:
            worst = max(worst, _rel(ids.k2_quadrature(w, a / kap, b, c * kap).value,
                                    kap ** w * ids.k2_quadrature(w, a, b, c).value))
    out.append(Check("identities.metamorphic_scaling", worst, 1e-8, 5))

    boundary = ids.k0_quadrature(4.0, 1e-6, 1.0).value
    out.append(Check("identities.k0_boundary_b0", _rel(boundary, math.pi * math.exp(-4.0) / 2), 1e-6))

    sign = ids.sign_resolution()
    out.append(_bool_check("identities.k2_w-0.5_sign_positive", sign["resolved_sign"] == 1))
    return out


def run_suites(suite="all", seed=0, tol=None, m=None) -> list:
    names = SUITES if suite == "all" else (suite,)
    fns = {"specfun": suite_specfun, "kernels": suite_kernels,
           "amplitudes": suite_amplitudes, "identities": suite_identities}
    checks = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        for n in names:
            checks.extend(fns[n](seed=seed, m=m))
    if tol is not None:
        checks = [c if c.boolean else Check(c.name, c.measured, tol, c.n) for c in checks]
    return sorted(checks, key=lambda c: c.name)
