"""Transition amplitudes built from two, three and four Slater factors.

Kinds
-----
S2
    int d^3x1 e^(-eta1 x1)/x1 * e^(-eta12 |x1 - x2|)/|x1 - x2|, a function
    of the external distance x2.
S2-coulomb-limit
    S2 with eta12 = 0.
S3
    int d^3x1 d^3x2 e^(-eta1 x1)/x1 e^(-eta12 x12)/x12 e^(-eta2 x2)/x2.
S4
    S3 times an independent fourth factor e^(-eta3 x3)/x3 integrated over x3.

Each kind has a closed form and several numeric routes through the zeta
transform.  Every numeric route returns an :class:`EvalResult`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import identities as ids
from .errors import BranchWarning, ConsistencyError, DivergentParameterError, DomainError
from .quadrature import EvalResult, QuadraturePlan, integrate_1d, integrate_nd
from .specfun import bessel_k_scaled, gamma_exp_integral
from .transforms import CheckedPair

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
# below this relative gap between eta1 and eta12 the S2 closed form uses a series
SEAM_REL = 1e-6
# relative gap below which the antiderivative route is degenerate
ANTIDERIV_DEGENERATE = 1e-3
# tanh-sinh copes with the corner singularities that appear when an eta is zero
S3_METHOD = "double-exponential"

KINDS = ("S2", "S2-coulomb-limit", "S3", "S4")
ROUTES = ("closed-form", "gaussian", "new-sequential", "new-simultaneous",
          "zeta-last", "rho-form")
ROUTE_ALIASES = {"closed": "closed-form", "new-transform": "new-sequential",
                 "simultaneous": "new-simultaneous", "k0": "zeta-last", "rho": "rho-form"}
ROUTE_MATRIX = {
    "S2": ("closed-form", "gaussian", "new-sequential"),
    "S2-coulomb-limit": ("closed-form", "gaussian", "new-sequential"),
    "S3": ("closed-form", "new-sequential", "new-simultaneous", "zeta-last", "rho-form"),
    "S4": ("closed-form", "new-sequential", "new-simultaneous"),
}


def _closed_result(value) -> EvalResult:
    return EvalResult(float(value), 0.0, 1, True)


# ---------------------------------------------------------------------------
# parameter handling


def _check_s2(eta1, eta12, x2):
    if eta1 < 0 or eta12 < 0:
        raise DomainError("decay constants must be non-negative")
    if eta1 == 0 and eta12 == 0:
        raise DivergentParameterError("divergent parameter set: eta1 = eta12 = 0")
    if not x2 > 0:
        raise DomainError("x2 must be positive")


def _check_s3(eta1, eta12, eta2):
    if min(eta1, eta12, eta2) < 0:
        raise DomainError("decay constants must be non-negative")
    if min(eta1 + eta2, eta1 + eta12, eta2 + eta12) <= 0:
        raise DivergentParameterError("divergent parameter set: a pairwise sum of etas is zero")


def _check_s4(eta1, eta12, eta2, eta3):
    _check_s3(eta1, eta12, eta2)
    if not eta3 > 0:
        raise DivergentParameterError("divergent parameter set: eta3 must be positive")


@dataclass(frozen=True)
class AmplitudeSpec:
    kind: str
    etas: tuple
    x2: float | None = None

    def __post_init__(self):
        kind = {k.lower(): k for k in KINDS}.get(str(self.kind).lower())
        if kind is None:
            raise DomainError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        etas = tuple(float(e) for e in self.etas)
        want = {"S2": 2, "S2-coulomb-limit": 1, "S3": 3, "S4": 4}[kind]
        if kind == "S2-coulomb-limit" and len(etas) == 2:
            if etas[1] != 0:
                raise DomainError("S2-coulomb-limit needs eta12 = 0")
            etas = etas[:1]
        if len(etas) != want:
            raise DomainError(f"{kind} takes {want} decay constant(s), got {len(etas)}")
        object.__setattr__(self, "etas", etas)
        if kind.startswith("S2"):
            if self.x2 is None:
                raise DomainError(f"{kind} needs x2")
            object.__setattr__(self, "x2", float(self.x2))
            _check_s2(*self.s2_args()[:2], self.x2)
        elif kind == "S3":
            _check_s3(*etas)
        else:
            _check_s4(*etas)

    def s2_args(self):
        e = self.etas
        return (e[0], 0.0, self.x2) if self.kind == "S2-coulomb-limit" else (e[0], e[1], self.x2)


@dataclass(frozen=True)
class PipelineRoute:
    route: str

    def __post_init__(self):
        r = ROUTE_ALIASES.get(self.route, self.route)
        if r not in ROUTES:
            raise DomainError(f"unknown route {self.route!r}")
        object.__setattr__(self, "route", r)

    def valid_for(self, kind: str) -> bool:
        return self.route in ROUTE_MATRIX[kind]


# ---------------------------------------------------------------------------
# two factors


def _exprel(d):
    """(e^d - 1)/d, with the series near zero."""
    if abs(d) < SEAM_REL:
        return 1.0 + d / 2.0 + d * d / 6.0
    return math.expm1(d) / d


def s2_closed(eta1, eta12, x2):
    """4 pi (e^(-eta12 x2) - e^(-eta1 x2)) / (x2 (eta1^2 - eta12^2)).

    Written as 4 pi e^(-eta1 x2) exprel((eta1 - eta12) x2) / (eta1 + eta12),
    which is free of cancellation and reduces to 2 pi e^(-eta x2)/eta on the
    seam eta1 = eta12.
    """
    _check_s2(eta1, eta12, x2)
    d = (eta1 - eta12) * x2
    if d > 30.0:
        # exprel overflows in step with e^(-eta1 x2) underflowing; work in logs
        log_val = math.log(FOUR_PI) - eta12 * x2 + math.log(-math.expm1(-d) / d) - math.log(eta1 + eta12)
        return math.exp(log_val)
    return FOUR_PI * math.exp(-eta1 * x2) * _exprel(d) / (eta1 + eta12)


def s2_gaussian_integrand(tau, eta1, eta12, x2):
    s = np.sqrt((1.0 - tau) * eta1 ** 2 + tau * eta12 ** 2)
    return TWO_PI * np.exp(-x2 * s) / s


def s2_via_gaussian(eta1, eta12, x2, rel_tol=1e-12) -> EvalResult:
    """The tau integral left by the Gaussian transform, done numerically.

    When one eta vanishes the integrand has a 1/sqrt endpoint singularity at
    the corresponding end; tau = sigma^2 (or 1 - sigma^2) is substituted
    towards the smaller eta so the integrand stays bounded.
    """
    _check_s2(eta1, eta12, x2)
    plan = QuadraturePlan(lower=0.0, upper=1.0, rel_tol=rel_tol)
    if eta12 < eta1:
        def g(sig):
            return 2.0 * sig * s2_gaussian_integrand(1.0 - sig * sig, eta1, eta12, x2)
    else:
        def g(sig):
            return 2.0 * sig * s2_gaussian_integrand(sig * sig, eta1, eta12, x2)
    return integrate_1d(g, plan)


def s2_new_integrand(zeta, eta1, eta12, x2):
    """The zeta integrand of the two-factor kernel after the x1 integral."""
    p = zeta * eta12 ** 2 + eta1 ** 2
    u = zeta + 1.0
    return TWO_PI * np.exp(-x2 * np.sqrt(p / u)) / (u ** 1.5 * np.sqrt(p))


def _zeta_scale(eta1, eta12):
    # the integrand turns over where zeta eta12^2 ~ eta1^2
    if eta12 == 0 or eta1 == 0:
        return 1.0
    return float(np.clip((eta1 / eta12) ** 2, 1e-3, 1e3))


def s2_via_new_transform(eta1, eta12, x2, rel_tol=1e-12) -> EvalResult:
    _check_s2(eta1, eta12, x2)
    sc = _zeta_scale(eta1, eta12)
    plan = QuadraturePlan(rel_tol=rel_tol, scale=sc, points=(sc,))
    return integrate_1d(lambda z: s2_new_integrand(z, eta1, eta12, x2), plan)


# ---------------------------------------------------------------------------
# three factors


def s3_closed(eta1, eta12, eta2):
    _check_s3(eta1, eta12, eta2)
    return 16.0 * math.pi ** 2 / ((eta1 + eta2) * (eta1 + eta12) * (eta2 + eta12))


def s3_2d_integrand(zeta1, zeta2, eta1, eta12, eta2):
    p = eta1 ** 2 + zeta1 * eta12 ** 2 + zeta2 * eta2 ** 2
    return 4.0 * math.pi ** 2 / ((zeta1 + zeta2 + 1.0) * p) ** 1.5


def _s3_2d(eta1, eta12, eta2, rel_tol, prefactor=1.0) -> EvalResult:
    s1 = _zeta_scale(eta1, eta12)
    s2 = _zeta_scale(eta1, eta2)
    outer = QuadraturePlan(rel_tol=rel_tol, scale=s1, method=S3_METHOD)
    inner = QuadraturePlan(rel_tol=rel_tol, scale=s2, method=S3_METHOD)
    res = integrate_nd(lambda z1, z2: prefactor * s3_2d_integrand(z1, z2, eta1, eta12, eta2),
                       [outer, inner])
    return res


def s3_1d_integrand(zeta1, eta1, eta12, eta2):
    """The 2-D integrand with zeta2 integrated in closed form."""
    u = zeta1 + 1.0
    p0 = zeta1 * eta12 ** 2 + eta1 ** 2
    return 8.0 * math.pi ** 2 / (np.sqrt(u * p0) * (eta2 * np.sqrt(u) + np.sqrt(p0)) ** 2)


def s3_three_term_integrand(zeta1, eta1, eta12, eta2):
    """The rationalised form of :func:`s3_1d_integrand`: three terms over (c + f zeta)^2."""
    c = eta2 ** 2 - eta1 ** 2
    f = eta2 ** 2 - eta12 ** 2
    t1 = 8 * math.pi ** 2 * eta2 ** 2 * ids.sqrt_ratio_integrand(1.0, 1.0, eta1 ** 2, eta12 ** 2, c, f, zeta1)
    t2 = -16 * math.pi ** 2 * eta2 / (c + f * np.asarray(zeta1)) ** 2
    t3 = 8 * math.pi ** 2 * ids.sqrt_ratio_integrand(eta1 ** 2, eta12 ** 2, 1.0, 1.0, c, f, zeta1)
    return t1 + t2 + t3


def _three_term_antiderivative(eta1, eta12, eta2, x):
    c = eta2 ** 2 - eta1 ** 2
    f = eta2 ** 2 - eta12 ** 2
    k = 8 * math.pi ** 2
    if math.isinf(x):
        t1 = ids.sqrt_ratio_limit(1.0, 1.0, eta1 ** 2, eta12 ** 2, c, f)
        t3 = ids.sqrt_ratio_limit(eta1 ** 2, eta12 ** 2, 1.0, 1.0, c, f)
        t2 = 0.0
    else:
        t1 = ids.sqrt_ratio_antiderivative(1.0, 1.0, eta1 ** 2, eta12 ** 2, c, f, x)
        t3 = ids.sqrt_ratio_antiderivative(eta1 ** 2, eta12 ** 2, 1.0, 1.0, c, f, x)
        t2 = 1.0 / (f * (c + f * x))
    return k * eta2 ** 2 * t1 + 2 * k * eta2 * t2 + k * t3


def s3_simultaneous_1d(eta1, eta12, eta2, rel_tol=1e-12) -> EvalResult:
    """Semi-analytic value from the antiderivative of the three-term form.

    The 2-D integral is symmetric under eta1 <-> eta12, which is used to put
    the antiderivative on its real branch (eta1 > eta12).  Near the seams
    eta1 = eta12, eta2 = eta1, eta2 = eta12, or when an eta vanishes, the
    antiderivative loses precision and the closed zeta2 form is integrated
    numerically instead; ``n_evals`` > 1 signals that fallback.
    """
    _check_s3(eta1, eta12, eta2)
    if eta12 > eta1:
        eta1, eta12 = eta12, eta1
    scale = max(eta1, eta12, eta2)
    gaps = (eta1 - eta12, abs(eta2 - eta1), abs(eta2 - eta12), eta12, eta2)
    if min(gaps) < ANTIDERIV_DEGENERATE * scale:
        sc = _zeta_scale(eta1, eta12)
        return integrate_1d(lambda z: s3_1d_integrand(z, eta1, eta12, eta2),
                            QuadraturePlan(rel_tol=rel_tol, scale=sc, points=(sc,)))
    with warnings.catch_warnings():
        warnings.simplefilter("error", BranchWarning)
        val = (_three_term_antiderivative(eta1, eta12, eta2, math.inf)
               - _three_term_antiderivative(eta1, eta12, eta2, 0.0))
    return EvalResult(float(val), abs(val) * 1e-13, 1, True)


def s3_via_simultaneous(eta1, eta12, eta2, rel_tol=1e-10, reduction="2d") -> EvalResult:
    """All three factors transformed at once, leaving (zeta1, zeta2).

    ``reduction="2d"`` integrates both parameters numerically;
    ``reduction="1d"`` uses :func:`s3_simultaneous_1d`.
    """
    _check_s3(eta1, eta12, eta2)
    if reduction == "1d":
        return s3_simultaneous_1d(eta1, eta12, eta2)
    if reduction != "2d":
        raise DomainError("reduction must be '2d' or '1d'")
    return _s3_2d(eta1, eta12, eta2, rel_tol)


def _x2_plan(eta1, eta12, eta2, rel_tol):
    rate = eta2 + 0.5 * (eta1 + eta12)
    return QuadraturePlan(rel_tol=rel_tol, scale=1.0 / rate, method=S3_METHOD)


def _outer_zeta1_inner_x2(g, eta1, eta12, eta2, rel_tol) -> EvalResult:
    sc = _zeta_scale(eta1, eta12)
    outer = QuadraturePlan(rel_tol=rel_tol, scale=sc, method=S3_METHOD)
    return integrate_nd(g, [outer, _x2_plan(eta1, eta12, eta2, rel_tol)])


def s3_via_sequential(eta1, eta12, eta2, rel_tol=1e-10) -> EvalResult:
    """Two-factor kernel on the x1 integral, then x2 against the third factor."""
    _check_s3(eta1, eta12, eta2)

    def g(z1, x2):
        return FOUR_PI * x2 * np.exp(-eta2 * x2) * s2_new_integrand(z1, eta1, eta12, x2)

    return _outer_zeta1_inner_x2(g, eta1, eta12, eta2, rel_tol)


def s3_k0_integrand(zeta1, x2, eta1, eta12, eta2, check=True):
    """x2 integrand after the zeta2 integral of the K_0 radial form.

    zeta2 is integrated with the closed K_0 identity, whose parameters
    satisfy the perfect-square rule; ``check`` enforces it.
    """
    a, b, c, xe = ids.eq40_params(zeta1, eta1, eta12, eta2, x2)
    s = np.sqrt(2.0 * np.sqrt(a * c) + b)
    if check:
        rule = 2.0 * np.sqrt(a * c) / xe + 0.5 * xe
        if np.any(np.abs(s - rule) > 1e-12 * np.abs(rule)):
            raise ConsistencyError("substitution rule violated outside its parameter family")
    u = zeta1 + 1.0
    return 8.0 * math.pi * x2 ** 2 / u ** 1.5 * math.pi * np.exp(-2.0 * s) / (2.0 * np.sqrt(c))


def s3_k0_route(eta1, eta12, eta2, rel_tol=1e-10) -> EvalResult:
    """zeta2 before x2 on the K_0 form; x2 and zeta1 numerically.

    Needs eta2 > 0 for the parameter family; the amplitude is symmetric, so a
    vanishing eta2 is exchanged with eta1.
    """
    _check_s3(eta1, eta12, eta2)
    if eta2 == 0:
        eta1, eta2 = eta2, eta1
    return _outer_zeta1_inner_x2(lambda z1, x2: s3_k0_integrand(z1, x2, eta1, eta12, eta2),
                                 eta1, eta12, eta2, rel_tol)


def s3_rho_integrand(zeta1, x2, eta1, eta12, eta2):
    """x2 integrand after closing the x1', zeta2 and rho integrals of the rho form."""
    u = zeta1 + 1.0
    p0 = zeta1 * eta12 ** 2 + eta1 ** 2
    # x1' Gaussian and zeta2 leave 2 sqrt(pi) rho^(-1/2) e^(-x2 eta2) / (x2 u^(3/2))
    beta = x2 ** 2 / (4.0 * u)
    rho_part = gamma_exp_integral(0.5, beta, p0)
    return FOUR_PI * x2 ** 2 * 2.0 * math.sqrt(math.pi) * rho_part * np.exp(-eta2 * x2) / (x2 * u ** 1.5)


def s3_zeta2_first(eta1, eta12, eta2, rel_tol=1e-10) -> EvalResult:
    _check_s3(eta1, eta12, eta2)
    if eta1 == 0:
        # the rho integral needs p0 > 0 at zeta1 = 0; relabel by symmetry
        eta1, eta12 = eta12, eta1
    return _outer_zeta1_inner_x2(lambda z1, x2: s3_rho_integrand(z1, x2, eta1, eta12, eta2),
                                 eta1, eta12, eta2, rel_tol)


def s3_rho_form_integrand(zeta2, rho, zeta1, x2, eta1, eta12, eta2):
    """rho-form integrand with only x1' done, as a function of (zeta2, rho)."""
    u = zeta1 + 1.0
    p0 = zeta1 * eta12 ** 2 + eta1 ** 2
    expo = -rho * (p0 + zeta2 * eta2 ** 2) - x2 ** 2 / (4.0 * rho * zeta2) - x2 ** 2 / (4.0 * rho * u)
    with np.errstate(under="ignore", over="ignore"):
        return np.exp(expo) / (rho * zeta2 ** 1.5 * u ** 1.5)


def s3_rho_intermediate(etas, zeta1, x2, tol=1e-8) -> CheckedPair:
    """Numeric (zeta2, rho) integral against the two-factor integrand times the
    third factor e^(-eta2 x2)/x2."""
    eta1, eta12, eta2 = etas
    plans = [QuadraturePlan(rel_tol=1e-10, scale=1.0), QuadraturePlan(rel_tol=1e-10, scale=1.0)]
    res = integrate_nd(lambda r, z2: s3_rho_form_integrand(z2, r, zeta1, x2, eta1, eta12, eta2), plans)
    target = float(s2_new_integrand(zeta1, eta1, eta12, x2)) * math.exp(-eta2 * x2) / x2
    return CheckedPair("s3_rho_intermediate", res.value, target, tol, res.err_estimate)


# ---------------------------------------------------------------------------
# four factors


def s4_closed(eta1, eta12, eta2, eta3):
    _check_s4(eta1, eta12, eta2, eta3)
    return 64.0 * math.pi ** 3 / ((eta1 + eta2) * (eta1 + eta12) * (eta2 + eta12) * eta3 ** 2)


def zeta3_closed(q_form, p_form, eta3, x3):
    """int dzeta3 of the four-factor kernel in shifted coordinates, in closed form.

    The zeta3 dependence splits into x^(3/2), x^(1/2) and x^(-1/2) weights of
    the K_2 integral; the (zeta1 zeta2)^(-3/2) prefactor is left out.
    """
    a, b, c, _ = ids.eq45_params(q_form, p_form, eta3, x3)
    return (eta3 ** 4 * ids.k2_closed(1.5, a, b, c)
            + 2.0 * eta3 ** 2 * p_form * ids.k2_closed(0.5, a, b, c)
            + p_form ** 2 * ids.k2_closed(-0.5, a, b, c)) / (8.0 * math.pi ** 2)


def zeta3_numeric(q_form, p_form, eta3, x3, rel_tol=1e-11) -> EvalResult:
    """The same zeta3 integral taken directly on the kernel
    B K_2(sqrt(AB)) / (2 pi^2 zeta3^(3/2) A), A = q + x3^2/zeta3, B = p + zeta3 eta3^2."""

    def g(z3):
        A = q_form + x3 ** 2 / z3
        B = p_form + z3 * eta3 ** 2
        arg = np.sqrt(A * B)
        with np.errstate(under="ignore"):
            k2 = bessel_k_scaled(2, arg) * np.exp(-arg)
        return B * k2 / (2.0 * math.pi ** 2 * z3 ** 1.5 * A)

    peak = x3 * math.sqrt(p_form / q_form) / eta3
    return integrate_1d(g, QuadraturePlan(rel_tol=rel_tol, scale=peak, points=(peak,)))


def _radial_integrand(v, t, p_form=1.0, eta3=1.0):
    """v^5 4 pi t^2 times the zeta3 bracket at q = (v/sqrt p)^2, x3 = t/eta3, scaled
    so that it carries no p or eta3 dependence."""
    q = v ** 2 / p_form
    x3 = t / eta3
    br = zeta3_closed(q, p_form, eta3, x3) * 8.0 * math.pi ** 2
    return v ** 5 * FOUR_PI * t ** 2 * br / (math.pi * eta3 * p_form ** 1.5)


def s4_h0(rel_tol=1e-11) -> EvalResult:
    """The (v, t) integral that all parameter dependence scales out of."""
    plans = [QuadraturePlan(rel_tol=rel_tol, scale=2.0), QuadraturePlan(rel_tol=rel_tol, scale=2.0)]
    return integrate_nd(lambda v, t: _radial_integrand(v, t), plans)


def s4_stage_checks(etas, zeta1=0.7, zeta2=1.3, x1p=0.8, x2=1.1, x3=0.9) -> list:
    """Check the two reductions of the four-factor route at one point.

    1. closed zeta3 brackets against direct zeta3 quadrature of the kernel;
    2. the radial (q, x3) integral at the actual p and eta3 against the
       parameter-free h0 after rescaling.
    """
    eta1, eta12, eta2, eta3 = etas
    u = zeta1 + 1.0
    q = x1p ** 2 * u / zeta1 + x2 ** 2 * (zeta1 + zeta2 + 1.0) / (u * zeta2)
    p = zeta2 * eta2 ** 2 + zeta1 * eta12 ** 2 + eta1 ** 2
    num = zeta3_numeric(q, p, eta3, x3)
    out = [CheckedPair("s4_zeta3_brackets", num.value, zeta3_closed(q, p, eta3, x3), 1e-8, num.err_estimate)]

    # int r^5 dr int 4 pi x3^2 dx3 bracket(r^2, x3) = h0 pi eta3 / (p^3 eta3^3) * p^(3/2)
    def g(r, x):
        return r ** 5 * FOUR_PI * x ** 2 * zeta3_closed(r ** 2, p, eta3, x) * 8.0 * math.pi ** 2

    plans = [QuadraturePlan(rel_tol=1e-10, scale=2.0 / math.sqrt(p)),
             QuadraturePlan(rel_tol=1e-10, scale=2.0 / eta3)]
    direct = integrate_nd(g, plans)
    h0 = s4_h0().value
    scaled = h0 * math.pi * eta3 * p ** 1.5 / (p ** 3 * eta3 ** 3)
    out.append(CheckedPair("s4_radial_scaling", direct.value, scaled, 1e-7, direct.err_estimate))
    return out


def s4_via_simultaneous(eta1, eta12, eta2, eta3, rel_tol=1e-9, check_stages=True) -> EvalResult:
    """Four factors at once: zeta3 in closed form via the three K_2 integrals,
    the coordinate integrals by scaling onto one parameter-free radial
    integral h0, and (zeta1, zeta2) numerically.

    The coordinate integrals collapse as follows: x1' and x2 enter only
    through q = alpha x1'^2 + beta x2^2; polar coordinates in
    (sqrt(alpha) x1', sqrt(beta) x2) give pi/16 from the angle, and the radial
    pair (r, x3) rescales to (v, t) = (r sqrt p, x3 eta3).  What remains is

        S4 = h0 / (32 eta3^2) * int int 4 pi^2 / ((zeta1 + zeta2 + 1) p)^(3/2).
    """
    _check_s4(eta1, eta12, eta2, eta3)
    if check_stages:
        bad = [c for c in s4_stage_checks((eta1, eta12, eta2, eta3)) if not c.passed]
        if bad:
            raise ConsistencyError("four-factor stage check failed: "
                                   + ", ".join(f"{c.name} rel_err={c.rel_err:.2e}" for c in bad))
    h0 = s4_h0()
    zz = _s3_2d(eta1, eta12, eta2, rel_tol)
    k = 1.0 / (32.0 * eta3 ** 2)
    value = k * h0.value * zz.value
    err = k * (abs(h0.value) * zz.err_estimate + abs(zz.value) * h0.err_estimate)
    return EvalResult(value, err, h0.n_evals + zz.n_evals, h0.converged and zz.converged)


def s4_via_sequential(eta1, eta12, eta2, eta3, rel_tol=1e-10) -> EvalResult:
    """Sequential three-factor value times a numeric x3 integral of the fourth factor."""
    _check_s4(eta1, eta12, eta2, eta3)
    s3 = s3_via_sequential(eta1, eta12, eta2, rel_tol)
    x3 = integrate_1d(lambda x: FOUR_PI * x * np.exp(-eta3 * x),
                      QuadraturePlan(rel_tol=rel_tol * 1e-2, scale=1.0 / eta3))
    return EvalResult(s3.value * x3.value,
                      abs(x3.value) * s3.err_estimate + abs(s3.value) * x3.err_estimate,
                      s3.n_evals + x3.n_evals, s3.converged and x3.converged)


# ---------------------------------------------------------------------------
# brute-force oracles


def _s2_direct(eta1, eta12, x2, rel_tol=1e-11) -> EvalResult:
    """int d^3x1 in spherical coordinates about the origin with the polar axis
    along x2.  The azimuth gives 2 pi; the polar angle is traded for x12,
    d(cos theta) = x12 dx12 / (x1 x2), so

        S2 = (2 pi / x2) int_0^inf dx1 int_{|x1-x2|}^{x1+x2} e^(-eta1 x1 - eta12 x12) dx12.
    """
    _check_s2(eta1, eta12, x2)
    rate = max(eta1, 1e-3)
    outer = QuadraturePlan(rel_tol=rel_tol, scale=max(x2, 1.0 / rate), points=(x2,))

    def inner(x1):
        return QuadraturePlan(lower=abs(x1 - x2), upper=x1 + x2, rel_tol=rel_tol)

    res = integrate_nd(lambda x1, x12: TWO_PI / x2 * np.exp(-eta1 * x1 - eta12 * x12), [outer, inner])
    return res


def _radial_gamma(rng, eta, n):
    """3-vectors with density eta^2 e^(-eta r) / (4 pi r)."""
    r = rng.gamma(2.0, 1.0 / eta, n)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * r[:, None]


def _s3_mc(eta1, eta12, eta2, seed, n, extra_factor=None) -> EvalResult:
    """Fully direct Monte Carlo over d^3x1 d^3x2 (d^3x3 when ``extra_factor``).

    Each sample draws two of the three coordinate vectors x1, x2, x12 as
    radial Gamma(2) vectors and fixes the third by x1 = x2 + x12.  The three
    pairings are mixed with equal weight (balance heuristic) so whichever
    factor is singular is sampled by another pairing.  Each radial rate is
    the factor's own eta plus the smallest of the other two, which is the
    decay rate of that coordinate's marginal and keeps the variance finite.
    """
    etas = {"1": eta1, "12": eta12, "2": eta2}
    lam = {k: v + min(w for q, w in etas.items() if q != k) for k, v in etas.items()}
    pairs = (("1", "2"), ("1", "12"), ("2", "12"))
    rng = np.random.default_rng(seed)
    chunk = 250_000
    s1 = s2 = 0.0
    done = 0
    while done < n:
        k = min(chunk, n - done)
        which = rng.integers(3, size=k)
        x1 = np.empty((k, 3))
        x2 = np.empty((k, 3))
        for j, (pa, pb) in enumerate(pairs):
            m = which == j
            va = _radial_gamma(rng, lam[pa], int(m.sum()))
            vb = _radial_gamma(rng, lam[pb], int(m.sum()))
            if j == 0:
                x1[m], x2[m] = va, vb
            elif j == 1:
                x1[m], x2[m] = va, va - vb
            else:
                x1[m], x2[m] = va + vb, va
        r = {"1": np.linalg.norm(x1, axis=1), "2": np.linalg.norm(x2, axis=1),
             "12": np.linalg.norm(x1 - x2, axis=1)}
        with np.errstate(under="ignore"):
            f = np.prod([np.exp(-etas[q] * r[q]) / r[q] for q in r], axis=0)
            dens = {q: lam[q] ** 2 * np.exp(-lam[q] * r[q]) / (FOUR_PI * r[q]) for q in r}
        pdf = sum(dens[pa] * dens[pb] for pa, pb in pairs) / 3.0
        w = f / pdf
        if extra_factor is not None:
            w = w * extra_factor(rng, k)
        s1 += float(w.sum())
        s2 += float((w * w).sum())
        done += k
    mean = s1 / n
    se = math.sqrt(max(s2 / n - mean * mean, 0.0) / n)
    return EvalResult(mean, se, n, math.isfinite(mean) and se < 1e-3 * abs(mean))


def direct_oracle(spec: AmplitudeSpec, mode: str = "direct", seed: int = 0,
                  n: int = 4_000_000) -> EvalResult:
    """Brute-force value of the defining integral.

    S2 kinds are integrated deterministically in spherical coordinates.  For
    S3/S4, ``mode="semi-direct"`` integrates x2 (and x3) radially around the
    closed two-factor result; ``mode="direct"`` uses seeded Monte Carlo over
    all coordinates, and ``err_estimate`` is one standard error.
    """
    if spec.kind.startswith("S2"):
        return _s2_direct(*spec.s2_args())
    e = spec.etas
    eta1, eta12, eta2 = e[:3]
    if mode == "semi-direct":
        f = lambda x: FOUR_PI * x * np.exp(-eta2 * x) * np.array([s2_closed(eta1, eta12, xi) for xi in x])
        res = integrate_1d(f, QuadraturePlan(rel_tol=1e-11, scale=1.0 / (eta2 + 0.5 * (eta1 + eta12))))
        if spec.kind == "S4":
            x3 = integrate_1d(lambda x: FOUR_PI * x * np.exp(-e[3] * x),
                              QuadraturePlan(rel_tol=1e-12, scale=1.0 / e[3]))
            return EvalResult(res.value * x3.value, res.err_estimate * x3.value,
                              res.n_evals + x3.n_evals, res.converged and x3.converged)
        return res
    if mode != "direct":
        raise DomainError("mode must be 'direct' or 'semi-direct'")
    if spec.kind == "S3":
        return _s3_mc(eta1, eta12, eta2, seed, n)
    eta3 = e[3]

    def x3_weight(rng, k):
        x3 = np.linalg.norm(_radial_gamma(rng, eta3, k), axis=1)
        # factor over its own sampling density
        return (np.exp(-eta3 * x3) / x3) / (eta3 ** 2 * np.exp(-eta3 * x3) / (FOUR_PI * x3))

    return _s3_mc(eta1, eta12, eta2, seed, n, extra_factor=x3_weight)


# ---------------------------------------------------------------------------
# dispatch


def closed_value(spec: AmplitudeSpec) -> float:
    if spec.kind.startswith("S2"):
        return s2_closed(*spec.s2_args())
    if spec.kind == "S3":
        return s3_closed(*spec.etas)
    return s4_closed(*spec.etas)


def evaluate(spec: AmplitudeSpec, route="closed-form", rel_tol: float | None = None) -> EvalResult:
    """Evaluate ``spec`` along ``route`` (a name or :class:`PipelineRoute`)."""
    r = route if isinstance(route, PipelineRoute) else PipelineRoute(route)
    if not r.valid_for(spec.kind):
        raise DomainError(f"route {r.route!r} is not available for {spec.kind}")
    kw = {} if rel_tol is None else {"rel_tol": rel_tol}
    if r.route == "closed-form":
        return _closed_result(closed_value(spec))
    if spec.kind.startswith("S2"):
        fn = {"gaussian": s2_via_gaussian, "new-sequential": s2_via_new_transform}[r.route]
        return fn(*spec.s2_args(), **kw)
    if spec.kind == "S3":
        fn = {"new-sequential": s3_via_sequential, "new-simultaneous": s3_via_simultaneous,
              "zeta-last": s3_k0_route, "rho-form": s3_zeta2_first}[r.route]
        return fn(*spec.etas, **kw)
    fn = {"new-sequential": s4_via_sequential, "new-simultaneous": s4_via_simultaneous}[r.route]
    return fn(*spec.etas, **kw)
