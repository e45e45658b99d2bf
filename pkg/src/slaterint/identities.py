"""Closed forms for integrals of Macdonald functions with quadratic-over-
linear arguments, each paired with its integrand so the two can be checked
against each other.

The central family is

    I_w(a, b, c) = int_0^inf x^w K_nu(2 sqrt((a x^2 + b x + c)/x)) / D(x) dx

with s = sqrt(2 sqrt(a c) + b).  Every closed form below depends on (a, b, c)
only through sqrt(a), sqrt(c) and s.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BranchWarning, DomainError
from .quadrature import EvalResult, QuadraturePlan, integrate_1d, integrate_nd
from .specfun import bessel_k_scaled, meijer_g2002, tricomi_u_special
from .transforms import CheckedPair

SQRT_PI = math.sqrt(math.pi)


def _s(a, b, c):
    return np.sqrt(2.0 * np.sqrt(a * c) + b)


def _check_abc(a, b, c):
    if not (a > 0 and b >= 0 and c > 0):
        raise DomainError("need a > 0, b >= 0, c > 0")


def _w_of(x, a, b, c):
    return (a * x * x + b * x + c) / x


def _k_of(nu, z):
    """K_nu(z) through the scaled function, quiet when it underflows."""
    with np.errstate(under="ignore"):
        return bessel_k_scaled(nu, z) * np.exp(-z)


# ---------------------------------------------------------------------------
# the corrected double-integral identity


def fixed_pbm(f: Callable, p: float, q: float, rel_tol=1e-9, tol=1e-6) -> CheckedPair:
    """int int f(xy/(x+y)) e^(-px-qy) / sqrt(x+y) dx dy
    = sqrt(pi) (sqrt p + sqrt q) / sqrt(p q) int e^(-(sqrt p + sqrt q)^2 t) f(t) dt.

    ``f`` must be vectorised.
    """
    if not (p > 0 and q > 0):
        raise DomainError("p and q must be positive")
    sp, sq = math.sqrt(p), math.sqrt(q)

    def lhs_integrand(x, y):
        s = x + y
        return f(x * y / s) * np.exp(-p * x - q * y) / np.sqrt(s)

    lhs = integrate_nd(lhs_integrand, [QuadraturePlan(rel_tol=rel_tol, scale=1.0 / p),
                                       QuadraturePlan(rel_tol=rel_tol, scale=1.0 / q)])
    k = (sp + sq) ** 2
    inner = integrate_1d(lambda t: np.exp(-k * t) * f(t),
                         QuadraturePlan(rel_tol=rel_tol * 1e-2, scale=1.0 / k))
    rhs = SQRT_PI * (sp + sq) / math.sqrt(p * q) * inner.value
    return CheckedPair("fixed_pbm", lhs.value, rhs, tol, lhs.err_estimate)


# ---------------------------------------------------------------------------
# sqrt(a + g x) / (sqrt(b + h x) (c + f x)^2)


def sqrt_ratio_integrand(a, g, b, h, c, f, x):
    x = np.asarray(x, dtype=float)
    return np.sqrt(a + g * x) / (np.sqrt(b + h * x) * (c + f * x) ** 2)


def _branch(a, g, b, h, c, f, warn):
    p = a * f - c * g
    q = b * f - c * h
    if warn and (p < 0 or q < 0):
        warnings.warn("antiderivative evaluated off its real branch "
                      f"(af-cg={p:.3g}, bf-ch={q:.3g})", BranchWarning, stacklevel=3)
    return p, q


def sqrt_ratio_antiderivative(a, g, b, h, c, f, x, warn=True):
    """An antiderivative of :func:`sqrt_ratio_integrand` in x.

    Evaluated in complex arithmetic and reduced to its real part, which is
    the real antiderivative when af - cg >= 0 and bf - ch >= 0.  Outside
    that range a :class:`BranchWarning` is issued; the derivative is still
    correct but the additive constant may jump between evaluation points.
    """
    p, q = _branch(a, g, b, h, c, f, warn)
    x = np.asarray(x, dtype=complex)
    sp = np.sqrt(complex(p))
    sq = np.sqrt(complex(q))
    ra = np.sqrt(a + g * x)
    rb = np.sqrt(b + h * x)
    den = c + f * x
    coef = (b * g - a * h) / (sp * sq ** 3)
    t1 = 2.0 * ra * rb / (den * (c * h - b * f))
    if coef == 0:
        # bg = ah: the logarithms drop out (their arguments vanish too)
        out = 0.5 * t1.real
        return float(out) if out.ndim == 0 else out
    t2 = coef * np.log(den * (a * h - b * g) * sp * sq)
    inner = (2.0 * ra * rb * sp * sq + a * (2 * b * f - c * h + f * h * x)
             - b * c * g + b * f * g * x - 2 * c * g * h * x)
    t3 = -coef * np.log(-2.0 * f * q * inner)
    out = 0.5 * (t1 + t2 + t3).real
    return float(out) if out.ndim == 0 else out


def sqrt_ratio_limit(a, g, b, h, c, f, warn=True):
    """Limit of :func:`sqrt_ratio_antiderivative` as x -> inf (g, h, f > 0)."""
    p, q = _branch(a, g, b, h, c, f, warn)
    if not (g > 0 and h > 0 and f != 0):
        raise DomainError("limit needs g, h > 0 and f != 0")
    sp = np.sqrt(complex(p))
    sq = np.sqrt(complex(q))
    sgh = math.sqrt(g * h)
    coef = (b * g - a * h) / (sp * sq ** 3)
    t1 = 2.0 * sgh / (f * (c * h - b * f))
    if coef == 0:
        return float((0.5 * t1).real)
    # the log x pieces of the two logarithms cancel
    lead = 2.0 * sgh * sp * sq + a * f * h + b * f * g - 2 * c * g * h
    t2 = coef * np.log(f * (a * h - b * g) * sp * sq)
    t3 = -coef * np.log(-2.0 * f * q * lead)
    return float((0.5 * (t1 + t2 + t3)).real)


def sqrt_ratio_definite(a, g, b, h, c, f, lo, hi=math.inf, warn=True):
    """int_lo^hi of the integrand from the antiderivative."""
    top = (sqrt_ratio_limit(a, g, b, h, c, f, warn) if math.isinf(hi)
           else sqrt_ratio_antiderivative(a, g, b, h, c, f, hi, warn))
    return top - sqrt_ratio_antiderivative(a, g, b, h, c, f, lo, warn)


def antiderivative_check(a, g, b, h, c, f, x, step=1e-5, tol=1e-6) -> CheckedPair:
    """Central difference of the antiderivative against the integrand."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        up = sqrt_ratio_antiderivative(a, g, b, h, c, f, x + step)
        dn = sqrt_ratio_antiderivative(a, g, b, h, c, f, x - step)
    fd = (up - dn) / (2 * step)
    return CheckedPair("sqrt_ratio_derivative", fd, float(sqrt_ratio_integrand(a, g, b, h, c, f, x)), tol)


# ---------------------------------------------------------------------------
# K_0 over x^(3/2)


def k0_integrand(x, a, b, c):
    x = np.asarray(x, dtype=float)
    return _k_of(0, 2.0 * np.sqrt(_w_of(x, a, b, c))) / x ** 1.5


def k0_integrand_u(x, a, b, c):
    """Same integrand written with U(1/2, 1, .)."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(_w_of(x, a, b, c))
    return SQRT_PI * np.exp(-2.0 * r) * tricomi_u_special(0, 4.0 * r) / x ** 1.5


def k0_integrand_g(x, a, b, c):
    """Same integrand written with G^{2,0}_{0,2}(. | 0, 0)."""
    x = np.asarray(x, dtype=float)
    return 0.5 * meijer_g2002(_w_of(x, a, b, c), 0) / x ** 1.5


def k0_closed(a, b, c):
    """pi e^(-2 s) / (2 sqrt c)."""
    return math.pi * math.exp(-2.0 * float(_s(a, b, c))) / (2.0 * math.sqrt(c))


def _abc_plan(a, c, rel_tol):
    peak = math.sqrt(c / a)
    return QuadraturePlan(rel_tol=rel_tol, scale=peak, points=(peak,))


def k0_quadrature(a, b, c, rel_tol=1e-11) -> EvalResult:
    _check_abc(a, b, c)
    return integrate_1d(lambda x: k0_integrand(x, a, b, c), _abc_plan(a, c, rel_tol))


def k0_singular_integral(a, b, c, tol=1e-7) -> CheckedPair:
    _check_abc(a, b, c)
    res = k0_quadrature(a, b, c)
    return CheckedPair("k0_singular", res.value, k0_closed(a, b, c), tol, res.err_estimate)


# ---------------------------------------------------------------------------
# K_2 integrals with weights x^(3/2), x^(1/2), x^(-1/2)

WEIGHTS = (1.5, 0.5, -0.5)


def _weight(w):
    w = float(w)
    if w not in WEIGHTS:
        raise DomainError("weight exponent must be 3/2, 1/2 or -1/2")
    return w


def k2_integrand(w, x, a, b, c):
    """x^w K_2(2 sqrt(W)) / (a x^2 + b x + c), W = (a x^2 + b x + c)/x."""
    w = _weight(w)
    x = np.asarray(x, dtype=float)
    poly = a * x * x + b * x + c
    return x ** w * _k_of(2, 2.0 * np.sqrt(poly / x)) / poly


def k2_integrand_u(w, x, a, b, c):
    """16 sqrt(pi) x^(w-1) e^(-2 sqrt W) U(5/2, 5, 4 sqrt W)."""
    w = _weight(w)
    x = np.asarray(x, dtype=float)
    r = np.sqrt(_w_of(x, a, b, c))
    return 16.0 * SQRT_PI * x ** (w - 1.0) * np.exp(-2.0 * r) * tricomi_u_special(2, 4.0 * r)


def k2_integrand_g(w, x, a, b, c):
    """x^w G^{2,0}_{0,2}(W | 1, -1) / (2 (a x^2 + b x + c))."""
    w = _weight(w)
    x = np.asarray(x, dtype=float)
    poly = a * x * x + b * x + c
    return x ** w * meijer_g2002(poly / x, 1) / (2.0 * poly)


def k2_closed(w, a, b, c):
    """Closed value of the K_2 integral for the three supported weights.

    For w = -1/2 the value is the positive combination, as it must be for a
    positive integrand; :func:`sign_resolution` confirms it by quadrature.
    Accepts arrays for a, b, c.
    """
    w = _weight(w)
    scalar = all(np.ndim(v) == 0 for v in (a, b, c))
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    s = _s(a, b, c)
    with np.errstate(under="ignore"):
        e = np.pi * np.exp(-2.0 * s)
    ra, rc = np.sqrt(a), np.sqrt(c)
    if w == 1.5:
        out = e * (1.0 / (4.0 * a * ra * s) + rc / (2.0 * a * s * s) + rc / (4.0 * a * s ** 3))
    elif w == 0.5:
        out = e / (2.0 * ra * s * s) * (1.0 / (2.0 * s) + 1.0)
    else:
        out = e / (2.0 * rc * s * s) + e / (4.0 * rc * s ** 3)
    return float(out) if scalar else out


def k2_half_closed_bessel(a, b, c):
    """The w = 1/2 value written as sqrt(pi) a^(-1/2) s^(-3/2) K_{3/2}(2 s)."""
    s = float(_s(a, b, c))
    return SQRT_PI / math.sqrt(a) * s ** -1.5 * float(_k_of(1.5, 2.0 * s))


def k2_quadrature(w, a, b, c, rel_tol=1e-11) -> EvalResult:
    _check_abc(a, b, c)
    return integrate_1d(lambda x: k2_integrand(w, x, a, b, c), _abc_plan(a, c, rel_tol))


def k2_weighted_integrals(w, a, b, c, tol=1e-7, rep_points=5, rep_tol=1e-10):
    """Quadrature against closed form, plus U- and G-form pointwise checks.

    Returns ``(main, representation_checks)``.
    """
    _check_abc(a, b, c)
    res = k2_quadrature(w, a, b, c)
    main = CheckedPair(f"k2_w{w:+g}", res.value, k2_closed(w, a, b, c), tol, res.err_estimate)
    peak = math.sqrt(c / a)
    xs = peak * np.geomspace(0.2, 5.0, rep_points)
    k_form = k2_integrand(w, xs, a, b, c)
    reps = []
    for name, fn in (("u_form", k2_integrand_u), ("g_form", k2_integrand_g)):
        other = fn(w, xs, a, b, c)
        for x, kv, ov in zip(xs, k_form, other):
            reps.append(CheckedPair(f"k2_w{w:+g}_{name}@{x:.4g}", float(ov), float(kv), rep_tol))
    return main, reps


# ---------------------------------------------------------------------------
# the perfect-square substitution


def eq40_params(zeta1, eta1, eta12, eta2, x2):
    """(a, b, c) of the K_0 step of the three-orbital reduction, and x eta."""
    u = zeta1 + 1.0
    p0 = zeta1 * eta12 ** 2 + eta1 ** 2
    a = x2 ** 2 * eta2 ** 2 / (4.0 * u)
    b = x2 ** 2 * eta2 ** 2 / (4.0 * u) * (p0 / eta2 ** 2 + u)
    c = 0.25 * x2 ** 2 * p0
    return a, b, c, x2 * eta2


def eq45_params(q_form, p_form, eta3, x3):
    """(a, b, c) of the zeta3 step of the four-orbital reduction.

    ``q_form`` is the coordinate quadratic form left after the shift and
    ``p_form`` = eta1^2 + zeta1 eta12^2 + zeta2 eta2^2.
    """
    a = 0.25 * eta3 ** 2 * q_form
    b = 0.25 * (p_form * q_form + x3 ** 2 * eta3 ** 2)
    c = 0.25 * x3 ** 2 * p_form
    return a, b, c, x3 * eta3


def substitution_rule_check(family: str, b_scale: float = 1.0, tol: float = 1e-12, **ctx) -> bool:
    """sqrt(2 sqrt(ac) + b) == 2 sqrt(ac)/(x eta) + x eta / 2 for the family.

    ``b_scale`` multiplies b before testing (1 leaves the family intact).
    """
    if family == "eq40":
        a, b, c, xe = eq40_params(ctx["zeta1"], ctx["eta1"], ctx["eta12"], ctx["eta2"], ctx["x2"])
    elif family == "eq45":
        a, b, c, xe = eq45_params(ctx["q_form"], ctx["p_form"], ctx["eta3"], ctx["x3"])
    else:
        raise DomainError(f"unknown family {family!r}")
    b = b * b_scale
    lhs = math.sqrt(2.0 * math.sqrt(a * c) + b)
    rhs = 2.0 * math.sqrt(a * c) / xe + 0.5 * xe
    return abs(lhs - rhs) <= tol * abs(rhs)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class IdentityRecord:
    name: str
    params: tuple
    closed_form: Callable
    integrand: Callable
    domain: dict
    tol: float
    quadrature: Callable = None

    def check(self, **p) -> CheckedPair:
        if self.quadrature is not None:
            res = self.quadrature(**p)
        else:
            args = [p[k] for k in self.params]
            res = integrate_1d(lambda x: self.integrand(x, *args), QuadraturePlan(rel_tol=1e-11))
        return CheckedPair(self.name, res.value, self.closed_form(**p), self.tol, res.err_estimate)


ABC_DOMAIN = {"a": (0.1, 10.0), "b": (0.1, 10.0), "c": (0.1, 10.0)}


def _k2_record(w):
    return IdentityRecord(
        name=f"k2_weighted_w{w:+g}",
        params=("a", "b", "c"),
        closed_form=lambda a, b, c: k2_closed(w, a, b, c),
        integrand=lambda x, a, b, c: k2_integrand(w, x, a, b, c),
        domain=ABC_DOMAIN,
        tol=1e-7,
        quadrature=lambda a, b, c: k2_quadrature(w, a, b, c),
    )


REGISTRY = {
    "k0_singular": IdentityRecord(
        name="k0_singular",
        params=("a", "b", "c"),
        closed_form=k0_closed,
        integrand=k0_integrand,
        domain=ABC_DOMAIN,
        tol=1e-7,
        quadrature=k0_quadrature,
    ),
    "k2_weighted_w+1.5": _k2_record(1.5),
    "k2_weighted_w+0.5": _k2_record(0.5),
    "k2_weighted_w-0.5": _k2_record(-0.5),
}


def draw_params(record: IdentityRecord, rng) -> dict:
    """Log-uniform draw over the record's domain."""
    out = {}
    for k in record.params:
        lo, hi = record.domain[k]
        out[k] = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return out


@dataclass
class RecordReport:
    name: str
    n_draws: int
    max_rel_err: float
    tol: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_record(record: IdentityRecord, seed: int = 0, n_draws: int = 50,
                  tol: float | None = None) -> RecordReport:
    """LHS against RHS on ``n_draws`` random parameter sets."""
    tol = record.tol if tol is None else tol
    rng = np.random.default_rng([seed, sum(map(ord, record.name))])
    worst = 0.0
    fails = []
    for _ in range(n_draws):
        p = draw_params(record, rng)
        pair = record.check(**p)
        worst = max(worst, pair.rel_err)
        if pair.rel_err > tol:
            fails.append((p, pair.rel_err))
    return RecordReport(record.name, n_draws, worst, tol, fails)


def sign_resolution() -> dict:
    """Settle the sign of the w = -1/2 closed form by quadrature at a = b = c = 1."""
    quad = k2_quadrature(-0.5, 1.0, 1.0, 1.0).value
    pos = k2_closed(-0.5, 1.0, 1.0, 1.0)
    return {"quadrature": quad, "positive_form": pos, "negative_form": -pos,
            "resolved_sign": 1 if abs(quad - pos) < abs(quad + pos) else -1}
