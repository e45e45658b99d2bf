"""Integral-transform representations of products of Yukawa factors
e^{-eta R}/R.

Each representation comes as a pointwise kernel plus a reconstruction
routine that integrates the kernel back and compares with the product it
represents.

Kernels accept the auxiliary variables as scalars or as arrays that
broadcast against each other, so they can be handed straight to the
vectorised integrators in :mod:`slaterint.quadrature`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DivergentParameterError, DomainError
from .quadrature import (EvalResult, QuadraturePlan, fit_log_proposal, integrate_1d, integrate_nd,
                         log_student_t_sampler, monte_carlo_oracle)
from .specfun import Order, bessel_k_scaled, gamma_exp_integral, hermite

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)


@dataclass(frozen=True)
class CheckedPair:
    """Two evaluations of the same quantity and whether they agree."""

    name: str
    lhs: float
    rhs: float
    tol: float
    lhs_err: float = 0.0

    @property
    def rel_err(self) -> float:
        scale = max(abs(self.rhs), 1e-300)
        return abs(self.lhs - self.rhs) / scale

    @property
    def passed(self) -> bool:
        return bool(self.rel_err <= self.tol)

    def __bool__(self):
        return self.passed


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class SlaterFactor:
    """One factor R^(j-1) e^(-eta R)."""

    eta: float
    r: float
    j: int = 0

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("r must be positive")
        if self.eta < 0:
            raise DomainError("eta must be non-negative")
        if self.j < 0:
            raise DomainError("j must be non-negative")
        if self.j > 0 and self.eta == 0:
            raise DomainError("j > 0 requires eta > 0")

    def value(self) -> float:
        return self.r ** (self.j - 1) * math.exp(-self.eta * self.r)


@dataclass(frozen=True)
class ZetaKernel:
    """Data of the (M-1)-parameter kernel for M Yukawa factors.

    ``rs[i]`` and ``etas[i]`` are R_{i+1} and eta_{i+1}.
    """

    m: int
    rs: tuple
    etas: tuple

    def __post_init__(self):
        rs = tuple(float(r) for r in self.rs)
        etas = tuple(float(e) for e in self.etas)
        object.__setattr__(self, "rs", rs)
        object.__setattr__(self, "etas", etas)
        if self.m < 2:
            raise DomainError("the zeta kernel needs M >= 2")
        if len(rs) != self.m or len(etas) != self.m:
            raise DomainError("rs and etas must both have length M")
        if any(not r > 0 for r in rs):
            raise DomainError("all R must be positive")
        if any(e < 0 for e in etas):
            raise DomainError("all eta must be non-negative")
        if not any(e > 0 for e in etas):
            raise DomainError("at least one eta must be positive (B would vanish)")

    @classmethod
    def uniform(cls, m, r=1.0, eta=1.0):
        return cls(m, (r,) * m, (eta,) * m)

    def _z(self, zetas):
        zs = [np.asarray(z, dtype=float) for z in zetas]
        if len(zs) != self.m - 1:
            raise DomainError(f"expected {self.m - 1} zeta values")
        if any(np.any(~(z > 0)) for z in zs):
            raise DomainError("zeta values must be positive")
        return zs

    def a_form(self, zetas):
        """A = R1^2 + sum_j R_j^2 / zeta_{j-1}."""
        zs = self._z(zetas)
        out = self.rs[0] ** 2
        for r, z in zip(self.rs[1:], zs):
            out = out + r * r / z
        return out

    def b_form(self, zetas):
        """B = eta1^2 + sum_j zeta_{j-1} eta_j^2."""
        zs = self._z(zetas)
        out = self.etas[0] ** 2
        for e, z in zip(self.etas[1:], zs):
            out = out + z * e * e
        return out

    def target(self) -> float:
        """The product the kernel integrates to."""
        return math.prod(math.exp(-e * r) / r for r, e in zip(self.rs, self.etas))

    def zeta_star(self):
        """Rough location of the kernel's mass in each zeta (saddle of sqrt(AB))."""
        r1, e1 = self.rs[0], self.etas[0]
        out = []
        for r, e in zip(self.rs[1:], self.etas[1:]):
            if e > 0 and e1 > 0:
                z = r * e1 / (r1 * e)
            else:
                z = (r / r1) ** 2
            out.append(min(max(z, 1e-3), 1e3))
        return out


@dataclass(frozen=True)
class QuadraticForm:
    """Real bookkeeping of the momentum quadratic form.

    ``b2[j]`` is b_j . b_j = -R_j^2 / (4 rho^2): the imaginary shift vectors
    are never formed, only their squares enter.
    """

    m: int
    zetas: tuple
    b2: tuple
    c_const: float
    rho: float

    @property
    def diag(self):
        return np.array((1.0,) + tuple(self.zetas))

    @property
    def lam(self) -> float:
        return float(np.prod(self.diag))

    def minor(self, i, j) -> float:
        """Lambda_ij: the M x M diagonal block with row i and column j removed."""
        d = np.diag(self.diag)
        sub = np.delete(np.delete(d, i, axis=0), j, axis=1)
        if sub.size == 0:
            return 1.0
        return float(np.linalg.det(sub))

    def omega(self) -> float:
        """det W by expansion in minors of the diagonal block.

        Off-diagonal minors of a diagonal matrix vanish identically, so only
        the b_j . b_j terms survive.
        """
        total = self.c_const * self.lam
        for j in range(self.m):
            total -= self.b2[j] * self.minor(j, j)
        return total

    def c_prime_closed(self) -> float:
        out = self.c_const - self.b2[0]
        for j in range(1, self.m):
            out -= self.b2[j] / self.zetas[j - 1]
        return out


def build_quadratic_form(k: ZetaKernel, zetas, rho: float) -> QuadraticForm:
    zs = tuple(float(z) for z in zetas)
    if len(zs) != k.m - 1 or any(not z > 0 for z in zs):
        raise DomainError("need M-1 positive zeta values")
    if not rho > 0:
        raise DomainError("rho must be positive")
    c = k.etas[0] ** 2 + sum(z * e * e for z, e in zip(zs, k.etas[1:]))
    b2 = tuple(-(r * r) / (4.0 * rho * rho) for r in k.rs)
    return QuadraticForm(k.m, zs, b2, c, float(rho))


def c_prime(qf: QuadraticForm, tol: float = 1e-12) -> float:
    """c' from the closed sum, checked against Omega / Lambda."""
    closed = qf.c_prime_closed()
    via_minors = qf.omega() / qf.lam
    if abs(closed - via_minors) > tol * max(abs(closed), 1e-300):
        raise ConsistencyError(f"c' mismatch: {closed!r} vs {via_minors!r}")
    return closed


# ---------------------------------------------------------------------------
# single-factor transforms


def gaussian_weight(factor: SlaterFactor, rho3):
    """Integrand in rho3 whose integral over (0, inf) is R^(j-1) e^(-eta R)."""
    rho3 = np.asarray(rho3, dtype=float)
    j, eta, r = factor.j, factor.eta, factor.r
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        arg = eta / (2.0 * np.sqrt(rho3))
        out = (np.exp(-r * r * rho3 - eta * eta / (4.0 * rho3))
               * hermite(j, arg) / rho3 ** ((j + 1) / 2.0)) / (2.0 ** j * math.sqrt(math.pi))
    return float(out) if out.ndim == 0 else out


def gaussian_reconstruct(factor: SlaterFactor, rel_tol=1e-10) -> EvalResult:
    scale = 1.0 / factor.r ** 2
    return integrate_1d(lambda p: gaussian_weight(factor, p),
                        QuadraturePlan(rel_tol=rel_tol, scale=scale, abs_tol=1e-300))


def power_denominator_kernel(r0, r1, p1, s, zeta):
    """zeta^(p1-1) / (r1 zeta + r0)^s, normalised by 1/B(p1, s-p1).

    Its integral over zeta in (0, inf) is r0^(p1-s) r1^(-p1).
    """
    if not (0 < p1 < s):
        raise DivergentParameterError("need 0 < p1 < s")
    if not (r0 > 0 and r1 > 0):
        raise DomainError("r0 and r1 must be positive")
    log_norm = math.lgamma(s) - math.lgamma(p1) - math.lgamma(s - p1)
    zeta = np.asarray(zeta, dtype=float)
    out = math.exp(log_norm) * zeta ** (p1 - 1.0) / (r1 * zeta + r0) ** s
    return float(out) if out.ndim == 0 else out


def power_denominator_reconstruct(r0, r1, p1, s, rel_tol=1e-10) -> CheckedPair:
    res = integrate_1d(lambda z: power_denominator_kernel(r0, r1, p1, s, z),
                       QuadraturePlan(rel_tol=rel_tol, scale=r0 / r1, points=(r0 / r1,)))
    exact = 1.0 / (r0 ** (s - p1) * r1 ** p1)
    return CheckedPair("power_denominator", res.value, exact, 10 * rel_tol, res.err_estimate)


def cosine_pair_identity(x, eta, t):
    """(2/pi) cos(t eta) / (t^2 + x^2); integrates over t to e^(-eta x)/x."""
    if not x > 0:
        raise DomainError("x must be positive")
    t = np.asarray(t, dtype=float)
    out = (2.0 / math.pi) * np.cos(t * eta) / (t * t + x * x)
    return float(out) if out.ndim == 0 else out


def _wynn_epsilon(partial_sums):
    """Limit of a sequence of partial sums by Wynn's epsilon algorithm."""
    s = list(partial_sums)
    n = len(s)
    e_prev = [0.0] * (n + 1)
    e_cur = s[:]
    best = s[-1]
    best_diff = math.inf
    for k in range(1, n):
        e_next = []
        for i in range(len(e_cur) - 1):
            diff = e_cur[i + 1] - e_cur[i]
            if diff == 0.0:
                e_next.append(math.inf)
            else:
                e_next.append(e_prev[i + 1] + 1.0 / diff)
        e_prev, e_cur = e_cur, e_next
        if k % 2 == 0 and len(e_cur) >= 2:
            d = abs(e_cur[-1] - e_cur[-2])
            if math.isfinite(e_cur[-1]) and d < best_diff:
                best, best_diff = e_cur[-1], d
        if len(e_cur) < 2:
            break
    return best, best_diff


def _oscillatory_integral(f, period, n_cycles=40, rel_tol=1e-12, head=0.0):
    """int_0^inf f for a slowly decaying oscillation with the given half period.

    Integrates half-period panels past ``head`` and extrapolates their
    partial sums.
    """
    total = 0.0
    n = 0
    if head > 0:
        r = integrate_1d(f, QuadraturePlan(lower=0.0, upper=head, rel_tol=rel_tol))
        total, n = r.value, r.n_evals
    sums = []
    for k in range(n_cycles):
        a = head + k * period
        r = integrate_1d(f, QuadraturePlan(lower=a, upper=a + period, rel_tol=rel_tol))
        total += r.value
        n += r.n_evals
        sums.append(total)
    value, diff = _wynn_epsilon(sums)
    return EvalResult(value, diff, n, diff <= 1e3 * rel_tol * abs(value))


def cosine_pair_reconstruct(x, eta, rel_tol=1e-12) -> CheckedPair:
    exact = math.exp(-eta * x) / x
    f = lambda t: cosine_pair_identity(x, eta, t)
    if eta == 0:
        res = integrate_1d(f, QuadraturePlan(rel_tol=rel_tol, scale=x))
    else:
        res = _oscillatory_integral(f, math.pi / eta, rel_tol=rel_tol)
    return CheckedPair("cosine_pair", res.value, exact, 1e-8, res.err_estimate)


def bessel_j0(z):
    """J_0(z) = (1/pi) int_0^pi cos(z sin theta) d theta by the trapezoid rule.

    The integrand is smooth and periodic, so the rule converges
    geometrically once the node count exceeds |z|.
    """
    z = np.asarray(z, dtype=float)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    n = int(2 * zmax + 64)
    theta = (np.arange(n) + 0.5) * (math.pi / n)
    out = np.cos(np.multiply.outer(z, np.sin(theta))).mean(axis=-1)
    return float(out) if out.ndim == 0 else out


def j0_transform_identity(r, lam, tol=1e-8) -> CheckedPair:
    """Compare e^(-lam r)/r with int_0^inf x J0(x lam)/(r^2+x^2)^(3/2) dx."""
    if not r > 0:
        raise DomainError("r must be positive")
    lhs = math.exp(-lam * r) / r
    f = lambda x: x * bessel_j0(x * lam) / (r * r + x * x) ** 1.5
    if lam == 0:
        res = integrate_1d(f, QuadraturePlan(rel_tol=1e-12, scale=r))
    else:
        # start the panels past the non-oscillatory head, aligned with J0's
        # asymptotic half period
        head = 0.75 * math.pi / lam
        res = _oscillatory_integral(f, math.pi / lam, n_cycles=60, rel_tol=1e-13, head=head)
    return CheckedPair("j0_transform", res.value, lhs, tol, res.err_estimate)


# ---------------------------------------------------------------------------
# M-orbital kernels


def _log_k_scaled(order, z):
    return np.log(bessel_k_scaled(order, z))


def pair_kernel(k: ZetaKernel, zeta1):
    """Two-factor kernel in zeta1 for factors at (x1, x12) with (eta1, eta12).

    sqrt(B) K_1(sqrt(A) sqrt(B)) / (pi zeta1^(3/2) sqrt(A)),
    A = x1^2 + x12^2/zeta1,  B = eta1^2 + zeta1 eta12^2.
    """
    if k.m != 2:
        raise DomainError("pair_kernel needs M = 2")
    z = np.asarray(zeta1, dtype=float)
    a = k.a_form([z])
    b = k.b_form([z])
    sa, sb = np.sqrt(a), np.sqrt(b)
    arg = sa * sb
    out = sb * np.exp(np.log(bessel_k_scaled(1, arg)) - arg) / (math.pi * z ** 1.5 * sa)
    return float(out) if np.ndim(out) == 0 else out


def _log_m_prefactor(m):
    return -0.5 * m * LOG_PI + (1.0 - 0.5 * m) * LOG_2


def m_kernel(k: ZetaKernel, zetas):
    """Compact M-factor kernel, evaluated in log space.

    pi^(-M/2) 2^(1-M/2) prod(zeta)^(-3/2) A^(-M/4) B^(M/4) K_{M/2}(sqrt(A B))
    """
    zs = k._z(zetas)
    a = k.a_form(zs)
    b = k.b_form(zs)
    arg = np.sqrt(a * b)
    logv = _log_m_prefactor(k.m) + 0.25 * k.m * (np.log(b) - np.log(a)) - arg
    for z in zs:
        logv = logv - 1.5 * np.log(z)
    out = np.exp(logv + _log_k_scaled(Order(k.m), arg))
    return float(out) if np.ndim(out) == 0 else out


def m_kernel_rho(k: ZetaKernel, zetas, rho):
    """Kernel before the rho integration.

    pi^(3M/2) / (2^M pi^(2M) rho^(M/2+1) prod zeta^(3/2)) e^(-rho B - A/(4 rho))
    """
    zs = k._z(zetas)
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError("rho must be positive")
    a = k.a_form(zs)
    b = k.b_form(zs)
    logv = (-0.5 * k.m * LOG_PI - k.m * LOG_2 - (0.5 * k.m + 1.0) * np.log(rho)
            - rho * b - a / (4.0 * rho))
    for z in zs:
        logv = logv - 1.5 * np.log(z)
    out = np.exp(logv)
    return float(out) if np.ndim(out) == 0 else out


def _inverse_forms(k, xis):
    xs = [np.asarray(x, dtype=float) for x in xis]
    if len(xs) != k.m - 1 or any(np.any(~(x > 0)) for x in xs):
        raise DomainError("need M-1 positive xi values")
    a = k.rs[0] ** 2
    b = k.etas[0] ** 2
    for r, e, x in zip(k.rs[1:], k.etas[1:], xs):
        a = a + x * r * r
        b = b + e * e / x
    return xs, a, b


def m_kernel_inverse(k: ZetaKernel, xis):
    """Compact kernel in the inverse variables xi = 1/zeta."""
    xs, a, b = _inverse_forms(k, xis)
    arg = np.sqrt(a * b)
    logv = _log_m_prefactor(k.m) + 0.25 * k.m * (np.log(b) - np.log(a)) - arg
    for x in xs:
        logv = logv - 0.5 * np.log(x)
    out = np.exp(logv + _log_k_scaled(Order(k.m), arg))
    return float(out) if np.ndim(out) == 0 else out


def m_kernel_inverse_rho(k: ZetaKernel, xis, rho):
    xs, a, b = _inverse_forms(k, xis)
    rho = np.asarray(rho, dtype=float)
    logv = (-0.5 * k.m * LOG_PI - k.m * LOG_2 - (0.5 * k.m + 1.0) * np.log(rho)
            - rho * b - a / (4.0 * rho))
    for x in xs:
        logv = logv - 0.5 * np.log(x)
    out = np.exp(logv)
    return float(out) if np.ndim(out) == 0 else out


def rho_integral(k: ZetaKernel, zetas):
    """Closed rho integral of :func:`m_kernel_rho` (a K_{M/2} integral)."""
    zs = k._z(zetas)
    a = k.a_form(zs)
    b = k.b_form(zs)
    pref = math.exp(-0.5 * k.m * LOG_PI - k.m * LOG_2)
    for z in zs:
        pref = pref * z ** -1.5
    # int rho^(-M/2-1) e^(-rho B - A/(4 rho)) = int t^(M/2-1) e^(-A t/4 - B/t)
    return pref * gamma_exp_integral(Order(k.m), b, a / 4.0)


# ---------------------------------------------------------------------------
# recursion


def trio_slater(k: ZetaKernel, zetas, b=0.0):
    """e^(-sqrt(A+b) sqrt(B)) / (2 pi zeta1^(3/2) zeta2^(3/2) sqrt(A+b))."""
    if k.m != 3:
        raise DomainError("the trio form needs M = 3")
    z1, z2 = (np.asarray(z, dtype=float) for z in zetas)
    u = np.sqrt(k.a_form([z1, z2]) + b)
    sb = np.sqrt(k.b_form([z1, z2]))
    return np.exp(-u * sb) / (2.0 * math.pi * z1 ** 1.5 * z2 ** 1.5 * u)


def recursion_trio(k: ZetaKernel, zetas):
    """-2 d/db of :func:`trio_slater` at b = 0, differentiated in closed form."""
    if k.m != 3:
        raise DomainError("the trio form needs M = 3")
    z1, z2 = (np.asarray(z, dtype=float) for z in zetas)
    u = np.sqrt(k.a_form([z1, z2]))
    sb = np.sqrt(k.b_form([z1, z2]))
    out = np.exp(-u * sb) * (sb / u ** 2 + 1.0 / u ** 3) / (2.0 * math.pi * z1 ** 1.5 * z2 ** 1.5)
    return float(out) if np.ndim(out) == 0 else out


def recursion_trio_fd(k: ZetaKernel, zetas, h=1e-6):
    """Central-difference version of :func:`recursion_trio`."""
    up = trio_slater(k, zetas, h)
    dn = trio_slater(k, zetas, -h)
    out = -2.0 * (up - dn) / (2.0 * h)
    return float(out) if np.ndim(out) == 0 else out


def four_orbital_recursive(k: ZetaKernel, zetas):
    """Integrand in (zeta1, zeta2, zeta3) for four factors, built by turning
    the first three into one new Yukawa factor and pairing it with the
    fourth.

    The pair kernel already carries its own 1/(pi zeta3^(3/2)); it is
    applied once.
    """
    if k.m != 4:
        raise DomainError("needs M = 4")
    z1, z2, z3 = (np.asarray(z, dtype=float) for z in zetas)
    trio = ZetaKernel(3, k.rs[:3], k.etas[:3])
    a3 = trio.a_form([z1, z2])
    b3 = trio.b_form([z1, z2])
    r4, e4 = k.rs[3], k.etas[3]
    # pair kernel with x1 = R4, x12^2 = A3 + b, eta1 = eta4, eta12^2 = B3
    bp = e4 * e4 + z3 * b3
    u = np.sqrt(r4 * r4 + a3 / z3)
    sb = np.sqrt(bp)
    x = u * sb
    k0 = np.exp(np.log(bessel_k_scaled(0, x)) - x)
    k1 = np.exp(np.log(bessel_k_scaled(1, x)) - x)
    c = sb / (math.pi * z3 ** 1.5)
    # d/du [K1(sb u)/u] = -sb K0/u - 2 K1/u^2 and du/db = 1/(2 z3 u)
    d_db = c * (-sb * k0 / u - 2.0 * k1 / u ** 2) / (2.0 * z3 * u)
    out = -2.0 * d_db / (2.0 * math.pi * z1 ** 1.5 * z2 ** 1.5)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# reconstruction


def _kernel_fn(k, form):
    if form == "compact":
        return lambda *zs: m_kernel(k, zs)
    if form == "inverse":
        return lambda *xs: m_kernel_inverse(k, xs)
    if form == "recursive":
        return lambda *zs: four_orbital_recursive(k, zs)
    raise ValueError(f"unknown kernel form {form!r}")


def reconstruct_nested(k: ZetaKernel, form="compact", rel_tol=1e-8) -> EvalResult:
    """Deterministic (M-1)-fold integral of a kernel (M = 2 or 3)."""
    if k.m not in (2, 3):
        raise DomainError("deterministic reconstruction is for M = 2, 3")
    f = _kernel_fn(k, form)
    stars = k.zeta_star()
    if form == "inverse":
        stars = [1.0 / s for s in stars]
    # tanh-sinh: the kernel is smooth in log zeta, where DE converges fastest
    plans = [QuadraturePlan(rel_tol=rel_tol, scale=s, method="double-exponential") for s in stars]
    if k.m == 2:
        return integrate_1d(f, plans[0])
    return integrate_nd(f, plans)


def reconstruct_rho(k: ZetaKernel, zetas, rel_tol=1e-10) -> CheckedPair:
    """Numeric rho integral of the rho-form against the compact kernel."""
    a = float(k.a_form(zetas))
    b = float(k.b_form(zetas))
    peak = math.sqrt(a / (4.0 * b))
    res = integrate_1d(lambda r: m_kernel_rho(k, zetas, r),
                       QuadraturePlan(rel_tol=rel_tol, scale=peak, points=(peak,)))
    return CheckedPair("rho_form", res.value, float(m_kernel(k, zetas)), 1e-8, res.err_estimate)


def _log_t_sampler(centres, width, df=3.0):
    """Independent Student-t proposal in each log zeta (pilot stage)."""
    d = len(centres)
    return log_student_t_sampler(np.log(centres), np.eye(d) * width ** 2, df)


def reconstruct_mc(k: ZetaKernel, seed=0, n=4_000_000, form="compact",
                   n_pilot=100_000) -> EvalResult:
    """Seeded Monte-Carlo (M-1)-fold integral of the kernel (any M).

    A pilot run with a broad proposal fixes the location and correlation of
    the kernel in log zeta; the main run samples a multivariate t fitted to
    it.  Both stages draw from streams derived from ``seed``.
    """
    f = _kernel_fn(k, form)
    g = lambda X: f(*X.T)
    pilot_seed, main_seed = np.random.SeedSequence(seed).spawn(2)
    mu, cov = fit_log_proposal(g, _log_t_sampler(k.zeta_star(), 1.3),
                               seed=pilot_seed, n_pilot=n_pilot)
    domain = [(0.0, math.inf)] * (k.m - 1)
    return monte_carlo_oracle(g, domain, seed=main_seed, n=n,
                              sampler=log_student_t_sampler(mu, cov, 8.0))
