"""Potential-theoretic quantities: capacity, Green functions, Lyapunov exponents.

Capacity comes in two independent flavours: `robin_capacity` telescopes the
leading coefficients of the defining polynomial sequence, while
`capacity_from_coeffs` Richardson-extrapolates the geometric means
(a_1...a_n)**(1/n), which converge to the capacity of the support for
regular measures.  `transfer_product`/`lyapunov_approx` build the 2x2
transfer-matrix cocycle with per-step rescaling, and `green_julia`
evaluates the Green function through forward iteration with overflow-safe
log tracking.  Agreement of the last two on the upper half plane is the
finite-scale form of the Lyapunov = Green identity for regular almost
periodic operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .bigfloat import mpcx, workprec
from .errors import DomainError, LengthError
from .jacobi import JacobiCoeffs
from .measures import GAMMA_JULIA, QUADRATIC_JULIA, PolySequenceSpec

CAPACITY_METHODS = ("robin-recursion", "coefficient-extrapolation")

# switch from complex iteration to pure log updates once the magnitude
# exponent passes this bound (far beyond any overflow risk either way)
_LOG_SWITCH_EXPONENT = 1 << 20


@dataclass(frozen=True)
class TransferMatrix:
    """Rescaled ordered product of one-step transfer matrices.

    The true product equals exp(log_scale) * entries; rescaling keeps the
    stored entries at magnitude O(1) regardless of n.
    """

    entries: tuple[tuple[mpc, mpc], tuple[mpc, mpc]]
    log_scale: mpfr

    def __post_init__(self):
        for row in self.entries:
            for v in row:
                if not (gmpy2.is_finite(v.real) and gmpy2.is_finite(v.imag)):
                    raise DomainError("transfer matrix entries must be finite")
        if not gmpy2.is_finite(self.log_scale):
            raise DomainError("log scale must be finite")

    def det(self) -> mpc:
        (m11, m12), (m21, m22) = self.entries
        return m11 * m22 - m12 * m21

    def spectral_norm(self) -> mpfr:
        """Largest singular value of the rescaled entries."""
        (m11, m12), (m21, m22) = self.entries
        g11 = gmpy2.norm(m11) + gmpy2.norm(m21)
        g22 = gmpy2.norm(m12) + gmpy2.norm(m22)
        g12 = m11.conjugate() * m12 + m21.conjugate() * m22
        half_diff = (g11 - g22) / 2
        lam = (g11 + g22) / 2 + gmpy2.sqrt(half_diff * half_diff + gmpy2.norm(g12))
        return gmpy2.sqrt(lam)

    def log_norm(self) -> mpfr:
        """log of the spectral norm of the true (unscaled) product."""
        return gmpy2.log(self.spectral_norm()) + self.log_scale


@dataclass(frozen=True)
class CapacityEstimate:
    """A capacity value with its method tag and an uncertainty radius."""

    value: mpfr
    method: str
    uncertainty: mpfr

    def __post_init__(self):
        if self.method not in CAPACITY_METHODS:
            raise DomainError(f"unknown capacity method {self.method!r}")
        if not self.value > 0:
            raise DomainError("capacity must be positive")
        if self.uncertainty < 0:
            raise DomainError("uncertainty must be nonnegative")


def robin_capacity(spec: PolySequenceSpec, levels: int) -> CapacityEstimate:
    """Capacity from leading-coefficient growth of the composed sequence.

    log lc(F_l) telescopes to deg(F_l) * sum_k 2**(-k) log lc_k, so the
    capacity is exp(-sum).  Monic maps give capacity 1 exactly; for the
    gamma family the unseen tail is bounded through the gamma lower-bound
    witness and reported as the uncertainty.
    """
    if levels < 1:
        raise DomainError("levels must be >= 1")
    if spec.kind == GAMMA_JULIA and levels > len(spec.gamma):
        raise LengthError(
            f"levels = {levels} exceeds stored gamma prefix of length {len(spec.gamma)}"
        )
    with workprec(spec.precision_bits):
        acc = mpfr(0)
        for k in range(1, levels + 1):
            acc += gmpy2.log(spec.leading_coeff(k)) * gmpy2.exp2(mpfr(-k))
        value = gmpy2.exp(-acc)
        if spec.kind == QUADRATIC_JULIA:
            uncertainty = mpfr(0)
        else:
            tail = gmpy2.exp2(mpfr(-levels)) * gmpy2.log(1 / (2 * spec.gamma_lower()))
            uncertainty = value * (-gmpy2.expm1(-tail))
    return CapacityEstimate(value, "robin-recursion", uncertainty)


def capacity_from_coeffs(coeffs: JacobiCoeffs, N: int) -> CapacityEstimate:
    """Richardson-extrapolated limit of the geometric means (a_1..a_n)**(1/n).

    Valid as a capacity estimate when the source measure is regular.  The
    uncertainty is the spread of the extrapolation stages, never below the
    distance between the raw g_N and the extrapolant, and is doubled when
    the stages do not improve monotonically (erratic tail) -- the estimate
    is always returned, never silently dropped.
    """
    if N < 2:
        raise LengthError("need N >= 2 coefficients to extrapolate")
    if N > coeffs.length:
        raise LengthError(f"N = {N} exceeds available coefficients ({coeffs.length})")
    with workprec(coeffs.precision_bits):
        cum = mpfr(0)
        cums = [mpfr(0)] * (N + 1)
        for k in range(1, N + 1):
            cum += gmpy2.log(coeffs.a[k - 1])
            cums[k] = cum
        ns = [N]
        while ns[-1] // 2 >= max(4, N // 8):
            ns.append(ns[-1] // 2)
        ns = ns[:4]
        s = [cums[n] / n for n in ns]
        if len(s) < 2:
            value = gmpy2.exp(s[0])
            uncertainty = value
            return CapacityEstimate(value, "coefficient-extrapolation", uncertainty)
        r = [2 * s[j] - s[j + 1] for j in range(len(s) - 1)]
        est_log = r[0]
        spreads = [abs(r[j] - r[j + 1]) for j in range(len(r) - 1)]
        u_log = abs(r[0] - s[0])
        for sp in spreads:
            u_log = max(u_log, sp)
        if len(spreads) >= 2 and spreads[0] > spreads[1]:
            u_log *= 2
        # a hair of inflation so the radius covers its own roundoff
        u_log *= 1 + gmpy2.exp2(mpfr(-20))
        value = gmpy2.exp(est_log)
        uncertainty = value * gmpy2.expm1(u_log)
    return CapacityEstimate(value, "coefficient-extrapolation", uncertainty)


def transfer_product(coeffs: JacobiCoeffs, z, n: int) -> TransferMatrix:
    """Ordered product M_n(z) ... M_1(z) with per-step rescaling.

    One-step factor: [[(z - b_k)/a_k, -a_{k-1}/a_k], [1, 0]] with the
    convention a_0 = 1 (the one-sided sequence leaves a_0 undefined; the
    Lyapunov limit is insensitive to one bounded factor, and determinism
    requires pinning it).
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n > coeffs.length:
        raise LengthError(f"n = {n} exceeds available coefficients ({coeffs.length})")
    with workprec(coeffs.precision_bits):
        z = mpcx(z)
        if z.imag < 0:
            raise DomainError("transfer products are evaluated for Im z >= 0")
        one = mpc(mpfr(1), mpfr(0))
        zero = mpc(mpfr(0), mpfr(0))
        m11, m12, m21, m22 = one, zero, zero, one
        log_scale = mpfr(0)
        a_prev = mpfr(1)
        for k in range(1, n + 1):
            ak = coeffs.a[k - 1]
            t11 = (z - coeffs.b[k - 1]) / ak
            t12 = -a_prev / ak
            n11 = t11 * m11 + t12 * m21
            n12 = t11 * m12 + t12 * m22
            n21, n22 = m11, m12
            m11, m12, m21, m22 = n11, n12, n21, n22
            mag = max(abs(m11), abs(m12), abs(m21), abs(m22))
            if mag > 0 and mag != 1:
                m11, m12, m21, m22 = m11 / mag, m12 / mag, m21 / mag, m22 / mag
                log_scale += gmpy2.log(mag)
            a_prev = ak
        return TransferMatrix(((m11, m12), (m21, m22)), log_scale)


def lyapunov_approx(coeffs: JacobiCoeffs, z, n: int) -> mpfr:
    """Finite-n Lyapunov exponent (1/n) log ||M^(n)(z)|| (spectral norm)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    product = transfer_product(coeffs, z, n)
    with workprec(coeffs.precision_bits):
        return product.log_norm() / n


@dataclass(frozen=True)
class GreenValue:
    """A Green-function sample: value, uncertainty radius, escape flag.

    `escaped` is False when the forward orbit never left the escape
    radius (the slow-convergence region near the set); the uncertainty is
    then inflated to cover the whole admissible range of the value.
    """

    value: mpfr
    uncertainty: mpfr
    escaped: bool


def escape_radius(spec: PolySequenceSpec) -> mpfr:
    """Radius beyond which forward orbits grow monotonically (factor >= 2)."""
    with workprec(spec.precision_bits):
        if spec.kind == QUADRATIC_JULIA:
            return 2 * gmpy2.sqrt(spec.c + 1)
        return 2 * (1 + spec.witness_a2())


def green_julia(spec: PolySequenceSpec, z, levels: int) -> GreenValue:
    """Green function via deg(F_l)**-1 * log|F_l(z)| by forward composition.

    Once the orbit's magnitude exponent is astronomically large the update
    switches to the exact asymptotic form log|w_next| = d log|w| + log lc;
    the bounded correction terms are accumulated into the uncertainty.
    """
    if levels < 1:
        raise DomainError("levels must be >= 1")
    if spec.kind == GAMMA_JULIA and levels > len(spec.gamma):
        raise LengthError(
            f"levels = {levels} exceeds stored gamma prefix of length {len(spec.gamma)}"
        )
    with workprec(spec.precision_bits):
        w = mpcx(z)
        radius = escape_radius(spec)
        a2 = spec.witness_a2()
        log_magnitude: mpfr | None = None
        corr_acc = mpfr(0)
        for i in range(1, levels + 1):
            if log_magnitude is None:
                w = spec.apply_map(i, w)
                mag = abs(w)
                if mag > 0 and gmpy2.get_exp(mag) > _LOG_SWITCH_EXPONENT:
                    log_magnitude = gmpy2.log(mag)
            else:
                # |f_i(w)| = |lc| |w|^2 |1 + low/(lc w^2)| with
                # |low| <= A2 |lc| (|w| + 1), so the log correction is
                # bounded by 2 q, q = 2 A2 / |w|
                q = 2 * a2 * gmpy2.exp(-log_magnitude)
                corr_acc += 2 * q * gmpy2.exp2(mpfr(-i))
                log_magnitude = 2 * log_magnitude + gmpy2.log(spec.leading_coeff(i))
        if log_magnitude is None:
            mag = abs(w)
            if mag == 0:
                raise DomainError("forward orbit hit an exact zero of the composition")
            log_magnitude = gmpy2.log(mag)
            escaped = mag > radius
        else:
            escaped = True
        scale = gmpy2.exp2(mpfr(-levels))
        value = scale * log_magnitude
        if escaped:
            if spec.kind == QUADRATIC_JULIA:
                max_log_lc = mpfr(0)
            else:
                max_log_lc = gmpy2.log(1 / (2 * spec.gamma_lower()))
            uncertainty = corr_acc + scale * (max_log_lc + 1)
        else:
            uncertainty = abs(value) + scale * (gmpy2.log(radius) + 1)
    return GreenValue(value, uncertainty, escaped)
