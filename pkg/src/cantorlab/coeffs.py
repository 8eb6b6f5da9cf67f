"""Three independent routes to Jacobi recurrence coefficients.

* `julia_exact_coeffs`: the closed recursion for the balanced measure of
  z**2 - c with c > 2, worked entirely in the squared domain.
* `lanczos_from_discrete`: Stieltjes/Lanczos tridiagonalization of a
  discrete measure at working precision with full reorthogonalization.
* `chebyshev_from_moments`: the classical moment-to-coefficient map, run
  at escalated precision because it loses a fixed number of digits per
  coefficient.

`stieltjes_fast` is the large-N float64 companion of the Lanczos route
(plain Stieltjes sweep, no reorthogonalization): full reorthogonalization
costs O(N^2 * atoms) and is out of reach for the 10^3..10^4 coefficient
runs the diagnostics need, while the geometric-mean-level quantities those
runs feed (regularity indices, Widom series, almost-period scans) are
insensitive to the late-coefficient noise the plain sweep admits.  The
trusted prefix of every fast sweep is cross-checked against the big-float
route in the test suite.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .bigfloat import workprec
from .errors import (
    ConsistencyError,
    DomainError,
    LengthError,
    PrecisionExhaustedError,
)
from .jacobi import JacobiCoeffs
from .measures import DiscreteMeasure, MomentVector

# default trust rule: a Lanczos run on M atoms approximates the underlying
# measure's coefficients for n <= M / TRUST_DIVISOR
TRUST_DIVISOR = 64


def trusted_prefix_length(atom_count: int, divisor: int = TRUST_DIVISOR) -> int:
    return atom_count // divisor


def stabilized_prefix_length(
    coarse: JacobiCoeffs, fine: JacobiCoeffs, tol
) -> int:
    """Empirical trust check: length of the prefix on which two successive
    refinement levels agree entrywise within tol."""
    n = min(coarse.length, fine.length)
    with workprec(max(coarse.precision_bits, fine.precision_bits)):
        tol = mpfr(tol)
        for k in range(n):
            if abs(coarse.a[k] - fine.a[k]) > tol or abs(coarse.b[k] - fine.b[k]) > tol:
                return k
    return n


def julia_exact_coeffs(c, N: int, precision_bits: int = 256) -> JacobiCoeffs:
    """Recurrence coefficients of the balanced measure of z**2 - c, c > 2.

    Works in the squared domain: s_1 = c, s_{2n} = s_n / s_{2n-1},
    s_{2n+1} = c - s_{2n}, all b_n = 0; square roots are taken only on
    output.  Any s outside (0, c) signals precision exhaustion, never a
    valid state.
    """
    if N < 1:
        raise LengthError("N must be >= 1")
    with workprec(precision_bits):
        c = mpfr(c)
        if not c > 2:
            raise DomainError(f"the quadratic family needs c > 2, got {c}")
        s = [mpfr(0)] * (N + 1)
        s[1] = c
        for m in range(2, N + 1):
            s[m] = s[m // 2] / s[m - 1] if m % 2 == 0 else c - s[m - 1]
            if not (0 < s[m] < c):
                raise ConsistencyError(
                    f"a_{m}^2 = {s[m]} left (0, c); working precision exhausted"
                )
        a = tuple(gmpy2.sqrt(s[m]) for m in range(1, N + 1))
        zero = mpfr(0)
        b = tuple(zero for _ in range(N))
    return JacobiCoeffs(a, b, precision_bits, "exact-recursion")


def _dot(u, v):
    return sum(map(operator.mul, u, v))


def lanczos_from_discrete(
    measure: DiscreteMeasure, N: int, precision_bits: int | None = None
) -> JacobiCoeffs:
    """First N recurrence coefficients of a discrete measure.

    Stieltjes/Lanczos sweep on multiplication-by-x at working precision,
    with full (not selective) reorthogonalization: Cantor-type supports
    cluster atoms at all scales, the worst case for orthogonality loss.
    """
    atoms = len(measure)
    if N >= atoms:
        raise LengthError(f"N = {N} must be smaller than the atom count {atoms}")
    p = precision_bits if precision_bits is not None else measure.precision_bits
    if N == 0:
        return JacobiCoeffs((), (), p, "lanczos")
    for i in range(1, atoms):
        if measure.positions[i] == measure.positions[i - 1]:
            raise DomainError(f"atoms must be distinct (tie at index {i})")
    with workprec(p):
        x = [mpfr(t) for t in measure.positions]
        q = [gmpy2.sqrt(mpfr(w)) for w in measure.weights]
        nrm = gmpy2.sqrt(_dot(q, q))
        q = [qi / nrm for qi in q]
        basis = [q]
        q_prev = None
        a_prev = None
        a_out: list[mpfr] = []
        b_out: list[mpfr] = []
        floor = gmpy2.exp2(mpfr(-(p // 2)))
        for k in range(N):
            r = list(map(operator.mul, x, q))
            bk = _dot(r, q)
            if q_prev is None:
                r = [ri - bk * qi for ri, qi in zip(r, q)]
            else:
                r = [
                    ri - bk * qi - a_prev * pi
                    for ri, qi, pi in zip(r, q, q_prev)
                ]
            for qq in basis:
                cc = _dot(qq, r)
                if cc != 0:
                    r = [ri - cc * qi for ri, qi in zip(r, qq)]
            ak = gmpy2.sqrt(_dot(r, r))
            if not ak > floor:
                raise PrecisionExhaustedError(
                    f"norm underflow at coefficient {k + 1} (a = {ak})", index=k + 1
                )
            a_out.append(ak)
            b_out.append(bk)
            q_prev, a_prev = q, ak
            q = [ri / ak for ri in r]
            if k + 1 < N:
                basis.append(q)
    return JacobiCoeffs(tuple(a_out), tuple(b_out), p, "lanczos")


def stieltjes_fast(positions: np.ndarray, weights: np.ndarray, N: int) -> JacobiCoeffs:
    """Vectorized float64 Stieltjes sweep (no reorthogonalization).

    The large-N companion of `lanczos_from_discrete`; see the module
    docstring for when this is the right tool.
    """
    atoms = positions.size
    if N >= atoms:
        raise LengthError(f"N = {N} must be smaller than the atom count {atoms}")
    if N == 0:
        return JacobiCoeffs((), (), 53, "lanczos")
    a = np.empty(N)
    b = np.empty(N)
    p_prev = np.zeros_like(positions)
    p = np.sqrt(weights)
    p /= np.sqrt((p * p).sum())
    a_prev = 0.0
    for k in range(N):
        xp = positions * p
        bk = (xp * p).sum()
        r = xp - bk * p - a_prev * p_prev
        ak = np.sqrt((r * r).sum())
        if not ak > 0:
            raise PrecisionExhaustedError(
                f"norm underflow at coefficient {k + 1}", index=k + 1
            )
        a[k] = ak
        b[k] = bk
        p_prev = p
        p = r / ak
        a_prev = ak
    return coeffs_from_float_arrays(a, b)


def coeffs_from_float_arrays(
    a: np.ndarray, b: np.ndarray, provenance: str = "lanczos"
) -> JacobiCoeffs:
    """Wrap float64 coefficient arrays as 53-bit JacobiCoeffs (exactly)."""
    with workprec(53):
        at = tuple(mpfr(float(x)) for x in a)
        bt = tuple(mpfr(float(x)) for x in b)
    return JacobiCoeffs(at, bt, 53, provenance)


def chebyshev_from_moments(
    moments: MomentVector, N: int, precision_bits: int | None = None
) -> JacobiCoeffs:
    """First N coefficients from raw moments m_0..m_2N (Chebyshev algorithm).

    The algorithm loses roughly a constant number of digits per
    coefficient, so it runs at max(256, 8N, input precision) bits unless
    told otherwise.  A nonpositive Hankel pivot raises with the failing
    order: for exact moments that means N exceeded the measure's support
    size, otherwise the working precision was exhausted.
    """
    if N < 1:
        raise LengthError("N must be >= 1")
    if moments.order < 2 * N:
        raise LengthError(
            f"need moments to order {2 * N}, only {moments.order} available"
        )
    p = (
        precision_bits
        if precision_bits is not None
        else max(256, 8 * N, moments.precision_bits)
    )
    with workprec(p):
        m = [mpfr(v) for v in moments.moments[: 2 * N + 1]]
        alphas = [m[1] / m[0]]
        betas = [m[0]]  # beta_0 = m_0, not used as a coefficient
        sig_prev = [mpfr(0)] * (2 * N + 1)
        sig = list(m)
        for k in range(1, N + 1):
            nxt = [mpfr(0)] * (2 * N + 1)
            for l in range(k, 2 * N - k + 1):
                nxt[l] = (
                    sig[l + 1]
                    - alphas[k - 1] * sig[l]
                    - betas[k - 1] * sig_prev[l]
                )
            if not nxt[k] > 0:
                raise PrecisionExhaustedError(
                    f"Hankel pivot sigma_{k},{k} = {nxt[k]} is not positive",
                    index=k,
                )
            betas.append(nxt[k] / sig[k - 1])
            if k < N:
                alphas.append(nxt[k + 1] / nxt[k] - sig[k] / sig[k - 1])
            sig_prev, sig = sig, nxt
        a = tuple(gmpy2.sqrt(betas[j]) for j in range(1, N + 1))
        b = tuple(alphas[j] for j in range(N))
    return JacobiCoeffs(a, b, p, "chebyshev-moments")


def chebyshev_validated(
    moment_provider: Callable[[int], MomentVector],
    N: int,
    reference: JacobiCoeffs,
    tol,
    precision_cap: int = 1 << 15,
) -> JacobiCoeffs:
    """Escalation wrapper for the moment route.

    Runs the Chebyshev algorithm at max(256, 8N) bits, verifies against an
    independently produced reference prefix, and doubles the precision on
    disagreement until the cap.
    """
    p = max(256, 8 * N)
    n_cmp = min(N, reference.length)
    while True:
        cand = chebyshev_from_moments(moment_provider(p), N, p)
        report = cross_validate(cand, reference, n_cmp, tol)
        if report.first_divergence_index is None:
            return cand
        p *= 2
        if p > precision_cap:
            raise PrecisionExhaustedError(
                f"moment route disagrees with the reference beyond {precision_cap} bits",
                index=report.first_divergence_index,
            )


@dataclass(frozen=True)
class CrossValidationReport:
    """Entrywise comparison of two coefficient prefixes."""

    n_compared: int
    max_abs_dev_a: mpfr
    max_abs_dev_b: mpfr
    first_divergence_index: int | None

    def __post_init__(self):
        if self.max_abs_dev_a < 0 or self.max_abs_dev_b < 0:
            raise DomainError("deviations must be nonnegative")
        if (
            self.first_divergence_index is not None
            and self.first_divergence_index > self.n_compared
        ):
            raise DomainError("divergence index exceeds n_compared")


def cross_validate(
    lhs: JacobiCoeffs, rhs: JacobiCoeffs, N: int, tol
) -> CrossValidationReport:
    """Max entrywise deviations over the first N coefficients and the first
    1-based index (if any) where either deviation exceeds tol."""
    if N > lhs.length or N > rhs.length:
        raise LengthError(f"N = {N} exceeds one of the operand lengths")
    with workprec(max(lhs.precision_bits, rhs.precision_bits)):
        tol = mpfr(tol)
        dev_a = mpfr(0)
        dev_b = mpfr(0)
        first: int | None = None
        for k in range(N):
            da = abs(lhs.a[k] - rhs.a[k])
            db = abs(lhs.b[k] - rhs.b[k])
            dev_a = max(dev_a, da)
            dev_b = max(dev_b, db)
            if first is None and (da > tol or db > tol):
                first = k + 1
    return CrossValidationReport(N, dev_a, dev_b, first)
