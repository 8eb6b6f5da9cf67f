"""Jacobi recurrence coefficients and finite truncation spectra.

The central data type `JacobiCoeffs` holds a finite prefix (a_1..a_N,
b_1..b_N) of three-term recurrence coefficients at a stated bit precision.
Zeros of the monic orthogonal polynomials are computed as eigenvalues of
the symmetric tridiagonal truncations, located by Sturm-count bisection
(vectorized in float64 for bracketing) and polished to working precision
by a bracket-safeguarded Newton iteration on the characteristic-polynomial
recurrence.  Bisection is preferred over shifted QL/QR because the spectra
of interest cluster at all scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .bigfloat import require_precision, workprec
from .errors import DomainError, LengthError, NumericalFailureError
from .measures import DiscreteMeasure

PROVENANCE_TAGS = ("exact-recursion", "lanczos", "chebyshev-moments", "synthetic")

# guard digits: eigenvalues converge to 2**(-p + EIG_GUARD) * scale,
# duplicates are flagged below 2**(-p + DUP_GUARD) * scale
EIG_GUARD = 6
DUP_GUARD = 20


@dataclass(frozen=True)
class JacobiCoeffs:
    """Finite prefix of recurrence coefficients: a_n > 0, b_n real."""

    a: tuple[mpfr, ...]
    b: tuple[mpfr, ...]
    precision_bits: int
    provenance: str

    def __post_init__(self):
        require_precision(self.precision_bits)
        if len(self.a) != len(self.b):
            raise LengthError("a and b must have the same length")
        if self.provenance not in PROVENANCE_TAGS:
            raise DomainError(f"unknown provenance tag {self.provenance!r}")
        for n, an in enumerate(self.a, start=1):
            if not an > 0:
                raise DomainError(f"a_{n} = {an} must be positive")

    @property
    def length(self) -> int:
        return len(self.a)

    def __len__(self) -> int:
        return len(self.a)

    def prefix(self, n: int) -> "JacobiCoeffs":
        if n > self.length:
            raise LengthError(f"prefix {n} exceeds length {self.length}")
        return JacobiCoeffs(self.a[:n], self.b[:n], self.precision_bits, self.provenance)

    def affine_mapped(self, alpha, beta) -> "JacobiCoeffs":
        """Coefficients of the measure pushed through x -> alpha*x + beta."""
        with workprec(self.precision_bits):
            alpha = mpfr(alpha)
            beta = mpfr(beta)
            if alpha == 0:
                raise DomainError("affine map must be invertible (alpha != 0)")
            a = tuple(abs(alpha) * an for an in self.a)
            b = tuple(alpha * bn + beta for bn in self.b)
        return JacobiCoeffs(a, b, self.precision_bits, self.provenance)

    def as_float_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([float(x) for x in self.a]),
            np.array([float(x) for x in self.b]),
        )


@dataclass(frozen=True)
class PolyEvalResult:
    """Orthonormal values P_0(x)..P_n(x); P_0 = 1 by the initial condition."""

    values: tuple[mpfr, ...]
    x: mpfr

    def __post_init__(self):
        if not self.values or self.values[0] != 1:
            raise DomainError("P_0 must equal 1")


@dataclass(frozen=True)
class SpectrumSample:
    """Strictly increasing eigenvalues of a (possibly perturbed) truncation."""

    eigenvalues: tuple[mpfr, ...]
    n: int
    perturbation_beta: mpfr
    dropped_rows: int

    def __post_init__(self):
        if len(self.eigenvalues) != self.n:
            raise LengthError("need exactly n eigenvalues")
        for i in range(1, self.n):
            if not self.eigenvalues[i] > self.eigenvalues[i - 1]:
                raise NumericalFailureError(
                    "eigenvalues must be strictly increasing", index=i
                )


def eval_orthonormal(coeffs: JacobiCoeffs, x, n: int) -> PolyEvalResult:
    """Run the three-term recurrence up from P_{-1}=0, P_0=1.

    Uses P_{k} = ((x - b_k) P_{k-1} - a_{k-1} P_{k-2}) / a_k, so requires
    n <= coeffs.length.
    """
    if n < 0:
        raise DomainError("polynomial degree must be >= 0")
    if n > coeffs.length:
        raise LengthError(f"n = {n} exceeds available coefficients ({coeffs.length})")
    with workprec(coeffs.precision_bits):
        x = mpfr(x)
        values = [mpfr(1)]
        prev = mpfr(0)
        for k in range(1, n + 1):
            cur = (x - coeffs.b[k - 1]) * values[-1]
            if k >= 2:
                cur -= coeffs.a[k - 2] * prev
            cur /= coeffs.a[k - 1]
            prev = values[-1]
            values.append(cur)
    return PolyEvalResult(tuple(values), x)


def monic_norm(coeffs: JacobiCoeffs, n: int) -> mpfr:
    """L2 norm of the n-th monic orthogonal polynomial: a_1 * ... * a_n.

    The empty product (n = 0) is 1.  Beyond n = 64 the product is formed
    in log space to avoid under/overflow of intermediate magnitudes.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n > coeffs.length:
        raise LengthError(f"n = {n} exceeds available coefficients ({coeffs.length})")
    with workprec(coeffs.precision_bits):
        if n == 0:
            return mpfr(1)
        if n <= 64:
            prod = mpfr(1)
            for k in range(n):
                prod *= coeffs.a[k]
            return prod
        acc = mpfr(0)
        for k in range(n):
            acc += gmpy2.log(coeffs.a[k])
        return gmpy2.exp(acc)


# ---------------------------------------------------------------------------
# tridiagonal eigensolver: float64 Sturm bisection + mpfr Newton polish
# ---------------------------------------------------------------------------


def _sturm_counts_f64(d: np.ndarray, e2: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Number of eigenvalues below each shift in xs (vectorized LDL pivots).

    Zero pivots are perturbed to -pivmin before counting, the standard
    bisection convention (an exact hit may count either side; brackets
    still converge).
    """
    pivmin = 1e-290
    q = d[0] - xs
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    counts = (q < 0).astype(np.int64)
    for i in range(1, d.size):
        q = (d[i] - xs) - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        counts += q < 0
    return counts


def _bisect_all_f64(d: np.ndarray, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bracket every eigenvalue to float64 resolution by Sturm bisection."""
    n = d.size
    radius = np.zeros(n)
    if n > 1:
        radius[:-1] += np.abs(e)
        radius[1:] += np.abs(e)
    glo = float((d - radius).min())
    ghi = float((d + radius).max())
    pad = 1e-12 * max(1.0, abs(glo), abs(ghi))
    lo = np.full(n, glo - pad)
    hi = np.full(n, ghi + pad)
    e2 = e * e
    idx = np.arange(n)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        counts = _sturm_counts_f64(d, e2, mid)
        below = counts <= idx
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) <= 1e-14 * max(1.0, abs(glo), abs(ghi)):
            break
    return lo, hi


def _sturm_count_mpfr(d, e2, x) -> int:
    """Exact-precision Sturm count used by the slow verification path."""
    tiny = gmpy2.exp2(mpfr(-4 * gmpy2.get_context().precision))
    q = d[0] - x
    if abs(q) < tiny:
        q = -tiny
    count = 1 if q < 0 else 0
    for i in range(1, len(d)):
        q = (d[i] - x) - e2[i - 1] / q
        if abs(q) < tiny:
            q = -tiny
        if q < 0:
            count += 1
    return count


def _charpoly_and_derivative(d, e2, x):
    """Monic characteristic polynomial of the truncation and its derivative,
    evaluated by the minor recurrence with periodic rescaling."""
    big = gmpy2.exp2(mpfr(512))
    small = 1 / big
    p_prev, dp_prev = mpfr(1), mpfr(0)
    p, dp = d[0] - x, mpfr(-1)
    for i in range(1, len(d)):
        p_next = (d[i] - x) * p - e2[i - 1] * p_prev
        dp_next = -p + (d[i] - x) * dp - e2[i - 1] * dp_prev
        p_prev, dp_prev = p, dp
        p, dp = p_next, dp_next
        m = max(abs(p), abs(dp), abs(p_prev), abs(dp_prev))
        if m > big or (m < small and m > 0):
            p, dp, p_prev, dp_prev = p / m, dp / m, p_prev / m, dp_prev / m
    return p, dp


def _bisect_root_mpfr(d, e2, k, lo, hi, tol):
    """Pure-mpfr Sturm bisection fallback for the k-th eigenvalue."""
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        if _sturm_count_mpfr(d, e2, mid) <= k:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _refine_root_mpfr(d, e2, x0, lo, hi, tol, k):
    """Bracket-safeguarded Newton polish of one eigenvalue."""
    x = mpfr(x0)
    if not (lo <= x <= hi):
        x = (lo + hi) / 2
    for _ in range(80):
        p, dp = _charpoly_and_derivative(d, e2, x)
        if dp == 0:
            return _bisect_root_mpfr(d, e2, k, lo, hi, tol)
        step = p / dp
        nxt = x - step
        if not (lo <= nxt <= hi):
            return _bisect_root_mpfr(d, e2, k, lo, hi, tol)
        x = nxt
        if abs(step) <= tol * max(1, abs(x)):
            return x
    raise NumericalFailureError(
        f"Newton polish did not converge for eigenvalue {k}", index=k
    )


def tridiag_eigenvalues(diag, offdiag, precision_bits: int) -> list[mpfr]:
    """All eigenvalues of a symmetric tridiagonal matrix, sorted ascending.

    Bracketing is done by vectorized float64 Sturm bisection; when the
    requested precision exceeds float64 each root is polished by Newton
    on the characteristic-polynomial recurrence inside its bracket, with a
    pure-mpfr Sturm bisection as the fallback.  A gap below
    2**(-p+20)*scale between neighbours signals numerical failure, since an
    irreducible tridiagonal matrix cannot have multiple eigenvalues.
    """
    n = len(diag)
    if n == 0:
        return []
    with workprec(precision_bits):
        d = [mpfr(x) for x in diag]
        e = [mpfr(x) for x in offdiag]
        if n == 1:
            return [d[0]]
        e2 = [x * x for x in e]
        df = np.array([float(x) for x in d])
        ef = np.array([float(x) for x in e])
        lo_f, hi_f = _bisect_all_f64(df, ef)
        scale = max(1.0, float(np.abs(df).max() + 2.0 * np.abs(ef).max()))
        tol = gmpy2.exp2(mpfr(EIG_GUARD - precision_bits)) * scale
        slack = mpfr(1e-11) * scale
        roots: list[mpfr] = []
        if precision_bits <= 56:
            roots = [mpfr(0.5 * (a_ + b_)) for a_, b_ in zip(lo_f, hi_f)]
        else:
            for k in range(n):
                lo = mpfr(lo_f[k]) - slack
                hi = mpfr(hi_f[k]) + slack
                x0 = mpfr(0.5 * (lo_f[k] + hi_f[k]))
                roots.append(_refine_root_mpfr(d, e2, x0, lo, hi, tol, k))
        dup = gmpy2.exp2(mpfr(DUP_GUARD - precision_bits)) * scale
        for k in range(1, n):
            if roots[k] - roots[k - 1] <= dup:
                # try to salvage with the exact bisection before failing
                roots[k - 1] = _bisect_root_mpfr(
                    d, e2, k - 1, mpfr(lo_f[k - 1]) - slack, mpfr(hi_f[k - 1]) + slack, tol
                )
                roots[k] = _bisect_root_mpfr(
                    d, e2, k, mpfr(lo_f[k]) - slack, mpfr(hi_f[k]) + slack, tol
                )
                if roots[k] - roots[k - 1] <= dup:
                    raise NumericalFailureError(
                        f"eigenvalues {k-1} and {k} collide within 2^{DUP_GUARD - precision_bits}",
                        index=k,
                    )
        return roots


def truncation_zeros(coeffs: JacobiCoeffs, n: int) -> SpectrumSample:
    """Zeros of the n-th monic orthogonal polynomial, i.e. the eigenvalues
    of the top-left n x n truncation of the Jacobi matrix."""
    if n < 1:
        raise DomainError("truncation order must be >= 1")
    if n > coeffs.length:
        raise LengthError(f"n = {n} exceeds available coefficients ({coeffs.length})")
    evs = tridiag_eigenvalues(coeffs.b[:n], coeffs.a[: n - 1], coeffs.precision_bits)
    with workprec(coeffs.precision_bits):
        beta0 = mpfr(0)
    return SpectrumSample(tuple(evs), n, beta0, 0)


def dos_measure(coeffs: JacobiCoeffs, n: int) -> DiscreteMeasure:
    """Normalized counting measure on the zeros of p_n (weight 1/n each)."""
    sample = truncation_zeros(coeffs, n)
    with workprec(coeffs.precision_bits):
        w = mpfr(1) / n
        weights = tuple(w for _ in range(n))
    return DiscreteMeasure(sample.eigenvalues, weights, coeffs.precision_bits)


def perturbed_truncation_spectrum(
    coeffs: JacobiCoeffs, beta, drop_first: int, n: int
) -> SpectrumSample:
    """Spectrum of the n x n truncation after deleting the first `drop_first`
    rows/columns and adding beta to the new (1,1) entry.

    drop_first = 1 realizes the once-stripped operator; beta != 0 realizes
    the rank-one perturbation beta <delta_1, .> delta_1.
    """
    if drop_first not in (0, 1):
        raise DomainError("drop_first must be 0 or 1")
    if n < 1:
        raise DomainError("truncation order must be >= 1")
    if n + drop_first > coeffs.length:
        raise LengthError(
            f"n + drop_first = {n + drop_first} exceeds available coefficients"
        )
    with workprec(coeffs.precision_bits):
        beta = mpfr(beta)
        diag = list(coeffs.b[drop_first : drop_first + n])
        diag[0] = diag[0] + beta
        off = list(coeffs.a[drop_first : drop_first + n - 1])
    evs = tridiag_eigenvalues(diag, off, coeffs.precision_bits)
    return SpectrumSample(tuple(evs), n, beta, drop_first)
