"""Working-precision helpers on top of gmpy2 (MPFR/MPC backend).

All arithmetic in the package runs in binary floating point at an explicit
precision in bits.  Every public operation opens a `workprec` block for the
precision of its inputs, so callers never need to touch the gmpy2 context
themselves.  Values remember the precision they were created at.

Decimal serialization relies on gmpy2 printing a shortest exact decimal
representation: a value written with `to_decimal` and re-read with
`from_decimal` at the same bit precision is bit-identical.
"""

from __future__ import annotations

import contextlib
from typing import Iterator, Union

import gmpy2
from gmpy2 import mpc, mpfr

DEFAULT_PRECISION = 256
MIN_PRECISION = 53

RealLike = Union[int, float, str, mpfr]
ComplexLike = Union[int, float, str, complex, mpfr, mpc]


def require_precision(bits: int) -> int:
    """Validate a precision request (must be an int >= 53 bits)."""
    bits = int(bits)
    if bits < MIN_PRECISION:
        raise ValueError(f"precision_bits must be >= {MIN_PRECISION}, got {bits}")
    return bits


@contextlib.contextmanager
def workprec(bits: int) -> Iterator[None]:
    """Temporarily set the thread-local working precision in bits."""
    bits = require_precision(bits)
    saved = gmpy2.get_context()
    gmpy2.set_context(gmpy2.context(saved, precision=bits))
    try:
        yield
    finally:
        gmpy2.set_context(saved)


def mpf(value: RealLike, bits: int | None = None) -> mpfr:
    """Construct an mpfr at `bits` (or the active context precision)."""
    if bits is None:
        return mpfr(value)
    return mpfr(value, require_precision(bits))


def mpcx(value: ComplexLike | tuple, bits: int | None = None) -> mpc:
    """Construct an mpc at `bits` (or the active context precision)."""
    if isinstance(value, (complex, mpc)):
        re, im = value.real, value.imag
    elif isinstance(value, tuple):
        re, im = value
    else:
        re, im = value, 0
    if bits is None:
        return mpc(mpfr(re), mpfr(im))
    bits = require_precision(bits)
    return mpc(mpfr(re, bits), mpfr(im, bits))


def to_decimal(x: mpfr) -> str:
    """Exactly round-trippable decimal string for an mpfr value."""
    return str(x)


def from_decimal(s: str, bits: int) -> mpfr:
    """Parse a decimal string at an explicit bit precision."""
    return mpfr(s, require_precision(bits))


def eps(bits: int) -> mpfr:
    """Unit roundoff 2**(1-bits) at the given precision."""
    return gmpy2.exp2(mpfr(1 - require_precision(bits)))


def tolerance(bits: int, guard: int = 10) -> mpfr:
    """Convergence tolerance 2**(-bits+guard) used throughout the package."""
    return gmpy2.exp2(mpfr(guard - require_precision(bits)))


def prec_of(*values: mpfr) -> int:
    """Largest creation precision among mpfr values (>= MIN_PRECISION)."""
    best = MIN_PRECISION
    for v in values:
        best = max(best, v.precision)
    return best
