"""Shared fixtures; the expensive pipeline objects are session-scoped."""

import time

import pytest

import cantorlab as cl


@pytest.fixture(scope="session")
def julia3_spec():
    return cl.PolySequenceSpec.quadratic(3, 256)


@pytest.fixture(scope="session")
def julia3_exact_64(julia3_spec):
    return cl.julia_exact_coeffs(3, 64, 256)


@pytest.fixture(scope="session")
def julia3_exact_10k():
    # long enough for the n <= 10^4 Widom sweep and the tail+window scans
    return cl.julia_exact_coeffs(3, 10240, 256)


@pytest.fixture(scope="session")
def criterion1_pipeline(julia3_spec):
    """The exact-vs-Lanczos cross-check at full scale, with its wall time."""
    t0 = time.perf_counter()
    exact = cl.julia_exact_coeffs(3, 64, 256)
    orbit = cl.julia_inverse_orbit(julia3_spec, 14)
    lanczos = cl.lanczos_from_discrete(orbit, 64)
    seconds = time.perf_counter() - t0
    return {"exact": exact, "orbit": orbit, "lanczos": lanczos, "seconds": seconds}


@pytest.fixture(scope="session")
def orbit14(criterion1_pipeline):
    return criterion1_pipeline["orbit"]


@pytest.fixture(scope="session")
def lanczos64_orbit14(criterion1_pipeline):
    return criterion1_pipeline["lanczos"]


@pytest.fixture(scope="session")
def cantor_ifs():
    return cl.AffineIFS.cantor(256)


@pytest.fixture(scope="session")
def cantor_fast_4096(cantor_ifs):
    positions, weights = cl.ifs_refine_f64(cantor_ifs, 18)
    return cl.stieltjes_fast(positions, weights, 4096)


@pytest.fixture(scope="session")
def gamma8_spec():
    return cl.PolySequenceSpec.gamma_constant("0.125", 64, 256)
