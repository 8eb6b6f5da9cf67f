import gmpy2
import pytest
from gmpy2 import mpfr

import cantorlab as cl
from cantorlab.bigfloat import mpf, workprec
from cantorlab.coeffs import stabilized_prefix_length
from cantorlab.errors import DomainError, LengthError, PrecisionExhaustedError


# --- julia_exact_coeffs ------------------------------------------------------


def test_exact_a1_is_sqrt_c():
    for c in ("2.5", "3", "4"):
        co = cl.julia_exact_coeffs(c, 1, 128)
        with workprec(128):
            assert abs(co.a[0] - gmpy2.sqrt(mpf(c))) < mpf(2) ** -120


def test_exact_a2_is_one_for_any_c():
    for c in ("2.1", "3", "7.5"):
        co = cl.julia_exact_coeffs(c, 2, 128)
        with workprec(128):
            assert abs(co.a[1] - 1) < mpf(2) ** -120


def test_exact_hand_iterated_values():
    co = cl.julia_exact_coeffs(3, 5, 256)
    with workprec(256):
        squares = [a * a for a in co.a]
        expected = [mpf(3), mpf(1), mpf(2), mpf(1) / 2, mpf(5) / 2]
        for got, want in zip(squares, expected):
            assert abs(got - want) < mpf(2) ** -250
    assert all(b == 0 for b in co.b)
    assert co.provenance == "exact-recursion"


def test_exact_requires_c_above_2():
    with pytest.raises(DomainError):
        cl.julia_exact_coeffs(2, 8, 128)


def test_exact_identity_residual_tiny(julia3_exact_10k):
    res = cl.julia_identity_residual(julia3_exact_10k, 3)
    assert res <= mpfr(2) ** (-256 + 10)


def test_exact_squares_stay_in_range():
    # empirical infima over n <= 2048, frozen from a development run with a
    # factor-2 slack: c=3 -> 4.70e-4, c=4 -> 1.07e-5
    floors = {"2.5": None, "3": "2.3e-4", "4": "5.3e-6"}
    for c, floor in floors.items():
        co = cl.julia_exact_coeffs(c, 2048, 128)
        with workprec(128):
            cv = mpf(c)
            # re-squaring the rounded square roots can land exactly on c
            upper = cv * (1 + mpf(2) ** -120)
            squares = [a * a for a in co.a]
            assert all(0 < s < upper for s in squares)
            if floor is not None:
                # c >= 3: almost periodicity keeps coefficients off zero
                assert min(squares) > mpf(floor)


# --- lanczos_from_discrete ---------------------------------------------------


def test_lanczos_two_atom_measure():
    m = cl.DiscreteMeasure(
        (mpf(-1, 256), mpf(1, 256)), (mpf("0.5", 256), mpf("0.5", 256)), 256
    )
    co = cl.lanczos_from_discrete(m, 1)
    with workprec(256):
        assert abs(co.a[0] - 1) < mpf(2) ** -250
        assert abs(co.b[0]) < mpf(2) ** -250


def test_lanczos_rejects_large_n():
    m = cl.DiscreteMeasure(
        (mpf(-1, 128), mpf(1, 128)), (mpf("0.5", 128), mpf("0.5", 128)), 128
    )
    with pytest.raises(LengthError):
        cl.lanczos_from_discrete(m, 2)


def test_lanczos_zero_request_is_empty():
    m = cl.DiscreteMeasure((mpf(2, 128),), (mpf(1, 128),), 128)
    co = cl.lanczos_from_discrete(m, 0)
    assert co.length == 0


def test_lanczos_rejects_duplicate_atoms():
    m = cl.DiscreteMeasure(
        (mpf(1, 128), mpf(1, 128)), (mpf("0.5", 128), mpf("0.5", 128)), 128
    )
    with pytest.raises(DomainError):
        cl.lanczos_from_discrete(m, 1)


def test_lanczos_matches_exact_recursion_small(julia3_spec):
    # the core cross-check at reduced scale; the full level-14/N=64 run is
    # in the acceptance suite
    orbit = cl.julia_inverse_orbit(julia3_spec, 10)
    lz = cl.lanczos_from_discrete(orbit, 16)
    ex = cl.julia_exact_coeffs(3, 16, 256)
    report = cl.cross_validate(lz, ex, 16, "1e-8")
    assert report.first_divergence_index is None


def test_stieltjes_fast_matches_big_float_route(cantor_ifs):
    measure = cl.ifs_refine(cantor_ifs, 12)
    lz = cl.lanczos_from_discrete(measure, 32)
    pos, wts = cl.ifs_refine_f64(cantor_ifs, 12)
    fast = cl.stieltjes_fast(pos, wts, 32)
    report = cl.cross_validate(fast, lz, 32, "1e-10")
    assert report.first_divergence_index is None
    assert fast.precision_bits == 53


# --- chebyshev_from_moments --------------------------------------------------


def _two_atom_moments(order, bits=256):
    with workprec(bits):
        moments = tuple(mpf(1) if k % 2 == 0 else mpf(0) for k in range(order + 1))
    return cl.MomentVector(moments, bits)


def test_chebyshev_two_atom_n1():
    co = cl.chebyshev_from_moments(_two_atom_moments(2), 1)
    with workprec(co.precision_bits):
        assert abs(co.a[0] - 1) < mpf(2) ** -200
        assert co.b[0] == 0
    assert co.provenance == "chebyshev-moments"


def test_chebyshev_two_atom_n2_exhausts():
    # a_2 does not exist for a 2-atom measure: the order-2 Hankel pivot is 0
    with pytest.raises(PrecisionExhaustedError) as err:
        cl.chebyshev_from_moments(_two_atom_moments(4), 2)
    assert err.value.index == 2


def test_chebyshev_b1_is_first_moment():
    with workprec(128):
        mv = cl.MomentVector((mpf(1), mpf("0.25"), mpf("0.5")), 128)
    co = cl.chebyshev_from_moments(mv, 1)
    with workprec(co.precision_bits):
        assert abs(co.b[0] - mpf("0.25")) < mpf(2) ** -200


def test_chebyshev_needs_enough_moments():
    with pytest.raises(LengthError):
        cl.chebyshev_from_moments(_two_atom_moments(2), 2)


def test_chebyshev_matches_lanczos_on_cantor(cantor_ifs):
    # route equivalence: the moment route against discretized sweeps.  The
    # deviation is the discretization error of the refinement, measured in a
    # development run: the point-mass seed at the fixed point 0 biases b_n
    # by ~0.5*3**-level (1.43e-10 at level 20) while a_n converges ~9x per
    # level (1.1e-16 at level 20).  Frozen with a 1.5x slack.
    moments = cl.ifs_moments(cantor_ifs, 40, 512)
    cheb = cl.chebyshev_from_moments(moments, 20)

    measure = cl.ifs_refine(cantor_ifs, 12)
    lz = cl.lanczos_from_discrete(measure, 20)
    report = cl.cross_validate(cheb, lz, 20, "3e-6")
    assert report.first_divergence_index is None

    pos, wts = cl.ifs_refine_f64(cantor_ifs, 20)
    fast = cl.stieltjes_fast(pos, wts, 20)
    report20 = cl.cross_validate(cheb, fast, 20, "1e-30")
    assert report20.max_abs_dev_a <= mpf("1e-10", 256)
    assert report20.max_abs_dev_b <= mpf("2.2e-10", 256)


def test_chebyshev_validated_escalates(cantor_ifs):
    # the tolerance must cover the reference's own discretization error
    # (~1.3e-5 b-bias at level 10)
    reference = cl.lanczos_from_discrete(cl.ifs_refine(cantor_ifs, 10), 12)
    co = cl.chebyshev_validated(
        lambda bits: cl.ifs_moments(cantor_ifs, 24, bits), 12, reference, "1e-4"
    )
    assert co.length == 12
    with pytest.raises(PrecisionExhaustedError):
        cl.chebyshev_validated(
            lambda bits: cl.ifs_moments(cantor_ifs, 24, bits),
            12,
            reference,
            "1e-12",
            precision_cap=2048,
        )


# --- cross_validate ----------------------------------------------------------


def test_cross_validate_identical(julia3_exact_64):
    report = cl.cross_validate(julia3_exact_64, julia3_exact_64, 64, "1e-30")
    assert report.max_abs_dev_a == 0
    assert report.max_abs_dev_b == 0
    assert report.first_divergence_index is None


def test_cross_validate_detects_parameter_sensitivity():
    lhs = cl.julia_exact_coeffs(3, 32, 256)
    rhs = cl.julia_exact_coeffs("3.000001", 32, 256)
    report = cl.cross_validate(lhs, rhs, 32, "1e-12")
    assert report.max_abs_dev_a > 0
    assert report.first_divergence_index == 1


def test_cross_validate_reports_first_divergence(julia3_exact_64):
    bumped = list(julia3_exact_64.a)
    with workprec(256):
        bumped[10] = bumped[10] + mpf("1e-6")
    other = cl.JacobiCoeffs(tuple(bumped), julia3_exact_64.b, 256, "synthetic")
    report = cl.cross_validate(julia3_exact_64, other, 64, "1e-8")
    assert report.first_divergence_index == 11


# --- trust rules -------------------------------------------------------------


def test_trusted_prefix_rule():
    assert cl.trusted_prefix_length(16384) == 256
    assert cl.trusted_prefix_length(4096) == 64


def test_stabilized_prefix_detects_divergence(cantor_ifs):
    pos_a, wts_a = cl.ifs_refine_f64(cantor_ifs, 10)
    pos_b, wts_b = cl.ifs_refine_f64(cantor_ifs, 14)
    coarse = cl.stieltjes_fast(pos_a, wts_a, 200)
    fine = cl.stieltjes_fast(pos_b, wts_b, 200)
    # at a tolerance above the level-10 seed bias (~1.3e-5), the level-10
    # sweep stays faithful past its atoms/64 trust bound but must diverge
    # from level 14 before n = 200
    n = stabilized_prefix_length(coarse, fine, "1e-4")
    assert cl.trusted_prefix_length(1024) <= n < 200
    # below the bias everything differs from the first entry on
    assert stabilized_prefix_length(coarse, fine, "1e-10") == 0
