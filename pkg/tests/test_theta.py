import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mp_theta
from osface.errors import DomainError
from osface.theta import (
    EllipticContext,
    check_addition_formula,
    check_elliptic_polynomial,
    check_half_shift_symmetry,
    check_oddness,
    check_quasi_periodicity,
    default_truncation,
    theta,
)

NOMES = (0.1, 0.3, 0.5, 0.7)


@pytest.mark.parametrize("q", NOMES)
def test_matches_jacobi_theta_one(q):
    ctx = EllipticContext(q)
    rng = np.random.default_rng(1)
    for _ in range(25):
        u = complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5) * ctx.tau.imag)
        ref = complex(mp_theta(u, q))
        assert abs(theta(u, ctx) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_zero_and_half():
    ctx = EllipticContext(0.3)
    assert theta(0.0, ctx) == 0
    assert abs(theta(1.0, ctx)) < 1e-15
    assert abs(ctx.half - complex(mp_theta(0.5, 0.3))) < 1e-14


def test_small_nome_reduces_to_sine():
    # q -> 0 leaves 2 sinh(pi i u) = 2 i sin(pi u)
    ctx = EllipticContext(1e-9)
    for u in (0.1, 0.37, 0.2 + 0.1j):
        assert abs(theta(u, ctx) - 2j * np.sin(np.pi * u)) < 1e-8


def test_zeros_on_lattice():
    ctx = EllipticContext(0.5)
    for m in (-2, 0, 1, 3):
        for k in (-1, 0, 1):
            assert abs(theta(m + k * ctx.tau, ctx)) < 1e-12


def test_array_matches_scalar():
    ctx = EllipticContext(0.3)
    u = np.array([0.1, -0.2 + 0.05j, 0.45j, 0.3])
    vec = theta(u, ctx)
    assert vec.shape == u.shape
    for a, b in zip(vec, u):
        assert a == pytest.approx(theta(complex(b), ctx), rel=1e-14)


@pytest.mark.parametrize("q", NOMES)
def test_lattice_reduction_preserves_value(q):
    ctx = EllipticContext(q)
    u = 0.23 - 0.11j * ctx.tau.imag + 7 * ctx.tau + 3
    ref = complex(mp_theta(u, q))
    got = theta(u, ctx)
    assert abs(got - ref) <= 1e-11 * abs(ref)
    small = 0.17 + 0.1j
    assert theta(small, ctx, reduce=True) == pytest.approx(theta(small, ctx, reduce=False),
                                                           rel=1e-13)


def test_truncation_order():
    assert default_truncation(0.7) == math.ceil(math.log(1e-16) / (2 * math.log(0.7)))
    ctx = EllipticContext(0.7)
    assert ctx.nome ** (2 * ctx.truncation_order) <= 1e-16
    longer = EllipticContext(0.7, truncation_order=2 * ctx.truncation_order)
    assert theta(0.3 + 0.2j, ctx) == pytest.approx(theta(0.3 + 0.2j, longer), rel=1e-14)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
def test_rejects_bad_nome(bad):
    with pytest.raises(DomainError):
        EllipticContext(bad)


def test_rejects_non_finite_argument():
    with pytest.raises(DomainError):
        theta(complex("nan"), EllipticContext(0.3))


_re = st.floats(-1, 1, allow_nan=False)
_im = st.floats(-0.15, 0.15, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(_re, _im, st.sampled_from(NOMES))
def test_oddness_property(x, y, q):
    ctx = EllipticContext(q)
    u = complex(x, y)
    assert theta(-u, ctx) == -theta(u, ctx)


@settings(max_examples=200, deadline=None)
@given(_re, _im, st.sampled_from(NOMES))
def test_half_shift_property(x, y, q):
    ctx = EllipticContext(q)
    u = complex(x, y)
    a, b = theta(u - 0.5, ctx), theta(-u - 0.5, ctx)
    assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)


@pytest.mark.parametrize("q", NOMES)
def test_law_checks_pass_at_fixed_points(q):
    ctx = EllipticContext(q)
    u = 0.21 + 0.07j
    assert check_oddness(u, ctx).passed
    real, imag = check_quasi_periodicity(u, ctx)
    assert real.check_name == "theta.real_period" and real.passed
    assert imag.check_name == "theta.imag_period" and imag.passed
    assert check_half_shift_symmetry(u, ctx).passed
    assert check_addition_formula(0.1, 0.25 + 0.03j, -0.31, 0.17, ctx).passed


def test_addition_formula_detects_wrong_sign():
    # negative control: perturbing one term must break the law
    ctx = EllipticContext(0.3)
    u, v, x, y = 0.1, 0.25, -0.31, 0.17
    t = lambda z: theta(z, ctx)
    good = (t(u + x) * t(u - x) * t(v + y) * t(v - y)
            - t(v + x) * t(v - x) * t(u + y) * t(u - y)
            - t(x + y) * t(x - y) * t(u + v) * t(u - v))
    bad = good + 2 * t(x + y) * t(x - y) * t(u + v) * t(u - v)
    assert abs(good) < 1e-14 and abs(bad) > 1e-3


def test_elliptic_polynomial_checker_on_power():
    # [y]^n picks up (-1/q)^n exp(-2 pi i n y) under y -> y + tau, and
    # exp(-pi i tau) = 1/q, so both multipliers are (-1)^n
    ctx = EllipticContext(0.3)
    n = 3
    f = lambda y: theta(y, ctx) ** n
    sign = (-1.0) ** n
    reports = check_elliptic_polynomial(f, n, sign, sign, 0.13 + 0.02j, ctx,
                                        1e-10, name="power")
    assert [r.check_name for r in reports] == ["power.real_period", "power.imag_period"]
    assert all(r.passed for r in reports)
