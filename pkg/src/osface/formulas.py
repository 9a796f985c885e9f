"""Closed-form elliptic Pfaffian expressions for the OS-boundary partition function.

Two kernels share the numerator ``[1/2][u_j - u_i][u_i + u_j + h] / [h]``
and differ in the denominator:

* ``"E"``: ``[u_i + u_j][u_j - u_i + 1/2]``
* ``"F"``: ``[u_i + u_j + 1/2][u_j - u_i + 1/2]``

Each is multiplied by ``prod_{i<j} D_ij / [u_j - u_i]`` where ``D_ij`` is
the kernel denominator. Also here: the identity equating the two Pfaffians,
the two factorization formulas, and the elementary four-variable chain
that proves the identity for ``2n = 4``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PoleError
from .pfaffian import (
    SkewMatrix,
    pf_by_elimination,
    pf_by_expansion,
    pf_condition,
    remove_rows_cols,
)
from .report import VerificationReport, relative_residual
from .state_sum import ParameterPoint, oracle_condition, partition_function_oracle
from .theta import EllipticContext, theta

VARIANTS = ("E", "F")


def _pairs(u):
    """Pair sums and differences ``u_j - u_i`` for ``i < j`` in row-major order."""
    u = np.asarray(u, dtype=complex)
    upper = np.triu_indices(len(u), k=1)
    i, j = upper
    return u[j] - u[i], u[i] + u[j], upper


def _guard(values: np.ndarray, label: str, ctx: EllipticContext, upper):
    mags = np.abs(values)
    if mags.size and mags.min() <= ctx.denominator_guard:
        k = int(np.argmin(mags))
        i, j = upper[0][k] + 1, upper[1][k] + 1
        raise PoleError(label.format(i=i, j=j), float(mags[k]))


def _skew_from_upper(values: np.ndarray, upper, m: int) -> SkewMatrix:
    x = np.zeros((m, m), dtype=complex)
    x[upper] = values
    return SkewMatrix(x - x.T)


def kernel(u: Sequence[complex], h, ctx: EllipticContext, variant: str = "E",
           normalized: bool = True):
    """Return ``(prefactor, X)`` for the chosen Pfaffian representation.

    With ``normalized=False`` the ``[1/2]/[h]`` factor is dropped from the
    kernel, giving the matrices that appear in the two-Pfaffian identity;
    the prefactor is then ``prod_{i<j} S_ij`` with ``S_ij`` the sum factor.
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown kernel variant {variant!r}")
    diff, total, upper = _pairs(u)
    shift = 0.0 if variant == "E" else 0.5
    t = theta(np.stack([diff, diff + 0.5, total + shift, total + h]), ctx)
    t_diff, t_diff_half, t_sum, t_sum_h = t
    sum_label = "[u_{i}+u_{j}]" if variant == "E" else "[u_{i}+u_{j}+1/2]"
    _guard(t_sum, sum_label, ctx, upper)
    _guard(t_diff_half, "[u_{j}-u_{i}+1/2]", ctx, upper)
    entries = t_diff * t_sum_h / (t_sum * t_diff_half)
    if normalized:
        t_h = theta(h, ctx)
        if abs(t_h) <= ctx.denominator_guard:
            raise PoleError("[h]", abs(t_h))
        entries = entries * (ctx.half / t_h)
        _guard(t_diff, "[u_{j}-u_{i}]", ctx, upper)
        # pairwise ratios keep the running product well scaled
        prefactor = complex(np.prod(t_sum * t_diff_half / t_diff))
    else:
        prefactor = complex(np.prod(t_sum))
    return prefactor, _skew_from_upper(entries, upper, len(u))


def _eval(p: ParameterPoint, ctx, variant, pfaffian):
    prefactor, x = kernel(p.u, p.h, ctx, variant)
    return prefactor * pfaffian(x)


def eval_E(p: ParameterPoint, ctx: EllipticContext,
           pfaffian: Callable = pf_by_elimination) -> complex:
    """Pfaffian representation built on ``[u_i + u_j]`` denominators."""
    return _eval(p, ctx, "E", pfaffian)


def eval_F(p: ParameterPoint, ctx: EllipticContext,
           pfaffian: Callable = pf_by_elimination) -> complex:
    """Pfaffian representation built on ``[u_i + u_j + 1/2]`` denominators."""
    return _eval(p, ctx, "F", pfaffian)


def eval_E_first_row(p: ParameterPoint, ctx: EllipticContext) -> complex:
    """``eval_E`` through an explicit first-row expansion of the Pfaffian."""
    prefactor, x = kernel(p.u, p.h, ctx, "E")
    a = x.entries
    total = 0j
    for k in range(1, x.dim):
        sign = 1.0 if k % 2 == 1 else -1.0
        total += sign * a[0, k] * pf_by_expansion(remove_rows_cols(x, 0, k))
    return prefactor * total


def _compare(name, lhs, rhs, tol, params):
    return VerificationReport(
        name, lhs, rhs,
        relative_residual(lhs - rhs, lhs, rhs),
        tol, params,
    )


def check_closed_forms(p: ParameterPoint, ctx: EllipticContext, tol: float = 1e-9):
    """Three pairwise comparisons: oracle vs E, oracle vs F, E vs F."""
    oracle = partition_function_oracle(p, ctx)
    e = eval_E(p, ctx)
    f = eval_F(p, ctx)
    params = {**p.as_params(), "n": p.n, "nome": ctx.nome}
    return (
        _compare("formulas.oracle_vs_E", oracle, e, tol, params),
        _compare("formulas.oracle_vs_F", oracle, f, tol, params),
        _compare("formulas.E_vs_F", e, f, tol, params),
    )


def check_first_row_expansion(p: ParameterPoint, ctx: EllipticContext, tol: float = 1e-10):
    a = eval_E(p, ctx)
    b = eval_E_first_row(p, ctx)
    return _compare("formulas.first_row_expansion", b, a, tol,
                    {**p.as_params(), "nome": ctx.nome})


def check_factor_periodicities(p: ParameterPoint, ctx: EllipticContext, tol: float = 1e-10):
    """Quasi-periodicities in ``u_1`` of the prefactor and Pfaffian factor of E.

    Prefactor: multipliers ``(-1)^(2n-1)`` and
    ``(-1/q)^(2n-1) exp(-2 pi i ((2n-1) u_1 + u_2 + ... + u_2n - 1/2))``.
    Pfaffian factor: multipliers ``1`` and ``exp(-2 pi i (h + 1/2))``.
    """
    u1, h, q, tau = p.u[0], p.h, ctx.nome, ctx.tau
    d = 2 * p.n - 1

    def parts(x):
        pre, xm = kernel(p.replace_u(0, x).u, h, ctx, "E")
        return pre, pf_by_elimination(xm)

    pre0, pf0 = parts(u1)
    pre1, pf1 = parts(u1 + 1)
    pre_t, pf_t = parts(u1 + tau)
    mult_pre_tau = (-1.0 / q) ** d * np.exp(-2j * np.pi * (d * u1 + sum(p.u[1:]) - 0.5))
    mult_pf_tau = np.exp(-2j * np.pi * (h + 0.5))
    params = {**p.as_params(), "nome": q}
    expected = [
        ("formulas.prefactor_real_period", pre1, (-1.0) ** d * pre0),
        ("formulas.prefactor_imag_period", pre_t, mult_pre_tau * pre0),
        ("formulas.pfaffian_real_period", pf1, pf0),
        ("formulas.pfaffian_imag_period", pf_t, mult_pf_tau * pf0),
    ]
    return tuple(_compare(name, lhs, rhs, tol, params) for name, lhs, rhs in expected)


def identity_sides(u: Sequence[complex], h, ctx: EllipticContext):
    """Both sides of the identity between the two unnormalized Pfaffians."""
    pre_e, x_e = kernel(u, h, ctx, "E", normalized=False)
    pre_f, x_f = kernel(u, h, ctx, "F", normalized=False)
    return pre_e * pf_by_elimination(x_e), pre_f * pf_by_elimination(x_f)


def check_pfaffian_identity(p: ParameterPoint, ctx: EllipticContext, tol: float = 1e-8):
    lhs, rhs = identity_sides(p.u, p.h, ctx)
    return _compare("identity.two_pfaffians", lhs, rhs, tol,
                    {**p.as_params(), "n": p.n, "nome": ctx.nome})


def _factorization_kernels(u, ctx: EllipticContext):
    diff, total, upper = _pairs(u)
    t_diff, t_diff_half, t_sum, t_sum_half = theta(
        np.stack([diff, diff + 0.5, total, total + 0.5]), ctx)
    _guard(t_diff_half, "[u_{j}-u_{i}+1/2]", ctx, upper)
    _guard(t_sum_half, "[u_{i}+u_{j}+1/2]", ctx, upper)
    plain = t_diff / t_diff_half
    with_sum = plain * t_sum / t_sum_half
    return upper, plain, with_sum, t_sum, t_sum_half


def check_factorizations(p: ParameterPoint, ctx: EllipticContext, tol: float = 1e-9):
    """Pfaffians of the two factorizable kernels against their entry products."""
    upper, plain, with_sum, _, _ = _factorization_kernels(p.u, ctx)
    params = {**p.as_params(), "n": p.n, "nome": ctx.nome}
    out = []
    for name, k in (("identity.factorization_difference", plain),
                    ("identity.factorization_sum_difference", with_sum)):
        lhs = pf_by_elimination(_skew_from_upper(k, upper, p.size))
        rhs = complex(np.prod(k))
        out.append(_compare(name, lhs, rhs, tol, params))
    return tuple(out)


def check_identity_at_zero_height(p: ParameterPoint, ctx: EllipticContext,
                                  tol: float = 1e-9):
    """Both sides of the two-Pfaffian identity at ``h = 0`` against the
    closed product implied by the two factorization formulas.

    The residual is the larger of the two side-versus-product residuals.
    """
    upper, plain, _, t_sum, _ = _factorization_kernels(p.u, ctx)
    closed = complex(np.prod(t_sum * plain))
    lhs, rhs = identity_sides(p.u, 0.0, ctx)
    residual = max(
        relative_residual(lhs - closed, lhs, closed),
        relative_residual(rhs - closed, rhs, closed),
    )
    return VerificationReport("identity.zero_height", lhs, rhs, residual, tol,
                              {"u": list(p.u), "h": 0.0, "n": p.n, "nome": ctx.nome,
                               "closed_product": closed})


def appendix_terms(u: Sequence[complex], h, ctx: EllipticContext) -> dict:
    """Every quantity of the four-variable elementary proof, keyed by name.

    Each value is ``(lhs, rhs, scale)`` where ``scale`` is the largest
    participating term magnitude.
    """
    if len(u) != 4:
        raise DomainError("the four-variable chain needs exactly four spectral parameters")
    u1, u2, u3, u4 = (complex(x) for x in u)
    t = lambda x: theta(x, ctx)
    half = ctx.half
    for label, val in (("[u2-u1+1/2]", u2 - u1 + 0.5), ("[u4-u3+1/2]", u4 - u3 + 0.5),
                       ("[u3-u1+1/2]", u3 - u1 + 0.5), ("[u4-u2+1/2]", u4 - u2 + 0.5),
                       ("[u4-u1+1/2]", u4 - u1 + 0.5), ("[u3-u2+1/2]", u3 - u2 + 0.5)):
        if abs(t(val)) <= ctx.denominator_guard:
            raise PoleError(label, abs(t(val)))

    def pair(a, b):
        # [u_b - u_a][u_a + u_b + h] / [u_b - u_a + 1/2]
        return t(b - a) * t(a + b + h) / t(b - a + 0.5)

    def hp(a, b):
        return t(a + b + 0.5)

    def pl(a, b):
        return t(a + b)

    total_half = t(u1 + u2 + u3 + u4 + 0.5)
    c12_34 = pair(u1, u2) * pair(u3, u4)
    c13_24 = pair(u1, u3) * pair(u2, u4)
    c14_23 = pair(u1, u4) * pair(u2, u3)

    # the three "half-shifted minus plain" products of the reduction step
    prod_a_half = hp(u3, u1) * hp(u4, u1) * hp(u3, u2) * hp(u4, u2)
    prod_a = pl(u3, u1) * pl(u4, u1) * pl(u3, u2) * pl(u4, u2)
    prod_b_half = hp(u2, u1) * hp(u4, u1) * hp(u3, u2) * hp(u4, u3)
    prod_b = pl(u2, u1) * pl(u4, u1) * pl(u3, u2) * pl(u4, u3)
    prod_c_half = hp(u2, u1) * hp(u3, u1) * hp(u4, u2) * hp(u4, u3)
    prod_c = pl(u2, u1) * pl(u3, u1) * pl(u4, u2) * pl(u4, u3)

    full_lhs = c12_34 * prod_a_half - c13_24 * prod_b_half + c14_23 * prod_c_half
    full_rhs = c12_34 * prod_a - c13_24 * prod_b + c14_23 * prod_c
    full_scale = max(abs(c12_34 * prod_a_half), abs(c13_24 * prod_b_half),
                     abs(c14_23 * prod_c_half), abs(c12_34 * prod_a),
                     abs(c13_24 * prod_b), abs(c14_23 * prod_c))

    def difference(prod_half, prod, a, b, c, d):
        rhs = half * total_half * t(b - a + 0.5) * t(d - c + 0.5)
        return prod_half - prod, rhs, max(abs(prod_half), abs(prod), abs(rhs))

    k = lambda a, b: t(b - a) * t(a + b + h)
    three = (k(u1, u2) * k(u3, u4), k(u1, u3) * k(u2, u4), k(u1, u4) * k(u2, u3))
    return {
        "appendix.n2_pfaffian_identity": (full_lhs, full_rhs, full_scale),
        "appendix.product_difference_12_34": difference(prod_a_half, prod_a, u1, u2, u3, u4),
        "appendix.product_difference_13_24": difference(prod_b_half, prod_b, u1, u3, u2, u4),
        "appendix.product_difference_14_23": difference(prod_c_half, prod_c, u2, u3, u1, u4),
        "appendix.three_term_relation": (three[0] - three[1] + three[2], 0j,
                                         max(abs(x) for x in three)),
    }


def check_appendix_chain(u: Sequence[complex], h, ctx: EllipticContext,
                         tol: float = 1e-10) -> list[VerificationReport]:
    """Five reports: the full four-variable identity, the three
    product-difference lemmas, and the vanishing three-term relation."""
    params = {"u": [complex(x) for x in u], "h": complex(h), "nome": ctx.nome}
    reports = []
    for name, (lhs, rhs, scale) in appendix_terms(u, h, ctx).items():
        diff = abs(lhs - rhs)
        residual = diff / scale if scale > 0 else diff
        reports.append(VerificationReport(name, lhs, rhs, residual, tol, params))
    return reports


def identity_condition(u: Sequence[complex], h, ctx: EllipticContext) -> float:
    """Worst cancellation ratio of the two Pfaffians in the identity."""
    return max(pf_condition(kernel(u, h, ctx, v, normalized=False)[1]) for v in VARIANTS)


def factorization_condition(u: Sequence[complex], ctx: EllipticContext) -> float:
    upper, plain, with_sum, _, _ = _factorization_kernels(u, ctx)
    m = len(u)
    return max(pf_condition(_skew_from_upper(k, upper, m)) for k in (plain, with_sum))


def closed_form_condition(p: ParameterPoint, ctx: EllipticContext) -> float:
    """Worst cancellation ratio among the state sum and both Pfaffian forms."""
    return max(oracle_condition(p, ctx),
               *(pf_condition(kernel(p.u, p.h, ctx, v)[1]) for v in VARIANTS))
