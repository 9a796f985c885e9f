"""Odd theta function ``[u]`` with real period 1 and its algebraic laws.

``[u] = H(pi i u)`` where

    H(x) = 2 sinh(x) prod_{j>=1} (1 - 2 q^{2j} cosh(2x) + q^{4j}) (1 - q^{2j}).

``[u]`` is odd, ``[u + 1] = -[u]`` and ``[u + tau] = -q^{-1} exp(-2 pi i u) [u]``
with ``tau = -i log(q) / pi``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DegenerateSampleError, DomainError
from .report import VerificationReport, relative_residual

#: |Im u| beyond this many imaginary periods triggers lattice reduction.
REDUCTION_THRESHOLD = 5.0


def default_truncation(nome: float) -> int:
    """Smallest N with q^(2N) <= 1e-16."""
    return max(1, math.ceil(math.log(1e-16) / (2.0 * math.log(nome))))


@dataclass(frozen=True)
class EllipticContext:
    """Nome, product truncation and the numerical thresholds used throughout."""

    nome: float
    truncation_order: int | None = None
    zero_tolerance: float = 1e-12
    denominator_guard: float = 1e-6

    def __post_init__(self):
        q = self.nome
        if not (isinstance(q, (int, float)) and 0.0 < q < 1.0):
            raise DomainError(f"nome must lie in (0, 1), got {q!r}")
        if self.truncation_order is None:
            object.__setattr__(self, "truncation_order", default_truncation(q))
        elif int(self.truncation_order) < 1:
            raise DomainError("truncation_order must be >= 1")
        if self.zero_tolerance < 0:
            raise DomainError("zero_tolerance must be >= 0")
        if self.denominator_guard <= 0:
            raise DomainError("denominator_guard must be > 0")

    @cached_property
    def tau(self) -> complex:
        """Imaginary quasi-period ``-i log(q) / pi``."""
        return complex(0.0, -math.log(self.nome) / math.pi)

    @cached_property
    def _q2j(self) -> np.ndarray:
        return self.nome ** (2.0 * np.arange(1, self.truncation_order + 1))

    @cached_property
    def _q4j(self) -> np.ndarray:
        return self._q2j * self._q2j

    @cached_property
    def _const(self) -> float:
        return 2.0 * float(np.prod(1.0 - self._q2j))

    @cached_property
    def half(self) -> complex:
        """The frequently used constant ``[1/2]``."""
        return theta(0.5, self)


def _lattice_factor(z: np.ndarray, ctx: EllipticContext):
    """Split ``z = z0 + m + k tau`` with ``z0`` near the origin.

    Returns ``(z0, factor)`` such that ``[z] = factor * [z0]``.
    """
    tau_im = ctx.tau.imag
    k = np.rint(z.imag / tau_im)
    z1 = z - k * ctx.tau
    m = np.rint(z1.real)
    z0 = z1 - m
    # [w + k tau] = (-1/q)^k q^{-k(k-1)} exp(-2 pi i k w)
    log_q = math.log(ctx.nome)
    log_mag = -k * log_q - k * (k - 1) * log_q
    phase = np.exp(-2j * np.pi * k * z0)
    sign = np.where((k + m) % 2 == 0, 1.0, -1.0)
    return z0, sign * np.exp(log_mag) * phase


def theta(u, ctx: EllipticContext, reduce: bool | None = None):
    """Evaluate ``[u]`` for a scalar or array argument.

    With ``reduce=None`` the argument is shifted back into the fundamental
    strip only when ``|Im u| > 5 Im(tau)``; the quasi-period prefactor is
    tracked so the value is unchanged.
    """
    scalar = np.ndim(u) == 0
    z = np.asarray(u, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("theta argument must be finite")
    if reduce is None:
        reduce = bool(np.any(np.abs(z.imag) > REDUCTION_THRESHOLD * ctx.tau.imag))
    factor = 1.0
    if reduce:
        z, factor = _lattice_factor(z, ctx)
    if scalar:
        x = complex(z)
        c = cmath.cosh(2j * math.pi * x)
        prod = np.prod(1.0 - 2.0 * ctx._q2j * c + ctx._q4j)
        return complex(ctx._const * cmath.sinh(1j * math.pi * x) * prod * factor)
    c = np.cosh(2j * np.pi * z)[..., None]
    prod = np.prod(1.0 - 2.0 * ctx._q2j * c + ctx._q4j, axis=-1)
    return ctx._const * np.sinh(1j * np.pi * z) * prod * factor


eval_theta = theta


def _require_nonzero(value, ctx: EllipticContext, what: str):
    if abs(value) <= ctx.zero_tolerance:
        raise DegenerateSampleError(f"{what} is numerically zero; resample")


def check_oddness(u, ctx: EllipticContext, tol: float = 1e-10) -> VerificationReport:
    a, b = theta(u, ctx), theta(-u, ctx)
    _require_nonzero(a, ctx, "[u]")
    return VerificationReport(
        "theta.oddness", b, -a,
        relative_residual(a + b, a, zero_tolerance=ctx.zero_tolerance),
        tol, {"u": complex(u), "nome": ctx.nome},
    )


def check_quasi_periodicity(u, ctx: EllipticContext, tol: float = 1e-10):
    """Residuals of the shifts by 1 and by tau, relative to ``|[u]|``."""
    base = theta(u, ctx)
    _require_nonzero(base, ctx, "[u]")
    params = {"u": complex(u), "nome": ctx.nome}
    shifted1 = theta(u + 1, ctx)
    rhs1 = -base
    shifted_tau = theta(u + ctx.tau, ctx)
    rhs_tau = -cmath.exp(-2j * math.pi * u) * base / ctx.nome
    scale = abs(base)
    return (
        VerificationReport("theta.real_period", shifted1, rhs1,
                           abs(shifted1 - rhs1) / scale, tol, params),
        VerificationReport("theta.imag_period", shifted_tau, rhs_tau,
                           abs(shifted_tau - rhs_tau) / scale, tol, params),
    )


def check_half_shift_symmetry(u, ctx: EllipticContext, tol: float = 1e-10):
    lhs = theta(u - 0.5, ctx)
    rhs = theta(-u - 0.5, ctx)
    if max(abs(lhs), abs(rhs)) <= ctx.zero_tolerance:
        raise DegenerateSampleError("both sides of the half-shift law vanish")
    return VerificationReport(
        "theta.half_shift", lhs, rhs,
        relative_residual(lhs - rhs, lhs, rhs), tol,
        {"u": complex(u), "nome": ctx.nome},
    )


def check_addition_formula(u, v, x, y, ctx: EllipticContext, tol: float = 1e-10):
    """Three-term theta addition law, normalized by the largest term."""
    t = theta(np.array([u + x, u - x, v + y, v - y, v + x, v - x,
                        u + y, u - y, x + y, x - y, u + v, u - v]), ctx)
    t1 = t[0] * t[1] * t[2] * t[3]
    t2 = t[4] * t[5] * t[6] * t[7]
    t3 = t[8] * t[9] * t[10] * t[11]
    scale = max(abs(t1), abs(t2), abs(t3))
    if scale <= ctx.zero_tolerance:
        raise DegenerateSampleError("all three addition-formula terms vanish")
    return VerificationReport(
        "theta.addition", t1, t2 + t3, abs(t1 - t2 - t3) / scale, tol,
        {"u": complex(u), "v": complex(v), "x": complex(x), "y": complex(y),
         "nome": ctx.nome},
    )


def check_elliptic_polynomial(
    f: Callable[[complex], complex],
    degree: int,
    chi_1: complex,
    chi_tau: complex,
    u: complex,
    ctx: EllipticContext,
    tol: float = 1e-10,
    name: str = "elliptic_polynomial",
):
    """Check that ``f`` has the quasi-periodicities of a degree-``n`` elliptic polynomial.

    ``f(u + 1) = chi_1 f(u)`` and
    ``f(u + tau) = chi_tau exp(-2 pi i n u - pi i n tau) f(u)``.
    """
    fu = complex(f(u))
    _require_nonzero(fu, ctx, "f(u)")
    tau = ctx.tau
    lhs1 = complex(f(u + 1))
    rhs1 = chi_1 * fu
    lhs2 = complex(f(u + tau))
    rhs2 = chi_tau * cmath.exp(-2j * math.pi * degree * u - 1j * math.pi * degree * tau) * fu
    params = {"u": complex(u), "degree": degree, "nome": ctx.nome}
    return (
        VerificationReport(f"{name}.real_period", lhs1, rhs1,
                           relative_residual(lhs1 - rhs1, fu, lhs1, rhs1), tol, params),
        VerificationReport(f"{name}.imag_period", lhs2, rhs2,
                           relative_residual(lhs2 - rhs2, fu, lhs2, rhs2), tol, params),
    )
