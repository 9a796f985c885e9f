"""Brute-force partition functions of the triangular lattice with OS boundary.

States on ``W_1 (x) ... (x) W_m`` are dense complex vectors of length ``2**m``;
site 0 is the most significant bit and bit value 1 means ``|1>``.
Sites are numbered from 0 here.

Row ``j`` of the lattice is the monodromy

    T_j = R_{j,m-1} ... R_{j,j+2} R_{j,j+1} K_j,

so ``K_j`` acts first and ``R_{j,j+1}`` is the first R factor applied. The
R factor between sites ``j < k`` uses spectral arguments ``(u_j, -u_k)`` and
height ``h`` when ``k - j`` is odd, ``h + 1/2`` when it is even. This
ordering is the one for which the frozen-row recursions hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, DegenerateSampleError, DomainError
from .face_model import r_weights
from .report import VerificationReport, relative_residual
from .theta import EllipticContext, check_elliptic_polynomial, theta

MAX_ORACLE_N = 5


@dataclass(frozen=True)
class ParameterPoint:
    """Spectral parameters ``u_1 .. u_2n`` and height ``h``."""

    u: tuple[complex, ...]
    h: complex

    def __init__(self, u: Sequence[complex], h: complex):
        u = tuple(complex(x) for x in u)
        if len(u) < 2 or len(u) % 2:
            raise DomainError(f"need an even, positive number of spectral parameters, got {len(u)}")
        if not all(np.isfinite(x) for x in u) or not np.isfinite(complex(h)):
            raise DomainError("parameters must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "h", complex(h))

    @property
    def n(self) -> int:
        return len(self.u) // 2

    @property
    def size(self) -> int:
        return len(self.u)

    def replace_u(self, index: int, value: complex) -> ParameterPoint:
        u = list(self.u)
        u[index] = value
        return ParameterPoint(u, self.h)

    def without(self, *indices: int) -> ParameterPoint:
        drop = set(indices)
        return ParameterPoint([x for i, x in enumerate(self.u) if i not in drop], self.h)

    def swapped(self, i: int, j: int) -> ParameterPoint:
        u = list(self.u)
        u[i], u[j] = u[j], u[i]
        return ParameterPoint(u, self.h)

    def as_params(self) -> dict:
        return {"u": list(self.u), "h": self.h}


def basis_index(bits: Sequence[int]) -> int:
    """Index of the basis state with occupation ``bits`` (site 0 first)."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def basis_bits(index: int, m: int) -> tuple[int, ...]:
    return tuple((index >> (m - 1 - s)) & 1 for s in range(m))


def charges(m: int) -> np.ndarray:
    """Total charge of every basis state of ``m`` sites."""
    return np.array([bin(i).count("1") for i in range(2 ** m)])


def vacuum(m: int) -> np.ndarray:
    psi = np.zeros(2 ** m, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_boundary(psi: np.ndarray, site: int, m: int) -> np.ndarray:
    """Apply the off-diagonal K-matrix on ``site`` (a bit flip)."""
    return np.flip(psi.reshape((2,) * m), axis=site).reshape(-1)


def apply_two_site(psi: np.ndarray, r: np.ndarray, a: int, b: int, m: int) -> np.ndarray:
    """Apply a 4x4 operator to sites ``(a, b)``; ``a`` is its leading factor."""
    t = np.moveaxis(psi.reshape((2,) * m), (a, b), (0, 1))
    t = np.tensordot(r.reshape(2, 2, 2, 2), t, axes=([2, 3], [0, 1]))
    return np.moveaxis(t, (0, 1), (a, b)).reshape(-1)


def row_height(j: int, k: int, h: complex) -> complex:
    """Height argument of the R factor between sites ``j < k``."""
    return h if (k - j) % 2 else h + 0.5


def apply_monodromy(j: int, p: ParameterPoint, psi: np.ndarray,
                    ctx: EllipticContext, absolute: bool = False) -> np.ndarray:
    """Apply the row operator ``T_j`` (0-based ``j``) to the full state ``psi``.

    ``absolute=True`` replaces every weight by its modulus.
    """
    m = p.size
    if psi.shape != (2 ** m,):
        raise DomainError(f"state has length {psi.shape}, expected {2 ** m}")
    psi = apply_boundary(psi, j, m)
    for k in range(j + 1, m):
        r = r_weights(p.u[j] + p.u[k], row_height(j, k, p.h), ctx)
        if absolute:
            r = np.abs(r)
        psi = apply_two_site(psi, r, j, k, m)
    return psi


def partition_function_oracle(p: ParameterPoint, ctx: EllipticContext,
                              absolute: bool = False) -> complex:
    """``<Omega| T_{2n-1} ... T_0 |Omega>`` by dense state-vector contraction.

    With ``absolute=True`` this is the sum of ``|weight|`` over all lattice
    configurations instead.
    """
    if p.n > MAX_ORACLE_N:
        raise CapacityError(f"state-sum oracle limited to n <= {MAX_ORACLE_N}, got {p.n}")
    psi = vacuum(p.size)
    for j in range(p.size):
        psi = apply_monodromy(j, p, psi, ctx, absolute)
    return complex(psi[0])


def oracle_condition(p: ParameterPoint, ctx: EllipticContext, value=None) -> float:
    """Cancellation ratio ``sum |configuration weights| / |P|`` of the state sum."""
    value = partition_function_oracle(p, ctx) if value is None else value
    total = partition_function_oracle(p, ctx, absolute=True).real
    return total / abs(value) if value != 0 else np.inf


def partition_function_two_site(u1, u2, h, ctx: EllipticContext) -> complex:
    """Closed form of the ``2n = 2`` partition function."""
    return ctx.half * theta(h + u1 + u2, ctx) / theta(h, ctx)


def check_two_site_closed_form(p: ParameterPoint, ctx: EllipticContext, tol: float = 1e-11):
    if p.n != 1:
        raise DomainError("two-site closed form needs exactly two spectral parameters")
    lhs = partition_function_oracle(p, ctx)
    rhs = partition_function_two_site(p.u[0], p.u[1], p.h, ctx)
    return VerificationReport(
        "oracle.two_site_closed_form", lhs, rhs,
        relative_residual(lhs - rhs, lhs, rhs),
        tol, {**p.as_params(), "nome": ctx.nome},
    )


def check_symmetry(p: ParameterPoint, i: int, j: int, ctx: EllipticContext,
                   tol: float = 1e-10):
    lhs = partition_function_oracle(p, ctx)
    rhs = lhs if i == j else partition_function_oracle(p.swapped(i, j), ctx)
    return VerificationReport(
        "oracle.symmetry", lhs, rhs,
        relative_residual(lhs - rhs, lhs, rhs),
        tol, {**p.as_params(), "i": i, "j": j, "nome": ctx.nome},
    )


def check_quasi_periodicity_P(p: ParameterPoint, ctx: EllipticContext, tol: float = 1e-9):
    """Quasi-periodicities of the partition function in its first argument.

    Degree ``2n - 1``; multipliers ``(-1)^(2n-1)`` for the real shift and
    ``(-1)^(2n-1) exp(-2 pi i (h + u_2 + ... + u_2n))`` for the tau shift.
    """
    degree = 2 * p.n - 1
    sign = (-1.0) ** degree
    chi_tau = sign * np.exp(-2j * np.pi * (p.h + sum(p.u[1:])))
    f = lambda x: partition_function_oracle(p.replace_u(0, x), ctx)
    reports = check_elliptic_polynomial(f, degree, sign, chi_tau, p.u[0], ctx, tol,
                                        name="oracle")
    return tuple(r.with_params(**p.as_params()) for r in reports)


def frozen_rows_factor(u: Sequence[complex], ell: int, ctx: EllipticContext) -> complex:
    """Weight of the two frozen bottom rows when ``u_1 = -u_ell``."""
    others = np.array([x for i, x in enumerate(u) if i not in (0, ell)], dtype=complex)
    ul = u[ell]
    t = theta(np.concatenate([others + ul + 0.5, others - ul + 0.5]), ctx)
    return ctx.half * complex(np.prod(t))


def frozen_corner_factor(u: Sequence[complex], ell: int, h, ctx: EllipticContext) -> complex:
    """Weight of the frozen bottom row and column when ``u_1 = -u_ell - 1/2``."""
    others = np.array([x for i, x in enumerate(u) if i not in (0, ell)], dtype=complex)
    ul = u[ell]
    t = theta(np.concatenate([others + ul, others - ul - 0.5]), ctx)
    pref = theta(h - 0.5, ctx) * ctx.half / theta(h, ctx)
    return pref * complex(np.prod(t))


def _recursion_report(name, p, ell, reduced, factor, ctx, tol):
    lhs = partition_function_oracle(p, ctx)
    rhs = factor * partition_function_oracle(reduced, ctx)
    if lhs == 0 and rhs == 0:
        raise DegenerateSampleError("both sides of the recursion vanish")
    return VerificationReport(
        name, lhs, rhs, relative_residual(lhs - rhs, lhs, rhs), tol,
        {**p.as_params(), "ell": ell, "nome": ctx.nome},
    )


def check_recursion_frozen_rows(p: ParameterPoint, ell: int, ctx: EllipticContext,
                                tol: float = 1e-10):
    """Set ``u_1 = -u_ell`` and compare with the reduced partition function."""
    if p.n < 2 or not 1 <= ell < p.size:
        raise DomainError("need n >= 2 and 1 <= ell < 2n")
    q = p.replace_u(0, -p.u[ell])
    return _recursion_report("recursion.frozen_rows", q, ell, q.without(0, ell),
                             frozen_rows_factor(q.u, ell, ctx), ctx, tol)


def check_recursion_frozen_corner(p: ParameterPoint, ell: int, ctx: EllipticContext,
                                  tol: float = 1e-10):
    """Set ``u_1 = -u_ell - 1/2`` and compare with the reduced partition function."""
    if p.n < 2 or not 1 <= ell < p.size:
        raise DomainError("need n >= 2 and 1 <= ell < 2n")
    q = p.replace_u(0, -p.u[ell] - 0.5)
    return _recursion_report("recursion.frozen_corner", q, ell, q.without(0, ell),
                             frozen_corner_factor(q.u, ell, q.h, ctx), ctx, tol)
