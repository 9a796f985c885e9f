"""Dynamical R-matrix, off-diagonal K-matrix and their defining relations.

Basis order on ``W_a (x) W_b`` is ``|00>, |01>, |10>, |11>`` with the ``a``
spin as the leading bit; rows index outgoing states, columns incoming ones.
``|1>`` carries one unit of charge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PoleError
from .report import VerificationReport, relative_residual
from .theta import EllipticContext, theta

K_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
K_MATRIX.setflags(write=False)

_I2 = np.eye(2, dtype=complex)
SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
SWAP.setflags(write=False)

#: Charge (number of |1>) of each two-site basis state.
TWO_SITE_CHARGE = np.array([0, 1, 1, 2])


def k_matrix(u=None, h=None) -> np.ndarray:
    """The boundary K-matrix; constant in ``u`` and ``h``."""
    return K_MATRIX


def r_weights(w, h, ctx: EllipticContext) -> np.ndarray:
    """4x4 R-matrix at spectral difference ``w = u - v`` and height ``h``."""
    t = theta(np.array([w + 0.5, h - 0.5, w, h, h + w, 0.5, h - w, h + 0.5]), ctx)
    if abs(t[3]) <= ctx.denominator_guard:
        raise PoleError("[h]", abs(t[3]))
    corner, hm, tw, th_, hpw, half, hmw, hp = t
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = corner
    r[1, 1] = hm * tw / th_
    r[1, 2] = hpw * half / th_
    r[2, 1] = hmw * half / th_
    r[2, 2] = hp * tw / th_
    return r


@dataclass(frozen=True)
class RMatrix:
    u: complex
    v: complex
    h: complex
    weights: np.ndarray

    def swapped(self) -> np.ndarray:
        """The same operator with the two tensor factors exchanged (R_ba)."""
        return SWAP @ self.weights @ SWAP


def build_r_matrix(u, v, h, ctx: EllipticContext) -> RMatrix:
    w = r_weights(u - v, h, ctx)
    w.setflags(write=False)
    return RMatrix(complex(u), complex(v), complex(h), w)


def _matrix_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    return relative_residual(lhs - rhs, lhs, rhs)


def _site_ops(r, pair):
    """Embed a two-site operator into ``W_a (x) W_b (x) W_c`` on ``pair``."""
    if pair == "ab":
        return np.kron(r, _I2)
    if pair == "bc":
        return np.kron(_I2, r)
    s_bc = np.kron(_I2, SWAP)
    return s_bc @ np.kron(r, _I2) @ s_bc


def ybe_sides(u, v, w, h, ctx: EllipticContext, absolute: bool = False):
    """Both sides of the dynamical Yang-Baxter relation as 8x8 matrices.

    ``absolute=True`` multiplies the entrywise moduli instead.
    """
    if absolute:
        r = lambda x, y, hh: np.abs(r_weights(x - y, hh, ctx))
    else:
        r = lambda x, y, hh: r_weights(x - y, hh, ctx)
    lhs = (_site_ops(r(v, w, h), "bc")
           @ _site_ops(r(u, w, h + 0.5), "ac")
           @ _site_ops(r(u, v, h), "ab"))
    rhs = (_site_ops(r(u, v, h + 0.5), "ab")
           @ _site_ops(r(u, w, h), "ac")
           @ _site_ops(r(v, w, h + 0.5), "bc"))
    return lhs, rhs


def ybe_condition(u, v, w, h, ctx: EllipticContext) -> float:
    """Cancellation ratio of the triple products: ``max |R||R||R| / max |side|``."""
    lhs, rhs = ybe_sides(u, v, w, h, ctx)
    abs_lhs, abs_rhs = ybe_sides(u, v, w, h, ctx, absolute=True)
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    return float(max(abs_lhs.real.max(), abs_rhs.real.max()) / scale) if scale else np.inf


def check_dynamical_ybe(u, v, w, h, ctx: EllipticContext, tol: float = 1e-10):
    lhs, rhs = ybe_sides(u, v, w, h, ctx)
    idx = np.unravel_index(np.argmax(np.abs(lhs - rhs)), lhs.shape)
    return VerificationReport(
        "rmatrix.ybe", lhs[idx], rhs[idx], _matrix_residual(lhs, rhs), tol,
        {"u": complex(u), "v": complex(v), "w": complex(w), "h": complex(h),
         "nome": ctx.nome},
    )


def reflection_sides(u, v, h, ctx: EllipticContext, inner_shift: float = 0.0):
    """Both sides of the boundary reflection relation as 4x4 matrices.

    The R-matrix depends on the spectral parameters only through their
    difference, so ``R(w, h)`` is read as the matrix at difference ``w``.
    ``inner_shift`` adds a height shift to the two interior R factors.
    """
    r_ab = lambda x, hh: r_weights(x, hh, ctx)
    r_ba = lambda x, hh: SWAP @ r_weights(x, hh, ctx) @ SWAP
    k_a = np.kron(K_MATRIX, _I2)
    k_b = np.kron(_I2, K_MATRIX)
    hi = h + inner_shift
    lhs = r_ba(u - v, h) @ k_b @ r_ab(v + u, hi) @ k_a
    rhs = k_a @ r_ba(u + v, hi) @ k_b @ r_ab(u - v, h)
    return lhs, rhs


def check_reflection_equation(u, v, h, ctx: EllipticContext, tol: float = 1e-10,
                              inner_shift: float = 0.0):
    lhs, rhs = reflection_sides(u, v, h, ctx, inner_shift)
    idx = np.unravel_index(np.argmax(np.abs(lhs - rhs)), lhs.shape)
    name = "reflection.literal" if inner_shift == 0 else f"reflection.inner_shift_{inner_shift:+g}"
    return VerificationReport(
        name, lhs[idx], rhs[idx], _matrix_residual(lhs, rhs), tol,
        {"u": complex(u), "v": complex(v), "h": complex(h), "nome": ctx.nome,
         "inner_shift": inner_shift},
    )


def check_ice_rule(r) -> VerificationReport:
    """Every charge-violating entry must be exactly zero."""
    weights = r.weights if isinstance(r, RMatrix) else np.asarray(r)
    n_sites = int(np.log2(weights.shape[0]))
    charge = np.array([bin(i).count("1") for i in range(2 ** n_sites)])
    forbidden = charge[:, None] != charge[None, :]
    worst = float(np.max(np.abs(weights[forbidden]), initial=0.0))
    params = {}
    if isinstance(r, RMatrix):
        params = {"u": r.u, "v": r.v, "h": r.h}
    return VerificationReport("rmatrix.ice_rule", worst, 0.0, worst, 0.0, params)


def check_height_periodicity(u, v, h, ctx: EllipticContext, tol: float = 1e-12):
    a = r_weights(u - v, h, ctx)
    b = r_weights(u - v, h + 1, ctx)
    idx = np.unravel_index(np.argmax(np.abs(a - b)), a.shape)
    return VerificationReport(
        "rmatrix.h_periodicity", b[idx], a[idx], _matrix_residual(a, b), tol,
        {"u": complex(u), "v": complex(v), "h": complex(h), "nome": ctx.nome},
    )
