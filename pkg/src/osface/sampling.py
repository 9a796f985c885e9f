"""Seeded sampling of parameter points and random skew matrices.

Streams come from numpy's PCG64 bit generator keyed by a ``SeedSequence``
built from ``(seed, crc32(stream name), nome index)``, so every check owns a
reproducible stream independent of the order in which checks run.
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import OSFaceError
from .state_sum import ParameterPoint
from .theta import EllipticContext, theta

EPS = float(np.finfo(float).eps)
#: Margin between ``eps * condition`` and the tolerance a sample must keep.
CONDITION_SAFETY = 100.0
#: Box for spectral parameters: |Re| <= 0.4, |Im| <= 0.2 Im(tau).
REAL_HALF_WIDTH = 0.4
IMAG_FRACTION = 0.2


class SamplingError(OSFaceError):
    """No acceptable sample was found within the draw budget."""


def make_rng(seed: int, stream: str = "", index: int = 0) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(stream.encode()), int(index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def condition_limit(tolerance: float) -> float:
    """Largest cancellation ratio at which ``tolerance`` is resolvable."""
    return tolerance / (CONDITION_SAFETY * EPS)


def draw_complex(rng: np.random.Generator, ctx: EllipticContext, size=None,
                 real_half_width: float = REAL_HALF_WIDTH,
                 imag_fraction: float = IMAG_FRACTION):
    im_width = imag_fraction * abs(ctx.tau)
    re = rng.uniform(-real_half_width, real_half_width, size)
    im = rng.uniform(-im_width, im_width, size)
    return re + 1j * im if size is not None else complex(re, im)


def point_denominators(p: ParameterPoint, ctx: EllipticContext) -> np.ndarray:
    """Moduli of every theta factor that can appear in a denominator at ``p``."""
    u = np.asarray(p.u)
    i, j = np.triu_indices(len(u), k=1)
    d, s = u[j] - u[i], u[i] + u[j]
    args = np.concatenate([[p.h, p.h + 0.5], d, d + 0.5, s, s + 0.5])
    return np.abs(theta(args, ctx))


def draw_point(rng: np.random.Generator, n: int, ctx: EllipticContext,
               max_draws: int = 10_000) -> ParameterPoint:
    """Uniform draw from the sampling box, rejecting points near any pole."""
    for _ in range(max_draws):
        values = draw_complex(rng, ctx, 2 * n + 1)
        p = ParameterPoint(values[:-1], values[-1])
        if point_denominators(p, ctx).min() > ctx.denominator_guard:
            return p
    raise SamplingError(f"no pole-free point found in {max_draws} draws")


def random_skew(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Skew-symmetric matrix with standard complex Gaussian upper entries."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    upper = np.triu(a, 1)
    return upper - upper.T
