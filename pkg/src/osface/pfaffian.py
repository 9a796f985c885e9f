"""Pfaffians of even-dimensional complex skew-symmetric matrices.

Three independent routes are provided: the perfect-matching sum, recursive
first-row expansion and pivoted skew tridiagonalization (O(n^3)).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import CapacityError, DomainError

#: Relative asymmetry tolerated (and symmetrized away) on construction.
ASYMMETRY_TOLERANCE = 1e-12
#: Pivot counts as zero below this fraction of the largest matrix entry.
PIVOT_TOLERANCE = 1e-14
MAX_DEFINITION_DIM = 12


class SkewMatrix:
    """Immutable even-dimensional skew-symmetric complex matrix.

    Roundoff-level asymmetry (below ``1e-12 * max|x|``) is removed by
    storing ``(X - X^T) / 2``; anything larger raises :class:`DomainError`.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] % 2:
            raise DomainError(f"dimension must be even, got {a.shape[0]}")
        if a.size:
            if not np.all(np.isfinite(a)):
                raise DomainError("matrix entries must be finite")
            scale = np.max(np.abs(a))
            asym = np.max(np.abs(a + a.T))
            if asym > ASYMMETRY_TOLERANCE * scale:
                raise DomainError(
                    f"matrix is not skew-symmetric (asymmetry {asym:.3e}, scale {scale:.3e})"
                )
            a = 0.5 * (a - a.T)
            np.fill_diagonal(a, 0.0)
        a.setflags(write=False)
        self._entries = a

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._entries if dtype is None else self._entries.astype(dtype)

    def __repr__(self):
        return f"SkewMatrix(dim={self.dim})"


def as_skew(x) -> SkewMatrix:
    return x if isinstance(x, SkewMatrix) else SkewMatrix(x)


def remove_rows_cols(x, i: int, k: int) -> SkewMatrix:
    """Delete rows and columns ``i`` and ``k`` (0-based)."""
    x = as_skew(x)
    if i == k:
        raise DomainError("indices to remove must differ")
    for idx in (i, k):
        if not 0 <= idx < x.dim:
            raise DomainError(f"index {idx} out of range for dimension {x.dim}")
    keep = [r for r in range(x.dim) if r not in (i, k)]
    return SkewMatrix(x.entries[np.ix_(keep, keep)])


def perfect_matchings(m: int) -> Iterator[tuple[list[tuple[int, int]], int]]:
    """Yield ``(pairs, sign)`` for every element of M_{m}.

    Pairs are ``(sigma(2j-1), sigma(2j))`` with increasing first elements and
    ``sigma(2j-1) < sigma(2j)``; the sign is that of the permutation
    ``sigma(1) sigma(2) ... sigma(m)``.
    """

    def rec(items):
        if not items:
            yield [], 1
            return
        first, rest = items[0], items[1:]
        for pos, partner in enumerate(rest):
            remaining = rest[:pos] + rest[pos + 1:]
            # moving `partner` next to `first` crosses `pos` elements
            sign = -1 if pos % 2 else 1
            for pairs, s in rec(remaining):
                yield [(first, partner)] + pairs, sign * s

    yield from rec(list(range(m)))


def pf_by_definition(x) -> complex:
    """Signed sum over perfect matchings; exponential cost, dim <= 12."""
    x = as_skew(x)
    if x.dim > MAX_DEFINITION_DIM:
        raise CapacityError(
            f"definition sum limited to dim <= {MAX_DEFINITION_DIM}, got {x.dim}"
        )
    a = x.entries
    total = 0j
    for pairs, sign in perfect_matchings(x.dim):
        term = complex(sign)
        for i, j in pairs:
            term *= a[i, j]
        total += term
    return total


@lru_cache(maxsize=None)
def matching_table(m: int) -> tuple[np.ndarray, np.ndarray]:
    """All perfect matchings of ``m`` points as flat-index and sign arrays."""
    rows, signs = [], []
    for pairs, sign in perfect_matchings(m):
        rows.append([i * m + j for i, j in pairs])
        signs.append(sign)
    return np.array(rows, dtype=np.intp).reshape(len(rows), m // 2), np.array(signs)


def pf_condition(x, value=None) -> float:
    """Cancellation ratio ``sum |terms| / |Pf|`` of the matching sum.

    Bounds the relative sensitivity of the Pfaffian to componentwise relative
    perturbations of the entries, so ``eps * pf_condition`` estimates the
    attainable accuracy in double precision. Infinite when ``Pf = 0``.
    """
    x = as_skew(x)
    if x.dim == 0:
        return 1.0
    if x.dim > MAX_DEFINITION_DIM:
        raise CapacityError(f"condition estimate limited to dim <= {MAX_DEFINITION_DIM}")
    index, _ = matching_table(x.dim)
    mags = np.abs(x.entries).reshape(-1)
    total = float(np.sum(np.prod(mags[index], axis=1)))
    value = pf_by_elimination(x) if value is None else value
    return total / abs(value) if value != 0 else np.inf


def pf_by_expansion(x) -> complex:
    """Recursive expansion along the first row."""
    a = as_skew(x).entries
    return _expand(a)


def _expand(a: np.ndarray) -> complex:
    m = a.shape[0]
    if m == 0:
        return 1.0 + 0j
    if m == 2:
        return complex(a[0, 1])
    total = 0j
    idx = np.arange(m)
    for k in range(1, m):
        if a[0, k] == 0:
            continue
        keep = idx[(idx != 0) & (idx != k)]
        # 0-based column k is column k+1 in 1-based counting, sign (-1)^(k+1)
        sign = 1.0 if k % 2 == 1 else -1.0
        total += sign * a[0, k] * _expand(a[np.ix_(keep, keep)])
    return total


def pf_by_elimination(x) -> complex:
    """Pfaffian by skew tridiagonalization with complete pivoting.

    At each step the largest remaining entry is moved to the pivot position
    ``(k, k+1)`` by symmetric row/column exchanges, each of which flips the
    sign. The Pfaffian of the resulting tridiagonal skew form is the product
    of its ``(k, k+1)`` entries. Returns 0 once the largest remaining entry is
    numerically zero.
    """
    a = np.array(as_skew(x).entries, dtype=complex)
    m = a.shape[0]
    if m == 0:
        return 1.0 + 0j
    scale = np.max(np.abs(a))
    if scale == 0:
        return 0j
    result = 1.0 + 0j
    for k in range(0, m - 1, 2):
        sub = np.abs(a[k:, k:])
        p, r = np.unravel_index(np.argmax(sub), sub.shape)
        p, r = sorted((int(p) + k, int(r) + k))
        if p != k:
            _swap(a, k, p)
            result = -result
        if r != k + 1:
            _swap(a, k + 1, r)
            result = -result
        pivot = a[k, k + 1]
        if abs(pivot) <= PIVOT_TOLERANCE * scale:
            return 0j
        result *= pivot
        if k + 2 < m:
            t = a[k, k + 2:] / pivot
            c = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(t, c) - np.outer(c, t)
    return complex(result)


def _swap(a: np.ndarray, i: int, j: int):
    a[[i, j], :] = a[[j, i], :]
    a[:, [i, j]] = a[:, [j, i]]


pfaffian = pf_by_elimination
