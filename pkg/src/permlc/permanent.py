"""Exact permanents for small complex matrices.

Three independent routes are provided: the permutation sum straight from the
definition, Ryser's inclusion-exclusion formula walked in Gray-code order, and
the expansion ``per(I + B) = sum_J per(B_J)`` over principal submatrices.
"""

from __future__ import annotations

import itertools
import math

import numba
import numpy as np

from .errors import DimensionTooLarge

DEFINITION_MAX_N = 10
RYSER_MAX_N = 28
SUBSET_MAX_N = 12

_PERM_CHUNK = 1 << 16


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def _fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=np.complex128)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def permanent_definition(M) -> complex:
    """Sum of ``prod_k M[k, sigma(k)]`` over all permutations ``sigma``.

    Products are formed in chunks with numpy and summed exactly with
    :func:`math.fsum` on the real and imaginary parts.

    Raises:
        DimensionTooLarge: for ``n > 10``.
    """
    M = _as_square(M)
    n = M.shape[0]
    if n > DEFINITION_MAX_N:
        raise DimensionTooLarge(n, DEFINITION_MAX_N, "permanent_definition")
    if n == 0:
        return 1.0 + 0.0j
    rows = np.arange(n)
    perms = itertools.permutations(range(n))
    re_parts, im_parts = [], []
    while True:
        chunk = np.array(list(itertools.islice(perms, _PERM_CHUNK)), dtype=np.intp)
        if chunk.size == 0:
            break
        terms = np.prod(M[rows, chunk], axis=1)
        re_parts.extend(terms.real)
        im_parts.extend(terms.imag)
    return complex(math.fsum(re_parts), math.fsum(im_parts))


@numba.njit(cache=True)
def _ryser_gray(M):
    n = M.shape[0]
    rowsum = np.zeros(n, dtype=np.complex128)
    # Kahan accumulators for the real and imaginary parts
    acc_re = 0.0
    acc_im = 0.0
    c_re = 0.0
    c_im = 0.0
    gray = 0
    for k in range(1, 1 << n):
        # column toggled between consecutive Gray codes is the lowest set bit of k
        j = 0
        while not (k >> j) & 1:
            j += 1
        gray ^= 1 << j
        if (gray >> j) & 1:
            for i in range(n):
                rowsum[i] += M[i, j]
        else:
            for i in range(n):
                rowsum[i] -= M[i, j]
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= rowsum[i]
        # popcount parity of the current subset
        bits = 0
        g = gray
        while g:
            g &= g - 1
            bits += 1
        if (n - bits) & 1:
            prod = -prod
        y = prod.real - c_re
        t = acc_re + y
        c_re = (t - acc_re) - y
        acc_re = t
        y = prod.imag - c_im
        t = acc_im + y
        c_im = (t - acc_im) - y
        acc_im = t
    return acc_re + 1j * acc_im


def permanent_ryser(M) -> complex:
    """Ryser's formula ``per M = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} M[i, j]``.

    Subsets are visited in binary-reflected Gray-code order so each step adds
    or removes a single column from the running row sums.

    Raises:
        DimensionTooLarge: for ``n > 28``.
    """
    M = _as_square(M)
    n = M.shape[0]
    if n > RYSER_MAX_N:
        raise DimensionTooLarge(n, RYSER_MAX_N, "permanent_ryser")
    if n == 0:
        return 1.0 + 0.0j
    return complex(_ryser_gray(np.ascontiguousarray(M)))


def subset_expansion(B) -> complex:
    """``sum_J per(B_J)`` over all principal submatrices, with ``per(B_empty) = 1``.

    For Hermitian ``B`` this equals ``per(I + B)``.

    Raises:
        DimensionTooLarge: for ``n > 12``.
    """
    B = _as_square(B)
    n = B.shape[0]
    if n > SUBSET_MAX_N:
        raise DimensionTooLarge(n, SUBSET_MAX_N, "subset_expansion")
    terms = [1.0 + 0.0j]
    for size in range(1, n + 1):
        for J in itertools.combinations(range(n), size):
            idx = np.array(J)
            terms.append(permanent_ryser(B[np.ix_(idx, idx)]))
    return _fsum_complex(terms)


def is_real_nonnegative(value: complex, tol: float = 1e-9) -> bool:
    """Whether a permanent of a Hermitian PSD matrix looks real and non-negative."""
    value = complex(value)
    return abs(value.imag) <= tol * max(1.0, abs(value)) and value.real >= -tol
