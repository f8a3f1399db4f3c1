"""Dense Hermitian linear algebra.

Matrices are plain ``complex128`` numpy arrays. Functions that accept a
Hermitian matrix validate it with :func:`as_hermitian`, which symmetrizes
round-off below ``atol`` and rejects anything larger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EigenConvergenceError, NotHermitianError, SpectrumOutOfRange

SPECTRUM_TOL = 1e-9
HERMITIAN_ATOL = 1e-12
MAX_SWEEPS = 64


def as_hermitian(M, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return a validated, exactly Hermitian copy of ``M``.

    The lower triangle is rebuilt from the upper one so that
    ``H[j, k] == conj(H[k, j])`` holds bit for bit and the diagonal is real.

    Raises:
        NotHermitianError: if ``M`` is not square, has non-finite entries, or
            deviates from Hermitian symmetry by more than ``atol``.
    """
    M = np.array(M, dtype=np.complex128, copy=True)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise NotHermitianError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NotHermitianError("matrix has non-finite entries")
    asym = np.max(np.abs(M - M.conj().T))
    if asym > atol:
        raise NotHermitianError(f"matrix is not Hermitian (asymmetry {asym:.3e} > {atol:.1e})")
    H = np.triu(M, 1)
    H = H + H.conj().T + np.diag(M.diagonal().real).astype(np.complex128)
    return H


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in ascending order and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def _offdiag_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - np.diag(A.diagonal())))


def spectral_decompose(M, max_sweeps: int = MAX_SWEEPS) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the classical real Jacobi rotation, so the pair ``(p, q)`` is
    annihilated by a single 2x2 unitary.

    Raises:
        EigenConvergenceError: if the off-diagonal mass has not fallen below
            machine precision relative to the matrix norm after ``max_sweeps``.
    """
    A = as_hermitian(M)
    n = A.shape[0]
    V = np.eye(n, dtype=np.complex128)
    scale = float(np.linalg.norm(A))
    target = np.finfo(float).eps * max(scale, np.finfo(float).tiny)
    # pivots below this are left alone; n(n-1) of them still sum under ``target``
    negligible = target / (2.0 * n)

    sweeps = 0
    off = _offdiag_norm(A)
    while off > target:
        if sweeps >= max_sweeps:
            raise EigenConvergenceError(n, off, sweeps)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= negligible:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                phase = apq / r
                theta = (aqq - app) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ G
        off = _offdiag_norm(A)

    w = A.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[order], V[:, order])


def eigenvalues(M) -> np.ndarray:
    return spectral_decompose(M).eigenvalues


def _check_interval(w: np.ndarray, low: float, high: float, tol: float) -> None:
    if w[0] < low - tol:
        raise SpectrumOutOfRange(w[0], (low, high))
    if w[-1] > high + tol:
        raise SpectrumOutOfRange(w[-1], (low, high))


def split_identity(A, tol: float = SPECTRUM_TOL) -> np.ndarray:
    """Return ``B = A - I`` after checking that the spectrum of ``A`` lies in [1, 2].

    Raises:
        SpectrumOutOfRange: if an eigenvalue of ``A`` leaves ``[1 - tol, 2 + tol]``.
    """
    A = as_hermitian(A)
    _check_interval(eigenvalues(A), 1.0, 2.0, tol)
    n = A.shape[0]
    return A - np.eye(n, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class LinearFormBundle:
    """The linear forms ``l_j(z) = sum_k L[j, k] z_k``; row ``j`` of ``L`` holds form ``j``."""

    coefficients: np.ndarray

    def __post_init__(self):
        L = np.array(self.coefficients, dtype=np.complex128, copy=True)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError(f"coefficients must be a square matrix, got shape {L.shape}")
        L.setflags(write=False)
        object.__setattr__(self, "coefficients", L)

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    def __call__(self, z) -> np.ndarray:
        """Evaluate all forms at ``z`` (shape ``(..., n)``)."""
        return np.asarray(z) @ self.coefficients.T

    def outer_gram(self) -> np.ndarray:
        """``L L*``."""
        L = self.coefficients
        return as_hermitian(L @ L.conj().T, atol=np.inf)

    def scaled(self, beta: float) -> "LinearFormBundle":
        return LinearFormBundle(np.sqrt(beta) * self.coefficients)


def factor_psd(B, tol: float = SPECTRUM_TOL) -> LinearFormBundle:
    """Factor ``B = L L*`` as ``L = U diag(sqrt(lambda))``.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero before the square root.

    Raises:
        SpectrumOutOfRange: if an eigenvalue of ``B`` leaves ``[-tol, 1 + tol]``.
    """
    w, U = spectral_decompose(B)
    _check_interval(w, 0.0, 1.0, tol)
    return LinearFormBundle(U * np.sqrt(np.clip(w, 0.0, None)))


def gram_conjugate(forms: LinearFormBundle) -> np.ndarray:
    """Matrix of the Hermitian form ``p(z) = sum_j |l_j(z)|^2``, i.e. ``conj(L* L)``."""
    L = forms.coefficients
    return as_hermitian(np.conj(L.conj().T @ L), atol=np.inf)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Ginibre matrix."""
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(G)
    d = R.diagonal()
    return Q * (d / np.abs(d))


def random_instance(n: int, spread: float = 1.0, seed: int = 0) -> np.ndarray:
    """Random admissible matrix ``A = U diag(lambda) U*`` with ``lambda_j ~ U[1, 1 + spread]``.

    The matrix is assembled as ``I + U diag(lambda - 1) U*`` so that a zero
    spread returns the identity exactly.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= spread <= 1.0:
        raise ValueError(f"spread must lie in [0, 1], got {spread}")
    rng = np.random.default_rng(seed)
    U = haar_unitary(n, rng)
    lam = rng.uniform(0.0, spread, size=n)
    B = (U * lam) @ U.conj().T
    return as_hermitian(np.eye(n) + B, atol=np.inf)


def random_psd(n: int, seed: int = 0, rank: int | None = None, top: float = 1.0) -> np.ndarray:
    """Random Hermitian PSD matrix with eigenvalues uniform in ``[0, top]``.

    ``rank`` smaller than ``n`` zeroes out the remaining eigenvalues.
    """
    rng = np.random.default_rng(seed)
    U = haar_unitary(n, rng)
    lam = rng.uniform(0.0, top, size=n)
    if rank is not None:
        lam[rank:] = 0.0
    return as_hermitian((U * lam) @ U.conj().T, atol=np.inf)
