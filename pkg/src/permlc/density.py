"""The log-concave integrand whose integral over R^{2n} is per(A).

For an admissible ``A = I + L L*`` the density is

    f(z) = pi^{-n} exp(-|z|^2) prod_j (1 + |l_j(z)|^2),   l_j(z) = (L z)_j,

and everything here works with ``log f``. Points are complex arrays of shape
``(..., n)``; :func:`to_real` and :func:`to_complex` convert to and from the
real layout ``(x_1..x_n, y_1..y_n)`` used for gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SpectrumOutOfRange
from .hermitian import (
    SPECTRUM_TOL,
    LinearFormBundle,
    as_hermitian,
    eigenvalues,
    factor_psd,
    gram_conjugate,
    spectral_decompose,
    split_identity,
)

CONCAVITY_TOL = 1e-9


def to_real(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    return np.concatenate([z.real, z.imag], axis=-1)


def to_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1] // 2
    return v[..., :n] + 1j * v[..., n:]


@dataclass(frozen=True, eq=False)
class DensityModel:
    """Parameters of ``log f``: the forms ``l_j`` and the matrix ``I - C`` of ``q``."""

    forms: LinearFormBundle
    q_matrix: np.ndarray
    log_normalizer: float

    @property
    def n(self) -> int:
        return self.forms.n

    @classmethod
    def from_forms(cls, forms, validate: bool = True, tol: float = SPECTRUM_TOL) -> "DensityModel":
        """Build the model directly from ``L``.

        With ``validate=False`` bundles outside the admissible class (``L L*``
        with eigenvalues above 1) are accepted; such densities need not be
        log-concave.
        """
        if not isinstance(forms, LinearFormBundle):
            forms = LinearFormBundle(forms)
        n = forms.n
        q_matrix = as_hermitian(np.eye(n) - gram_conjugate(forms), atol=np.inf)
        q_matrix.setflags(write=False)
        model = cls(forms, q_matrix, -n * np.log(np.pi))
        if validate:
            lam_min = check_q_psd(model)
            if lam_min < -tol:
                raise SpectrumOutOfRange(1.0 - lam_min, (0.0, 1.0))
        return model

    def scaled(self, beta: float) -> "DensityModel":
        """The same construction with ``L`` replaced by ``sqrt(beta) L``."""
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        return DensityModel.from_forms(self.forms.scaled(beta), validate=False)


def build_density(A, tol: float = SPECTRUM_TOL) -> DensityModel:
    """Density model for an admissible matrix ``A`` (spectrum in [1, 2])."""
    B = split_identity(A, tol)
    return DensityModel.from_forms(factor_psd(B, tol), tol=tol)


def _point(D: DensityModel, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if z.shape[-1:] != (D.n,):
        raise DimensionMismatch(f"point has trailing dimension {z.shape[-1:]}, model has n = {D.n}")
    return z


def eval_linear_forms(D: DensityModel, z) -> np.ndarray:
    return D.forms(_point(D, z))


def form_energies(D: DensityModel, z) -> np.ndarray:
    """``|l_j(z)|^2`` for every form, shape ``(..., n)``."""
    ell = eval_linear_forms(D, z)
    return ell.real**2 + ell.imag**2


def log_density(D: DensityModel, z) -> np.ndarray | float:
    """``-n ln(pi) - |z|^2 + sum_j ln(1 + |l_j(z)|^2)``."""
    z = _point(D, z)
    sq = np.sum(z.real**2 + z.imag**2, axis=-1)
    out = D.log_normalizer - sq + np.sum(np.log1p(form_energies(D, z)), axis=-1)
    return out if np.ndim(out) else float(out)


def grad_log_density(D: DensityModel, z) -> np.ndarray:
    """Gradient of :func:`log_density` in the real layout ``(x, y)``, shape ``(..., 2n)``.

    With ``g = L^H (l / (1 + |l|^2))`` the gradient is
    ``-2 (x, y) + 2 (Re g, Im g)``.
    """
    z = _point(D, z)
    ell = D.forms(z)
    w = ell / (1.0 + ell.real**2 + ell.imag**2)
    g = w @ D.forms.coefficients.conj()
    return 2.0 * to_real(g - z)


def q_form(D: DensityModel, z) -> np.ndarray | float:
    """``q(z) = |z|^2 - sum_j |l_j(z)|^2`` evaluated through the matrix ``I - C``."""
    z = _point(D, z)
    out = np.einsum("...k,kl,...l->...", z, D.q_matrix, z.conj()).real
    return out if np.ndim(out) else float(out)


def check_q_psd(D: DensityModel) -> float:
    """Smallest eigenvalue of the matrix of ``q``."""
    return float(eigenvalues(D.q_matrix)[0])


def top_direction(D: DensityModel) -> np.ndarray:
    """Unit point ``z`` maximizing ``sum_j |l_j(z)|^2``."""
    # z^T C conj(z) is maximized by the conjugate of C's top eigenvector
    w, U = spectral_decompose(np.eye(D.n) - D.q_matrix)
    return U[:, -1].conj()


def check_logconcavity(
    D: DensityModel,
    trials: int = 10_000,
    seed: int = 0,
    scale: float = 1.5,
    direction=None,
    tol: float = CONCAVITY_TOL,
) -> int:
    """Count random triples ``(z1, z2, alpha)`` violating log-concavity of ``f``.

    Endpoints are drawn with independent ``N(0, scale^2)`` real coordinates,
    or as ``t * direction`` with ``t ~ N(0, scale^2)`` when a direction is
    given.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = D.n
    if direction is None:
        z1 = to_complex(scale * rng.standard_normal((trials, 2 * n)))
        z2 = to_complex(scale * rng.standard_normal((trials, 2 * n)))
    else:
        direction = _point(D, direction)
        z1 = scale * rng.standard_normal((trials, 1)) * direction
        z2 = scale * rng.standard_normal((trials, 1)) * direction
    alpha = rng.uniform(0.0, 1.0, size=(trials, 1))
    mix = alpha * z1 + (1.0 - alpha) * z2
    lhs = log_density(D, mix)
    a = alpha[:, 0]
    rhs = a * log_density(D, z1) + (1.0 - a) * log_density(D, z2)
    return int(np.count_nonzero(lhs < rhs - tol))


def check_lemma_concavity(
    q_form_matrix,
    trials: int = 10_000,
    seed: int = 0,
    scale: float = 2.0,
    tol: float = CONCAVITY_TOL,
) -> int:
    """Count midpoint-concavity violations of ``h(x) = ln(1 + q(x)) - q(x)``.

    ``q(x) = x^T Q x`` for a real symmetric positive semidefinite ``Q``.
    """
    Q = np.atleast_2d(np.asarray(q_form_matrix, dtype=np.float64))
    if Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12):
        raise ValueError("quadratic form matrix must be square and symmetric")
    if eigenvalues(Q)[0] < -SPECTRUM_TOL:
        raise ValueError("quadratic form is not positive semidefinite")
    rng = np.random.default_rng(seed)
    m = Q.shape[0]
    x1 = scale * rng.standard_normal((trials, m))
    x2 = scale * rng.standard_normal((trials, m))

    def h(x):
        q = np.einsum("...i,ij,...j->...", x, Q, x)
        return np.log1p(q) - q

    mid = h(0.5 * (x1 + x2))
    return int(np.count_nonzero(mid < 0.5 * (h(x1) + h(x2)) - tol))
