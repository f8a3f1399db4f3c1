"""Property checks for one admissible matrix, collected into a pass/fail summary.

Each check returns its worst residual and whether it met its tolerance; the
CLI ``verify`` command serializes the result of :func:`verify_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import (
    build_density,
    check_lemma_concavity,
    check_logconcavity,
    check_q_psd,
    form_energies,
    grad_log_density,
    log_density,
    q_form,
    to_complex,
    to_real,
)
from .estimators import SamplerConfig, wick_check
from .hermitian import eigenvalues, split_identity, gram_conjugate
from .permanent import (
    DEFINITION_MAX_N,
    SUBSET_MAX_N,
    is_real_nonnegative,
    permanent_definition,
    permanent_ryser,
    subset_expansion,
)

FD_STEP = 1e-5
FD_TOL = 1e-6
RECONSTRUCT_TOL = 1e-10
IDENTITY_TOL = 1e-10
ORACLE_RTOL = 1e-10
WICK_SIGMA = 4.0
# beyond n = 8 the product weights are too heavy-tailed for a CLT standard error
WICK_VERIFY_MAX_N = 8
CROSSCHECK_MAX_N = 7


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float

    def to_dict(self) -> dict:
        return {"pass": self.passed, "worst": self.worst}


def real_quadratic_form(row) -> np.ndarray:
    """Real ``2n x 2n`` matrix of ``x -> |sum_k row_k z_k|^2`` in the layout ``(x, y)``."""
    row = np.asarray(row, dtype=np.complex128)
    a, b = row.real, row.imag
    u = np.concatenate([a, -b])
    v = np.concatenate([b, a])
    return np.outer(u, u) + np.outer(v, v)


def finite_difference_gradient(D, z, h: float = FD_STEP) -> np.ndarray:
    v = to_real(z)
    out = np.empty_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h
        out[i] = (log_density(D, to_complex(v + e)) - log_density(D, to_complex(v - e))) / (2 * h)
    return out


def verify_matrix(
    A,
    seed: int = 0,
    trials: int = 10_000,
    wick_samples: int = 100_000,
    wick_sigma: float = WICK_SIGMA,
) -> list[CheckResult]:
    """Run every property check on the admissible matrix ``A``.

    Raises:
        SpectrumOutOfRange: before any check runs, if ``A`` is not admissible.
    """
    B = split_identity(A)
    D = build_density(A)
    n = D.n
    rng = np.random.default_rng(seed)
    L = D.forms.coefficients
    results = []

    def add(name, worst, passed):
        results.append(CheckResult(name, bool(passed), float(worst)))

    res = np.max(np.abs(L @ L.conj().T - B)) / max(1.0, np.max(np.abs(B)))
    add("factorization", res, res <= RECONSTRUCT_TOL)

    w = eigenvalues(gram_conjugate(D.forms))
    excess = max(-w[0], w[-1] - 1.0, 0.0)
    add("spectrum_transport", excess, excess <= 1e-9)

    lam = check_q_psd(D)
    add("q_psd", lam, lam >= -1e-9)

    z = (rng.standard_normal((200, n)) + 1j * rng.standard_normal((200, n))) * 1.5
    e = form_energies(D, z)
    lhs = -np.sum(np.abs(z) ** 2, axis=1) + np.sum(np.log1p(e), axis=1)
    rhs = -q_form(D, z) + np.sum(np.log1p(e) - e, axis=1)
    res = np.max(np.abs(lhs - rhs))
    add("factorized_identity", res, res <= IDENTITY_TOL)

    v = check_logconcavity(D, trials=trials, seed=seed)
    add("logconcavity", v, v == 0)

    worst = 0
    for j in range(n):
        worst = max(worst, check_lemma_concavity(real_quadratic_form(L[j]), trials=trials // n + 1, seed=seed + j))
    add("lemma_concavity", worst, worst == 0)

    dev = 0.0
    for _ in range(5):
        zp = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        dev = max(dev, np.max(np.abs(grad_log_density(D, zp) - finite_difference_gradient(D, zp))))
    add("gradient", dev, dev <= FD_TOL)

    per = permanent_ryser(A)
    add("permanent_real_nonnegative", abs(per.imag), is_real_nonnegative(per))

    if n <= min(CROSSCHECK_MAX_N, DEFINITION_MAX_N):
        d = permanent_definition(A)
        rel = abs(d - per) / max(abs(per), 1e-300)
        add("ryser_vs_definition", rel, rel <= ORACLE_RTOL)

    if n <= SUBSET_MAX_N:
        s = subset_expansion(B)
        rel = abs(s - per) / max(abs(per), 1e-300)
        add("subset_expansion", rel, rel <= ORACLE_RTOL)

    if n <= WICK_VERIFY_MAX_N:
        rep = wick_check(B, SamplerConfig(seed=seed, chains=1, steps_per_phase=wick_samples))
        zs = rep.z_score(rep.reference)
        add("wick", zs, zs <= wick_sigma)

    return results


def summarize(label: str, n: int, results: list[CheckResult]) -> dict:
    return {
        "label": label,
        "n": n,
        "pass": all(r.passed for r in results),
        "checks": {r.name: r.to_dict() for r in results},
    }
