"""Monte Carlo estimators of per(A) as the integral of the log-concave density.

Two routes:

* :func:`estimate_direct` averages ``prod_j (1 + |l_j(z)|^2)`` over i.i.d.
  standard complex Gaussian points.
* :func:`estimate_anneal` walks ``beta`` from 0 to 1 through the family
  ``f_beta(z) ~ exp(-|z|^2) prod_j (1 + beta |l_j(z)|^2)``, which is the same
  construction with ``L`` replaced by ``sqrt(beta) L``. Each ratio of
  consecutive normalizers is estimated from Metropolis-adjusted chains
  targeting the lower phase; the ``beta = 0`` phase is sampled exactly.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .density import DensityModel, log_density
from .diagnostics import effective_sample_size
from .errors import ChainDiverged, DimensionTooLarge, NonFiniteWeight
from .hermitian import factor_psd
from .permanent import permanent_ryser

DIVERGENCE_BOUND = 1e3
WICK_MAX_N = 10
PROPOSALS = ("langevin", "randomWalk")


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler settings.

    ``anneal_schedule`` and ``step_size`` left as ``None`` are resolved per
    dimension by :meth:`schedule_for` and :meth:`step_size_for`.
    """

    seed: int = 0
    chains: int = 4
    steps_per_phase: int = 5000
    burn_in: int = 1000
    anneal_schedule: tuple[float, ...] | None = None
    step_size: float | None = None
    proposal: str = "langevin"
    threads: int = 1

    def __post_init__(self):
        if self.chains < 1 or self.steps_per_phase < 1 or self.burn_in < 0:
            raise ValueError("chains and steps_per_phase must be positive, burn_in non-negative")
        if self.proposal not in PROPOSALS:
            raise ValueError(f"proposal must be one of {PROPOSALS}, got {self.proposal!r}")
        if self.step_size is not None and not self.step_size > 0.0:
            raise ValueError("step_size must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.anneal_schedule is not None:
            sched = tuple(float(b) for b in self.anneal_schedule)
            validate_schedule(sched)
            object.__setattr__(self, "anneal_schedule", sched)

    @property
    def total_samples(self) -> int:
        return self.chains * self.steps_per_phase

    def schedule_for(self, n: int) -> np.ndarray:
        if self.anneal_schedule is not None:
            return np.asarray(self.anneal_schedule)
        return default_schedule(n)

    def step_size_for(self, n: int) -> float:
        if self.step_size is not None:
            return self.step_size
        return 0.25 / np.sqrt(2 * n)


def validate_schedule(schedule) -> None:
    s = np.asarray(schedule, dtype=np.float64)
    if s.ndim != 1 or s.size < 2 or s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0.0):
        raise ValueError("anneal schedule must rise strictly from exactly 0 to exactly 1")


def default_schedule(n: int) -> np.ndarray:
    """``K = max(8, n)`` phases with ``1 - beta`` shrinking geometrically."""
    K = max(8, n)
    gaps = np.geomspace(1.0, 1.0 / (K + 1), K)
    sched = np.concatenate([1.0 - gaps, [1.0]])
    sched[0] = 0.0
    return sched


@dataclass
class ChainState:
    """Positions of a batch of chains with the log-density of the current phase cached."""

    position: np.ndarray
    cached_log_density: np.ndarray
    phase_index: int


@dataclass
class EstimateReport:
    """Point estimate of a permanent with its uncertainty and sampler diagnostics.

    ``rel_error_target`` is the relative half-width of the normal 95% interval
    implied by ``std_error``.
    """

    method: str
    estimate: float
    std_error: float
    effective_sample_size: float
    acceptance_rates: tuple[float, ...]
    samples_used: int
    wall_clock: float
    seed: int
    schedule: tuple[float, ...] = ()
    reference: float | None = None
    phase_ratios: tuple[float, ...] = field(default=(), repr=False)

    @property
    def rel_error_target(self) -> float:
        if self.estimate == 0.0:
            return 0.0 if self.std_error == 0.0 else np.inf
        return 1.96 * self.std_error / self.estimate

    def z_score(self, exact: float) -> float:
        """Deviation from ``exact`` in reported standard errors."""
        diff = abs(self.estimate - exact)
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else np.inf
        return diff / self.std_error

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "method": self.method,
            "estimate": self.estimate,
            "stdError": self.std_error,
            "ess": self.effective_sample_size,
            "acceptanceRates": list(self.acceptance_rates),
            "samplesUsed": self.samples_used,
            "seed": self.seed,
            "wallClockSeconds": self.wall_clock if timing else None,
            "schedule": list(self.schedule),
        }
        if self.reference is not None:
            out["reference"] = self.reference
        return out

    def to_json(self, timing: bool = True) -> str:
        return jsonio.dumps(self.to_dict(timing=timing))


def sample_complex_gaussian(n: int, count: int, seed=0) -> np.ndarray:
    """``count`` i.i.d. points of the standard complex Gaussian on C^n, shape ``(count, n)``.

    Each coordinate is ``(g1 + i g2) / sqrt(2)``, so ``E|z_k|^2 = 1``.
    ``seed`` may be an integer, a ``SeedSequence`` or a ``Generator``.
    """
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, 2 * n))
    return (g[:, :n] + 1j * g[:, n:]) / np.sqrt(2.0)


def _mean_and_se(log_w: np.ndarray) -> tuple[float, float, float]:
    """Mean of ``exp(log_w)``, its standard error, and the Kish ESS, stabilized by the max."""
    N = log_w.size
    top = float(np.max(log_w))
    if top == -np.inf:
        return 0.0, 0.0, float(N)
    if not np.isfinite(top):
        raise NonFiniteWeight(f"non-finite log weight {top}")
    w = np.exp(log_w - top)
    mean = float(np.mean(w))
    sd = float(np.std(w, ddof=1)) if N > 1 else 0.0
    kish = float(np.sum(w) ** 2 / np.sum(w * w))
    scale = np.exp(top)
    return mean * scale, sd * scale / np.sqrt(N), kish


def estimate_direct(D: DensityModel, cfg: SamplerConfig = SamplerConfig()) -> EstimateReport:
    """Unbiased estimate of ``per A = E prod_j (1 + |l_j(z)|^2)`` under the complex Gaussian."""
    start = time.perf_counter()
    N = cfg.total_samples
    z = sample_complex_gaussian(D.n, N, cfg.seed)
    ell = D.forms(z)
    log_w = np.sum(np.log1p(ell.real**2 + ell.imag**2), axis=1)
    est, se, kish = _mean_and_se(log_w)
    return EstimateReport(
        method="direct",
        estimate=est,
        std_error=se,
        effective_sample_size=kish,
        acceptance_rates=(),
        samples_used=N,
        wall_clock=time.perf_counter() - start,
        seed=cfg.seed,
        schedule=(0.0, 1.0),
    )


def wick_check(B, cfg: SamplerConfig = SamplerConfig()) -> EstimateReport:
    """Monte Carlo estimate of ``per B = E prod_j |l_j(z)|^2`` with ``B = L L*``.

    The report's ``reference`` holds the Ryser value of ``per B``.
    """
    B = np.asarray(B, dtype=np.complex128)
    n = B.shape[0]
    if n > WICK_MAX_N:
        raise DimensionTooLarge(n, WICK_MAX_N, "wick_check")
    start = time.perf_counter()
    forms = factor_psd(B)
    N = cfg.total_samples
    ell = forms(sample_complex_gaussian(n, N, cfg.seed))
    with np.errstate(divide="ignore"):
        log_w = np.sum(np.log(ell.real**2 + ell.imag**2), axis=1)
    est, se, kish = _mean_and_se(log_w)
    return EstimateReport(
        method="wick",
        estimate=est,
        std_error=se,
        effective_sample_size=kish,
        acceptance_rates=(),
        samples_used=N,
        wall_clock=time.perf_counter() - start,
        seed=cfg.seed,
        reference=permanent_ryser(B).real,
    )


def metropolis_accept(log_ratio, u) -> np.ndarray:
    """Accept with probability ``min(1, exp(log_ratio))`` given uniforms ``u`` in [0, 1)."""
    return np.log(u) < np.minimum(0.0, log_ratio)


def _phase_log_density(L: np.ndarray, beta: float, z: np.ndarray):
    """Unnormalized ``log f_beta`` and the forms ``L z``."""
    ell = z @ L.T
    lp = -np.sum(z.real**2 + z.imag**2, axis=-1) + np.sum(
        np.log1p(beta * (ell.real**2 + ell.imag**2)), axis=-1
    )
    return lp, ell


def _phase_grad(L: np.ndarray, beta: float, z: np.ndarray, ell: np.ndarray) -> np.ndarray:
    """Gradient of ``log f_beta`` packed as a complex array ``d/dx + i d/dy``."""
    w = beta * ell / (1.0 + beta * (ell.real**2 + ell.imag**2))
    return 2.0 * (w @ L.conj() - z)


def mh_step(L, beta, z, lp, grad, ell, xi, u, eps, proposal):
    """One Metropolis-Hastings transition for a batch of chains.

    ``xi`` is complex noise with independent standard normal real and
    imaginary parts and ``u`` uniforms in [0, 1); both are supplied by the
    caller so the transition is a pure function of its inputs.

    Returns the new ``(z, lp, grad, ell, accepted)``.
    """
    noise = np.sqrt(2.0 * eps) * xi
    if proposal == "langevin":
        z_new = z + eps * grad + noise
    else:
        z_new = z + noise
    lp_new, ell_new = _phase_log_density(L, beta, z_new)
    log_ratio = lp_new - lp
    grad_new = None
    if proposal == "langevin":
        grad_new = _phase_grad(L, beta, z_new, ell_new)
        fwd = z_new - z - eps * grad
        bwd = z - z_new - eps * grad_new
        log_ratio += (np.sum(np.abs(fwd) ** 2, axis=-1) - np.sum(np.abs(bwd) ** 2, axis=-1)) / (
            4.0 * eps
        )
    acc = metropolis_accept(log_ratio, u)
    z = np.where(acc[:, None], z_new, z)
    lp = np.where(acc, lp_new, lp)
    ell = np.where(acc[:, None], ell_new, ell)
    if grad_new is not None:
        grad = np.where(acc[:, None], grad_new, grad)
    return z, lp, grad, ell, acc


def _run_chains(L, beta, beta_next, state, rngs, burn_in, steps, eps, proposal):
    """Advance a batch of chains at ``beta`` and record the log ratio weights toward ``beta_next``.

    Row ``c`` of the batch draws its noise only from ``rngs[c]``. Returns the
    final :class:`ChainState`, the ``(chains, steps)`` log weights and the
    number of accepted post-burn-in proposals.
    """
    n = L.shape[0]
    log_norm = -n * np.log(np.pi)
    total = burn_in + steps
    xi = np.empty((total, len(rngs), n), dtype=np.complex128)
    u = np.empty((total, len(rngs)))
    for c, rng in enumerate(rngs):
        g = rng.standard_normal((total, 2 * n))
        xi[:, c] = g[:, :n] + 1j * g[:, n:]
        u[:, c] = rng.random(total)

    z = state.position
    lp, ell = _phase_log_density(L, beta, z)
    grad = _phase_grad(L, beta, z, ell) if proposal == "langevin" else None
    log_w = np.empty((len(rngs), steps))
    accepted = 0
    for t in range(total):
        z, lp, grad, ell, acc = mh_step(L, beta, z, lp, grad, ell, xi[t], u[t], eps, proposal)
        if np.max(np.abs(z.real)) > DIVERGENCE_BOUND or np.max(np.abs(z.imag)) > DIVERGENCE_BOUND:
            raise ChainDiverged(
                f"chain coordinate exceeded {DIVERGENCE_BOUND:g} at beta={beta:.6g}, step {t}; "
                f"step size {eps:.3g} is too large"
            )
        if t >= burn_in:
            accepted += int(np.count_nonzero(acc))
            e = ell.real**2 + ell.imag**2
            log_w[:, t - burn_in] = np.sum(np.log1p(beta_next * e) - np.log1p(beta * e), axis=1)
    return ChainState(z, lp + log_norm, state.phase_index), log_w, accepted


def phase_state(D: DensityModel, beta: float, position, phase_index: int) -> ChainState:
    """Chain state at ``position`` with the log-density of phase ``beta`` cached."""
    position = np.atleast_2d(np.asarray(position, dtype=np.complex128))
    return ChainState(position, np.atleast_1d(log_density(D.scaled(beta), position)), phase_index)


def _ratio_estimate(log_w: np.ndarray) -> tuple[float, float, float]:
    """Ratio estimate, standard error of its log, and ESS from per-chain log-weight traces."""
    N = log_w.size
    top = float(np.max(log_w))
    if not np.isfinite(top) or not np.all(np.isfinite(log_w)):
        raise NonFiniteWeight("non-finite annealing weight")
    w = np.exp(log_w - top)
    mean = float(np.mean(w))
    var = float(np.var(w, ddof=1)) if N > 1 else 0.0
    if var == 0.0:
        return mean * np.exp(top), 0.0, float(N)
    ess = effective_sample_size(w) if w.shape[1] >= 4 else float(N)
    ess = max(ess, 1.0)
    se_log = np.sqrt(var / ess) / mean
    return mean * np.exp(top), float(se_log), float(ess)


def estimate_anneal(D: DensityModel, cfg: SamplerConfig = SamplerConfig()) -> EstimateReport:
    """Annealed estimate ``per A = prod_k Z(beta_{k+1}) / Z(beta_k)`` with ``Z(0) = 1``.

    The standard error is propagated on the log scale across phases (delta
    method) and mapped back to the estimate.

    Raises:
        ChainDiverged: if a chain coordinate exceeds ``1e3`` in magnitude.
        NonFiniteWeight: if an annealing weight is not finite.
    """
    start = time.perf_counter()
    n = D.n
    L = np.asarray(D.forms.coefficients)
    schedule = cfg.schedule_for(n)
    eps = cfg.step_size_for(n)
    chain_seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
    rngs = [np.random.default_rng(s) for s in chain_seeds]

    groups = np.array_split(np.arange(cfg.chains), min(cfg.threads, cfg.chains))
    pool = ThreadPoolExecutor(max_workers=len(groups)) if len(groups) > 1 else None

    log_total = 0.0
    var_log = 0.0
    ess_min = np.inf
    rates = []
    ratios = []
    samples = 0
    state = None
    try:
        for k in range(len(schedule) - 1):
            beta, beta_next = float(schedule[k]), float(schedule[k + 1])
            if k == 0:
                # exact draws from the Gaussian base phase
                draws = np.stack(
                    [sample_complex_gaussian(n, cfg.steps_per_phase, rng) for rng in rngs]
                )
                e = np.abs(draws @ L.T) ** 2
                log_w = np.sum(np.log1p(beta_next * e), axis=2)
                state = phase_state(D, 0.0, draws[:, -1, :], 0)
                rates.append(1.0)
                samples += draws.shape[0] * draws.shape[1]
            else:
                # the cached density changes with the phase and is recomputed
                state = phase_state(D, beta, state.position, k)
                jobs = [
                    (L, beta, beta_next,
                     ChainState(state.position[g], state.cached_log_density[g], k),
                     [rngs[c] for c in g], cfg.burn_in, cfg.steps_per_phase, eps, cfg.proposal)
                    for g in groups
                ]
                if pool is None:
                    results = [_run_chains(*job) for job in jobs]
                else:
                    results = list(pool.map(lambda job: _run_chains(*job), jobs))
                state = ChainState(
                    np.concatenate([r[0].position for r in results]),
                    np.concatenate([r[0].cached_log_density for r in results]),
                    k,
                )
                log_w = np.concatenate([r[1] for r in results])
                accepted = sum(r[2] for r in results)
                rates.append(accepted / log_w.size)
                samples += cfg.chains * (cfg.burn_in + cfg.steps_per_phase)
            ratio, se_log, ess = _ratio_estimate(log_w)
            ratios.append(ratio)
            log_total += np.log(ratio)
            var_log += se_log**2
            ess_min = min(ess_min, ess)
    finally:
        if pool is not None:
            pool.shutdown()

    estimate = float(np.exp(log_total))
    return EstimateReport(
        method="anneal",
        estimate=estimate,
        std_error=estimate * float(np.sqrt(var_log)),
        effective_sample_size=float(ess_min),
        acceptance_rates=tuple(rates),
        samples_used=samples,
        wall_clock=time.perf_counter() - start,
        seed=cfg.seed,
        schedule=tuple(float(b) for b in schedule),
        phase_ratios=tuple(ratios),
    )
