"""Replicated experiments: execution, references, summaries, rate fits.

This module turns one :class:`ExperimentConfig` into R independent
estimates on deterministic random streams, compares them against an
oracle reference (closed form where available, a tuned high-N finite
difference for the path-dependent state), and fits log-log convergence
rates over sample-size grids. Everything is reproducible bit for bit
from (config, seed) regardless of the worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bandwidth import BandwidthChoice, PilotEstimates, select_bandwidth
from .errors import InsufficientReplications, NonPositiveVariance, RandomizerMismatch
from .estimators import (
    EstimatorConfig,
    FdConfig,
    SampleSet,
    estimate_double_kernel,
    estimate_exponential_opt,
    estimate_finite_difference,
    estimate_oracle_score,
    estimate_single_kernel_check,
    estimate_single_kernel_hat,
    estimate_uniform_opt,
)
from .kernels import Kernel, builtin_kernel
from .models import (
    AsianConfig,
    GbmParams,
    Payoff,
    closed_form_digital_delta,
    closed_form_identity_delta,
    closed_form_vanilla_delta,
    simulate_asian,
    simulate_terminal,
)
from .randomizers import Randomizer
from .rng import PILOT_OFFSET, STREAM_REFERENCE, stream, sweep_base

__all__ = [
    "ExperimentConfig",
    "RunResult",
    "ExperimentSummary",
    "RateFit",
    "KERNEL_ESTIMATORS",
    "ESTIMATOR_IDS",
    "PILOT_N",
    "resolve_run",
    "run_replications",
    "reference_value",
    "asian_fd_reference",
    "tune_fd_bump",
    "summarize",
    "kde_of_estimates",
    "kde_grid",
    "fit_loglog",
    "convergence_rate_fit",
]

#: estimators that smooth over a randomized parameter
KERNEL_ESTIMATORS = ("hat", "check", "uniform", "exponential", "double")

ESTIMATOR_IDS = KERNEL_ESTIMATORS + ("lr", "fd")

#: pilot draws used to select an automatic bandwidth
PILOT_N = 10_000

#: path count of the high-N finite-difference reference
REFERENCE_N = 10_000_000

#: paths per chunk when accumulating the reference
_REFERENCE_CHUNK = 200_000

#: candidate bumps for the reference, as fractions of spot
_FD_BUMP_FRACTIONS = (0.0025, 0.005, 0.01, 0.02, 0.04, 0.08)


@dataclass(frozen=True)
class ExperimentConfig:
    """One replication study, fully determined together with the seed.

    ``bandwidth`` is either the string "auto" (run the pilot pipeline
    before the main run) or a fixed positive value. ``theta`` is the
    exponential tilt; None lets the pilot optimize it in auto mode and
    means 0 otherwise. The uniform and exponential estimators force
    their own randomizer kind; hat/check/double follow
    ``randomizer_kind``.
    """

    model: GbmParams
    payoff: Payoff
    estimator_id: str
    asian: AsianConfig | None = None
    kernel_family: str = "p2"
    randomizer_kind: str = "uniform"
    bandwidth: float | str = "auto"
    theta: float | None = None
    n_samples: int = 100_000
    replications: int = 100
    seed: int = 12345
    antithetic: bool = False
    fd_alpha: float = 0.5
    fd_eps: float = 0.5

    def __post_init__(self):
        if self.estimator_id not in ESTIMATOR_IDS:
            raise ValueError(f"unknown estimator {self.estimator_id!r}")
        if self.n_samples < 1 or self.replications < 1:
            raise ValueError("need n_samples >= 1 and replications >= 1")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "auto":
                raise ValueError("bandwidth must be 'auto' or a positive number")
            if self.estimator_id not in KERNEL_ESTIMATORS:
                raise ValueError("automatic bandwidth needs a kernel estimator")
        elif self.bandwidth <= 0.0:
            raise ValueError("fixed bandwidth must be positive")
        if self.randomizer_kind not in ("uniform", "truncexp"):
            raise ValueError(f"unknown randomizer kind {self.randomizer_kind!r}")
        if self.antithetic:
            if self.estimator_id not in KERNEL_ESTIMATORS:
                raise ValueError("antithetic pairing applies to kernel estimators only")
            if self.n_samples % 2:
                raise ValueError("antithetic pairing needs an even n_samples")

    @property
    def effective_randomizer_kind(self) -> str:
        if self.estimator_id == "uniform":
            return "uniform"
        if self.estimator_id == "exponential":
            return "truncexp"
        return self.randomizer_kind


@dataclass(frozen=True)
class RunResult:
    """Replication estimates plus the resolved run parameters."""

    estimates: np.ndarray
    runtime_ms: np.ndarray
    h: float | None
    theta: float | None
    epsilon: float | None
    pilot: PilotEstimates | None = None
    choice: BandwidthChoice | None = None


@dataclass(frozen=True)
class ExperimentSummary:
    """Replication statistics against a reference value."""

    estimates: np.ndarray
    mean: float
    bias: float
    variance: float
    mse: float
    stderr: float
    reference: float | None
    reference_source: str


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of ln(mse) against ln(N)."""

    grid_N: np.ndarray
    log_mse: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    mse: np.ndarray
    h: tuple


@dataclass(frozen=True)
class _RunPlan:
    kernel: Kernel | None
    second_kernel: Kernel | None
    h: float | None
    theta: float | None
    randomizer: Randomizer | None
    pilot: PilotEstimates | None
    choice: BandwidthChoice | None


def _draw_gauss(rng: np.random.Generator, n: int, asian: AsianConfig | None) -> np.ndarray:
    if asian is None:
        return rng.standard_normal(n)
    return rng.standard_normal((n, asian.steps))


def _states_at(cfg: ExperimentConfig, gauss: np.ndarray, spot) -> np.ndarray:
    if cfg.asian is None:
        return simulate_terminal(cfg.model, gauss, spot=spot)
    return np.atleast_1d(simulate_asian(cfg.model, cfg.asian, gauss, spot=spot))


def resolve_run(cfg: ExperimentConfig, stream_base: int = 0) -> _RunPlan:
    """Fix kernel, bandwidth, tilt and randomizer before replicating.

    Automatic bandwidth runs the pilot pipeline once, on its own stream,
    so every replication sees the same resolved parameters.
    """
    if cfg.estimator_id not in KERNEL_ESTIMATORS:
        return _RunPlan(None, None, None, None, None, None, None)
    kernel = builtin_kernel(cfg.kernel_family)
    kind = cfg.effective_randomizer_kind
    if kind == "uniform" and cfg.theta not in (None, 0.0):
        raise RandomizerMismatch("a uniform randomizer cannot carry a tilt")
    pilot = choice = None
    if cfg.bandwidth == "auto":
        rng = stream(cfg.seed, stream_base + PILOT_OFFSET)
        gauss = _draw_gauss(rng, PILOT_N, cfg.asian)
        states = _states_at(cfg, gauss, cfg.model.spot)
        mode = "uniform" if kind == "uniform" else "exponential"
        theta_arg = 0.0 if kind == "uniform" else cfg.theta
        pilot, choice = select_bandwidth(
            states, cfg.payoff, cfg.model.spot, kernel, mode, cfg.n_samples, theta=theta_arg
        )
        h, theta = choice.h_star, choice.theta_star
    else:
        h = float(cfg.bandwidth)
        theta = 0.0 if cfg.theta is None else float(cfg.theta)
    epsilon = kernel.support_radius * h
    if cfg.estimator_id == "double":
        # the leave-one-out density windows must stay inside the offset
        # support: with epsilon = M*h the support edge cuts through every
        # window and the estimated score picks up the smeared edge jump
        # (an O(1/h) ridge) instead of the model score. One extra kernel
        # radius keeps the windows of all outer-weighted draws clear.
        epsilon *= 2.0
    randomizer = Randomizer(kind=kind, epsilon=epsilon, theta=theta)
    second = kernel if cfg.estimator_id == "double" else None
    return _RunPlan(kernel, second, h, theta, randomizer, pilot, choice)


def _kernel_estimate(cfg: ExperimentConfig, plan: _RunPlan, lams: np.ndarray, gauss) -> float:
    states = _states_at(cfg, gauss, lams)
    phi = cfg.payoff(states)
    state_kind = "terminal" if cfg.asian is None else "asian"
    ss = SampleSet(
        lambda0=cfg.model.spot,
        lambdas=lams,
        states=states,
        payoffs=phi,
        randomizer=plan.randomizer,
        state_kind=state_kind,
    )
    eid = cfg.estimator_id
    if eid == "uniform":
        return estimate_uniform_opt(ss, plan.kernel, plan.h).value
    if eid == "exponential":
        return estimate_exponential_opt(ss, plan.kernel, plan.h, plan.theta).value
    ec = EstimatorConfig(
        kernel=plan.kernel,
        bandwidth=plan.h,
        randomizer=plan.randomizer,
        second_kernel=plan.second_kernel,
    )
    if eid == "hat":
        return estimate_single_kernel_hat(ss, ec).value
    if eid == "check":
        return estimate_single_kernel_check(ss, ec).value
    return estimate_double_kernel(ss, ec).value


def _one_replication(cfg: ExperimentConfig, plan: _RunPlan, stream_id: int) -> float:
    rng = stream(cfg.seed, stream_id)
    spot = cfg.model.spot
    if cfg.estimator_id == "fd":
        gauss = _draw_gauss(rng, cfg.n_samples, cfg.asian)
        fd = FdConfig(alpha=cfg.fd_alpha, bump=cfg.fd_eps)
        return estimate_finite_difference(cfg.model, cfg.payoff, fd, gauss, asian=cfg.asian).value
    if cfg.estimator_id == "lr":
        gauss = _draw_gauss(rng, cfg.n_samples, cfg.asian)
        states = _states_at(cfg, gauss, spot)
        ss = SampleSet(
            lambda0=spot,
            lambdas=np.full(cfg.n_samples, spot),
            states=states,
            payoffs=cfg.payoff(states),
            state_kind="terminal" if cfg.asian is None else "asian",
        )
        return estimate_oracle_score(ss, cfg.model).value
    n = cfg.n_samples // 2 if cfg.antithetic else cfg.n_samples
    offsets = plan.randomizer.sample_offsets(rng.random(n))
    gauss = _draw_gauss(rng, n, cfg.asian)
    value = _kernel_estimate(cfg, plan, spot - offsets, gauss)
    if not cfg.antithetic:
        return value
    mirrored = _kernel_estimate(cfg, plan, spot + offsets, gauss)
    return 0.5 * (value + mirrored)


def _default_workers() -> int:
    return min(4, os.cpu_count() or 1)


def run_replications(
    cfg: ExperimentConfig, workers: int | None = None, stream_base: int = 0
) -> RunResult:
    """Run R independent replications and collect their estimates.

    Replication j always consumes stream ``stream_base + j``, and the
    output array is indexed by j, so the result does not depend on the
    worker count. Estimator errors are re-raised with the replication
    index prepended.
    """
    plan = resolve_run(cfg, stream_base)
    r_count = cfg.replications
    estimates = np.empty(r_count)
    runtimes = np.empty(r_count)

    def job(j: int) -> tuple[float, float]:
        t0 = time.perf_counter()
        try:
            value = _one_replication(cfg, plan, stream_base + j)
        except Exception as exc:
            raise type(exc)(f"replication {j}: {exc}") from exc
        return value, (time.perf_counter() - t0) * 1e3

    w = _default_workers() if workers is None else max(1, workers)
    if w == 1 or r_count == 1:
        results = map(job, range(r_count))
        for j, (value, ms) in enumerate(results):
            estimates[j] = value
            runtimes[j] = ms
    else:
        with ThreadPoolExecutor(max_workers=w) as pool:
            for j, (value, ms) in enumerate(pool.map(job, range(r_count))):
                estimates[j] = value
                runtimes[j] = ms
    if plan.randomizer is None:
        epsilon = cfg.fd_eps if cfg.estimator_id == "fd" else None
    else:
        epsilon = plan.randomizer.epsilon
    return RunResult(
        estimates=estimates,
        runtime_ms=runtimes,
        h=plan.h,
        theta=plan.theta,
        epsilon=epsilon,
        pilot=plan.pilot,
        choice=plan.choice,
    )


def tune_fd_bump(
    model: GbmParams,
    payoff: Payoff,
    asian: AsianConfig,
    seed: int,
    n_target: int,
    pilot_n: int = 100_000,
) -> float:
    """Pick the centered-FD bump minimizing an estimated MSE at n_target.

    For each candidate bump the bias is estimated by comparing against
    the half-bump mean (the centered bias scales like the bump squared)
    and the variance from the per-sample spread; both use one shared
    pilot sample.
    """
    rng = stream(seed, STREAM_REFERENCE)
    gauss = rng.standard_normal((pilot_n, asian.steps))
    base = np.atleast_1d(simulate_asian(model, asian, gauss, spot=1.0))
    best_eps, best_score = None, np.inf
    for frac in _FD_BUMP_FRACTIONS:
        eps = frac * model.spot
        full = (payoff((model.spot + 0.5 * eps) * base) - payoff((model.spot - 0.5 * eps) * base)) / eps
        half = (payoff((model.spot + 0.25 * eps) * base) - payoff((model.spot - 0.25 * eps) * base)) / (0.5 * eps)
        bias = (float(np.mean(full)) - float(np.mean(half))) / 0.75
        score = bias * bias + float(np.var(full, ddof=1)) / n_target
        if score < best_score:
            best_eps, best_score = eps, score
    return best_eps


def asian_fd_reference(
    model: GbmParams,
    payoff: Payoff,
    asian: AsianConfig,
    seed: int,
    n: int = REFERENCE_N,
) -> float:
    """Centered finite-difference reference for the averaged state.

    Uses the tuned bump and a single sequential stream, accumulating in
    fixed-size chunks so memory stays bounded and the result is
    reproducible.
    """
    eps = tune_fd_bump(model, payoff, asian, seed, n_target=n)
    rng = stream(seed, STREAM_REFERENCE + 1)
    total = 0.0
    done = 0
    up, down = model.spot + 0.5 * eps, model.spot - 0.5 * eps
    while done < n:
        m = min(_REFERENCE_CHUNK, n - done)
        gauss = rng.standard_normal((m, asian.steps))
        base = np.atleast_1d(simulate_asian(model, asian, gauss, spot=1.0))
        total += float(np.sum(payoff(up * base) - payoff(down * base)))
        done += m
    return total / (n * eps)


def reference_value(cfg: ExperimentConfig) -> tuple[float, str]:
    """Oracle Delta for the configured payoff: closed form when exact."""
    if cfg.asian is None:
        kind = cfg.payoff.kind
        if kind == "digital":
            return closed_form_digital_delta(cfg.model, cfg.payoff.strike), "closed_form"
        if kind == "vanilla":
            return closed_form_vanilla_delta(cfg.model, cfg.payoff.strike), "closed_form"
        if kind == "identity":
            return closed_form_identity_delta(cfg.model), "closed_form"
        if kind == "constant":
            return 0.0, "closed_form"
    return (
        asian_fd_reference(cfg.model, cfg.payoff, cfg.asian, cfg.seed),
        "high_n_fd",
    )


def summarize(
    estimates: np.ndarray, reference: float | None, reference_source: str = "closed_form"
) -> ExperimentSummary:
    """Replication statistics; bias and mse are taken against the reference."""
    est = np.asarray(estimates, dtype=float)
    if est.size < 2:
        raise InsufficientReplications("summaries need at least two replications")
    mean = float(np.mean(est))
    variance = float(np.var(est, ddof=1))
    stderr = math.sqrt(variance / est.size)
    if reference is None:
        bias = mse = float("nan")
        reference_source = "none"
    else:
        bias = mean - reference
        mse = float(np.mean((est - reference) ** 2))
    return ExperimentSummary(
        estimates=est,
        mean=mean,
        bias=bias,
        variance=variance,
        mse=mse,
        stderr=stderr,
        reference=reference,
        reference_source=reference_source,
    )


def kde_grid(estimates: np.ndarray, points: int = 257) -> np.ndarray:
    """Evaluation grid spanning mean +/- 4 sample standard deviations."""
    est = np.asarray(estimates, dtype=float)
    center = float(np.mean(est))
    spread = float(np.std(est, ddof=1))
    return np.linspace(center - 4.0 * spread, center + 4.0 * spread, points)


def kde_of_estimates(estimates: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Gaussian kernel density of the replication estimates on a grid.

    The bandwidth is the normal rule of thumb 1.06 * std * R^(-1/5).
    """
    est = np.asarray(estimates, dtype=float)
    if est.size < 10:
        raise InsufficientReplications("density estimation needs at least 10 replications")
    spread = float(np.std(est, ddof=1))
    if spread == 0.0:
        raise NonPositiveVariance("estimates have zero spread")
    bw = 1.06 * spread * est.size ** (-0.2)
    grid = np.asarray(grid, dtype=float)
    u = (grid[:, None] - est[None, :]) / bw
    dens = np.exp(-0.5 * u * u).sum(axis=1) / (est.size * bw * math.sqrt(2.0 * math.pi))
    return dens


def fit_loglog(grid_N, mse) -> tuple[float, float, float]:
    """OLS slope, intercept and r^2 of ln(mse) on ln(N)."""
    n = np.asarray(grid_N, dtype=float)
    m = np.asarray(mse, dtype=float)
    if n.size != m.size or n.size < 2:
        raise ValueError("need matching grids with at least two points")
    x, y = np.log(n), np.log(m)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = y - np.mean(y)
    denom = float(np.dot(total, total))
    r2 = 1.0 - float(np.dot(resid, resid)) / denom if denom > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def convergence_rate_fit(
    cfg: ExperimentConfig,
    grid_N,
    replications: int | None = None,
    workers: int | None = None,
) -> RateFit:
    """Replicate the experiment across the N grid and fit the MSE slope.

    Point i of the grid gets its own disjoint stream block, and auto
    bandwidth is re-selected at every N. The grid must have at least 4
    strictly increasing points spanning two decades.
    """
    grid = np.asarray(grid_N, dtype=int)
    if grid.size < 4:
        raise ValueError("rate fits need at least 4 grid points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid_N must be strictly increasing")
    if grid[-1] < 100 * grid[0]:
        raise ValueError("grid_N must span at least two decades")
    reference, source = reference_value(cfg)
    mses, hs = [], []
    for i, n in enumerate(grid):
        sub = replace(
            cfg,
            n_samples=int(n),
            replications=int(replications or cfg.replications),
        )
        res = run_replications(sub, workers=workers, stream_base=sweep_base(i))
        summ = summarize(res.estimates, reference, source)
        mses.append(summ.mse)
        hs.append(res.h)
    mse_arr = np.asarray(mses)
    slope, intercept, r2 = fit_loglog(grid, mse_arr)
    return RateFit(
        grid_N=grid,
        log_mse=np.log(mse_arr),
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        mse=mse_arr,
        h=tuple(hs),
    )
