"""Delta estimators built on parameter randomization.

Every estimator here consumes a :class:`SampleSet` of randomized draws
(Lambda_i, Z_i, phi(Z_i)) around the query spot lambda0 and returns a
point estimate of d/dx E[phi(Z^x)] at lambda0. None of them differentiate
the payoff, which is the point: the digital call works as-is.

Estimator menu
--------------
- ``estimate_single_kernel_hat`` / ``estimate_single_kernel_check``:
  integration by parts against the randomizing density; the two differ
  only in where the log-density gradient is evaluated and coincide for
  the uniform and tilted-exponential families.
- ``estimate_uniform_opt`` / ``estimate_exponential_opt``: the same
  estimators specialized to the coupled support epsilon = M h, in the
  compact form used throughout the experiments.
- ``estimate_double_kernel``: plugs a leave-one-out kernel estimate of
  the score into the localized regression; needs a second kernel acting
  in the state dimension.
- ``estimate_oracle_score``: the score-weighted references, localized or
  the plain likelihood-ratio average at fixed spot.
- ``estimate_finite_difference``: bump-and-reprice with common random
  numbers, forward/centered/backward via alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateBandwidth,
    DegenerateBump,
    DimensionMismatch,
    EmptySample,
    InsufficientSamples,
    MissingSecondKernel,
    OutsideSupport,
    RandomizerMismatch,
    ScoreUnavailable,
)
from .kernels import Kernel
from .models import (
    AsianConfig,
    GbmParams,
    Payoff,
    law_standardized_d,
    lognormal_params,
    simulate_asian,
    simulate_terminal,
)
from .randomizers import Randomizer

__all__ = [
    "SampleSet",
    "EstimatorConfig",
    "Estimate",
    "FdConfig",
    "estimate_single_kernel_hat",
    "estimate_single_kernel_check",
    "estimate_uniform_opt",
    "estimate_exponential_opt",
    "estimate_double_kernel",
    "estimate_oracle_score",
    "estimate_finite_difference",
]

#: leave-one-out density values below 1e-12 * h^-2 are dropped
DENSITY_FLOOR_SCALE = 1e-12

#: row-chunk size of the pairwise double-kernel sweep
_PAIR_CHUNK = 512


@dataclass(frozen=True)
class SampleSet:
    """Randomized draws around the query spot.

    ``lambdas``, ``states`` and ``payoffs`` are parallel arrays holding
    Lambda_i, Z_i and phi(Z_i). When the generating randomizer is attached
    the draws are checked against its support. ``state_kind`` is
    "terminal" or "asian"; score-based estimators refuse the latter.
    """

    lambda0: float
    lambdas: np.ndarray
    states: np.ndarray
    payoffs: np.ndarray
    randomizer: Randomizer | None = None
    state_kind: str = "terminal"

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        z = np.atleast_1d(np.asarray(self.states, dtype=float))
        phi = np.atleast_1d(np.asarray(self.payoffs, dtype=float))
        if not (lam.shape == z.shape == phi.shape) or lam.ndim != 1:
            raise DimensionMismatch("lambdas, states and payoffs must be equal-length 1-d arrays")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "states", z)
        object.__setattr__(self, "payoffs", phi)
        if self.state_kind not in ("terminal", "asian"):
            raise ValueError(f"unknown state_kind {self.state_kind!r}")
        if self.randomizer is not None and lam.size:
            off = np.abs(self.lambda0 - lam)
            if np.max(off) > self.randomizer.epsilon * (1.0 + 1e-12):
                raise OutsideSupport("a draw lies outside the randomizer support")

    @property
    def n(self) -> int:
        return int(self.lambdas.size)


@dataclass(frozen=True)
class EstimatorConfig:
    """Kernel, bandwidth and randomizer shared by the kernel estimators."""

    kernel: Kernel
    bandwidth: float
    randomizer: Randomizer | None = None
    second_kernel: Kernel | None = None
    antithetic: bool = False


@dataclass(frozen=True)
class Estimate:
    """One point estimate with its provenance."""

    value: float
    n_samples: int
    estimator_id: str


@dataclass(frozen=True)
class FdConfig:
    """Finite-difference layout: alpha = 0 backward, 0.5 centered, 1 forward."""

    alpha: float
    bump: float
    common_randoms: bool = True

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.bump <= 0.0:
            raise DegenerateBump("bump must be positive")
        if not self.common_randoms:
            raise ValueError("independent-draw finite differences are not supported")


def _require_draws(samples: SampleSet) -> None:
    if samples.n == 0:
        raise EmptySample("sample set has no draws")


def _require_bandwidth(h: float) -> float:
    if not np.isfinite(h) or h <= 0.0:
        raise DegenerateBandwidth(f"bandwidth must be positive, got {h!r}")
    return float(h)


def _resolve_randomizer(samples: SampleSet, config: EstimatorConfig) -> Randomizer:
    cand = config.randomizer if config.randomizer is not None else samples.randomizer
    if cand is None:
        raise RandomizerMismatch("no randomizer available on the config or the sample set")
    gen = samples.randomizer
    if gen is not None and (
        gen.kind != cand.kind
        or abs(gen.epsilon - cand.epsilon) > 1e-12 * max(1.0, gen.epsilon)
        or abs(gen.theta - cand.theta) > 1e-12 * max(1.0, abs(gen.theta))
    ):
        raise RandomizerMismatch(
            f"config randomizer {cand} disagrees with the generating one {gen}"
        )
    return cand


def _finite(value: float, estimator_id: str) -> float:
    if not np.isfinite(value):
        raise FloatingPointError(f"{estimator_id} produced a non-finite value")
    return float(value)


def _single_kernel(samples: SampleSet, config: EstimatorConfig, at_zero: bool, tag: str) -> Estimate:
    _require_draws(samples)
    h = _require_bandwidth(config.bandwidth)
    r = _resolve_randomizer(samples, config)
    kernel = config.kernel
    offsets = samples.lambda0 - samples.lambdas
    u = offsets / h
    grad_log = r.grad_log_density(0.0) if at_zero else r.grad_log_density(offsets)
    terms = samples.payoffs * (kernel.gradient(u) + h * kernel(u) * grad_log)
    value = float(np.sum(terms)) / (r.density_at_zero() * samples.n * h * h)
    return Estimate(_finite(value, tag), samples.n, tag)


def estimate_single_kernel_hat(samples: SampleSet, config: EstimatorConfig) -> Estimate:
    """Kernel estimator with the log-density gradient at each drawn offset."""
    return _single_kernel(samples, config, at_zero=False, tag="hat")


def estimate_single_kernel_check(samples: SampleSet, config: EstimatorConfig) -> Estimate:
    """Kernel estimator with the log-density gradient frozen at offset 0."""
    return _single_kernel(samples, config, at_zero=True, tag="check")


def _coupled_epsilon(samples: SampleSet, kernel: Kernel, h: float, kind: str) -> float:
    """Support radius for the optimized estimators; must cover M*h."""
    needed = kernel.support_radius * h
    gen = samples.randomizer
    if gen is None:
        return needed
    if gen.kind != kind:
        raise RandomizerMismatch(f"samples were drawn with {gen.kind!r}, estimator wants {kind!r}")
    if gen.epsilon < needed * (1.0 - 1e-12):
        raise RandomizerMismatch(
            f"generating epsilon {gen.epsilon} is below the kernel window {needed}"
        )
    return gen.epsilon


def estimate_uniform_opt(samples: SampleSet, kernel: Kernel, bandwidth: float) -> Estimate:
    """Optimized uniform-randomization estimator, support coupled as eps = M h."""
    _require_draws(samples)
    h = _require_bandwidth(bandwidth)
    eps = _coupled_epsilon(samples, kernel, h, "uniform")
    terms = samples.payoffs * kernel.gradient((samples.lambda0 - samples.lambdas) / h)
    value = 2.0 * eps * float(np.sum(terms)) / (samples.n * h * h)
    return Estimate(_finite(value, "uniform"), samples.n, "uniform")


def estimate_exponential_opt(
    samples: SampleSet, kernel: Kernel, bandwidth: float, theta: float | None = None
) -> Estimate:
    """Optimized exponential-randomization estimator; theta = 0 is the uniform one."""
    _require_draws(samples)
    h = _require_bandwidth(bandwidth)
    gen = samples.randomizer
    if theta is None:
        if gen is None:
            raise RandomizerMismatch("theta not given and the sample set carries no randomizer")
        theta = gen.theta
    kind = "uniform" if (gen is not None and gen.kind == "uniform") else "truncexp"
    if kind == "uniform" and theta != 0.0:
        raise RandomizerMismatch("uniform samples require theta = 0")
    if gen is not None and abs(gen.theta - theta) > 1e-12 * max(1.0, abs(theta)):
        raise RandomizerMismatch(f"theta {theta} disagrees with the generating tilt {gen.theta}")
    eps = _coupled_epsilon(samples, kernel, h, kind)
    ell0 = Randomizer(kind="truncexp", epsilon=eps, theta=theta).density_at_zero()
    u = (samples.lambda0 - samples.lambdas) / h
    terms = samples.payoffs * (kernel.gradient(u) + theta * h * kernel(u))
    value = float(np.sum(terms)) / (ell0 * samples.n * h * h)
    return Estimate(_finite(value, "exponential"), samples.n, "exponential")


def estimate_double_kernel(samples: SampleSet, config: EstimatorConfig) -> Estimate:
    """Score plug-in estimator with leave-one-out kernel density ratios.

    For each draw the joint density of (Lambda, Z) and its
    Lambda-derivative are estimated from the other draws with the kernel
    pair (K, H), their ratio plus the log-density correction approximates
    the score, and the usual localized average is returned. Draws whose
    density estimate falls below 1e-12 * h^-2 are dropped.
    """
    _require_draws(samples)
    if samples.n < 2:
        raise InsufficientSamples("leave-one-out estimation needs at least two draws")
    if config.second_kernel is None:
        raise MissingSecondKernel("double-kernel estimation needs a state-dimension kernel")
    h = _require_bandwidth(config.bandwidth)
    kernel, second = config.kernel, config.second_kernel
    r = _resolve_randomizer(samples, config)
    n = samples.n

    order = np.argsort(samples.states, kind="stable")
    lam = samples.lambdas[order]
    z = samples.states[order]
    phi = samples.payoffs[order]

    window = second.support_radius * h
    den = np.empty(n)
    num = np.empty(n)
    for a in range(0, n, _PAIR_CHUNK):
        b = min(a + _PAIR_CHUNK, n)
        ja = int(np.searchsorted(z, z[a] - window, side="left"))
        jb = int(np.searchsorted(z, z[b - 1] + window, side="right"))
        du = (lam[a:b, None] - lam[None, ja:jb]) / h
        hz = second((z[a:b, None] - z[None, ja:jb]) / h)
        den[a:b] = np.sum(kernel(du) * hz, axis=1)
        num[a:b] = np.sum(kernel.gradient(du) * hz, axis=1)

    # remove the self pair, then apply the leave-one-out scalings
    den = (den - kernel(0.0) * second(0.0)) / ((n - 1) * h * h)
    num = (num - kernel.gradient(0.0) * second(0.0)) / ((n - 1) * h**3)

    keep = den >= DENSITY_FLOOR_SCALE / (h * h)
    score_hat = np.zeros(n)
    np.divide(num, den, out=score_hat, where=keep)
    score_hat += r.grad_log_density(samples.lambda0 - lam)
    weights = kernel((samples.lambda0 - lam) / h)
    total = float(np.sum(np.where(keep, phi * score_hat * weights, 0.0)))
    value = total / (r.density_at_zero() * n * h)
    return Estimate(_finite(value, "double"), n, "double")


def estimate_oracle_score(
    samples: SampleSet,
    model: GbmParams,
    config: EstimatorConfig | None = None,
    localized: bool = False,
) -> Estimate:
    """Score-weighted references for the terminal-state model.

    The default is the likelihood-ratio average (1/N) sum phi(Z_i)
    s(lambda0, Z_i), meant for draws at the fixed spot. With
    ``localized=True`` the score is evaluated at each randomized spot and
    the sum is kernel-localized like the other estimators, which needs a
    config.
    """
    _require_draws(samples)
    if samples.state_kind != "terminal":
        raise ScoreUnavailable("no closed-form score for the averaged state")
    law = lognormal_params(model)
    if not localized:
        svals = law_standardized_d(law, samples.lambda0, samples.states) / samples.lambda0
        value = float(np.mean(samples.payoffs * svals))
        return Estimate(_finite(value, "lr"), samples.n, "lr")
    if config is None:
        raise ValueError("localized score estimation needs an EstimatorConfig")
    h = _require_bandwidth(config.bandwidth)
    r = _resolve_randomizer(samples, config)
    svals = law_standardized_d(law, samples.lambdas, samples.states) / samples.lambdas
    weights = config.kernel((samples.lambda0 - samples.lambdas) / h)
    value = float(np.sum(samples.payoffs * svals * weights)) / (
        r.density_at_zero() * samples.n * h
    )
    return Estimate(_finite(value, "oracle"), samples.n, "oracle")


def estimate_finite_difference(
    model: GbmParams,
    payoff: Payoff,
    fd: FdConfig,
    gauss: np.ndarray,
    asian: AsianConfig | None = None,
) -> Estimate:
    """Bump-and-reprice estimator driven by shared normal draws.

    ``gauss`` has shape (N,) for the terminal state or (N, steps) for the
    averaged one; the same row drives both bumped spots, so smooth payoffs
    cancel pathwise.
    """
    gauss = np.asarray(gauss, dtype=float)
    n = gauss.shape[0] if gauss.ndim else 0
    if n == 0:
        raise EmptySample("no gaussian draws supplied")
    if asian is None:
        if gauss.ndim != 1:
            raise DimensionMismatch("terminal state expects a flat gaussian array")
        base = simulate_terminal(model, gauss, spot=1.0)
    else:
        base = simulate_asian(model, asian, gauss, spot=1.0)
        base = np.atleast_1d(base)
    up = model.spot + fd.alpha * fd.bump
    down = model.spot - (1.0 - fd.alpha) * fd.bump
    if down <= 0.0:
        raise DegenerateBump(f"downward bump crosses zero spot: {down}")
    value = float(np.mean(payoff(up * base) - payoff(down * base))) / fd.bump
    return Estimate(_finite(value, "fd"), n, "fd")
