"""Randomizing densities for the query parameter.

The estimators in this package never differentiate the payoff. Instead the
parameter is drawn from a small density centered at the query point lambda0
and the derivative is recovered by kernel regression. Two families are
supported on [-epsilon, epsilon]:

- ``uniform``: density 1/(2 epsilon)
- ``truncexp``: density theta e^{theta l} / (e^{theta eps} - e^{-theta eps})

theta = 0 recovers the uniform case exactly. Both families have a constant
log-density gradient on the support (0 and theta), which is what makes the
two single-kernel estimators coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutsideSupport

__all__ = ["Randomizer", "OffsetSample", "uniform_randomizer", "truncexp_randomizer", "antithetic_of"]

# switch to the series expansion of the normalization below this |theta*eps|
_SMALL_TILT = 1e-6


@dataclass(frozen=True)
class OffsetSample:
    """One randomized draw: the offset l and the shifted parameter lambda0 - l."""

    offset: float
    lam: float


@dataclass(frozen=True)
class Randomizer:
    """Randomizing density on [-epsilon, epsilon], uniform or tilted exponential."""

    kind: str
    epsilon: float
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "truncexp"):
            raise ValueError(f"unknown randomizer kind {self.kind!r}")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.kind == "uniform" and self.theta != 0.0:
            raise ValueError("uniform randomizer does not take a tilt; use truncexp")

    # -- density ---------------------------------------------------------

    def _norm_at_zero(self) -> float:
        """The value theta / (e^{theta eps} - e^{-theta eps}), stable near theta = 0."""
        te = self.theta * self.epsilon
        if abs(te) < _SMALL_TILT:
            # theta / (2 sinh(theta eps)) expanded to second order in (theta eps)^2
            return 1.0 / (2.0 * self.epsilon * (1.0 + te * te / 6.0 + te**4 / 120.0))
        return self.theta / (2.0 * math.sinh(te))

    def density(self, l):
        """Density at offset l (vectorized); zero outside the closed support."""
        l = np.asarray(l, dtype=float)
        inside = np.abs(l) <= self.epsilon
        vals = np.where(inside, self._norm_at_zero() * np.exp(self.theta * l), 0.0)
        return float(vals) if vals.ndim == 0 else vals

    def density_at_zero(self) -> float:
        """The prefactor ell(0) appearing in every kernel estimator."""
        return self._norm_at_zero()

    def grad_log_density(self, l):
        """d/dl of log density: 0 for uniform, the constant theta otherwise.

        Raises :class:`OutsideSupport` when any |l| exceeds epsilon, since
        the log-density is undefined there.
        """
        l = np.asarray(l, dtype=float)
        if np.any(np.abs(l) > self.epsilon):
            raise OutsideSupport(f"offset outside [-{self.epsilon}, {self.epsilon}]")
        vals = np.full_like(l, self.theta)
        return float(vals) if vals.ndim == 0 else vals

    # -- sampling --------------------------------------------------------

    def sample_offsets(self, u):
        """Inverse-CDF transform of uniforms u in [0, 1) to offsets (vectorized)."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u >= 1.0):
            raise ValueError("uniforms must lie in [0, 1)")
        te = self.theta * self.epsilon
        if abs(te) < 1e-12:
            out = -self.epsilon + 2.0 * self.epsilon * u
        else:
            # l = log(e^{-te} + u (e^{te} - e^{-te})) / theta, written with
            # expm1/log1p so it stays accurate for small tilts
            lo = np.expm1(-te)
            width = np.expm1(te) - lo
            # at extreme tilts e^{-theta eps} underflows and the u ~ 0
            # quantile evaluates as log1p(-1) = -inf; the clip below snaps
            # it to the support edge, which is the correct limit
            with np.errstate(divide="ignore"):
                out = np.log1p(lo + u * width) / self.theta
        # guard against roundoff pushing a draw just past the edge
        out = np.clip(out, -self.epsilon, self.epsilon)
        return float(out) if out.ndim == 0 else out

    def sample_offset(self, u: float, lambda0: float) -> OffsetSample:
        """Single inverse-CDF draw packaged with the shifted parameter."""
        l = float(self.sample_offsets(u))
        return OffsetSample(offset=l, lam=lambda0 - l)

    def cdf(self, l):
        """Analytic CDF on the support (used by distributional tests)."""
        l = np.asarray(l, dtype=float)
        clipped = np.clip(l, -self.epsilon, self.epsilon)
        te = self.theta * self.epsilon
        if abs(te) < 1e-12:
            vals = (clipped + self.epsilon) / (2.0 * self.epsilon)
        else:
            lo = np.expm1(-te)
            width = np.expm1(te) - lo
            vals = (np.expm1(self.theta * clipped) - lo) / width
        return float(vals) if vals.ndim == 0 else vals


def uniform_randomizer(epsilon: float) -> Randomizer:
    return Randomizer(kind="uniform", epsilon=epsilon)


def truncexp_randomizer(epsilon: float, theta: float) -> Randomizer:
    return Randomizer(kind="truncexp", epsilon=epsilon, theta=theta)


def antithetic_of(sample: OffsetSample, lambda0: float) -> OffsetSample:
    """Reflect a draw about lambda0: offset flips sign for both density kinds."""
    return OffsetSample(offset=-sample.offset, lam=lambda0 + sample.offset)
