"""Fading channel and monomial transmission-energy model.

Per-round channel gains are i.i.d. Gamma(shape=beta, rate=beta), so the
mean gain is 1 and the inverse-gain mean nu = beta/(beta-1) is available
in closed form. Transmitting b bits in a window of t seconds at gain g
costs lambda * b^ell / (g * t^(ell-1)) joules; ell in [2, 5] reflects
the modulation/coding regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .rng import CounterRng

import numpy as np


class InvalidDurationError(ValueError):
    """Transmission window must be strictly positive."""


class DivergentMomentError(ValueError):
    """E[1/g] diverges for Gamma shape <= 1."""


@dataclass(frozen=True)
class ChannelModel:
    """Gamma-fading channel with monomial energy constants.

    beta = math.inf degenerates to a constant unit gain (the hardened
    channel limit), which the simulator uses for deterministic runs.
    """

    beta: float
    lambda_coef: float = 1e-17
    ell: int = 3
    nu: float = field(init=False)

    def __post_init__(self):
        if not self.beta > 1.0:
            raise DivergentMomentError(
                f"gamma shape must exceed 1 for a finite inverse-gain mean, got {self.beta}"
            )
        if not (isinstance(self.ell, int) and 2 <= self.ell <= 5):
            raise ValueError(f"monomial order must be an integer in [2, 5], got {self.ell}")
        if not self.lambda_coef > 0.0:
            raise ValueError(f"energy coefficient must be positive, got {self.lambda_coef}")
        nu = 1.0 if math.isinf(self.beta) else self.beta / (self.beta - 1.0)
        object.__setattr__(self, "nu", nu)


def sample_gain(model: ChannelModel, rng: CounterRng) -> float:
    """One gain draw: Gamma(shape=beta, rate=beta), mean 1."""
    if math.isinf(model.beta):
        return 1.0
    return rng.gamma(model.beta) / model.beta


def sample_gains(model: ChannelModel, rng: CounterRng, n: int) -> np.ndarray:
    if math.isinf(model.beta):
        return np.ones(n)
    return rng.gammas(n, model.beta) / model.beta


def energy(model: ChannelModel, bits: float, duration: float, gain: float) -> float:
    """Joules to move `bits` within `duration` seconds at channel gain `gain`."""
    if duration <= 0.0:
        raise InvalidDurationError(f"transmission window must be positive, got {duration}")
    if bits < 0.0:
        raise ValueError(f"bit count must be nonnegative, got {bits}")
    if gain <= 0.0:
        raise ValueError(f"channel gain must be positive, got {gain}")
    return model.lambda_coef * bits**model.ell / (gain * duration ** (model.ell - 1))


def inverse_gain_mean(model: ChannelModel) -> float:
    """nu = E[1/g], known analytically for Gamma fading with shape > 1."""
    if not model.beta > 1.0:
        raise DivergentMomentError(f"E[1/g] diverges for shape {model.beta}")
    return model.nu
