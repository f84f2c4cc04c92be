"""
Laser Pulses and the Time Absorber

Gaussian-envelope pulses summed into the field E(t), and the monomial time
absorber V_opt(t) acting on the complement of the active space after the
physical end time T0.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from src.utils.errors import InvalidInputError

# Peak V_opt; with the quadratic ramp over a span of 20 this attenuates by exp(-33)
ABSORBER_STRENGTH = 5.0


@dataclass(frozen=True)
class PulseSpec:
    """One pulse E * cos(omega (t - center)) * exp(-((t - center) / width)**2)."""
    amplitude: float
    frequency: float
    center: float
    width: float

    def __post_init__(self):
        for name in ("amplitude", "frequency", "center", "width"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidInputError(f"pulse {name} must be finite")
        if self.width <= 0:
            raise InvalidInputError(f"pulse width must be positive, got {self.width}")

    def evaluate(self, t) -> np.ndarray:
        shifted = np.asarray(t, dtype=float) - self.center
        return self.amplitude * np.cos(self.frequency * shifted) * np.exp(-(shifted / self.width) ** 2)

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "frequency": self.frequency,
                "center": self.center, "width": self.width}


def eval_field(pulses: Sequence[PulseSpec], t) -> np.ndarray:
    """
    Total field E(t) = sum of all pulses.

    Args:
        pulses: Pulse list (may be empty)
        t: Scalar time or array of times

    Returns:
        Field values with the shape of t
    """
    t = np.asarray(t, dtype=float)
    field = np.zeros_like(t)
    for pulse in pulses:
        field = field + pulse.evaluate(t)
    return field


def pulses_from_spec(entries: Iterable[dict]) -> tuple:
    pulses = []
    for i, entry in enumerate(entries):
        try:
            pulses.append(PulseSpec(amplitude=float(entry["amplitude"]),
                                    frequency=float(entry["frequency"]),
                                    center=float(entry["center"]),
                                    width=float(entry["width"])))
        except KeyError as e:
            raise InvalidInputError(f"pulse {i} is missing key {e}") from e
    return tuple(pulses)


@dataclass(frozen=True)
class TimeAbsorber:
    """
    Time absorber V_opt(t) = strength * ((t - T0) / (T - T0))**exponent on (T0, T].

    Args:
        T0: Physical end time; V_opt vanishes for t <= T0
        T: Total duration
        exponent: Monomial ramp exponent p
        strength: Peak value V_max reached at t = T
    """
    T0: float
    T: float
    exponent: float = 2.0
    strength: float = ABSORBER_STRENGTH

    def __post_init__(self):
        if not 0 < self.T0 < self.T:
            raise InvalidInputError(f"time absorber needs 0 < T0 < T, got T0={self.T0}, T={self.T}")
        if self.exponent < 0 or self.strength < 0:
            raise InvalidInputError("time absorber exponent and strength must be >= 0")

    @property
    def span(self) -> float:
        return self.T - self.T0

    def value(self, t) -> np.ndarray:
        ramp = np.clip((np.asarray(t, dtype=float) - self.T0) / self.span, 0.0, None)
        return np.where(ramp > 0.0, self.strength * ramp ** self.exponent, 0.0)

    def attenuation(self, hbar: float = 1.0) -> float:
        """Decay exp(-int_T0^T V_opt dt / hbar) of a complement amplitude over the absorber."""
        return float(np.exp(-self.integral(self.T) / hbar))

    def integral(self, t) -> np.ndarray:
        """Closed-form int_0^t V_opt dt'."""
        ramp = np.clip((np.asarray(t, dtype=float) - self.T0) / self.span, 0.0, None)
        return self.strength * self.span / (self.exponent + 1.0) * ramp ** (self.exponent + 1.0)
