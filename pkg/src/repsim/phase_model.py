"""Interferometric phase of heralded states and stabilization budgets.

The single-excitation scheme picks up the full optical frequency times the
path-length asymmetry; the paired-herald scheme only the frequency-mode
separation times the asymmetry, which is what relaxes the stabilization
requirement.  Phase fluctuations are modeled as Gaussian with standard
deviation sigma, giving fidelity (1 + exp(-sigma^2/2)) / 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .params import VACUUM_LIGHT_SPEED

_TWO_PI = 2.0 * math.pi
_SUM_TOL = 1e-6  # relative tolerance on the idler+signal frequency-sum rule


def reduce_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    reduced = math.remainder(angle, _TWO_PI)
    if reduced <= -math.pi:
        reduced += _TWO_PI
    return reduced


@dataclass(frozen=True)
class PhaseConfig:
    """Optical frequencies, path lengths and pump phases of one link.

    Frequencies are arrays indexed by frequency mode (0-based).  Within each
    node the idler+signal frequency sum must be mode-independent (pump-
    determined).  Path lengths are in meters: L_ai/L_bi run from each node's
    source to the central station, L_as/L_bs from the source to the memory.
    """

    f_idler: Sequence[float]
    f_signal_a: Sequence[float]
    f_signal_b: Sequence[float]
    l_ai: float
    l_bi: float
    l_as: float
    l_bs: float
    theta_a: float = 0.0
    theta_b: float = 0.0
    light_speed: float = VACUUM_LIGHT_SPEED

    def __post_init__(self):
        n = len(self.f_idler)
        if not (len(self.f_signal_a) == len(self.f_signal_b) == n) or n == 0:
            raise ValueError("frequency arrays must be equal-length and non-empty")
        for label, arr in (("f_idler", self.f_idler),
                           ("f_signal_a", self.f_signal_a),
                           ("f_signal_b", self.f_signal_b)):
            if any(f <= 0 for f in arr):
                raise ValueError(f"{label} must be positive")
        for label, length in (("l_ai", self.l_ai), ("l_bi", self.l_bi),
                              ("l_as", self.l_as), ("l_bs", self.l_bs)):
            if length < 0:
                raise ValueError(f"{label} must be >= 0")
        for signals, node in ((self.f_signal_a, "A"), (self.f_signal_b, "B")):
            sums = [fi + fs for fi, fs in zip(self.f_idler, signals)]
            if max(sums) - min(sums) > _SUM_TOL * max(sums):
                raise ValueError(
                    f"idler+signal frequency sum varies across modes at node {node}")

    @property
    def delta_l_idler(self) -> float:
        return self.l_bi - self.l_ai

    @property
    def delta_l_signal(self) -> float:
        return self.l_bs - self.l_as

    @property
    def delta_theta(self) -> float:
        return self.theta_b - self.theta_a

    @classmethod
    def equidistant(cls, f_idler_base: float, delta_f: float, modes: int,
                    f_pump_a: float, f_pump_b: float, **kwargs) -> "PhaseConfig":
        """Comb of ``modes`` idler frequencies spaced by ``delta_f``; signal
        frequencies follow from the pump sums."""
        idlers = [f_idler_base + m * delta_f for m in range(modes)]
        return cls(
            f_idler=idlers,
            f_signal_a=[f_pump_a - f for f in idlers],
            f_signal_b=[f_pump_b - f for f in idlers],
            **kwargs,
        )


@dataclass(frozen=True)
class PhaseBudget:
    """Stabilization budget: phase spread, fidelity, and displacement bound."""

    sigma: float              # phase fluctuation std, rad
    fidelity: float
    freq_separation: float    # (m - m') * delta_f, Hz
    max_displacement: float   # path-difference std producing sigma, meters

    def __post_init__(self):
        implied = fidelity_from_sigma(self.sigma)
        if abs(implied - self.fidelity) > 1e-12:
            raise ValueError(
                f"fidelity {self.fidelity} inconsistent with sigma {self.sigma}")


def relative_phase_ss(config: PhaseConfig, m: int, reduce: bool = True) -> float:
    """Relative phase of the single-herald state in frequency mode ``m``.

    (2*pi/c) * (f_i[m]*dL_i + f_bs[m]*L_bs - f_as[m]*L_as) + (theta_b - theta_a),
    reduced to (-pi, pi] unless ``reduce`` is False.
    """
    phase = _TWO_PI / config.light_speed * (
        config.f_idler[m] * config.delta_l_idler
        + config.f_signal_b[m] * config.l_bs
        - config.f_signal_a[m] * config.l_as
    ) + config.delta_theta
    return _reduce(phase) if reduce else phase


def relative_phase_st(m: int, m_prime: int, delta_f: float,
                      delta_l_idler: float, delta_l_signal: float,
                      light_speed: float = VACUUM_LIGHT_SPEED,
                      reduce: bool = True) -> float:
    """Relative phase of the paired-herald state for modes (m, m').

    2*pi*(m - m')*delta_f*(dL_i - dL_s)/c, reduced to (-pi, pi] unless
    ``reduce`` is False.  Antisymmetric under m <-> m'.
    """
    phase = _TWO_PI * (m - m_prime) * delta_f * (
        delta_l_idler - delta_l_signal) / light_speed
    return _reduce(phase) if reduce else phase


def fidelity_from_sigma(sigma: float) -> float:
    """Fidelity under Gaussian phase noise of std ``sigma``: (1+e^(-s^2/2))/2."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return (1.0 + math.exp(-sigma * sigma / 2.0)) / 2.0


def sigma_from_fidelity(target_fidelity: float) -> float:
    """Phase-fluctuation std giving ``target_fidelity``; inverse of the above."""
    if not 0.5 < target_fidelity <= 1.0:
        raise ValueError(
            f"fidelity must be in (0.5, 1], got {target_fidelity}")
    return math.sqrt(-2.0 * math.log(2.0 * target_fidelity - 1.0))


def displacement_budget(target_fidelity: float, freq_separation: float,
                        light_speed: float = VACUUM_LIGHT_SPEED) -> float:
    """Path-difference fluctuation (m) keeping fidelity at ``target_fidelity``.

    Inverts the fidelity model to a phase std sigma, then converts through
    the paired-herald phase sensitivity: displacement = sigma*c/(2*pi*df).
    """
    if freq_separation <= 0:
        raise ValueError("frequency separation must be positive")
    sigma = sigma_from_fidelity(target_fidelity)
    return sigma * light_speed / (_TWO_PI * freq_separation)


def phase_budget(target_fidelity: float, freq_separation: float,
                 light_speed: float = VACUUM_LIGHT_SPEED) -> PhaseBudget:
    sigma = sigma_from_fidelity(target_fidelity)
    return PhaseBudget(
        sigma=sigma,
        fidelity=fidelity_from_sigma(sigma),
        freq_separation=freq_separation,
        max_displacement=displacement_budget(target_fidelity, freq_separation,
                                             light_speed),
    )
