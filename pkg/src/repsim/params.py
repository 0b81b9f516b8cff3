"""Link parameters, validation and derived quantities shared by all models.

Unit conventions: fiber lengths in km, interferometric offsets in meters,
times in seconds, frequencies in Hz.  Conversions live here so the other
modules never multiply by 1000 themselves.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path

KM_TO_M = 1000.0

# Speed of light in fiber (default optical path) and in vacuum, m/s.
FIBER_LIGHT_SPEED = 2.0e8
VACUUM_LIGHT_SPEED = 2.998e8


class Scheme(Enum):
    """Entanglement generation scheme of an elementary link.

    SS: single-photon interference, single excitation (DLCZ-style dual rail).
    ST: single-photon interference, two excitations built by pairing two
        heralds from different modes.
    TT: two-photon interference, two excitations.
    """

    SS = "ss"
    ST = "st"
    TT = "tt"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown scheme {text!r}; expected one of ss, st, tt") from None


class ParamError(ValueError):
    """A parameter set violates one or more invariants."""


@dataclass(frozen=True)
class SimParams:
    """All physical and protocol parameters of one link configuration.

    Defaults are the realistic multiplexed-repeater operating point used
    throughout: pair emission 0.01, 100 frequency x 30 temporal modes,
    620 ns temporal spacing, 100 MHz frequency spacing, detector 0.9,
    memory 0.5, frequency-mapper 0.9, 0.2 dB/km fiber.
    """

    p_tps: float = 0.01          # per-mode pair-emission probability
    M: int = 100                 # frequency modes
    N: int = 30                  # temporal modes
    delta_t: float = 620e-9      # temporal mode interval, s
    delta_f: float = 1e8         # frequency mode interval, Hz
    eta_det: float = 0.9         # detector efficiency
    eta_qm: float = 0.5          # quantum-memory efficiency
    eta_fm: float = 0.9          # frequency-mapper efficiency
    loss_db_per_km: float = 0.2
    link_length_km: float = 0.0  # elementary link length L (node to node)
    light_speed_m_per_s: float = FIBER_LIGHT_SPEED

    # -- derived quantities ------------------------------------------------

    @property
    def nm(self) -> int:
        """Total mode count N*M."""
        return self.N * self.M

    def q(self) -> float:
        """Per-mode single-photon herald probability 2*p_tps*eta_det*eta_att(L/2)."""
        return 2.0 * self.p_tps * self.eta_det * attenuation(
            self.link_length_km / 2.0, self.loss_db_per_km
        )

    def q_tt(self) -> float:
        """Per-mode two-photon herald probability (p_tps*eta_det*eta_att(L/2))^2 / 2."""
        single = self.p_tps * self.eta_det * attenuation(
            self.link_length_km / 2.0, self.loss_db_per_km
        )
        return single * single / 2.0

    def eta(self) -> float:
        """Composite retrieval/detection efficiency eta_qm*eta_fm*eta_det."""
        return effective_eta(self.eta_qm, self.eta_fm, self.eta_det)

    def trial_time(self) -> float:
        """Elementary-link trial duration t0 = N*delta_t + L/c, in seconds."""
        return self.N * self.delta_t + self.link_length_km * KM_TO_M / self.light_speed_m_per_s


def attenuation(distance_km: float, loss_db_per_km: float) -> float:
    """Fiber transmittance 10^(-loss*distance/10) over ``distance_km``."""
    if distance_km < 0:
        raise ParamError(f"distance must be >= 0, got {distance_km}")
    if loss_db_per_km < 0:
        raise ParamError(f"loss must be >= 0 dB/km, got {loss_db_per_km}")
    return 10.0 ** (-loss_db_per_km * distance_km / 10.0)


def effective_eta(eta_qm: float, eta_fm: float, eta_det: float) -> float:
    """Composite efficiency: product of memory, frequency-mapper and detector."""
    for name, value in (("eta_qm", eta_qm), ("eta_fm", eta_fm), ("eta_det", eta_det)):
        if not 0.0 <= value <= 1.0:
            raise ParamError(f"{name} must be in [0, 1], got {value}")
    return eta_qm * eta_fm * eta_det


def validate(params: SimParams) -> SimParams:
    """Check every invariant of ``params``; return it unchanged if valid.

    Raises ParamError naming each violated invariant with the offending
    value.  The derived per-mode herald probability q must not exceed 1.
    """
    problems = []
    for name in ("p_tps", "eta_det", "eta_qm", "eta_fm"):
        value = getattr(params, name)
        if not 0.0 <= value <= 1.0:
            problems.append(f"{name} = {value} outside [0, 1]")
    for name in ("M", "N"):
        value = getattr(params, name)
        if not isinstance(value, int) or value < 1:
            problems.append(f"{name} >= 1 required, got {value!r}")
    if params.delta_t < 0:
        problems.append(f"delta_t = {params.delta_t} < 0")
    if params.delta_f < 0:
        problems.append(f"delta_f = {params.delta_f} < 0")
    if params.loss_db_per_km < 0:
        problems.append(f"loss_db_per_km = {params.loss_db_per_km} < 0")
    if params.link_length_km < 0:
        problems.append(f"link_length_km = {params.link_length_km} < 0")
    if params.light_speed_m_per_s <= 0:
        problems.append(f"light_speed_m_per_s = {params.light_speed_m_per_s} <= 0")
    if not problems:
        q = params.q()
        if q > 1.0:
            problems.append(f"q = {q:g} > 1 (per-mode herald probability)")
    if problems:
        raise ParamError("; ".join(problems))
    return params


def load_config(path: str | Path) -> SimParams:
    """Read a flat JSON config holding SimParams fields; unknown keys rejected."""
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, dict):
        raise ParamError(f"config {path} must hold a JSON object")
    return params_from_dict(raw)


def params_from_dict(raw: dict) -> SimParams:
    known = {f.name for f in fields(SimParams)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ParamError(f"unknown config keys: {', '.join(unknown)}")
    coerced = {}
    for f in fields(SimParams):
        if f.name not in raw:
            continue
        value = raw[f.name]
        coerced[f.name] = int(value) if f.name in ("M", "N") else float(value)
    return validate(SimParams(**coerced))


def with_link_length(params: SimParams, link_length_km: float) -> SimParams:
    return validate(replace(params, link_length_km=link_length_km))
