"""Elementary-link heralding statistics and coincidence rates.

Closed forms cover the paired-herald (ST) and two-photon (TT) schemes; the
dual-rail single-excitation scheme (SS) has no closed-form rate and is
estimated by Monte Carlo over the trial flow of the link.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .params import Scheme, SimParams, validate


@dataclass(frozen=True)
class HeraldStats:
    """Per-trial heralding statistics of one elementary link."""

    scheme: Scheme
    expected_heralds: float   # E[K] heralding events per trial
    herald_prob: float        # P(at least one usable herald per trial)
    per_mode_prob: float      # q (single-photon) or per-mode two-photon prob

    def __post_init__(self):
        if self.expected_heralds < 0:
            raise ValueError("expected_heralds must be >= 0")
        if not 0.0 <= self.herald_prob <= 1.0:
            raise ValueError("herald_prob must be in [0, 1]")


@dataclass(frozen=True)
class TrialOutcome:
    """Raw counts from one Monte Carlo episode of the dual-rail scheme."""

    heralds_channel_a: int
    heralds_channel_b: int
    attempts: int
    successes: int
    trials_elapsed: int

    def __post_init__(self):
        if min(self.heralds_channel_a, self.heralds_channel_b, self.attempts,
               self.successes, self.trials_elapsed) < 0:
            raise ValueError("counts must be >= 0")
        if self.successes > self.attempts:
            raise ValueError("successes cannot exceed attempts")


@dataclass(frozen=True)
class MCEstimate:
    """Aggregated Monte Carlo estimate with a one-sigma error bar.

    ``std_error`` is the sample standard deviation of the per-episode
    statistic divided by sqrt(episodes).  For ratio-of-sums estimates
    (dual-rail rate) the per-episode statistic is the linearized
    contribution (s_i - rate*t_i)/mean(t), which reduces to the plain
    per-episode rate when episode durations are constant.
    """

    mean: float
    std_error: float
    episodes: int
    seed: int

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")


def expected_heralds(scheme: Scheme, params: SimParams) -> float:
    """Expected number of heralding events per elementary-link trial.

    SS counts single-photon detections over all N*M modes; TT counts
    two-photon coincidence detections; ST counts disjoint pairs of
    single-photon heralds, i.e. E[floor(K/2)] for K ~ Binomial(NM, q),
    evaluated through the parity identity
    E[floor(K/2)] = NM*q/2 - (1 - (1-2q)^NM)/4.
    """
    validate(params)
    nm = params.nm
    if scheme is Scheme.SS:
        return nm * params.q()
    if scheme is Scheme.TT:
        return nm * params.q_tt()
    if nm % 2 != 0:
        raise ValueError(f"paired-herald expectation needs even N*M, got {nm}")
    q = params.q()
    return nm * q / 2.0 - (1.0 - (1.0 - 2.0 * q) ** nm) / 4.0


def herald_prob(scheme: Scheme, params: SimParams) -> float:
    """Probability that a trial heralds at least one usable entangled state.

    SS needs one single-photon herald, ST needs two (a pair), TT needs one
    two-photon herald.
    """
    validate(params)
    nm = params.nm
    if scheme is Scheme.TT:
        return -math.expm1(nm * math.log1p(-params.q_tt()))
    q = params.q()
    if q >= 1.0:
        if scheme is Scheme.SS:
            return 1.0
        return 1.0 if nm >= 2 else 0.0
    p_any = -math.expm1(nm * math.log1p(-q))
    if scheme is Scheme.SS:
        return p_any
    return p_any - nm * q * math.exp((nm - 1) * math.log1p(-q))


def herald_stats(scheme: Scheme, params: SimParams) -> HeraldStats:
    per_mode = params.q_tt() if scheme is Scheme.TT else params.q()
    return HeraldStats(
        scheme=scheme,
        expected_heralds=expected_heralds(scheme, params),
        herald_prob=herald_prob(scheme, params),
        per_mode_prob=per_mode,
    )


def elementary_rate(scheme: Scheme, params: SimParams) -> float:
    """Closed-form coincidence rate of the elementary link, per second.

    ST: eta^2 E[K_ST] / (2 t0); TT: eta^2 E[K_TT] / t0, with
    t0 = N*delta_t + L/c.  The dual-rail scheme has no closed form and is
    rejected here; use mc_elementary for it.
    """
    if scheme is Scheme.SS:
        raise ValueError("SS rate requires Monte Carlo (mc_elementary); "
                         "no closed form exists for the dual-rail flow")
    validate(params)
    t0 = params.trial_time()
    if t0 <= 0:
        raise ValueError("trial time must be positive (N*delta_t + L/c)")
    eta2 = params.eta() ** 2
    if scheme is Scheme.ST:
        return eta2 * expected_heralds(scheme, params) / (2.0 * t0)
    return eta2 * expected_heralds(scheme, params) / t0


def mc_elementary(scheme: Scheme, params: SimParams, seed: int,
                  episodes: int) -> MCEstimate:
    """Monte Carlo estimate of the elementary-link coincidence rate (1/s).

    SS: each episode runs two independent heralding channels until both
    have at least one herald (k and k' trials), then attempts min(K, K')
    coincidences at probability eta^2/2; the episode lasts max(k, k')
    trials and the rate is total successes over total time.  ST/TT: one
    trial per episode with K//2 (resp. K) attempts at eta^2/2 (resp.
    eta^2).  Identical (seed, params, episodes) give bit-identical output.
    """
    validate(params)
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    t0 = params.trial_time()
    if t0 <= 0:
        raise ValueError("trial time must be positive (N*delta_t + L/c)")
    eta2 = params.eta() ** 2
    nm = params.nm
    if scheme is Scheme.SS:
        p_herald = herald_prob(Scheme.SS, params)
        if p_herald <= 0.0:
            raise ValueError("herald probability is 0; channel never heralds")
        successes, trials, _, _ = _kernels.ss_elementary_episodes(
            nm, params.q(), p_herald, eta2 / 2.0, episodes, seed)
        durations = trials * t0
        return _ratio_estimate(successes, durations, episodes, seed)
    if scheme is Scheme.ST:
        successes = _kernels.paired_elementary_episodes(
            nm, params.q(), True, eta2 / 2.0, episodes, seed)
    else:
        successes = _kernels.paired_elementary_episodes(
            nm, params.q_tt(), False, eta2, episodes, seed)
    rates = successes / t0
    mean = float(np.mean(rates))
    std_error = _sample_std_error(rates)
    return MCEstimate(mean=mean, std_error=std_error, episodes=episodes, seed=seed)


def ss_trial_outcomes(params: SimParams, seed: int,
                      episodes: int) -> list[TrialOutcome]:
    """Per-episode records of the dual-rail Monte Carlo flow (for inspection)."""
    validate(params)
    p_herald = herald_prob(Scheme.SS, params)
    if p_herald <= 0.0:
        raise ValueError("herald probability is 0; channel never heralds")
    eta2 = params.eta() ** 2
    successes, trials, counts_a, counts_b = _kernels.ss_elementary_episodes(
        params.nm, params.q(), p_herald, eta2 / 2.0, episodes, seed)
    return [
        TrialOutcome(
            heralds_channel_a=int(counts_a[i]),
            heralds_channel_b=int(counts_b[i]),
            attempts=int(min(counts_a[i], counts_b[i])),
            successes=int(successes[i]),
            trials_elapsed=int(trials[i]),
        )
        for i in range(episodes)
    ]


def _sample_std_error(values: np.ndarray) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(n))


def _ratio_estimate(successes: np.ndarray, durations: np.ndarray,
                    episodes: int, seed: int) -> MCEstimate:
    total_time = float(np.sum(durations))
    rate = float(np.sum(successes)) / total_time
    # delta-method error bar for the ratio of sums
    mean_t = total_time / episodes
    linearized = (successes - rate * durations) / mean_t
    return MCEstimate(mean=rate, std_error=_sample_std_error(linearized),
                      episodes=episodes, seed=seed)
