"""Independent brute-force verification engines.

Three layers, each deliberately taking a different route from the model
implementations it checks:

* an amplitude-level simulation of heralding at the central station
  (explicit creation-operator bookkeeping through the beamsplitter),
* an exact rational enumeration of the swapping analyzer over every
  excitation placement and photon-survival pattern,
* a Monte Carlo replay of the waiting-time process behind the chain
  formulas.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

import numpy as np

from . import _kernels, chain_model, link_model
from .chain_model import INITIAL, POST_SWAP, Mixture, build_chain_plan
from .link_model import MCEstimate
from .params import Scheme, SimParams
from .phase_model import PhaseConfig, _reduce

_SQRT_HALF = 1.0 / math.sqrt(2.0)

Pattern = tuple[tuple[tuple[str, int, int], int], ...]  # sorted ((kind,m,n), count)


@dataclass(frozen=True)
class AmplitudeState:
    """Superposition over occupation patterns of the labeled optical modes."""

    terms: Mapping[Pattern, complex]

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.terms.values())


@dataclass(frozen=True)
class HeraldedMemoryState:
    """Memory state conditioned on one detector click, plus its relative phase."""

    port: str
    m: int
    n: int
    amp_a: complex   # amplitude of the A-memory excitation
    amp_b: complex   # amplitude of the B-memory excitation
    relative_phase: float

    def amplitudes(self) -> tuple[complex, complex]:
        return self.amp_a, self.amp_b


@dataclass(frozen=True)
class PairedHeralds:
    """Product of two heralded states: postselected branch and full weights."""

    relative_phase: float     # phase of the swapped-order term
    postselected: tuple[complex, complex]
    cross_weight: float       # one excitation per node
    double_a_weight: float    # both excitations at node A
    double_b_weight: float    # both excitations at node B


@dataclass(frozen=True)
class ExcitationConfig:
    """One classical excitation placement with its exact probability."""

    photons_per_memory: Mapping[tuple[str, str], int]  # (memory, bin) -> count
    probability: Fraction

    def count(self, memory: str) -> int:
        return sum(v for (mem, _), v in self.photons_per_memory.items()
                   if mem == memory)


def _pattern(modes: dict) -> Pattern:
    return tuple(sorted((k, v) for k, v in modes.items() if v))


def _node_state(node: str, config: PhaseConfig, p_tps: float, theta: float,
                n_temporal: int) -> dict[Pattern, complex]:
    """Source state of one node, truncated at one photon pair.

    Pair amplitude sqrt(p)*e^(i*theta) per mode; the vacuum keeps the
    remaining product weight so the truncation error is O(p).
    """
    modes = len(config.f_idler)
    total_modes = modes * n_temporal
    vacuum_amp = (1.0 - p_tps) ** (total_modes / 2.0)
    pair_amp = math.sqrt(p_tps) * (1.0 - p_tps) ** ((total_modes - 1) / 2.0)
    terms: dict[Pattern, complex] = {_pattern({}): vacuum_amp}
    signal, idler = node + "s", node + "i"
    for m in range(modes):
        for n in range(n_temporal):
            amp = pair_amp * cmath.exp(1j * theta)
            terms[_pattern({(signal, m, n): 1, (idler, m, n): 1})] = amp
    return terms


def _propagate(terms: dict[Pattern, complex], config: PhaseConfig) -> dict:
    """Apply the optical path phase 2*pi*f*L/c to every photon."""
    c = config.light_speed
    lengths = {"As": config.l_as, "Bs": config.l_bs,
               "Ai": config.l_ai, "Bi": config.l_bi}
    freqs = {"As": config.f_signal_a, "Bs": config.f_signal_b,
             "Ai": config.f_idler, "Bi": config.f_idler}
    out = {}
    for pattern, amp in terms.items():
        phase = 0.0
        for (kind, m, _n), count in pattern:
            phase += 2.0 * math.pi * freqs[kind][m] * lengths[kind] / c * count
        out[pattern] = amp * cmath.exp(1j * phase)
    return out


def _beamsplit(terms: dict[Pattern, complex]) -> dict[Pattern, complex]:
    """Rewrite idler modes into detector modes: d+- = (a +- b)/sqrt(2)."""
    out: dict[Pattern, complex] = {}
    for pattern, amp in terms.items():
        expansions = [({}, amp)]
        for (kind, m, n), count in pattern:
            if kind not in ("Ai", "Bi"):
                for modes, a in expansions:
                    modes[(kind, m, n)] = modes.get((kind, m, n), 0) + count
                continue
            sign = 1.0 if kind == "Ai" else -1.0
            for _ in range(count):
                new = []
                for modes, a in expansions:
                    plus = dict(modes)
                    plus[("d+", m, n)] = plus.get(("d+", m, n), 0) + 1
                    new.append((plus, a * _SQRT_HALF))
                    minus = dict(modes)
                    minus[("d-", m, n)] = minus.get(("d-", m, n), 0) + 1
                    new.append((minus, a * sign * _SQRT_HALF))
                expansions = new
        for modes, a in expansions:
            # bosonic bunching factor sqrt(k!) per multiply-occupied mode
            boost = 1.0
            for count in modes.values():
                boost *= math.sqrt(math.factorial(count))
            key = _pattern(modes)
            out[key] = out.get(key, 0.0) + a * boost
    return out


def herald_cbsa(config: PhaseConfig, p_tps: float,
                detected: tuple[str, int, int],
                n_temporal: int = 1) -> HeraldedMemoryState:
    """Condition the two-node source state on one detector click.

    Builds both nodes' states to first order in sqrt(p_tps), applies path
    phases and the central beamsplitter, and postselects on exactly one
    photon in detector mode ``detected`` = (port, m, n) with every other
    detector mode empty.  Returns the normalized memory amplitudes.
    """
    port, m, n = detected
    if port not in ("d+", "d-"):
        raise ValueError(f"port must be 'd+' or 'd-', got {port!r}")
    if not 0.0 < p_tps <= 0.1:
        raise ValueError("p_tps must be in (0, 0.1] for the first-order "
                         "truncation to hold")
    if not (0 <= m < len(config.f_idler) and 0 <= n < n_temporal):
        raise ValueError(f"detected mode ({m}, {n}) out of range")

    state_a = _propagate(_node_state("A", config, p_tps, config.theta_a,
                                     n_temporal), config)
    state_b = _propagate(_node_state("B", config, p_tps, config.theta_b,
                                     n_temporal), config)
    joint: dict[Pattern, complex] = {}
    for pat_a, amp_a in state_a.items():
        for pat_b, amp_b in state_b.items():
            merged = dict(pat_a)
            for mode, count in pat_b:
                merged[mode] = merged.get(mode, 0) + count
            key = _pattern(merged)
            joint[key] = joint.get(key, 0.0) + amp_a * amp_b
    detected_terms = {}
    for pattern, amp in _beamsplit(joint).items():
        clicks = {mode: cnt for mode, cnt in pattern if mode[0] in ("d+", "d-")}
        if clicks != {(port, m, n): 1}:
            continue
        memory = _pattern({mode: cnt for mode, cnt in pattern
                           if mode[0] not in ("d+", "d-")})
        detected_terms[memory] = detected_terms.get(memory, 0.0) + amp
    amp_a = detected_terms.get(_pattern({("As", m, n): 1}), 0.0)
    amp_b = detected_terms.get(_pattern({("Bs", m, n): 1}), 0.0)
    norm = math.sqrt(abs(amp_a) ** 2 + abs(amp_b) ** 2)
    if norm == 0.0:
        raise ValueError(f"impossible outcome: detector {detected} has zero "
                         "amplitude")
    extra = {k: v for k, v in detected_terms.items()
             if k not in (_pattern({("As", m, n): 1}), _pattern({("Bs", m, n): 1}))}
    if any(abs(v) > 1e-12 * norm for v in extra.values()):
        raise AssertionError("unexpected memory content in conditioned state")
    amp_a /= norm
    amp_b /= norm
    phase = _reduce(cmath.phase(amp_b) - cmath.phase(amp_a)) if abs(amp_a) else math.nan
    return HeraldedMemoryState(port=port, m=m, n=n, amp_a=amp_a, amp_b=amp_b,
                               relative_phase=phase)


def pair_heralds(state1: HeraldedMemoryState,
                 state2: HeraldedMemoryState) -> PairedHeralds:
    """Combine two plus-port heralds into the two-excitation state.

    The postselected branch keeps one excitation per node and reproduces
    the mode-separation phase; the unconditioned product also carries the
    same-node double-excitation branches whose weights seed the paired
    initial mixture.
    """
    if state1.port != "d+" or state2.port != "d+":
        raise ValueError("pairing is defined for two plus-port heralds")
    if (state1.m, state1.n) == (state2.m, state2.n):
        raise ValueError("heralds must come from two different modes")
    term_ab = state1.amp_a * state2.amp_b   # A excited in mode 1, B in mode 2
    term_ba = state1.amp_b * state2.amp_a
    term_aa = state1.amp_a * state2.amp_a
    term_bb = state1.amp_b * state2.amp_b
    cross = abs(term_ab) ** 2 + abs(term_ba) ** 2
    total = cross + abs(term_aa) ** 2 + abs(term_bb) ** 2
    norm = math.sqrt(cross)
    if norm == 0.0:
        raise ValueError("postselected branch has zero weight")
    phase = _reduce(cmath.phase(term_ba) - cmath.phase(term_ab))
    return PairedHeralds(
        relative_phase=phase,
        postselected=(term_ab / norm, term_ba / norm),
        cross_weight=cross / total,
        double_a_weight=abs(term_aa) ** 2 / total,
        double_b_weight=abs(term_bb) ** 2 / total,
    )


# --- exact enumeration of the swapping analyzer ------------------------------

_HALF = Fraction(1, 2)


def _placements(label: str, outer: str, inner: str):
    """Classical excitation placements of one mixture component.

    Yields ((memory, bin) -> count, weight).  Components with an ambiguous
    host memory (double excitation, shared single excitation) place it on
    the inner or outer memory with probability 1/2 each.
    """
    if label == "c11":
        yield {(outer, "early"): 1, (inner, "late"): 1}, _HALF
        yield {(outer, "late"): 1, (inner, "early"): 1}, _HALF
    elif label == "c20":
        yield {(inner, "early"): 1, (inner, "late"): 1}, _HALF
        yield {(outer, "early"): 1, (outer, "late"): 1}, _HALF
    elif label == "c1":
        for memory in (inner, outer):
            for time_bin in ("early", "late"):
                yield {(memory, time_bin): 1}, Fraction(1, 4)
    elif label == "c0":
        yield {}, Fraction(1)
    else:
        raise ValueError(f"unknown component {label!r}")


@dataclass(frozen=True)
class SbsaBranch:
    """One fully resolved branch of the swapping-analyzer enumeration."""

    config: ExcitationConfig
    survivors_inner_left: int
    survivors_inner_right: int
    accepted: bool
    probability: Fraction
    outer_counts: tuple[int, int]


def sbsa_branches(state_ab: Mixture, state_cd: Mixture,
                  eta: Fraction) -> list[SbsaBranch]:
    """Every (placement, survival, analyzer-outcome) branch with exact weights.

    Branch probabilities sum to exactly 1.  A branch is accepted when
    exactly one retrieved photon from each inner memory survives and the
    analyzer identifies the Bell state (intrinsic factor 1/2).
    """
    eta = Fraction(eta)
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    branches: list[SbsaBranch] = []
    for (label1, w1), (label2, w2) in product(state_ab.coefficients.items(),
                                              state_cd.coefficients.items()):
        weight_pair = Fraction(w1) * Fraction(w2)
        if weight_pair == 0:
            continue
        for placement1, u1 in _placements(label1, "A", "B"):
            for placement2, u2 in _placements(label2, "D", "C"):
                photons = dict(placement1)
                photons.update(placement2)
                config = ExcitationConfig(
                    photons_per_memory=photons,
                    probability=weight_pair * u1 * u2,
                )
                k_b = config.count("B")
                k_c = config.count("C")
                for s_b in range(k_b + 1):
                    for s_c in range(k_c + 1):
                        p_surv = (math.comb(k_b, s_b) * eta ** s_b
                                  * (1 - eta) ** (k_b - s_b)
                                  * math.comb(k_c, s_c) * eta ** s_c
                                  * (1 - eta) ** (k_c - s_c))
                        base = config.probability * p_surv
                        if base == 0:
                            continue
                        outer = (config.count("A"), config.count("D"))
                        if s_b == 1 and s_c == 1:
                            # analyzer identifies the Bell state half the time
                            branches.append(SbsaBranch(config, s_b, s_c, True,
                                                       base * _HALF, outer))
                            branches.append(SbsaBranch(config, s_b, s_c, False,
                                                       base * _HALF, outer))
                        else:
                            branches.append(SbsaBranch(config, s_b, s_c, False,
                                                       base, outer))
    return branches


def enumerate_sbsa(state_ab: Mixture, state_cd: Mixture,
                   eta: Fraction) -> tuple[Fraction, Mixture]:
    """Exact swapping success probability and output mixture.

    Enumerates every excitation placement and survival pattern of the two
    input links; accepted branches are classified by the occupancy of the
    outer memories into {c11, c1, c0}.
    """
    weights = {"c11": Fraction(0), "c1": Fraction(0), "c0": Fraction(0)}
    success = Fraction(0)
    for branch in sbsa_branches(state_ab, state_cd, eta):
        if not branch.accepted:
            continue
        success += branch.probability
        n_a, n_d = branch.outer_counts
        if n_a == 1 and n_d == 1:
            weights["c11"] += branch.probability
        elif n_a + n_d == 1:
            weights["c1"] += branch.probability
        elif n_a + n_d == 0:
            weights["c0"] += branch.probability
        else:  # unreachable: a doubly-occupied outer implies an empty inner
            raise AssertionError(f"accepted branch with outer counts {branch.outer_counts}")
    if success == 0:
        raise ValueError("swap never succeeds for this input (probability 0)")
    out = Mixture(Scheme.ST, POST_SWAP,
                  {k: v / success for k, v in weights.items()})
    return success, out


# --- Monte Carlo replay of the chain waiting-time process --------------------


def mc_chain(scheme: Scheme, J: int, params: SimParams, seed: int,
             episodes: int) -> MCEstimate:
    """Monte Carlo mean waiting time (s) of the 2^J-link chain process.

    Simulates the slot-counting process the closed-form waiting time
    models: heralding retries are geometric per link, the two inputs of
    every swap are rebuilt in parallel (pairwise max of geometric retry
    counts), and the end-node coincidence (for the dual-rail scheme) or
    the final swap plus coincidence (two-excitation schemes) gates a full
    restart.  By Wald's identity the process mean equals the closed form
    at every J; the contract is validated at J = 1.
    """
    if J not in (1, 2):
        raise ValueError("mc_chain is a desk-scale check; J must be 1 or 2")
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    plan = build_chain_plan(scheme, J, params)
    times = _kernels.chain_episodes(
        plan.round_probs, plan.round_times, plan.coincidence_prob,
        scheme is Scheme.SS, episodes, seed)
    mean = float(np.mean(times))
    std_error = float(np.std(times, ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return MCEstimate(mean=mean, std_error=std_error, episodes=episodes, seed=seed)


def mc_n_ex(p: float, samples: int, seed: int) -> MCEstimate:
    """Sampled mean of max(G, G') for independent geometric(p) draws."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    values = _kernels.max_geometric_pairs(p, samples, seed)
    mean = float(np.mean(values))
    std_error = float(np.std(values, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return MCEstimate(mean=mean, std_error=std_error, episodes=samples, seed=seed)
