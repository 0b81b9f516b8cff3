"""Swap-chain evolution over 2^J elementary links.

Tracks the diagonal mixture of memory-excitation states through successive
entanglement-swapping rounds, the per-round success probabilities, and the
resulting end-to-end waiting time and coincidence rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from . import link_model
from .params import KM_TO_M, Scheme, SimParams, validate

INITIAL = "initial"
POST_SWAP = "post-swap"

# legal mixture components per (scheme, stage)
_LEGAL_LABELS = {
    (Scheme.SS, INITIAL): ("c1", "c0"),
    (Scheme.SS, POST_SWAP): ("c1", "c0"),
    (Scheme.ST, INITIAL): ("c11", "c20"),
    (Scheme.ST, POST_SWAP): ("c11", "c1", "c0"),
    (Scheme.TT, INITIAL): ("c11",),
    (Scheme.TT, POST_SWAP): ("c11",),
}

_SUM_TOL = 1e-12


class ChainUnreachableError(ValueError):
    """A round of the chain has zero success probability."""

    def __init__(self, round_index: int, message: str):
        self.round_index = round_index
        super().__init__(message)


@dataclass(frozen=True)
class Mixture:
    """Scheme-tagged diagonal mixture over memory-excitation components.

    Components: c11 (one excitation in each memory), c20 (one memory doubly
    excited, the other empty), c1 (a single excitation shared by the two
    memories), c0 (vacuum).  Coefficients may be floats or exact rationals;
    they must be nonnegative and sum to 1.
    """

    scheme: Scheme
    stage: str
    coefficients: Mapping[str, object]

    def __post_init__(self):
        legal = _LEGAL_LABELS.get((self.scheme, self.stage))
        if legal is None:
            raise ValueError(f"unknown stage {self.stage!r}")
        extra = set(self.coefficients) - set(legal)
        if extra:
            raise ValueError(
                f"labels {sorted(extra)} not legal for {self.scheme.value} {self.stage}")
        total = 0.0
        for label in legal:
            value = self.coefficients.get(label, 0)
            if value < 0:
                raise ValueError(f"coefficient {label} = {value} < 0")
            total += float(value)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"coefficients sum to {total!r}, expected 1")
        object.__setattr__(self, "coefficients",
                           {k: self.coefficients.get(k, 0) for k in legal})

    def __getitem__(self, label: str):
        return self.coefficients[label]


@dataclass(frozen=True)
class ChainPlan:
    """Precomputed per-round quantities of a 2^J-link chain.

    round_times[j] is t(j): the trial duration N*delta_t + L/c for j = 0,
    and the swap-outcome communication time 2^(j-1)*L/c for j >= 1.
    round_probs[j] is the heralding probability for j = 0 and the round-j
    swap success probability for j >= 1.
    """

    scheme: Scheme
    J: int
    link_length_km: float
    round_times: Sequence[float]
    round_probs: Sequence[float]
    coincidence_prob: float
    final_state: Mixture

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("J must be >= 1")
        if len(self.round_times) != self.J + 1 or len(self.round_probs) != self.J + 1:
            raise ValueError("need J+1 round times and probabilities")


def n_ex(p: float) -> float:
    """Expected trials until two independent geometric(p) events both hit.

    Equals E[max(G1, G2)] = (3-2p)/((2-p)p).
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"success probability must be in (0, 1], got {p}")
    return (3.0 - 2.0 * p) / ((2.0 - p) * p)


def initial_state(scheme: Scheme) -> Mixture:
    """Heralded elementary-link mixture (dark counts neglected).

    SS heralds a pure single-excitation state.  ST pairs two heralds whose
    excitations land cross-node or same-node with equal weight, so the
    double-excitation component carries half the mass.  TT heralds a pure
    one-each state.
    """
    if scheme is Scheme.SS:
        return Mixture(scheme, INITIAL, {"c1": 1})
    if scheme is Scheme.TT:
        return Mixture(scheme, INITIAL, {"c11": 1})
    return Mixture(scheme, INITIAL, {"c11": 0.5, "c20": 0.5})


def swap_step(scheme: Scheme, state: Mixture, eta: float) -> tuple[float, Mixture]:
    """One entanglement-swapping round: success probability and new mixture.

    ``eta`` is the composite retrieval/detection efficiency applied to each
    photon read out of the inner memories.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    if state.scheme is not scheme:
        raise ValueError(f"mixture is tagged {state.scheme.value}, not {scheme.value}")
    if scheme is Scheme.TT:
        return eta * eta / 2.0, Mixture(Scheme.TT, POST_SWAP, {"c11": 1})
    if scheme is Scheme.SS:
        alpha = state["c1"]
        p = alpha * eta * (1.0 - alpha * eta / 2.0)
        new_alpha = alpha / (2.0 - alpha * eta)
        return p, Mixture(Scheme.SS, POST_SWAP, {"c1": new_alpha, "c0": 1.0 - new_alpha})
    eta2 = eta * eta
    if state.stage == INITIAL:
        a, b = state["c11"], state["c20"]
        w11 = eta2 * a * a / 2.0
        w1 = eta2 * (1.0 - eta) * a * b
        w0 = eta2 * (1.0 - eta) ** 2 * b * b / 2.0
    else:
        a, b = state["c11"], state["c1"]
        w11 = eta2 * a * a / 2.0
        w1 = eta2 * a * b / 2.0
        w0 = eta2 * b * b / 8.0
    p = w11 + w1 + w0
    if p <= 0.0:
        raise ValueError("swap success probability is 0 for this mixture")
    out = Mixture(Scheme.ST, POST_SWAP, {"c11": w11 / p, "c1": w1 / p, "c0": w0 / p})
    return p, out


def coincidence_prob(scheme: Scheme, state: Mixture, eta: float) -> float:
    """Probability of a successful end-node coincidence on ``state``.

    The SS value is per pair of parallel single-excitation chains, each
    carrying the mixture's c1 weight.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    if scheme is Scheme.TT:
        return eta * eta
    if scheme is Scheme.SS:
        return (state["c1"] * eta) ** 2 / 2.0
    return eta * eta * state["c11"] ** 2


def st_fixed_point(first_swap_state: Mixture) -> Mixture:
    """Round-independent coefficients reached after the first ST swap.

    Every further swap preserves the ratio c1/c11, which pins the mixture
    to a fixed point determined by r = c1/(2*c11):
    c11 = 1/(1+r)^2, c1 = 2r/(1+r)^2, c0 = (r/(1+r))^2.
    """
    if first_swap_state.scheme is not Scheme.ST or first_swap_state.stage != POST_SWAP:
        raise ValueError("fixed point is defined for post-swap ST mixtures")
    a, b = first_swap_state["c11"], first_swap_state["c1"]
    if a == 0:
        raise ValueError("c11 = 0: fixed-point ratio c1/(2*c11) undefined")
    r = b / (2.0 * a)
    c11 = 1.0 / (1.0 + r) ** 2
    c1 = (b / a) / (1.0 + r) ** 2
    c0 = (b / (2.0 * a + b)) ** 2
    return Mixture(Scheme.ST, POST_SWAP, {"c11": c11, "c1": c1, "c0": c0})


def build_chain_plan(scheme: Scheme, J: int, params: SimParams) -> ChainPlan:
    """Assemble round times and probabilities for a 2^J-link chain.

    ``params.link_length_km`` is the elementary link length L (the chain
    spans 2^J * L end to end).
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    validate(params)
    hop = params.link_length_km * KM_TO_M / params.light_speed_m_per_s
    times = [params.trial_time()] + [2.0 ** (j - 1) * hop for j in range(1, J + 1)]
    probs = [link_model.herald_prob(scheme, params)]
    if probs[0] <= 0.0:
        raise ChainUnreachableError(0, "unreachable configuration: round 0 "
                                       "(heralding) has probability 0")
    eta = params.eta()
    state = initial_state(scheme)
    for j in range(1, J + 1):
        p, state = swap_step(scheme, state, eta)
        if p <= 0.0:
            raise ChainUnreachableError(
                j, f"unreachable configuration: round {j} swap probability is 0")
        probs.append(p)
    p_ps = coincidence_prob(scheme, state, eta)
    if p_ps <= 0.0:
        raise ChainUnreachableError(
            J + 1, "unreachable configuration: end-node coincidence probability is 0")
    return ChainPlan(scheme=scheme, J=J, link_length_km=params.link_length_km,
                     round_times=times, round_probs=probs,
                     coincidence_prob=p_ps, final_state=state)


def total_time(scheme: Scheme, J: int, params: SimParams) -> float:
    """Expected time (s) to one end-node coincidence over a 2^J-link chain.

    For ST/TT the final swap and the coincidence jointly gate a full
    restart and the top round's communication time is not accrued:
        T = sum_{j<J} t(j) * prod_{h=j..J-1} n_ex(p(h)) / (p(J) * p_ps).
    For SS both parallel chains retry every round pairwise and only the
    coincidence restarts them:
        T = sum_{j<=J} t(j) * prod_{h=j..J} n_ex(p(h)) / p_ps.
    """
    plan = build_chain_plan(scheme, J, params)
    return total_time_from_plan(plan)


def total_time_from_plan(plan: ChainPlan) -> float:
    t = plan.round_times
    p = plan.round_probs
    J = plan.J
    if plan.scheme is Scheme.SS:
        total = 0.0
        suffix = 1.0 / plan.coincidence_prob
        for j in range(J, -1, -1):
            suffix *= n_ex(p[j])
            total += t[j] * suffix
        return total
    total = 0.0
    suffix = 1.0 / (p[J] * plan.coincidence_prob)
    for j in range(J - 1, -1, -1):
        suffix *= n_ex(p[j])
        total += t[j] * suffix
    return total


def chain_rate(scheme: Scheme, J: int, params: SimParams) -> float:
    """End-node coincidence rate 1/T for a 2^J-link chain."""
    return 1.0 / total_time(scheme, J, params)


@dataclass(frozen=True)
class LinkCountResult:
    """Outcome of evaluating one candidate link count."""

    J: int
    links: int
    rate_per_s: float | None
    error: str | None = None


def optimize_links(scheme: Scheme, total_distance_km: float,
                   j_range: Sequence[int], params: SimParams,
                   ) -> tuple[int, float, list[LinkCountResult]]:
    """Pick the link count 2^J maximizing the end-node coincidence rate.

    Evaluates each J with elementary link length total_distance/2^J and
    returns (best_J, best_rate, table).  Ties break toward smaller J;
    J values whose chains are unreachable are kept in the table with the
    error and excluded from the argmax.
    """
    if not j_range:
        raise ValueError("j_range must be non-empty")
    if total_distance_km <= 0:
        raise ValueError("total distance must be positive")
    table: list[LinkCountResult] = []
    best: tuple[int, float] | None = None
    for J in sorted(set(int(j) for j in j_range)):
        if J < 1:
            raise ValueError(f"J must be >= 1, got {J}")
        local = replace(params, link_length_km=total_distance_km / 2 ** J)
        try:
            rate = chain_rate(scheme, J, local)
        except (ChainUnreachableError, ValueError) as exc:
            table.append(LinkCountResult(J=J, links=2 ** J, rate_per_s=None,
                                         error=str(exc)))
            continue
        table.append(LinkCountResult(J=J, links=2 ** J, rate_per_s=rate))
        if best is None or rate > best[1]:
            best = (J, rate)
    if best is None:
        raise ChainUnreachableError(-1, "no link count in range yields a "
                                        "reachable chain")
    return best[0], best[1], table
