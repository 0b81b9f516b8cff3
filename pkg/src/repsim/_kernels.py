"""Monte Carlo episode kernels.

The hot loops live here.  Every kernel is written once in nopython-friendly
numpy and compiled with numba's @njit; setting the environment variable
``REPSIM_NO_NUMBA=1`` (or uninstalling numba) selects the uncompiled
pure-numpy path instead.  Both paths execute the same bytecode, so results
are bit-identical between backends.

Randomness is a two-level counter-based SplitMix64 scheme: the stream key
for episode ``i`` is output ``i`` of the stream keyed by ``seed``, and draw
``j`` inside an episode is output ``j`` of the stream keyed by that episode
key.  Every draw is therefore a pure function of (seed, episode, counter),
which makes estimates independent of how episodes would be partitioned
across workers.
"""
from __future__ import annotations

import os

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0  # 2**-53

NUMBA_ENABLED = False
if os.environ.get("REPSIM_NO_NUMBA", "").strip() in ("", "0"):
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:
        pass

if NUMBA_ENABLED:
    def _compile(func):
        return _njit(cache=True)(func)
else:
    def _compile(func):
        return func


def _dispatch(func, *args):
    # uint64 wraparound is intentional; silence numpy's overflow warning
    # on the uncompiled path (numba wraps silently).
    if NUMBA_ENABLED:
        return func(*args)
    with np.errstate(over="ignore"):
        return func(*args)


@_compile
def _mix(x):
    """SplitMix64 finalizer (bijective avalanche mix of a uint64)."""
    z = (x ^ (x >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@_compile
def _episode_key(seed, episode):
    return _mix(seed + np.uint64(episode) * _GOLDEN)


@_compile
def _u01(key, ctr):
    """Uniform double in [0, 1) for draw ``ctr`` of stream ``key``."""
    bits = _mix(key + np.uint64(ctr) * _GOLDEN)
    return float(bits >> np.uint64(11)) * _U53


@_compile
def _geometric(key, ctr, p):
    """Trials-until-first-success count (>= 1), returned as float64."""
    if p >= 1.0:
        return 1.0, ctr + 1
    u = _u01(key, ctr)
    # inverse CDF of the geometric law on {1, 2, ...}
    g = np.floor(np.log1p(-u) / np.log1p(-p)) + 1.0
    return g, ctr + 1


@_compile
def _bernoulli_count(key, ctr, n, p):
    """Number of successes in n independent trials of probability p."""
    count = 0
    for _ in range(n):
        if _u01(key, ctr) < p:
            count += 1
        ctr += 1
    return count, ctr


@_compile
def _binomial(key, ctr, n, p):
    """One draw of Binomial(n, p) via an inverse-CDF walk.

    Consumes one uniform; expected O(n*p) pmf steps.  Falls back to the
    O(n) Bernoulli sum when the k=0 pmf underflows double precision.
    """
    if p <= 0.0:
        return 0, ctr
    if p >= 1.0:
        return n, ctr + n
    pmf0 = (1.0 - p) ** n
    if pmf0 <= 0.0:
        return _bernoulli_count(key, ctr, n, p)
    u = _u01(key, ctr)
    ctr += 1
    k = 0
    pmf = pmf0
    cdf = pmf
    ratio = p / (1.0 - p)
    while u >= cdf and k < n:
        pmf *= ratio * (n - k) / (k + 1.0)
        cdf += pmf
        k += 1
    return k, ctr


@_compile
def _binomial_at_least_one(key, ctr, n, p):
    """Binomial(n, p) conditioned on >= 1 success.

    Implemented by restricting the inverse-CDF uniform to the mass above
    the k=0 atom.  When that atom underflows double precision the
    conditioning is a no-op and the plain sampler is used.
    """
    if p >= 1.0:
        return n, ctr + n
    pmf0 = (1.0 - p) ** n
    if pmf0 <= 0.0:
        return _bernoulli_count(key, ctr, n, p)
    u = _u01(key, ctr)
    ctr += 1
    u = pmf0 + u * (1.0 - pmf0)
    k = 0
    pmf = pmf0
    cdf = pmf
    ratio = p / (1.0 - p)
    while u >= cdf and k < n:
        pmf *= ratio * (n - k) / (k + 1.0)
        cdf += pmf
        k += 1
    if k == 0:
        k = 1  # guard against cdf rounding just past u at the atom boundary
    return k, ctr


# --- elementary-link episode batches ---------------------------------------


@_compile
def _ss_elementary(nm, q, p_herald, p_coinc, episodes, seed):
    """Dual-channel single-photon-interference episodes.

    Each channel repeats trials (every one of ``nm`` modes heralds with
    probability q) until it has >= 1 herald; coincidences are then
    attempted min(K, K') times with success probability ``p_coinc``.
    Returns per-episode success counts and per-episode elapsed trials
    max(k, k') (channels run in parallel).
    """
    successes = np.empty(episodes, dtype=np.float64)
    trials = np.empty(episodes, dtype=np.float64)
    counts_a = np.empty(episodes, dtype=np.int64)
    counts_b = np.empty(episodes, dtype=np.int64)
    for i in range(episodes):
        key = _episode_key(seed, i)
        ctr = 0
        k_a, ctr = _geometric(key, ctr, p_herald)
        k_b, ctr = _geometric(key, ctr, p_herald)
        heralds_a, ctr = _binomial_at_least_one(key, ctr, nm, q)
        heralds_b, ctr = _binomial_at_least_one(key, ctr, nm, q)
        attempts = min(heralds_a, heralds_b)
        won, ctr = _bernoulli_count(key, ctr, attempts, p_coinc)
        successes[i] = won
        trials[i] = max(k_a, k_b)
        counts_a[i] = heralds_a
        counts_b[i] = heralds_b
    return successes, trials, counts_a, counts_b


@_compile
def _paired_elementary(nm, q, pair_heralds, p_coinc, episodes, seed):
    """Single-trial episodes for the paired-herald and two-photon schemes.

    Draws the per-trial herald count K ~ Binomial(nm, q); the number of
    coincidence attempts is K//2 when ``pair_heralds`` (heralds combine in
    pairs) else K.  Each attempt succeeds with probability ``p_coinc``.
    """
    successes = np.empty(episodes, dtype=np.float64)
    for i in range(episodes):
        key = _episode_key(seed, i)
        ctr = 0
        heralds, ctr = _binomial(key, ctr, nm, q)
        attempts = heralds // 2 if pair_heralds else heralds
        won, ctr = _bernoulli_count(key, ctr, attempts, p_coinc)
        successes[i] = won
    return successes


# --- swap-chain episode batch -----------------------------------------------


@_compile
def _chain_episodes(round_probs, round_times, p_coinc, dual_chain, episodes, seed):
    """Waiting time per delivered end-to-end coincidence.

    Counts attempts per round top-down.  The top level is a geometric
    number of coincidence rounds; each round-(h+1) attempt consumes two
    round-h successes built in parallel, so it costs max(G, G') round-h
    slots with G geometric in that round's success probability.  Elapsed
    time adds ``round_times[h]`` per round-h slot.

    ``round_probs`` holds [p_herald, p_swap_1, .., p_swap_J].  With
    ``dual_chain`` (single-excitation scheme) the final swap round is
    retried pairwise like every other round and only the coincidence
    restarts the chain, and all J+1 round times count; otherwise the final
    swap and the coincidence jointly gate a restart and the top round's
    communication time is not accrued.
    """
    n_rounds = len(round_probs)  # J + 1 entries
    times = np.empty(episodes, dtype=np.float64)
    for i in range(episodes):
        key = _episode_key(seed, i)
        ctr = 0
        if dual_chain:
            top, ctr = _geometric(key, ctr, p_coinc)
            pending = top  # coincidence attempts, each needs both chains
            first_pair = n_rounds - 1
        else:
            top, ctr = _geometric(key, ctr, round_probs[n_rounds - 1] * p_coinc)
            pending = top  # final-swap attempts
            first_pair = n_rounds - 2
        elapsed = 0.0
        for h in range(first_pair, -1, -1):
            slots = 0.0
            n_pairs = int(pending)
            for _ in range(n_pairs):
                g_a, ctr = _geometric(key, ctr, round_probs[h])
                g_b, ctr = _geometric(key, ctr, round_probs[h])
                slots += max(g_a, g_b)
            elapsed += slots * round_times[h]
            pending = slots
        times[i] = elapsed
    return times


@_compile
def _max_geometric_pairs(p, samples, seed):
    """max(G, G') for independent geometric(p) pairs, one per sample."""
    out = np.empty(samples, dtype=np.float64)
    for i in range(samples):
        key = _episode_key(seed, i)
        g_a, ctr = _geometric(key, 0, p)
        g_b, ctr = _geometric(key, ctr, p)
        out[i] = max(g_a, g_b)
    return out


# --- public entry points (handle the fallback errstate) ---------------------


def ss_elementary_episodes(nm, q, p_herald, p_coinc, episodes, seed):
    return _dispatch(_ss_elementary, int(nm), float(q), float(p_herald),
                     float(p_coinc), int(episodes), np.uint64(seed))


def paired_elementary_episodes(nm, q, pair_heralds, p_coinc, episodes, seed):
    return _dispatch(_paired_elementary, int(nm), float(q), bool(pair_heralds),
                     float(p_coinc), int(episodes), np.uint64(seed))


def chain_episodes(round_probs, round_times, p_coinc, dual_chain, episodes, seed):
    probs = np.asarray(round_probs, dtype=np.float64)
    times = np.asarray(round_times, dtype=np.float64)
    if probs.shape != times.shape:
        raise ValueError("round_probs and round_times must have equal length")
    return _dispatch(_chain_episodes, probs, times, float(p_coinc),
                     bool(dual_chain), int(episodes), np.uint64(seed))


def max_geometric_pairs(p, samples, seed):
    return _dispatch(_max_geometric_pairs, float(p), int(samples), np.uint64(seed))
