"""End-to-end sub-channel/power allocation strategies and the exact scorer.

Every strategy maps a channel realization to an Allocation assigning exactly
floor(N/K) sub-channels per link (surplus sub-channels stay idle when K does
not divide N). All strategies are scored with the same exact sum-rate
formula; their regime approximations only drive assignment and power choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .assignment import CostMatrix, replicate_rows, solve_assignment
from .channel import ChannelParams, ChannelRealization
from .errors import GuardError, InfeasibleError, ValidationError
from .power import equal_split, water_fill

__all__ = [
    "LOW_SNR",
    "HIGH_SNR",
    "OPTIMAL",
    "MAX_SELECT",
    "STRATEGY_ORDER",
    "Allocation",
    "RateReport",
    "validate_allocation",
    "exact_sum_rate",
    "linear_approx_rate",
    "log_approx_rate",
    "low_snr_cost_matrix",
    "high_snr_cost_matrix",
    "low_snr_allocate",
    "high_snr_allocate",
    "optimal_allocate",
    "max_select_allocate",
    "allocate",
    "partition_count",
    "enumerate_partitions",
    "POWER_RULES",
]

LOW_SNR = "low_snr"
HIGH_SNR = "high_snr"
OPTIMAL = "optimal"
MAX_SELECT = "max_select"
STRATEGY_ORDER = (LOW_SNR, HIGH_SNR, OPTIMAL, MAX_SELECT)

DEFAULT_PARTITION_GUARD = 10**6
POWER_RULES = ("water_fill", "equal_split")
_LN2 = math.log(2.0)
_BUDGET_SLACK = 1e-9
_CACHED_PARTITION_LIMIT = 20_000


@dataclass(frozen=True)
class Allocation:
    """Sub-channel sets and transmit powers chosen by one strategy.

    `subchannels_of_link[k]` is the sorted, pairwise-disjoint set assigned to
    link k (size floor(N/K)); `powers` is the K x N matrix of transmit powers
    in W, zero outside the assigned sets.
    """

    subchannels_of_link: tuple[tuple[int, ...], ...]
    powers: np.ndarray
    strategy_tag: str

    def __post_init__(self):
        powers = np.asarray(self.powers, dtype=float)
        powers.setflags(write=False)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(
            self,
            "subchannels_of_link",
            tuple(tuple(int(n) for n in s) for s in self.subchannels_of_link),
        )


@dataclass(frozen=True)
class RateReport:
    """Exact per-link rates and their total, in bit/s."""

    per_link_rate: tuple[float, ...]
    total_rate: float


def validate_allocation(params: ChannelParams, alloc: Allocation) -> None:
    """Check every Allocation invariant, naming the first violated constraint."""
    k_links = params.num_links
    n_sub = params.num_subchannels
    quota = params.quota
    sets = alloc.subchannels_of_link
    if len(sets) != k_links:
        raise ValidationError(f"subchannels_of_link must have {k_links} entries, got {len(sets)}")
    seen: set[int] = set()
    for k, subset in enumerate(sets):
        if len(subset) != quota:
            raise ValidationError(f"link {k}: quota is {quota} sub-channels, got {len(subset)}")
        for n in subset:
            if not (0 <= n < n_sub):
                raise ValidationError(f"link {k}: sub-channel index {n} out of range")
            if n in seen:
                raise ValidationError(f"sub-channel {n} assigned to more than one link")
            seen.add(n)
    powers = alloc.powers
    if powers.shape != (k_links, n_sub):
        raise ValidationError(f"powers must have shape ({k_links}, {n_sub}), got {powers.shape}")
    if not np.isfinite(powers).all():
        raise ValidationError("powers must be finite")
    if (powers < 0).any():
        k, n = np.argwhere(powers < 0)[0]
        raise ValidationError(f"link {k}: negative power on sub-channel {n}")
    for k, subset in enumerate(sets):
        outside = np.ones(n_sub, dtype=bool)
        outside[list(subset)] = False
        if (powers[k, outside] != 0).any():
            n = int(np.flatnonzero(outside & (powers[k] != 0))[0])
            raise ValidationError(f"link {k}: positive power on unassigned sub-channel {n}")
        total = float(powers[k].sum())
        if total > params.power_budgets[k] + _BUDGET_SLACK:
            raise ValidationError(
                f"link {k}: power sum {total!r} exceeds budget {params.power_budgets[k]!r}"
            )


def _link_rate(bw: float, gains_row: np.ndarray, powers_row: np.ndarray, subset) -> float:
    total = 0.0
    for n in subset:
        total += math.log1p(powers_row[n] * gains_row[n]) / _LN2
    return bw * total


def _rate_of(params: ChannelParams, chan: ChannelRealization, sets, powers: np.ndarray) -> float:
    bw = params.subchannel_bandwidth
    h = chan.normalized_gains
    total = 0.0
    for k, subset in enumerate(sets):
        total += _link_rate(bw, h[k], powers[k], subset)
    return total


def exact_sum_rate(
    params: ChannelParams, chan: ChannelRealization, alloc: Allocation
) -> RateReport:
    """Score an allocation with the exact objective.

    R_k = (B/N) * sum over assigned n of log2(1 + p_{k,n} * H_{k,n}); the
    report carries each link's rate and their total. The allocation is
    validated first.
    """
    validate_allocation(params, alloc)
    bw = params.subchannel_bandwidth
    h = chan.normalized_gains
    per_link = tuple(
        _link_rate(bw, h[k], alloc.powers[k], subset)
        for k, subset in enumerate(alloc.subchannels_of_link)
    )
    total = 0.0
    for r in per_link:
        total += r
    return RateReport(per_link_rate=per_link, total_rate=total)


def linear_approx_rate(
    params: ChannelParams, chan: ChannelRealization, alloc: Allocation
) -> float:
    """Low-SNR linearized objective: (B/N)/ln2 * sum of p * H."""
    return (
        params.subchannel_bandwidth
        / _LN2
        * float((alloc.powers * chan.normalized_gains).sum())
    )


def log_approx_rate(params: ChannelParams, chan: ChannelRealization, alloc: Allocation) -> float:
    """High-SNR log objective: (B/N) * sum over powered channels of log2(p * H).

    Returns -inf if a powered channel has zero gain.
    """
    powered = alloc.powers > 0
    if not powered.any():
        return 0.0
    x = alloc.powers[powered] * chan.normalized_gains[powered]
    with np.errstate(divide="ignore"):
        return params.subchannel_bandwidth * float(np.log2(x).sum())


def low_snr_cost_matrix(params: ChannelParams, chan: ChannelRealization) -> CostMatrix:
    """Maximize matrix c[k, n] = P_k * H[k, n] for the one-per-link assignment."""
    budgets = np.asarray(params.power_budgets)[:, None]
    return CostMatrix(values=budgets * chan.normalized_gains, orientation="maximize")


def high_snr_cost_matrix(params: ChannelParams, chan: ChannelRealization) -> CostMatrix:
    """Maximize matrix c[k, n] = ln H[k, n], zero-gain cells forbidden."""
    h = chan.normalized_gains
    usable = h > 0
    values = np.where(usable, np.log(h, where=usable, out=np.zeros_like(h)), 0.0)
    return CostMatrix(values=values, orientation="maximize", forbidden=~usable)


def low_snr_allocate(params: ChannelParams, chan: ChannelRealization) -> Allocation:
    """Low-SNR strategy: one powered sub-channel per link via the assignment solver.

    The solver maximizes sum of P_k * H over one-sub-channel-per-link
    assignments; the full budget lands on the assigned sub-channel. The
    remaining quota slots are filled with zero-power sub-channels,
    round-robin over links in index order, each taking its highest-gain
    unassigned sub-channel (ties to the lowest index).
    """
    result = solve_assignment(low_snr_cost_matrix(params, chan))
    h = chan.normalized_gains
    n_sub = params.num_subchannels
    sets = [[c] for c in result.column_of_row]
    taken = set(result.column_of_row)
    for _ in range(params.quota - 1):
        for k in range(params.num_links):
            avail = [n for n in range(n_sub) if n not in taken]
            pick = avail[int(np.argmax(h[k, avail]))]
            sets[k].append(pick)
            taken.add(pick)
    powers = np.zeros((params.num_links, n_sub))
    for k, col in enumerate(result.column_of_row):
        powers[k, col] = params.power_budgets[k]
    return Allocation(
        subchannels_of_link=tuple(tuple(sorted(s)) for s in sets),
        powers=powers,
        strategy_tag=LOW_SNR,
    )


def high_snr_allocate(params: ChannelParams, chan: ChannelRealization) -> Allocation:
    """High-SNR strategy: quota-replicated log-gain assignment, equal power split."""
    quota = params.quota
    usable_counts = (chan.normalized_gains > 0).sum(axis=1)
    short = np.flatnonzero(usable_counts < quota)
    if short.size:
        k = int(short[0])
        raise InfeasibleError(
            f"link {k} has only {int(usable_counts[k])} usable sub-channels; quota is {quota}"
        )
    replicated = replicate_rows(high_snr_cost_matrix(params, chan), quota)
    result = solve_assignment(replicated)
    sets: list[list[int]] = [[] for _ in range(params.num_links)]
    for row, col in enumerate(result.column_of_row):
        sets[row // quota].append(col)
    powers = np.zeros((params.num_links, params.num_subchannels))
    for k, subset in enumerate(sets):
        powers[k, subset] = equal_split(quota, params.power_budgets[k])
    return Allocation(
        subchannels_of_link=tuple(tuple(sorted(s)) for s in sets),
        powers=powers,
        strategy_tag=HIGH_SNR,
    )


def partition_count(num_subchannels: int, num_links: int) -> int:
    """Number of ordered partitions into quota-sized disjoint link sets."""
    quota = num_subchannels // num_links
    count = 1
    remaining = num_subchannels
    for _ in range(num_links):
        count *= math.comb(remaining, quota)
        remaining -= quota
    return count


def enumerate_partitions(num_subchannels: int, num_links: int):
    """Yield every ordered partition, lexicographic in each link's choice.

    Each partition is a tuple of `num_links` sorted index tuples of size
    floor(N/K); surplus sub-channels are simply left out.
    """
    quota = num_subchannels // num_links

    def recurse(remaining: tuple[int, ...], depth: int, chosen: tuple):
        if depth == num_links:
            yield chosen
            return
        for subset in combinations(remaining, quota):
            rest = tuple(n for n in remaining if n not in subset)
            yield from recurse(rest, depth + 1, chosen + (subset,))

    yield from recurse(tuple(range(num_subchannels)), 0, ())


@lru_cache(maxsize=32)
def _partition_table(num_subchannels: int, num_links: int) -> tuple:
    return tuple(enumerate_partitions(num_subchannels, num_links))


def optimal_allocate(
    params: ChannelParams,
    chan: ChannelRealization,
    partition_guard: int = DEFAULT_PARTITION_GUARD,
) -> Allocation:
    """Brute-force optimum: best water-filled rate over every quota partition.

    A link whose candidate set has no positive gain keeps zero power (its
    rate contribution is zero either way).
    """
    n_sub = params.num_subchannels
    k_links = params.num_links
    count = partition_count(n_sub, k_links)
    if count > partition_guard:
        raise GuardError(
            f"instance too large: {count} candidate partitions exceed the guard "
            f"of {partition_guard} (K={k_links}, N={n_sub})"
        )
    if count <= _CACHED_PARTITION_LIMIT:
        candidates = _partition_table(n_sub, k_links)
    else:
        candidates = enumerate_partitions(n_sub, k_links)

    h = chan.normalized_gains
    best_rate = -math.inf
    best_sets = None
    best_powers = None
    for cand in candidates:
        powers = np.zeros((k_links, n_sub))
        for k, subset in enumerate(cand):
            gains = h[k, list(subset)]
            if (gains > 0).any():
                powers[k, list(subset)] = water_fill(gains, params.power_budgets[k]).powers
        rate = _rate_of(params, chan, cand, powers)
        if rate > best_rate:
            best_rate = rate
            best_sets = cand
            best_powers = powers
    return Allocation(
        subchannels_of_link=best_sets,
        powers=best_powers,
        strategy_tag=OPTIMAL,
    )


def max_select_allocate(
    params: ChannelParams,
    chan: ChannelRealization,
    power_rule: str = "water_fill",
) -> Allocation:
    """Greedy baseline: repeatedly hand the globally strongest remaining gain
    to its link until every quota is filled.

    Only links with unfilled quota and still-unassigned sub-channels compete;
    ties break toward the lowest (link, sub-channel) pair. Power over each
    final set follows `power_rule`: "water_fill" (default) or "equal_split".
    """
    if power_rule not in POWER_RULES:
        raise ValidationError(f"power_rule must be one of {POWER_RULES}")
    h = chan.normalized_gains
    k_links = params.num_links
    n_sub = params.num_subchannels
    quota = params.quota

    # Stable argsort of the flattened gains keeps ties in (link, sub-channel)
    # order, which makes the walk identical to repeated global argmax.
    order = np.argsort(-h, axis=None, kind="stable")
    sets: list[list[int]] = [[] for _ in range(k_links)]
    taken = np.zeros(n_sub, dtype=bool)
    unfilled = k_links * quota
    for flat in order:
        k, n = divmod(int(flat), n_sub)
        if len(sets[k]) < quota and not taken[n]:
            sets[k].append(n)
            taken[n] = True
            unfilled -= 1
            if unfilled == 0:
                break

    powers = np.zeros((k_links, n_sub))
    for k, subset in enumerate(sets):
        subset.sort()
        gains = h[k, subset]
        if power_rule == "equal_split":
            powers[k, subset] = equal_split(quota, params.power_budgets[k])
        elif (gains > 0).any():
            powers[k, subset] = water_fill(gains, params.power_budgets[k]).powers
    return Allocation(
        subchannels_of_link=tuple(tuple(s) for s in sets),
        powers=powers,
        strategy_tag=MAX_SELECT,
    )


def allocate(
    strategy: str,
    params: ChannelParams,
    chan: ChannelRealization,
    *,
    partition_guard: int = DEFAULT_PARTITION_GUARD,
    max_select_power_rule: str = "water_fill",
) -> Allocation:
    """Dispatch one strategy by tag."""
    if strategy == LOW_SNR:
        return low_snr_allocate(params, chan)
    if strategy == HIGH_SNR:
        return high_snr_allocate(params, chan)
    if strategy == OPTIMAL:
        return optimal_allocate(params, chan, partition_guard=partition_guard)
    if strategy == MAX_SELECT:
        return max_select_allocate(params, chan, power_rule=max_select_power_rule)
    raise ValidationError(f"unknown strategy {strategy!r}; expected one of {STRATEGY_ORDER}")
