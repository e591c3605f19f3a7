"""Trace-distance information flow and the non-Markovianity measure.

For this family of maps the trace distance between two evolved states is

    D(tau) = sqrt(a0**2 xi(R, tau)**2 + |b0|**2 xi(R/2, tau)**2),

with a0 the initial population difference and b0 the initial coherence
difference of the pair.  Its rate of change

    sigma = gamma * [a0**2 xi_R xi_R' + |b0|**2 xi_h xi_h'] / D

(primes are d/dtau) is returned in physical inverse-time units.  The measure
integrates sigma over the intervals where it is positive, which telescopes to
sums of trace-distance differences at interval endpoints: no quadrature error
enters the reported gains.

Interval endpoints are located by bracketing sign changes of sigma's
numerator on a dense grid and polishing each bracket with a root finder; the
numerator is used instead of sigma itself so that isolated zeros of D cannot
poison the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .maps import MapParams, parse_kind, xi, xi_derivative, xi_envelope
from .sphere import antipodal_half, pattern_search, sphere_grid
from .states import StatePair, random_states, state_from_bloch

__all__ = [
    "DegeneratePairError",
    "FlowReport",
    "MeasureResult",
    "sigma_analytic",
    "flow_report",
    "measure",
    "certified_horizon",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20240901
#: |xi| must decay below this at the horizon for truncation to be certified
TAIL_TOL = 1e-6


class DegeneratePairError(ValueError):
    """Identical initial states: sigma is 0/0 and the pair carries no flow."""


def _pair_weights(pair: StatePair) -> tuple[float, float]:
    a0 = pair.a0
    b0 = pair.b0
    return a0 * a0, (b0 * b0.conjugate()).real


def _require_distinct(pair: StatePair) -> tuple[float, float]:
    a2, b2 = _pair_weights(pair)
    if a2 == 0.0 and b2 == 0.0:
        raise DegeneratePairError(
            "identical initial states: trace distance is identically zero "
            "and sigma is undefined"
        )
    return a2, b2


def sigma_analytic(kind, p: MapParams, pair: StatePair, tau) -> float:
    """Rate of change of the trace distance, physical inverse-time units.

    Raises DegeneratePairError for an identical pair.  At an isolated zero
    of the trace distance (oscillatory regime) the value is +-inf or nan;
    interval bookkeeping in flow_report avoids the division entirely.
    """
    kind = parse_kind(kind)
    a2, b2 = _require_distinct(pair)
    r = p.R
    taus = np.asarray(tau, dtype=float)
    x_full = xi(kind, r, taus)
    x_half = xi(kind, 0.5 * r, taus)
    d_full = xi_derivative(kind, r, taus)
    d_half = xi_derivative(kind, 0.5 * r, taus)
    num = a2 * x_full * d_full + b2 * x_half * d_half
    den = np.sqrt(a2 * x_full * x_full + b2 * x_half * x_half)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p.gamma * num / den
    if np.ndim(tau) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FlowReport:
    """Distance trajectory of one pair with its inflow bookkeeping.

    positive_intervals holds (tau_start, tau_end, integrated_gain) triples;
    total_gain is their sum.  sigma_discrete_path is a central-difference
    cross-check of sigma_path computed from distance_path alone.
    """

    pair: StatePair
    grid: np.ndarray
    distance_path: np.ndarray
    sigma_path: np.ndarray
    sigma_discrete_path: np.ndarray
    positive_intervals: tuple[tuple[float, float, float], ...]
    total_gain: float


def _distance_at(kind, p: MapParams, a2: float, b2: float, tau: float) -> float:
    xf = xi(kind, p.R, tau)
    xh = xi(kind, 0.5 * p.R, tau)
    return math.sqrt(a2 * xf * xf + b2 * xh * xh)


def _positive_intervals(
    kind, p: MapParams, a2: float, b2: float, taus: np.ndarray, num: np.ndarray
) -> tuple[tuple[float, float, float], ...]:
    """Maximal sub-intervals of the grid span where sigma's numerator > 0.

    Grid sign changes are polished with brentq on the continuous numerator;
    each gain is the exact trace-distance difference across the interval.
    """

    def numerator(t: float) -> float:
        xf = xi(kind, p.R, t)
        xh = xi(kind, 0.5 * p.R, t)
        return a2 * xf * xi_derivative(kind, p.R, t) + b2 * xh * xi_derivative(
            kind, 0.5 * p.R, t
        )

    def crossing(lo: float, hi: float) -> float:
        flo, fhi = numerator(lo), numerator(hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        return float(brentq(numerator, lo, hi, xtol=1e-14))

    pos = num > 0.0
    intervals = []
    inside = False
    start = 0.0
    for i in range(len(taus)):
        if pos[i] and not inside:
            start = taus[0] if i == 0 else crossing(taus[i - 1], taus[i])
            inside = True
        elif inside and not pos[i]:
            end = crossing(taus[i - 1], taus[i])
            intervals.append((float(start), float(end)))
            inside = False
    if inside:
        intervals.append((float(start), float(taus[-1])))
    return tuple(
        (lo, hi, _distance_at(kind, p, a2, b2, hi) - _distance_at(kind, p, a2, b2, lo))
        for lo, hi in intervals
    )


def flow_report(kind, p: MapParams, pair: StatePair, t_end: float, grid_points: int = 400) -> FlowReport:
    """Distance path, sigma both ways, and the inflow intervals of one pair.

    Identical pairs are allowed here (unlike sigma_analytic) and produce the
    all-zero report.
    """
    kind = parse_kind(kind)
    if grid_points < 100:
        raise ValueError(f"grid_points must be >= 100, got {grid_points}")
    if not t_end > 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    taus = np.linspace(0.0, t_end, grid_points)
    a2, b2 = _pair_weights(pair)

    x_full = xi(kind, p.R, taus)
    x_half = xi(kind, 0.5 * p.R, taus)
    d_full = xi_derivative(kind, p.R, taus)
    d_half = xi_derivative(kind, 0.5 * p.R, taus)
    distance = np.sqrt(a2 * x_full * x_full + b2 * x_half * x_half)
    num = a2 * x_full * d_full + b2 * x_half * d_half

    if a2 == 0.0 and b2 == 0.0:
        zeros = np.zeros_like(taus)
        return FlowReport(pair, taus, zeros, zeros.copy(), zeros.copy(), (), 0.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = p.gamma * num / distance
    sigma_discrete = p.gamma * np.gradient(distance, taus)

    intervals = _positive_intervals(kind, p, a2, b2, taus, num)
    total = float(sum(gain for _, _, gain in intervals))
    return FlowReport(pair, taus, distance, sigma, sigma_discrete, intervals, total)


@dataclass(frozen=True)
class MeasureResult:
    """Outcome of the pair maximization.

    method is "analytic-sigma" when intervals come from the closed-form
    sigma numerator (the only mode this package ships) as opposed to
    finite-difference segmentation of the distance path.
    """

    value: float
    argmax_pair: StatePair
    evaluations: int
    method: str
    tau_end: float


def certified_horizon(kind, p: MapParams, t_end: float = 20.0) -> float:
    """Smallest doubling of t_end at which both xi envelopes fall below TAIL_TOL.

    With R = 0 the map is frozen (xi identically 1, sigma identically 0) and
    no horizon can be certified; the default is returned unchanged.
    """
    kind = parse_kind(kind)
    if p.R == 0.0:
        return t_end
    for _ in range(60):
        if (
            xi_envelope(kind, p.R, t_end) <= TAIL_TOL
            and xi_envelope(kind, 0.5 * p.R, t_end) <= TAIL_TOL
        ):
            return t_end
        t_end *= 2.0
    return t_end


def _pair_from_vector(vec: np.ndarray) -> StatePair:
    clean = np.asarray(vec, dtype=float) + 0.0  # drop negative zeros
    return StatePair(state_from_bloch(*clean[:3]), state_from_bloch(*clean[3:]))


def _ball_project(vec: np.ndarray) -> np.ndarray:
    out = np.array(vec, dtype=float)
    for k in (slice(0, 3), slice(3, 6)):
        norm = np.linalg.norm(out[k])
        if norm > 1.0:
            out[k] /= norm
    return out


def measure(
    kind,
    p: MapParams,
    t_end: float | None = None,
    budget: int = 1000,
    *,
    grid_points: int = 2001,
    seed: int = DEFAULT_SEED,
) -> MeasureResult:
    """Maximize the total inflow gain over initial state pairs.

    Stage 1 scores antipodal pure pairs on a deterministic icosphere grid
    (the gain depends on the pair only through (a0**2, |b0|**2), so this
    2-parameter family covers the extreme boundary cases).  Stage 2 runs
    coordinate pattern ascent in the full 6-dimensional two-ball pair space
    from the stage-1 winner and from budget // 10 seeded random pairs.  The
    total number of gain evaluations is capped by budget.

    The horizon defaults to the certified decay time of both xi channels so
    the truncated integral provably captures all flow up to TAIL_TOL.
    """
    kind = parse_kind(kind)
    if budget < 100:
        raise ValueError(f"budget must be >= 100, got {budget}")
    if t_end is None:
        t_end = certified_horizon(kind, p)
    taus = np.linspace(0.0, t_end, grid_points)

    r = p.R
    x_full = xi(kind, r, taus)
    x_half = xi(kind, 0.5 * r, taus)
    d_full = xi_derivative(kind, r, taus)
    d_half = xi_derivative(kind, 0.5 * r, taus)
    full_term = x_full * d_full
    half_term = x_half * d_half

    evaluations = 0

    def gain_of_weights(a2: float, b2: float) -> float:
        nonlocal evaluations
        evaluations += 1
        if a2 == 0.0 and b2 == 0.0:
            return 0.0
        num = a2 * full_term + b2 * half_term
        if not np.any(num > 0.0):
            return 0.0
        total = 0.0
        for _, _, gain in _positive_intervals(kind, p, a2, b2, taus, num):
            total += gain
        return total

    def gain_of_vector(vec: np.ndarray) -> float:
        da = 0.5 * (vec[2] - vec[5])
        dbx = 0.5 * (vec[0] - vec[3])
        dby = 0.5 * (vec[1] - vec[4])
        return gain_of_weights(da * da, dbx * dbx + dby * dby)

    directions = antipodal_half(sphere_grid(162))
    best_value = -1.0
    best_vec = None
    for direction in directions:
        if evaluations >= budget:
            break
        a2 = direction[2] ** 2
        value = gain_of_weights(a2, 1.0 - a2)
        if value > best_value:
            best_value = value
            best_vec = np.concatenate([direction, -direction])

    rng = np.random.default_rng(seed)
    seeds = [best_vec]
    for s1, s2 in zip(
        random_states(rng, budget // 10), random_states(rng, budget // 10)
    ):
        seeds.append(np.concatenate([s1.bloch(), s2.bloch()]))

    remaining = budget - evaluations
    winner_share = max(remaining // 2, 1)
    for idx, start in enumerate(seeds):
        if evaluations >= budget:
            break
        cap = winner_share if idx == 0 else max(
            (budget - evaluations) // max(len(seeds) - idx, 1), 1
        )
        vec, value, _ = pattern_search(
            gain_of_vector,
            np.asarray(start, dtype=float),
            project=_ball_project,
            step=0.3,
            min_step=1e-4,
            max_evals=min(cap, budget - evaluations),
        )
        if value > best_value:
            best_value = value
            best_vec = vec

    return MeasureResult(
        value=max(best_value, 0.0),
        argmax_pair=_pair_from_vector(best_vec),
        evaluations=evaluations,
        method="analytic-sigma",
        tau_end=t_end,
    )
