"""Structural analysis of the relaxation maps.

Choi matrices and complete positivity, positivity on the Bloch ball,
two-time intermediate maps and divisibility, and a regime classifier that
combines those scans with the information-flow measure.

Convention fixed project-wide: the Choi matrix is built with the input index
on the first tensor factor and is unnormalized,

    C = sum_{i,j in {0,1}} |i><j| (x) Phi(|i><j|),

so the identity map gives a rank-one matrix of trace 2 and trace preservation
reads "partial trace over the second factor equals the 2x2 identity".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import measure as measure_mod
from .maps import (
    EquationKind,
    MapParams,
    MapSnapshot,
    parse_kind,
    snapshot,
    snapshot_arrays,
    xi,
)
from .sphere import pattern_search, sphere_grid
from .states import EXCITED, GROUND, QubitState, StatePair, state_from_bloch

__all__ = [
    "MapInversionError",
    "CpVerdict",
    "PositivityVerdict",
    "IntermediateMap",
    "DivisibilityReport",
    "RegimeReport",
    "choi_of",
    "choi_eigenvalues",
    "is_completely_positive",
    "is_positive",
    "cp_scan",
    "positivity_scan",
    "intermediate_map",
    "divisibility_scan",
    "cp_temperature_threshold",
    "classify",
]

#: eigenvalue slack for complete-positivity verdicts
CP_TOL = 1e-10
#: Bloch-norm slack for positivity verdicts
POSITIVITY_TOL = 1e-10
#: damping factors smaller than this make the earlier map non-invertible
INVERSION_FLOOR = 1e-12


class MapInversionError(RuntimeError):
    """The earlier map of a two-time pair cannot be inverted."""


def choi_of(snap: MapSnapshot) -> np.ndarray:
    """4x4 Choi matrix of the affine map, input index first, trace 2."""
    u, v, lam1 = snap.u, snap.v, snap.lambda1
    return np.array(
        [
            [1.0 - v, 0.0, 0.0, lam1],
            [0.0, v, 0.0, 0.0],
            [0.0, 0.0, 1.0 - u, 0.0],
            [lam1, 0.0, 0.0, u],
        ],
        dtype=complex,
    )


def choi_eigenvalues(snap: MapSnapshot) -> np.ndarray:
    """Spectrum of choi_of(snap) in closed form, ascending.

    The two population entries v and 1-u sit on the diagonal; the coherence
    block 2x2 has trace 1 + lambda3 and off-diagonal lambda1, giving
    ((1 + lambda3) +- sqrt(t3**2 + 4 lambda1**2)) / 2.
    """
    root = math.sqrt(snap.t3 * snap.t3 + 4.0 * snap.lambda1 * snap.lambda1)
    outer = 0.5 * (1.0 + snap.lambda3)
    eigs = np.array([snap.v, 1.0 - snap.u, outer - 0.5 * root, outer + 0.5 * root])
    return np.sort(eigs)


@dataclass(frozen=True)
class CpVerdict:
    ok: bool
    min_eigenvalue: float


def is_completely_positive(c: np.ndarray, tol: float = CP_TOL) -> CpVerdict:
    """Hermitian-eigenvalue test of the Choi matrix."""
    c = np.asarray(c)
    if not np.allclose(c, c.conj().T, atol=1e-12, rtol=0.0):
        raise ValueError("Choi matrix must be Hermitian")
    smallest = float(np.linalg.eigvalsh(c)[0])
    return CpVerdict(ok=smallest >= -tol, min_eigenvalue=smallest)


@dataclass(frozen=True)
class PositivityVerdict:
    ok: bool
    max_norm: float
    witness: QubitState


def _image_norm(snap: MapSnapshot, direction: np.ndarray) -> float:
    x, y, z = direction
    tx = snap.lambda1 * x
    ty = snap.lambda1 * y
    tz = snap.lambda3 * z + snap.t3
    return math.sqrt(tx * tx + ty * ty + tz * tz)


def is_positive(
    snap: MapSnapshot, samples: int = 1000, tol: float = POSITIVITY_TOL
) -> PositivityVerdict:
    """Does the affine image of the Bloch ball stay inside the ball?

    Maximizes the output Bloch norm over pure inputs: a deterministic
    icosphere grid of at least `samples` directions, then pattern-search
    refinement on the sphere from the best vertex.  The maximum of an affine
    image over the ball is attained on the sphere, so pure inputs suffice.
    """
    if samples < 1000:
        raise ValueError(f"samples must be >= 1000, got {samples}")
    verts = sphere_grid(samples)
    xy = snap.lambda1 * verts[:, :2]
    zz = snap.lambda3 * verts[:, 2] + snap.t3
    norms = np.sqrt(np.einsum("ij,ij->i", xy, xy) + zz * zz)
    best = int(np.argmax(norms))

    def objective(vec):
        return _image_norm(snap, vec)

    def project(vec):
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0.0 else np.array([0.0, 0.0, 1.0])

    direction, max_norm, _ = pattern_search(
        objective, verts[best], project=project, step=0.2, min_step=1e-8
    )
    return PositivityVerdict(
        ok=max_norm <= 1.0 + tol,
        max_norm=float(max_norm),
        witness=state_from_bloch(*direction),
    )


@dataclass(frozen=True)
class ScanResult:
    ok: bool
    worst_tau: float
    worst_value: float
    witness: QubitState | None = None


def positivity_scan(
    kind, p: MapParams, taus, samples: int = 1000, tol: float = POSITIVITY_TOL
) -> ScanResult:
    """Vectorized icosphere positivity check over a tau grid.

    Screens every grid time against all sphere vertices at once, then
    refines the worst candidate with the full is_positive machinery.
    """
    kind = parse_kind(kind)
    taus = np.asarray(taus, dtype=float)
    verts = sphere_grid(samples)
    lam1, lam3, t3 = snapshot_arrays(kind, p, taus)
    planar = verts[:, 0] ** 2 + verts[:, 1] ** 2
    zz = lam3[:, None] * verts[None, :, 2] + t3[:, None]
    norms2 = lam1[:, None] ** 2 * planar[None, :] + zz * zz
    worst_idx = int(np.argmax(np.max(norms2, axis=1)))
    verdict = is_positive(
        MapSnapshot(float(lam1[worst_idx]), float(lam3[worst_idx]), float(t3[worst_idx])),
        samples=samples,
        tol=tol,
    )
    return ScanResult(
        ok=verdict.ok,
        worst_tau=float(taus[worst_idx]),
        worst_value=verdict.max_norm,
        witness=verdict.witness,
    )


def _snapshot_min_eigs(lam1: np.ndarray, lam3: np.ndarray, t3: np.ndarray) -> np.ndarray:
    """Closed-form smallest Choi eigenvalue, vectorized over snapshot arrays."""
    v = 0.5 * (1.0 + t3 - lam3)
    one_minus_u = 0.5 * (1.0 - t3 - lam3)
    outer = 0.5 * (1.0 + lam3) - 0.5 * np.sqrt(t3 * t3 + 4.0 * lam1 * lam1)
    return np.minimum(np.minimum(v, one_minus_u), outer)


def cp_scan(kind, p: MapParams, taus, tol: float = CP_TOL) -> ScanResult:
    """Smallest Choi eigenvalue of the one-time map over a tau grid.

    The grid is screened with the closed-form spectrum; the reported worst
    value is recomputed with a numerical eigensolver as an independent check.
    """
    kind = parse_kind(kind)
    taus = np.asarray(taus, dtype=float)
    lam1, lam3, t3 = snapshot_arrays(kind, p, taus)
    mins = _snapshot_min_eigs(lam1, lam3, t3)
    worst = int(np.argmin(mins))
    verdict = is_completely_positive(
        choi_of(MapSnapshot(float(lam1[worst]), float(lam3[worst]), float(t3[worst]))),
        tol=tol,
    )
    return ScanResult(
        ok=bool(np.all(mins >= -tol)) and verdict.ok,
        worst_tau=float(taus[worst]),
        worst_value=verdict.min_eigenvalue,
    )


@dataclass(frozen=True)
class IntermediateMap:
    """Affine Bloch action carrying the state from tau_start to tau_end."""

    lambda1: float
    lambda3: float
    t3: float
    tau_start: float
    tau_end: float

    def as_snapshot(self) -> MapSnapshot:
        return MapSnapshot(self.lambda1, self.lambda3, self.t3)


def intermediate_map(kind, p: MapParams, t1: float, t2: float) -> IntermediateMap:
    """Two-time map: the tau = t2 map composed with the inverse of tau = t1.

    Componentwise lambda(t2) / lambda(t1) and the matching translation.
    Raises MapInversionError when a damping factor of the earlier map has
    (numerically) vanished.
    """
    kind = parse_kind(kind)
    if not 0.0 <= t1 <= t2:
        raise ValueError(f"need 0 <= t1 <= t2, got t1 = {t1}, t2 = {t2}")
    early = snapshot(kind, p, t1)
    late = snapshot(kind, p, t2)
    for name, value in (("lambda1", early.lambda1), ("lambda3", early.lambda3)):
        if abs(value) < INVERSION_FLOOR:
            raise MapInversionError(
                f"{name}(t1 = {t1:.9g}) = {value:.3g} has vanished; "
                "the earlier map is not invertible"
            )
    lam1 = late.lambda1 / early.lambda1
    lam3 = late.lambda3 / early.lambda3
    t3 = late.t3 - lam3 * early.t3
    return IntermediateMap(lam1, lam3, t3, tau_start=t1, tau_end=t2)


@dataclass(frozen=True)
class DivisibilityReport:
    divisible: bool
    min_eigenvalue: float
    worst_pair: tuple[float, float]
    tau_end: float
    grid: int


def divisibility_scan(
    kind,
    p: MapParams,
    tau_end: float = 20.0,
    grid: int = 200,
    tol: float = 1e-9,
    refine: bool = True,
) -> DivisibilityReport:
    """Search (t1, t2) for an intermediate map that is not CP.

    Uniform grid over the triangle 0 <= t1 < t2 <= tau_end using the
    closed-form Choi spectrum, optional local refinement around the most
    negative eigenvalue, and a numerical eigensolver verdict at the winner.
    Grid times where the one-time map is not invertible are skipped.
    """
    kind = parse_kind(kind)
    taus = np.linspace(0.0, tau_end, grid)
    lam1, lam3, t3 = snapshot_arrays(kind, p, taus)
    invertible = (np.abs(lam1) >= INVERSION_FLOOR) & (np.abs(lam3) >= INVERSION_FLOOR)

    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = lam1[None, :] / lam1[:, None]
        l3 = lam3[None, :] / lam3[:, None]
        tt = t3[None, :] - l3 * t3[:, None]
        mins = _snapshot_min_eigs(l1, l3, tt)
    valid = invertible[:, None] & (taus[None, :] > taus[:, None])
    mins = np.where(valid, mins, np.inf)
    i, j = np.unravel_index(int(np.argmin(mins)), mins.shape)
    t1, t2 = float(taus[i]), float(taus[j])

    def objective(pair):
        a, b = pair
        try:
            im = intermediate_map(kind, p, a, b)
        except (MapInversionError, ValueError):
            return -np.inf
        return -float(
            _snapshot_min_eigs(
                np.array(im.lambda1), np.array(im.lambda3), np.array(im.t3)
            )
        )

    if refine and np.isfinite(mins[i, j]):
        spacing = taus[1] - taus[0] if grid > 1 else tau_end

        def project(pair):
            a = min(max(pair[0], 0.0), tau_end)
            b = min(max(pair[1], 0.0), tau_end)
            return np.array([min(a, b), max(a, b)])

        refined, _, _ = pattern_search(
            objective,
            np.array([t1, t2]),
            project=project,
            step=spacing,
            min_step=1e-7 * max(tau_end, 1.0),
        )
        t1, t2 = float(refined[0]), float(refined[1])

    try:
        worst = intermediate_map(kind, p, t1, t2)
        verdict = is_completely_positive(choi_of(worst.as_snapshot()), tol=tol)
        min_eig = verdict.min_eigenvalue
    except MapInversionError:
        min_eig = float(mins[i, j]) if np.isfinite(mins[i, j]) else 0.0
    return DivisibilityReport(
        divisible=min_eig >= -tol,
        min_eigenvalue=min_eig,
        worst_pair=(t1, t2),
        tau_end=tau_end,
        grid=grid,
    )


def cp_temperature_threshold(kind, r: float, tau: float) -> float:
    """Occupation N above which the one-time map at (r, tau) is CP.

    The only N-dependent entry is the translation t3 = (lambda3 - 1)/(2N+1),
    and the binding eigenvalue condition is
    (1 + lambda3)**2 - 4 lambda1**2 >= t3**2, monotonically easier as N
    grows.  Returns 0.0 when CP already holds at N = 0 and inf when even
    infinite temperature cannot restore CP.
    """
    kind = parse_kind(kind)
    lam3 = xi(kind, r, tau)
    lam1 = xi(kind, 0.5 * r, tau)
    gap = (1.0 + lam3) ** 2 - 4.0 * lam1 * lam1
    if gap <= 0.0:
        return math.inf
    needed = abs(1.0 - lam3) / math.sqrt(gap)  # required 2N+1
    return max(0.0, 0.5 * (needed - 1.0))


_VERDICT_UNPHYSICAL = "Unphysical(positivity broken)"
_VERDICT_NONMARKOVIAN = "NonMarkovian"
_VERDICT_NONDIVISIBLE = "TimeDependentMarkovian-Nondivisible"
_VERDICT_DIVISIBLE = "TimeDependentMarkovian-Divisible"

#: information backflow below this total gain counts as zero
MEASURE_TOL = 1e-8


@dataclass(frozen=True)
class RegimeReport:
    """Combined verdict of the positivity, CP, divisibility and flow scans."""

    kind: EquationKind
    params: MapParams
    verdict: str
    params_physical: bool
    positivity: ScanResult
    cp: ScanResult
    divisibility: DivisibilityReport
    measure: "measure_mod.MeasureResult"
    sigma_positive_intervals: tuple[tuple[float, float, float], ...]
    tau_end: float


def classify(
    kind,
    p: MapParams,
    *,
    tau_end: float | None = None,
    grid_points: int = 401,
    samples: int = 1000,
    divisibility_grid: int = 150,
    measure_budget: int = 400,
    seed: int | None = None,
    measure_result=None,
) -> RegimeReport:
    """Classify the dynamics generated by (kind, p).

    Order of precedence: a positivity defect (or an inherently unsafe
    parameter regime) makes the family unphysical; otherwise information
    backflow makes it non-Markovian; otherwise divisibility separates the
    two time-dependent Markovian classes.  A CP defect alone (low
    temperature) is reported but does not change the verdict.
    """
    kind = parse_kind(kind)
    if tau_end is None:
        tau_end = measure_mod.certified_horizon(kind, p)
    taus = np.linspace(0.0, tau_end, grid_points)

    physical = p.physical_for(kind)
    pos = positivity_scan(kind, p, taus, samples=samples)
    cp = cp_scan(kind, p, taus)
    if measure_result is None:
        kwargs = {} if seed is None else {"seed": seed}
        measure_result = measure_mod.measure(
            kind, p, t_end=tau_end, budget=measure_budget, **kwargs
        )
    div = divisibility_scan(kind, p, tau_end=tau_end, grid=divisibility_grid)

    pair = StatePair(EXCITED, GROUND)
    flow = measure_mod.flow_report(kind, p, pair, tau_end, grid_points=max(grid_points, 400))
    intervals = flow.positive_intervals

    if not physical or not pos.ok:
        verdict = _VERDICT_UNPHYSICAL
    elif measure_result.value > MEASURE_TOL:
        verdict = _VERDICT_NONMARKOVIAN
    elif not div.divisible:
        verdict = _VERDICT_NONDIVISIBLE
    else:
        verdict = _VERDICT_DIVISIBLE

    return RegimeReport(
        kind=kind,
        params=p,
        verdict=verdict,
        params_physical=physical,
        positivity=pos,
        cp=cp,
        divisibility=div,
        measure=measure_result,
        sigma_positive_intervals=intervals,
        tau_end=tau_end,
    )
