"""Covering numbers, box-counting dimension estimates, Hausdorff
delta-measures and dimension sweeps, and Jacobians.

Covering counts use an axis-aligned grid with cell side 2*rho/sqrt(m):
each cell fits inside a rho-ball, so the count upper-bounds the true
covering number within an m-dependent constant factor, which leaves
log-log slopes unchanged. Limits (rho -> 0, infima over covers) are not
computed; finite-scale proxies are reported instead and saturated scales
are flagged rather than silently dropped.
"""

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from alc.errors import InvalidArgumentError
from alc.setgen import PointCloud, ball_volume, diam


@dataclass
class ScaleSchedule:
    """Strictly decreasing positive radii at which covering counts are taken."""

    radii: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=np.float64)
        if self.radii.size < 3:
            raise InvalidArgumentError("need at least 3 radii")
        if np.any(self.radii <= 0):
            raise InvalidArgumentError("radii must be positive")
        if np.any(np.diff(self.radii) >= 0):
            raise InvalidArgumentError("radii must be strictly decreasing")

    @classmethod
    def dyadic(cls, j_min: int, j_max: int) -> "ScaleSchedule":
        """Radii 2^-j for j = j_min..j_max."""
        return cls.geometric(2.0, j_min, j_max)

    @classmethod
    def geometric(cls, base: float, j_min: int, j_max: int) -> "ScaleSchedule":
        """Radii base^-j for j = j_min..j_max."""
        return cls(np.array([float(base) ** -j for j in range(j_min, j_max + 1)]))


@dataclass
class DimensionEstimate:
    """Per-scale counts plus the log-log regression slope and diagnostics.

    slope_lo / slope_hi are the min / max two-point local slopes over
    non-saturated scale pairs: finite-sample proxies for liminf / limsup.
    """

    per_scale: List[Tuple[float, int]]
    slope: float
    slope_lo: float
    slope_hi: float
    r2: float
    saturated_scales: List[float] = field(default_factory=list)
    block_slopes: Optional[List[float]] = None


@dataclass
class HausdorffSweep:
    """Grid-cover H^s_delta values over an (s, delta) grid.

    transition_s locates the s where the value at the finest delta drops
    below 1e-3 of the value at the coarsest delta (NaN if no crossing).
    """

    s_grid: np.ndarray
    delta_grid: np.ndarray
    values: np.ndarray  # (len(s_grid), len(delta_grid))
    transition_s: float


def covering_number(cloud: PointCloud, rho: float, anchor=0.0) -> int:
    """Occupied cells of the grid with side 2*rho/sqrt(m) anchored at `anchor`."""
    if rho <= 0:
        raise InvalidArgumentError("rho must be positive")
    m = cloud.ambient_dim
    side = 2.0 * rho / math.sqrt(m)
    cells = np.floor((cloud.points - anchor) / side).astype(np.int64)
    return int(np.unique(cells, axis=0).shape[0])


def _regress(log_inv_rho, log_counts):
    slope, intercept = np.polyfit(log_inv_rho, log_counts, 1)
    fit = slope * log_inv_rho + intercept
    ss_res = float(np.sum((log_counts - fit) ** 2))
    ss_tot = float(np.sum((log_counts - log_counts.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), r2


def minkowski_dim(cloud: PointCloud, sched: ScaleSchedule, anchor=0.0) -> DimensionEstimate:
    """Box-counting estimate: least-squares slope of log N against log(1/rho)."""
    radii = sched.radii
    counts = np.array([covering_number(cloud, r, anchor) for r in radii], dtype=np.int64)
    n_points = len(cloud)
    saturated = (counts == n_points) | (counts == 1)

    # saturated scales carry no dimension information (the count is pinned
    # at 1 or |points|); regression and local slopes use the rest. A fully
    # saturated schedule means the sample is resolved: slope proxy 0.
    keep = ~saturated
    if keep.sum() >= 2:
        xs = np.log(1.0 / radii[keep])
        ys = np.log(counts[keep].astype(np.float64))
        slope, r2 = _regress(xs, ys)
        local = np.maximum((ys[1:] - ys[:-1]) / (xs[1:] - xs[:-1]), 0.0)
        slope_lo, slope_hi = float(local.min()), float(local.max())
    else:
        slope, r2 = 0.0, 1.0
        slope_lo = slope_hi = 0.0

    return DimensionEstimate(
        per_scale=[(float(r), int(c)) for r, c in zip(radii, counts)],
        slope=slope,
        slope_lo=slope_lo,
        slope_hi=slope_hi,
        r2=r2,
        saturated_scales=[float(r) for r, s in zip(radii, saturated) if s],
    )


def modified_minkowski_dim(
    blocks: Sequence[PointCloud], sched: ScaleSchedule, anchor=0.0
) -> DimensionEstimate:
    """Finite-cover surrogate for the modified box dimension: the caller
    supplies the cover blocks and the per-block maximum slope is returned."""
    if not blocks:
        raise InvalidArgumentError("block list must be non-empty")
    estimates = [minkowski_dim(b, sched, anchor) for b in blocks]
    slopes = [e.slope for e in estimates]
    best = estimates[int(np.argmax(slopes))]
    best.block_slopes = slopes
    return best


def hausdorff_measure_delta(cover: Sequence[PointCloud], s: float) -> float:
    """Evaluate (V(s,1)/2^s) * sum_i diam(cover_i)^s on the given cover,
    with the convention diam^0 = 1. Upper-bounds the infimum over covers."""
    if s < 0:
        raise InvalidArgumentError("s must be >= 0")
    if not cover:
        raise InvalidArgumentError("cover must be non-empty")
    prefactor = ball_volume(s, 1.0) / 2.0**s
    if s == 0:
        return prefactor * len(cover)
    total = sum(diam(c) ** s for c in cover)
    return prefactor * total


def _grid_cell_diams(cloud: PointCloud, mesh: float, anchor=0.0) -> np.ndarray:
    """Diameters of the point groups in occupied grid cells of side `mesh`."""
    cells = np.floor((cloud.points - anchor) / mesh).astype(np.int64)
    _, inverse = np.unique(cells, axis=0, return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    sorted_inv = inverse[order]
    boundaries = np.flatnonzero(np.diff(sorted_inv)) + 1
    groups = np.split(order, boundaries)
    return np.array([diam(cloud.points[g]) for g in groups])


def hausdorff_dim_estimate(
    cloud: PointCloud, s_grid, delta_grid, anchor=0.0
) -> HausdorffSweep:
    """Sweep grid-cover H^s_delta values and locate the collapse in s.

    For each delta the cover is the occupied-cell partition at mesh
    delta/sqrt(m). transition_s is the smallest s (interpolated between
    grid points) where value(finest delta) < 1e-3 * value(coarsest delta).
    """
    s_grid = np.asarray(s_grid, dtype=np.float64)
    delta_grid = np.asarray(delta_grid, dtype=np.float64)
    if np.any(np.diff(s_grid) <= 0) or np.any(s_grid < 0):
        raise InvalidArgumentError("s_grid must be increasing and non-negative")
    if np.any(delta_grid <= 0) or np.any(np.diff(delta_grid) >= 0):
        raise InvalidArgumentError("delta_grid must be decreasing and positive")

    m = cloud.ambient_dim
    values = np.empty((s_grid.size, delta_grid.size))
    for j, delta in enumerate(delta_grid):
        diams = _grid_cell_diams(cloud, delta / math.sqrt(m), anchor)
        for i, s in enumerate(s_grid):
            prefactor = ball_volume(s, 1.0) / 2.0**s
            if s == 0:
                values[i, j] = prefactor * diams.size
            else:
                values[i, j] = prefactor * float(np.sum(diams**s))

    transition_s = _locate_transition(s_grid, values[:, 0], values[:, -1])
    return HausdorffSweep(s_grid, delta_grid, values, transition_s)


_TRANSITION_RATIO = 1e-3


def _locate_transition(s_grid, coarse_vals, fine_vals) -> float:
    def log_ratio(i):
        c, f = coarse_vals[i], fine_vals[i]
        if c == 0.0:
            return -np.inf if f == 0.0 else np.inf
        return math.log10(max(f / c, 1e-300))

    thresh = math.log10(_TRANSITION_RATIO)
    prev = log_ratio(0)
    if prev <= thresh:
        return float(s_grid[0])
    for i in range(1, s_grid.size):
        cur = log_ratio(i)
        if cur <= thresh:
            if not np.isfinite(prev) or not np.isfinite(cur):
                return float(s_grid[i])
            frac = (prev - thresh) / (prev - cur)
            return float(s_grid[i - 1] + frac * (s_grid[i] - s_grid[i - 1]))
        prev = cur
    return float("nan")


def jacobian(D) -> float:
    """min(k,l)-dimensional Jacobian of a differential D in R^{l x k}:
    sqrt(det(D D^T)) if l < k, sqrt(det(D^T D)) otherwise. Tiny negative
    determinants from round-off are clamped to 0."""
    D = np.atleast_2d(np.asarray(D, dtype=np.float64))
    if not np.all(np.isfinite(D)):
        raise InvalidArgumentError("matrix entries must be finite")
    l, k = D.shape
    gram = D @ D.T if l < k else D.T @ D
    det = float(np.linalg.det(gram))
    if det < 0:
        det = 0.0
    return math.sqrt(det)


def save_dimension_estimate(est: DimensionEstimate, path) -> None:
    """(rho, count) CSV plus a JSON sidecar with the slope diagnostics."""
    with open(path, "w") as fh:
        fh.write("rho,count\n")
        for rho, count in est.per_scale:
            fh.write(f"{rho!r},{count}\n")
    sidecar = {
        "slope": est.slope,
        "slope_lo": est.slope_lo,
        "slope_hi": est.slope_hi,
        "r2": est.r2,
        "saturated_scales": est.saturated_scales,
    }
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def save_hausdorff_sweep(sweep: HausdorffSweep, path) -> None:
    """(s, delta, value) CSV plus a JSON sidecar with transition_s."""
    with open(path, "w") as fh:
        fh.write("s,delta,value\n")
        for i, s in enumerate(sweep.s_grid):
            for j, delta in enumerate(sweep.delta_grid):
                fh.write(f"{float(s)!r},{float(delta)!r},{float(sweep.values[i, j])!r}\n")
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump({"transition_s": sweep.transition_s}, fh, indent=2)
