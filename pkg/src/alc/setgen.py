"""Example-set and signal generators plus elementary geometric utilities.

Everything here is deterministic given its arguments: generators derive
their randomness from :func:`alc.rng.stream` and never touch global RNG
state.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from alc import rng
from alc._kernels import max_pairwise_dist
from alc.errors import InvalidArgumentError, ResourceLimitError

_BRUTE_FORCE_DIAM_LIMIT = 2048


@dataclass
class PointCloud:
    """Finite sample of R^m points; the computational stand-in for a set."""

    ambient_dim: int
    points: np.ndarray  # (N, ambient_dim)
    label: str = ""
    seed: Optional[int] = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if self.ambient_dim < 1:
            raise InvalidArgumentError("ambient_dim must be positive")
        if self.points.shape[0] == 0:
            raise InvalidArgumentError("point cloud must be non-empty")
        if self.points.shape[1] != self.ambient_dim:
            raise InvalidArgumentError(
                f"points have {self.points.shape[1]} coordinates, "
                f"expected {self.ambient_dim}"
            )
        if not np.all(np.isfinite(self.points)):
            raise InvalidArgumentError("all coordinates must be finite")

    def __len__(self):
        return self.points.shape[0]


@dataclass
class ChartedSet:
    """Family of (parameter grid, image samples) pairs: a sampled union of
    Lipschitz chart images. Lipschitz-ness of the charts is assumed, not
    verified."""

    param_dim: int
    ambient_dim: int
    charts: list  # list of (param_grid (N, param_dim), images (N, ambient_dim))

    def __post_init__(self):
        if self.param_dim < 1 or self.ambient_dim < 1:
            raise InvalidArgumentError("dimensions must be positive")
        if self.param_dim > self.ambient_dim:
            raise InvalidArgumentError("param_dim must not exceed ambient_dim")
        checked = []
        for grid, images in self.charts:
            grid = np.atleast_2d(np.asarray(grid, dtype=np.float64))
            images = np.atleast_2d(np.asarray(images, dtype=np.float64))
            if grid.shape[0] != images.shape[0]:
                raise InvalidArgumentError("chart grid and images differ in length")
            checked.append((grid, images))
        self.charts = checked

    def pooled_cloud(self) -> PointCloud:
        pts = np.vstack([images for _, images in self.charts])
        return PointCloud(self.ambient_dim, pts, label="charted")


@dataclass
class SparseSignal:
    """Exactly-s-sparse vector: support indices plus nonzero values."""

    m: int
    support: np.ndarray  # (s,) sorted int
    values: np.ndarray  # (s,) nonzero float

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        s = self.support.size
        if s != self.values.size:
            raise InvalidArgumentError("support and values differ in length")
        if s > self.m:
            raise InvalidArgumentError("sparsity exceeds ambient dimension")
        if s and (self.support.min() < 0 or self.support.max() >= self.m):
            raise InvalidArgumentError("support index out of range")
        if np.any(self.values == 0.0):
            raise InvalidArgumentError("values must be nonzero")

    @property
    def s(self) -> int:
        return self.support.size


@dataclass
class KroneckerSignal:
    """x = a (x) b with a's first nonzero entry normalized to 1."""

    k: int
    l: int
    a_support: np.ndarray
    a_values: np.ndarray
    b_support: np.ndarray
    b_values: np.ndarray

    def __post_init__(self):
        self.a_support = np.asarray(self.a_support, dtype=np.int64)
        self.a_values = np.asarray(self.a_values, dtype=np.float64)
        self.b_support = np.asarray(self.b_support, dtype=np.int64)
        self.b_values = np.asarray(self.b_values, dtype=np.float64)
        if self.a_values.size == 0 or self.a_values[0] != 1.0:
            raise InvalidArgumentError("first entry of a_values must equal 1")
        if np.any(self.a_values == 0.0) or np.any(self.b_values == 0.0):
            raise InvalidArgumentError("values must be nonzero")

    @property
    def r(self) -> int:
        return self.a_support.size

    @property
    def t(self) -> int:
        return self.b_support.size


StructuredSignal = Union[SparseSignal, KroneckerSignal]


def _nonzero_normal(gen: np.random.Generator, size: int) -> np.ndarray:
    """Standard normals with exact zeros (measure-zero event) redrawn."""
    vals = gen.standard_normal(size)
    while np.any(vals == 0.0):
        idx = np.flatnonzero(vals == 0.0)
        vals[idx] = gen.standard_normal(idx.size)
    return vals


def gen_sparse(m: int, s: int, seed: int) -> SparseSignal:
    """Uniform support, i.i.d. standard-normal values, exactly s nonzeros."""
    if s < 1 or s > m:
        raise InvalidArgumentError(f"need 1 <= s <= m, got s={s}, m={m}")
    gen = rng.stream(seed)
    support = np.sort(gen.choice(m, size=s, replace=False))
    values = _nonzero_normal(gen, s)
    return SparseSignal(m, support, values)


def gen_kron(k: int, l: int, r: int, t: int, seed: int) -> KroneckerSignal:
    """Random rank-one Kronecker signal; scale absorbed into b so that the
    first nonzero entry of a equals exactly 1."""
    if r < 1 or r > k:
        raise InvalidArgumentError(f"need 1 <= r <= k, got r={r}, k={k}")
    if t < 1 or t > l:
        raise InvalidArgumentError(f"need 1 <= t <= l, got t={t}, l={l}")
    gen = rng.stream(seed)
    a_support = np.sort(gen.choice(k, size=r, replace=False))
    a_values = _nonzero_normal(gen, r)
    b_support = np.sort(gen.choice(l, size=t, replace=False))
    b_values = _nonzero_normal(gen, t)
    scale = a_values[0]
    a_values = a_values / scale
    a_values[0] = 1.0
    b_values = b_values * scale
    return KroneckerSignal(k, l, a_support, a_values, b_support, b_values)


def embed(sig: StructuredSignal) -> np.ndarray:
    """Dense embedding: length m for sparse, length k*l (row-major a_i*b_j)
    for Kronecker signals."""
    if isinstance(sig, SparseSignal):
        x = np.zeros(sig.m)
        x[sig.support] = sig.values
        return x
    if isinstance(sig, KroneckerSignal):
        x = np.zeros(sig.k * sig.l)
        for i, av in zip(sig.a_support, sig.a_values):
            x[i * sig.l + sig.b_support] = av * sig.b_values
        return x
    raise InvalidArgumentError(f"not a structured signal: {type(sig)!r}")


def gen_set_f(count: int) -> PointCloud:
    """The cloud {0} U {1/i : i = 2..count+1} in R^1."""
    if count < 1:
        raise InvalidArgumentError("count must be >= 1")
    pts = np.concatenate(([0.0], 1.0 / np.arange(2, count + 2)))
    return PointCloud(1, pts[:, None], label="set_f")


def gen_cantor(depth: int) -> PointCloud:
    """Left endpoints of the depth-level middle-thirds construction."""
    if depth < 1:
        raise InvalidArgumentError("depth must be >= 1")
    if depth > 26:
        raise ResourceLimitError("cantor depth capped at 26")
    # integer numerators k with base-3 digits in {0, 2}, scaled by 3^-depth
    nums = np.array([0], dtype=np.int64)
    for level in range(depth):
        step = 2 * 3 ** (depth - 1 - level)
        nums = np.concatenate([nums, nums + step])
    nums.sort()
    pts = nums.astype(np.float64) * (3.0 ** -depth)
    return PointCloud(1, pts[:, None], label=f"cantor_{depth}")


def diam(cloud) -> float:
    """Supremum of pairwise Euclidean distances; 0 for empty or singleton."""
    if isinstance(cloud, PointCloud):
        pts = cloud.points
    else:
        pts = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    return _diam_points(pts)


def _diam_points(pts: np.ndarray) -> float:
    n = pts.shape[0]
    if n < 2:
        return 0.0
    if n <= _BRUTE_FORCE_DIAM_LIMIT:
        return max_pairwise_dist(pts)
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    # diameter is attained on the convex hull; fall back to an affine-rank
    # reduction when the cloud is degenerate (collinear / coplanar)
    try:
        from scipy.spatial import ConvexHull, QhullError

        hull = ConvexHull(pts)
        return max_pairwise_dist(pts[hull.vertices])
    except QhullError:
        center = pts.mean(axis=0)
        centered = pts - center
        _, sv, vt = np.linalg.svd(centered, full_matrices=False)
        rank = int(np.sum(sv > sv[0] * 1e-12)) if sv.size and sv[0] > 0 else 0
        if rank == 0:
            return 0.0
        return _diam_points(centered @ vt[:rank].T)


def ball_volume(k: float, rho: float) -> float:
    """Volume of the radius-rho Euclidean ball in (possibly fractional)
    dimension k: pi^{k/2} rho^k / Gamma(k/2 + 1)."""
    if k < 0:
        raise InvalidArgumentError("dimension k must be >= 0")
    if rho <= 0:
        raise InvalidArgumentError("radius must be positive")
    return math.pi ** (k / 2.0) * rho**k / math.gamma(k / 2.0 + 1.0)


def save_pointcloud(cloud: PointCloud, path) -> None:
    """CSV with header x0..x{m-1}; floats written in shortest round-trip
    form so that load is coordinate-exact."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(cloud.ambient_dim)])
        for row in cloud.points:
            writer.writerow([repr(float(v)) for v in row])


def load_pointcloud(path, label: str = "") -> PointCloud:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    return PointCloud(len(header), np.array(rows), label=label)
