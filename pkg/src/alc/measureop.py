"""Random measurement operators, kernel bases, and empirical null-space
property probes.

"Almost all matrices" is operationalized as a seeded Gaussian draw: any
Lebesgue-null exceptional set has probability zero under the ensemble,
so a fixed-seed draw is representative with probability one.
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from alc import rng, setgen
from alc.errors import InvalidArgumentError

DEFAULT_RANK_RTOL = 1e-10


@dataclass
class MeasurementMatrix:
    n: int
    m: int
    entries: np.ndarray
    seed: int

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.shape != (self.n, self.m):
            raise InvalidArgumentError("entries shape mismatch")
        if not np.all(np.isfinite(self.entries)):
            raise InvalidArgumentError("entries must be finite")


@dataclass
class KernelBasis:
    vectors: np.ndarray  # (count, m), orthonormal rows
    tol: float


@dataclass
class NspReport:
    trials: int
    min_gain: float
    argmin_u: np.ndarray

    def to_dict(self):
        return {
            "trials": self.trials,
            "min_gain": self.min_gain,
            "argmin_u": [float(v) for v in self.argmin_u],
        }


@dataclass(frozen=True)
class SparseFamily:
    """Sampler for exactly-s-sparse Gaussian signals in R^m."""

    m: int
    s: int

    @property
    def dim(self):
        return self.m

    def draw(self, seed):
        return setgen.gen_sparse(self.m, self.s, seed)


@dataclass(frozen=True)
class KronFamily:
    """Sampler for rank-one Kronecker signals in R^{k*l}."""

    k: int
    l: int
    r: int
    t: int

    @property
    def dim(self):
        return self.k * self.l

    def draw(self, seed):
        return setgen.gen_kron(self.k, self.l, self.r, self.t, seed)


def sample_matrix(n: int, m: int, seed: int) -> MeasurementMatrix:
    """n x m matrix with i.i.d. standard normal entries, deterministic in seed."""
    if n < 1 or m < 1:
        raise InvalidArgumentError("dimensions must be positive")
    if n > m:
        raise InvalidArgumentError(f"need n <= m, got n={n}, m={m}")
    entries = rng.stream(seed).standard_normal((n, m))
    return MeasurementMatrix(n, m, entries, seed)


def apply(A: MeasurementMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.m,):
        raise InvalidArgumentError(f"expected vector of length {A.m}, got {x.shape}")
    return A.entries @ x


def kernel_basis(A: MeasurementMatrix, tol: Optional[float] = None) -> KernelBasis:
    """Orthonormal basis of the numerical null space; size m - numerical rank.

    Rank counts singular values above tol (default 1e-10 * sigma_max);
    rank-deficient matrices simply yield a larger basis.
    """
    _, sv, vt = np.linalg.svd(A.entries)
    if tol is None:
        tol = DEFAULT_RANK_RTOL * (sv[0] if sv.size and sv[0] > 0 else 1.0)
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    rank = int(np.sum(sv > tol))
    return KernelBasis(vectors=vt[rank:].copy(), tol=float(tol))


_MAX_REDRAWS = 64


def nsp_min_gain(A: MeasurementMatrix, family, trials: int, seed: int) -> NspReport:
    """Sample `trials` unit-norm signals from `family` and record the
    minimum of ||A u||_2. A strictly positive minimum is the empirical
    signature of the kernel meeting the family's set only at zero."""
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    if family.dim != A.m:
        raise InvalidArgumentError("family dimension does not match matrix")
    min_gain = np.inf
    argmin_u = None
    for i in range(trials):
        u = None
        for retry in range(_MAX_REDRAWS):
            x = setgen.embed(family.draw(rng.mix(seed, i * _MAX_REDRAWS + retry)))
            norm = np.linalg.norm(x)
            if norm > 0:
                u = x / norm
                break
        if u is None:
            raise InvalidArgumentError("generator kept yielding the zero vector")
        gain = float(np.linalg.norm(A.entries @ u))
        if gain < min_gain:
            min_gain = gain
            argmin_u = u
    return NspReport(trials=trials, min_gain=min_gain, argmin_u=argmin_u)


def sparse_kernel_witness(A: MeasurementMatrix, s: int) -> Optional[np.ndarray]:
    """Unit-norm s-sparse kernel vector for the under-measured regime.

    Uses the fixed support {0..n}: the n x (n+1) submatrix always has a
    nontrivial null vector. Returns None when s <= n (no witness
    guaranteed there)."""
    if s <= A.n:
        return None
    width = A.n + 1
    sub = A.entries[:, :width]
    _, _, vt = np.linalg.svd(sub, full_matrices=True)
    v = vt[-1]
    u = np.zeros(A.m)
    u[:width] = v / np.linalg.norm(v)
    return u


def save_matrix(A: MeasurementMatrix, path) -> None:
    """Row-major CSV with a `# n m seed` header line."""
    with open(path, "w") as fh:
        fh.write(f"# {A.n} {A.m} {A.seed}\n")
        for row in A.entries:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_matrix(path) -> MeasurementMatrix:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise InvalidArgumentError("missing `# n m seed` header")
        n, m, seed = (int(tok) for tok in header[1:].split())
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return MeasurementMatrix(n, m, np.array(rows), seed)


def save_nsp_report(report: NspReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
