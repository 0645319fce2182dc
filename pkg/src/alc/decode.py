"""Concrete zero-error decoders and converse probes.

The decoders here are committed realizations of maps whose existence is
what the theory guarantees: exhaustive-support least squares for sparse
signals, multi-start damped Gauss-Newton for rank-one Kronecker signals,
a collision search for the under-measured regime, and an exactly
invertible digit-interleaving compressor for the two-parameters-into-one
-coordinate phenomenon. Decoder failures (ambiguity, local minima) are
reported as outcomes, never hidden.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from alc import rng
from alc._kernels import lm_bilinear, lm_bilinear_multi
from alc.errors import InvalidArgumentError, ResourceLimitError
from alc.measureop import MeasurementMatrix
from alc.setgen import KroneckerSignal, SparseSignal, embed

DEFAULT_TOL = 1e-9
ENTRY_FLOOR = 1e-8  # recovered entries below this disqualify the support
DISTINCT_TOL = 1e-6  # embeddings closer than this count as one candidate
CANDIDATE_CAP = 32
SUPPORT_BUDGET_L0 = 10**7
SUPPORT_BUDGET_KRON = 10**6


@dataclass
class DecodeOutcome:
    status: str  # unique | ambiguous | no_solution
    estimate: Optional[np.ndarray]
    residual: float
    candidates: List[Tuple[tuple, np.ndarray]] = field(default_factory=list)
    candidate_count: int = 0

    def to_dict(self):
        rec = {"status": self.status, "residual": self.residual,
               "support": None, "values": None}
        if self.status == "unique":
            nz = np.flatnonzero(self.estimate)
            rec["support"] = [int(i) for i in nz]
            rec["values"] = [float(v) for v in self.estimate[nz]]
        return rec


@dataclass
class CollisionReport:
    x1: KroneckerSignal
    x2: KroneckerSignal
    objective: float  # ||A (embed(x1) - embed(x2))||_2
    separation: float  # ||embed(x1) - embed(x2)||_2

    def to_dict(self):
        def sig(s):
            return {
                "k": s.k, "l": s.l,
                "a_support": s.a_support.tolist(),
                "a_values": s.a_values.tolist(),
                "b_support": s.b_support.tolist(),
                "b_values": s.b_values.tolist(),
            }

        return {"objective": self.objective, "separation": self.separation,
                "x1": sig(self.x1), "x2": sig(self.x2)}


def _resolve(candidates, best_residual):
    """Turn (support, embedding, residual) triples into a DecodeOutcome.

    Candidates are expected in deterministic (support-lexicographic) order;
    embeddings within DISTINCT_TOL of an earlier one collapse together.
    """
    distinct = []
    for sup, x, res in candidates:
        if all(np.linalg.norm(x - d[1]) > DISTINCT_TOL for d in distinct):
            distinct.append((sup, x, res))
    if not distinct:
        return DecodeOutcome("no_solution", None, best_residual)
    if len(distinct) == 1:
        sup, x, res = distinct[0]
        return DecodeOutcome("unique", x, res,
                             candidates=[(sup, x)], candidate_count=1)
    return DecodeOutcome(
        "ambiguous", None, min(res for _, _, res in distinct),
        candidates=[(sup, x) for sup, x, _ in distinct[:CANDIDATE_CAP]],
        candidate_count=len(distinct),
    )


def l0_decode(A: MeasurementMatrix, y, s: int, tol: float = DEFAULT_TOL) -> DecodeOutcome:
    """Exhaustive-support decoder: try every support of size 0..s, keep
    exact least-squares fits whose recovered entries are all nonzero at
    the support's size, and resolve uniqueness across distinct embeddings."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (A.n,):
        raise InvalidArgumentError(f"expected y of length {A.n}")
    if s < 0 or s > A.m:
        raise InvalidArgumentError("need 0 <= s <= m")
    if s > A.n:
        raise InvalidArgumentError("need s <= n for square-or-overdetermined solves")
    if math.comb(A.m, s) > SUPPORT_BUDGET_L0:
        raise ResourceLimitError(
            f"C({A.m},{s}) = {math.comb(A.m, s)} exceeds the support budget")

    tol_abs = tol * max(1.0, float(np.linalg.norm(y)))
    candidates = []
    best_residual = float(np.linalg.norm(y))

    if best_residual <= tol_abs:
        # every full-column-rank support yields the zero solution here
        return DecodeOutcome("unique", np.zeros(A.m), best_residual,
                             candidates=[((), np.zeros(A.m))], candidate_count=1)

    for size in range(1, s + 1):
        supports = np.array(list(combinations(range(A.m), size)), dtype=np.int64)
        subs = A.entries[:, supports]  # (n, C, size)
        subs = np.moveaxis(subs, 1, 0)  # (C, n, size)
        gram = np.einsum("cni,cnj->cij", subs, subs)
        rhs = np.einsum("cni,n->ci", subs, y)
        try:
            coefs = np.linalg.solve(gram, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            coefs = np.stack([
                np.linalg.lstsq(subs[c], y, rcond=None)[0]
                for c in range(supports.shape[0])
            ])
        fits = np.einsum("cni,ci->cn", subs, coefs)
        residuals = np.linalg.norm(fits - y, axis=1)
        best_residual = min(best_residual, float(residuals.min()))
        ok = (residuals <= tol_abs) & (np.abs(coefs).min(axis=1) > ENTRY_FLOOR)
        for c in np.flatnonzero(ok):
            x = np.zeros(A.m)
            x[supports[c]] = coefs[c]
            candidates.append((tuple(supports[c]), x, float(residuals[c])))

    return _resolve(candidates, best_residual)


def _kron_tensor(A: MeasurementMatrix, sa, sb, l: int) -> np.ndarray:
    """Columns of A arranged as T[q, i, j] = A[q, sa[i]*l + sb[j]]."""
    cols = (np.asarray(sa)[:, None] * l + np.asarray(sb)[None, :]).ravel()
    return np.ascontiguousarray(
        A.entries[:, cols].reshape(A.n, len(sa), len(sb)))


def _kron_embed(k, l, sa, a_vals, sb, b_vals):
    x = np.zeros(k * l)
    for i, av in zip(sa, a_vals):
        x[i * l + np.asarray(sb)] = av * np.asarray(b_vals)
    return x


def _theta_to_signal(k, l, sa, sb, theta, r, t):
    a_vals = np.concatenate(([1.0], theta[: r - 1]))
    b_vals = theta[r - 1 :]
    return a_vals, b_vals


def kron_decode(A: MeasurementMatrix, y, k: int, l: int, r: int, t: int,
                starts: int = 20, tol: float = DEFAULT_TOL,
                seed: int = 0) -> DecodeOutcome:
    """Bilinear decoder: for every (a-support, b-support) pair, fit the
    r+t-1 free variables (first entry of a pinned to 1) by multi-start
    damped Gauss-Newton and keep exact fits with fully nonzero entries."""
    y = np.asarray(y, dtype=np.float64)
    if k * l != A.m or y.shape != (A.n,):
        raise InvalidArgumentError("dimensions do not match the matrix")
    if r < 1 or r > k or t < 1 or t > l:
        raise InvalidArgumentError("need 1 <= r <= k and 1 <= t <= l")
    if A.n < r + t:
        raise InvalidArgumentError("need n >= r + t")
    budget = math.comb(k, r) * math.comb(l, t)
    if budget > SUPPORT_BUDGET_KRON:
        raise ResourceLimitError(f"{budget} support pairs exceed the budget")

    norm_y = float(np.linalg.norm(y))
    tol_abs = tol * max(1.0, norm_y)
    if norm_y <= tol_abs:
        return DecodeOutcome("unique", np.zeros(A.m), norm_y,
                             candidates=[((), np.zeros(A.m))], candidate_count=1)

    candidates = []
    best_residual = norm_y
    pair_index = 0
    for sa in combinations(range(k), r):
        for sb in combinations(range(l), t):
            T = _kron_tensor(A, sa, sb, l)
            gen = rng.stream(seed, pair_index)
            theta0s = gen.standard_normal((starts, r + t - 1))
            # first converged start wins: the exact-fit set per support
            # pair is generically a single point
            theta, resid, converged, _, pair_best = lm_bilinear_multi(
                T, y, theta0s, tol_abs)
            best_residual = min(best_residual, pair_best)
            pair_index += 1
            if not converged:
                continue
            a_vals, b_vals = _theta_to_signal(k, l, sa, sb, theta, r, t)
            if np.abs(a_vals).min() <= ENTRY_FLOOR or \
                    np.abs(b_vals).min() <= ENTRY_FLOOR:
                continue
            x = _kron_embed(k, l, sa, a_vals, sb, b_vals)
            candidates.append(((sa, sb), x, float(resid)))

    return _resolve(candidates, best_residual)


def collision_search(A: MeasurementMatrix, k: int, l: int, r: int, t: int,
                     starts: int = 100, seed: int = 0,
                     objective_tol: float = 1e-10,
                     separation_min: float = 1e-3) -> Optional[CollisionReport]:
    """Search for two separated rank-one Kronecker signals that A cannot
    distinguish. Each start fixes two distinct support pairs, draws the
    second signal at random, and fits the first to match its measurement.
    A `None` return means no collision was found, not a proof of
    injectivity."""
    if starts < 1:
        raise InvalidArgumentError("starts must be >= 1")
    if k * l != A.m:
        raise InvalidArgumentError("k*l must equal the matrix width")

    a_supports = list(combinations(range(k), r))
    b_supports = list(combinations(range(l), t))
    n_pairs = len(a_supports) * len(b_supports)
    if n_pairs < 2:
        return None

    for start in range(starts):
        gen = rng.stream(seed, start)
        i1, i2 = gen.choice(n_pairs, size=2, replace=False)
        sa1, sb1 = a_supports[i1 // len(b_supports)], b_supports[i1 % len(b_supports)]
        sa2, sb2 = a_supports[i2 // len(b_supports)], b_supports[i2 % len(b_supports)]

        theta2 = gen.standard_normal(r + t - 1)
        a2, b2 = _theta_to_signal(k, l, sa2, sb2, theta2, r, t)
        if np.abs(a2).min() <= ENTRY_FLOOR or np.abs(b2).min() <= ENTRY_FLOOR:
            continue
        x2 = _kron_embed(k, l, sa2, a2, sb2, b2)
        y2 = A.entries @ x2

        T1 = _kron_tensor(A, sa1, sb1, l)
        theta0 = gen.standard_normal(r + t - 1)
        theta1, resid, converged, _ = lm_bilinear(T1, y2, theta0, objective_tol)
        if not converged:
            continue
        a1, b1 = _theta_to_signal(k, l, sa1, sb1, theta1, r, t)
        if np.abs(a1).min() <= ENTRY_FLOOR or np.abs(b1).min() <= ENTRY_FLOOR:
            continue
        x1 = _kron_embed(k, l, sa1, a1, sb1, b1)
        separation = float(np.linalg.norm(x1 - x2))
        objective = float(np.linalg.norm(A.entries @ (x1 - x2)))
        if separation < separation_min or objective >= objective_tol:
            continue
        return CollisionReport(
            x1=KroneckerSignal(k, l, np.array(sa1), a1, np.array(sb1), b1),
            x2=KroneckerSignal(k, l, np.array(sa2), a2, np.array(sb2), b2),
            objective=objective,
            separation=separation,
        )
    return None


MAX_PRECISION = 26  # 2p base-2 digits must fit a double exactly


def _check_unit_interval(v, name):
    if not (0.0 <= v < 1.0):
        raise InvalidArgumentError(f"{name} must lie in [0, 1)")


def interleave_compress(x: float, y: float, p: int) -> float:
    """Interleave the first p binary digits of x and y into one real:
    z = sum_i x_i 2^-(2i-1) + y_i 2^-2i. One-to-one on the p-digit grid."""
    if p < 1 or p > MAX_PRECISION:
        raise InvalidArgumentError(f"precision must be in 1..{MAX_PRECISION}")
    _check_unit_interval(x, "x")
    _check_unit_interval(y, "y")
    xi = int(x * (1 << p))  # truncation to p digits
    yi = int(y * (1 << p))
    z = 0
    for i in range(p):
        z |= ((xi >> i) & 1) << (2 * i + 1)
        z |= ((yi >> i) & 1) << (2 * i)
    return z / float(1 << (2 * p))


def deinterleave(z: float, p: int) -> Tuple[float, float]:
    """Exact inverse of interleave_compress on the p-digit grid."""
    if p < 1 or p > MAX_PRECISION:
        raise InvalidArgumentError(f"precision must be in 1..{MAX_PRECISION}")
    _check_unit_interval(z, "z")
    zi = int(z * (1 << (2 * p)))
    xi = yi = 0
    for i in range(p):
        xi |= ((zi >> (2 * i + 1)) & 1) << i
        yi |= ((zi >> (2 * i)) & 1) << i
    return xi / float(1 << p), yi / float(1 << p)
