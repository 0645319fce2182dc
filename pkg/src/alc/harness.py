"""Experiment configuration, seeded trial execution, and CSV emission.

A config is a flat ``key = value`` text file. Each experiment derives all
its randomness from a master seed: trial i uses the stream seed
``mix(master_seed, i + 1)`` and the (default single) measurement matrix
uses ``mix(master_seed, 0)``, so a config fully determines every output
byte regardless of thread count.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from alc import decode, fracdim, measureop, rng, setgen
from alc.errors import ConfigError

KINDS = ("dim", "nsp", "recover", "kron", "collide", "interleave")

_INT_KEYS = {"m", "n", "s", "k", "l", "r", "t", "trials", "starts", "p",
             "count", "depth", "j_min", "j_max", "seed", "threads"}
_FLOAT_KEYS = {"tol", "base", "expect_error", "expect_min_gain",
               "expect_success_rate"}
_STR_KEYS = {"kind", "set", "output"}
_BOOL_KEYS = {"expect_collision", "fresh_matrix"}

_ALLOWED = {
    "dim": {"kind", "set", "count", "depth", "j_min", "j_max", "base",
            "seed", "output"},
    "nsp": {"kind", "m", "n", "s", "trials", "seed", "output",
            "expect_min_gain"},
    "recover": {"kind", "m", "n", "s", "trials", "tol", "seed", "output",
                "expect_error"},
    "kron": {"kind", "k", "l", "r", "t", "n", "trials", "starts", "tol",
             "seed", "output", "expect_success_rate"},
    "collide": {"kind", "k", "l", "r", "t", "n", "starts", "seed", "output",
                "expect_collision"},
    "interleave": {"kind", "p", "trials", "seed", "output"},
}

_REQUIRED = {
    "dim": {"set"},
    "nsp": {"m", "n", "s", "trials"},
    "recover": {"m", "n", "s", "trials"},
    "kron": {"k", "l", "r", "t", "n", "trials"},
    "collide": {"k", "l", "r", "t", "n"},
    "interleave": {"p", "trials"},
}

_DEFAULTS = {"tol": 1e-9, "starts": 20, "seed": 0, "base": 2.0,
             "count": 100000, "depth": 14, "j_min": 3, "j_max": 10,
             "trials": 1}


@dataclass
class ExperimentConfig:
    kind: str
    parameters: Dict
    master_seed: int
    output_path: Optional[str] = None


@dataclass
class TrialStats:
    trials: int
    unique_correct: int
    unique_wrong: int
    ambiguous: int
    no_solution: int
    empirical_error: float
    min_margin: float

    def to_row(self):
        return [self.trials, self.unique_correct, self.unique_wrong,
                self.ambiguous, self.no_solution, self.empirical_error,
                self.min_margin]


def _coerce(key: str, raw: str):
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key `{key}` expects an integer, got {raw!r}")
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key `{key}` expects a number, got {raw!r}")
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key `{key}` expects true/false, got {raw!r}")
    return raw


def parse_config(text: str, kind: Optional[str] = None) -> ExperimentConfig:
    """Parse flat `key = value` text (# comments) into a validated config."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in raw:
            raise ConfigError(f"duplicate key `{key}`")
        raw[key] = _coerce(key, value)

    file_kind = raw.pop("kind", None)
    if kind is None:
        kind = file_kind
    elif file_kind is not None and file_kind != kind:
        raise ConfigError(f"config kind `{file_kind}` does not match `{kind}`")
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {KINDS}")

    unknown = sorted(set(raw) - _ALLOWED[kind])
    if unknown:
        raise ConfigError(f"unknown keys for kind `{kind}`: {', '.join(unknown)}")
    missing = sorted(_REQUIRED[kind] - set(raw))
    if missing:
        raise ConfigError(f"missing keys for kind `{kind}`: {', '.join(missing)}")

    params = {k: _DEFAULTS[k] for k in _ALLOWED[kind]
              if k in _DEFAULTS and k not in ("seed",)}
    params.update({k: v for k, v in raw.items() if k not in ("seed", "output")})
    _validate(kind, params)
    return ExperimentConfig(
        kind=kind,
        parameters=params,
        master_seed=int(raw.get("seed", _DEFAULTS["seed"])),
        output_path=raw.get("output"),
    )


def _require_range(params, key, lo, hi=None):
    v = params.get(key)
    if v is None:
        return
    if v < lo or (hi is not None and v > hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise ConfigError(f"key `{key}` must be {bound}, got {v}")


def _validate(kind, params):
    _require_range(params, "trials", 1)
    _require_range(params, "starts", 1)
    _require_range(params, "tol", 0.0)
    for key in ("m", "n", "s", "k", "l", "r", "t", "count", "depth", "p"):
        _require_range(params, key, 1)
    if kind == "dim" and params["set"] not in ("f", "cantor", "segment", "square3"):
        raise ConfigError(f"key `set` must be one of f|cantor|segment|square3, "
                          f"got {params['set']!r}")
    if kind in ("recover", "nsp") and params["s"] > params["m"]:
        raise ConfigError("key `s` must not exceed `m`")
    if kind == "interleave":
        _require_range(params, "p", 1, decode.MAX_PRECISION)


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"kind = {cfg.kind}"]
    for key in sorted(cfg.parameters):
        lines.append(f"{key} = {cfg.parameters[key]}")
    lines.append(f"seed = {cfg.master_seed}")
    if cfg.output_path:
        lines.append(f"output = {cfg.output_path}")
    return "\n".join(lines) + "\n"


def _trial_margin(outcome: decode.DecodeOutcome) -> float:
    """Smallest distance between distinct candidate embeddings; inf when
    there is at most one."""
    embeds = [x for _, x in outcome.candidates]
    if len(embeds) < 2:
        return float("inf")
    return min(
        float(np.linalg.norm(embeds[i] - embeds[j]))
        for i in range(len(embeds)) for j in range(i + 1, len(embeds))
    )


def _classify(outcome, truth, correct_tol):
    if outcome.status == "unique":
        err = float(np.linalg.norm(outcome.estimate - truth))
        if err <= correct_tol * max(1.0, float(np.linalg.norm(truth))):
            return "unique_correct"
        return "unique_wrong"
    return outcome.status


def run_trials(cfg: ExperimentConfig, threads: int = 1,
               fresh_matrix: bool = False) -> Tuple[TrialStats, List]:
    """Execute a recover/kron experiment; returns stats plus per-trial
    (trial, status, residual) rows. Zero-error scoring: any non-recovery
    (wrong, ambiguous, or failed) counts against the empirical error."""
    if cfg.kind not in ("recover", "kron"):
        raise ConfigError(f"run_trials does not handle kind `{cfg.kind}`")
    p = cfg.parameters
    trials = p["trials"]
    if cfg.kind == "recover":
        m, correct_tol = p["m"], 1e-9
    else:
        m, correct_tol = p["k"] * p["l"], 1e-6
    matrix_seed = rng.mix(cfg.master_seed, 0)
    shared_A = None if fresh_matrix else measureop.sample_matrix(p["n"], m, matrix_seed)

    def one_trial(i):
        trial_seed = rng.mix(cfg.master_seed, i + 1)
        A = shared_A if shared_A is not None else \
            measureop.sample_matrix(p["n"], m, rng.mix(trial_seed, 0))
        if cfg.kind == "recover":
            sig = setgen.gen_sparse(p["m"], p["s"], trial_seed)
            truth = setgen.embed(sig)
            outcome = decode.l0_decode(A, A.entries @ truth, p["s"], p["tol"])
        else:
            sig = setgen.gen_kron(p["k"], p["l"], p["r"], p["t"], trial_seed)
            truth = setgen.embed(sig)
            outcome = decode.kron_decode(
                A, A.entries @ truth, p["k"], p["l"], p["r"], p["t"],
                starts=p["starts"], tol=p["tol"], seed=trial_seed)
        return _classify(outcome, truth, correct_tol), outcome.residual, \
            _trial_margin(outcome)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_trial, range(trials)))
    else:
        results = [one_trial(i) for i in range(trials)]

    counts = {"unique_correct": 0, "unique_wrong": 0, "ambiguous": 0,
              "no_solution": 0}
    rows = []
    min_margin = float("inf")
    for i, (status, residual, margin) in enumerate(results):
        counts[status] += 1
        min_margin = min(min_margin, margin)
        rows.append((i, status, residual))
    failures = trials - counts["unique_correct"]
    stats = TrialStats(
        trials=trials,
        empirical_error=failures / trials,
        min_margin=min_margin,
        **counts,
    )
    return stats, rows


def run_dim(cfg: ExperimentConfig) -> fracdim.DimensionEstimate:
    p = cfg.parameters
    sched = fracdim.ScaleSchedule.geometric(p["base"], p["j_min"], p["j_max"])
    name = p["set"]
    if name == "f":
        cloud = setgen.gen_set_f(p["count"])
    elif name == "cantor":
        cloud = setgen.gen_cantor(p["depth"])
    elif name == "segment":
        gen = rng.stream(cfg.master_seed)
        pts = np.column_stack([gen.random(p["count"]), np.zeros(p["count"])])
        cloud = setgen.PointCloud(2, pts, label="segment", seed=cfg.master_seed)
    else:  # square3: filled unit square embedded in R^3
        gen = rng.stream(cfg.master_seed)
        pts = np.column_stack([gen.random((p["count"], 2)), np.zeros(p["count"])])
        cloud = setgen.PointCloud(3, pts, label="square3", seed=cfg.master_seed)
    return fracdim.minkowski_dim(cloud, sched)


def run_nsp(cfg: ExperimentConfig) -> measureop.NspReport:
    p = cfg.parameters
    A = measureop.sample_matrix(p["n"], p["m"], rng.mix(cfg.master_seed, 0))
    family = measureop.SparseFamily(p["m"], p["s"])
    return measureop.nsp_min_gain(A, family, p["trials"], cfg.master_seed)


def run_collide(cfg: ExperimentConfig):
    p = cfg.parameters
    A = measureop.sample_matrix(p["n"], p["k"] * p["l"], rng.mix(cfg.master_seed, 0))
    return decode.collision_search(A, p["k"], p["l"], p["r"], p["t"],
                                   starts=p["starts"], seed=cfg.master_seed)


def run_interleave(cfg: ExperimentConfig) -> dict:
    """Round-trip the interleaving map on `trials` random p-digit grid points."""
    p = cfg.parameters
    gen = rng.stream(cfg.master_seed)
    scale = 1 << p["p"]
    failures = 0
    for _ in range(p["trials"]):
        x = int(gen.random() * scale) / scale
        y = int(gen.random() * scale) / scale
        if decode.deinterleave(decode.interleave_compress(x, y, p["p"]), p["p"]) != (x, y):
            failures += 1
    return {"trials": p["trials"], "failures": failures}


def emit_trial_rows(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("trial,status,residual\n")
        for trial, status, residual in rows:
            fh.write(f"{trial},{status},{residual!r}\n")


_STATS_COLUMNS = ["trials", "unique_correct", "unique_wrong", "ambiguous",
                  "no_solution", "empirical_error", "min_margin"]


def emit_stats(stats: TrialStats, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(_STATS_COLUMNS) + "\n")
        fh.write(",".join(repr(v) for v in stats.to_row()) + "\n")


def load_stats(path) -> TrialStats:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != _STATS_COLUMNS:
            raise ConfigError(f"unexpected stats columns: {header}")
        vals = fh.readline().strip().split(",")
    ints = [int(v) for v in vals[:5]]
    return TrialStats(*ints, empirical_error=float(vals[5]),
                      min_margin=float(vals[6]))


def check_expectations(cfg: ExperimentConfig, result) -> List[str]:
    """Evaluate any expect_* keys against the result; returns failure
    messages (empty list means all expectations hold)."""
    p = cfg.parameters
    failures = []
    if "expect_error" in p and isinstance(result, TrialStats):
        if result.empirical_error != p["expect_error"]:
            failures.append(
                f"empirical_error {result.empirical_error} != {p['expect_error']}")
    if "expect_success_rate" in p and isinstance(result, TrialStats):
        rate = result.unique_correct / result.trials
        if rate < p["expect_success_rate"]:
            failures.append(f"success rate {rate} < {p['expect_success_rate']}")
        if result.unique_wrong:
            failures.append(f"unique_wrong = {result.unique_wrong}")
    if "expect_min_gain" in p and isinstance(result, measureop.NspReport):
        if result.min_gain <= p["expect_min_gain"]:
            failures.append(f"min_gain {result.min_gain} <= {p['expect_min_gain']}")
    if "expect_collision" in p:
        found = result is not None
        if found != p["expect_collision"]:
            failures.append(f"collision found = {found}, "
                            f"expected {p['expect_collision']}")
    return failures
