"""Seeded trial orchestration, summary statistics, and CSV result tables."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, default_rng


def trial_rng(seed: int, index: int) -> Generator:
    """Independent stream for one trial, split off the (seed, index) pair.

    Streams are stable under any execution order, which is what makes the
    worker count invisible in the output.
    """
    return default_rng(np.random.SeedSequence([int(seed), int(index)]))


@dataclass(frozen=True)
class TrialFailure:
    index: int
    error: str


def _run_one(trial_fn, seed, index):
    try:
        return index, trial_fn(index, trial_rng(seed, index)), None
    except Exception as exc:  # noqa: BLE001 - failed trials are excluded, not fatal
        return index, None, f"{type(exc).__name__}: {exc}"


def run_trials(n_trials: int, trial_fn, seed: int, workers: int = 1):
    """Run ``trial_fn(index, rng)`` for every index with per-trial RNG streams.

    Returns (results, failures) where ``results[i]`` is the trial payload or
    None for a failed trial.  Failures are collected, never raised; the
    ordering of ``results`` is by trial index regardless of worker count.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    results: list = [None] * n_trials
    failures: list[TrialFailure] = []
    if workers <= 1:
        for i in range(n_trials):
            _, payload, err = _run_one(trial_fn, seed, i)
            if err is None:
                results[i] = payload
            else:
                failures.append(TrialFailure(i, err))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, payload, err in pool.map(
                _run_one,
                [trial_fn] * n_trials,
                [seed] * n_trials,
                range(n_trials),
                chunksize=max(1, n_trials // (workers * 8)),
            ):
                if err is None:
                    results[i] = payload
                else:
                    failures.append(TrialFailure(i, err))
    failures.sort(key=lambda f: f.index)
    return results, failures


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

class EmpiricalCdf:
    """Right-continuous empirical distribution function of a finite sample."""

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("empirical_cdf needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("empirical_cdf samples must be finite")
        self._sorted = np.sort(arr)

    @property
    def support(self) -> np.ndarray:
        return self._sorted

    @property
    def n(self) -> int:
        return self._sorted.size

    def __call__(self, x):
        idx = np.searchsorted(self._sorted, np.asarray(x, dtype=float), side="right")
        out = idx / self.n
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, q: float) -> float:
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile must be in [0, 1], got {q}")
        return float(np.quantile(self._sorted, q))

    def mean(self) -> float:
        return float(np.mean(self._sorted))


def empirical_cdf(samples) -> EmpiricalCdf:
    return EmpiricalCdf(samples)


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError(f"n must be > 0, got {n}")
    if not 0 <= successes <= n:
        raise ValueError("successes must be in [0, n]")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# result tables
# ---------------------------------------------------------------------------

def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        # repr gives the shortest round-trip form, stable across runs
        return repr(v)
    return str(value)


@dataclass
class ResultTable:
    """Tidy rows plus comment-style metadata, ready for CSV emission.

    Metadata is limited to stable facts (config echo, seed, version) so two
    runs of the same configuration produce byte-identical files.
    """

    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, object] = field(default_factory=dict)

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(
                f"row has {len(values)} cells, table has {len(self.columns)} columns"
            )
        self.rows.append(tuple(values))

    def to_csv_text(self) -> str:
        lines = [f"# {key} = {_format_cell(val)}" for key, val in self.metadata.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_text())
