"""Shared machinery for subset-scoring selection methods.

Both selection methods score a candidate subset the same way: assemble
training snapshots for the subset, fit the discrete model, roll it out over
the training realizations from their true initial states, and evaluate the
normalized MSE cost. ``SubsetEvaluator`` wraps that pipeline with a memo cache
keyed by the subset, so repeated queries cost a single fit.

Evaluations are pure functions of (training data, subset, configuration), so
distributing them over a worker pool and reducing with a total order gives
results independent of the worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .cost import ChannelScales, CostBreakdown, pooled_std, rollout_cost
from .datamodel import TimeSeriesDataset
from .dmdc import StateSpaceModel, TruncationPolicy, fit_model
from .errors import DegenerateSnapshots

INFEASIBLE = float("inf")


@dataclass
class SelectionResult:
    """Chosen candidate indices with cost breakdowns and method provenance.

    ``indices`` are manifest indices of kept candidate channels, sorted
    ascending. ``diagnostics`` carries per-stage artifacts (elimination order,
    shortlists, imports, search trace) and is JSON-serializable.
    """

    indices: tuple[int, ...]
    names: tuple[str, ...]
    method: str
    j_train: CostBreakdown
    j_test: CostBreakdown
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def breakdown(b: CostBreakdown) -> dict:
            return {
                "J": b.J,
                "J_state": b.J_state,
                "J_output": b.J_output,
                "n": b.n,
                "p": b.p,
                "L": b.L,
            }

        return {
            "indices": list(self.indices),
            "names": list(self.names),
            "method": self.method,
            "j_train": breakdown(self.j_train),
            "j_test": breakdown(self.j_test),
            "diagnostics": self.diagnostics,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


class SubsetEvaluator:
    """Fit-and-score pipeline for candidate subsets on a fixed training set."""

    def __init__(
        self,
        train: TimeSeriesDataset,
        policy: TruncationPolicy | None = None,
        scale_floor: float = 1e-9,
    ):
        self.train = train
        self.policy = policy or TruncationPolicy()
        self.scale_floor = scale_floor
        self._std = pooled_std(train)
        self._sigma_y = np.maximum(self._std[list(train.output_indices)], scale_floor)
        self._cache: dict[tuple[int, ...], CostBreakdown | None] = {}
        self.fit_count = 0

    def scales_for(self, subset: Sequence[int]) -> ChannelScales:
        sigma_x = np.maximum(self._std[list(subset)], self.scale_floor)
        return ChannelScales(sigma_x=sigma_x, sigma_y=self._sigma_y, floor=self.scale_floor)

    def fit(self, subset: Sequence[int]) -> StateSpaceModel:
        return fit_model(self.train, list(subset), self.policy)

    def breakdown(self, subset: Sequence[int]) -> CostBreakdown | None:
        """Training cost of a subset, or None if the fit is degenerate. Memoized."""
        key = tuple(sorted(subset))
        if key in self._cache:
            return self._cache[key]
        try:
            model = self.fit(key)
            self.fit_count += 1
            result = rollout_cost(model, self.train, key, self.scales_for(key))
            if not math.isfinite(result.J):
                result = None
        except DegenerateSnapshots:
            self.fit_count += 1
            result = None
        self._cache[key] = result
        return result

    def evaluate(self, subset: Sequence[int]) -> float:
        """Training cost as a scalar; degenerate or diverging fits score +inf."""
        b = self.breakdown(subset)
        return INFEASIBLE if b is None else b.J


def subset_key(j: float, subset: Sequence[int]) -> tuple[float, int, tuple[int, ...]]:
    """Total order used everywhere a best subset is reduced: cost, then size,
    then lexicographic indices. Makes reductions associative and tie-breaks
    deterministic."""
    t = tuple(subset)
    return (j, len(t), t)


# --- deterministic parallel evaluation -------------------------------------

_WORKER_EVAL: SubsetEvaluator | None = None


def _init_worker(train: TimeSeriesDataset, policy: TruncationPolicy, scale_floor: float) -> None:
    global _WORKER_EVAL
    _WORKER_EVAL = SubsetEvaluator(train, policy, scale_floor)


def _eval_chunk(chunk: list[tuple[int, ...]]) -> list[float]:
    assert _WORKER_EVAL is not None
    return [_WORKER_EVAL.evaluate(s) for s in chunk]


def evaluate_subsets(
    subsets: list[tuple[int, ...]],
    evaluator: SubsetEvaluator,
    workers: int = 1,
) -> list[float]:
    """Score many subsets, optionally across processes.

    The returned list is aligned with ``subsets`` regardless of scheduling, so
    any reduction over it is worker-count independent.
    """
    if workers <= 1 or len(subsets) < 4:
        return [evaluator.evaluate(s) for s in subsets]
    n_chunks = workers * 4
    size = max(1, math.ceil(len(subsets) / n_chunks))
    chunks = [subsets[i : i + size] for i in range(0, len(subsets), size)]
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_init_worker,
        initargs=(evaluator.train, evaluator.policy, evaluator.scale_floor),
    ) as pool:
        results = list(pool.map(_eval_chunk, chunks))
    flat: list[float] = []
    for part in results:
        flat.extend(part)
    return flat


def run_restarts(
    fn: Callable[[int], Any],
    n_restarts: int,
    workers: int = 1,
) -> list[Any]:
    """Run independent restart computations, preserving restart order."""
    if workers <= 1 or n_restarts <= 1:
        return [fn(r) for r in range(n_restarts)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_restarts)))
