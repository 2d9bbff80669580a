"""Integrability test for e^{c ||phi||_4^4} on mass-bounded free fields."""

import logging
import math
import time
from concurrent.futures import Executor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from nlsgibbs.free_field import DEFAULT_CHUNK_SIZE, RngStream, sample_free_fields
from nlsgibbs.models import ExperimentReport, ModeSet, SweepKind
from nlsgibbs.spectral import l4_norms
from nlsgibbs.utils.stats import mean_estimate

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = (4, 8, 16)
STABILITY_TOLERANCE = 0.05
CHUNKS_PER_PIECE = 16


def mass_and_l4(
    mode_set: ModeSet,
    kappa: float,
    rng: RngStream,
    n_samples: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    executor: Optional[Executor] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Masses and L4 norms of free samples, drawn piecewise to bound memory."""
    piece = chunk_size * CHUNKS_PER_PIECE
    mass_parts = []
    l4_parts = []
    for start in range(0, n_samples, piece):
        count = min(piece, n_samples - start)
        block = sample_free_fields(
            mode_set,
            kappa,
            rng,
            count,
            chunk_size,
            executor,
            first_chunk=start // chunk_size,
        )
        mass_parts.append(np.sum(np.abs(block) ** 2, axis=1))
        l4_parts.append(l4_norms(block, mode_set.k_max))
    return np.concatenate(mass_parts), np.concatenate(l4_parts)


def exceedance_curve(
    l4: np.ndarray, inside: np.ndarray, thresholds: np.ndarray
) -> np.ndarray:
    """log P(||phi||_4 > lambda, ||phi||_2 <= B); -inf where no sample exceeds."""
    n = l4.size
    counts = np.array([np.count_nonzero(inside & (l4 > t)) for t in thresholds])
    with np.errstate(divide="ignore"):
        return np.log(counts / n)


def is_convex_decreasing(
    x: np.ndarray, y: np.ndarray, slack: float = 0.0
) -> Dict[str, bool]:
    """Check monotone decrease and convexity of y(x) from finite differences."""
    keep = np.isfinite(y)
    x, y = np.asarray(x)[keep], np.asarray(y)[keep]
    if x.size < 3:
        return {"decreasing": bool(np.all(np.diff(y) <= slack)), "convex": True}
    slopes = np.diff(y) / np.diff(x)
    return {
        "decreasing": bool(np.all(np.diff(y) <= slack)),
        "convex": bool(np.all(np.diff(slopes) >= -slack)),
    }


def tail_moment_check(
    kappa: float,
    B: float,  # noqa: N803
    c: float,
    n_samples: int,
    rng: RngStream,
    levels: Sequence[int] = DEFAULT_LEVELS,
    n_thresholds: int = 12,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    executor: Optional[Executor] = None,
) -> ExperimentReport:
    """
    Estimate E[e^{c ||phi||_4^4} 1{||phi||_2 <= B}] at increasing k_max.

    Args:
        kappa: Positive mass parameter
        B: Mass-ball radius (on ||phi||_2)
        c: Exponential moment parameter
        n_samples: Samples per level
        rng: Random stream; level i uses substream i
        levels: Increasing k_max values
        n_thresholds: Points of the exceedance curve at the finest level
        chunk_size: Samples per substream chunk
        executor: Optional pool for chunk-parallel sampling

    Returns:
        ExperimentReport with the moment per level, relative changes between
        successive levels and the exceedance curve of the finest level
    """
    report = ExperimentReport(
        name="tail-check",
        sweep_kind=SweepKind.K_MAX,
        scenario={
            "kappa": kappa,
            "B": B,
            "c": c,
            "n_samples": n_samples,
            "seed": rng.seed,
            "levels": list(levels),
        },
        sweep_values=[float(k) for k in levels],
    )
    estimates = []
    l4 = np.zeros(0)
    inside = np.zeros(0, dtype=bool)
    for i, k_max in enumerate(levels):
        started = time.perf_counter()
        mode_set = ModeSet(int(k_max))
        stream = rng.substream(i)
        masses, l4 = mass_and_l4(
            mode_set, kappa, stream, n_samples, chunk_size, executor
        )
        inside = masses <= B * B
        with np.errstate(over="ignore"):
            values = np.where(inside, np.exp(c * np.where(inside, l4, 0.0) ** 4), 0.0)
        estimate = mean_estimate(values)
        elapsed = time.perf_counter() - started
        estimates.append(estimate)
        report.add_point(k_max, "moment", estimate.value, estimate.std_error, elapsed)
        report.timings[f"k_max={k_max}"] = elapsed
        logger.info(
            "tail level k_max=%d: %.6g +- %.2g",
            k_max,
            estimate.value,
            estimate.std_error,
        )

    changes: List[float] = []
    for k_max, previous, current in zip(levels[1:], estimates, estimates[1:]):
        gap = abs(current.value - previous.value)
        change = gap / abs(previous.value) if previous.value else math.inf
        changes.append(change)
        report.add_point(k_max, "relative_change", change)
    report.metrics["relative_changes"] = changes
    report.metrics["stable"] = bool(changes) and changes[-1] < STABILITY_TOLERANCE

    if np.any(inside):
        thresholds = np.linspace(
            float(np.min(l4[inside])), float(np.max(l4[inside])), n_thresholds + 1
        )[:-1]
        curve = exceedance_curve(l4, inside, thresholds)
        report.metrics["exceedance"] = {
            "lambda": thresholds.tolist(),
            "log_probability": [float(v) if np.isfinite(v) else None for v in curve],
            **is_convex_decreasing(thresholds**2, curve),
        }
    return report
