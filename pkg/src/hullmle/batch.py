"""Batch hull queries: minimum scaling factor over a test set, and
Mahalanobis-depth pruning of target points that cannot affect the hull.

The minimum scaling factor over a set of test statistics decides whether
a sampled likelihood-ratio surface has a maximizer at all: any test
point outside the open hull (factor at most 1) certifies an unbounded
surface.  Pruning discards the deepest fraction of target points, which
shrinks the LP without materially moving the hull boundary in moderate
dimension.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import numerics
from .hull import HullStatus, SolverConfig, TargetSet, query

__all__ = [
    "TestSet",
    "ScaleReport",
    "make_test_set",
    "min_scale",
    "mahalanobis_prune",
    "prune_curve",
]


@dataclass(frozen=True)
class TestSet:
    """Test points in original (uncentered) coordinates, one per row."""

    points: np.ndarray

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class ScaleReport:
    """Per-point scaling factors and their minimum.

    min_scale at or below 1 means at least one test point sits outside
    the open hull, so no common rescaling short of min_scale brings the
    whole set strictly inside.  any_degenerate flags individual queries
    that could not produce a finite factor; those contribute +inf.
    """

    min_scale: float
    per_point_scales: np.ndarray
    argmin: int
    any_degenerate: bool


def make_test_set(raw) -> TestSet:
    return TestSet(points=numerics.as_matrix(raw, "test points"))


def min_scale(
    target: TargetSet,
    tests: TestSet,
    config: SolverConfig | None = None,
    threads: int | None = None,
) -> ScaleReport:
    """Smallest per-point boundary scaling factor over the test set.

    Queries are independent, so they optionally run on a thread pool;
    the report is assembled by point index either way.  A rank-deficient
    target is rejected outright since every query would be Degenerate.
    """
    cfg = config or SolverConfig()
    if tests.n_points < 1:
        raise ValueError("test set is empty")
    if target.rank < target.dim:
        raise ValueError(
            "target set is rank-deficient; every query would be Degenerate"
        )

    def one(row) -> tuple[float, bool]:
        verdict = query(target, row, cfg)
        if verdict.status is HullStatus.DEGENERATE:
            return math.inf, True
        return verdict.gamma, False

    rows = list(tests.points)
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, rows))
    else:
        outcomes = [one(row) for row in rows]

    scales = np.array([g for g, _ in outcomes])
    any_degenerate = any(flag for _, flag in outcomes)
    argmin = int(np.argmin(scales))
    return ScaleReport(
        min_scale=float(scales[argmin]),
        per_point_scales=scales,
        argmin=argmin,
        any_degenerate=any_degenerate,
    )


def _depth_order(target: TargetSet) -> np.ndarray:
    """Row indices sorted by decreasing squared Mahalanobis distance from
    the centroid, ties broken by original index.  The covariance is the
    sample covariance of the full target set, computed once."""
    inverse = numerics.CovarianceInverse(numerics.covariance(target.points))
    distances = numerics.squared_distances(target.points, inverse)
    return np.argsort(-distances, kind="stable")


def _keep_count(keep_fraction: float, r: int) -> int:
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep fraction must be in (0, 1], got {keep_fraction}")
    return math.ceil(keep_fraction * r)


def _pruned(target: TargetSet, order: np.ndarray, kept: int) -> TargetSet:
    rows = target.points[order[:kept]]
    return TargetSet(
        points=rows,
        centroid=target.centroid,
        # Rank of the survivors; pruning extreme points first makes a
        # rank drop before tiny kept counts unlikely but not impossible.
        rank=numerics.rank(rows),
    )


def mahalanobis_prune(target: TargetSet, keep_fraction: float) -> TargetSet:
    """Keep the outermost fraction of target points by Mahalanobis depth.

    The deepest points (smallest distance) are interior to the hull of
    the rest and cannot move its boundary.  The result keeps the
    original centroid on purpose: scaling factors are measured along
    rays from that reference, and re-centering on survivors would
    silently change every subsequent query.
    """
    if target.n_points < 2:
        raise ValueError("pruning needs at least two points")
    kept = _keep_count(keep_fraction, target.n_points)
    return _pruned(target, _depth_order(target), kept)


def prune_curve(
    target: TargetSet,
    tests: TestSet,
    fractions,
    config: SolverConfig | None = None,
    threads: int | None = None,
) -> list[tuple[float, float]]:
    """min_scale at each kept fraction, sharing one depth ordering.

    Kept sets are nested across fractions, so the curve is monotone
    nondecreasing in the fraction: a larger kept set has a larger hull.
    That reading assumes every query stays answerable; pruning hard
    enough that the kept hull no longer surrounds the centroid turns
    queries Degenerate, whose infinite gammas are placeholders rather
    than scaling factors (min_scale raises anyDegenerate there).
    """
    fracs = [float(f) for f in fractions]
    if not fracs:
        raise ValueError("no fractions given")
    if target.n_points < 2:
        raise ValueError("pruning needs at least two points")
    order = _depth_order(target)
    curve = []
    for f in fracs:
        kept = _keep_count(f, target.n_points)
        report = min_scale(_pruned(target, order, kept), tests, config, threads)
        curve.append((f, report.min_scale))
    return curve
