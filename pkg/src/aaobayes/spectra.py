"""Post-processing of sampled spectra: cluster detection and decay fits."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = ["Cluster", "find_clusters", "sqrt_decay_fit"]


class Cluster(NamedTuple):
    center: float  # median of the members
    size: int
    low: float
    high: float


def find_clusters(values, gap: float = 0.02, min_size: int = 5,
                  floor: float = 0.0) -> list[Cluster]:
    """Single-linkage grouping of a 1-d point set.

    Sorted values are split wherever two neighbours are more than ``gap``
    apart; groups with fewer than ``min_size`` members, or whose center lies
    below ``floor``, are discarded.  Clusters are returned in ascending
    order of their centers.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(v) > gap) + 1
    out = []
    for grp in np.split(v, cuts):
        if grp.size >= min_size and np.median(grp) > floor:
            out.append(Cluster(float(np.median(grp)), int(grp.size), float(grp[0]), float(grp[-1])))
    return out


class DecayFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def sqrt_decay_fit(values) -> DecayFit:
    """Least-squares fit of ``sqrt(lambda_i)`` against ``1 / i``.

    ``values`` are taken in descending order and indexed from 1; a good fit
    means ``lambda_i ~ i^{-2}``.
    """
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    if v.size < 3:
        raise ValueError("need at least three values for a decay fit")
    x = 1.0 / np.arange(1, v.size + 1)
    y = np.sqrt(np.clip(v, 0.0, None))
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(coef[0]), float(coef[1]), float(r2))
