"""Resamplers for imbalanced binary data: SMOTE and MAHAKIL.

SMOTE deletes random majority instances down to a per-class target t and
grows the minority up to t by interpolating between a minority instance and
one of its same-class nearest neighbours. The target is
t = round((m/100) * n / 2), so m=100 asks for a balanced set the size of the
original training data. Neighbour search uses the Minkowski distance with a
tunable exponent r.

MAHAKIL oversamples only: minority instances are ranked by Mahalanobis
distance from the minority mean, split into two parent bins, and children are
feature-wise means of position-paired parents; each new generation pairs with
its own parents until the target count is reached.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, minority_label

M_GRID = (50, 100, 200, 400)
MAX_NEIGHBOR_SCAN = 20


@dataclass(frozen=True)
class SmoteParams:
    k: int = 5
    m: int = 50
    r: float = 2.0

    def __post_init__(self) -> None:
        if not 1 <= self.k <= 20:
            raise ValueError(f"k must be in [1, 20], got {self.k}")
        if self.m not in M_GRID:
            raise ValueError(f"m must be one of {M_GRID}, got {self.m}")
        if not 0.1 <= self.r <= 5.0:
            raise ValueError(f"r must be in [0.1, 5.0], got {self.r}")


def minkowski_distance(a: Sequence[float], b: Sequence[float], r: float) -> float:
    """(sum_i |a_i - b_i|^r)^(1/r); defined for any r > 0."""
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.shape != bv.shape or av.ndim != 1:
        raise ValueError("a and b must be 1-d vectors of equal length")
    return float(np.sum(np.abs(av - bv) ** r) ** (1.0 / r))


def _distances_to(rows: np.ndarray, point: np.ndarray, r: float) -> np.ndarray:
    # same expression as minkowski_distance so both paths agree bit for bit
    return np.sum(np.abs(rows - point) ** r, axis=1) ** (1.0 / r)


def _brute_scan(rows: np.ndarray, index: int, r: float, count: int) -> list[int]:
    """The `count` nearest rows to rows[index], excluding itself, ordered by
    (distance, index)."""
    dist = _distances_to(rows, rows[index], r)
    order = np.lexsort((np.arange(len(rows)), dist))
    return [int(i) for i in order if i != index][:count]


class VpTree:
    """Exact nearest-neighbour index for Minkowski exponents r >= 1.

    Pruning relies on the triangle inequality, so r < 1 is rejected. Distances
    are computed with the same expression as the brute-force path and the
    candidate ordering is (distance, index), so results are identical to
    brute force, ties included.
    """

    def __init__(self, rows: np.ndarray, r: float):
        if r < 1:
            raise ValueError("VpTree needs r >= 1 (triangle inequality)")
        self.rows = np.asarray(rows, dtype=float)
        self.r = float(r)
        self.root = self._build(np.arange(len(self.rows)))

    def _build(self, idx: np.ndarray):
        # node = (vantage index, split radius, inside child, outside child)
        if idx.size == 0:
            return None
        stack_root: list = [None, None, None, None]
        work = [(idx, stack_root)]
        while work:
            members, node = work.pop()
            vantage = int(members[0])
            rest = members[1:]
            node[0] = vantage
            if rest.size == 0:
                node[1] = 0.0
                continue
            dist = _distances_to(self.rows[rest], self.rows[vantage], self.r)
            mu = float(np.median(dist))
            node[1] = mu
            inside = rest[dist <= mu]
            outside = rest[dist > mu]
            if inside.size:
                node[2] = [None, None, None, None]
                work.append((inside, node[2]))
            if outside.size:
                node[3] = [None, None, None, None]
                work.append((outside, node[3]))
        return stack_root

    def query(self, point: np.ndarray, count: int, exclude: int = -1) -> list[int]:
        """The `count` nearest indices to point, ordered by (distance, index)."""
        if self.root is None:
            return []
        point = np.asarray(point, dtype=float)
        best: list[tuple[float, int]] = []
        work = [self.root]
        while work:
            vantage, mu, inside, outside = work.pop()
            d = float(_distances_to(self.rows[vantage:vantage + 1], point, self.r)[0])
            if vantage != exclude:
                candidate = (d, vantage)
                if len(best) < count or candidate < best[-1]:
                    bisect.insort(best, candidate)
                    if len(best) > count:
                        best.pop()
            tau = best[-1][0] if len(best) == count else np.inf
            # non-strict bounds so boundary ties are never pruned away
            if d <= mu:
                if outside is not None and mu - d <= tau:
                    work.append(outside)
                if inside is not None and d - mu <= tau:
                    work.append(inside)
            else:
                if inside is not None and d - mu <= tau:
                    work.append(inside)
                if outside is not None and mu - d <= tau:
                    work.append(outside)
        return [i for _, i in best]


def _scan(d: Dataset, index: int, r: float, method: str, tree: VpTree | None = None) -> list[int]:
    if method == "tree" and r >= 1:
        tree = tree if tree is not None else VpTree(d.rows, r)
        return tree.query(d.rows[index], MAX_NEIGHBOR_SCAN, exclude=index)
    return _brute_scan(d.rows, index, r, MAX_NEIGHBOR_SCAN)


def nearest_same_class(
    d: Dataset, index: int, k: int, r: float, method: str = "brute"
) -> list[int]:
    """Same-class neighbours of d.rows[index] by expanding search.

    Walks the query's nearest neighbours (excluding itself, distance ties
    broken by lower index) out to at most the 20 nearest, keeping those that
    share its label, and stops once k are found. May return fewer than k; an
    isolated instance gets an empty list.
    """
    if not 0 <= index < len(d):
        raise ValueError(f"index {index} out of range")
    if k < 1:
        raise ValueError("k must be at least 1")
    target = bool(d.labels[index])
    found: list[int] = []
    for j in _scan(d, index, r, method):
        if bool(d.labels[j]) == target:
            found.append(j)
            if len(found) == k:
                break
    return found


def synthesize(x0: Sequence[float], z: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    """A point on the segment [x0, z]: x0 + u * (z - x0), one uniform u per call."""
    a = np.asarray(x0, dtype=float)
    b = np.asarray(z, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("x0 and z must be 1-d vectors of equal length")
    u = rng.uniform()
    return a + u * (b - a)


def smote(
    d: Dataset,
    params: SmoteParams = SmoteParams(),
    seed: int = 0,
    neighbor_method: str = "brute",
) -> Dataset:
    """Delete majority down to t and grow minority up to t, t = round(m% * n / 2).

    The majority is never synthesized (if t exceeds the majority count it is
    left as is) and the minority is never deleted. Synthetic instances
    interpolate between an original minority instance and one of its
    same-class neighbours; instances with no same-class neighbour within the
    20 nearest are duplicated unchanged. Retained originals keep their
    features and their relative order; synthetics are appended.
    """
    labels = d.labels
    if np.unique(labels).size < 2:
        raise ValueError("smote needs both classes present")
    minority = minority_label(d)
    min_idx = np.flatnonzero(labels == minority)
    maj_idx = np.flatnonzero(labels != minority)
    n = len(d)
    t = int(round(params.m / 100.0 * n / 2.0))
    rng = np.random.default_rng(seed)

    keep_maj = maj_idx
    if len(maj_idx) > t:
        keep_maj = np.sort(rng.choice(maj_idx, size=t, replace=False))

    need = t - len(min_idx)
    synthetic: list[np.ndarray] = []
    if need > 0:
        tree = VpTree(d.rows, params.r) if neighbor_method == "tree" and params.r >= 1 else None
        neighbors: dict[int, list[int]] = {}
        for i in min_idx:
            same: list[int] = []
            for j in _scan(d, int(i), params.r, neighbor_method, tree):
                if bool(labels[j]) == minority:
                    same.append(j)
                    if len(same) == params.k:
                        break
            neighbors[int(i)] = same
        for _ in range(need):
            x0 = int(rng.choice(min_idx))
            candidates = neighbors[x0]
            if not candidates:
                synthetic.append(d.rows[x0].copy())
            else:
                z = candidates[int(rng.integers(len(candidates)))]
                synthetic.append(synthesize(d.rows[x0], d.rows[z], rng))

    retained = np.sort(np.concatenate([min_idx, keep_maj]))
    rows = d.rows[retained]
    out_labels = labels[retained]
    if synthetic:
        rows = np.vstack([rows, np.array(synthetic)])
        out_labels = np.concatenate([out_labels, np.full(len(synthetic), minority, dtype=bool)])
    return Dataset(name=d.name, feature_names=d.feature_names, rows=rows, labels=out_labels)


def mahakil(d: Dataset, target_minority: int, seed: int = 0) -> Dataset:
    """Grow the minority to target_minority by pairing Mahalanobis-ranked parents.

    Minority instances are ranked by Mahalanobis distance from the minority
    mean (descending, distance ties broken by lower index; covariance
    regularized by adding 1e-6*trace/dim to the diagonal), split at the median
    into two parent bins, and position-paired. Children are feature-wise means
    of their parents; each new generation pairs with its own two parents.
    Children are appended in pair order until the target is met exactly. The
    majority is untouched; the procedure is fully deterministic (the seed is
    accepted for interface symmetry).
    """
    labels = d.labels
    minority = minority_label(d)
    min_idx = np.flatnonzero(labels == minority)
    if len(min_idx) < 4:
        raise ValueError(f"mahakil needs at least 4 minority instances, got {len(min_idx)}")
    if target_minority <= len(min_idx):
        return d

    x = d.rows[min_idx]
    mean = x.mean(axis=0)
    cov = np.cov(x, rowvar=False)
    cov = np.atleast_2d(cov)
    dim = cov.shape[0]
    cov = cov + np.eye(dim) * (1e-6 * np.trace(cov) / dim)
    try:
        inv = np.linalg.inv(cov)
    except np.linalg.LinAlgError:
        raise ValueError("degenerate minority covariance after regularization") from None
    centered = x - mean
    dist = np.sqrt(np.einsum("ij,jk,ik->i", centered, inv, centered))
    order = np.lexsort((np.arange(len(dist)), -dist))
    ranked = x[order]
    half = len(ranked) // 2
    bin_one, bin_two = ranked[:half], ranked[half:]
    pairs = [(bin_one[i], bin_two[i]) for i in range(min(len(bin_one), len(bin_two)))]

    need = target_minority - len(min_idx)
    children: list[np.ndarray] = []
    generation = [( (a + b) / 2.0, a, b) for a, b in pairs]
    while need > 0:
        if not generation:
            raise ValueError("mahakil cannot grow: no parent pairs available")
        for child, _, _ in generation:
            children.append(child)
            need -= 1
            if need == 0:
                break
        if need == 0:
            break
        generation = [
            pair
            for child, pa, pb in generation
            for pair in (((child + pa) / 2.0, child, pa), ((child + pb) / 2.0, child, pb))
        ]

    rows = np.vstack([d.rows, np.array(children)])
    out_labels = np.concatenate([labels, np.full(len(children), minority, dtype=bool)])
    return Dataset(name=d.name, feature_names=d.feature_names, rows=rows, labels=out_labels)
