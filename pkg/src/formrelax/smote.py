"""Minority-class oversampling by nearest-neighbor interpolation.

Operates on mixed feature vectors: ordinal components (interval bin indices
as reals) are interpolated between a seed instance and one of its nearest
minority neighbors; nominal components take the mode among the neighborhood.
Distances are Euclidean over ordinals with a fixed penalty per nominal
mismatch.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import LayoutMismatch


@dataclass(frozen=True)
class EncodedInstance:
    """Feature vector plus binary class label.

    Each feature is either a float (ordinal) or a string (nominal); the
    per-position type must be consistent across a dataset.
    """

    features: tuple[float | str, ...]
    klass: str


@dataclass(frozen=True)
class SmoteConfig:
    k: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.target_ratio <= 1.0:
            raise ValueError("target_ratio must be in (0, 1]")


@dataclass(frozen=True)
class SyntheticRecord:
    """Provenance of one synthetic instance, for audit and testing."""

    seed_index: int
    neighbor_index: int
    lam: float
    pre_round: tuple[float | str, ...]


@dataclass
class OversampleResult:
    instances: list[EncodedInstance]
    synthetics: list[EncodedInstance] = field(default_factory=list)
    records: list[SyntheticRecord] = field(default_factory=list)
    single_class: bool = False


def _check_layout(a: EncodedInstance, b: EncodedInstance):
    if len(a.features) != len(b.features):
        raise LayoutMismatch("feature vectors differ in length")
    for x, y in zip(a.features, b.features):
        if isinstance(x, str) != isinstance(y, str):
            raise LayoutMismatch("ordinal/nominal positions differ")


def distance(a: EncodedInstance, b: EncodedInstance, delta: float = 1.0) -> float:
    """Euclidean over ordinal positions plus delta^2 per nominal mismatch."""
    _check_layout(a, b)
    acc = 0.0
    for x, y in zip(a.features, b.features):
        if isinstance(x, str):
            if x != y:
                acc += delta * delta
        else:
            acc += (x - y) ** 2
    return math.sqrt(acc)


def nominal_penalty(instances: list[EncodedInstance]) -> float:
    """Median standard deviation of the ordinal components; 1.0 when there
    are no ordinal components or they carry no spread."""
    if not instances:
        return 1.0
    n_feat = len(instances[0].features)
    stds = []
    for j in range(n_feat):
        col = [ins.features[j] for ins in instances]
        if any(isinstance(v, str) for v in col):
            continue
        stds.append(statistics.pstdev(col) if len(col) > 1 else 0.0)
    if not stds:
        return 1.0
    med = statistics.median(stds)
    return med if med > 0 else 1.0


def _round_half_up(x: float) -> float:
    return math.floor(x + 0.5)


def _nearest_minority_neighbors(
    minority: list[EncodedInstance], k: int, delta: float
) -> list[list[int]]:
    """k nearest neighbors per instance under ``distance`` (ties by index).

    Vectorized over squared distances; ranking is identical to sorting the
    pairwise ``distance`` values.
    """
    m = len(minority)
    if k < 1:
        return [[] for _ in range(m)]
    n_feat = len(minority[0].features)
    ord_cols = [
        j for j in range(n_feat) if not isinstance(minority[0].features[j], str)
    ]
    nom_cols = [j for j in range(n_feat) if j not in set(ord_cols)]
    ords = np.array(
        [[ins.features[j] for j in ord_cols] for ins in minority], dtype=float
    ).reshape(m, len(ord_cols))
    codes = []
    for j in nom_cols:
        seen: dict[str, int] = {}
        codes.append(
            [seen.setdefault(ins.features[j], len(seen)) for ins in minority]
        )
    noms = np.array(codes, dtype=np.int64).T.reshape(m, len(nom_cols))
    out = []
    for i in range(m):
        sq = ((ords - ords[i]) ** 2).sum(axis=1)
        if nom_cols:
            sq = sq + (delta * delta) * (noms != noms[i]).sum(axis=1)
        sq[i] = np.inf
        order = np.lexsort((np.arange(m), sq))
        out.append([int(j) for j in order[:k]])
    return out


def oversample(
    data: list[EncodedInstance], cfg: SmoteConfig, rng=None
) -> OversampleResult:
    """Grow the minority class to target_ratio x majority by interpolation.

    Every original instance is preserved.  Each synthetic derives from a
    randomly chosen minority seed and one of its k nearest minority
    neighbors: ordinals are seed + lam * (neighbor - seed) with lam drawn
    once per instance and rounded to the nearest valid bin index (ties up);
    nominals take the mode over the neighborhood plus the seed, ties going
    to the seed.  Deterministic for a fixed config seed.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    for ins in data[1:]:
        _check_layout(data[0], ins)
    by_class = Counter(ins.klass for ins in data)
    if len(by_class) < 2:
        return OversampleResult(instances=list(data), single_class=True)
    if len(by_class) != 2:
        raise ValueError(f"expected a binary class column, got {sorted(by_class)}")

    (maj_class, maj_n), (min_class, min_n) = by_class.most_common(2)
    minority = [ins for ins in data if ins.klass == min_class]
    m = len(minority)
    want = max(min_n, math.floor(cfg.target_ratio * maj_n))
    n_synth = want - min_n
    if n_synth <= 0:
        return OversampleResult(instances=list(data))

    delta = nominal_penalty(minority)
    k_eff = min(cfg.k, m - 1)
    neighbor_lists = _nearest_minority_neighbors(minority, k_eff, delta)

    out = OversampleResult(instances=list(data))
    for _ in range(n_synth):
        si = int(rng.integers(0, m))
        seed_ins = minority[si]
        if k_eff < 1:
            # single minority instance: duplicate it
            synth = EncodedInstance(features=seed_ins.features, klass=min_class)
            out.records.append(
                SyntheticRecord(si, si, 0.0, seed_ins.features)
            )
        else:
            neighbors = neighbor_lists[si]
            nj = neighbors[int(rng.integers(0, len(neighbors)))]
            neigh_ins = minority[nj]
            lam = float(rng.random())
            pre, final = [], []
            for pos, (sv, nv) in enumerate(
                zip(seed_ins.features, neigh_ins.features)
            ):
                if isinstance(sv, str):
                    votes = Counter(
                        minority[j].features[pos] for j in neighbors
                    )
                    votes[sv] += 1
                    top = votes.most_common()
                    winners = [v for v, c in top if c == top[0][1]]
                    value = sv if sv in winners else winners[0]
                    pre.append(value)
                    final.append(value)
                else:
                    raw = sv + lam * (nv - sv)
                    pre.append(raw)
                    final.append(_round_half_up(raw))
            synth = EncodedInstance(features=tuple(final), klass=min_class)
            out.records.append(SyntheticRecord(si, nj, lam, tuple(pre)))
        out.synthetics.append(synth)
        out.instances.append(synth)
    return out
