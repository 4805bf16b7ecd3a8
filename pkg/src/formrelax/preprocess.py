"""Abstract-value preprocessing of raw submissions.

Raw cells are mapped to an abstract representation before any learning:
missing or meaningless values become an Optional mark, valid text becomes a
Required mark, categorical values are kept, and numeric values are
discretized into intervals via recursive entropy-minimizing splits with an
MDL stopping criterion.  Fields that end up constant on the training data
are dropped.  The same transform is applied to partial input at serving
time.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, FieldKind, FormSchema
from .errors import EmptyDataset

OPTIONAL_LABEL = "Optional"
REQUIRED_LABEL = "Required"
UNSEEN_CATEGORY = "__unseen__"


# ---------------------------------------------------------------------------
# Cell values


@dataclass(frozen=True)
class RequiredMark:
    def state_label(self) -> str:
        return REQUIRED_LABEL


@dataclass(frozen=True)
class OptionalMark:
    def state_label(self) -> str:
        return OPTIONAL_LABEL


@dataclass(frozen=True)
class Category:
    label: str

    def state_label(self) -> str:
        return self.label


@dataclass(frozen=True)
class Interval:
    bin: int

    def state_label(self) -> str:
        return f"bin{self.bin}"


@dataclass(frozen=True)
class PendingNumeric:
    """Valid numeric cell awaiting per-target discretization."""

    value: float


CellValue = RequiredMark | OptionalMark | Category | Interval
REQUIRED = RequiredMark()
OPTIONAL = OptionalMark()


@dataclass(frozen=True)
class PreprocessedInstance:
    values: dict[str, CellValue]


# ---------------------------------------------------------------------------
# Meaningless-value dictionary


@dataclass(frozen=True)
class MeaninglessDictionary:
    """Exact-match lookup of placeholder values ("@", "n/a", ...).

    Matching is case-insensitive after trimming surrounding whitespace.
    The empty string is never an entry; missing cells are handled separately.
    """

    entries: frozenset[str]

    @classmethod
    def from_values(cls, values) -> "MeaninglessDictionary":
        normalized = {v.strip().casefold() for v in values}
        normalized.discard("")
        return cls(entries=frozenset(normalized))

    @classmethod
    def from_file(cls, path) -> "MeaninglessDictionary":
        values = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    values.append(line)
        return cls.from_values(values)

    def matches(self, raw: str) -> bool:
        return raw.strip().casefold() in self.entries


# ---------------------------------------------------------------------------
# Cell classification


def classify_cell(
    raw: str | None, kind: FieldKind, dictionary: MeaninglessDictionary
) -> CellValue | PendingNumeric:
    """Map one raw cell to its abstract value.

    Numeric cells come back as PendingNumeric because their interval is
    target-dependent; everything else is final.  Unparseable content in a
    numeric field counts as meaningless.
    """
    if raw is None or raw.strip() == "":
        return OPTIONAL
    if dictionary.matches(raw):
        return OPTIONAL
    if kind is FieldKind.TEXTUAL:
        return REQUIRED
    if kind is FieldKind.CATEGORICAL:
        return Category(raw.strip())
    try:
        return PendingNumeric(float(raw.strip()))
    except ValueError:
        return OPTIONAL


# ---------------------------------------------------------------------------
# Entropy-based discretization (recursive binary splits, MDL stop rule)

ENTROPY_TIE_TOL = 1e-12


def _counts_entropy(counts) -> float:
    total = int(sum(counts))
    if total == 0:
        return 0.0
    ent = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            ent -= p * math.log2(p)
    return ent


def _mdl_accepts(whole, left, right) -> bool:
    """Fayyad-Irani stopping rule on integer class-count vectors."""
    n = int(sum(whole))
    n_left = int(sum(left))
    ent_whole = _counts_entropy(whole)
    ent_left = _counts_entropy(left)
    ent_right = _counts_entropy(right)
    gain = ent_whole - (
        (n_left / n) * ent_left + ((n - n_left) / n) * ent_right
    )
    k = sum(1 for c in whole if c > 0)
    k1 = sum(1 for c in left if c > 0)
    k2 = sum(1 for c in right if c > 0)
    delta = math.log2(3**k - 2) - (k * ent_whole - k1 * ent_left - k2 * ent_right)
    return gain > (math.log2(n - 1) + delta) / n


def _xlog2x(a):
    return np.where(a > 0, a * np.log2(np.maximum(a, 1)), 0.0)


def fit_discretizer(values: list[tuple[float, str]]) -> list[float]:
    """Cut points for one numeric column supervised by a binary class label.

    Candidate cuts are the midpoints between adjacent distinct values; the
    one with lowest weighted class entropy wins (ties within 1e-12 go to the
    smallest cut) and is kept when the MDL criterion accepts it, recursing
    on both halves.  Degenerate input (single class or single value) yields
    no cuts, i.e. a single bin.
    """
    if not values:
        return []
    pairs = sorted(values, key=lambda p: p[0])
    vals = np.array([p[0] for p in pairs], dtype=float)
    classes = sorted({p[1] for p in pairs})
    lab = np.array([classes.index(p[1]) for p in pairs], dtype=np.int64)
    n = len(pairs)
    onehot = np.zeros((n, len(classes)), dtype=np.int64)
    onehot[np.arange(n), lab] = 1
    # prefix[i] = class counts among the first i points
    prefix = np.vstack([np.zeros(len(classes), dtype=np.int64), np.cumsum(onehot, axis=0)])
    boundary = np.nonzero(vals[1:] != vals[:-1])[0] + 1  # split indices

    cuts: list[float] = []

    def recurse(lo: int, hi: int):
        if hi - lo < 2:
            return
        idxs = boundary[(boundary > lo) & (boundary < hi)]
        if idxs.size == 0:
            return
        left = prefix[idxs] - prefix[lo]
        whole = prefix[hi] - prefix[lo]
        right = whole - left
        lt = (idxs - lo).astype(float)
        rt = (hi - idxs).astype(float)
        total = float(hi - lo)
        h_left = np.log2(np.maximum(lt, 1)) - _xlog2x(left).sum(axis=1) / np.maximum(lt, 1)
        h_right = np.log2(np.maximum(rt, 1)) - _xlog2x(right).sum(axis=1) / np.maximum(rt, 1)
        w = (lt / total) * h_left + (rt / total) * h_right
        pick = int(np.nonzero(w <= w.min() + ENTROPY_TIE_TOL)[0][0])
        i = int(idxs[pick])
        if not _mdl_accepts(whole.tolist(), left[pick].tolist(), right[pick].tolist()):
            return
        cuts.append(float((vals[i - 1] + vals[i]) / 2.0))
        recurse(lo, i)
        recurse(i, hi)

    recurse(0, n)
    return sorted(cuts)


def assign_bin(cuts: list[float], value: float) -> int:
    """Bin index for a value; out-of-range values land in the edge bins."""
    return bisect_right(cuts, value)


# ---------------------------------------------------------------------------
# Preprocessor


@dataclass
class PreprocessorModel:
    """Per-form transform state learned on training data.

    ``bins`` is keyed by (numeric field, target field) and filled in lazily
    during per-target model building; the rest is fixed at fit time.
    """

    schema: FormSchema
    meaningless: MeaninglessDictionary
    dropped_fields: frozenset[str]
    category_vocab: dict[str, frozenset[str]]
    bins: dict[tuple[str, str], list[float]] = field(default_factory=dict)
    unknown_categories: dict[str, frozenset[str]] = field(default_factory=dict)

    def retained_fields(self) -> list[str]:
        return [f for f in self.schema.field_names() if f not in self.dropped_fields]


def classify_instances(
    dataset: Dataset, dictionary: MeaninglessDictionary
) -> list[dict[str, CellValue | PendingNumeric]]:
    kinds = {f.name: f.kind for f in dataset.schema.fields}
    rows = []
    for ins in dataset.instances:
        rows.append(
            {
                name: classify_cell(ins.values.get(name), kind, dictionary)
                for name, kind in kinds.items()
            }
        )
    return rows


def fit_preprocessor(
    train: Dataset, dictionary: MeaninglessDictionary
) -> tuple[PreprocessorModel, list[dict[str, CellValue | PendingNumeric]]]:
    """Learn dropped fields and category vocabularies from training data.

    Returns the model plus the classified training rows (already restricted
    to retained fields) so callers do not classify twice.
    """
    if len(train) == 0:
        raise EmptyDataset("cannot fit a preprocessor on an empty dataset")
    rows = classify_instances(train, dictionary)

    dropped = set()
    vocab: dict[str, frozenset[str]] = {}
    unknown: dict[str, frozenset[str]] = {}
    for spec in train.schema.fields:
        column = [row[spec.name] for row in rows]
        if len(set(column)) <= 1:
            dropped.add(spec.name)
        if spec.kind is FieldKind.CATEGORICAL:
            observed = {c.label for c in column if isinstance(c, Category)}
            extra = observed - set(spec.categories)
            if extra:
                unknown[spec.name] = frozenset(extra)
            vocab[spec.name] = frozenset(set(spec.categories) | observed)

    model = PreprocessorModel(
        schema=train.schema,
        meaningless=dictionary,
        dropped_fields=frozenset(dropped),
        category_vocab=vocab,
        unknown_categories=unknown,
    )
    retained_rows = [
        {k: v for k, v in row.items() if k not in dropped} for row in rows
    ]
    return model, retained_rows


def transform_partial(
    model: PreprocessorModel,
    filled: dict[str, str | CellValue | PendingNumeric],
    target: str,
) -> PreprocessedInstance:
    """Apply the learned transform to a partially filled form.

    Accepts raw strings or already-abstract cells (the latter pass through,
    which makes the transform idempotent).  Values for dropped fields are
    skipped; numeric values are mapped with the (field, target) bins and
    clamp to the edge bins outside the learned range; categorical values
    outside the learned vocabulary map to a reserved unseen label.
    """
    kinds = {f.name: f.kind for f in model.schema.fields}
    out: dict[str, CellValue] = {}
    for name, value in filled.items():
        if name in model.dropped_fields or name == target:
            continue
        if isinstance(value, (RequiredMark, OptionalMark, Category, Interval)):
            cell = value
        else:
            if not isinstance(value, PendingNumeric):
                value = classify_cell(value, kinds[name], model.meaningless)
            if isinstance(value, PendingNumeric):
                cuts = model.bins.get((name, target), [])
                cell = Interval(assign_bin(cuts, value.value))
            else:
                cell = value
        if isinstance(cell, Category) and cell.label not in model.category_vocab.get(
            name, frozenset()
        ):
            cell = Category(UNSEEN_CATEGORY)
        out[name] = cell
    return PreprocessedInstance(values=out)
