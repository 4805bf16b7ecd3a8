"""Evaluation protocol: simulated filling orders over a held-out test split,
confusion-matrix scoring, and report formatting.

Two filling scenarios are simulated per test instance: sequential (tab
order) and partial random (a per-instance random permutation in which
designer-defined groups move as blocks and stay internally sequential).
The positive class is Required throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dataset import Dataset
from .errors import EmptyDataset
from .pipeline import ModelBundle
from .preprocess import OPTIONAL_LABEL, OptionalMark, REQUIRED_LABEL, classify_cell
from .relax import Decision, PartialForm, predict_requirement


class FillMode(Enum):
    SEQUENTIAL = "sequential"
    PARTIAL_RANDOM = "partial-random"


@dataclass(frozen=True)
class ScenarioConfig:
    mode: FillMode = FillMode.SEQUENTIAL
    seed: int = 0


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class despite the name

    prefix: dict[str, str]
    target: str
    truth: str  # "Required" or "Optional"


@dataclass
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def add(self, truth: str, predicted_required: bool):
        if truth == REQUIRED_LABEL:
            if predicted_required:
                self.tp += 1
            else:
                self.fn += 1
        else:
            if predicted_required:
                self.fp += 1
            else:
                self.tn += 1

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def precision(self):
        return _ratio(self.tp, self.tp + self.fp)

    def recall(self):
        return _ratio(self.tp, self.tp + self.fn)

    def npv(self):
        return _ratio(self.tn, self.tn + self.fn)

    def specificity(self):
        return _ratio(self.tn, self.tn + self.fp)

    def accuracy(self):
        return _ratio(self.tp + self.tn, self.total)


def _ratio(num: int, den: int):
    return num / den if den else None


@dataclass
class MetricsReport:
    scenario: str
    aggregate: ConfusionMatrix
    per_target: dict[str, ConfusionMatrix]
    latency_mean_s: float = 0.0
    latency_min_s: float = 0.0
    latency_max_s: float = 0.0
    train_duration_s: float | None = None

    def to_json_dict(self) -> dict:
        def block(cm: ConfusionMatrix) -> dict:
            return {
                "tp": cm.tp,
                "fp": cm.fp,
                "tn": cm.tn,
                "fn": cm.fn,
                "precision": cm.precision(),
                "recall": cm.recall(),
                "npv": cm.npv(),
                "specificity": cm.specificity(),
                "accuracy": cm.accuracy(),
            }

        return {
            "scenario": self.scenario,
            "aggregate": block(self.aggregate),
            "per_target": {t: block(cm) for t, cm in self.per_target.items()},
            "latency_ms": {
                "avg": self.latency_mean_s * 1e3,
                "min": self.latency_min_s * 1e3,
                "max": self.latency_max_s * 1e3,
            },
            "train_duration_s": self.train_duration_s,
        }

    def format_table(self) -> str:
        headers = ["Target", "Prec", "Rec", "NPV", "Spec", "Cases"]
        rows = []

        def fmt(v):
            return "-" if v is None else f"{v:.2f}"

        for name, cm in sorted(self.per_target.items()):
            rows.append(
                [name, fmt(cm.precision()), fmt(cm.recall()), fmt(cm.npv()),
                 fmt(cm.specificity()), str(cm.total)]
            )
        agg = self.aggregate
        rows.append(
            ["(all)", fmt(agg.precision()), fmt(agg.recall()), fmt(agg.npv()),
             fmt(agg.specificity()), str(agg.total)]
        )
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
            "  ".join("-" * w for w in widths),
        ]
        lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        train = (
            f"{self.train_duration_s:.2f}" if self.train_duration_s is not None else "-"
        )
        lines.append(
            f"scenario={self.scenario}  train={train}s  "
            f"predict avg={self.latency_mean_s * 1e3:.2f}ms "
            f"min-max={self.latency_min_s * 1e3:.2f}-{self.latency_max_s * 1e3:.2f}ms"
        )
        return "\n".join(lines)


def _fill_order(dataset: Dataset, mode: FillMode, rng) -> list[str]:
    tab = dataset.schema.tab_order()
    if mode is FillMode.SEQUENTIAL:
        return tab
    # group members move as one unit and stay internally sequential
    grouped: dict[str, list[str]] = {}
    units: list[list[str]] = []
    for name in tab:
        gid = dataset.schema.group_of(name)
        if gid is None:
            units.append([name])
        elif gid in grouped:
            grouped[gid].append(name)
        else:
            grouped[gid] = [name]
            units.append(grouped[gid])
    perm = rng.permutation(len(units))
    order = []
    for idx in perm:
        order.extend(units[idx])
    return order


def generate_cases(
    test: Dataset, scenario: ScenarioConfig, targets: list[str], dictionary
) -> list[TestCase]:
    """One case per (instance, modeled target): the prefix holds the raw
    values of the filled fields preceding the target in the simulated order,
    and the truth is Optional when the target's raw value is missing or
    meaningless."""
    if len(test) == 0:
        raise EmptyDataset("no test instances")
    kinds = {f.name: f.kind for f in test.schema.fields}
    rng = np.random.default_rng(scenario.seed)
    target_set = set(targets)
    cases = []
    for instance in test.instances:
        order = _fill_order(test, scenario.mode, rng)
        positions = {name: i for i, name in enumerate(order)}
        for target in sorted(target_set, key=positions.__getitem__):
            prefix = {
                name: instance.values[name]
                for name in order[: positions[target]]
                if name in instance.values
            }
            raw = instance.values.get(target)
            truth = (
                OPTIONAL_LABEL
                if isinstance(
                    classify_cell(raw, kinds[target], dictionary), OptionalMark
                )
                else REQUIRED_LABEL
            )
            cases.append(TestCase(prefix=prefix, target=target, truth=truth))
    return cases


def score(decisions: list[tuple[Decision, str]], scenario: str = "") -> MetricsReport:
    """Confusion-matrix metrics, overall and per target."""
    aggregate = ConfusionMatrix()
    per_target: dict[str, ConfusionMatrix] = {}
    latencies = []
    for decision, truth in decisions:
        aggregate.add(truth, decision.final_required)
        per_target.setdefault(decision.target, ConfusionMatrix()).add(
            truth, decision.final_required
        )
        latencies.append(decision.latency_s)
    return MetricsReport(
        scenario=scenario,
        aggregate=aggregate,
        per_target=per_target,
        latency_mean_s=float(np.mean(latencies)) if latencies else 0.0,
        latency_min_s=float(np.min(latencies)) if latencies else 0.0,
        latency_max_s=float(np.max(latencies)) if latencies else 0.0,
    )


def run_experiment(
    bundle: ModelBundle,
    test: Dataset,
    scenario: ScenarioConfig = ScenarioConfig(),
) -> MetricsReport:
    """Generate cases, predict each one, and score the decisions."""
    cases = generate_cases(
        test, scenario, sorted(bundle.models), bundle.preprocessor.meaningless
    )
    outcomes = []
    for case in cases:
        decision = predict_requirement(
            bundle, PartialForm(filled=case.prefix), case.target
        )
        outcomes.append((decision, case.truth))
    report = score(outcomes, scenario=scenario.mode.value)
    report.train_duration_s = bundle.train_duration_s
    return report
