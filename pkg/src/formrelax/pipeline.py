"""Per-target model building, endorser threshold tuning, and bundle I/O.

For every eligible target (required field retained after preprocessing) a
temporary training set is derived by collapsing the target column to a
binary Required/Optional class, discretizing numeric features supervised by
that class, optionally rebalancing with SMOTE, and fitting a Bayesian
network.  Thresholds for the endorser are tuned on a held-out split by
sweeping a 21-point grid and keeping the most accurate value.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bn import (
    BayesNet,
    Cpt,
    Dag,
    EncodedTable,
    StructureSearchConfig,
    fit_cpts,
    infer,
    learn_structure,
)
from .dataset import Dataset, FieldKind, FormSchema, schema_from_dict, serialize_schema
from .errors import EmptyData, ParseError, SchemaMismatch, TargetConstant
from .preprocess import (
    OPTIONAL_LABEL,
    REQUIRED_LABEL,
    CellValue,
    Interval,
    MeaninglessDictionary,
    OptionalMark,
    PendingNumeric,
    PreprocessorModel,
    assign_bin,
    classify_instances,
    fit_discretizer,
    fit_preprocessor,
)
from .smote import EncodedInstance, SmoteConfig, oversample

BUNDLE_VERSION = 1
THETA_GRID = tuple(i / 20 for i in range(21))

DISCRETIZER_SUPERVISED = "mdlp-per-target"
DISCRETIZER_GLOBAL = "global-equal-frequency"


@dataclass(frozen=True)
class TrainConfig:
    smote: SmoteConfig = SmoteConfig()
    structure: StructureSearchConfig = StructureSearchConfig()
    laplace_alpha: float = 1.0
    discretizer: str = DISCRETIZER_SUPERVISED
    equal_frequency_bins: int = 10
    enable_smote: bool = True
    enable_endorser: bool = True
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def to_json_dict(self) -> dict:
        return {
            "smote": {
                "k": self.smote.k,
                "target_ratio": self.smote.target_ratio,
                "seed": self.smote.seed,
            },
            "structure": {
                "max_parents": self.structure.max_parents,
                "max_iterations": self.structure.max_iterations,
                "restarts": self.structure.restarts,
                "seed": self.structure.seed,
                "score_epsilon": self.structure.score_epsilon,
                "enable_reversal": self.structure.enable_reversal,
            },
            "laplace_alpha": self.laplace_alpha,
            "discretizer": self.discretizer,
            "equal_frequency_bins": self.equal_frequency_bins,
            "enable_smote": self.enable_smote,
            "enable_endorser": self.enable_endorser,
            "ratios": list(self.ratios),
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TrainConfig":
        return cls(
            smote=SmoteConfig(**doc["smote"]),
            structure=StructureSearchConfig(**doc["structure"]),
            laplace_alpha=doc["laplace_alpha"],
            discretizer=doc["discretizer"],
            equal_frequency_bins=doc["equal_frequency_bins"],
            enable_smote=doc["enable_smote"],
            enable_endorser=doc["enable_endorser"],
            ratios=tuple(doc["ratios"]),
            seed=doc["seed"],
        )


@dataclass
class TargetModel:
    target: str
    net: BayesNet
    theta: float
    bins: dict[str, list[float]]
    class_order: tuple[str, str] = (REQUIRED_LABEL, OPTIONAL_LABEL)


@dataclass
class ModelBundle:
    schema: FormSchema
    schema_hash: str
    preprocessor: PreprocessorModel
    models: dict[str, TargetModel]
    train_config: TrainConfig
    created_at: str
    skipped_targets: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    train_duration_s: float | None = None


def derive_seed(global_seed: int, name: str) -> int:
    """Stable per-target seed so adding a target never perturbs the others."""
    digest = hashlib.blake2s(
        f"{global_seed}:{name}".encode(), digest_size=4
    ).digest()
    return int.from_bytes(digest, "big")


def schema_fingerprint(schema: FormSchema) -> str:
    return hashlib.sha256(serialize_schema(schema).encode()).hexdigest()


def _cell_label(cell: CellValue) -> str:
    return cell.state_label()


def _equal_frequency_cuts(values: list[float], k: int) -> list[float]:
    if len(set(values)) < 2:
        return []
    qs = np.quantile(np.asarray(values, dtype=float), np.arange(1, k) / k)
    cuts, last = [], None
    for q in qs:
        q = float(q)
        if (last is None or q > last) and min(values) < q < max(values):
            cuts.append(q)
            last = q
    return cuts


def make_target_dataset(
    rows: list[dict[str, CellValue | PendingNumeric]],
    target: str,
    pre: PreprocessorModel,
    cfg: TrainConfig,
) -> tuple[list[dict[str, str]], dict[str, list[float]]]:
    """Binary-labeled, fully discrete training rows for one target.

    Fits (numeric field, target) cut points as a side effect, recording them
    both in the returned per-target map and in the shared preprocessor.
    Raises TargetConstant when only one class is present.
    """
    labels = [
        OPTIONAL_LABEL if isinstance(row[target], OptionalMark) else REQUIRED_LABEL
        for row in rows
    ]
    if len(set(labels)) < 2:
        raise TargetConstant(f"target {target!r} has a single class in training data")

    kinds = {f.name: f.kind for f in pre.schema.fields}
    features = [f for f in pre.retained_fields() if f != target]
    bins: dict[str, list[float]] = {}
    for name in features:
        if kinds[name] is not FieldKind.NUMERICAL:
            continue
        numeric = [
            (row[name].value, lab)
            for row, lab in zip(rows, labels)
            if isinstance(row[name], PendingNumeric)
        ]
        if cfg.discretizer == DISCRETIZER_GLOBAL:
            cuts = _equal_frequency_cuts(
                [v for v, _ in numeric], cfg.equal_frequency_bins
            )
        else:
            cuts = fit_discretizer(numeric)
        bins[name] = cuts
        pre.bins[(name, target)] = cuts

    out = []
    for row, lab in zip(rows, labels):
        rec = {target: lab}
        for name in features:
            cell = row[name]
            if isinstance(cell, PendingNumeric):
                rec[name] = Interval(assign_bin(bins[name], cell.value)).state_label()
            else:
                rec[name] = _cell_label(cell)
        out.append(rec)
    return out, bins


def _encode_for_smote(
    rows: list[dict[str, str]],
    target: str,
    features: list[str],
    kinds: dict[str, FieldKind],
) -> tuple[list[EncodedInstance], list[bool]]:
    """Numeric columns whose every value is an interval become ordinal
    features (bin index as float); every other column is nominal.  A numeric
    column containing Optional marks has no total order and stays nominal."""
    ordinal = []
    for name in features:
        ordinal.append(
            kinds[name] is FieldKind.NUMERICAL
            and all(row[name].startswith("bin") for row in rows)
        )
    encoded = []
    for row in rows:
        feats: list[float | str] = []
        for name, is_ord in zip(features, ordinal):
            feats.append(float(row[name][3:]) if is_ord else row[name])
        encoded.append(EncodedInstance(features=tuple(feats), klass=row[target]))
    return encoded, ordinal


def _decode_from_smote(
    instances: list[EncodedInstance],
    target: str,
    features: list[str],
    ordinal: list[bool],
) -> list[dict[str, str]]:
    rows = []
    for ins in instances:
        rec = {target: ins.klass}
        for name, is_ord, value in zip(features, ordinal, ins.features):
            rec[name] = f"bin{int(value)}" if is_ord else value
        rows.append(rec)
    return rows


def build_models(
    rows: list[dict[str, CellValue | PendingNumeric]],
    pre: PreprocessorModel,
    cfg: TrainConfig,
) -> tuple[dict[str, TargetModel], list[str]]:
    """One Bayesian network per eligible target (thresholds tuned later).

    Returns the models (theta preset to 0) and the list of skipped targets
    whose per-target dataset was single-class.
    """
    if not rows:
        raise EmptyData("no training rows")
    retained = set(pre.retained_fields())
    targets = [f for f in pre.schema.required_fields() if f in retained]
    kinds = {f.name: f.kind for f in pre.schema.fields}
    models: dict[str, TargetModel] = {}
    skipped: list[str] = []
    for target in targets:
        features = [f for f in pre.retained_fields() if f != target]
        if not features:
            # nothing to condition on, a prior-only model would be useless
            skipped.append(target)
            continue
        try:
            labeled, bins = make_target_dataset(rows, target, pre, cfg)
        except TargetConstant:
            skipped.append(target)
            continue
        if cfg.enable_smote:
            encoded, ordinal = _encode_for_smote(labeled, target, features, kinds)
            smote_cfg = replace(
                cfg.smote, seed=derive_seed(cfg.smote.seed, target)
            )
            labeled = _decode_from_smote(
                oversample(encoded, smote_cfg).instances, target, features, ordinal
            )
        search_cfg = replace(
            cfg.structure, seed=derive_seed(cfg.structure.seed, target)
        )
        table = EncodedTable.from_rows(labeled, nodes=features + [target])
        dag = learn_structure(table, search_cfg)
        net = fit_cpts(dag, table, laplace_alpha=cfg.laplace_alpha)
        models[target] = TargetModel(target=target, net=net, theta=0.0, bins=bins)
    return models, skipped


def evidence_for(net: BayesNet, cells: dict[str, CellValue]) -> dict[str, str]:
    """Keep only evidence the network can condition on; anything else
    (unseen categories, states never observed in training) is marginalized
    by omission, i.e. contributes a uniform likelihood."""
    ev = {}
    for name, cell in cells.items():
        if name not in net.state_spaces:
            continue
        label = _cell_label(cell)
        if label in net.state_spaces[name]:
            ev[name] = label
    return ev


def _tuning_cases(
    tune_rows: list[dict[str, CellValue | PendingNumeric]],
    target: str,
    model: TargetModel,
) -> list[tuple[float, str]]:
    """(P(Optional), truth) per tuning instance with all other fields as
    evidence."""
    cases = []
    for row in tune_rows:
        truth = (
            OPTIONAL_LABEL if isinstance(row[target], OptionalMark) else REQUIRED_LABEL
        )
        cells: dict[str, CellValue] = {}
        for name, cell in row.items():
            if name == target:
                continue
            if isinstance(cell, PendingNumeric):
                cells[name] = Interval(
                    assign_bin(model.bins.get(name, []), cell.value)
                )
            else:
                cells[name] = cell
        posterior = infer(model.net, evidence_for(model.net, cells), target)
        cases.append((posterior.prob_of(OPTIONAL_LABEL), truth))
    return cases


def endorsed_prediction(p_optional: float, theta: float) -> str:
    """Decision rule shared by tuning and serving: the Optional class wins
    only when it is top-ranked and its probability reaches theta."""
    if p_optional > 0.5 and p_optional >= theta:
        return OPTIONAL_LABEL
    return REQUIRED_LABEL


def sweep_thresholds(cases: list[tuple[float, str]]) -> dict[float, float]:
    """Accuracy of the endorsed decision rule at every grid value."""
    scores = {}
    for theta in THETA_GRID:
        correct = sum(
            1 for p, truth in cases if endorsed_prediction(p, theta) == truth
        )
        scores[theta] = correct / len(cases) if cases else 0.0
    return scores


def tune_thresholds(
    tune_rows: list[dict[str, CellValue | PendingNumeric]],
    models: dict[str, TargetModel],
    enable_endorser: bool = True,
) -> tuple[dict[str, float], list[str]]:
    """Best grid threshold per target (ties resolve to the smallest value).

    With the endorser disabled every threshold is 0; an empty tuning set
    falls back to 0.5 with a warning.
    """
    warnings: list[str] = []
    if not enable_endorser:
        return {t: 0.0 for t in models}, warnings
    if not tune_rows:
        warnings.append("empty tuning set: thresholds defaulted to 0.5")
        return {t: 0.5 for t in models}, warnings
    thetas = {}
    for target, model in models.items():
        cases = _tuning_cases(tune_rows, target, model)
        scores = sweep_thresholds(cases)
        best = max(scores.values())
        thetas[target] = min(t for t, s in scores.items() if s == best)
    return thetas, warnings


def train_bundle(
    train: Dataset,
    tune: Dataset,
    dictionary: MeaninglessDictionary,
    cfg: TrainConfig = TrainConfig(),
    created_at: str | None = None,
) -> ModelBundle:
    """Full model-building + threshold-determination phases."""
    started = time.perf_counter()
    pre, train_rows = fit_preprocessor(train, dictionary)
    models, skipped = build_models(train_rows, pre, cfg)
    tune_rows = [
        {k: v for k, v in row.items() if k not in pre.dropped_fields}
        for row in classify_instances(tune, dictionary)
    ]
    thetas, warnings = tune_thresholds(
        tune_rows, models, enable_endorser=cfg.enable_endorser
    )
    for target, theta in thetas.items():
        models[target].theta = theta
    for name, extra in sorted(pre.unknown_categories.items()):
        warnings.append(
            f"field {name!r}: values outside schema categories added to "
            f"vocabulary: {sorted(extra)}"
        )
    if not dictionary.entries and any(
        f.conditionally_required for f in train.schema.fields
    ):
        warnings.append(
            "meaningless-value dictionary is empty although the schema "
            "declares conditionally required fields"
        )
    return ModelBundle(
        schema=train.schema,
        schema_hash=schema_fingerprint(train.schema),
        preprocessor=pre,
        models=models,
        train_config=cfg,
        created_at=created_at
        or time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        skipped_targets=skipped,
        warnings=warnings,
        train_duration_s=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Bundle (de)serialization


def _net_to_dict(net: BayesNet) -> dict:
    return {
        "nodes": list(net.dag.nodes),
        "state_spaces": {n: list(s) for n, s in net.state_spaces.items()},
        "parents": {n: list(ps) for n, ps in net.dag.parents.items()},
        "cpts": {
            n: {
                "parent_order": list(c.parent_order),
                "rows": [list(map(float, row)) for row in c.table],
            }
            for n, c in net.cpts.items()
        },
    }


def _net_from_dict(doc: dict) -> BayesNet:
    dag = Dag(
        nodes=tuple(doc["nodes"]),
        parents={n: tuple(ps) for n, ps in doc["parents"].items()},
    )
    cpts = {
        n: Cpt(
            node=n,
            parent_order=tuple(c["parent_order"]),
            table=np.array(c["rows"], dtype=np.float64),
        )
        for n, c in doc["cpts"].items()
    }
    return BayesNet(
        dag=dag,
        cpts=cpts,
        state_spaces={n: list(s) for n, s in doc["state_spaces"].items()},
    )


def bundle_to_dict(bundle: ModelBundle) -> dict:
    return {
        "bundle_version": BUNDLE_VERSION,
        "created_at": bundle.created_at,
        "schema": bundle.schema.to_json_dict(),
        "schema_hash": bundle.schema_hash,
        "train_config": bundle.train_config.to_json_dict(),
        "train_duration_s": bundle.train_duration_s,
        "preprocessor": {
            "dropped_fields": sorted(bundle.preprocessor.dropped_fields),
            "meaningless": sorted(bundle.preprocessor.meaningless.entries),
            "category_vocab": {
                n: sorted(v) for n, v in bundle.preprocessor.category_vocab.items()
            },
        },
        "models": {
            t: {
                "target": m.target,
                "theta": m.theta,
                "class_order": list(m.class_order),
                "bins": {f: list(c) for f, c in m.bins.items()},
                "net": _net_to_dict(m.net),
            }
            for t, m in bundle.models.items()
        },
        "skipped_targets": list(bundle.skipped_targets),
        "warnings": list(bundle.warnings),
    }


def bundle_from_dict(doc: dict) -> ModelBundle:
    if doc.get("bundle_version") != BUNDLE_VERSION:
        raise ParseError(
            f"unsupported bundle_version {doc.get('bundle_version')!r}"
        )
    schema = schema_from_dict(doc["schema"])
    if schema_fingerprint(schema) != doc["schema_hash"]:
        raise SchemaMismatch("stored schema hash does not match embedded schema")
    models = {}
    bins: dict[tuple[str, str], list[float]] = {}
    for t, m in doc["models"].items():
        models[t] = TargetModel(
            target=m["target"],
            net=_net_from_dict(m["net"]),
            theta=m["theta"],
            bins={f: list(c) for f, c in m["bins"].items()},
            class_order=tuple(m["class_order"]),
        )
        for f, c in m["bins"].items():
            bins[(f, t)] = list(c)
    pre = PreprocessorModel(
        schema=schema,
        meaningless=MeaninglessDictionary.from_values(
            doc["preprocessor"]["meaningless"]
        ),
        dropped_fields=frozenset(doc["preprocessor"]["dropped_fields"]),
        category_vocab={
            n: frozenset(v)
            for n, v in doc["preprocessor"]["category_vocab"].items()
        },
        bins=bins,
    )
    return ModelBundle(
        schema=schema,
        schema_hash=doc["schema_hash"],
        preprocessor=pre,
        models=models,
        train_config=TrainConfig.from_json_dict(doc["train_config"]),
        created_at=doc["created_at"],
        skipped_targets=list(doc["skipped_targets"]),
        warnings=list(doc["warnings"]),
        train_duration_s=doc.get("train_duration_s"),
    )


def bundle_json(bundle: ModelBundle) -> str:
    return json.dumps(bundle_to_dict(bundle), sort_keys=True, indent=2)


def save_bundle(bundle: ModelBundle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(bundle_json(bundle))


def load_bundle(path, expected_schema: FormSchema | None = None) -> ModelBundle:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read bundle {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"bundle {path} is not valid JSON: {exc}") from exc
    bundle = bundle_from_dict(doc)
    if expected_schema is not None and schema_fingerprint(expected_schema) != (
        bundle.schema_hash
    ):
        raise SchemaMismatch("bundle was trained against a different schema")
    return bundle
