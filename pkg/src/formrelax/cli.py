"""Command-line surface: train, evaluate, predict, serve, synth.

Exit codes: 0 success, 2 usage error (argparse), 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .dataset import (
    DEFAULT_TIMESTAMP_COLUMN,
    load_instances,
    load_schema,
    serialize_schema,
    temporal_split,
)
from .errors import FormRelaxError
from .evaluate import FillMode, ScenarioConfig, run_experiment
from .pipeline import (
    DISCRETIZER_GLOBAL,
    DISCRETIZER_SUPERVISED,
    TrainConfig,
    load_bundle,
    save_bundle,
    train_bundle,
)
from .preprocess import MeaninglessDictionary
from .relax import PartialForm, predict_all, predict_requirement
from .smote import SmoteConfig
from .bn import StructureSearchConfig


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated ratios")
    return tuple(parts)  # type: ignore[return-value]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formrelax",
        description="Learn and serve required-field relaxation decisions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train models and write a bundle")
    p_train.add_argument("--data", required=True, help="submissions CSV")
    p_train.add_argument("--schema", required=True, help="form schema JSON")
    p_train.add_argument("--dict", required=True, help="meaningless-values file")
    p_train.add_argument("--out", required=True, help="bundle output path")
    p_train.add_argument("--no-smote", action="store_true")
    p_train.add_argument("--no-endorser", action="store_true")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--ratios", type=_parse_ratios, default=(0.8, 0.1, 0.1))
    p_train.add_argument("--timestamp-col", default=DEFAULT_TIMESTAMP_COLUMN)
    p_train.add_argument(
        "--discretizer",
        choices=[DISCRETIZER_SUPERVISED, DISCRETIZER_GLOBAL],
        default=DISCRETIZER_SUPERVISED,
    )
    p_train.add_argument("--max-parents", type=int, default=4)
    p_train.add_argument("--restarts", type=int, default=3)
    p_train.add_argument("--laplace-alpha", type=float, default=1.0)

    p_eval = sub.add_parser("evaluate", help="score a bundle on held-out data")
    p_eval.add_argument("--bundle", required=True)
    p_eval.add_argument("--data", required=True, help="submissions CSV")
    p_eval.add_argument(
        "--scenario",
        required=True,
        choices=[m.value for m in FillMode],
    )
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument(
        "--split",
        choices=["test", "all"],
        default="test",
        help="evaluate on the temporal test slice (default) or the whole file",
    )
    p_eval.add_argument("--timestamp-col", default=DEFAULT_TIMESTAMP_COLUMN)
    p_eval.add_argument("--json-out", help="also write the report as JSON")

    p_pred = sub.add_parser("predict", help="one-shot prediction from a bundle")
    p_pred.add_argument("--bundle", required=True)
    p_pred.add_argument("--filled", required=True, help="JSON object of field values")
    p_pred.add_argument("--target", help="target field (default: all unfilled)")

    p_serve = sub.add_parser("serve", help="run the HTTP prediction service")
    p_serve.add_argument("--bundle", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--timeout", type=float, default=5.0)
    p_serve.add_argument("--log-level", default="info")
    p_serve.add_argument(
        "--cors", default="*", help="comma-separated allowed origins"
    )

    p_synth = sub.add_parser("synth", help="write the planted-rule fixture files")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--rows", type=int, default=10_000)
    p_synth.add_argument("--seed", type=int, default=7)

    return parser


def _cmd_train(args) -> int:
    schema = load_schema(args.schema)
    dictionary = MeaninglessDictionary.from_file(args.dict)
    dataset = load_instances(args.data, schema, timestamp_column=args.timestamp_col)
    train, tune, _test = temporal_split(dataset, args.ratios)
    cfg = TrainConfig(
        smote=SmoteConfig(seed=args.seed),
        structure=StructureSearchConfig(
            seed=args.seed, max_parents=args.max_parents, restarts=args.restarts
        ),
        laplace_alpha=args.laplace_alpha,
        discretizer=args.discretizer,
        enable_smote=not args.no_smote,
        enable_endorser=not args.no_endorser,
        ratios=args.ratios,
        seed=args.seed,
    )
    started = time.perf_counter()
    bundle = train_bundle(train, tune, dictionary, cfg)
    save_bundle(bundle, args.out)
    duration = time.perf_counter() - started
    print(
        f"trained {len(bundle.models)} model(s) "
        f"({len(bundle.skipped_targets)} target(s) skipped) in {duration:.2f}s"
    )
    print(f"bundle written to {args.out}")
    for w in bundle.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _cmd_evaluate(args) -> int:
    bundle = load_bundle(args.bundle)
    dataset = load_instances(
        args.data, bundle.schema, timestamp_column=args.timestamp_col
    )
    if args.split == "test":
        _train, _tune, dataset = temporal_split(dataset, bundle.train_config.ratios)
    scenario = ScenarioConfig(mode=FillMode(args.scenario), seed=args.seed)
    report = run_experiment(bundle, dataset, scenario)
    print(report.format_table())
    payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    if args.json_out:
        Path(args.json_out).write_text(payload, encoding="utf-8")
        print(f"report written to {args.json_out}")
    else:
        print(payload)
    return 0


def _cmd_predict(args) -> int:
    bundle = load_bundle(args.bundle)
    try:
        filled = json.loads(args.filled)
    except json.JSONDecodeError as exc:
        raise FormRelaxError(f"--filled is not valid JSON: {exc}") from exc
    if not isinstance(filled, dict):
        raise FormRelaxError("--filled must be a JSON object")
    unknown = set(filled) - set(bundle.schema.field_names())
    if unknown:
        raise FormRelaxError(f"--filled names unknown fields: {sorted(unknown)}")
    form = PartialForm(filled={str(k): str(v) for k, v in filled.items()})
    if args.target:
        decisions = [predict_requirement(bundle, form, args.target)]
    else:
        decisions = predict_all(bundle, form)
    print(
        json.dumps(
            [
                {
                    "target": d.target,
                    "class": d.predicted_class.lower(),
                    "probability": d.probability,
                    "endorsed": d.endorsed,
                    "final_required": d.final_required,
                    "latency_ms": d.latency_s * 1e3,
                }
                for d in decisions
            ],
            indent=2,
        )
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        bundle_path=args.bundle,
        host=args.host,
        port=args.port,
        request_timeout_s=args.timeout,
        log_level=args.log_level,
        cors_origins=tuple(o.strip() for o in args.cors.split(",") if o.strip()),
    )
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level=config.log_level)
    return 0


def _cmd_synth(args) -> int:
    from .synthetic import (
        MEANINGLESS_VALUES,
        planted_dataset,
        planted_schema,
        write_dataset_csv,
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schema.json").write_text(
        serialize_schema(planted_schema()), encoding="utf-8"
    )
    (out / "meaningless.txt").write_text(
        "# placeholder values users type to skip a field\n"
        + "\n".join(MEANINGLESS_VALUES)
        + "\n",
        encoding="utf-8",
    )
    dataset = planted_dataset(n=args.rows, seed=args.seed)
    write_dataset_csv(dataset, out / "data.csv")
    print(f"wrote schema.json, meaningless.txt, data.csv ({args.rows} rows) to {out}")
    return 0


COMMANDS = {
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "serve": _cmd_serve,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FormRelaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
