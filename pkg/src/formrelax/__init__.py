"""Adaptive completeness-requirement relaxation for data entry forms.

Learns from historical submissions when a required field should be relaxed
to optional, and serves those decisions live while a form is being filled.
"""

from .dataset import (
    Dataset,
    FieldKind,
    FieldSpec,
    FormSchema,
    RawInstance,
    load_instances,
    load_schema,
    temporal_split,
)
from .pipeline import (
    ModelBundle,
    TargetModel,
    TrainConfig,
    load_bundle,
    save_bundle,
    train_bundle,
)
from .preprocess import MeaninglessDictionary, PreprocessorModel
from .relax import Decision, PartialForm, predict_all, predict_requirement

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Decision",
    "FieldKind",
    "FieldSpec",
    "FormSchema",
    "MeaninglessDictionary",
    "ModelBundle",
    "PartialForm",
    "PreprocessorModel",
    "RawInstance",
    "TargetModel",
    "TrainConfig",
    "load_bundle",
    "load_instances",
    "load_schema",
    "predict_all",
    "predict_requirement",
    "save_bundle",
    "temporal_split",
    "train_bundle",
]
