"""Live relaxation decisions for a partially filled form.

Given the filled fields, the target's network infers a posterior over
Required/Optional; an Optional top prediction is endorsed only when its
probability reaches the target's tuned threshold, otherwise the field stays
required.  Required predictions are never second-guessed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import UnknownTarget
from .pipeline import ModelBundle, endorsed_prediction, evidence_for
from .preprocess import OPTIONAL_LABEL, REQUIRED_LABEL, transform_partial

from .bn import infer


@dataclass(frozen=True)
class PartialForm:
    filled: dict[str, str]
    timestamp: float | None = None


@dataclass(frozen=True)
class Decision:
    target: str
    predicted_class: str  # "Required" or "Optional"
    probability: float  # of the predicted class
    theta_used: float
    endorsed: bool
    final_required: bool
    latency_s: float
    flag: str | None = None

    def __post_init__(self):
        relaxed = (
            self.predicted_class == OPTIONAL_LABEL
            and self.probability >= self.theta_used
        )
        if (not self.final_required) != relaxed:
            raise AssertionError("decision violates the relaxation invariant")
        if not 0.0 <= self.probability <= 1.0:
            raise AssertionError("probability out of range")


def predict_requirement(
    bundle: ModelBundle, form: PartialForm, target: str
) -> Decision:
    """Endorsed required/optional verdict for one unfilled target."""
    if target not in set(bundle.schema.field_names()):
        raise UnknownTarget(target)
    if target in form.filled:
        raise ValueError(f"target {target!r} is already filled")
    started = time.perf_counter()
    model = bundle.models.get(target)
    if model is None:
        return Decision(
            target=target,
            predicted_class=REQUIRED_LABEL,
            probability=1.0,
            theta_used=0.0,
            endorsed=False,
            final_required=True,
            latency_s=time.perf_counter() - started,
            flag="no_model",
        )
    instance = transform_partial(bundle.preprocessor, dict(form.filled), target)
    evidence = evidence_for(model.net, instance.values)
    posterior = infer(model.net, evidence, target)
    p_opt = posterior.prob_of(OPTIONAL_LABEL)
    predicted = endorsed_prediction(p_opt, theta=0.0)  # top class, no gate yet
    if predicted == OPTIONAL_LABEL:
        endorsed = p_opt >= model.theta
        return Decision(
            target=target,
            predicted_class=OPTIONAL_LABEL,
            probability=p_opt,
            theta_used=model.theta,
            endorsed=endorsed,
            final_required=not endorsed,
            latency_s=time.perf_counter() - started,
            flag="zero_evidence" if posterior.zero_evidence else None,
        )
    return Decision(
        target=target,
        predicted_class=REQUIRED_LABEL,
        probability=1.0 - p_opt,
        theta_used=model.theta,
        endorsed=False,
        final_required=True,
        latency_s=time.perf_counter() - started,
        flag="zero_evidence" if posterior.zero_evidence else None,
    )


def predict_all(bundle: ModelBundle, form: PartialForm) -> list[Decision]:
    """Decisions for every modeled target not yet filled, in tab order."""
    return [
        predict_requirement(bundle, form, target)
        for target in bundle.schema.tab_order()
        if target in bundle.models and target not in form.filled
    ]
