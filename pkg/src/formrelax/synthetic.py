"""Synthetic fixtures: a planted-rule business form and a wide stress form.

The planted-rule generator reproduces the energy-provider scenario: five
fields, all required, where Tax ID is skipped or padded with a placeholder
exactly when the company is an NPO working in charity or education.  A small
fraction of those rows still carries a real value (exemption holders that do
have an ID), which acts as label noise.
"""

from __future__ import annotations

import numpy as np

from .dataset import (
    Dataset,
    FieldKind,
    FieldSpec,
    FormSchema,
    RawInstance,
)
from .preprocess import MeaninglessDictionary

MEANINGLESS_VALUES = ("@", "$", "n/a", "-1", "none")

COMPANY_TYPES = ("Large enterprise", "SME", "NPO")
ACTIVITIES = ("Real estate", "Manufacturing", "Charity", "Education")
RELAXING_ACTIVITIES = ("Charity", "Education")


def planted_schema() -> FormSchema:
    return FormSchema(
        fields=(
            FieldSpec("company_name", FieldKind.TEXTUAL, required=True, tab_index=0),
            FieldSpec("monthly_revenue", FieldKind.NUMERICAL, required=True, tab_index=1),
            FieldSpec(
                "company_type",
                FieldKind.CATEGORICAL,
                required=True,
                tab_index=2,
                group="business",
                categories=COMPANY_TYPES,
            ),
            FieldSpec(
                "field_of_activity",
                FieldKind.CATEGORICAL,
                required=True,
                conditionally_required=False,
                tab_index=3,
                group="business",
                categories=ACTIVITIES,
            ),
            FieldSpec(
                "tax_id",
                FieldKind.TEXTUAL,
                required=True,
                conditionally_required=True,
                tab_index=4,
            ),
        ),
        groups=(("business", ("company_type", "field_of_activity")),),
    )


def planted_dictionary() -> MeaninglessDictionary:
    return MeaninglessDictionary.from_values(MEANINGLESS_VALUES)


def rule_applies(company_type: str, activity: str) -> bool:
    return company_type == "NPO" and activity in RELAXING_ACTIVITIES


def planted_dataset(
    n: int = 10_000, seed: int = 7, noise: float = 0.05
) -> Dataset:
    """n submissions whose Tax ID follows the planted relaxation rule.

    When the rule applies the field holds a placeholder or is left empty;
    with probability ``noise`` it carries a valid value anyway.
    """
    schema = planted_schema()
    rng = np.random.default_rng(seed)
    instances = []
    for i in range(n):
        ctype = COMPANY_TYPES[rng.integers(0, len(COMPANY_TYPES))]
        activity = ACTIVITIES[rng.integers(0, len(ACTIVITIES))]
        revenue = float(np.round(rng.lognormal(3.0, 0.8), 1))
        values = {
            "company_name": f"Company {i:06d}",
            "monthly_revenue": f"{revenue}",
            "company_type": ctype,
            "field_of_activity": activity,
        }
        if rule_applies(ctype, activity) and rng.random() >= noise:
            roll = rng.random()
            if roll < 0.5:
                values["tax_id"] = MEANINGLESS_VALUES[
                    rng.integers(0, len(MEANINGLESS_VALUES))
                ]
            # else: left empty (missing)
        else:
            values["tax_id"] = f"T{rng.integers(100000, 999999)}"
        instances.append(
            RawInstance(values=values, submitted_at=float(1_500_000_000 + i * 60))
        )
    return Dataset(schema=schema, instances=tuple(instances))


def wide_schema(n_fields: int = 30) -> FormSchema:
    """Stress schema: many categorical fields plus a few relaxable targets."""
    fields = []
    for i in range(n_fields - 2):
        fields.append(
            FieldSpec(
                f"attr_{i:02d}",
                FieldKind.CATEGORICAL,
                required=(i % 2 == 0),
                tab_index=i,
                categories=("alpha", "beta", "gamma"),
            )
        )
    fields.append(
        FieldSpec(
            "detail_a", FieldKind.TEXTUAL, required=True, tab_index=n_fields - 2
        )
    )
    fields.append(
        FieldSpec(
            "detail_b", FieldKind.TEXTUAL, required=True, tab_index=n_fields - 1
        )
    )
    return FormSchema(fields=tuple(fields))


def wide_dataset(n: int = 1_200, n_fields: int = 30, seed: int = 11) -> Dataset:
    """Wide-form submissions where the two detail fields are skipped based on
    a couple of the categorical attributes."""
    schema = wide_schema(n_fields)
    rng = np.random.default_rng(seed)
    cat_names = [f.name for f in schema.fields if f.kind is FieldKind.CATEGORICAL]
    instances = []
    for i in range(n):
        values = {}
        for name in cat_names:
            values[name] = ("alpha", "beta", "gamma")[rng.integers(0, 3)]
        if values["attr_00"] == "alpha" and rng.random() > 0.05:
            pass  # detail_a skipped
        else:
            values["detail_a"] = f"A{i}"
        if values["attr_02"] == "gamma" and values["attr_04"] != "beta":
            values["detail_b"] = "n/a"
        else:
            values["detail_b"] = f"B{i}"
        instances.append(
            RawInstance(values=values, submitted_at=float(1_600_000_000 + i))
        )
    return Dataset(schema=schema, instances=tuple(instances))


def dataset_to_csv_rows(
    dataset: Dataset, timestamp_column: str = "submitted_at"
) -> tuple[list[str], list[list[str]]]:
    header = dataset.schema.field_names() + [timestamp_column]
    rows = []
    for ins in dataset.instances:
        row = [ins.values.get(name, "") for name in dataset.schema.field_names()]
        stamp = ins.submitted_at
        row.append(str(int(stamp)) if float(stamp).is_integer() else str(stamp))
        rows.append(row)
    return header, rows


def write_dataset_csv(dataset: Dataset, path, timestamp_column="submitted_at"):
    import csv

    header, rows = dataset_to_csv_rows(dataset, timestamp_column)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
