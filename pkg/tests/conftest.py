import pytest

from formrelax.dataset import FieldKind, FieldSpec, FormSchema, RawInstance, Dataset
from formrelax.preprocess import MeaninglessDictionary


def build_toy_schema() -> FormSchema:
    """Five-field business form: textual, numerical, two categoricals, textual."""
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
                categories=("Large enterprise", "NPO"),
            ),
            FieldSpec(
                "field_of_activity",
                FieldKind.CATEGORICAL,
                required=True,
                tab_index=3,
                group="business",
                categories=("Real estate", "Manufacturing", "Education"),
            ),
            FieldSpec("tax_id", FieldKind.TEXTUAL, required=True, tab_index=4),
        ),
        groups=(("business", ("company_type", "field_of_activity")),),
    )


@pytest.fixture
def toy_schema() -> FormSchema:
    return build_toy_schema()


@pytest.fixture
def toy_dictionary() -> MeaninglessDictionary:
    return MeaninglessDictionary.from_values(["@", "$", "n/a"])


def make_instance(values: dict[str, str], stamp: float) -> RawInstance:
    return RawInstance(values=values, submitted_at=stamp)


@pytest.fixture
def toy_dataset(toy_schema) -> Dataset:
    """Four submissions mirroring the historical table of the worked example."""
    rows = [
        (
            {
                "company_name": "UCI",
                "monthly_revenue": "20",
                "company_type": "Large enterprise",
                "field_of_activity": "Real estate",
                "tax_id": "T190",
            },
            20180101194321.0,
        ),
        (
            {
                "company_name": "KDL",
                "monthly_revenue": "21",
                "company_type": "Large enterprise",
                "field_of_activity": "Manufacturing",
                "tax_id": "T201",
            },
            20180101194723.0,
        ),
        (
            {
                "company_name": "EoP",
                "monthly_revenue": "@",
                "company_type": "Large enterprise",
                "field_of_activity": "Manufacturing",
                "tax_id": "T200",
            },
            20180101195500.0,
        ),
        (
            {
                "company_name": "UNI",
                "monthly_revenue": "39",
                "company_type": "NPO",
                "field_of_activity": "Education",
                "tax_id": "n/a",
            },
            20180102132016.0,
        ),
    ]
    return Dataset(
        schema=toy_schema,
        instances=tuple(make_instance(v, t) for v, t in rows),
    )
