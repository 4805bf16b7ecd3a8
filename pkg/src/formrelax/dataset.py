"""Form/data model, submission ingest, and the temporal train/tune/test split.

A form is described by a JSON schema file (fields with kinds, required flags,
tab order, optional groups).  Historical submissions arrive as a UTF-8 CSV
whose header maps 1:1 onto the schema field names plus one timestamp column;
empty cells are missing values.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path

from .errors import (
    EmptyDataset,
    MissingTimestamp,
    ParseError,
    SchemaInvalid,
    UnknownColumn,
)

DEFAULT_TIMESTAMP_COLUMN = "submitted_at"


class FieldKind(Enum):
    TEXTUAL = "textual"
    NUMERICAL = "numerical"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: FieldKind
    required: bool
    conditionally_required: bool = False
    tab_index: int = 0
    group: str | None = None
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.conditionally_required and not self.required:
            raise SchemaInvalid(
                f"field {self.name!r}: conditionally_required implies required"
            )
        if self.kind is FieldKind.CATEGORICAL and not self.categories:
            raise SchemaInvalid(f"categorical field {self.name!r} has no categories")
        if self.kind is not FieldKind.CATEGORICAL and self.categories:
            raise SchemaInvalid(f"non-categorical field {self.name!r} lists categories")


@dataclass(frozen=True)
class FormSchema:
    fields: tuple[FieldSpec, ...]
    groups: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def __post_init__(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SchemaInvalid("duplicate field names")
        tabs = [f.tab_index for f in self.fields]
        if len(set(tabs)) != len(tabs):
            raise SchemaInvalid("tab_index values must be unique")
        known = set(names)
        tab_pos = {f.name: f.tab_index for f in self.fields}
        for gid, members in self.groups:
            if not members:
                raise SchemaInvalid(f"group {gid!r} is empty")
            for m in members:
                if m not in known:
                    raise SchemaInvalid(f"group {gid!r} references unknown field {m!r}")
            # members must be contiguous in tab order and listed in that order
            positions = [tab_pos[m] for m in members]
            expected = sorted(tab_pos.values())
            lo = expected.index(min(positions))
            if positions != expected[lo : lo + len(positions)]:
                raise SchemaInvalid(f"group {gid!r} members not contiguous in tab order")

    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]

    def tab_order(self) -> list[str]:
        return [f.name for f in sorted(self.fields, key=lambda f: f.tab_index)]

    def by_name(self, name: str) -> FieldSpec:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def required_fields(self) -> list[str]:
        return [f.name for f in self.fields if f.required]

    def group_of(self, name: str) -> str | None:
        for gid, members in self.groups:
            if name in members:
                return gid
        return None

    def to_json_dict(self) -> dict:
        return {
            "fields": [
                {
                    "name": f.name,
                    "kind": f.kind.value,
                    "required": f.required,
                    "conditionally_required": f.conditionally_required,
                    "tab_index": f.tab_index,
                    **({"group": f.group} if f.group is not None else {}),
                    **(
                        {"categories": list(f.categories)}
                        if f.kind is FieldKind.CATEGORICAL
                        else {}
                    ),
                }
                for f in self.fields
            ],
            "groups": [{"id": gid, "members": list(ms)} for gid, ms in self.groups],
        }


@dataclass(frozen=True)
class RawInstance:
    """One submitted form: field name -> raw string; absent key = missing."""

    values: dict[str, str]
    submitted_at: float


@dataclass(frozen=True)
class Dataset:
    schema: FormSchema
    instances: tuple[RawInstance, ...]

    def __len__(self) -> int:
        return len(self.instances)


def schema_from_dict(doc: dict) -> FormSchema:
    try:
        raw_fields = doc["fields"]
    except (KeyError, TypeError):
        raise SchemaInvalid("schema document has no 'fields' list")
    fields = []
    for i, rf in enumerate(raw_fields):
        try:
            kind = FieldKind(rf["kind"].lower())
        except (KeyError, ValueError, AttributeError):
            raise SchemaInvalid(f"field #{i}: unknown kind {rf.get('kind')!r}")
        fields.append(
            FieldSpec(
                name=rf["name"],
                kind=kind,
                required=bool(rf.get("required", False)),
                conditionally_required=bool(rf.get("conditionally_required", False)),
                tab_index=int(rf.get("tab_index", i)),
                group=rf.get("group"),
                categories=tuple(rf.get("categories", ())),
            )
        )
    groups = tuple(
        (g["id"], tuple(g["members"])) for g in doc.get("groups", ())
    )
    return FormSchema(fields=tuple(fields), groups=groups)


def load_schema(path: str | Path) -> FormSchema:
    """Read and validate a schema JSON file."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read schema file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"schema file {path} is not valid JSON: {exc}") from exc
    return schema_from_dict(doc)


def serialize_schema(schema: FormSchema) -> str:
    """Canonical JSON form; round-trips through ``schema_from_dict``."""
    return json.dumps(schema.to_json_dict(), sort_keys=True, indent=2)


def parse_timestamp(raw: str) -> float:
    """Accepts compact numeric stamps (e.g. 20180101194321) or ISO 8601."""
    text = raw.strip()
    if not text:
        raise MissingTimestamp("empty timestamp value")
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text).timestamp()
    except ValueError as exc:
        raise ParseError(f"unparseable timestamp {raw!r}") from exc


def load_instances(
    path: str | Path,
    schema: FormSchema,
    timestamp_column: str = DEFAULT_TIMESTAMP_COLUMN,
) -> Dataset:
    """Load a submissions CSV; one RawInstance per row, empty cells missing."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file, header row required")
            rows = list(reader)
    except OSError as exc:
        raise ParseError(f"cannot read data file {path}: {exc}") from exc
    return instances_from_rows(header, rows, schema, timestamp_column)


def instances_from_rows(
    header: list[str],
    rows: list[list[str]],
    schema: FormSchema,
    timestamp_column: str = DEFAULT_TIMESTAMP_COLUMN,
) -> Dataset:
    names = set(schema.field_names())
    if timestamp_column not in header:
        raise MissingTimestamp(f"no {timestamp_column!r} column in header")
    for col in header:
        if col != timestamp_column and col not in names:
            raise UnknownColumn(f"column {col!r} is not a schema field")
    missing = names - set(header)
    if missing:
        raise ParseError(f"columns missing for schema fields: {sorted(missing)}")

    ts_idx = header.index(timestamp_column)
    instances = []
    for rownum, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ParseError(f"row {rownum}: expected {len(header)} cells, got {len(row)}")
        values = {
            col: cell
            for col, cell in zip(header, row)
            if col != timestamp_column and cell != ""
        }
        instances.append(
            RawInstance(values=values, submitted_at=parse_timestamp(row[ts_idx]))
        )
    return Dataset(schema=schema, instances=tuple(instances))


def temporal_split(
    dataset: Dataset, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
) -> tuple[Dataset, Dataset, Dataset]:
    """Sort by submission time (stable) and split by cumulative count.

    The first two parts take floor(n * ratio) instances each; the remainder
    goes to the third part.
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot split an empty dataset")
    if any(r <= 0 for r in ratios) or not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValueError(f"ratios must be positive and sum to 1, got {ratios}")
    ordered = sorted(dataset.instances, key=lambda ins: ins.submitted_at)
    n = len(ordered)
    n_train = math.floor(n * ratios[0])
    n_tune = math.floor(n * ratios[1])
    parts = (
        ordered[:n_train],
        ordered[n_train : n_train + n_tune],
        ordered[n_train + n_tune :],
    )
    return tuple(Dataset(schema=dataset.schema, instances=tuple(p)) for p in parts)
