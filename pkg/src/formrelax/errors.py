"""Exception types shared across the package."""


class FormRelaxError(Exception):
    """Base class for all package errors."""


class ParseError(FormRelaxError):
    """Input file could not be parsed."""


class SchemaInvalid(FormRelaxError):
    """Schema violates a structural constraint (duplicate names, bad groups, ...)."""


class UnknownColumn(FormRelaxError):
    """CSV column does not correspond to any schema field."""


class MissingTimestamp(FormRelaxError):
    """CSV lacks the submission-timestamp column, or a row has no timestamp."""


class EmptyDataset(FormRelaxError):
    """Operation requires at least one instance."""


class EmptyData(FormRelaxError):
    """Network operation requires non-empty training data."""


class LayoutMismatch(FormRelaxError):
    """Two encoded instances do not share the same feature layout."""


class TargetConstant(FormRelaxError):
    """Per-target dataset has a single class; no model can be trained."""


class JointTooLarge(FormRelaxError):
    """Full-joint enumeration would exceed the configured state limit."""


class SchemaMismatch(FormRelaxError):
    """Bundle was trained against a different schema."""


class UnknownTarget(FormRelaxError):
    """Requested target field does not exist in the schema."""
