"""Exception types shared across the package."""


class StrStudioError(Exception):
    """Base class for all package errors."""


class DataValidationError(StrStudioError):
    """A raw input file or record violates its contract.

    Carries an optional row number and field name so CLI/API layers can
    surface precise messages.
    """

    def __init__(self, message, row=None, field=None):
        self.row = row
        self.field = field
        prefix = ""
        if row is not None:
            prefix = f"row {row}: "
        if field is not None:
            prefix += f"field '{field}': "
        super().__init__(prefix + message)


class SchemaError(StrStudioError):
    """A feature schema is missing, inconsistent or mismatched."""


class ExcludedProductError(StrStudioError):
    """A product cannot yield an STR target (e.g. zero units received)."""

    def __init__(self, product_id, reason):
        self.product_id = product_id
        self.reason = reason
        super().__init__(f"product {product_id} excluded: {reason}")


class ModelFormatError(StrStudioError):
    """A persisted model file is corrupt or has an unsupported version."""


class TrainingError(StrStudioError):
    """Invalid training inputs (non-finite targets, empty folds, ...)."""
