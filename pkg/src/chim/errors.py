"""Exception types shared across the toolkit."""


class ChimError(Exception):
    """Base class for all toolkit errors."""


class DatasetFormatError(ChimError):
    """The file is not a valid dataset (bad magic, malformed structure)."""


class DatasetVersionError(DatasetFormatError):
    """The dataset declares a format version this build does not read."""


class DatasetCorruptionError(DatasetFormatError):
    """Structurally valid header, but the payload does not match it."""


class EmptyDatasetError(ChimError):
    """An ingestion produced no samples at all."""


class ProfileError(ChimError):
    """A tap profile file or definition is invalid."""
