"""Exception hierarchy for the sigverify package."""


class SigverifyError(Exception):
    """Base class for all operational errors raised by sigverify."""


class DatasetError(SigverifyError):
    """Malformed dataset file or invalid synthetic-data specification."""


class ProtocolError(SigverifyError):
    """A writer cannot satisfy the requested evaluation protocol split."""


class DispersionError(SigverifyError):
    """Dispersion estimate requested on fewer than two observations."""


class ModelError(SigverifyError):
    """Invalid interval-model construction parameters."""


class CalibrationError(SigverifyError):
    """Empty score sets or an otherwise impossible calibration request."""


class MetricError(SigverifyError):
    """FAR/FRR/EER requested on empty genuine or impostor score lists."""


class DimensionError(SigverifyError):
    """A vector does not match the dimensionality a model expects."""


class StoreError(SigverifyError):
    """Corrupted or schema-incompatible model store file."""
