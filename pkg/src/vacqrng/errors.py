"""Exception types shared across the package.

The CLI maps these onto stable exit codes: usage/configuration problems
exit 1, data/calibration problems exit 2, I/O problems exit 3.
"""


class ConfigError(ValueError):
    """Bad configuration, CLI usage or extractor geometry (exit code 1)."""


class GeometryError(ConfigError):
    """Extractor block geometry is inconsistent with seed or rate."""


class CalibrationError(ValueError):
    """Measured data is inconsistent with the calibration model (exit code 2)."""


class FormatError(CalibrationError):
    """A data file is malformed or fails its format invariants."""


class InsufficientBitsError(CalibrationError):
    """A statistical test was given fewer bits than it requires."""
