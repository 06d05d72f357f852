"""Exception types shared across the toolkit."""


class ParkwatchError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ParkwatchError):
    """A malformed input row. Carries the 1-based data row number."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MapDecodeError(ParkwatchError):
    """Preserve-map bitmap could not be decoded (unmapped color, duplicate name)."""


class SceneError(ParkwatchError):
    """Multispectral scene inputs are inconsistent (missing band, shape mismatch)."""


class DuplicateReadingError(ParkwatchError):
    """Duplicate (monitor, timestamp, chemical) rows in sensor data."""

    def __init__(self, duplicates):
        self.duplicates = list(duplicates)
        listing = ", ".join(f"(monitor {m}, {t}, {c})" for m, t, c in self.duplicates[:5])
        suffix = "" if len(self.duplicates) <= 5 else f" and {len(self.duplicates) - 5} more"
        super().__init__(f"duplicate sensor rows: {listing}{suffix}")


class UnmatchedWindError(ParkwatchError):
    """No wind sample within the allowed gap of a spike time."""


class ChartDataError(ParkwatchError):
    """Chart data does not match the shape required by its chart kind."""


class ConfigError(ParkwatchError):
    """Missing or inconsistent sidecar/pipeline configuration."""
