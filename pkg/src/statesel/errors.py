"""Exception types shared across the package."""


class DatasetError(ValueError):
    """Raised when a dataset, manifest, or data file violates the format contract."""


class DuplicateChannel(DatasetError):
    """Raised when a manifest declares the same channel name twice."""


class DegenerateSnapshots(RuntimeError):
    """Raised when a snapshot matrix is identically zero or truncates to rank 0."""


class MergedPoolTooLarge(RuntimeError):
    """Raised when the merged candidate pool exceeds the exhaustive-sweep limit."""
