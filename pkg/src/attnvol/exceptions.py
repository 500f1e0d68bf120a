"""Exception hierarchy shared across the toolkit."""


class AttnvolError(Exception):
    """Base class for all toolkit errors."""


class DataError(AttnvolError):
    """Malformed or inconsistent input data."""


class CountryRejectedError(DataError):
    """A country's data fails a hard requirement and the whole country is dropped."""


class InsufficientDataError(AttnvolError):
    """Not enough usable observations for the requested computation."""


class CollinearityError(AttnvolError):
    """Design matrix is rank deficient."""

    def __init__(self, columns, message=None):
        self.columns = list(columns)
        super().__init__(message or f"collinear columns: {', '.join(self.columns)}")
