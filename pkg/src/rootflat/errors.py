"""Exception types shared across the package."""


class RootFlatError(Exception):
    """Base class for errors raised by rootflat."""


class BoundaryObstruction(RootFlatError, ValueError):
    """Raised when the prefix-count construction is asked for m < 7.

    Every color needs at least one 0-symbol in its return word for the
    first prefix coordinate to cycle, but a schedule of m layers only has
    m such symbols to hand out among seven colors.
    """

    def __init__(self, m: int):
        self.m = m
        super().__init__(
            f"m={m}: the prefix-count family needs N_0 >= 1 for all 7 colors, "
            f"but only {m} zero-symbols exist across {m} layers (boundary obstruction); "
            "use a finite root-flat certificate for m in {3, 5}"
        )


class CertificateFormatError(RootFlatError, ValueError):
    """Malformed certificate file. ``where`` is a line number or byte offset."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class CertificateRejected(RootFlatError):
    """A well-formed certificate that fails one of C1-C3."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)
