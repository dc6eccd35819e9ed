"""Exception hierarchy shared by all reductminer modules."""


class ReductMinerError(Exception):
    """Base class for every error raised by this package."""


class DatasetError(ReductMinerError, ValueError):
    """Malformed or unusable input data (bad rows, empty universe, bad schema)."""


class UnknownAttribute(ReductMinerError, KeyError):
    """An attribute name or index the information system does not hold."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UniverseTooLarge(ReductMinerError):
    """The explicit discernibility matrix was requested for too many rows."""


class RuleError(ReductMinerError, ValueError):
    """Invalid rule, condition, or rule file."""
