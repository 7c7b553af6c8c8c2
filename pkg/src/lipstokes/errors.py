"""Exception hierarchy shared by the library and the command line."""


class LipStokesError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class UsageError(LipStokesError, ValueError):
    """An operation was called outside its domain (bad arity, degree, axis...)."""


class ConfigError(LipStokesError):
    """A scenario, chart or partition of unity is malformed."""

    exit_code = 2


class ParseError(ConfigError):
    """An expression string could not be parsed."""


class PartitionError(ConfigError):
    """The bump functions of an atlas do not form a partition of unity."""


class SupportLeakError(LipStokesError):
    """A form is nonzero on the outer faces of its declared support box."""

    exit_code = 3
