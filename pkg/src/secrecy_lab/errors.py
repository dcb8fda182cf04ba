class ConfigurationError(ValueError):
    """Invalid model, distribution or experiment parameters."""


class UsageError(ValueError):
    """An operation was called outside its preconditions."""


class UnreachableThresholdError(RuntimeError):
    """A rate threshold that the accumulated main-channel information can never cross."""


class ConfigurationWarning(UserWarning):
    pass
