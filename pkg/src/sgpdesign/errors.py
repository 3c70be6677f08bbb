"""Exception types raised across the package."""


class DesignError(Exception):
    """Base class for all package errors."""


class NotStronglyConnected(DesignError):
    pass


class Disconnected(DesignError):
    def __init__(self, message, components=None):
        super().__init__(message)
        self.components = components or []


class AddsExhausted(DesignError):
    """Fewer candidate edges were available than requested."""

    def __init__(self, requested, added):
        super().__init__(f"requested {requested} extra edges but only {added} candidates exist")
        self.requested = requested
        self.added = added


class TooLarge(DesignError):
    pass


class AsymmetricInput(DesignError):
    pass


class InvalidPartition(DesignError):
    pass


class NonCompliantLink(DesignError):
    pass


class Diverged(DesignError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(DesignError):
    pass
