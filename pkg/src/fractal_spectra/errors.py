"""Exception hierarchy shared by all modules."""


class FractalSpectraError(Exception):
    pass


class DomainError(FractalSpectraError, ValueError):
    """An argument lies outside the set where the quantity is defined."""


class MalformedWordError(DomainError):
    pass


class MalformedIntervalError(DomainError):
    pass


class UndefinedError(DomainError):
    pass


class InvalidModelError(FractalSpectraError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(v.message for v in self.violations) or "invalid model"
        super().__init__(msg)


class ResourceError(FractalSpectraError, RuntimeError):
    """A computation hit its safety cap. ``partial`` carries the best result so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
