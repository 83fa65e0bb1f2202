"""Shared exception types."""


class CapacityError(RuntimeError):
    """A computation was refused because it exceeds a stated resource bound.

    Capacity limits never masquerade as mathematical refutation; callers
    translate this into an 'inconclusive' verdict where relevant.
    """


class DomainNotPreservedError(ValueError):
    """A map does not permute the chosen vector domain."""


class GeneratorFileError(ValueError):
    """A generator file failed to parse."""


class InvalidGeneratorError(ValueError):
    """A parsed generator is unusable (singular matrix, wrong dimension...)."""


class OrderMismatchError(ValueError):
    """An imported group's verified order differs from the declared one."""
