from django.core.exceptions import ValidationError


class DomainError(ValidationError):
    """A parameter lies outside the physical or mathematical domain of an operation."""


class ContractError(ValidationError):
    """The inputs are individually valid but do not fit the shape an operation expects."""


class PermutationCapExceeded(Exception):
    """The exhaustive assignment search would enumerate more permutations than allowed."""

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(
            f"Permutation search needs {count} evaluations per sample, cap is {cap}")


class UnknownNameError(ContractError):
    """A preset or strategy name does not resolve."""

    def __init__(self, kind, name, valid):
        self.valid = tuple(valid)
        super().__init__(f"Unknown {kind} '{name}'. Valid names: {', '.join(self.valid)}")
