"""Exception hierarchy shared by all pfmlab modules.

``ValidationError`` subclasses map to CLI exit code 2 (bad inputs or
configuration); everything else under ``PfmlabError`` maps to exit code 1.
"""


class PfmlabError(Exception):
    """Base class for all pfmlab errors."""


class ValidationError(PfmlabError):
    """Invalid input data or configuration."""


# taste space

class UnknownIngredient(ValidationError):
    pass


class MissingIngredientVector(ValidationError):
    pass


class StructureViolation(ValidationError):
    pass


# lifelog generation

class InvalidProfile(ValidationError):
    pass


class EmptyCandidateSet(PfmlabError):
    pass


# event mining

class EmptyStream(PfmlabError):
    pass


class MissingConfounder(ValidationError):
    pass


class NoOccurrences(PfmlabError):
    pass


# preference model

class NoTrainingData(PfmlabError):
    pass


class InsufficientData(PfmlabError):
    pass


# personal vectors

class UnknownPerson(ValidationError):
    pass


# counterfactual ranking

class AllOptionsRestricted(PfmlabError):
    pass


class EmptyOptions(PfmlabError):
    pass


class DuplicateKey(ValidationError):
    pass


class UnknownCategory(ValidationError):
    pass
