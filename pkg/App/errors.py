class CausaBoundError(Exception):
    """Base class for every error raised by the bounds library."""


class DomainError(CausaBoundError):
    """A probability or a (tau, rho) pair lies outside its valid range."""


class InfeasibleError(CausaBoundError):
    """A requested object does not exist for the given law."""


class InfeasibleSlackError(InfeasibleError):
    pass


class ConstructionInfeasibleError(InfeasibleError):
    pass


class NullEventError(CausaBoundError):
    """Conditioning on an event that has probability zero."""


class UnsupportedError(CausaBoundError):
    """The inputs fall outside the hypotheses of the requested analysis."""


class UndefinedSufficiencyError(UnsupportedError):
    pass


class StructuralError(CausaBoundError):
    """Chain and evidence shapes do not fit together."""


class PreconditionError(CausaBoundError):
    pass


class ConfigError(CausaBoundError):
    pass
