from .errors import (
    CausaBoundError,
    ConfigError,
    DomainError,
    InfeasibleError,
    NullEventError,
    PreconditionError,
    StructuralError,
    UnsupportedError,
)
