"""Exception hierarchy shared by the library, the CLI and the HTTP surface"""


class ChiralWalkError(Exception):
    """Base class for all chiralwalk errors"""


class InvalidArgumentError(ChiralWalkError, ValueError):
    """Argument outside an operation's preconditions"""


class DimensionError(InvalidArgumentError):
    """Operands whose dimensions or site counts disagree"""


class ConfigurationError(ChiralWalkError, ValueError):
    """Bad experiment configuration or external data file"""


class NumericalError(ChiralWalkError, RuntimeError):
    """Eigensolver, integrator or conservation failure"""
