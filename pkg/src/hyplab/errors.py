"""Exception hierarchy.

Validation errors mean the caller asked for something outside an operation's
domain; solver errors mean a numerical construction did not succeed.  The CLI
maps them to exit codes 2 and 3.
"""


class HyplabError(Exception):
    pass


class ValidationError(HyplabError, ValueError):
    pass


class SolverError(HyplabError, RuntimeError):
    pass


# torus geometry
class NormTooLarge(ValidationError):
    pass


class TooFarApart(ValidationError):
    pass


# family
class NoConvergence(SolverError):
    pass


# hyperbolicity
class DepthInsufficient(SolverError):
    pass


class NotHyperbolic(SolverError):
    pass


# manifolds
class EpsilonTooLarge(SolverError):
    pass


class NotOnManifold(ValidationError):
    pass


# bracket
class NoIntersection(SolverError):
    pass


class CalibrationFailed(SolverError):
    pass


# shadowing
class JumpTooLarge(ValidationError):
    def __init__(self, index, measured):
        super().__init__(f"jump at index {index} is {measured!r}")
        self.index = index
        self.measured = measured


class ParamsInfeasible(ValidationError):
    pass


class InvalidGap(ValidationError):
    pass


class NotLinear(ValidationError):
    pass


class BracketFailed(SolverError):
    def __init__(self, k, reason=""):
        super().__init__(f"bracket step {k} failed" + (f": {reason}" if reason else ""))
        self.k = k


class BetaExceeded(SolverError):
    def __init__(self, max_error):
        super().__init__(f"shadowing error {max_error!r} is not below beta")
        self.max_error = max_error


# markov
class SymbolMismatch(ValidationError):
    pass


class RefinementExplosion(SolverError):
    pass


class BudgetExceeded(SolverError):
    pass


class ConfigError(ValidationError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
