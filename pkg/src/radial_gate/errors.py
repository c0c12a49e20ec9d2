"""Exception types. Each carries the CLI exit code it maps to."""


class RadialGateError(Exception):
    exit_code = 1


class DomainError(RadialGateError, ValueError):
    exit_code = 7


class IrregularPotential(RadialGateError, ValueError):
    exit_code = 3


class NonConvergent(RadialGateError, ArithmeticError):
    exit_code = 4


class NoBracket(RadialGateError, ArithmeticError):
    exit_code = 5


class StiffnessFailure(RadialGateError, ArithmeticError):
    exit_code = 6


class AcceptableBranch(RadialGateError, ValueError):
    exit_code = 7


class UnreducibleWeight(RadialGateError, ValueError):
    exit_code = 7


class InsufficientDerivativeOrder(RadialGateError, ValueError):
    exit_code = 7


class IllConditionedBasis(RadialGateError, ArithmeticError):
    exit_code = 8


class VerificationFailed(RadialGateError):
    exit_code = 9
