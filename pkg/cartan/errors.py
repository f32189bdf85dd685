"""Error taxonomy for the engine. `exit_code` is what the CLI exits with."""


class EntangleError(Exception):
    exit_code = 2


# Residue arithmetic

class NotAUnit(EntangleError):
    pass


class EvenModulus(EntangleError):
    pass


class ModulusMismatch(EntangleError):
    pass


class NotADivisor(EntangleError):
    pass


class NotPrime(EntangleError):
    pass


class ModulusOutOfRange(EntangleError, ValueError):
    pass


# Orders

class NotFundamental(EntangleError):
    pass


class BadConductor(EntangleError):
    pass


class NotImaginary(EntangleError):
    pass


# Groups

class MalformedMatrix(EntangleError):
    pass


class NonInvertibleGenerator(EntangleError):
    pass


class ClosureBudgetExceeded(EntangleError):
    exit_code = 3


class ElementNotInGroup(EntangleError):
    pass


# Towers and lifts

class MissingLevel(EntangleError):
    pass


class TowerNotCompatible(EntangleError):
    pass


class EmptyFiber(EntangleError):
    pass


class LiftNotWellDefined(EntangleError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
