"""Exception hierarchy shared by all modules."""


class SymmetraError(Exception):
    pass


class NotHermitian(SymmetraError, ValueError):
    pass


class NoConvergence(SymmetraError, RuntimeError):
    pass


class NotUnitary(SymmetraError, ValueError):
    pass


class OrderExceeded(SymmetraError, RuntimeError):
    pass


class TooLarge(SymmetraError, ValueError):
    pass


class ProjectivePhases(SymmetraError, ValueError):
    """The representation is only projective on the requested subgroup."""


class TooManySections(SymmetraError, ValueError):
    pass


class NoPartition(SymmetraError, RuntimeError):
    pass


class NotUniform(SymmetraError, ValueError):
    pass


class NotUniformOrRigid(SymmetraError, ValueError):
    pass


class NotSymmetric(SymmetraError, ValueError):
    pass


class InfeasibleCertificate(SymmetraError, RuntimeError):
    pass


class EtaOutOfRange(SymmetraError, ValueError):
    pass


class NotPrime(SymmetraError, ValueError):
    pass


class EvenCharacteristic(SymmetraError, ValueError):
    pass


class SchemaMismatch(SymmetraError, ValueError):
    pass


class InvariantViolation(SymmetraError, ValueError):
    pass
