"""Exception hierarchy.

Every failure mode a caller may want to branch on has its own class; all
derive from :class:`ShearlabError` so a driver can catch them in one place.
"""


class ShearlabError(Exception):
    pass


class ConfigError(ShearlabError, ValueError):
    pass


class ProfileError(ShearlabError, ValueError):
    pass


class NoCriticalPoint(ProfileError):
    pass


class MultipleCriticalPoints(ProfileError):
    pass


class DegenerateCritical(ProfileError):
    pass


class NoAdmissibleDelta0(ProfileError):
    pass


class SingularSystem(ShearlabError, ArithmeticError):
    pass


class PossibleEigenvalue(SingularSystem):
    def __init__(self, lam, eps, msg=None):
        self.lam = lam
        self.eps = eps
        super().__init__(msg or f"singular Rayleigh system at lambda={lam!r}, eps={eps!r}")


class SpectralHit(ShearlabError):
    pass


class ResolutionGate(ShearlabError, ValueError):
    pass


class SourceOutOfRange(ShearlabError, ValueError):
    pass


class UnresolvedOscillation(ShearlabError):
    pass


class NonConvergent(ShearlabError):
    pass


class RootFindingFailure(ShearlabError):
    pass


class StabilityViolation(ShearlabError, ValueError):
    pass


class InconclusiveFit(ShearlabError):
    pass
