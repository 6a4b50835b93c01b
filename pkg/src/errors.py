"""Hiérarchie d'exceptions du laboratoire."""
from typing import Optional, Tuple


class PbLabError(Exception):
    """Racine de toutes les erreurs du projet."""


class ConfigError(PbLabError, ValueError):
    pass


class GeometryError(PbLabError, ValueError):
    pass


class MapConstructionError(PbLabError, ValueError):
    pass


class DomainOfDefinitionError(PbLabError, ValueError):
    pass


class GridMismatchError(PbLabError, ValueError):
    pass


class SetValidationError(PbLabError, ValueError):
    pass


class CyclicIntersectionError(SetValidationError):
    """Deux ensembles non adjacents se rencontrent."""

    def __init__(self, pair: Tuple[int, int], message: Optional[str] = None):
        self.pair = pair
        super().__init__(message or f"sets X{pair[0] + 1} and X{pair[1] + 1} intersect but are not cyclic neighbours")


class InitializerError(PbLabError, ValueError):
    def __init__(self, message: str, required_spacing: Optional[float] = None):
        self.required_spacing = required_spacing
        super().__init__(message)


class WindingError(PbLabError, ValueError):
    pass


class SeparationError(PbLabError, ValueError):
    def __init__(self, blocking_pair: Tuple[str, str], message: str):
        self.blocking_pair = blocking_pair
        super().__init__(message)


class SectorPositioningError(PbLabError, ValueError):
    def __init__(self, minimum_delta: float, message: str):
        self.minimum_delta = minimum_delta
        super().__init__(message)


class PremiseError(PbLabError, ValueError):
    def __init__(self, measured: float, claimed: float):
        self.measured = measured
        self.claimed = claimed
        super().__init__(f"bracket premise violated: measured {measured:.6g} > K = {claimed:.6g}")


class VerificationError(PbLabError, RuntimeError):
    pass


class SolverError(PbLabError, RuntimeError):
    pass


class TrajectoryExitError(PbLabError, RuntimeError):
    pass
