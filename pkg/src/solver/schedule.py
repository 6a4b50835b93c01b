from dataclasses import dataclass, field, asdict
from typing import Dict, Optional, Tuple

from ..config import Config
from ..errors import ConfigError

OBJECTIVES = ('sup', 'max')
EXTERIOR_MODES = ('retract', 'clamp')


@dataclass(frozen=True)
class SolveSchedule:
    """
    Plan de descente: échelle d'exposants p, pas, cadence de projection, arrêts.

    objective 'sup' minimise ‖{Φ₁,Φ₂}‖∞, 'max' minimise max{Φ₁,Φ₂} (pb⁺).
    smoothing est la largeur (en pas h) du filtre gaussien appliqué au gradient; coarse_levels
    le nombre de grilles de pas 2h, 4h, … résolues d'abord pour fournir un départ prolongé.
    """
    ladder: Tuple[float, ...] = field(default_factory=Config.get_ladder)
    step_size: float = field(default_factory=lambda: Config.STEP_SIZE)
    projection_every: int = field(default_factory=lambda: Config.PROJECTION_EVERY)
    max_iterations: int = field(default_factory=lambda: Config.MAX_ITERATIONS)
    plateau_tol: float = field(default_factory=lambda: Config.PLATEAU_TOL)
    plateau_window: int = field(default_factory=lambda: Config.PLATEAU_WINDOW)
    smoothing: float = field(default_factory=lambda: Config.GRADIENT_SMOOTHING)
    coarse_levels: int = field(default_factory=lambda: Config.COARSE_LEVELS)
    objective: str = 'sup'
    exterior: str = 'retract'
    eps: float = 0.05
    seed: Optional[int] = None
    restarts: int = 0

    def __post_init__(self):
        ladder = tuple(float(p) for p in self.ladder)
        object.__setattr__(self, 'ladder', ladder)
        if not ladder:
            raise ConfigError("schedule.ladder must not be empty")
        if any(p < 1 for p in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError(f"schedule.ladder must be increasing and ≥ 1, got {list(ladder)}")
        for key in ('step_size', 'plateau_tol', 'eps'):
            if not getattr(self, key) > 0:
                raise ConfigError(f"schedule.{key} must be positive")
        if not self.eps < 1:
            raise ConfigError("schedule.eps must lie in (0, 1)")
        for key in ('projection_every', 'max_iterations', 'plateau_window'):
            if int(getattr(self, key)) < 1:
                raise ConfigError(f"schedule.{key} must be a positive integer")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"schedule.objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.exterior not in EXTERIOR_MODES:
            raise ConfigError(f"schedule.exterior must be one of {EXTERIOR_MODES}, got {self.exterior!r}")
        if self.restarts < 0 or (self.restarts and self.seed is None):
            raise ConfigError("schedule.restarts needs a seed")
        if self.smoothing < 0:
            raise ConfigError(f"schedule.smoothing must be non-negative, got {self.smoothing}")
        if self.coarse_levels < 0:
            raise ConfigError(f"schedule.coarse_levels must be non-negative, got {self.coarse_levels}")

    @classmethod
    def from_dict(cls, data: Optional[Dict]) -> 'SolveSchedule':
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown schedule keys: {sorted(unknown)}")
        return cls(**data)

    def with_objective(self, objective: str) -> 'SolveSchedule':
        return SolveSchedule(**dict(asdict(self), objective=objective))

    def to_dict(self) -> Dict:
        out = asdict(self)
        out['ladder'] = list(self.ladder)
        return out


def quick_schedule(**overrides) -> SolveSchedule:
    """Plan court pour les tests et l'interface (une seule marche, peu d'itérations)."""
    base = dict(ladder=(8.0,), max_iterations=60, plateau_window=30)
    base.update(overrides)
    return SolveSchedule(**base)
