"""Profils scalaires C¹ à dérivée affine par morceaux."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import MapConstructionError

MAX_PLATEAU = 1.5


@dataclass(frozen=True)
class SmoothStep:
    """
    Profil ρ: transition sur [start, start + length] entre deux prolongements affines.

    La dérivée monte linéairement de slope_start au plateau, y reste, puis descend
    linéairement vers slope_end. Le plateau et la longueur des rampes sont résolus pour
    atteindre value_end exactement, avec un plateau plafonné par cap.
    """
    start: float
    length: float
    value_start: float
    value_end: float
    slope_start: float
    slope_end: float
    cap: float
    kind: str = 'custom'
    plateau: float = field(init=False)
    ramp: float = field(init=False)

    def __post_init__(self):
        if not self.length > 0:
            raise MapConstructionError(f"profile width must be positive, got {self.length}")
        if not self.cap > 0:
            raise MapConstructionError(f"slope cap must be positive, got {self.cap}")
        L = self.length
        d0, d1 = self.slope_start, self.slope_end
        increment = self.value_end - self.value_start
        m = self.cap
        if increment > m * L:
            raise MapConstructionError(
                f"profile needs average slope {increment / L:.4g} above the cap {m:.4g}")
        s = 2 * (m * L - increment) / (2 * m - d0 - d1)
        if 2 * s > L:
            s = L / 2
            m = 2 * increment / L - (d0 + d1) / 2
            if m < 0:
                raise MapConstructionError("profile increment too small for a non-negative slope")
        object.__setattr__(self, 'plateau', float(m))
        object.__setattr__(self, 'ramp', float(s))

    # === Constructeurs ===

    @classmethod
    def ceiling(cls, knee: float, width: float, eps: float) -> 'SmoothStep':
        """min(x, knee) lissé: identité sous knee - width, égal à knee au-delà de knee."""
        if not eps > 0:
            raise MapConstructionError(f"eps must be positive, got {eps}")
        start = knee - width
        return cls(start=start, length=width, value_start=start, value_end=knee,
                   slope_start=1.0, slope_end=0.0, cap=min(1.0 + eps, MAX_PLATEAU), kind='ceiling')

    @classmethod
    def floor(cls, knee: float, width: float, eps: float) -> 'SmoothStep':
        """max(x, knee) lissé: égal à knee sous knee, identité au-delà de knee + width."""
        if not eps > 0:
            raise MapConstructionError(f"eps must be positive, got {eps}")
        end = knee + width
        return cls(start=knee, length=width, value_start=knee, value_end=end,
                   slope_start=0.0, slope_end=1.0, cap=min(1.0 + eps, MAX_PLATEAU), kind='floor')

    @classmethod
    def collapse(cls, eps: float) -> 'SmoothStep':
        """Nul sur [0, eps], égal à x - eps sur [1/2, ∞) (variable d'aire du disque unité)."""
        if not 0 < eps < 0.5:
            raise MapConstructionError(f"collapse eps must lie in (0, 1/2), got {eps}")
        return cls(start=eps, length=0.5 - eps, value_start=0.0, value_end=0.5 - eps,
                   slope_start=0.0, slope_end=1.0, cap=min(1.0 + eps, MAX_PLATEAU), kind='collapse')

    @classmethod
    def absorb(cls, inner: float, eps: float) -> 'SmoothStep':
        """
        Nul sur [0, inner], identité au-delà de inner·(1 + 2/ε) (variable d'aire r²).

        La pente moyenne vaut 1 + ε/2, ce qui laisse des rampes de largeur ≈ inner/(1+2ε).
        """
        if not inner > 0:
            raise MapConstructionError(f"absorbed area must be positive, got {inner}")
        if not 0 < eps < 0.5:
            raise MapConstructionError(f"absorb eps must lie in (0, 1/2), got {eps}")
        outer = inner * (1.0 + 2.0 / eps)
        return cls(start=inner, length=outer - inner, value_start=0.0, value_end=outer,
                   slope_start=0.0, slope_end=1.0, cap=1.0 + eps, kind='absorb')

    # === Évaluation ===

    @property
    def end(self) -> float:
        return self.start + self.length

    @property
    def max_slope(self) -> float:
        return max(self.plateau, self.slope_start, self.slope_end)

    def _left(self, x):
        if self.slope_start == 1.0 and self.value_start == self.start:
            return x
        return self.value_start + self.slope_start * (x - self.start)

    def _right(self, x):
        if self.slope_end == 1.0 and self.value_end == self.end:
            return x
        return self.value_end + self.slope_end * (x - self.end)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        L, s, m = self.length, self.ramp, self.plateau
        d0, d1 = self.slope_start, self.slope_end
        tau = x - self.start
        v1 = s * (d0 + m) / 2
        v2 = v1 + m * (L - 2 * s)
        sigma = tau - (L - s)
        up = d0 * tau + (m - d0) * tau ** 2 / (2 * s)
        mid = v1 + m * (tau - s)
        down = v2 + m * sigma + (d1 - m) * sigma ** 2 / (2 * s)
        inner = self.value_start + np.where(tau <= s, up, np.where(tau <= L - s, mid, down))
        return np.where(tau <= 0, self._left(x), np.where(tau >= L, self._right(x), inner))

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        L, s, m = self.length, self.ramp, self.plateau
        d0, d1 = self.slope_start, self.slope_end
        tau = x - self.start
        sigma = tau - (L - s)
        inner = np.where(tau <= s, d0 + (m - d0) * tau / s,
                         np.where(tau <= L - s, m, m + (d1 - m) * sigma / s))
        return np.where(tau <= 0, d0, np.where(tau >= L, d1, inner))

    def to_dict(self):
        return {'kind': self.kind, 'start': self.start, 'length': self.length,
                'plateau': self.plateau, 'ramp': self.ramp, 'cap': self.cap}
