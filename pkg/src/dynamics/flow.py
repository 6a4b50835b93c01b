import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.interpolate import RegularGridInterpolator

from ..config import Config
from ..errors import ConfigError, TrajectoryExitError
from ..fields import GridManifold, ScalarField, diff

logger = logging.getLogger('chords')


def grid_interpolator(grid: GridManifold, values: np.ndarray) -> RegularGridInterpolator:
    """Interpolation bilinéaire des valeurs nodales (tore: nœud de recouvrement ajouté)."""
    xs, ys = grid.axes()
    if grid.periodic:
        xs = np.append(xs, xs[-1] + grid.h)
        ys = np.append(ys, ys[-1] + grid.h)
        values = np.pad(values, ((0, 1), (0, 1)), mode='wrap')
    return RegularGridInterpolator((xs, ys), values, method='linear', bounds_error=False, fill_value=None)


class HamiltonianVectorField:
    """
    X_G = (∂G/∂y, −∂G/∂x) pour ω = dx∧dy, gradient par différences centrées interpolé bilinéairement.
    """

    def __init__(self, G: ScalarField):
        self.G = G
        self.grid = G.grid
        gx = diff(G.values, self.grid, 0)
        gy = diff(G.values, self.grid, 1)
        self._u = grid_interpolator(self.grid, gy)
        self._v = grid_interpolator(self.grid, -gx)
        self._g = grid_interpolator(self.grid, G.values)
        self.lower = np.asarray(self.grid.lower, dtype=float)
        self.upper = self.lower + np.asarray(self.grid.extent, dtype=float)

    def wrap(self, points: np.ndarray) -> np.ndarray:
        if not self.grid.periodic:
            return points
        return self.lower + np.mod(points - self.lower, self.upper - self.lower)

    def inside(self, points: np.ndarray) -> np.ndarray:
        if self.grid.periodic:
            return np.ones(len(points), dtype=bool)
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        q = self.wrap(points)
        return np.stack([self._u(q), self._v(q)], axis=1)

    def energy(self, points) -> np.ndarray:
        return self._g(self.wrap(np.atleast_2d(np.asarray(points, dtype=float))))


def rk4_step(field: HamiltonianVectorField, state: np.ndarray, dt: float) -> np.ndarray:
    """Un pas de Runge-Kutta d'ordre 4 pour des positions (m, 2)."""
    k1 = field(state)
    k2 = field(state + 0.5 * dt * k1)
    k3 = field(state + 0.5 * dt * k2)
    k4 = field(state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def step_count(T: float, dt: float) -> int:
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    return int(math.ceil(abs(T) / dt - 1e-9))


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    dt: float

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.times, 'x': self.points[:, 0], 'y': self.points[:, 1]})

    def write_csv(self, path) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        return path


def hamiltonian_flow(G, x0: Sequence[float], T: float, dt: Optional[float] = None) -> Trajectory:
    """
    Trajectoire du flot hamiltonien de G depuis x0 pendant le temps T (T < 0: flot rétrograde).

    Args:
        G: ScalarField ou HamiltonianVectorField déjà construit
        x0: Point de départ
        T: Durée signée
        dt: Pas du RK4 (Config.DEFAULT_DT par défaut)

    Returns:
        Trajectory: temps et positions, |T| arrondi au pas supérieur

    Raises:
        TrajectoryExitError: si la trajectoire quitte la boîte plane
    """
    field = G if isinstance(G, HamiltonianVectorField) else HamiltonianVectorField(G)
    dt = Config.DEFAULT_DT if dt is None else float(dt)
    n = step_count(T, dt)
    h = math.copysign(dt, T) if T != 0 else dt
    points = np.empty((n + 1, 2))
    points[0] = np.asarray(x0, dtype=float)
    if not field.inside(points[:1])[0]:
        raise TrajectoryExitError(f"start point {points[0].tolist()} lies outside the grid box")
    state = points[:1].copy()
    for i in range(1, n + 1):
        state = rk4_step(field, state, h)
        if not field.inside(state)[0]:
            logger.error(f"Trajectory left the box at t={i * h:.6g}")
            raise TrajectoryExitError(f"trajectory left the grid box at t={i * h:.6g}, position {state[0].tolist()}")
        points[i] = field.wrap(state)[0] if field.grid.periodic else state[0]
    return Trajectory(h * np.arange(n + 1), points, dt)


def make_hamiltonian(spec: Dict, grid: GridManifold) -> ScalarField:
    """
    Hamiltonien G échantillonné sur la grille depuis une spécification.

    Kinds: 'linear' (a·x + b·y + c), 'quadratic' ((x² + y²)/2 mis à l'échelle), 'gaussian'
    (amplitude·exp(−|z − center|²/(2σ²))); 'scale' multiplie le résultat.
    """
    kind = spec.get('kind')
    X, Y = grid.coords()
    try:
        if kind == 'linear':
            values = spec.get('a', 0.0) * X + spec.get('b', 1.0) * Y + spec.get('c', 0.0)
        elif kind == 'quadratic':
            cx, cy = spec.get('center', (0.0, 0.0))
            values = 0.5 * spec.get('a', 1.0) * ((X - cx) ** 2 + (Y - cy) ** 2)
        elif kind == 'gaussian':
            cx, cy = spec['center']
            sigma = float(spec['sigma'])
            values = spec.get('amplitude', 1.0) * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2 * sigma ** 2))
        else:
            raise ConfigError(f"unknown Hamiltonian kind {kind!r}")
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed Hamiltonian spec {spec}: {str(e)}")
    return ScalarField(grid, np.asarray(values, dtype=float) * float(spec.get('scale', 1.0)))
