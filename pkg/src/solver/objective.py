"""Objectifs lissés du crochet discret et leurs gradients exacts."""
from typing import Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ..fields import GridManifold, bracket_gradients, bracket_values


def p_norm(b: np.ndarray, p: float) -> Tuple[float, np.ndarray]:
    """
    J = (moyenne |b|^p)^{1/p} et dJ/db; J croît vers max|b| quand p → ∞.
    """
    a = np.abs(b)
    m = float(np.max(a))
    if m == 0.0:
        return 0.0, np.zeros_like(b)
    r = a / m
    J = m * float(np.mean(r ** p)) ** (1.0 / p)
    grad = (a / J) ** (p - 1) * np.sign(b) / b.size
    return J, grad


def soft_max(b: np.ndarray, p: float) -> Tuple[float, np.ndarray]:
    """J = (1/p)·log(moyenne exp(p·b)) ≤ max b, gradient softmax."""
    flat = p * b.ravel()
    J = float((logsumexp(flat) - np.log(flat.size)) / p)
    return J, softmax(flat).reshape(b.shape)


def objective_and_gradient(values: np.ndarray, grid: GridManifold, p: float,
                           objective: str = 'sup') -> Tuple[float, np.ndarray]:
    """
    Objectif lissé du crochet {Φ₁, Φ₂} et gradient par rapport aux valeurs nodales.

    Args:
        values: Valeurs (nx, ny, 2)
        grid: Grille
        p: Exposant de lissage
        objective: 'sup' (norme p) ou 'max' (log-somme-exp)

    Returns:
        Tuple: (J, gradient de forme (nx, ny, 2))
    """
    f, g = values[..., 0], values[..., 1]
    b = bracket_values(f, g, grid)
    J, weights = p_norm(b, p) if objective == 'sup' else soft_max(b, p)
    grad_f, grad_g = bracket_gradients(f, g, weights, grid)
    return J, np.stack([grad_f, grad_g], axis=-1)


def objective_value(values: np.ndarray, grid: GridManifold, p: float, objective: str = 'sup') -> float:
    b = bracket_values(values[..., 0], values[..., 1], grid)
    return p_norm(b, p)[0] if objective == 'sup' else soft_max(b, p)[0]


def exact_objective(values: np.ndarray, grid: GridManifold, objective: str = 'sup') -> float:
    """Valeur certifiée: sup|{Φ₁,Φ₂}| ou max{Φ₁,Φ₂} réévalué sur les nœuds."""
    b = bracket_values(values[..., 0], values[..., 1], grid)
    return float(np.max(np.abs(b))) if objective == 'sup' else float(np.max(b))
