import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from ..config import Config
from ..errors import PbLabError, SolverError, WindingError
from ..fields import (GridManifold, VectorMapField, poisson_bracket, postcompose, read_field_binary,
                      write_field_binary, write_field_csv)
from ..geometry import MarkedBoundary, make_right_triangle, make_unit_disc, standard_square_datum
from ..planar_maps import power_map
from ..admissible import (HomotopyClass, check_admissible, check_circle_admissible, class_of_decomposition,
                          class_of_map, extract_core_loop, initial_admissible_map)
from ..sets import SetConfig
from ..utils import canonical_json, config_hash
from .objective import exact_objective, objective_and_gradient, objective_value
from .projection import CircleProjector, FeasibilityProjector
from .schedule import SolveSchedule

logger = logging.getLogger('pb_solver')

ARMIJO = 1e-4
MAX_BACKTRACKS = 30


@dataclass
class PbEstimate:
    """
    Borne supérieure certifiée: value est le crochet réévalué du témoin stocké.

    kind vaut 'Pb_N' (avec N), 'Pb_X', 'pb3', 'pb4' ou 'pb4+'.
    """
    kind: str
    value: float
    objective: str
    grid: Dict
    schedule: Dict
    witness: Optional[VectorMapField] = field(default=None, repr=False)
    report: Optional[Dict] = None
    history: List[Dict] = field(default_factory=list)
    metadata: Dict = field(default_factory=dict)

    @property
    def cells(self) -> int:
        return int(self.grid['cells'][0])

    def reevaluate(self) -> float:
        if self.witness is None:
            raise SolverError("estimate has no witness to re-evaluate")
        return exact_objective(self.witness.values, self.witness.grid, self.objective)

    def verify(self, tol: float = 1e-9) -> bool:
        """Le témoin reproduit la valeur et reste admissible."""
        ok = abs(self.reevaluate() - self.value) <= tol * max(1.0, abs(self.value))
        if self.report is not None:
            ok = ok and bool(self.report.get('all_ok', False))
        return ok

    def to_dict(self) -> Dict:
        return {'kind': self.kind, 'value': self.value, 'objective': self.objective, 'grid': self.grid,
                'h': self.grid['h'], 'schedule': self.schedule, 'admissibility': self.report, 'history': self.history,
                'metadata': self.metadata}


# === Descente ===

def _smoothed(grad: np.ndarray, grid: GridManifold, sigma: float) -> np.ndarray:
    """
    Gradient filtré par un noyau gaussien de largeur sigma (en pas h).

    Le noyau est symétrique défini positif (réflexion sur la boîte, périodique sur le tore), donc
    -K∇J reste une direction de descente; elle déplace des régions entières plutôt que les seuls
    nœuds du maximum.
    """
    if sigma <= 0:
        return grad.copy()
    mode = 'wrap' if grid.periodic else 'reflect'
    return np.stack([ndimage.gaussian_filter(grad[..., c], sigma, mode=mode) for c in range(2)], axis=-1)


def _descend(phi0: VectorMapField, project: Callable[[np.ndarray], np.ndarray],
             accept: Callable[[VectorMapField], bool], schedule: SolveSchedule) -> Tuple[VectorMapField, float, List]:
    """
    Descente de gradient normalisée avec recherche d'Armijo sur chaque marche de l'échelle p.

    Toute itérée projetée admissible est candidate; la meilleure (valeur exacte) est conservée.
    """
    grid = phi0.grid
    objective = schedule.objective
    frozen = grid.frame_mask()
    best, best_value = phi0, exact_objective(phi0.values, grid, objective)
    values = phi0.values.copy()
    step = schedule.step_size
    history = []

    def try_project(current):
        nonlocal best, best_value
        candidate = phi0.with_values(project(current))
        if not accept(candidate):
            return None
        value = exact_objective(candidate.values, grid, objective)
        if value < best_value:
            best, best_value = candidate, value
        return candidate.values.copy()

    for p in schedule.ladder:
        trace, rejected, iterations = [], 0, 0
        for iterations in range(1, schedule.max_iterations + 1):
            J, grad = objective_and_gradient(values, grid, p, objective)
            grad[frozen] = 0.0
            smooth = _smoothed(grad, grid, schedule.smoothing)
            smooth[frozen] = 0.0
            gmax = float(np.max(np.linalg.norm(smooth, axis=-1)))
            if gmax == 0.0:
                break
            direction = -smooth / gmax
            slope = float(np.sum(grad * direction))
            t = step
            for _ in range(MAX_BACKTRACKS):
                trial = values + t * direction
                J_new = objective_value(trial, grid, p, objective)
                if J_new <= J + ARMIJO * t * slope:
                    break
                t *= 0.5
            else:
                logger.debug(f"p={p:g}: line search stalled at iteration {iterations}")
                break
            values = trial
            step = min(2 * t, schedule.step_size)
            trace.append(J_new)
            logger.debug(f"p={p:g} it={iterations}: smoothed {J_new:.8g}, step {t:.3g}")

            if iterations % schedule.projection_every == 0:
                projected = try_project(values)
                if projected is None:
                    rejected += 1
                    logger.warning(f"p={p:g} it={iterations}: projection rejected, reverting to best witness")
                    values = best.values.copy()
                    step *= 0.5
                else:
                    values = projected

            w = schedule.plateau_window
            if len(trace) > w and abs(trace[-w - 1] - trace[-1]) <= schedule.plateau_tol * max(abs(trace[-1]), 1e-300):
                logger.debug(f"p={p:g}: plateau after {iterations} iterations")
                break

        projected = try_project(values)
        if projected is not None:
            values = projected
        history.append({'p': p, 'iterations': iterations, 'smoothed': trace[-1] if trace else None,
                        'best': best_value, 'rejected_projections': rejected})
        logger.info(f"Stage p={p:g}: {iterations} iterations, best certified value {best_value:.8g}")
    return best, best_value, history


def _restart_seeds(phi0: VectorMapField, schedule: SolveSchedule) -> List[VectorMapField]:
    seeds = [phi0]
    if schedule.restarts:
        rng = np.random.default_rng(schedule.seed)
        for _ in range(schedule.restarts):
            noise = rng.normal(scale=phi0.grid.h, size=phi0.values.shape)
            seeds.append(phi0.with_values(phi0.values + noise))
    return seeds


def _solve(phi0, project, accept, schedule: SolveSchedule):
    best, best_value, history = None, math.inf, []
    for r, seed in enumerate(_restart_seeds(phi0, schedule)):
        if r > 0:
            seed = seed.with_values(project(seed.values))
            if not accept(seed):
                logger.warning(f"Restart {r}: perturbed seed is not admissible after projection, skipped")
                continue
        witness, value, stages = _descend(seed, project, accept, schedule)
        history.extend(dict(stage, restart=r) for stage in stages)
        if value < best_value:
            best, best_value = witness, value
    return best, best_value, history


def _start(seed: VectorMapField, project, accept) -> VectorMapField:
    if accept(seed):
        return seed
    projected = seed.with_values(project(seed.values))
    if accept(projected):
        return projected
    raise SolverError("the seed map is not admissible, even after projection")


def _best_start(candidates: Sequence[Tuple[str, VectorMapField]], project, accept,
                objective: str) -> Tuple[VectorMapField, str]:
    """Départ admissible de plus petite valeur exacte; le premier candidat est obligatoire."""
    best, best_label, best_value = None, None, math.inf
    for i, (label, phi) in enumerate(candidates):
        try:
            start = _start(phi, project, accept)
        except SolverError as e:
            if i == 0:
                raise
            logger.warning(f"Warm start '{label}' skipped: {str(e)}")
            continue
        value = exact_objective(start.values, start.grid, objective)
        logger.debug(f"Start '{label}': {value:.8g}")
        if value < best_value:
            best, best_label, best_value = start, label, value
    return best, best_label


# === Niveaux grossiers ===

def coarsen_config(config: SetConfig) -> Optional[SetConfig]:
    """Configuration sur la grille de pas 2h (nœuds pairs), ou None si elle serait trop grossière."""
    grid = config.grid
    nx, ny = grid.cells
    if nx % 2 or ny % 2 or nx // 2 < Config.COARSEST_GRID:
        return None
    coarse = GridManifold(grid.kind, grid.lower, grid.extent, (nx // 2, ny // 2))
    return SetConfig(coarse, tuple(m[::2, ::2] for m in config.masks), config.labels)


def prolong(phi: VectorMapField, fine: GridManifold) -> VectorMapField:
    """Interpolation bilinéaire d'un témoin grossier aux nœuds de la grille fine."""
    grid = phi.grid
    values = phi.values
    xs, ys = grid.axes()
    if grid.periodic:
        values = np.pad(values, ((0, 1), (0, 1), (0, 0)), mode='wrap')
        xs = np.append(xs, grid.lower[0] + grid.extent[0])
        ys = np.append(ys, grid.lower[1] + grid.extent[1])
    interp = RegularGridInterpolator((xs, ys), values, bounds_error=False, fill_value=None)
    fine_values = interp(fine.node_points().reshape(-1, 2)).reshape(fine.shape + (2,))
    return VectorMapField(fine, fine_values, phi.cs_basepoint)


def _coarse_start(config: SetConfig, mb: MarkedBoundary, schedule: SolveSchedule) -> Optional[VectorMapField]:
    lower = SolveSchedule(**dict(schedule.to_dict(), coarse_levels=schedule.coarse_levels - 1))
    try:
        coarse = coarsen_config(config)
        if coarse is None:
            return None
        est = estimate_pb(coarse, mb, lower, kind='coarse')
    except PbLabError as e:
        logger.warning(f"Coarse level below {config.grid.cells[0]}² skipped: {str(e)}")
        return None
    logger.info(f"Coarse level {coarse.grid.cells[0]}²: {est.value:.6g}, prolonged to {config.grid.cells[0]}²")
    return prolong(est.witness, config.grid)


# === Forme Φ ===

def estimate_pb(config: SetConfig, mb: MarkedBoundary, schedule: Optional[SolveSchedule] = None,
                seed_phi: Optional[VectorMapField] = None, kind: Optional[str] = None,
                metadata: Optional[Dict] = None, warm_starts: Sequence[VectorMapField] = ()) -> PbEstimate:
    """
    Borne supérieure certifiée de Pb_N^𝔇(X_1, …, X_N).

    Sans seed_phi, le départ est le meilleur admissible parmi l'initialisation par partition de
    l'unité, le témoin prolongé des niveaux grossiers (schedule.coarse_levels) et warm_starts.

    Args:
        config: Configuration à N ensembles
        mb: Donnée 𝔇 à N points marqués
        schedule: Plan de descente (défauts de Config)
        seed_phi: Témoin admissible de départ (sinon initialisation par partition de l'unité)
        kind: Étiquette de l'invariant
        metadata: Métadonnées supplémentaires
        warm_starts: Candidats de départ supplémentaires, projetés puis départagés par valeur exacte

    Returns:
        PbEstimate: valeur = crochet réévalué du meilleur témoin admissible
    """
    schedule = schedule or SolveSchedule()
    grid = config.grid
    if seed_phi is not None:
        candidates = [('seed', seed_phi)]
    else:
        candidates = [('initializer', initial_admissible_map(config, mb))]
        if schedule.coarse_levels > 0:
            coarse = _coarse_start(config, mb, schedule)
            if coarse is not None:
                candidates.append(('coarse', coarse))
    candidates.extend((f'warm {i}', phi) for i, phi in enumerate(warm_starts))
    phi0 = candidates[0][1]
    base = phi0.cs_basepoint if phi0.cs_basepoint is not None else tuple(mb.domain.centroid)
    projector = FeasibilityProjector(config, mb, base, schedule.exterior, schedule.eps)
    # la projection envoie le cadre sur base: tous les candidats partagent ce point base
    candidates = [(name, phi.with_values(phi.values, base)) for name, phi in candidates]

    def accept(phi):
        return check_admissible(phi, config, mb).all_ok

    start, label = _best_start(candidates, projector.project_values, accept, schedule.objective)
    logger.info(f"Solving {kind or f'Pb_{config.n}'} on {grid.cells[0]}² ({schedule.objective}), start '{label}'")
    witness, value, history = _solve(start, projector.project_values, accept, schedule)
    report = check_admissible(witness, config, mb)
    meta = {'n': config.n, 'labels': list(config.labels), 'datum': mb.to_dict(),
            'domain_area': mb.domain.area, 'start': label}
    if config.n == 3 and schedule.objective == 'sup':
        meta['pb3_equivalent'] = 0.5 * value
    meta.update(metadata or {})
    return PbEstimate(kind or f"Pb_{config.n}", value, schedule.objective, grid.to_dict(), schedule.to_dict(),
                      witness, report.to_dict(), history, meta)


def estimate_pb3_fg(X: np.ndarray, Y: np.ndarray, Z: np.ndarray, grid: GridManifold,
                    schedule: Optional[SolveSchedule] = None) -> PbEstimate:
    """
    pb₃(X, Y, Z) par la forme bornée F ≥ 0, G ≥ 0, F+G ≤ 1 avec F|X = 0, G|Y = 0, (F+G)|Z = 1.

    Φ = (F, G) prend ses valeurs dans le triangle {(0,0), (1,0), (0,1)}; les arcs sont
    G = 0 (Y), F + G = 1 (Z), F = 0 (X). Contraintes rétablies par projection au plus proche.
    """
    schedule = schedule or SolveSchedule()
    schedule = SolveSchedule(**dict(schedule.to_dict(), exterior='clamp'))
    if not np.any(Z):
        zero = VectorMapField(grid, np.zeros(grid.shape + (2,)), (0.0, 0.0))
        logger.info("Z is empty: F = G = 0 is admissible")
        return PbEstimate('pb3', 0.0, schedule.objective, grid.to_dict(), schedule.to_dict(), zero,
                          {'all_ok': True, 'vacuous': True}, [], {'Pb3_equivalent': 0.0, 'form': 'FG'})
    config = SetConfig(grid, (Y, Z, X), ('Y', 'Z', 'X'))
    triangle = MarkedBoundary(make_right_triangle(), ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
    est = estimate_pb(config, triangle, schedule, kind='pb3', metadata={'form': 'FG'})
    est.metadata['Pb3_equivalent'] = 2.0 * est.value
    est.metadata.pop('pb3_equivalent', None)
    return est


def estimate_pb4(X0: np.ndarray, X1: np.ndarray, Y0: np.ndarray, Y1: np.ndarray, grid: GridManifold,
                 schedule: Optional[SolveSchedule] = None, seed_phi: Optional[VectorMapField] = None) -> PbEstimate:
    """
    pb₄(X₀, X₁, Y₀, Y₁) = Pb₄ sur le carré unité avec l'ordre cyclique (X₀, Y₀, X₁, Y₁).

    Les arcs du carré sont parcourus depuis (0,0): Y₀ (G=0), X₁ (F=1), Y₁ (G=1), X₀ (F=0),
    de sorte que Φ = (F, G). Avec objective='max' on obtient pb₄⁺.
    """
    schedule = schedule or SolveSchedule()
    config = SetConfig(grid, (Y0, X1, Y1, X0), ('Y0', 'X1', 'Y1', 'X0'))
    kind = 'pb4+' if schedule.objective == 'max' else 'pb4'
    return estimate_pb(config, standard_square_datum(4), schedule, seed_phi, kind=kind,
                       metadata={'cyclic_order': ['X0', 'Y0', 'X1', 'Y1']})


# === Forme Pb_X(α) ===

def _constant_on_circle(grid: GridManifold) -> VectorMapField:
    values = np.zeros(grid.shape + (2,))
    values[..., 0] = 1.0
    return VectorMapField(grid, values, (1.0, 0.0))


def estimate_pb_x(config: SetConfig, k: int = 1, schedule: Optional[SolveSchedule] = None,
                  mb: Optional[MarkedBoundary] = None, loops: Optional[Sequence] = None,
                  seed_phi: Optional[VectorMapField] = None,
                  warm_starts: Sequence[VectorMapField] = ()) -> PbEstimate:
    """
    Borne supérieure de Pb_X(kα), α la classe de la décomposition X = X_1 ∪ X_2 ∪ X_3.

    La cible est la boule unité (rayon 1); value/π se compare à Pb₃ (disque d'aire 1).
    Le départ est l'initialisation de la décomposition, composée par R_k si k ≥ 2,
    ou l'application constante (1, 0) si k = 0.

    Args:
        config: Décomposition en trois ensembles
        k: Multiple de la classe (≥ 0)
        schedule: Plan de descente
        mb: Donnée à trois points sur le cercle unité
        loops: Boucles génératrices (extraites si X est un anneau)
        seed_phi: Témoin de départ déjà dans la classe kα
        warm_starts: Autres départs candidats (projetés, classe vérifiée), départagés par valeur exacte

    Returns:
        PbEstimate: estimation de forme Pb_X
    """
    if k < 0:
        raise SolverError(f"negative multiples of a class are not supported (k={k})")
    schedule = schedule or SolveSchedule()
    grid = config.grid
    mask = config.union()
    mb = mb or MarkedBoundary.from_fractions(make_unit_disc('ball'), [0.0, 1.0 / 3.0, 2.0 / 3.0])
    loops = list(loops) if loops else [extract_core_loop(mask, grid)]
    target = class_of_decomposition(config, mb, loops).multiplied(k)

    if seed_phi is not None:
        phi0 = seed_phi
    elif k == 0:
        phi0 = _constant_on_circle(grid)
    else:
        phi0 = initial_admissible_map(config, mb)
        if k > 1:
            phi0 = postcompose(phi0, power_map(k, schedule.eps))
    base = phi0.cs_basepoint if phi0.cs_basepoint is not None else (0.0, 0.0)
    projector = CircleProjector(mask, grid, base, eps=schedule.eps)
    candidates = [('seed' if seed_phi is not None else 'initializer', phi0)]
    candidates.extend((f'warm {i}', phi.with_values(phi.values, base)) for i, phi in enumerate(warm_starts))

    def accept(phi):
        if not check_circle_admissible(phi, mask).all_ok:
            return False
        try:
            return class_of_map(phi, loops).same_windings(target)
        except WindingError:
            return False

    start, label = _best_start(candidates, projector.project_values, accept, schedule.objective)
    logger.info(f"Solving Pb_X({k}α) on {grid.cells[0]}², target windings {target.windings}, start '{label}'")
    witness, value, history = _solve(start, projector.project_values, accept, schedule)
    report = check_circle_admissible(witness, mask)
    meta = {'k': int(k), 'windings': list(target.windings), 'Pb3_equivalent': value / math.pi,
            'labels': list(config.labels), 'start': label}
    return PbEstimate('Pb_X', value, schedule.objective, grid.to_dict(), schedule.to_dict(), witness,
                      report.to_dict(), history, meta)


def decomposition_class(config: SetConfig, loops: Optional[Sequence] = None) -> HomotopyClass:
    mb = MarkedBoundary.from_fractions(make_unit_disc('ball'), [0.0, 1.0 / 3.0, 2.0 / 3.0])
    loops = list(loops) if loops else [extract_core_loop(config.union(), config.grid)]
    return class_of_decomposition(config, mb, loops)


# === Séries et persistance ===

def estimate_series(build: Callable[[int], PbEstimate], resolutions: Sequence[int],
                    max_workers: Optional[int] = None) -> pd.DataFrame:
    """Estimations à plusieurs résolutions, fusionnées dans l'ordre de soumission."""
    workers = max_workers or Config.MAX_WORKERS
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(build, int(cells)) for cells in resolutions]
        estimates = [future.result() for future in futures]
    rows = []
    for cells, est in zip(resolutions, estimates):
        rows.append({'cells': int(cells), 'h': est.grid['h'], 'kind': est.kind, 'value': est.value,
                     'iterations': sum(stage['iterations'] for stage in est.history),
                     'admissible': bool((est.report or {}).get('all_ok', False))})
    return pd.DataFrame(rows)


def save_estimate(estimate: PbEstimate, out_dir, run_config: Optional[Dict] = None) -> Dict[str, Path]:
    """
    Écrit estimate.json (sans horodatage), witness.bin et bracket.csv dans out_dir.

    Returns:
        Dict: chemins des artefacts
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = estimate.to_dict()
    payload['tool_version'] = Config.TOOL_VERSION
    payload['config_hash'] = config_hash(run_config if run_config is not None else estimate.schedule)
    paths = {'estimate': out / 'estimate.json', 'witness': out / 'witness.bin', 'bracket': out / 'bracket.csv'}
    paths['estimate'].write_text(canonical_json(payload), encoding='utf-8')
    if estimate.witness is not None:
        write_field_binary(paths['witness'], estimate.witness, {'kind': estimate.kind, 'value': estimate.value})
        write_field_csv(paths['bracket'], poisson_bracket(estimate.witness))
    logger.info(f"Estimate written to {out}")
    return paths


def load_witness(path) -> VectorMapField:
    field_ = read_field_binary(path)
    if not isinstance(field_, VectorMapField):
        raise SolverError(f"{path} does not hold a map field")
    return field_
