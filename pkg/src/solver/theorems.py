"""Vérifications constructives des théorèmes: chaque ligne est une inégalité mesurée avec sa marge."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config import Config
from ..admissible import extract_core_loop
from ..errors import PbLabError, SetValidationError
from ..fields import poisson_bracket, postcompose, sup_norm
from ..geometry import MarkedBoundary, make_unit_disc, standard_square_datum
from ..pipelines import forget_point, power_transform, reduction_data, reduction_pipeline
from ..planar_maps import homothety
from ..sets import SetConfig, merge_last_two, neighborhood, split_by_neighborhood
from .estimate import estimate_pb, estimate_pb3_fg, estimate_pb4, estimate_pb_x, prolong
from .schedule import SolveSchedule

logger = logging.getLogger('pb_solver')


@dataclass
class TheoremReport:
    """Lignes (nom, lhs, rhs, marge, tolérance, verdict); 'info' n'entre pas dans le verdict global."""
    theorem: str
    rows: List[Dict] = field(default_factory=list)
    details: Dict = field(default_factory=dict)

    def add(self, name: str, lhs: float, rhs: float, tolerance: float = 0.0, info: bool = False) -> Dict:
        slack = float(rhs) + float(tolerance) - float(lhs)
        verdict = 'info' if info else ('pass' if slack >= 0 else 'fail')
        row = {'check': self.theorem, 'name': name, 'lhs': float(lhs), 'rhs': float(rhs), 'slack': slack,
               'tolerance': float(tolerance), 'verdict': verdict}
        self.rows.append(row)
        return row

    def add_flag(self, name: str, ok: bool) -> Dict:
        return self.add(name, 0.0 if ok else 1.0, 0.0)

    @property
    def passed(self) -> bool:
        return all(row['verdict'] != 'fail' for row in self.rows)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=['check', 'name', 'lhs', 'rhs', 'slack', 'tolerance', 'verdict'])

    def to_dict(self) -> Dict:
        return {'theorem': self.theorem, 'passed': self.passed, 'rows': self.rows, 'details': self.details}


def _allowance(config: SetConfig) -> float:
    return Config.ALLOWANCE_FACTOR * config.grid.h


def pb3_datum() -> MarkedBoundary:
    """Disque d'aire 1 avec trois points équirépartis."""
    return MarkedBoundary.from_fractions(make_unit_disc('pb'), [0.0, 1.0 / 3.0, 2.0 / 3.0])


def theorem_check_reduction(config: SetConfig, schedule: Optional[SolveSchedule] = None, eps: float = 0.05,
                            delta: float = 0.01, eps0: Optional[float] = None) -> TheoremReport:
    """
    Pb_N(X_1, …, X_N) = Pb_{N−1}(X_1, …, X_{N−1} ∪ X_N), vérifiée dans les deux sens.

    Sens oubli: le témoin de e_N, sans son dernier point, démarre le solveur fusionné, donc e_{N−1} ≤ e_N.
    Sens constructif: push_away puis collapse_vertex sur le témoin de e_{N−1} donnent un témoin
    N-admissible de crochet ≤ (1+ε)/(1−ε)·e_{N−1} + δ·C_ρ + 10h.
    """
    if config.n < 4:
        raise SetValidationError(f"the reduction check needs N ≥ 4 sets, got {config.n}")
    schedule = schedule or SolveSchedule()
    report = TheoremReport('reduction')
    mb_n, mb_merged = reduction_data(config.n, eps, delta)
    merged = merge_last_two(config)

    est_n = estimate_pb(config, mb_n, schedule)
    forgotten, cert_forget = forget_point(est_n.witness, config, mb_n)
    report.add('forget_point leaves the bracket sup unchanged', cert_forget.output_sup, cert_forget.input_sup)
    report.add_flag('forgotten witness admissible for the merged configuration', cert_forget.admissible)

    est_m = estimate_pb(merged, mb_merged, schedule, seed_phi=forgotten)
    report.add('e_{N-1} <= e_N', est_m.value, est_n.value)

    out, new_mb, (cert_push, cert_collapse) = reduction_pipeline(est_m.witness, config, mb_merged, eps, delta, eps0)
    factor = (1.0 + eps) / (1.0 - eps)
    c_rho = factor * cert_push.claimed_additive / delta
    value = sup_norm(poisson_bracket(out))
    report.add('push_away growth', cert_push.output_sup, cert_push.claimed_bound, cert_push.allowance)
    report.add('collapse_vertex growth', cert_collapse.output_sup, cert_collapse.claimed_bound,
               cert_collapse.allowance)
    report.add('pipeline witness bound', value, factor * est_m.value + delta * c_rho, _allowance(config))
    report.add_flag('pipeline witness admissible for the N configuration', cert_collapse.admissible)
    details = {'e_N': est_n.value, 'e_N_minus_1': est_m.value, 'pipeline_value': value, 'C_rho': c_rho,
               'eps': eps, 'delta': delta, 'datum_N': mb_n.to_dict(), 'collapsed_datum': new_mb.to_dict(),
               'certificates': [cert_forget.to_dict(), cert_push.to_dict(), cert_collapse.to_dict()]}
    if cert_collapse.admissible:
        # même datum que le témoin du pipeline: la descente part de ce témoin
        est_c = estimate_pb(config, new_mb, schedule, seed_phi=out)
        report.add('e_N (collapsed datum) <= pipeline value', est_c.value, value, 1e-9 * max(1.0, value))
        report.add('e_N: collapsed datum vs corner datum', est_c.value, est_n.value, info=True)
        details['e_N_collapsed'] = est_c.value
    report.details = details
    logger.info(f"Reduction check: e_N={est_n.value:.6g}, e_N-1={est_m.value:.6g}, pipeline={value:.6g}")
    return report


def _reduced_estimate(config: SetConfig, merged_est, mb_merged: MarkedBoundary, schedule: SolveSchedule,
                      eps: float, delta: float) -> Dict:
    """
    Réduction constructive d'un témoin fusionné puis descente depuis le témoin obtenu.

    Returns:
        Dict: valeur du pipeline, borne (1+ε)/(1−ε)·(e + additif), estimation reprise (None si le
        témoin réduit n'est pas admissible) et certificats
    """
    out, new_mb, (cert_push, cert_collapse) = reduction_pipeline(merged_est.witness, config, mb_merged, eps, delta)
    factor = (1.0 + eps) / (1.0 - eps)
    value = sup_norm(poisson_bracket(out))
    est = estimate_pb(config, new_mb, schedule, seed_phi=out) if cert_collapse.admissible else None
    return {'pipeline_value': value, 'bound': factor * (merged_est.value + cert_push.claimed_additive),
            'estimate': est, 'datum': new_mb, 'passed': cert_push.passed and cert_collapse.passed,
            'certificates': [cert_push.to_dict(), cert_collapse.to_dict()]}


def theorem_check_limit(config: SetConfig, radii_cells: Sequence[float] = (8, 4, 2),
                        schedule: Optional[SolveSchedule] = None, eps: float = 0.05, delta: float = 0.01,
                        final_fraction: float = 0.2) -> TheoremReport:
    """
    Pb₄(cl(X₁∖K_n), X₂, cl(X₃∖K_n), K_n) → Pb₃(X₁, X₂, X₃) quand K_n décroît vers X₁ ∩ X₃.

    K_n est la dilatation de X₁ ∩ X₃ de rayon r_n·h. Pour chaque K_n, Pb₃(X₁∖K_n, X₂, X₃ ∪ K_n) part
    du témoin de Pb₃ (et du K précédent), puis la réduction en donne un témoin du Pb₄ scindé.
    Verdicts: borne du pipeline, écarts décroissants (à 10h près), écart final ≤ final_fraction·Pb₃.
    """
    if config.n != 3:
        raise SetValidationError(f"the limit check needs three sets, got {config.n}")
    schedule = schedule or SolveSchedule()
    report = TheoremReport('limit')
    grid = config.grid
    core = config.intersection(0, 2)
    if not core.any():
        raise SetValidationError("X1 ∩ X3 is empty: no neighbourhood K to split by")
    _, mb_merged = reduction_data(4, eps, delta)
    tol = _allowance(config)
    base = estimate_pb(config, mb_merged, schedule)
    e3 = base.value
    rows, warm = [], [base.witness]
    for r in radii_cells:
        split = split_by_neighborhood(config, neighborhood(core, float(r) * grid.h, grid))
        label = f"K={float(r):g}h"
        merged_est = estimate_pb(merge_last_two(split), mb_merged, schedule, warm_starts=warm)
        try:
            reduced = _reduced_estimate(split, merged_est, mb_merged, schedule, eps, delta)
        except PbLabError as e:
            logger.error(f"Reduction of the split configuration failed ({label}): {str(e)}")
            report.add_flag(f"reduction ran ({label})", False)
            continue
        report.add(f"reduced Pb4 witness bound ({label})", reduced['pipeline_value'], reduced['bound'], tol)
        report.add_flag(f"reduction certificates ({label})", reduced['passed'] and reduced['estimate'] is not None)
        e4 = reduced['estimate'].value if reduced['estimate'] is not None else reduced['pipeline_value']
        rows.append({'radius_cells': float(r), 'Pb3_merged': merged_est.value, 'Pb4_split': e4,
                     'gap': abs(e4 - e3), 'certificates': reduced['certificates']})
        warm = [base.witness, merged_est.witness]
    for previous, current in zip(rows, rows[1:]):
        report.add(f"gap(K={current['radius_cells']:g}h) <= gap(K={previous['radius_cells']:g}h)",
                   current['gap'], previous['gap'], tol)
        report.add(f"Pb4(K={current['radius_cells']:g}h) vs Pb4(K={previous['radius_cells']:g}h)",
                   current['Pb4_split'], previous['Pb4_split'], info=True)
    if rows:
        report.add(f"final gap <= {final_fraction:g} Pb3", rows[-1]['gap'], final_fraction * e3)
    report.details = {'Pb3': e3, 'sequence': rows, 'eps': eps, 'delta': delta}
    logger.info(f"Limit check: Pb3={e3:.6g}, gaps {[round(row['gap'], 6) for row in rows]}")
    return report


def theorem_check_subhomogeneity(config: SetConfig, k: int = 2, schedule: Optional[SolveSchedule] = None,
                                 eps: float = 0.05, loops: Optional[Sequence] = None) -> TheoremReport:
    """Pb_X(kα) ≤ k·Pb_X(α): par power_transform du témoin de α, puis par un calcul direct."""
    schedule = schedule or SolveSchedule()
    report = TheoremReport('subhomogeneity')
    mask = config.union()
    loops = list(loops) if loops else [extract_core_loop(mask, config.grid)]
    base = estimate_pb_x(config, 1, schedule, loops=loops)
    out, cert = power_transform(base.witness, k, eps, mask, loops)
    bound = k * (1.0 + eps) / (1.0 - eps) * base.value
    tol = _allowance(config)
    report.add(f"power_transform witness (k={k})", cert.output_sup, bound, tol)
    report.add_flag(f"windings multiplied by {k}", bool(cert.details.get('windings_multiplied', False)))
    report.add_flag('transformed witness admissible', cert.admissible)
    direct = estimate_pb_x(config, k, schedule, loops=loops)
    report.add(f"independent Pb_X({k}α) estimate", direct.value, bound, tol)
    report.details = {'e_alpha': base.value, 'e_k_alpha': direct.value, 'k': k, 'eps': eps,
                      'certificate': cert.to_dict()}
    return report


def _htpy_pass(config: SetConfig, schedule: SolveSchedule, loops: Optional[Sequence],
               warm: Sequence = ()) -> Dict:
    """Pb₃ sur le disque d'aire 1, puis Pb_X démarré aussi du témoin de Pb₃ dilaté d'aire π."""
    est3 = estimate_pb(config, pb3_datum(), schedule, warm_starts=warm)
    scaled = postcompose(est3.witness, homothety(math.pi))
    ex = estimate_pb_x(config, 1, schedule, loops=loops, warm_starts=[scaled])
    normalized = ex.value / math.pi
    return {'cells': config.grid.cells[0], 'Pb3': est3.value, 'Pb_X': ex.value, 'Pb_X_normalized': normalized,
            'gap': abs(est3.value - normalized), 'windings': ex.metadata.get('windings'),
            'start': ex.metadata.get('start'), 'witness': est3.witness}


def theorem_check_htpy(config: SetConfig, schedule: Optional[SolveSchedule] = None, rel_tol: float = 0.15,
                       loops: Optional[Sequence] = None, fine_config: Optional[SetConfig] = None,
                       fine_loops: Optional[Sequence] = None) -> TheoremReport:
    """
    Pb₃(X₁, X₂, X₃) = Pb_X(α): forme Pb₃ (disque d'aire 1) contre forme Pb_X (boule unité, divisée par π).

    Le témoin de Pb₃ dilaté d'aire π est admissible dans la classe α, donc Pb_X/π ≤ Pb₃ par construction.
    Avec fine_config (même décomposition sur une grille plus fine), une seconde passe démarre du
    témoin prolongé et l'écart doit décroître à 10h près.
    """
    if config.n != 3:
        raise SetValidationError(f"the homotopy check needs three sets, got {config.n}")
    if fine_config is not None and fine_config.n != 3:
        raise SetValidationError(f"the refined configuration needs three sets, got {fine_config.n}")
    schedule = schedule or SolveSchedule()
    report = TheoremReport('htpy')
    coarse = _htpy_pass(config, schedule, loops)
    e3, normalized = coarse['Pb3'], coarse['Pb_X_normalized']
    report.add('|Pb3 - Pb_X/π| within relative tolerance', coarse['gap'], rel_tol * max(e3, normalized))
    report.add('Pb_X/π <= Pb3 (scaled Pb3 witness)', normalized, e3, _allowance(config))
    passes = [coarse]
    if fine_config is not None:
        fine = _htpy_pass(fine_config, schedule, fine_loops, warm=[prolong(coarse['witness'], fine_config.grid)])
        report.add(f"gap at {fine['cells']}² <= gap at {coarse['cells']}²", fine['gap'], coarse['gap'],
                   _allowance(config))
        report.add(f"|Pb3 - Pb_X/π| within relative tolerance at {fine['cells']}²", fine['gap'],
                   rel_tol * max(fine['Pb3'], fine['Pb_X_normalized']))
        passes.append(fine)
    report.details = {'Pb3': e3, 'Pb_X': coarse['Pb_X'], 'Pb_X_normalized': normalized,
                      'windings': coarse['windings'],
                      'passes': [{k: v for k, v in p.items() if k != 'witness'} for p in passes]}
    return report


def _is_nested(small: SetConfig, large: SetConfig) -> bool:
    return small.n == large.n and all(not np.any(a & ~b) for a, b in zip(small.masks, large.masks))


def theorem_check_monotonicity(configs: Sequence[SetConfig], mb: Optional[MarkedBoundary] = None,
                               schedule: Optional[SolveSchedule] = None) -> TheoremReport:
    """
    Monotonie au niveau des témoins: pour X ⊆ Y, le témoin de Y est admissible pour X.

    configs est ordonnée par inclusion croissante; chaque configuration plus petite démarre du témoin
    de la suivante, donc les estimations forment une suite croissante.
    """
    if len(configs) < 2:
        raise SetValidationError("the monotonicity check needs at least two nested configurations")
    for small, large in zip(configs, configs[1:]):
        if not _is_nested(small, large):
            raise SetValidationError("configurations are not nested (each X_k must grow)")
    schedule = schedule or SolveSchedule()
    mb = mb or (pb3_datum() if configs[0].n == 3 else standard_square_datum(configs[0].n))
    report = TheoremReport('monotonicity')
    estimates = [None] * len(configs)
    estimates[-1] = estimate_pb(configs[-1], mb, schedule)
    for i in range(len(configs) - 2, -1, -1):
        estimates[i] = estimate_pb(configs[i], mb, schedule, seed_phi=estimates[i + 1].witness)
        report.add(f"estimate(config {i}) <= estimate(config {i + 1})", estimates[i].value,
                   estimates[i + 1].value, 1e-6)
    report.details = {'values': [est.value for est in estimates]}
    return report


def theorem_check_pb3_pb4(X0: np.ndarray, X1: np.ndarray, Y0: np.ndarray, Y1: np.ndarray, grid,
                          schedule: Optional[SolveSchedule] = None, rel_tol: float = 0.2, eps: float = 0.05,
                          delta: float = 0.01) -> TheoremReport:
    """
    pb₄(X₀, X₁, Y₀, Y₁) = 2·pb₃(X₀, Y₀, X₁ ∪ Y₁), comparées à tolérance relative près.

    pb₄ est Pb₄ de (X₀, Y₀, X₁, Y₁) et 2·pb₃ est Pb₃ de (X₀, Y₀, X₁ ∪ Y₁), tous deux sur des domaines
    d'aire 1. Chaque côté est le meilleur de plusieurs témoins: estimation directe, réduction du
    témoin de Pb₃ (pb₄ ≤ (1+ε)/(1−ε)·(Pb₃ + additif)) et oubli du dernier point du témoin de pb₄
    (2·pb₃ ≤ pb₄).
    """
    schedule = schedule or SolveSchedule()
    report = TheoremReport('pb3_pb4')
    tol = Config.ALLOWANCE_FACTOR * grid.h
    quad = SetConfig(grid, (X0, Y0, X1, Y1), ('X0', 'Y0', 'X1', 'Y1'))
    merged = merge_last_two(quad)
    _, mb_merged = reduction_data(4, eps, delta)

    direct4 = estimate_pb4(X0, X1, Y0, Y1, grid, schedule)
    fg = estimate_pb3_fg(X0, Y0, X1 | Y1, grid, schedule)
    corner3 = estimate_pb(merged, mb_merged, schedule)
    reduced = _reduced_estimate(quad, corner3, mb_merged, schedule, eps, delta)
    report.add('reduced pb4 witness bound', reduced['pipeline_value'], reduced['bound'], tol)
    report.add_flag('reduction certificates', reduced['passed'] and reduced['estimate'] is not None)

    # témoin direct: ordre (Y0, X1, Y1, X0) sur le carré standard, soit (X0, Y0, X1, Y1) depuis (0, 1)
    square = standard_square_datum(4)
    rotated = MarkedBoundary(square.domain, square.points[3:] + square.points[:3])
    candidates = [(direct4.value, direct4.witness, rotated)]
    if reduced['estimate'] is not None:
        candidates.append((reduced['estimate'].value, reduced['estimate'].witness, reduced['datum']))
    e4, witness4, mb4 = min(candidates, key=lambda c: c[0])

    forgotten, cert_forget = forget_point(witness4, quad, mb4)
    report.add_flag('forgotten pb4 witness admissible for (X0, Y0, X1 ∪ Y1)', cert_forget.admissible)
    forget3 = estimate_pb(merged, mb4.forget_last(), schedule, seed_phi=forgotten)
    two_pb3 = min(2.0 * fg.value, corner3.value, forget3.value)

    report.add('2 pb3 <= pb4 (forgotten pb4 witness)', two_pb3, e4, 1e-9 * max(1.0, e4))
    report.add('pb4 <= (1+eps)/(1-eps) Pb3 + additive', e4, reduced['bound'], tol)
    report.add('|pb4 - 2 pb3| within relative tolerance', abs(e4 - two_pb3), rel_tol * max(e4, two_pb3), tol)
    report.add('pb4 direct estimate vs 2 pb3 (FG form)', direct4.value, 2.0 * fg.value, info=True)
    report.details = {'pb4': e4, 'pb3': 0.5 * two_pb3, 'pb4_direct': direct4.value, 'pb3_fg': fg.value,
                      'Pb3_corner': corner3.value, 'Pb3_forgotten': forget3.value,
                      'certificates': reduced['certificates'] + [cert_forget.to_dict()]}
    logger.info(f"pb3/pb4 check: pb4={e4:.6g}, 2pb3={two_pb3:.6g}")
    return report


THEOREM_CHECKS = {
    'reduction': theorem_check_reduction,
    'limit': theorem_check_limit,
    'subhomogeneity': theorem_check_subhomogeneity,
    'htpy': theorem_check_htpy,
    'monotonicity': theorem_check_monotonicity,
    'pb3_pb4': theorem_check_pb3_pb4,
}
