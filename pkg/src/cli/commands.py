"""
Commandes du laboratoire: chaque commande est une fonction pure de (config, graine) vers des artefacts.

Codes de sortie: 0 succès, 1 échec de certification ou de verdict, 2 configuration invalide,
3 erreur d'exécution.
"""
import copy
import inspect
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..config import Config
from ..admissible import circle_loop
from ..dynamics import (chord_experiment, find_chords, hamiltonian_flow, make_hamiltonian, rescaling_check)
from ..errors import ConfigError
from ..fields import grid_from_dict, write_field_binary
from ..fixtures import (CHORD_FIXTURES, fixture_loops, nested_triples, set_fixture, square_quad)
from ..geometry import MarkedBoundary, domain_from_dict
from ..pipelines import power_transform, retract_rescale
from ..planar_maps import certify_jacobian, map_from_recipe
from ..sets import SetConfig, rasterize, rasterize_set
from ..solver import (PbEstimate, SolveSchedule, THEOREM_CHECKS, TheoremReport, estimate_pb, estimate_pb3_fg,
                      estimate_pb4, estimate_pb_x, estimate_series, save_estimate)
from ..utils import canonical_json, config_hash

logger = logging.getLogger('pb_cli')

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SUMMARY_COLUMNS = ['row', 'check', 'name', 'lhs', 'rhs', 'slack', 'tolerance', 'verdict']


# === Utilitaires ===

def effective_config(command: str, config: Dict, seed: Optional[int] = None, grid_override: Optional[int] = None,
                     objective: Optional[str] = None) -> Dict:
    """
    Config avec les options de ligne de commande intégrées (elles entrent dans l'empreinte).

    --grid-override fixe les cellules de la grille, ou le nombre d'échantillons par axe pour certify.
    """
    out = copy.deepcopy(config)
    if seed is not None:
        out['seed'] = int(seed)
    if grid_override is not None:
        if command == 'certify':
            out['n'] = int(grid_override)
        elif command == 'theorems':
            out['cells'] = int(grid_override)
        else:
            out.setdefault('grid', {'kind': 'plane'})['cells'] = int(grid_override)
    if objective is not None:
        if command == 'estimate':
            out.setdefault('invariant', {})['objective'] = objective
        elif command == 'theorems':
            out.setdefault('schedule', {})['objective'] = objective
    return out


def output_dir(command: str, config: Dict, out: Optional[str] = None) -> Path:
    if out:
        return Path(out)
    if config.get('output'):
        return Path(config['output'])
    return Path(Config.RUNS_DIR) / f"{command}-{config_hash(config)[:12]}"


def write_artifact(path: Path, payload: Dict, config: Dict, grid: Optional[Dict] = None) -> Path:
    """JSON canonique avec version de l'outil, empreinte de la config et grille."""
    body = dict(payload)
    body['tool_version'] = Config.TOOL_VERSION
    body['config_hash'] = config_hash(config)
    if grid is not None:
        body['grid'] = grid
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(body), encoding='utf-8')
    return path


def build_schedule(config: Dict) -> SolveSchedule:
    data = dict(config.get('schedule') or {})
    if config.get('seed') is not None:
        data['seed'] = int(config['seed'])
    objective = (config.get('invariant') or {}).get('objective')
    if objective:
        data['objective'] = objective
    return SolveSchedule.from_dict(data)


def build_datum(spec: Dict) -> MarkedBoundary:
    domain = domain_from_dict(spec['domain'])
    marks = spec['marked_points']
    if all(isinstance(m, (int, float)) for m in marks):
        return MarkedBoundary.from_fractions(domain, [float(m) for m in marks])
    if all(isinstance(m, (list, tuple)) for m in marks):
        return MarkedBoundary(domain, tuple((float(m[0]), float(m[1])) for m in marks))
    raise ConfigError("datum.marked_points mixes boundary fractions and points")


def build_sets(config: Dict, cells: Optional[int] = None) -> SetConfig:
    """Fixture nommée (sur sa propre boîte) ou formes rastérisées sur la grille de la config."""
    cells = cells or config['grid'].get('cells')
    if config.get('fixture'):
        return set_fixture(config['fixture'], cells)
    grid = grid_from_dict(config['grid'], cells)
    return rasterize(config['sets'], grid)


def build_loops(config: Dict, sets: SetConfig) -> Optional[List[np.ndarray]]:
    if config.get('loops'):
        return [circle_loop(sets.grid, loop['center'], loop['radius']) for loop in config['loops']]
    if config.get('fixture'):
        return fixture_loops(sets)
    return None


# === estimate ===

def run_estimate(config: Dict, cells: Optional[int] = None) -> Tuple[PbEstimate, SetConfig]:
    """Estimation décrite par config (sans écriture) et la configuration d'ensembles utilisée."""
    schedule = build_schedule(config)
    sets = build_sets(config, cells)
    invariant = config.get('invariant') or {}
    kind = invariant.get('kind', 'Pb_N')
    if kind == 'Pb_N':
        mb = build_datum(config['datum'])
        if mb.n != sets.n:
            raise ConfigError(f"datum.marked_points has {mb.n} points for {sets.n} sets")
        return estimate_pb(sets, mb, schedule), sets
    if kind == 'Pb_X':
        if sets.n != 3:
            raise ConfigError(f"sets: Pb_X needs a decomposition into three sets, got {sets.n}")
        return estimate_pb_x(sets, invariant.get('k', 1), schedule, loops=build_loops(config, sets)), sets
    if kind == 'pb3':
        if sets.n != 3:
            raise ConfigError(f"sets: pb3 takes (X, Y, Z), got {sets.n} sets")
        X, Y, Z = sets.masks
        return estimate_pb3_fg(X, Y, Z, sets.grid, schedule), sets
    if sets.n != 4:
        raise ConfigError(f"sets: pb4 takes (X0, X1, Y0, Y1), got {sets.n} sets")
    X0, X1, Y0, Y1 = sets.masks
    return estimate_pb4(X0, X1, Y0, Y1, sets.grid, schedule), sets


def apply_pipelines(estimate, config: Dict, sets: SetConfig) -> Tuple[object, List]:
    """Applique les étapes de pipeline déclarées au témoin, dans l'ordre."""
    phi = estimate.witness
    certificates = []
    kind = (config.get('invariant') or {}).get('kind', 'Pb_N')
    for step in config.get('pipelines') or []:
        if step['kind'] == 'retract_rescale':
            if kind == 'Pb_X':
                phi, cert = retract_rescale(phi, step['eps'], step.get('K'), sets.union())
            else:
                domain = domain_from_dict(config['datum']['domain']) if kind == 'Pb_N' else None
                if domain is None or domain.kind != 'disc':
                    raise ConfigError("pipelines: retract_rescale needs a disc target (Pb_X or a disc datum)")
                phi, cert = retract_rescale(phi, step['eps'], step.get('K'), None, domain.center, domain.radius)
        else:
            if kind != 'Pb_X':
                raise ConfigError("pipelines: power_transform applies to Pb_X witnesses only")
            phi, cert = power_transform(phi, step.get('k', 2), step['eps'], sets.union(),
                                        build_loops(config, sets))
        certificates.append(cert)
    return phi, certificates


def cmd_estimate(config: Dict, out: Optional[str] = None) -> int:
    """
    Estimation, pipelines éventuels et artefacts estimate.json, witness.bin, bracket.csv.
    """
    out_dir = output_dir('estimate', config, out)
    estimate, sets = run_estimate(config)
    paths = save_estimate(estimate, out_dir, config)
    logger.info(f"{estimate.kind} = {estimate.value:.6g} on {estimate.cells}² -> {paths['estimate']}")

    code = EXIT_OK
    if config.get('pipelines'):
        phi, certificates = apply_pipelines(estimate, config, sets)
        write_field_binary(out_dir / 'pipeline_witness.bin', phi, {'pipelines': [c.name for c in certificates]})
        write_artifact(out_dir / 'certificates.json', {'certificates': [c.to_dict() for c in certificates]},
                       config, estimate.grid)
        failed = [c.name for c in certificates if not c.passed]
        if failed:
            logger.error(f"Pipeline certificates failed: {failed}")
            code = EXIT_VERDICT

    if config.get('series'):
        series = estimate_series(lambda cells: run_estimate(config, cells)[0], config['series'])
        series.to_csv(out_dir / 'series.csv', index=False, float_format='%.17g')
        logger.info(f"Resolution series written to {out_dir / 'series.csv'}")
    return code


# === certify ===

def cmd_certify(config: Dict, out: Optional[str] = None) -> int:
    """Certification de la borne jacobienne d'une recette; échec avec l'argmax en cas de dépassement."""
    out_dir = output_dir('certify', config, out)
    T = map_from_recipe(config['recipe'])
    report = certify_jacobian(T, config.get('region', (-2.0, 2.0, -2.0, 2.0)), config.get('n'),
                              config.get('tolerance'))
    sampling = {'region': list(report.region), 'n': report.n, 'step': report.step}
    path = write_artifact(out_dir / 'certification.json', report.to_dict(), config, sampling)
    if not report.passed:
        logger.error(f"Jacobian bound violated: max {report.max_jacobian:.6g} at {list(report.argmax)} "
                     f"> {report.declared_bound:.6g} + {report.tolerance:.3g}")
        return EXIT_VERDICT
    logger.info(f"Certified {config['recipe']['kind']}: max {report.max_jacobian:.6g} "
                f"≤ {report.declared_bound:.6g} -> {path}")
    return EXIT_OK


# === theorems ===

def _check_inputs(row: Dict, cells: int):
    """Arguments positionnels de la vérification et fixture par défaut."""
    check = row['check']
    if check == 'monotonicity':
        params = dict(row.get('params') or {})
        thicknesses = params.pop('thicknesses', (0.08, 0.12, 0.16))
        return (nested_triples(cells, thicknesses),), params
    if check == 'pb3_pb4':
        quad = square_quad(cells)
        return (quad['X0'], quad['X1'], quad['Y0'], quad['Y1'], quad['grid']), dict(row.get('params') or {})
    default = {'reduction': 'thickened_arcs', 'limit': 'standard_triple'}.get(check, 'circle_decomposition')
    fixture = row.get('fixture', default)
    sets = set_fixture(fixture, cells)
    params = dict(row.get('params') or {})
    if check in ('subhomogeneity', 'htpy'):
        params.setdefault('loops', fixture_loops(sets))
    if check == 'htpy' and params.pop('refine', False):
        # seconde passe: même fixture à 2× la résolution
        fine = set_fixture(fixture, 2 * cells)
        params['fine_config'] = fine
        params['fine_loops'] = fixture_loops(fine)
    return (sets,), params


def run_check(row: Dict, cells: int, schedule: SolveSchedule) -> TheoremReport:
    check = row['check']
    args, params = _check_inputs(row, row.get('cells', cells))
    unknown = set(params) - set(inspect.signature(THEOREM_CHECKS[check]).parameters)
    if unknown:
        raise ConfigError(f"check '{check}' does not take parameters {sorted(unknown)}")
    return THEOREM_CHECKS[check](*args, schedule=schedule, **params)


def _summary_rows(index: int, row: Dict, report: Optional[TheoremReport], error: Optional[str]) -> List[Dict]:
    name = row.get('name', row['check'])
    if error is not None:
        return [{'row': index, 'check': name, 'name': error, 'lhs': np.nan, 'rhs': np.nan, 'slack': np.nan,
                 'tolerance': np.nan, 'verdict': 'error'}]
    frame = report.frame()
    frame['check'] = name
    frame.insert(0, 'row', index)
    return frame[SUMMARY_COLUMNS].to_dict('records')


def cmd_theorems(config: Dict, out: Optional[str] = None) -> int:
    """
    Une ligne par inégalité vérifiée; une vérification en erreur ne touche pas les autres.

    Écrit summary.csv, summary.txt et summary.json; sortie 1 si un verdict échoue.
    """
    out_dir = output_dir('theorems', config, out)
    cells = int(config.get('cells', Config.TEST_GRID * 2))
    schedule = build_schedule(config)
    checks = config.get('checks') or []

    def guarded(item):
        index, row = item
        try:
            return run_check(row, cells, schedule), None
        except Exception as e:
            logger.error(f"Check {index} ({row['check']}) failed to run: {str(e)}")
            return None, f"{type(e).__name__}: {str(e)}"

    with ThreadPoolExecutor(max_workers=Config.MAX_WORKERS) as executor:
        results = list(executor.map(guarded, enumerate(checks)))

    rows = []
    for (index, row), (report, error) in zip(enumerate(checks), results):
        rows.extend(_summary_rows(index, row, report, error))
    summary = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)

    out_dir.mkdir(parents=True, exist_ok=True)
    summary.to_csv(out_dir / 'summary.csv', index=False, float_format='%.17g')
    failing = summary[summary['verdict'].isin(['fail', 'error'])]
    text = summary.to_string(index=False) if len(summary) else '(empty suite)'
    status = 'PASS' if failing.empty else f"FAIL ({len(failing)} rows)"
    (out_dir / 'summary.txt').write_text(f"{config.get('name', 'theorem suite')}: {status}\n\n{text}\n",
                                         encoding='utf-8')
    write_artifact(out_dir / 'summary.json',
                   {'reports': [r.to_dict() if r is not None else {'error': e} for r, e in results],
                    'status': status}, config, {'cells': cells})
    logger.info(f"Theorem suite {status}: {len(summary)} rows -> {out_dir}")
    return EXIT_OK if failing.empty else EXIT_VERDICT


# === chords ===

def chord_config(config: Dict) -> Dict:
    """Fixture nommée complétée par les clés explicites de la config."""
    if not config.get('fixture'):
        return config
    cells = (config.get('grid') or {}).get('cells', 64)
    merged = CHORD_FIXTURES[config['fixture']](cells)
    merged.update({k: v for k, v in config.items() if k not in ('fixture', 'grid')})
    return merged


def cmd_chords(config: Dict, out: Optional[str] = None) -> int:
    """Cordes du flot de G entre A et B, vérification du changement d'échelle, trajectoires en CSV."""
    out_dir = output_dir('chords', config, out)
    spec = chord_config(config)
    grid = grid_from_dict(spec['grid'])
    G = make_hamiltonian(spec['hamiltonian'], grid)
    dt = spec.get('dt', Config.DEFAULT_DT)
    seeds = spec.get('seeds')

    if spec.get('experiment'):
        experiment = spec['experiment']
        X1, X2, X3 = (rasterize_set(s, grid) for s in experiment['sets'])
        report = chord_experiment(G, X1, X2, X3, experiment['pb3_estimate'], experiment.get('margin', 0.1),
                                  seeds, dt)
        A, B = X3 & ~X1, X1 & ~X3
    else:
        A, B = rasterize_set(spec['A'], grid), rasterize_set(spec['B'], grid)
        report = find_chords(G, A, B, spec['p'], seeds, dt)

    code = EXIT_OK
    if spec.get('rescale_delta'):
        p = report.parameters['p']
        check = rescaling_check(G, A, B, spec['rescale_delta'], p, seeds, dt)
        report.details['rescaling'] = check
        if not check['ok']:
            logger.error(f"Rescaling check failed: {check}")
            code = EXIT_VERDICT

    out_dir.mkdir(parents=True, exist_ok=True)
    report.write_csv(out_dir / 'chords.csv')
    write_artifact(out_dir / 'chords.json', report.to_dict(), config, grid.to_dict())
    for i, traj in enumerate(spec.get('trajectories') or []):
        hamiltonian_flow(G, traj['x0'], traj['T'], dt).write_csv(out_dir / f"trajectory_{i}.csv")
    logger.info(f"Chord search: {len(report.chords)} chords, min time {report.min_time} -> {out_dir}")
    return code


COMMANDS = {
    'estimate': cmd_estimate,
    'certify': cmd_certify,
    'theorems': cmd_theorems,
    'chords': cmd_chords,
}
