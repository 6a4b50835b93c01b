"""Sérialisation des champs: binaire plat (en-tête JSON + float64), CSV, masques PBM."""
import json
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from ..errors import GridMismatchError
from .grid import GridManifold, ScalarField, VectorMapField

PathLike = Union[str, Path]


def _grid_from_header(header: Dict) -> GridManifold:
    g = header['grid']
    return GridManifold(g['kind'], tuple(g['lower']), tuple(g['extent']), tuple(g['cells']))


def write_field_binary(path: PathLike, field: Union[ScalarField, VectorMapField], extra: Dict = None) -> Path:
    """Une ligne d'en-tête JSON puis les valeurs float64 petit-boutistes en ordre ligne."""
    path = Path(path)
    components = 2 if isinstance(field, VectorMapField) else 1
    header = {'grid': field.grid.to_dict(), 'components': components, 'dtype': '<f8', 'order': 'C'}
    if components == 2:
        header['cs_basepoint'] = None if field.cs_basepoint is None else list(field.cs_basepoint)
    if extra:
        header['extra'] = extra
    payload = np.ascontiguousarray(field.values, dtype='<f8').tobytes()
    with open(path, 'wb') as handle:
        handle.write(json.dumps(header, sort_keys=True).encode('utf-8') + b'\n')
        handle.write(payload)
    return path


def read_field_binary(path: PathLike) -> Union[ScalarField, VectorMapField]:
    with open(path, 'rb') as handle:
        header = json.loads(handle.readline().decode('utf-8'))
        data = np.frombuffer(handle.read(), dtype='<f8')
    grid = _grid_from_header(header)
    if header['components'] == 2:
        values = data.reshape(grid.shape + (2,))
        return VectorMapField(grid, values, header.get('cs_basepoint'))
    return ScalarField(grid, data.reshape(grid.shape))


def field_frame(field: Union[ScalarField, VectorMapField]) -> pd.DataFrame:
    """Tableau ligne par nœud (i, j, x, y, valeurs)."""
    X, Y = field.grid.coords()
    I, J = np.meshgrid(np.arange(field.grid.shape[0]), np.arange(field.grid.shape[1]), indexing='ij')
    data = {'i': I.ravel(), 'j': J.ravel(), 'x': X.ravel(), 'y': Y.ravel()}
    if isinstance(field, VectorMapField):
        data['phi1'] = field.values[..., 0].ravel()
        data['phi2'] = field.values[..., 1].ravel()
    else:
        data['value'] = field.values.ravel()
    return pd.DataFrame(data)


def write_field_csv(path: PathLike, field: Union[ScalarField, VectorMapField]) -> Path:
    """CSV avec une ligne de commentaire portant les métadonnées de la grille."""
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write('# ' + json.dumps({'grid': field.grid.to_dict()}, sort_keys=True) + '\n')
        field_frame(field).to_csv(handle, index=False, float_format='%.17g')
    return path


def read_field_csv(path: PathLike) -> ScalarField:
    with open(path, 'r', encoding='utf-8') as handle:
        header = json.loads(handle.readline()[2:])
        frame = pd.read_csv(handle)
    grid = _grid_from_header(header)
    values = np.zeros(grid.shape)
    values[frame['i'].to_numpy(), frame['j'].to_numpy()] = frame['value'].to_numpy()
    return ScalarField(grid, values)


def write_mask_pbm(path: PathLike, mask: np.ndarray) -> Path:
    """Masque au format PBM ASCII (P1), y vers le haut."""
    path = Path(path)
    mask = np.asarray(mask, dtype=bool)
    image = np.flipud(mask.T).astype(int)
    rows = [' '.join(str(v) for v in row) for row in image]
    path.write_text(f"P1\n{mask.shape[0]} {mask.shape[1]}\n" + '\n'.join(rows) + '\n', encoding='ascii')
    return path


def read_mask_pbm(path: PathLike) -> np.ndarray:
    tokens = [t for line in Path(path).read_text(encoding='ascii').splitlines()
              if not line.startswith('#') for t in line.split()]
    if tokens[0] != 'P1':
        raise GridMismatchError(f"{path} is not a plain PBM file")
    nx, ny = int(tokens[1]), int(tokens[2])
    image = np.asarray([int(t) for t in tokens[3:3 + nx * ny]], dtype=bool).reshape(ny, nx)
    return np.flipud(image).T.copy()
