"""Distance transforms and the signed distance function of a binary raster.

Distances are measured between pixel centers and reported in window
length-units.  The Euclidean transform is exact (squared distances are
integers in pixel units), so downstream persistence values carry no
metric error.  The window edge is not treated as set boundary: a
component touching the edge still measures its depth to the nearest
background pixel inside the window.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DegenerateSet
from .raster import BinaryRaster, Window, _GEOM_RTOL


class ScalarField:
    """Real values on the same square-pixel grid as a BinaryRaster."""

    def __init__(self, window: Window, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        nx, ny = values.shape
        sx, sy = window.width / nx, window.height / ny
        if abs(sx - sy) > _GEOM_RTOL * max(sx, sy):
            raise ValueError("pixels must be square")
        self.window = window
        self.values = values
        self.nx = nx
        self.ny = ny

    @property
    def spacing(self) -> float:
        return self.window.width / self.nx

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.window, -self.values)


def signed_distance(raster: BinaryRaster) -> ScalarField:
    """Signed Euclidean distance to the set: > 0 outside, < 0 inside.

    Exact: at background pixels the distance to the nearest foreground
    pixel center, at foreground pixels minus the distance to the nearest
    background pixel center.  No pixel is at distance zero because
    distinct pixel centers are at least one spacing apart.
    """
    fg = raster.cells
    n_fg = np.count_nonzero(fg)
    if n_fg == 0 or n_fg == fg.size:
        raise DegenerateSet("signed distance needs foreground and background")
    # distance_transform_edt measures, at each pixel, the distance to the
    # nearest zero pixel of its input.
    dist_to_fg = ndimage.distance_transform_edt(~fg)
    dist_to_bg = ndimage.distance_transform_edt(fg)
    values = np.where(fg, -dist_to_bg, dist_to_fg) * raster.spacing
    return ScalarField(raster.window, values)


def chebyshev_distance_to_set(raster: BinaryRaster) -> ScalarField:
    """Chessboard (d_inf) distance to the nearest foreground pixel center."""
    fg = raster.cells
    if not fg.any():
        raise DegenerateSet("chebyshev distance needs at least one foreground pixel")
    dist = ndimage.distance_transform_cdt(~fg, metric="chessboard")
    return ScalarField(raster.window, dist.astype(np.float64) * raster.spacing)


def write_field_csv(field: ScalarField, path) -> None:
    img = field.values.T[::-1]
    with open(path, "w") as fh:
        for row in img:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")
    meta = {
        "width": field.window.width,
        "height": field.window.height,
        "nx": field.nx,
        "ny": field.ny,
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def read_field_csv(path) -> ScalarField:
    img = np.loadtxt(path, delimiter=",", ndmin=2)
    meta = json.loads(Path(str(path) + ".json").read_text())
    window = Window(meta["width"], meta["height"])
    values = img[::-1].T
    if values.shape != (meta["nx"], meta["ny"]):
        raise ValueError("sidecar does not match CSV dimensions")
    return ScalarField(window, values)
