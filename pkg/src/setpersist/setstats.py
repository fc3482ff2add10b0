"""Classical random-set summary estimators on rasters.

The extended empty-space function is the empirical distribution function
of the signed distance, which realizes both the dilation branch (r >= 0)
and the erosion branch (r < 0) of its definition.  The capacity
functional is estimated on axis-aligned squares rB (B the centered unit
square, so rB has side r) with minus-sampling border correction.
"""

from __future__ import annotations

import numpy as np

from .distance import ScalarField, chebyshev_distance_to_set
from .errors import InsufficientWindow
from .raster import BinaryRaster, area_fraction
from .summaries import SummaryCurve


def extended_empty_space(field: ScalarField, r_grid: np.ndarray) -> SummaryCurve:
    """Empirical CDF of the signed distance values on a grid of radii."""
    r_grid = np.asarray(r_grid, dtype=np.float64)
    vals = np.sort(field.values.ravel())
    counts = np.searchsorted(vals, r_grid, side="right")
    return SummaryCurve(r_grid, counts / vals.size, "ESF")


def default_esf_grid(field: ScalarField, n: int = 200) -> np.ndarray:
    lo = float(field.values.min())
    hi = float(field.values.max())
    return np.linspace(lo, hi, n)


def capacity_on_squares(raster: BinaryRaster, r_grid: np.ndarray) -> SummaryCurve:
    """Fraction of r-squares hitting the set, minus-sampling corrected.

    T(r) is estimated as the fraction of pixels x with Chebyshev distance
    to the set <= r/2, among pixels whose r-square lies fully inside the
    window.
    """
    r_grid = np.asarray(r_grid, dtype=np.float64)
    if np.any(r_grid < 0):
        raise ValueError("r grid must be non-negative")
    if len(r_grid) > 1 and not np.all(np.diff(r_grid) > 0):
        raise ValueError("r grid must be strictly increasing")
    w = raster.window
    if np.any(r_grid > min(w.width, w.height)):
        raise InsufficientWindow("r/2 exceeds half the window size")

    if not raster.cells.any():
        return SummaryCurve(r_grid, np.zeros_like(r_grid), "CF")

    cheb = chebyshev_distance_to_set(raster).values
    xs, ys = raster.pixel_centers()
    margin = np.minimum.outer(
        np.minimum(xs, w.width - xs), np.minimum(ys, w.height - ys)
    )
    values = np.empty_like(r_grid)
    for k, r in enumerate(r_grid):
        eligible = margin >= r / 2
        n_eligible = np.count_nonzero(eligible)
        if n_eligible == 0:
            raise InsufficientWindow(f"no pixel admits an r-square at r={r}")
        hit = np.count_nonzero(cheb[eligible] <= r / 2)
        values[k] = hit / n_eligible
    return SummaryCurve(r_grid, values, "CF")


def default_cf_grid(window, n: int = 100) -> np.ndarray:
    return np.linspace(0.0, min(window.width, window.height) / 4.0, n)


__all__ = [
    "extended_empty_space",
    "capacity_on_squares",
    "default_esf_grid",
    "default_cf_grid",
    "area_fraction",
]
