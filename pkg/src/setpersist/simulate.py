"""Germ-grain samplers and the Quermass-interaction process.

Germs are sampled on the window extended by a margin of at least the
maximal grain extent, so grains reaching into the window from outside
are not under-represented; rasterization clips to the window later.

The determinantal germ process used in the source material for the
repulsive-germ model is out of scope; a Matern type-II hard-core process
with the same intensity stands in for it (model name ``hardcore``, alias
``dpp``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _quermass
from .errors import InfeasibleIntensity, InvalidInput
from .persistence import euler_characteristic
from .raster import Disc, Ellipse, GrainConfiguration, Window, rasterize

DEFAULT_WINDOW = Window(25.0, 25.0)


@dataclass(frozen=True)
class GermSpec:
    """Germ point-process specification.

    kind: one of poisson | matern_cluster | cell | hardcore.  The Matern
    cluster process takes parent intensity kappa, mean cluster size mu
    (kappa * mu must equal the total intensity) and cluster radius; the
    cell process places i.i.d. per-cell counts in {0, 1, 10} with
    probabilities (1/10, 8/9, 1/90), matching unit mean and variance per
    cell of side 1/sqrt(intensity); the hard-core process thins a Poisson
    proposal so that the retained intensity matches ``intensity``.
    """

    kind: str
    intensity: float
    parent_intensity: float | None = None
    mean_per_cluster: float | None = None
    cluster_radius: float | None = None
    cell_side: float | None = None
    inhibition_radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("poisson", "matern_cluster", "cell", "hardcore"):
            raise InvalidInput(f"unknown germ kind {self.kind!r}")
        if self.intensity < 0:
            raise InvalidInput("intensity must be non-negative")
        if self.kind == "matern_cluster" and self.intensity > 0:
            kappa = self.parent_intensity
            mu = self.mean_per_cluster
            if kappa is None and mu is None:
                mu = 5.0
            if kappa is None:
                kappa = self.intensity / mu
            if mu is None:
                mu = self.intensity / kappa
            if abs(kappa * mu - self.intensity) > 1e-9 * max(self.intensity, 1.0):
                raise InvalidInput("matern cluster needs kappa * mu == intensity")
            object.__setattr__(self, "parent_intensity", kappa)
            object.__setattr__(self, "mean_per_cluster", mu)
            if self.cluster_radius is None:
                object.__setattr__(self, "cluster_radius", 2.0)
        if self.kind == "cell" and self.cell_side is None and self.intensity > 0:
            object.__setattr__(self, "cell_side", 1.0 / math.sqrt(self.intensity))
        if self.kind == "hardcore" and self.inhibition_radius is None:
            object.__setattr__(self, "inhibition_radius", 0.8)


@dataclass(frozen=True)
class GrainSpec:
    """Grain distribution: discs with uniform radii, or ellipses with
    uniform axes and uniform orientation on [0, pi)."""

    kind: str
    r_min: float = 0.0
    r_max: float = 0.0
    a_min: float = 0.0
    a_max: float = 0.0
    b_min: float = 0.0
    b_max: float = 0.0

    def __post_init__(self):
        if self.kind == "disc":
            if not 0 < self.r_min <= self.r_max:
                raise InvalidInput("need 0 < r_min <= r_max")
        elif self.kind == "ellipse":
            if not 0 < self.a_min <= self.a_max:
                raise InvalidInput("need 0 < a_min <= a_max")
            if not 0 < self.b_min <= self.b_max:
                raise InvalidInput("need 0 < b_min <= b_max")
        else:
            raise InvalidInput(f"unknown grain kind {self.kind!r}")

    @property
    def max_extent(self) -> float:
        return self.r_max if self.kind == "disc" else self.a_max


@dataclass(frozen=True)
class QuermassParams:
    """Quermass-interaction density exp(theta . (A, L, chi)) relative to
    a reference Boolean disc model."""

    theta: tuple[float, float, float]
    reference_germs: GermSpec
    reference_grains: GrainSpec
    steps: int = 50_000
    seed: int | None = None
    pixels_per_unit: int = 8

    def __post_init__(self):
        if len(self.theta) != 3:
            raise InvalidInput("theta must have three components")
        if self.steps < 1:
            raise InvalidInput("steps must be >= 1")
        if self.reference_germs.kind != "poisson":
            raise InvalidInput("reference germs must be Poisson")
        if self.reference_grains.kind != "disc":
            raise InvalidInput("reference grains must be discs")


@dataclass(frozen=True)
class GeometricFunctionals:
    area: float
    perimeter: float
    euler: int


def _extended(window: Window, margin: float):
    return -margin, -margin, window.width + margin, window.height + margin


def sample_germs(spec: GermSpec, window: Window, margin: float, rng) -> np.ndarray:
    """Sample germ points on the margin-extended window; returns (k, 2)."""
    if margin < 0:
        raise InvalidInput("margin must be non-negative")
    x0, y0, x1, y1 = _extended(window, margin)
    wx, wy = x1 - x0, y1 - y0
    area = wx * wy
    if spec.intensity == 0:
        return np.empty((0, 2))

    if spec.kind == "poisson":
        k = rng.poisson(spec.intensity * area)
        pts = np.column_stack(
            [x0 + rng.random(k) * wx, y0 + rng.random(k) * wy]
        )
        return pts

    if spec.kind == "matern_cluster":
        big_r = spec.cluster_radius
        px0, py0 = x0 - big_r, y0 - big_r
        pwx, pwy = wx + 2 * big_r, wy + 2 * big_r
        n_parents = rng.poisson(spec.parent_intensity * pwx * pwy)
        out = []
        for _ in range(n_parents):
            cx = px0 + rng.random() * pwx
            cy = py0 + rng.random() * pwy
            n_child = rng.poisson(spec.mean_per_cluster)
            if n_child == 0:
                continue
            rad = big_r * np.sqrt(rng.random(n_child))
            ang = rng.random(n_child) * 2 * np.pi
            out.append(
                np.column_stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)])
            )
        pts = np.concatenate(out) if out else np.empty((0, 2))
        keep = (
            (pts[:, 0] >= x0) & (pts[:, 0] <= x1)
            & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
        )
        return pts[keep]

    if spec.kind == "cell":
        side = spec.cell_side
        ncx = int(math.ceil(wx / side))
        ncy = int(math.ceil(wy / side))
        counts = rng.choice(
            [0, 1, 10], size=ncx * ncy, p=[1.0 / 10.0, 8.0 / 9.0, 1.0 / 90.0]
        )
        out = []
        for c in range(ncx * ncy):
            k = counts[c]
            if k == 0:
                continue
            gx = x0 + (c // ncy) * side
            gy = y0 + (c % ncy) * side
            out.append(
                np.column_stack(
                    [gx + rng.random(k) * side, gy + rng.random(k) * side]
                )
            )
        pts = np.concatenate(out) if out else np.empty((0, 2))
        keep = (
            (pts[:, 0] >= x0) & (pts[:, 0] <= x1)
            & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
        )
        return pts[keep]

    # hardcore: Matern type-II thinning, proposal intensity solved so the
    # retained intensity matches the request.
    big_r = spec.inhibition_radius
    disc_area = np.pi * big_r * big_r
    x = spec.intensity * disc_area
    if x >= 1.0:
        raise InfeasibleIntensity(
            f"hard-core intensity {spec.intensity} with radius {big_r} "
            "exceeds the thinning limit"
        )
    lam_prop = -math.log1p(-x) / disc_area
    px0, py0 = x0 - big_r, y0 - big_r
    pwx, pwy = wx + 2 * big_r, wy + 2 * big_r
    k = rng.poisson(lam_prop * pwx * pwy)
    pts = np.column_stack([px0 + rng.random(k) * pwx, py0 + rng.random(k) * pwy])
    marks = rng.random(k)
    keep = np.ones(k, dtype=bool)
    if k > 1:
        order = np.argsort(marks, kind="stable")
        placed_x, placed_y = [], []
        retained = np.zeros(k, dtype=bool)
        for i in order:
            ok = True
            for qx, qy in zip(placed_x, placed_y):
                if (pts[i, 0] - qx) ** 2 + (pts[i, 1] - qy) ** 2 < big_r * big_r:
                    ok = False
                    break
            if ok:
                retained[i] = True
                placed_x.append(pts[i, 0])
                placed_y.append(pts[i, 1])
        keep = retained
    pts = pts[keep]
    inside = (
        (pts[:, 0] >= x0) & (pts[:, 0] <= x1)
        & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
    )
    return pts[inside]


def _grain_at(grain: GrainSpec, center, rng):
    if grain.kind == "disc":
        r = rng.uniform(grain.r_min, grain.r_max)
        return Disc((center[0], center[1]), r)
    a = rng.uniform(grain.a_min, grain.a_max)
    b = rng.uniform(grain.b_min, grain.b_max)
    # uniform orientation: the axis distributions leave it unspecified;
    # independent axis draws can cross, so order them (orientation is
    # uniform, so swapping axes is distributionally neutral)
    phi = rng.uniform(0.0, np.pi)
    return Ellipse((center[0], center[1]), max(a, b), min(a, b), phi)


def _intersects_window(grain, window: Window) -> bool:
    cx, cy = grain.center
    ext = grain.extent
    dx = max(0.0 - cx, 0.0, cx - window.width)
    dy = max(0.0 - cy, 0.0, cy - window.height)
    return dx * dx + dy * dy <= ext * ext


def sample_boolean(
    germ: GermSpec, grain: GrainSpec, window: Window, rng
) -> GrainConfiguration:
    """Boolean model: independent grains at germ points; grains that
    reach into the window from the margin are retained."""
    margin = grain.max_extent
    germs = sample_germs(germ, window, margin, rng)
    grains = [_grain_at(grain, g, rng) for g in germs]
    grains = [g for g in grains if _intersects_window(g, window)]
    return GrainConfiguration(window, tuple(grains))


# -- exact/raster geometric functionals of disc configurations ---------------


def _disc_arrays(config: GrainConfiguration):
    for g in config.grains:
        if not isinstance(g, Disc):
            raise InvalidInput("geometric functionals require disc-only grains")
    cx = np.array([g.center[0] for g in config.grains], dtype=np.float64)
    cy = np.array([g.center[1] for g in config.grains], dtype=np.float64)
    cr = np.array([g.radius for g in config.grains], dtype=np.float64)
    return cx, cy, cr


def union_perimeter(config: GrainConfiguration) -> float:
    """Exact total exposed arc length of a union of discs."""
    cx, cy, cr = _disc_arrays(config)
    return float(_quermass._perimeter_from_scratch(cx, cy, cr, len(cr)))


def geometric_functionals(
    config: GrainConfiguration, pixels_per_unit: int = 8
) -> GeometricFunctionals:
    """Area, perimeter and Euler characteristic of a disc union.

    Perimeter is exact (pairwise circle-intersection arc clipping); area
    and Euler characteristic come from a fine rasterization of the full
    union over its bounding box.
    """
    if len(config.grains) == 0:
        return GeometricFunctionals(0.0, 0.0, 0)
    cx, cy, cr = _disc_arrays(config)
    perimeter = float(_quermass._perimeter_from_scratch(cx, cy, cr, len(cr)))

    h = 1.0 / pixels_per_unit
    pad = 2 * h
    x0 = float(np.min(cx - cr)) - pad
    y0 = float(np.min(cy - cr)) - pad
    x1 = float(np.max(cx + cr)) + pad
    y1 = float(np.max(cy + cr)) + pad
    nx = int(math.ceil((x1 - x0) * pixels_per_unit)) + 1
    ny = int(math.ceil((y1 - y0) * pixels_per_unit)) + 1
    box = Window(nx * h, ny * h)
    shifted = GrainConfiguration(
        box, tuple(Disc((g.center[0] - x0, g.center[1] - y0), g.radius)
                   for g in config.grains)
    )
    raster = rasterize(shifted, nx)
    area = float(np.count_nonzero(raster.cells)) * h * h
    return GeometricFunctionals(area, perimeter, euler_characteristic(raster))


def quermass_functionals_chain_convention(
    config: GrainConfiguration, window: Window, margin: float,
    pixels_per_unit: int = 8,
) -> tuple[float, float, float]:
    """(A, L, chi) in the exact convention the MH chain accumulates.

    chi is V - E + F of the closed-square pixel complex on the grid
    anchored at the extended-window origin; used for chain
    initialization and for importance-weight cross-checks in tests.
    """
    cx, cy, cr = _disc_arrays(config)
    n = len(cr)
    x0, y0, _, _ = _extended(window, margin)
    h = 1.0 / pixels_per_unit
    perim = float(_quermass._perimeter_from_scratch(cx, cy, cr, n))
    area, chi = _quermass._area_chi_from_scratch(cx, cy, cr, n, h, x0, y0)
    return float(area), perim, float(chi)


def quermass_mh(
    params: QuermassParams, window: Window, rng, return_trace: bool = False
):
    """Sample one Quermass-interaction configuration by birth/death/move
    Metropolis-Hastings from a reference-Boolean initial state."""
    germ = params.reference_germs
    grain = params.reference_grains
    margin = grain.max_extent
    x0, y0, x1, y1 = _extended(window, margin)
    wx, wy = x1 - x0, y1 - y0

    init = sample_boolean(germ, grain, window, rng)
    mean_n = germ.intensity * wx * wy
    cap = max(2048, int(8 * mean_n))
    cx = np.zeros(cap)
    cy = np.zeros(cap)
    cr = np.zeros(cap)
    n0 = len(init.grains)
    if n0 > cap:
        raise InvalidInput("initial configuration exceeds chain capacity")
    for i, g in enumerate(init.grains):
        cx[i], cy[i], cr[i] = g.center[0], g.center[1], g.radius

    h = 1.0 / params.pixels_per_unit
    a0, l0, chi0 = quermass_functionals_chain_convention(
        init, window, margin, params.pixels_per_unit
    )
    seed = params.seed
    if seed is None:
        seed = int(rng.integers(0, 2**31 - 1))
    n_trace = 256 if return_trace else 0
    trace = np.zeros((n_trace, 4))
    trace_every = max(1, params.steps // n_trace) if return_trace else 0

    n, area, per, chi, accepted, guarded = _quermass._run_chain(
        cx, cy, cr, n0, params.steps,
        params.theta[0], params.theta[1], params.theta[2], germ.intensity,
        x0, y0, wx, wy,
        grain.r_min, grain.r_max, h, seed,
        a0, l0, chi0, trace, trace_every,
    )
    grains = tuple(
        Disc((cx[i], cy[i]), cr[i])
        for i in range(n)
        if _intersects_window(Disc((cx[i], cy[i]), cr[i]), window)
    )
    config = GrainConfiguration(window, grains)
    if return_trace:
        return config, trace
    return config


# -- named models of the simulation studies ----------------------------------

_BOOLEAN_GERMS = GermSpec("poisson", 0.4)
_DISC_GRAINS = GrainSpec("disc", r_min=0.5, r_max=1.0)

MODELS = {
    "boolean": {"germ": _BOOLEAN_GERMS, "grain": _DISC_GRAINS},
    "boolean_ellipse": {
        "germ": _BOOLEAN_GERMS,
        "grain": GrainSpec("ellipse", a_min=0.5, a_max=1.0, b_min=0.2, b_max=0.7),
    },
    "cluster": {"theta": (0.62, -0.86, 0.7)},
    "repulsive": {"theta": (-1.0, 1.0, 0.0)},
    "matern_cluster": {
        "germ": GermSpec(
            "matern_cluster", 0.4,
            parent_intensity=0.08, mean_per_cluster=5.0, cluster_radius=2.0,
        ),
        "grain": _DISC_GRAINS,
    },
    "cell": {"germ": GermSpec("cell", 0.4), "grain": _DISC_GRAINS},
    "hardcore": {
        "germ": GermSpec("hardcore", 0.4, inhibition_radius=0.8),
        "grain": _DISC_GRAINS,
    },
}
MODEL_ALIASES = {"dpp": "hardcore"}


def model_names() -> list[str]:
    return sorted(MODELS) + sorted(MODEL_ALIASES)


def sample_model(
    name: str, window: Window, rng, chain_steps: int | None = None
) -> GrainConfiguration:
    """One realisation of a named model on the given window."""
    key = MODEL_ALIASES.get(name, name)
    if key not in MODELS:
        raise InvalidInput(f"unknown model {name!r}; know {model_names()}")
    spec = MODELS[key]
    if "theta" in spec:
        params = QuermassParams(
            spec["theta"], _BOOLEAN_GERMS, _DISC_GRAINS,
            steps=chain_steps or 50_000,
        )
        return quermass_mh(params, window, rng)
    return sample_boolean(spec["germ"], spec["grain"], window, rng)
