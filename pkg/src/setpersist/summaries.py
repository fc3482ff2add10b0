"""Summary functions of persistence diagrams.

Two families: accumulated persistence functions over the rotated and
rescaled diagram, and support functions of the lift zonotope built from
the lifetime-weighted diagram measure.  The essential dim-0 point enters
both with its assigned death, so the value range of the filtration is
retained in the summaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidAngle
from .persistence import PersistenceDiagram

CURVE_KINDS = ("APF0", "APF1", "HZ0", "HZ1", "CF", "ESF", "custom")


@dataclass(frozen=True)
class SummaryCurve:
    """A function sampled on a strictly increasing argument grid."""

    args: np.ndarray
    values: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        args = np.asarray(self.args, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if args.ndim != 1 or args.shape != values.shape:
            raise ValueError("args and values must be 1-d arrays of equal length")
        if len(args) > 1 and not np.all(np.diff(args) > 0):
            raise ValueError("args must be strictly increasing")
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class RRPDPoint:
    meanage: float
    lifetime: float
    multiplicity: int

    def __post_init__(self):
        if self.lifetime < 0:
            raise ValueError("lifetime must be non-negative")


@dataclass(frozen=True)
class SphereGrid:
    """Parameter grids (rho, phi) in [0, 2*pi] x [0, pi]."""

    rho_grid: np.ndarray = field(
        default_factory=lambda: np.linspace(0.0, 2 * np.pi, 64)
    )
    phi_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, np.pi, 32))

    def __post_init__(self):
        rho = np.asarray(self.rho_grid, dtype=np.float64)
        phi = np.asarray(self.phi_grid, dtype=np.float64)
        for g, hi, name in ((rho, 2 * np.pi, "rho"), (phi, np.pi, "phi")):
            if np.any(g < 0) or np.any(g > hi + 1e-12):
                raise InvalidAngle(f"{name} grid outside range")
            if len(g) > 1 and not np.all(np.diff(g) > 0):
                raise ValueError(f"{name} grid must be strictly increasing")
        object.__setattr__(self, "rho_grid", rho)
        object.__setattr__(self, "phi_grid", phi)


def rrpd(pd: PersistenceDiagram, q: int) -> list[RRPDPoint]:
    """Rotated and rescaled diagram: points (meanage, lifetime, mult)."""
    b, d, c, _ = pd.dim_arrays(q)
    if len(b) == 0:
        return []
    m = 0.5 * (b + d)
    l = d - b
    agg: dict[tuple[float, float], int] = {}
    for mi, li, ci in zip(m, l, c):
        key = (float(mi), float(li))
        agg[key] = agg.get(key, 0) + int(ci)
    return [RRPDPoint(mi, li, ci) for (mi, li), ci in sorted(agg.items())]


def apf(pd: PersistenceDiagram, q: int, m_grid: np.ndarray) -> SummaryCurve:
    """Accumulated persistence function sampled on a meanage grid.

    APF_q(m) = sum of c_i * l_i over points with meanage <= m; the value
    at a grid point is the right-continuous step value.
    """
    m_grid = np.asarray(m_grid, dtype=np.float64)
    b, d, c, _ = pd.dim_arrays(q)
    kind = f"APF{q}"
    if len(b) == 0:
        return SummaryCurve(m_grid, np.zeros_like(m_grid), kind)
    m = 0.5 * (b + d)
    w = c * (d - b)
    order = np.argsort(m, kind="stable")
    m = m[order]
    csum = np.concatenate([[0.0], np.cumsum(w[order])])
    pos = np.searchsorted(m, m_grid, side="right")
    return SummaryCurve(m_grid, csum[pos], kind)


def sphere_direction(rho: float, phi: float) -> np.ndarray:
    """Unit vector (sin(rho)cos(phi), sin(rho)sin(phi), cos(rho))."""
    if not (0.0 <= rho <= 2 * np.pi + 1e-12):
        raise InvalidAngle(f"rho must lie in [0, 2*pi], got {rho}")
    if not (0.0 <= phi <= np.pi + 1e-12):
        raise InvalidAngle(f"phi must lie in [0, pi], got {phi}")
    return np.array(
        [np.sin(rho) * np.cos(phi), np.sin(rho) * np.sin(phi), np.cos(rho)]
    )


def _support_values(pd: PersistenceDiagram, q: int, directions: np.ndarray):
    b, d, c, _ = pd.dim_arrays(q)
    if len(b) == 0:
        return np.zeros(len(directions))
    lifted = np.stack([np.ones_like(b), b, d], axis=1)  # (k, 3)
    w = c * (d - b)
    dots = directions @ lifted.T  # (ndir, k)
    return np.maximum(dots, 0.0) @ w


def lift_zonotope_support(
    pd: PersistenceDiagram, q: int, directions
) -> SummaryCurve:
    """Support function of the lift zonotope along a list of directions.

    h_Z^q(u) = sum_i c_i * l_i * max(0, <u, (1, b_i, d_i)>); the curve is
    indexed by direction order.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    norms = np.linalg.norm(directions, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("directions must be unit vectors")
    values = _support_values(pd, q, directions)
    return SummaryCurve(np.arange(len(directions), dtype=np.float64), values, f"HZ{q}")


def hz_slice(pd: PersistenceDiagram, q: int, rho_grid: np.ndarray) -> SummaryCurve:
    """Support function along the fixed-phi great circle phi = pi/2."""
    rho_grid = np.asarray(rho_grid, dtype=np.float64)
    if np.any(rho_grid < 0) or np.any(rho_grid > 2 * np.pi + 1e-12):
        raise InvalidAngle("rho grid outside [0, 2*pi]")
    directions = np.stack(
        [np.zeros_like(rho_grid), np.sin(rho_grid), np.cos(rho_grid)], axis=1
    )
    values = _support_values(pd, q, directions)
    return SummaryCurve(rho_grid, values, f"HZ{q}")


def default_hz_rho_grid(n: int = 128) -> np.ndarray:
    return np.linspace(0.0, 2 * np.pi, n)


def write_curve_csv(curve: SummaryCurve, path) -> None:
    with open(path, "w") as fh:
        fh.write("arg,value,kind\n")
        for a, v in zip(curve.args, curve.values):
            fh.write("%s,%s,%s\n" % (format(a, ".17g"), format(v, ".17g"), curve.kind))


def read_curve_csv(path) -> SummaryCurve:
    args, values, kind = [], [], "custom"
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "arg,value,kind":
            raise ValueError("unexpected curve CSV header")
        for line in fh:
            a, v, kind = line.strip().split(",")
            args.append(float(a))
            values.append(float(v))
    return SummaryCurve(np.array(args), np.array(values), kind)
