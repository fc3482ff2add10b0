"""Halfspace depths, integrated functional depths, and outlier orders.

The order-J integrated depth of a curve averages the J-variate Tukey
depth of its value tuples over uniformly drawn argument tuples.  Order 1
separates magnitude outliers, order 2 slope outliers, order 3 shape
(convexity) outliers; a curve is assigned the smallest order at which it
is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import GridMismatch, InsufficientSample, InvalidInput
from .summaries import SummaryCurve


class FunctionalSample:
    """A sample of curves sharing one argument grid."""

    def __init__(self, curves, labels=None):
        curves = list(curves)
        if len(curves) < 2:
            raise InvalidInput("a functional sample needs at least 2 curves")
        args = curves[0].args
        for c in curves[1:]:
            if len(c.args) != len(args) or not np.array_equal(c.args, args):
                raise GridMismatch("curves must share one argument grid")
        self.args = args
        self.values = np.stack([c.values for c in curves])  # (n, m)
        if labels is None:
            labels = [str(i) for i in range(len(curves))]
        if len(labels) != len(curves):
            raise InvalidInput("one label per curve")
        self.labels = list(labels)

    @classmethod
    def from_matrix(cls, args, values, labels=None) -> "FunctionalSample":
        curves = [SummaryCurve(args, row) for row in np.asarray(values, dtype=float)]
        return cls(curves, labels)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass
class OutlierReport:
    labels: list
    fd1: np.ndarray
    fd2: np.ndarray
    fd3: np.ndarray
    order: np.ndarray  # 0 = not an outlier, else 1|2|3

    def flagged(self) -> np.ndarray:
        return self.order > 0

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("label,fd1,fd2,fd3,order\n")
            for i, lab in enumerate(self.labels):
                order = "none" if self.order[i] == 0 else str(int(self.order[i]))
                fh.write(
                    "%s,%s,%s,%s,%s\n"
                    % (lab, format(self.fd1[i], ".17g"), format(self.fd2[i], ".17g"),
                       format(self.fd3[i], ".17g"), order)
                )


def _depth_1d(x, cloud) -> float:
    n = len(cloud)
    le = np.count_nonzero(cloud <= x)
    ge = np.count_nonzero(cloud >= x)
    return min(le, ge) / n


def _depth_2d_exact(x, cloud) -> float:
    """Exact bivariate Tukey depth.

    Writes the minimal closed-halfplane count as ties + (nonzero count
    minus the largest number of offsets inside an open half-circle); the
    latter is found by scanning arcs that open just after each offset,
    using exact cross-product sign tests.
    """
    v = cloud - x
    nz = (v[:, 0] != 0) | (v[:, 1] != 0)
    m0 = np.count_nonzero(~nz)
    w = v[nz]
    big_m = len(w)
    if big_m == 0:
        return m0 / len(cloud)
    cross = np.outer(w[:, 0], w[:, 1]) - np.outer(w[:, 1], w[:, 0])
    k_max = int((cross > 0).sum(axis=1).max())
    return (m0 + big_m - k_max) / len(cloud)


def _random_directions(n_directions, rng) -> np.ndarray:
    u = rng.standard_normal((n_directions, 3))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def _depth_3d_directional(x, cloud, u) -> float:
    proj = cloud @ u.T  # (n, K)
    xp = x @ u.T  # (K,)
    le = (proj <= xp).sum(axis=0)
    ge = (proj >= xp).sum(axis=0)
    return int(np.minimum(le, ge).min()) / len(cloud)


def halfspace_depth(x, cloud, n_directions: int = 512, rng=None) -> float:
    """Tukey halfspace depth of a point in a J-variate cloud, J in {1,2,3}.

    J = 1 and J = 2 are exact; J = 3 is approximated as the minimum over
    ``n_directions`` random projections of the univariate depth.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cloud = np.asarray(cloud, dtype=float)
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    if cloud.shape[0] == 0:
        raise InvalidInput("cloud must be non-empty")
    j = x.shape[0]
    if j not in (1, 2, 3) or cloud.shape[1] != j:
        raise InvalidInput(f"expected a cloud of {x.shape[0]}-vectors")
    if j == 1:
        return _depth_1d(x[0], cloud[:, 0])
    if j == 2:
        return _depth_2d_exact(x, cloud)
    if rng is None:
        rng = np.random.default_rng(0)
    return _depth_3d_directional(x, cloud, _random_directions(n_directions, rng))


# -- vectorized all-curves kernels used by detect_outliers -------------------


def _depth1_all(values) -> np.ndarray:
    """Mean univariate depth over all grid points, for every curve."""
    n = values.shape[0]
    le = rankdata(values, method="max", axis=0)
    ge = n + 1 - rankdata(values, method="min", axis=0)
    return np.minimum(le, ge).mean(axis=1) / n


def _depth2_all_one_draw(p) -> np.ndarray:
    """Exact bivariate depth of every row of p (n, 2) within the rows."""
    n = p.shape[0]
    vx = p[None, :, 0] - p[:, None, 0]  # v[i, j] = p[j] - p[i]
    vy = p[None, :, 1] - p[:, None, 1]
    zero = (vx == 0) & (vy == 0)
    m0 = zero.sum(axis=1)
    cross = np.einsum("ij,ik->ijk", vx, vy) - np.einsum("ij,ik->ijk", vy, vx)
    k_max = (cross > 0).sum(axis=2).max(axis=1)
    return (m0 + (n - m0) - k_max) / n


def _depth3_all_one_draw(p, u) -> np.ndarray:
    """Directional trivariate depth of every row of p (n, 3)."""
    n = p.shape[0]
    proj = p @ u.T  # (n, K)
    le = rankdata(proj, method="max", axis=0)
    ge = n + 1 - rankdata(proj, method="min", axis=0)
    return np.minimum(le, ge).min(axis=1) / n


def _all_tuples(m, j):
    grids = np.meshgrid(*([np.arange(m)] * j), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def integrated_depth(
    f: SummaryCurve,
    sample: FunctionalSample,
    j: int,
    draws: int = 2000,
    n_directions: int = 512,
    rng=None,
) -> float:
    """Monte Carlo order-J integrated depth of a curve within a sample.

    Argument tuples are drawn uniformly (with replacement) from the grid
    indices.  The J = 1 depth is computed exactly as the full grid
    average whenever ``draws`` covers the grid, and J in {2, 3} switch to
    exhaustive enumeration when ``draws`` covers all m**J tuples.
    """
    if j not in (1, 2, 3):
        raise InvalidInput("order must be 1, 2 or 3")
    if len(f.args) != len(sample.args) or not np.array_equal(f.args, sample.args):
        raise GridMismatch("curve is not on the sample's argument grid")
    if rng is None:
        rng = np.random.default_rng(0)
    y = f.values
    cloud = sample.values
    m = len(y)

    if j == 1:
        if draws >= m:
            idx = np.arange(m)[:, None]
        else:
            idx = rng.integers(0, m, size=(draws, 1))
    elif draws >= m**j:
        idx = _all_tuples(m, j)
    else:
        idx = rng.integers(0, m, size=(draws, j))

    total = 0.0
    u = _random_directions(n_directions, rng) if j == 3 else None
    for tup in idx:
        pts = cloud[:, tup]
        q = y[tup]
        if j == 1:
            total += _depth_1d(q[0], pts[:, 0])
        elif j == 2:
            total += _depth_2d_exact(q, pts)
        else:
            total += _depth_3d_directional(q, pts, u)
    return total / len(idx)


def _boxplot_fence(values) -> float:
    q1, q3 = np.percentile(values, [25, 75])
    return q1 - 1.5 * (q3 - q1)


def detect_outliers(
    sample: FunctionalSample,
    alpha: float,
    draws: int = 2000,
    n_directions: int = 512,
    seed: int = 0,
) -> OutlierReport:
    """Classify sample curves into order-1/2/3 outliers.

    Order 1 flags the ceil(alpha * n) curves of smallest order-1 depth
    (ties at the threshold included); orders 2 and 3 flag depths below
    the 1.5-IQR lower boxplot fence of the respective depth; each curve
    receives the smallest order at which it is flagged.  The Monte Carlo
    argument tuples for orders 2 and 3 are shared by all curves, so the
    result does not depend on curve ordering; a fixed seed makes it
    deterministic.
    """
    if not 0 < alpha < 1:
        raise InvalidInput("alpha must lie in (0, 1)")
    n = len(sample)
    if n < 5:
        raise InsufficientSample("need at least 5 curves")
    y = sample.values
    m = y.shape[1]
    rng = np.random.default_rng(seed)

    fd1 = _depth1_all(y)

    if draws >= m * m:
        idx2 = _all_tuples(m, 2)
    else:
        idx2 = rng.integers(0, m, size=(draws, 2))
    fd2 = np.zeros(n)
    for tup in idx2:
        fd2 += _depth2_all_one_draw(y[:, tup])
    fd2 /= len(idx2)

    if draws >= m**3:
        idx3 = _all_tuples(m, 3)
    else:
        idx3 = rng.integers(0, m, size=(draws, 3))
    u = _random_directions(n_directions, rng)
    fd3 = np.zeros(n)
    for tup in idx3:
        fd3 += _depth3_all_one_draw(y[:, tup], u)
    fd3 /= len(idx3)

    k = int(np.ceil(alpha * n))
    threshold1 = np.sort(fd1)[k - 1]
    flag1 = fd1 <= threshold1
    flag2 = fd2 < _boxplot_fence(fd2)
    flag3 = fd3 < _boxplot_fence(fd3)

    order = np.zeros(n, dtype=np.int64)
    order[flag3] = 3
    order[flag2] = 2
    order[flag1] = 1
    return OutlierReport(sample.labels, fd1, fd2, fd3, order)
