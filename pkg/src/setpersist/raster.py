"""Window geometry, parametric grains and rasterization to binary images.

Conventions used throughout the package:

* the window is the axis-aligned rectangle ``[0, width] x [0, height]``;
* a raster has ``nx`` columns and ``ny`` rows of square pixels, pixel
  ``(i, j)`` has its center at ``((i + 0.5) * width / nx,
  (j + 0.5) * height / ny)``;
* ``cells[i, j]`` is True on foreground.  A pixel belongs to a grain iff
  its center does (center-point test, the documented discretization
  convention).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidGrain

_GEOM_RTOL = 1e-9


@dataclass(frozen=True)
class Window:
    """Rectangular observation window with physical dimensions."""

    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("window sides must be positive")

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidGrain(f"disc radius must be positive, got {self.radius}")

    @property
    def extent(self) -> float:
        return self.radius


@dataclass(frozen=True)
class Ellipse:
    center: tuple[float, float]
    semi_major: float
    semi_minor: float
    orientation: float  # radians in [0, pi)

    def __post_init__(self):
        if not (self.semi_major >= self.semi_minor > 0):
            raise InvalidGrain(
                "ellipse needs semi_major >= semi_minor > 0, got "
                f"({self.semi_major}, {self.semi_minor})"
            )
        if not (0.0 <= self.orientation < np.pi):
            raise InvalidGrain("ellipse orientation must lie in [0, pi)")

    @property
    def extent(self) -> float:
        return self.semi_major


Grain = Disc | Ellipse


@dataclass(frozen=True)
class GrainConfiguration:
    """A finite list of grains inside (or overlapping) a window."""

    window: Window
    grains: tuple[Grain, ...]

    def __post_init__(self):
        object.__setattr__(self, "grains", tuple(self.grains))

    def __len__(self) -> int:
        return len(self.grains)


class BinaryRaster:
    """Rasterized random-set realisation on a grid of square pixels."""

    def __init__(self, window: Window, cells: np.ndarray):
        cells = np.asarray(cells, dtype=bool)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-d boolean array")
        nx, ny = cells.shape
        if nx < 2 or ny < 2:
            raise ValueError("raster needs at least 2x2 pixels")
        sx = window.width / nx
        sy = window.height / ny
        if abs(sx - sy) > _GEOM_RTOL * max(sx, sy):
            raise ValueError(
                f"pixels must be square: width/nx={sx} != height/ny={sy}"
            )
        self.window = window
        self.cells = cells
        self.nx = nx
        self.ny = ny

    @property
    def spacing(self) -> float:
        return self.window.width / self.nx

    def complement(self) -> "BinaryRaster":
        return BinaryRaster(self.window, ~self.cells)

    def pixel_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical x coordinates of columns and y coordinates of rows."""
        s = self.spacing
        xs = (np.arange(self.nx) + 0.5) * s
        ys = (np.arange(self.ny) + 0.5) * s
        return xs, ys

    def __eq__(self, other):
        return (
            isinstance(other, BinaryRaster)
            and self.window == other.window
            and np.array_equal(self.cells, other.cells)
        )


def derived_ny(window: Window, nx: int) -> int:
    """Row count keeping pixels square for the given column count."""
    return int(round(nx * window.height / window.width))


def rasterize(config: GrainConfiguration, nx: int) -> BinaryRaster:
    """Rasterize a grain configuration by the pixel center-point test.

    A pixel is foreground iff its center lies inside the union of the
    grains; grains are implicitly clipped to the window.
    """
    if nx < 2:
        raise ValueError("nx must be at least 2")
    window = config.window
    ny = derived_ny(window, nx)
    s = window.width / nx
    cells = np.zeros((nx, ny), dtype=bool)
    xs = (np.arange(nx) + 0.5) * s
    ys = (np.arange(ny) + 0.5) * s
    for grain in config.grains:
        cx, cy = grain.center
        ext = grain.extent
        i0 = max(0, int(np.floor((cx - ext) / s - 0.5)))
        i1 = min(nx, int(np.ceil((cx + ext) / s + 0.5)))
        j0 = max(0, int(np.floor((cy - ext) / s - 0.5)))
        j1 = min(ny, int(np.ceil((cy + ext) / s + 0.5)))
        if i0 >= i1 or j0 >= j1:
            continue
        dx = xs[i0:i1, None] - cx
        dy = ys[None, j0:j1] - cy
        if isinstance(grain, Disc):
            inside = dx * dx + dy * dy <= grain.radius**2
        else:
            c, si = np.cos(grain.orientation), np.sin(grain.orientation)
            u = dx * c + dy * si
            v = -dx * si + dy * c
            inside = (u / grain.semi_major) ** 2 + (v / grain.semi_minor) ** 2 <= 1.0
        cells[i0:i1, j0:j1] |= inside
    return BinaryRaster(window, cells)


def area_fraction(raster: BinaryRaster) -> float:
    """Fraction of foreground pixels."""
    return float(np.count_nonzero(raster.cells)) / raster.cells.size


# ---------------------------------------------------------------------------
# File formats.  PGM is binary P5 with 255 = foreground, written top row
# (largest y) first.  CSV holds one raster row per line in the same order.
# Both carry a JSON sidecar with the window geometry.


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".json")


def write_sidecar(raster: BinaryRaster, path) -> None:
    meta = {
        "width": raster.window.width,
        "height": raster.window.height,
        "nx": raster.nx,
        "ny": raster.ny,
    }
    _sidecar_path(Path(path)).write_text(json.dumps(meta, sort_keys=True) + "\n")


def read_sidecar(path) -> tuple[Window, int, int]:
    meta = json.loads(_sidecar_path(Path(path)).read_text())
    return Window(meta["width"], meta["height"]), int(meta["nx"]), int(meta["ny"])


def _to_image(cells: np.ndarray) -> np.ndarray:
    # (nx, ny) indexed [i, j] -> image rows top-first: row r = j = ny-1-r
    return cells.T[::-1]


def _from_image(img: np.ndarray) -> np.ndarray:
    return img[::-1].T


def write_pgm(raster: BinaryRaster, path) -> None:
    img = np.where(_to_image(raster.cells), 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (raster.nx, raster.ny))
        fh.write(img.tobytes())
    write_sidecar(raster, path)


def read_pgm(path) -> BinaryRaster:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError("only binary P5 PGM is supported")
        dims = fh.readline().split()
        nx, ny = int(dims[0]), int(dims[1])
        maxval = int(fh.readline())
        data = np.frombuffer(fh.read(nx * ny), dtype=np.uint8).reshape(ny, nx)
    window, snx, sny = read_sidecar(path)
    if (snx, sny) != (nx, ny):
        raise ValueError("sidecar does not match PGM dimensions")
    return BinaryRaster(window, _from_image(data > maxval // 2))


def write_raster_csv(raster: BinaryRaster, path) -> None:
    img = _to_image(raster.cells).astype(np.uint8)
    with open(path, "w") as fh:
        for row in img:
            fh.write(",".join("1" if v else "0" for v in row) + "\n")
    write_sidecar(raster, path)


def read_raster_csv(path) -> BinaryRaster:
    img = np.loadtxt(path, delimiter=",", dtype=np.uint8, ndmin=2)
    window, nx, ny = read_sidecar(path)
    if img.shape != (ny, nx):
        raise ValueError("sidecar does not match CSV dimensions")
    return BinaryRaster(window, _from_image(img > 0))


def write_config_json(config: GrainConfiguration, path) -> None:
    grains = []
    for g in config.grains:
        if isinstance(g, Disc):
            grains.append(
                {"kind": "disc", "center": list(g.center), "radius": g.radius}
            )
        else:
            grains.append(
                {
                    "kind": "ellipse",
                    "center": list(g.center),
                    "semi_major": g.semi_major,
                    "semi_minor": g.semi_minor,
                    "orientation": g.orientation,
                }
            )
    doc = {
        "window": {"width": config.window.width, "height": config.window.height},
        "grains": grains,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def read_config_json(path) -> GrainConfiguration:
    doc = json.loads(Path(path).read_text())
    window = Window(doc["window"]["width"], doc["window"]["height"])
    grains: list[Grain] = []
    for g in doc["grains"]:
        if g["kind"] == "disc":
            grains.append(Disc(tuple(g["center"]), g["radius"]))
        elif g["kind"] == "ellipse":
            grains.append(
                Ellipse(
                    tuple(g["center"]),
                    g["semi_major"],
                    g["semi_minor"],
                    g["orientation"],
                )
            )
        else:
            raise InvalidGrain(f"unknown grain kind {g['kind']!r}")
    return GrainConfiguration(window, tuple(grains))
