"""Half-domain lattice, stencils, traces, and weighted half-ball integrals.

The computational domain is the box [-L, L]^(d-1) x [0, H] in ambient
dimension d (2 or 3): d-1 tangential axes plus the normal axis y.  The
bottom face y = 0 carries the penalized (flat) boundary; all other faces
carry Dirichlet data.  Nodes live on a uniform lattice with spacing
h = 1/N, stored y-outer: values[j, i] for d = 2 and values[j, i1, i2]
for d = 3, with the last tangential axis the distinguished one (the
reference contact profile varies along it).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

INTERIOR = 0
FLAT = 1
DIRICHLET = 2

_grid_ids = itertools.count()


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the half-domain lattice.

    resolution N is in nodes per unit length (spacing h = 1/N); the
    extents must be lattice-commensurate so that x = 0 is a node and the
    box closes exactly.
    """

    dimension: int = 2
    tangential_extent: float = 1.0
    normal_extent: float = 1.0
    resolution: int = 64

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dimension}")
        if self.resolution < 8:
            raise ValueError(f"resolution must be >= 8, got {self.resolution}")
        if self.tangential_extent <= 0 or self.normal_extent <= 0:
            raise ValueError("extents must be positive")
        for name, extent in (("tangential_extent", self.tangential_extent),
                             ("normal_extent", self.normal_extent)):
            steps = extent * self.resolution
            if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
                raise ValueError(f"{name} * resolution must be an integer, got {steps}")
        if round(self.normal_extent * self.resolution) < 2:
            raise ValueError("need at least 3 node layers in y (H * N >= 2)")

    @property
    def h(self) -> float:
        return 1.0 / self.resolution

    @property
    def n_tangential(self) -> int:
        """Nodes per tangential axis: 2*L*N + 1, always odd so x = 0 is a node."""
        return 2 * round(self.tangential_extent * self.resolution) + 1

    @property
    def n_normal(self) -> int:
        return round(self.normal_extent * self.resolution) + 1

    @property
    def shape(self) -> tuple:
        return (self.n_normal,) + (self.n_tangential,) * (self.dimension - 1)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))


class Grid:
    """Immutable node lattice with per-node classification.

    Build through :func:`build_grid`.  Fields combine only across the
    same grid instance (checked via the ``id`` token).
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        self.id = next(_grid_ids)
        n_t, n_y = spec.n_tangential, spec.n_normal
        L, H, h = spec.tangential_extent, spec.normal_extent, spec.h
        self.xs = np.linspace(-L, L, n_t)
        self.ys = np.linspace(0.0, H, n_y)
        # middle index: xs[mid] == 0 exactly by construction
        self.xs[n_t // 2] = 0.0

        cls = np.full(spec.shape, INTERIOR, dtype=np.int8)
        lateral = np.zeros(spec.shape, dtype=bool)
        for a in range(1, spec.dimension):
            idx_lo = [slice(None)] * spec.dimension
            idx_lo[a] = 0
            lateral[tuple(idx_lo)] = True
            idx_hi = [slice(None)] * spec.dimension
            idx_hi[a] = n_t - 1
            lateral[tuple(idx_hi)] = True
        cls[lateral] = DIRICHLET
        cls[-1] = DIRICHLET                       # top face y = H
        cls[0][~lateral[0]] = FLAT                # bottom face minus its rim
        self.node_class = cls
        self.node_class.setflags(write=False)
        self.xs.setflags(write=False)
        self.ys.setflags(write=False)
        self._cache = {}

    # -- masks and coordinates -------------------------------------------

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def h(self) -> float:
        return self.spec.h

    @property
    def shape(self) -> tuple:
        return self.spec.shape

    @property
    def interior_mask(self) -> np.ndarray:
        return self.node_class == INTERIOR

    @property
    def flat_mask(self) -> np.ndarray:
        return self.node_class == FLAT

    @property
    def dirichlet_mask(self) -> np.ndarray:
        return self.node_class == DIRICHLET

    @property
    def flat_mask_bottom(self) -> np.ndarray:
        """FLAT mask restricted to the bottom face (tangential shape)."""
        return self.node_class[0] == FLAT

    def coordinate_arrays(self) -> tuple:
        """Broadcastable node coordinates ordered (x1[, x2], y)."""
        d = self.dimension
        if d == 2:
            X = self.xs[np.newaxis, :]
            Y = self.ys[:, np.newaxis]
            return X, Y
        X1 = self.xs[np.newaxis, :, np.newaxis]
        X2 = self.xs[np.newaxis, np.newaxis, :]
        Y = self.ys[:, np.newaxis, np.newaxis]
        return X1, X2, Y

    def tangential_coordinate_arrays(self) -> tuple:
        """Broadcastable coordinates of the bottom face, ordered (x1[, x2])."""
        if self.dimension == 2:
            return (self.xs,)
        return self.xs[:, np.newaxis], self.xs[np.newaxis, :]

    def cell_center_coordinates(self) -> tuple:
        """Coordinates of cell centers, same ordering as coordinate_arrays."""
        xc = 0.5 * (self.xs[:-1] + self.xs[1:])
        yc = 0.5 * (self.ys[:-1] + self.ys[1:])
        if self.dimension == 2:
            return xc[np.newaxis, :], yc[:, np.newaxis]
        return (xc[np.newaxis, :, np.newaxis],
                xc[np.newaxis, np.newaxis, :],
                yc[:, np.newaxis, np.newaxis])


def build_grid(spec: GridSpec) -> Grid:
    """Construct the classified lattice for a validated spec."""
    return Grid(spec)


@dataclass
class Field:
    """Real node values bound to one grid.

    Values must be finite everywhere; combining two fields requires the
    same grid instance.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    def check_same_grid(self, other: "Field"):
        if self.grid.id != other.grid.id:
            raise ValueError("fields live on different grids")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def field_from_function(grid: Grid, fn) -> Field:
    """Sample fn(x1[, x2], y) on the nodes."""
    coords = grid.coordinate_arrays()
    return Field(grid, np.broadcast_to(fn(*coords), grid.shape).astype(float))


# -- stencils ------------------------------------------------------------


def laplacian_residual(u: Field) -> Field:
    """(2d+1)-point Laplacian at INTERIOR nodes, zero elsewhere by convention."""
    g = u.grid
    v = u.values
    h2 = g.h * g.h
    out = np.zeros_like(v)
    core = (slice(1, -1),) * v.ndim
    acc = -2.0 * v.ndim * v[core]
    for a in range(v.ndim):
        lo = tuple(slice(1, -1) if b != a else slice(0, -2) for b in range(v.ndim))
        hi = tuple(slice(1, -1) if b != a else slice(2, None) for b in range(v.ndim))
        acc = acc + v[lo] + v[hi]
    out[core] = acc / h2
    out[~g.interior_mask] = 0.0
    return Field(g, out)


def normal_trace(u: Field) -> np.ndarray:
    """Second-order one-sided normal derivative on the bottom face.

    u_y(x, 0) ~ (-3 u(x,0) + 4 u(x,h) - u(x,2h)) / (2h); exact on fields
    quadratic in y.
    """
    g = u.grid
    if g.spec.n_normal < 3:
        raise ValueError("normal_trace needs at least 3 node layers in y")
    v = u.values
    return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * g.h)


# -- cell-centered quantities for quadrature ------------------------------


def cell_average(u: Field) -> np.ndarray:
    """Average of the 2^d corner values per cell."""
    v = u.values
    out = v
    for a in range(v.ndim):
        lo = tuple(slice(0, -1) if b == a else slice(None) for b in range(v.ndim))
        hi = tuple(slice(1, None) if b == a else slice(None) for b in range(v.ndim))
        out = 0.5 * (out[lo] + out[hi])
    return out


def cell_gradient_sq(u: Field) -> np.ndarray:
    """|grad u|^2 at cell centers from edge differences averaged per cell."""
    g = u.grid
    v = u.values
    h = g.h
    total = None
    for a in range(v.ndim):
        lo = tuple(slice(0, -1) if b == a else slice(None) for b in range(v.ndim))
        hi = tuple(slice(1, None) if b == a else slice(None) for b in range(v.ndim))
        diff = (v[hi] - v[lo]) / h
        # average the 2^(d-1) parallel edge differences to the cell center
        for b in range(v.ndim):
            if b == a:
                continue
            lo_b = tuple(slice(0, -1) if c == b else slice(None) for c in range(diff.ndim))
            hi_b = tuple(slice(1, None) if c == b else slice(None) for c in range(diff.ndim))
            diff = 0.5 * (diff[lo_b] + diff[hi_b])
        comp = diff * diff
        total = comp if total is None else total + comp
    return total


def _as_flat_point(center, dimension: int) -> np.ndarray:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.shape != (dimension - 1,):
        raise ValueError(
            f"flat point must have {dimension - 1} coordinate(s), got shape {c.shape}")
    return c


def _cell_values(values, grid: Grid) -> np.ndarray:
    if isinstance(values, Field):
        return cell_average(values)
    arr = np.asarray(values, dtype=float)
    cells = tuple(n - 1 for n in grid.shape)
    if arr.shape != cells:
        raise ValueError(f"cell array shape {arr.shape} != expected {cells}")
    return arr


def _ball_integrals(cells: np.ndarray, grid: Grid, center: np.ndarray,
                    radii, exponent: float) -> np.ndarray:
    """Midpoint quadrature of cells / |X - center|^exponent over half-balls.

    A cell is counted in B_r^+ iff its center lies inside; cell centers
    are offset by h/2 from the flat boundary so the weight never blows up.
    """
    coords = grid.cell_center_coordinates()
    tang, yc = coords[:-1], coords[-1]
    dist_sq = yc * yc
    for a, t in enumerate(tang):
        dist_sq = dist_sq + (t - center[a]) ** 2
    dist = np.sqrt(dist_sq)
    weighted = cells if exponent == 0.0 else cells / dist ** exponent
    vol = grid.h ** grid.dimension
    out = np.empty(len(radii))
    for k, r in enumerate(radii):
        out[k] = vol * float(np.sum(weighted[dist <= r]))
    return out


def weighted_ball_integral(values, center, r: float, exponent: float,
                           grid: Grid | None = None) -> float:
    """Integral over the half-ball B_r^+(center) of f / |X - center|^exponent.

    values is a Field (corner-averaged onto cells) or a cell-centered
    array.  The exponent must lie in [0, d-1]; up to there the weight is
    integrable and the midpoint quadrature converges (cell centers sit at
    distance >= h/2 from the flat boundary, so the weight stays finite).
    """
    if isinstance(values, Field):
        grid = values.grid
    if grid is None:
        raise ValueError("grid required when passing raw cell values")
    c = _as_flat_point(center, grid.dimension)
    if not 0.0 <= exponent <= grid.dimension - 1:
        raise ValueError(f"exponent must be in [0, d-1], got {exponent}")
    if r < 4.0 * grid.h:
        raise ValueError(f"radius {r} below 4h = {4.0 * grid.h}")
    L, H = grid.spec.tangential_extent, grid.spec.normal_extent
    if np.any(np.abs(c) + r > L + 1e-12) or r > H + 1e-12:
        raise ValueError("ball exits the domain")
    cells = _cell_values(values, grid)
    return float(_ball_integrals(cells, grid, c, [r], exponent)[0])


# -- cylinders -------------------------------------------------------------


def cylinder_height(r: float, dimension: int) -> float:
    """Height of the growth cylinder over B'_r: r / (2 sqrt(2d-2))."""
    return r / (2.0 * np.sqrt(2.0 * dimension - 2.0))


def sup_cylinder(values, center, r: float, grid: Grid | None = None) -> float:
    """Max of |values| over nodes in the cylinder B'_r(center) x [0, height].

    Accepts a Field (bulk nodes included) or a bottom-face trace array
    (the y = 0 slice of the cylinder only).
    """
    if isinstance(values, Field):
        grid = values.grid
    if grid is None:
        raise ValueError("grid required when passing a trace array")
    c = _as_flat_point(center, grid.dimension)
    height = cylinder_height(r, grid.dimension)
    L, H = grid.spec.tangential_extent, grid.spec.normal_extent
    if np.any(np.abs(c) + r > L + 1e-12) or height > H + 1e-12:
        raise ValueError("cylinder exits the domain")

    tang = grid.tangential_coordinate_arrays()
    dist_sq = np.zeros(() if grid.dimension == 2 else (1, 1))
    for a, t in enumerate(tang):
        dist_sq = dist_sq + (t - c[a]) ** 2
    in_disc = dist_sq <= r * r + 1e-14

    if isinstance(values, Field):
        ny = int(np.searchsorted(grid.ys, height + 1e-12, side="right"))
        block = np.abs(values.values[:ny])
        return float(np.max(block[:, in_disc]))
    arr = np.asarray(values, dtype=float)
    if arr.shape != grid.shape[1:]:
        raise ValueError(f"trace shape {arr.shape} != bottom face {grid.shape[1:]}")
    return float(np.max(np.abs(arr[in_disc])))
