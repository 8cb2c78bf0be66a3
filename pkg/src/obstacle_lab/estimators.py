"""Measurable forms of the uniform estimates.

Every quantity here is a plain measurement on a solved instance (or any
field): tangential second incremental quotients and the semiconvexity
constant, semiconcavity and its integrated consequences, the contact
interface, the corrected velocity w = u_y - (d-1) C0 y, the weighted
monotonicity functional phi(r) with truncation, convex-hull localization
of the deep sublevel set, Hoelder seminorms, and interface growth fits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .grid import Field, Grid, cell_gradient_sq, normal_trace, sup_cylinder
from .grid import _as_flat_point, _ball_integrals
from .solver import SolveResult


def _as_field(obj) -> Field:
    return obj.u if isinstance(obj, SolveResult) else obj


# -- incremental quotients ---------------------------------------------------


def incremental_quotient(u, tau, delta: float):
    """Second incremental quotient along a tangential lattice direction.

    q(x) = (u(x + delta t) + u(x - delta t) - 2 u(x)) / delta^2 for the
    unit vector t along tau.  tau is an integer lattice direction over the
    tangential axes, e.g. (1,) in 2-d or (1, 0), (1, 1) in 3-d; delta must
    be a positive multiple of the lattice step along tau.  Returns
    (values, valid) where valid flags nodes with both shifts inside.
    """
    u = _as_field(u)
    g = u.grid
    tau = tuple(int(t) for t in np.atleast_1d(tau))
    if len(tau) != g.dimension - 1 or all(t == 0 for t in tau):
        raise ValueError(f"tau must be a nonzero tangential direction, got {tau}")
    step = g.h * float(np.hypot.reduce(np.asarray(tau, dtype=float)))
    k = delta / step
    if delta < g.h or abs(k - round(k)) > 1e-9:
        raise ValueError(f"delta must be a multiple >= h of the lattice step {step}")
    k = round(k)
    offsets = (0,) + tuple(k * t for t in tau)

    v = u.values
    axes = tuple(range(v.ndim))
    plus = np.roll(v, shift=[-o for o in offsets], axis=axes)
    minus = np.roll(v, shift=list(offsets), axis=axes)
    q = (plus + minus - 2.0 * v) / delta ** 2
    valid = np.ones(v.shape, dtype=bool)
    for a, o in enumerate(offsets):
        if o == 0:
            continue
        n = v.shape[a]
        idx = np.arange(n)
        ok = (idx + abs(o) < n) & (idx - abs(o) >= 0)
        sl = [np.newaxis] * v.ndim
        sl[a] = slice(None)
        valid &= ok[tuple(sl)]
    q[~valid] = 0.0
    return q, valid


def _inner_region_mask(grid: Grid, margin: float) -> np.ndarray:
    """Nodes at tangential and top distance >= margin from the Dirichlet faces."""
    coords = grid.coordinate_arrays()
    L = grid.spec.tangential_extent
    H = grid.spec.normal_extent
    mask = coords[-1] <= H - margin + 1e-12
    for t in coords[:-1]:
        mask = mask & (np.abs(t) <= L - margin + 1e-12)
    return np.broadcast_to(mask, grid.shape)


def _tangential_directions(dimension: int):
    if dimension == 2:
        return [(1,)]
    return [(1, 0), (0, 1), (1, 1), (1, -1)]


def semiconvexity_constant(result, deltas, margin: float | None = None) -> float:
    """C0 = max(0, -inf of tangential second quotients) over the inner region.

    Axis and (for d = 3) diagonal directions are sampled; each requested
    delta is snapped to the nearest step the direction's lattice admits.
    margin defaults to 0.2 * L when no annulus width is supplied.
    """
    u = _as_field(result)
    g = u.grid
    if margin is None:
        margin = 0.2 * g.spec.tangential_extent
    region = _inner_region_mask(g, margin)
    worst = 0.0
    for tau in _tangential_directions(g.dimension):
        step = g.h * float(np.hypot.reduce(np.asarray(tau, dtype=float)))
        for delta in deltas:
            k = max(1, round(delta / step))
            q, valid = incremental_quotient(u, tau, k * step)
            sel = region & valid
            if sel.any():
                worst = min(worst, float(q[sel].min()))
    return max(0.0, -worst)


def uy_field(result) -> Field:
    """Normal derivative everywhere: centered in the bulk, one-sided at faces.

    When given a SolveResult the bottom row carries the solver's own trace.
    """
    u = _as_field(result)
    g = u.grid
    v = u.values
    h = g.h
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = result.uy_trace if isinstance(result, SolveResult) else normal_trace(u)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return Field(g, out)


def second_y_difference(u) -> np.ndarray:
    """Discrete u_yy: centered in the bulk, one-sided second order at faces."""
    u = _as_field(u)
    v = u.values
    h2 = u.grid.h ** 2
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h2
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h2
    return out


def semiconcavity_check(result, C0: float, tol: float = 1e-8,
                        margin: float | None = None):
    """sup u_yy <= (d-1) C0 + tol over the inner region.

    Returns (passed, margin) with margin = bound - measured sup.
    """
    u = _as_field(result)
    g = u.grid
    if margin is None:
        margin = 0.2 * g.spec.tangential_extent
    region = _inner_region_mask(g, margin)
    uyy = second_y_difference(u)
    measured = float(uyy[region].max())
    bound = (g.dimension - 1) * C0 + tol
    return measured <= bound, bound - measured


def uy_increment_check(result, C0: float, tol: float = 1e-8,
                       margin: float | None = None):
    """u_y(x, t) - u_y(x, s) <= (d-1) C0 (t - s) + tol for sampled t > s."""
    g = _as_field(result).grid
    if margin is None:
        margin = 0.2 * g.spec.tangential_extent
    region = _inner_region_mask(g, margin)
    uy = uy_field(result).values
    m = (g.dimension - 1) * C0
    worst = -np.inf
    ny = g.spec.n_normal
    for j in range(0, ny - 1):
        for k in range(j + 1, ny):
            dt = g.ys[k] - g.ys[j]
            sel = region[j] & region[k]
            if not sel.any():
                continue
            excess = float((uy[k][sel] - uy[j][sel]).max()) - m * dt
            worst = max(worst, excess)
    return worst <= tol, worst


def corollary1_c_check(result, C: float, tol: float = 1e-8,
                       margin: float | None = None):
    """u(x', t) - u(x', 0) <= C t^2 + tol at all inner nodes."""
    u = _as_field(result)
    g = u.grid
    if margin is None:
        margin = 0.2 * g.spec.tangential_extent
    region = _inner_region_mask(g, margin)
    t = g.ys.reshape((-1,) + (1,) * (g.dimension - 1))
    excess = u.values - u.values[0][np.newaxis] - C * t * t
    excess = excess[region]
    worst = float(excess.max()) if excess.size else -np.inf
    return worst <= tol, worst


# -- interface ----------------------------------------------------------------


def free_boundary(result, tol: float = 0.0) -> np.ndarray:
    """Midpoints of flat edges where the trace crosses level tol.

    Returns an array of shape (k, d-1); empty when the trace never
    crosses (reported, not an error).
    """
    u = _as_field(result)
    g = u.grid
    b = u.values[0]
    flat = g.flat_mask_bottom
    above = b > tol
    points = []
    tang = g.tangential_coordinate_arrays()
    for a in range(b.ndim):
        lo = tuple(slice(0, -1) if c == a else slice(None) for c in range(b.ndim))
        hi = tuple(slice(1, None) if c == a else slice(None) for c in range(b.ndim))
        crossing = (above[lo] != above[hi]) & flat[lo] & flat[hi]
        if not crossing.any():
            continue
        mids = []
        for c in range(b.ndim):
            coord = np.broadcast_to(tang[c], b.shape)
            mids.append(0.5 * (coord[lo][crossing] + coord[hi][crossing]))
        points.append(np.stack(mids, axis=-1))
    if not points:
        return np.empty((0, g.dimension - 1))
    return np.unique(np.concatenate(points, axis=0), axis=0)


def annulus_positivity_width(result) -> float:
    """Width delta0 of the rim annulus on which the trace stays positive.

    Distance (sup-norm, matching the box geometry) from the lateral
    boundary to the nearest flat node with u <= 0; equals L when the
    trace is positive on the whole flat face.
    """
    u = _as_field(result)
    g = u.grid
    L = g.spec.tangential_extent
    b = u.values[0]
    flat = g.flat_mask_bottom
    nonpos = flat & (b <= 0.0)
    if not nonpos.any():
        return L
    tang = g.tangential_coordinate_arrays()
    dist = np.full(b.shape, np.inf)
    for t in tang:
        dist = np.minimum(dist, L - np.abs(np.broadcast_to(t, b.shape)))
    return float(dist[nonpos].min())


# -- corrected velocity and the monotonicity functional ------------------------


def corrected_velocity(result, C0: float) -> Field:
    """w = u_y - (d-1) C0 y, the velocity corrected for semiconvexity error."""
    uy = uy_field(result)
    g = uy.grid
    y = g.ys.reshape((-1,) + (1,) * (g.dimension - 1))
    return Field(g, uy.values - (g.dimension - 1) * C0 * y)


@dataclass
class MonotonicityTrace:
    """Samples of phi(r) and their worst decrease between consecutive radii."""

    center: np.ndarray
    radii: np.ndarray
    phi_values: np.ndarray
    monotone_defect: float = field(init=False)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.phi_values = np.asarray(self.phi_values, dtype=float)
        drops = self.phi_values[:-1] - self.phi_values[1:]
        self.monotone_defect = float(max(0.0, drops.max())) if drops.size else 0.0


def phi_trace(w: Field, center, radii) -> MonotonicityTrace:
    """phi(r) = (1/r) * integral over B_r^+(center) of |grad w|^2 / |X|^{d-2}.

    The weight exponent d - 2 is the unique choice that makes phi constant
    on 1/2-homogeneous profiles; in d = 2 the functional is the plain
    scaled Dirichlet energy of w.
    """
    g = w.grid
    c = _as_flat_point(center, g.dimension)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing with >= 2 entries")
    if radii[0] < 4.0 * g.h:
        raise ValueError(f"smallest radius below 4h = {4.0 * g.h}")
    L, H = g.spec.tangential_extent, g.spec.normal_extent
    if np.any(np.abs(c) + radii[-1] > L + 1e-12) or radii[-1] > H + 1e-12:
        raise ValueError("ball exits the domain")
    grad_sq = cell_gradient_sq(w)
    integrals = _ball_integrals(grad_sq, g, c, radii, float(g.dimension - 2))
    return MonotonicityTrace(center=c, radii=radii, phi_values=integrals / radii)


def delta_alpha(alpha: float) -> float:
    """Localization margin (1/4)(alpha/(alpha+1) - alpha/2), positive on (0, 1/2]."""
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")
    return 0.25 * (alpha / (alpha + 1.0) - alpha / 2.0)


def truncate(values, r: float, alpha: float, threshold_sign: int = 1):
    """Shifted cutoff w_t = w + r^{alpha+delta_alpha} below the threshold, 0 above.

    threshold_sign selects the comparison level: +1 compares against
    +r^{alpha+delta_alpha} (the displayed formula), -1 against the deep
    sublevel -r^{alpha+delta_alpha} (the set the localization lemma
    manipulates).  Both are exposed because the source is ambiguous.
    """
    if threshold_sign not in (1, -1):
        raise ValueError("threshold_sign must be +1 or -1")
    thr = r ** (alpha + delta_alpha(alpha))
    is_field = isinstance(values, Field)
    v = values.values if is_field else np.asarray(values, dtype=float)
    out = np.where(v < threshold_sign * thr, v + thr, 0.0)
    return Field(values.grid, out) if is_field else out


def hull_check(grid: Grid, uy_trace: np.ndarray, r: float, alpha: float) -> bool:
    """True iff the hull of {x in B'_r : u_y < -r^{alpha+delta_alpha}} omits 0.

    An empty sublevel set passes.  In d = 2 the hull is the interval
    spanned by the sublevel nodes; in d = 3 membership of the origin in
    the planar hull is decided by linear-programming feasibility.
    """
    thr = r ** (alpha + delta_alpha(alpha))
    tang = grid.tangential_coordinate_arrays()
    shape = grid.shape[1:]
    dist_sq = np.zeros(shape)
    for t in tang:
        dist_sq = dist_sq + np.broadcast_to(t, shape) ** 2
    sub = (np.asarray(uy_trace) < -thr) & (dist_sq <= r * r + 1e-14)
    if not sub.any():
        return True
    if grid.dimension == 2:
        xs = grid.xs[sub]
        return not (xs.min() <= 0.0 <= xs.max())
    pts = np.stack([np.broadcast_to(t, shape)[sub] for t in tang], axis=-1)
    res = linprog(c=np.zeros(len(pts)),
                  A_eq=np.vstack([pts.T, np.ones(len(pts))]),
                  b_eq=np.array([0.0, 0.0, 1.0]),
                  bounds=(0.0, None), method="highs")
    return not res.success


# -- seminorms and growth fits --------------------------------------------------


def holder_seminorm(values: np.ndarray, exponent: float, grid: Grid,
                    region: float | None = None, min_sep: float | None = None,
                    max_points: int = 1500) -> float:
    """max |v(x) - v(y)| / |x - y|^exponent over flat-node pairs.

    region restricts nodes to |x_a| <= region; min_sep (default 2h)
    excludes pairs dominated by discretization noise.  Large d = 3 faces
    are strided down to at most max_points nodes.
    """
    if min_sep is None:
        min_sep = 2.0 * grid.h
    if min_sep < 2.0 * grid.h:
        raise ValueError("min_sep below the 2h noise floor")
    v = np.asarray(values, dtype=float)
    if v.shape != grid.shape[1:]:
        raise ValueError("values must live on the bottom face")
    tang = grid.tangential_coordinate_arrays()
    sel = np.ones(v.shape, dtype=bool)
    if region is not None:
        for t in tang:
            sel &= np.abs(np.broadcast_to(t, v.shape)) <= region + 1e-12
    pts = np.stack([np.broadcast_to(t, v.shape)[sel] for t in tang], axis=-1)
    vals = v[sel]
    if len(vals) > max_points:
        stride = int(np.ceil(len(vals) / max_points))
        pts, vals = pts[::stride], vals[::stride]
    diff = np.abs(vals[:, None] - vals[None, :])
    sep = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    mask = sep >= min_sep
    if not mask.any():
        return 0.0
    return float((diff[mask] / sep[mask] ** exponent).max())


@dataclass
class GrowthFit:
    """Least-squares growth of sup |u_y| over shrinking cylinders."""

    alpha_hat: float
    K1: float
    mu: float
    residual: float
    radii: np.ndarray
    sups: np.ndarray


def growth_fit_field(uy: Field, center, radii) -> GrowthFit:
    radii = np.sort(np.asarray(radii, dtype=float))
    g = uy.grid
    if radii.size and radii[0] < 8.0 * g.h:
        raise ValueError(f"smallest radius below 8h = {8.0 * g.h}")
    sups = np.array([sup_cylinder(uy, center, r) for r in radii])
    usable = sups > 0.0
    if usable.sum() < 4:
        raise ValueError("need at least 4 usable radii for the growth fit")
    lr, ls = np.log(radii[usable]), np.log(sups[usable])
    slope, intercept = np.polyfit(lr, ls, 1)
    resid = float(np.sqrt(np.mean((ls - (slope * lr + intercept)) ** 2)))
    return GrowthFit(alpha_hat=float(slope), K1=float(np.exp(intercept)),
                     mu=float(4.0 ** -slope), residual=resid,
                     radii=radii, sups=sups)


def growth_fit(result, center, radii) -> GrowthFit:
    """Fit sup over Gamma_r of |u_y| ~ K1 r^alpha on dyadic radii.

    The decay factor per 4-fold shrink is reported as mu = 4^{-alpha_hat}.
    """
    return growth_fit_field(uy_field(result), center, radii)


# -- aggregated report -----------------------------------------------------------


@dataclass
class EstimateReport:
    sup_u: float
    sup_uy: float
    min_uy: float
    C0: float
    delta0: float
    neg_part_sup: float
    holder_seminorms: dict
    growth_alpha: float
    growth_residual: float
    K1: float
    mu: float


def estimate_report(result: SolveResult, deltas=None, alphas=(0.5, 0.75),
                    radii=None, margin: float | None = None,
                    region: float | None = None) -> EstimateReport:
    """Measure the standard battery of estimates on one solved instance."""
    g = result.u.grid
    h = g.h
    L = g.spec.tangential_extent
    if deltas is None:
        deltas = [h, 2 * h, 4 * h, 8 * h]
    if margin is None:
        margin = 0.2 * L
    if region is None:
        region = L - margin
    C0 = semiconvexity_constant(result, deltas, margin=margin)
    delta0 = annulus_positivity_width(result)
    flat = g.flat_mask_bottom
    trace = result.uy_trace
    bottom = result.u.values[0]
    seminorms = {a: holder_seminorm(trace, a, g, region=region) for a in alphas}

    fb = free_boundary(result, tol=max(1e-12, 10 * result.residual))
    if fb.size:
        center = fb[np.argmin(np.linalg.norm(fb, axis=1))]
    else:
        center = np.zeros(g.dimension - 1)
    if radii is None:
        r_max = min(L - np.max(np.abs(center)) - 2 * h, 0.4 * L)
        radii = [r_max * 2.0 ** -k for k in range(5)]
        radii = [r for r in radii if r >= 8 * h]
    try:
        fit = growth_fit(result, center, radii)
        growth_alpha, growth_residual, K1, mu = (fit.alpha_hat, fit.residual,
                                                 fit.K1, fit.mu)
    except ValueError:
        growth_alpha, growth_residual, K1, mu = 0.0, 0.0, 0.0, 1.0
    return EstimateReport(
        sup_u=float(np.abs(result.u.values).max()),
        sup_uy=float(np.abs(trace[flat]).max()),
        min_uy=float(trace[flat].min()),
        C0=C0,
        delta0=delta0,
        neg_part_sup=float(np.maximum(-bottom[flat], 0.0).max()),
        holder_seminorms=seminorms,
        growth_alpha=growth_alpha,
        growth_residual=growth_residual,
        K1=K1,
        mu=mu,
    )
