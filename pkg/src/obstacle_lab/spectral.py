"""First eigenvalue of the mixed half-sphere problem.

The admissible class lives on the upper half-sphere and vanishes on the
half of the equator where the last tangential coordinate is negative;
the quotient of surface Dirichlet energy to mass is minimized.  In d = 2
the sphere degenerates to the half-circle with a Neumann end at theta = 0
and a Dirichlet end at theta = pi, with exact minimum 1/4 (eigenfunction
cos(theta/2)).  In d = 3 the minimum is 3/4, attained by the trace of the
1/2-homogeneous harmonic profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


@dataclass
class SphereMesh:
    """Finite-volume discretization of the upper half-sphere (or half-circle).

    K is the stiffness (surface Laplace-Beltrami) matrix, M the lumped
    mass; dirichlet flags the pinned equatorial nodes.  For d = 3 the
    longitude nodes are staggered so the Dirichlet/Neumann transition on
    the equator falls between nodes.
    """

    dimension: int
    resolution: int
    K: sp.csr_matrix
    M: np.ndarray
    dirichlet: np.ndarray
    coords: np.ndarray
    dirichlet_fraction: float = 0.5

    @property
    def free(self) -> np.ndarray:
        return ~self.dirichlet


def build_sphere_mesh(dimension: int, resolution: int,
                      dirichlet_fraction: float = 0.5) -> SphereMesh:
    """Assemble the mesh; resolution counts nodes per angular axis (>= 32).

    dirichlet_fraction is the pinned fraction of the equator (d = 3) and
    exists to exercise domain monotonicity of the eigenvalue; 0.5 is the
    geometry of the contact problem.
    """
    if dimension not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {dimension}")
    if resolution < 32:
        raise ValueError("need at least 32 nodes per angular axis")
    if dimension == 2:
        return _half_circle_mesh(resolution)
    return _half_sphere_mesh(resolution, dirichlet_fraction)


def _half_circle_mesh(n: int) -> SphereMesh:
    theta = np.linspace(0.0, np.pi, n)
    h = theta[1] - theta[0]
    main = np.full(n, 2.0)
    main[0] = main[-1] = 1.0
    K = sp.diags([main, -np.ones(n - 1), -np.ones(n - 1)], [0, -1, 1]) / h
    M = np.full(n, h)
    M[0] = M[-1] = 0.5 * h
    dirichlet = np.zeros(n, dtype=bool)
    dirichlet[-1] = True
    return SphereMesh(2, n, K.tocsr(), M, dirichlet, theta)


def _half_sphere_mesh(n: int, dirichlet_fraction: float) -> SphereMesh:
    """Latitude-longitude finite volumes with an averaged polar node."""
    J, n_phi = n, n
    dpsi = (np.pi / 2) / J
    dphi = 2.0 * np.pi / n_phi
    psi = dpsi * np.arange(1, J + 1)          # rings; psi[J-1] = pi/2 equator
    phi = dphi * (np.arange(n_phi) + 0.5)     # staggered longitudes

    def node(j, i):
        return 1 + j * n_phi + i % n_phi      # node 0 is the pole

    n_nodes = 1 + J * n_phi
    rows, cols, data = [], [], []

    def add_edge(a, b, c):
        rows.extend((a, b, a, b))
        cols.extend((a, b, b, a))
        data.extend((c, c, -c, -c))

    # pole cap to first ring
    c_pole = np.sin(0.5 * dpsi) * dphi / dpsi
    for i in range(n_phi):
        add_edge(0, node(0, i), c_pole)
    # meridional edges between rings
    for j in range(J - 1):
        c = np.sin(psi[j] + 0.5 * dpsi) * dphi / dpsi
        for i in range(n_phi):
            add_edge(node(j, i), node(j + 1, i), c)
    # zonal edges around each ring (half-height cells on the equator ring)
    for j in range(J):
        width = dpsi if j < J - 1 else 0.5 * dpsi
        c = width / (np.sin(psi[j]) * dphi)
        for i in range(n_phi):
            add_edge(node(j, i), node(j, i + 1), c)

    K = sp.coo_matrix((data, (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    K.sum_duplicates()

    M = np.empty(n_nodes)
    M[0] = 2.0 * np.pi * (1.0 - np.cos(0.5 * dpsi))
    for j in range(J):
        height = dpsi if j < J - 1 else 0.5 * dpsi
        M[1 + j * n_phi: 1 + (j + 1) * n_phi] = np.sin(psi[j]) * height * dphi

    # Dirichlet on the equatorial arc centred on the negative last-axis side
    dirichlet = np.zeros(n_nodes, dtype=bool)
    gap = np.pi * (1.0 - dirichlet_fraction)
    x_last_angle = np.minimum(np.abs(phi - 1.5 * np.pi),
                              2.0 * np.pi - np.abs(phi - 1.5 * np.pi))
    eq_flags = x_last_angle < np.pi * dirichlet_fraction
    dirichlet[1 + (J - 1) * n_phi: 1 + J * n_phi] = eq_flags

    coords = np.empty((n_nodes, 2))
    coords[0] = (0.0, 0.0)
    for j in range(J):
        coords[1 + j * n_phi: 1 + (j + 1) * n_phi, 0] = psi[j]
        coords[1 + j * n_phi: 1 + (j + 1) * n_phi, 1] = phi
    return SphereMesh(3, n, K, M, dirichlet, coords, dirichlet_fraction)


def rayleigh_quotient(mesh: SphereMesh, w: np.ndarray) -> float:
    """Surface Dirichlet energy over mass for an admissible sample vector."""
    w = np.asarray(w, dtype=float)
    if np.any(np.abs(w[mesh.dirichlet]) > 0.0):
        raise ValueError("vector must vanish on Dirichlet nodes")
    denom = float(np.sum(mesh.M * w * w))
    if denom == 0.0:
        raise ZeroDivisionError("vector has zero mass")
    return float(w @ (mesh.K @ w)) / denom


def eigenvalue_min(mesh: SphereMesh, tol: float = 1e-10,
                   maxit: int = 500) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue by inverse-power iteration on K w = lambda M w.

    Iterates v <- K^{-1} M v on the free nodes until the Rayleigh quotient
    is stationary to relative tolerance; returns (lambda_hat, eigenvector)
    with the eigenvector unit-normalized in the mass inner product.
    """
    free = mesh.free
    Kff = mesh.K[free][:, free].tocsc()
    Mf = mesh.M[free]
    try:
        lu = spla.splu(Kff)
    except RuntimeError as exc:
        raise RuntimeError(f"singular mesh: {exc}") from exc
    rng = np.random.default_rng(0)
    v = rng.standard_normal(int(free.sum()))
    lam_old = np.inf
    for _ in range(maxit):
        v = lu.solve(Mf * v)
        v /= np.sqrt(np.sum(Mf * v * v))
        lam = float(v @ (Kff @ v))
        if abs(lam - lam_old) <= tol * abs(lam):
            out = np.zeros(mesh.M.shape)
            out[free] = v
            return lam, out
        lam_old = lam
    raise RuntimeError(f"inverse power iteration did not converge (last {lam:.6g})")
