"""Structured triangular meshes, scalar Helmholtz assembly and tile partitions.

The domain is an open square of ``side_lambda`` wavelengths meshed with a
uniform right-triangle grid.  Linear (P1) elements discretize

    (1/mu_r) grad u . grad v  -  k^2 eps_r u v      over the square,
    -jk u v                                          over the outer boundary,

with a plane wave entering through the absorbing outer boundary providing the
load.  Assembly is fully deterministic and the produced operator is exactly
symmetric under plain transposition (no conjugation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

TWO_PI = 2.0 * math.pi

# 4-point Gauss-Legendre rule on [0, 1], used for boundary load integrals.
_GAUSS_T = np.array([0.5 - 0.43056815579702629, 0.5 - 0.16999052179242813,
                     0.5 + 0.16999052179242813, 0.5 + 0.43056815579702629])
_GAUSS_W = np.array([0.17392742256872692, 0.32607257743127305,
                     0.32607257743127305, 0.17392742256872692])


class AssemblyError(Exception):
    pass


class PartitionError(Exception):
    pass


@dataclass
class ProblemConfig:
    """Scattering problem parameters; lengths are in wavelengths."""

    side_lambda: float
    ppw: float = 15.0
    px: int = 1
    py: int = 1
    wavelength: float = 1.0
    alpha: complex | None = None      # interface transmission parameter
    theta_inc: float = 0.0            # incidence angle, radians
    mu_r: float = 1.0
    eps_r: float = 1.0

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise ValueError("wavelength must be positive")
        if self.side_lambda <= 0.0:
            raise ValueError("side_lambda must be positive")
        if self.ppw < 10:
            raise ValueError("ppw must be at least 10")
        if self.px < 1 or self.py < 1:
            raise ValueError("px and py must be at least 1")
        if self.alpha is None:
            self.alpha = 1j * self.k
        self.alpha = complex(self.alpha)
        if self.alpha.imag == 0.0:
            raise ValueError("alpha must have nonzero imaginary part")

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength


@dataclass
class Mesh:
    nodes: np.ndarray           # (N, 2) coordinates
    tris: np.ndarray            # (M, 3) CCW node triples
    boundary_edges: np.ndarray  # (B, 2) node pairs on the outer boundary
    boundary_owner: np.ndarray  # (B,) triangle owning each boundary edge

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_tris(self) -> int:
        return int(self.tris.shape[0])

    def tri_areas(self) -> np.ndarray:
        p = self.nodes[self.tris]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def edge_use_counts(self) -> dict[tuple[int, int], list[int]]:
        """Map sorted edge -> list of triangles using it."""
        use: dict[tuple[int, int], list[int]] = {}
        for e, tri in enumerate(self.tris):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(min(a, b)), int(max(a, b)))
                use.setdefault(key, []).append(e)
        return use

    def validate(self) -> None:
        areas = self.tri_areas()
        bad = np.flatnonzero(areas <= 0.0)
        if bad.size:
            raise AssemblyError(f"element {int(bad[0])} has non-positive area")
        use = self.edge_use_counts()
        for a, b in self.boundary_edges:
            key = (int(min(a, b)), int(max(a, b)))
            owners = use.get(key, [])
            if len(owners) != 1:
                raise AssemblyError(
                    f"boundary edge {key} used by {len(owners)} triangles")


@dataclass
class Interface:
    """Maximal chain of mesh edges shared by one ordered domain pair."""

    dom_lo: int
    dom_hi: int
    nodes: np.ndarray  # ordered chain, endpoints included

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.size)


@dataclass
class Partition:
    n_domains: int
    domain_of_elem: np.ndarray
    interfaces: list[Interface]
    boundary: list[np.ndarray]        # per-domain outer boundary edges (m, 2)
    boundary_owner: list[np.ndarray]  # owning triangle per listed edge

    def elements_of(self, d: int) -> np.ndarray:
        return np.flatnonzero(self.domain_of_elem == d)

    def incident_interfaces(self, d: int) -> list[int]:
        return [i for i, itf in enumerate(self.interfaces)
                if itf.dom_lo == d or itf.dom_hi == d]


def grid_intervals(side_lambda: float, ppw: float) -> int:
    return int(math.ceil(side_lambda * ppw - 1e-12))


def build_rect_mesh(side_lambda: float, ppw: float) -> Mesh:
    """Uniform right-triangle grid on a ``side x side`` square.

    ``n = ceil(side_lambda * ppw)`` intervals per axis give ``(n+1)^2`` nodes
    in row-major order and ``2 n^2`` CCW triangles; each grid cell is split
    along its up-right diagonal.
    """
    if side_lambda <= 0.0:
        raise ValueError("side_lambda must be positive")
    if ppw < 2:
        raise ValueError("ppw must be at least 2")
    n = grid_intervals(side_lambda, ppw)
    h = side_lambda / n
    xs = np.arange(n + 1) * h
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    nodes = np.column_stack([X.reshape(-1), Y.reshape(-1)])

    def nid(ix, iy):
        return iy * (n + 1) + ix

    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    e = 0
    for iy in range(n):
        for ix in range(n):
            v00 = nid(ix, iy)
            v10 = nid(ix + 1, iy)
            v11 = nid(ix + 1, iy + 1)
            v01 = nid(ix, iy + 1)
            tris[e] = (v00, v10, v11)
            tris[e + 1] = (v00, v11, v01)
            e += 2

    edges = []
    owners = []
    use: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for t, tri in enumerate(tris):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(min(a, b)), int(max(a, b)))
            use.setdefault(key, []).append((t, int(a), int(b)))
    for key in sorted(use):
        hits = use[key]
        if len(hits) == 1:
            t, a, b = hits[0]
            edges.append((a, b))
            owners.append(t)
    return Mesh(nodes, tris,
                np.array(edges, dtype=np.int64).reshape(-1, 2),
                np.array(owners, dtype=np.int64))


def element_matrices(mesh: Mesh, mu_r: float = 1.0):
    """Per-element P1 stiffness and mass blocks.

    Returns ``(areas, Ke, Me)`` with ``Ke[e] = area * grad . grad / mu_r``
    and ``Me[e] = area / 12 * (ones + I)``.
    """
    p = mesh.nodes[mesh.tris]                      # (M, 3, 2)
    areas = mesh.tri_areas()
    bad = np.flatnonzero(areas <= 0.0)
    if bad.size:
        raise AssemblyError(f"element {int(bad[0])} has non-positive area")
    # gradient of barycentric basis i: rotate opposite edge / (2 area)
    gx = np.stack([p[:, 1, 1] - p[:, 2, 1],
                   p[:, 2, 1] - p[:, 0, 1],
                   p[:, 0, 1] - p[:, 1, 1]], axis=1)
    gy = np.stack([p[:, 2, 0] - p[:, 1, 0],
                   p[:, 0, 0] - p[:, 2, 0],
                   p[:, 1, 0] - p[:, 0, 0]], axis=1)
    grads = np.stack([gx, gy], axis=2) / (2.0 * areas)[:, None, None]
    Ke = np.einsum("eid,ejd->eij", grads, grads) * areas[:, None, None] / mu_r
    Me = (np.ones((3, 3)) + np.eye(3))[None, :, :] * (areas / 12.0)[:, None, None]
    return areas, Ke, Me


def edge_mass(h: float) -> np.ndarray:
    """1-D P1 mass matrix of an edge of length ``h``."""
    return (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])


def _dedup_sum(rows, cols, vals, n) -> sp.csr_matrix:
    # Deterministic duplicate summation: stable lexsort keeps insertion order
    # within each (row, col) group, so mirrored entries sum identically and
    # the result is exactly symmetric whenever the triples are.
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals).astype(np.complex128)
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size == 0:
        return sp.csr_matrix((n, n), dtype=np.complex128)
    new_group = np.empty(rows.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    starts = np.flatnonzero(new_group)
    sums = np.add.reduceat(vals, starts)
    return sp.csr_matrix((sums, (rows[starts], cols[starts])), shape=(n, n))


def boundary_normals(mesh: Mesh, edges: np.ndarray, owners: np.ndarray) -> np.ndarray:
    """Unit outward normal per boundary edge, oriented away from the owner."""
    a = mesh.nodes[edges[:, 0]]
    b = mesh.nodes[edges[:, 1]]
    d = b - a
    nrm = np.column_stack([d[:, 1], -d[:, 0]])
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    centroids = mesh.nodes[mesh.tris[owners]].mean(axis=1)
    mid = 0.5 * (a + b)
    flip = np.einsum("ij,ij->i", nrm, centroids - mid) > 0.0
    nrm[flip] *= -1.0
    return nrm


def incident_boundary_load(mesh: Mesh, edges: np.ndarray, owners: np.ndarray,
                           k: float, theta_inc: float) -> np.ndarray:
    """Load vector from a plane wave entering the absorbing boundary.

    The incident field is ``exp(-jk (x cos t + y sin t))`` and the boundary
    data ``g = dn(u_inc) - jk u_inc`` is integrated against the P1 traces on
    each listed edge with 4-point Gauss quadrature.
    """
    f = np.zeros(mesh.n_nodes, dtype=np.complex128)
    if edges.size == 0:
        return f
    nrm = boundary_normals(mesh, edges, owners)
    d = np.array([math.cos(theta_inc), math.sin(theta_inc)])
    a = mesh.nodes[edges[:, 0]]
    b = mesh.nodes[edges[:, 1]]
    h = np.linalg.norm(b - a, axis=1)
    coef = -1j * k * (nrm @ d + 1.0)              # g = coef * u_inc on each edge
    for t, w in zip(_GAUSS_T, _GAUSS_W):
        pts = a + t * (b - a)
        uinc = np.exp(-1j * k * (pts @ d))
        g = coef * uinc
        f_a = w * h * g * (1.0 - t)
        f_b = w * h * g * t
        np.add.at(f, edges[:, 0], f_a)
        np.add.at(f, edges[:, 1], f_b)
    return f


def assemble_helmholtz(mesh: Mesh, cfg: ProblemConfig):
    """Monolithic operator and load: ``A = S - k^2 eps_r M - jk B`` (CSR) and
    the incident-wave boundary load ``f``."""
    k = cfg.k
    _, Ke, Me = element_matrices(mesh, cfg.mu_r)
    Ae = Ke.astype(np.complex128) - (k * k * cfg.eps_r) * Me
    rows = np.repeat(mesh.tris, 3, axis=1).reshape(-1)
    cols = np.tile(mesh.tris, (1, 3)).reshape(-1)
    vals = Ae.reshape(-1)

    be = mesh.boundary_edges
    a = mesh.nodes[be[:, 0]]
    b = mesh.nodes[be[:, 1]]
    h = np.linalg.norm(b - a, axis=1)
    scale = (-1j * k) * (h / 6.0)
    brows = np.column_stack([be[:, 0], be[:, 0], be[:, 1], be[:, 1]]).reshape(-1)
    bcols = np.column_stack([be[:, 0], be[:, 1], be[:, 0], be[:, 1]]).reshape(-1)
    bvals = np.column_stack([2 * scale, scale, scale, 2 * scale]).reshape(-1)

    A = _dedup_sum([rows, brows], [cols, bcols], [vals, bvals], mesh.n_nodes)
    f = incident_boundary_load(mesh, be, mesh.boundary_owner, k, cfg.theta_inc)
    return A, f


def partition_mesh(mesh: Mesh, px: int, py: int) -> Partition:
    """Axis-aligned tiling into ``px x py`` domains by element centroid.

    Interfaces are the maximal chains of element edges shared by two distinct
    domains, split per (lower, higher) domain pair and ordered from their
    smaller-index endpoint.  On grids whose interval count is not divisible
    by the tile counts, tile lines cut through cells and the chains simply
    follow the resulting staircase of cell edges.
    """
    if px < 1 or py < 1:
        raise PartitionError("px and py must be at least 1")
    lo = mesh.nodes.min(axis=0)
    hi = mesh.nodes.max(axis=0)
    span = hi - lo
    centroids = mesh.nodes[mesh.tris].mean(axis=1)
    tx = np.clip(((centroids[:, 0] - lo[0]) / span[0] * px).astype(np.int64), 0, px - 1)
    ty = np.clip(((centroids[:, 1] - lo[1]) / span[1] * py).astype(np.int64), 0, py - 1)
    dom = ty * px + tx
    n_domains = px * py
    counts = np.bincount(dom, minlength=n_domains)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise PartitionError(
            f"domain {int(empty[0])} contains no elements; "
            f"grid too coarse for a {px}x{py} tiling")

    # shared edges between distinct domains, grouped per ordered pair
    pair_edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
    use = mesh.edge_use_counts()
    for (a, b), tris in sorted(use.items()):
        if len(tris) != 2:
            continue
        d0, d1 = int(dom[tris[0]]), int(dom[tris[1]])
        if d0 == d1:
            continue
        key = (min(d0, d1), max(d0, d1))
        pair_edges.setdefault(key, []).append((a, b))

    interfaces: list[Interface] = []
    for (dlo, dhi), edge_list in sorted(pair_edges.items()):
        nbr: dict[int, list[int]] = {}
        for a, b in edge_list:
            nbr.setdefault(a, []).append(b)
            nbr.setdefault(b, []).append(a)
        for node, ns in nbr.items():
            if len(ns) > 2:
                raise PartitionError(
                    f"interface ({dlo}, {dhi}) branches at node {node}")
        remaining = {tuple(sorted(e)) for e in edge_list}
        endpoints = sorted(n for n, ns in nbr.items() if len(ns) == 1)
        chains = []
        for start in endpoints:
            if not any(tuple(sorted((start, u))) in remaining for u in nbr[start]):
                continue
            chain = [start]
            prev = -1
            cur = start
            while True:
                nxt = [u for u in nbr[cur] if u != prev
                       and tuple(sorted((cur, u))) in remaining]
                if not nxt:
                    break
                u = nxt[0]
                remaining.discard(tuple(sorted((cur, u))))
                chain.append(u)
                prev, cur = cur, u
            chains.append(chain)
        if remaining:
            raise PartitionError(
                f"interface ({dlo}, {dhi}) contains a closed loop")
        for chain in sorted(chains, key=lambda c: min(c[0], c[-1])):
            if chain[-1] < chain[0]:
                chain = chain[::-1]
            interfaces.append(Interface(dlo, dhi, np.array(chain, dtype=np.int64)))

    boundary = []
    boundary_owner = []
    for d in range(n_domains):
        sel = dom[mesh.boundary_owner] == d
        boundary.append(mesh.boundary_edges[sel])
        boundary_owner.append(mesh.boundary_owner[sel])
    return Partition(n_domains, dom, interfaces, boundary, boundary_owner)
