"""Triangulated surface meshes: generators, checks and surface operators.

All meshes are closed, orientable collections of flat triangles with linear
Lagrangian nodal unknowns (3 velocity components per node).  Normals point
outward from the body, i.e. into the fluid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    """Raised when a generated or supplied mesh violates an invariant."""


@dataclass(frozen=True)
class SurfaceMesh:
    """A closed triangulated surface.

    nodes      : (n, 3) float64 node coordinates
    elements   : (m, 3) int64 node index triples, counter-clockwise seen
                 from outside
    normals    : (m, 3) outward unit normals per element
    areas      : (m,) element areas
    node_area  : (n,) lumped area per node (one third of adjacent elements)
    """

    nodes: np.ndarray
    elements: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    node_area: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_dofs(self) -> int:
        return 3 * self.nodes.shape[0]

    def scaled(self, factor: float) -> "SurfaceMesh":
        return make_mesh(self.nodes * factor, self.elements)

    def translated(self, shift) -> "SurfaceMesh":
        return make_mesh(self.nodes + np.asarray(shift, dtype=float), self.elements)

    def rotated(self, rotation: np.ndarray) -> "SurfaceMesh":
        return make_mesh(self.nodes @ np.asarray(rotation, dtype=float).T, self.elements)


def make_mesh(nodes, elements, check: bool = True) -> SurfaceMesh:
    """Build a SurfaceMesh from raw arrays, computing normals and areas."""
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    elements = np.ascontiguousarray(elements, dtype=np.int64)
    if nodes.ndim != 2 or nodes.shape[1] != 3:
        raise MeshError("nodes must be (n, 3)")
    if elements.ndim != 2 or elements.shape[1] != 3:
        raise MeshError("elements must be (m, 3)")
    if elements.min(initial=0) < 0 or elements.max(initial=-1) >= len(nodes):
        raise MeshError("element references an invalid node index")
    if np.any(elements[:, 0] == elements[:, 1]) or np.any(elements[:, 1] == elements[:, 2]) \
            or np.any(elements[:, 0] == elements[:, 2]):
        raise MeshError("element with repeated node indices")

    p0, p1, p2 = (nodes[elements[:, k]] for k in range(3))
    cross = np.cross(p1 - p0, p2 - p0)
    twice_area = np.linalg.norm(cross, axis=1)
    if np.any(twice_area <= 0.0):
        raise MeshError("degenerate element with zero area")
    areas = 0.5 * twice_area
    normals = cross / twice_area[:, None]

    node_area = np.zeros(len(nodes))
    np.add.at(node_area, elements.ravel(), np.repeat(areas / 3.0, 3))

    mesh = SurfaceMesh(nodes, elements, normals, areas, node_area)
    if check:
        _check_closed(mesh)
    return mesh


def _check_closed(mesh: SurfaceMesh) -> None:
    """Every edge must be shared by exactly two elements, oppositely oriented."""
    e = mesh.elements
    directed = np.concatenate([e[:, [0, 1]], e[:, [1, 2]], e[:, [2, 0]]])
    keys = directed[:, 0] * mesh.n_nodes + directed[:, 1]
    rev = directed[:, 1] * mesh.n_nodes + directed[:, 0]
    if len(np.unique(keys)) != len(keys):
        raise MeshError("duplicated directed edge: surface is not orientable")
    if not np.array_equal(np.sort(keys), np.sort(rev)):
        raise MeshError("boundary edge found: surface is not closed")


def enclosed_volume(mesh: SurfaceMesh) -> float:
    """Signed volume by the divergence theorem; positive for outward normals."""
    centroids = mesh.nodes[mesh.elements].mean(axis=1)
    return float(np.sum(np.einsum("ij,ij->i", centroids, mesh.normals) * mesh.areas) / 3.0)


def oriented_outward(mesh: SurfaceMesh) -> SurfaceMesh:
    """Flip winding if the normals point into the body."""
    if enclosed_volume(mesh) < 0.0:
        return make_mesh(mesh.nodes, mesh.elements[:, [0, 2, 1]])
    return mesh


def merge_meshes(meshes) -> SurfaceMesh:
    """Disjoint union of closed components into one mesh."""
    nodes, elements = [], []
    offset = 0
    for m in meshes:
        nodes.append(m.nodes)
        elements.append(m.elements + offset)
        offset += m.n_nodes
    return make_mesh(np.vstack(nodes), np.vstack(elements))


# ---------------------------------------------------------------------------
# generators


def icosphere(subdivisions: int = 2, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> SurfaceMesh:
    """Sphere mesh by recursive subdivision of an icosahedron.

    Node counts per level: 12, 42, 162, 642, 2562.
    """
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
         (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
         (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)],
        dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = np.array(
        [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
         (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
         (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
         (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)],
        dtype=np.int64)

    for _ in range(subdivisions):
        edge_mid = {}
        verts_list = list(verts)

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in edge_mid:
                v = verts_list[a] + verts_list[b]
                v = v / np.linalg.norm(v)
                verts_list.append(v)
                edge_mid[key] = len(verts_list) - 1
            return edge_mid[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        verts = np.array(verts_list)
        faces = np.array(new_faces, dtype=np.int64)

    nodes = verts * radius + np.asarray(center, dtype=float)
    return oriented_outward(make_mesh(nodes, faces))


def _parallel_transport_frames(points: np.ndarray):
    """Tangent/normal/binormal frames along a polyline, twist-free."""
    tangents = np.gradient(points, axis=0)
    tangents /= np.linalg.norm(tangents, axis=1)[:, None]
    frames_n = np.empty_like(tangents)
    # seed normal: most orthogonal coordinate axis
    t0 = tangents[0]
    seed = np.eye(3)[np.argmin(np.abs(t0))]
    n = seed - np.dot(seed, t0) * t0
    n /= np.linalg.norm(n)
    frames_n[0] = n
    for i in range(1, len(points)):
        t_prev, t_cur = tangents[i - 1], tangents[i]
        axis = np.cross(t_prev, t_cur)
        s = np.linalg.norm(axis)
        c = np.clip(np.dot(t_prev, t_cur), -1.0, 1.0)
        if s < 1e-14:
            frames_n[i] = frames_n[i - 1]
        else:
            axis = axis / s
            angle = np.arctan2(s, c)
            v = frames_n[i - 1]
            frames_n[i] = (v * np.cos(angle) + np.cross(axis, v) * np.sin(angle)
                           + axis * np.dot(axis, v) * (1.0 - np.cos(angle)))
    binormals = np.cross(tangents, frames_n)
    return tangents, frames_n, binormals


def tube_along_centerline(points, radius: float, n_circ: int,
                          cap_length: float | None = None) -> SurfaceMesh:
    """Closed tube swept along a polyline, with conical end caps.

    The cap apices extend past the first/last centerline point by
    ``cap_length`` (default: the tube radius) along the local tangent.
    """
    points = np.asarray(points, dtype=float)
    if n_circ < 3:
        raise MeshError("tube needs at least 3 circumferential segments")
    if len(points) < 2:
        raise MeshError("tube centerline needs at least 2 points")
    if cap_length is None:
        cap_length = radius
    tangents, nrm, bin_ = _parallel_transport_frames(points)

    k = len(points)
    phi = 2.0 * np.pi * np.arange(n_circ) / n_circ
    ring_dirs = np.cos(phi)[:, None, None] * nrm[None] + np.sin(phi)[:, None, None] * bin_[None]
    ring_nodes = points[None] + radius * ring_dirs            # (n_circ, k, 3)
    nodes = ring_nodes.transpose(1, 0, 2).reshape(-1, 3)      # ring-major
    apex_start = points[0] - cap_length * tangents[0]
    apex_end = points[-1] + cap_length * tangents[-1]
    nodes = np.vstack([nodes, apex_start, apex_end])
    ia, ib = k * n_circ, k * n_circ + 1

    elements = []
    for r in range(k - 1):
        for c in range(n_circ):
            c2 = (c + 1) % n_circ
            a = r * n_circ + c
            b = r * n_circ + c2
            d = (r + 1) * n_circ + c
            e = (r + 1) * n_circ + c2
            elements += [(a, b, d), (b, e, d)]
    for c in range(n_circ):
        c2 = (c + 1) % n_circ
        elements.append((ia, c2, c))                                   # start cap
        elements.append((ib, (k - 1) * n_circ + c, (k - 1) * n_circ + c2))  # end cap
    mesh = make_mesh(nodes, np.array(elements, dtype=np.int64))
    return oriented_outward(mesh)


# ---------------------------------------------------------------------------
# surface operators


def mass_matrix(mesh: SurfaceMesh) -> sp.csr_matrix:
    """Galerkin surface mass matrix of linear shape functions.

    Returned at full vector size (3 n_nodes); the scalar pattern is applied
    identically to every velocity component.
    """
    n = mesh.n_nodes
    local = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    blocks = mesh.areas[:, None, None] * local[None]
    rows = np.repeat(mesh.elements, 3, axis=1).reshape(-1)
    cols = np.tile(mesh.elements, (1, 3)).reshape(-1)
    m_scalar = sp.coo_matrix((blocks.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()
    return sp.kron(m_scalar, sp.eye(3), format="csr")


def rigid_modes(nodes: np.ndarray, x0) -> np.ndarray:
    """Rigid-velocity matrix P (3n x 6): unit translations, then rotations
    (x - x0) ^ e_i evaluated at the nodes."""
    nodes = np.asarray(nodes, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n = len(nodes)
    p = np.zeros((3 * n, 6))
    for i in range(3):
        p[i::3, i] = 1.0
    r = nodes - x0
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        w = np.cross(e, r)
        p[:, 3 + i] = w.reshape(-1)
    return p


@dataclass(frozen=True)
class RigidKit:
    """Rigid modes, mass matrix, and the reference point they refer to."""

    P: np.ndarray
    M: sp.csr_matrix
    x0: np.ndarray

    @classmethod
    def from_mesh(cls, mesh: SurfaceMesh, x0=None) -> "RigidKit":
        if x0 is None:
            x0 = area_centroid(mesh)
        return cls(P=rigid_modes(mesh.nodes, x0), M=mass_matrix(mesh), x0=np.asarray(x0, float))


def area_centroid(mesh: SurfaceMesh) -> np.ndarray:
    centroids = mesh.nodes[mesh.elements].mean(axis=1)
    return (centroids * mesh.areas[:, None]).sum(axis=0) / mesh.areas.sum()


def total_area(mesh: SurfaceMesh) -> float:
    return float(mesh.areas.sum())


def closedness_residual(mesh: SurfaceMesh) -> float:
    """Norm of the Gauss integral of the normals; zero for a closed surface."""
    return float(np.linalg.norm((mesh.normals * mesh.areas[:, None]).sum(axis=0)))


def min_component_distance(mesh_a: SurfaceMesh, mesh_b: SurfaceMesh) -> float:
    """Minimum node-to-node distance between two meshes (intersection guard)."""
    d = mesh_a.nodes[:, None, :] - mesh_b.nodes[None, :, :]
    return float(np.sqrt((d ** 2).sum(axis=2)).min())


# ---------------------------------------------------------------------------
# export


def write_vtk(path, mesh: SurfaceMesh, point_vectors: dict | None = None,
              point_scalars: dict | None = None) -> None:
    """Write a legacy ASCII VTK polydata file with optional point data."""
    lines = ["# vtk DataFile Version 3.0", "swimrom surface", "ASCII",
             "DATASET POLYDATA", f"POINTS {mesh.n_nodes} double"]
    lines += [" ".join(repr(float(c)) for c in p) for p in mesh.nodes]
    m = mesh.n_elements
    lines.append(f"POLYGONS {m} {4 * m}")
    lines += ["3 " + " ".join(str(int(i)) for i in tri) for tri in mesh.elements]
    data_items = (point_vectors or {}) or (point_scalars or {})
    if data_items:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, vec in (point_vectors or {}).items():
            arr = np.asarray(vec, dtype=float).reshape(mesh.n_nodes, 3)
            lines.append(f"VECTORS {name} double")
            lines += [" ".join(repr(float(c)) for c in row) for row in arr]
        for name, val in (point_scalars or {}).items():
            arr = np.asarray(val, dtype=float).reshape(mesh.n_nodes)
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines += [repr(float(v)) for v in arr]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
