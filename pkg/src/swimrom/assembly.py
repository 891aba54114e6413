"""Dense collocation assembly of the Stokes boundary operators.

Rows are collocated at mesh nodes, unknowns are linear Lagrangian nodal
values.  Regular element integrals use a 7-point Gauss rule; elements close
to the collocation node are uniformly subdivided (deterministic depth from
the distance/diameter ratio); elements containing the collocation node use
a Duffy transform that removes the 1/r singularity.

The double layer matrix is built so that applying it to any constant
translation field returns the negated field, which makes ``V f = K u``
deliver the physical viscous traction (drag opposing motion, grand
resistive matrix negative definite).  Its diagonal blocks absorb the
Cauchy-principal-value jump term through that row-sum condition, so no
singular quadrature of the stresslet is ever needed: on flat triangles the
stresslet integrand vanishes identically on elements containing the
collocation node.

``entries`` computes scattered matrix entries through the exact same code
path and accumulation order as the full assembly, so the values agree
bitwise; this is what makes matrix empirical interpolation consistent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .kernels import stokeslet_batch, stresslet_batch
from .mesh import SurfaceMesh

# 7-point Gauss rule on the triangle (degree 5), barycentric coordinates.
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
_TRI_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
_TRI_W = np.array([0.225,
                   0.132394152788506, 0.132394152788506, 0.132394152788506,
                   0.125939180544827, 0.125939180544827, 0.125939180544827])

_NEAR_RATIO = 4.0        # refine when dist < ratio * element diameter
_MAX_DEPTH = 3           # at most 4**3 subtriangles per near element
_DUFFY_ORDER = 4


class AssemblyError(RuntimeError):
    pass


def _refined_rule(depth: int):
    """Gauss rule on the unit triangle refined into 4**depth subtriangles."""
    bary, wts = _TRI_BARY, _TRI_W
    for _ in range(depth):
        # corners of the 4 children of the reference triangle, barycentric
        mids = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        corners = np.eye(3)
        children = [
            np.array([corners[0], mids[0], mids[2]]),
            np.array([mids[0], corners[1], mids[1]]),
            np.array([mids[2], mids[1], corners[2]]),
            np.array([mids[0], mids[1], mids[2]]),
        ]
        bary = np.concatenate([bary @ ch for ch in children])
        wts = np.tile(wts / 4.0, 4)
    return bary, wts


_RULES = {d: _refined_rule(d) for d in range(_MAX_DEPTH + 1)}
# weights folded into the shape-function values: (q, local_node)
_RULES_WL = {d: w[:, None] * b for d, (b, w) in _RULES.items()}

_GL_X, _GL_W = np.polynomial.legendre.leggauss(_DUFFY_ORDER)
_GL_X = 0.5 * (_GL_X + 1.0)   # map to [0, 1]
_GL_W = 0.5 * _GL_W


def _duffy_rule():
    """Tensor rule on [0,1]^2 with barycentric coords and u-weighted weights.

    Singular vertex at barycentric (1,0,0); the Jacobian 2*A*u cancels the
    1/r kernel singularity.
    """
    u, w = np.meshgrid(_GL_X, _GL_X, indexing="ij")
    u, w = u.ravel(), w.ravel()
    wt = np.outer(_GL_W, _GL_W).ravel() * u * 2.0
    bary = np.stack([1.0 - u, u * (1.0 - w), u * w], axis=1)
    return bary, wt


_DUFFY_BARY, _DUFFY_W = _duffy_rule()


def mesh_fingerprint(mesh: SurfaceMesh) -> str:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(mesh.nodes).tobytes())
    h.update(np.ascontiguousarray(mesh.elements).tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class BemOperators:
    """Dense single-layer (V) and double-layer (K) collocation matrices."""

    V: np.ndarray
    K: np.ndarray
    fingerprint: str
    mu: tuple | None = None

    @property
    def n_dofs(self) -> int:
        return self.V.shape[0]


class Assembler:
    """Collocation assembler bound to one mesh."""

    def __init__(self, mesh: SurfaceMesh):
        self.mesh = mesh
        self.verts = mesh.nodes[mesh.elements]          # (m, 3, 3)
        edges = np.linalg.norm(
            self.verts - np.roll(self.verts, 1, axis=1), axis=2)
        self.diams = edges.max(axis=1)
        # node -> sorted adjacent element ids
        order = np.argsort(mesh.elements.ravel(), kind="stable")
        flat_nodes = mesh.elements.ravel()[order]
        flat_elems = order // 3
        splits = np.searchsorted(flat_nodes, np.arange(mesh.n_nodes + 1))
        self.adjacency = [np.sort(flat_elems[splits[k]:splits[k + 1]])
                          for k in range(mesh.n_nodes)]
        self._depth_cache: dict[int, np.ndarray] = {}

    # -- classification ----------------------------------------------------

    def _depths(self, i: int, elem_ids: np.ndarray) -> np.ndarray:
        """Refinement depth per element: -1 marks singular (node on element)."""
        contains = np.any(self.mesh.elements[elem_ids] == i, axis=1)
        x = self.mesh.nodes[i]
        v = self.verts[elem_ids]
        dist = np.minimum(
            np.linalg.norm(v - x, axis=2).min(axis=1),
            np.linalg.norm(v.mean(axis=1) - x, axis=1))
        dist = np.maximum(dist, 1e-300)
        ratio = dist / self.diams[elem_ids]
        depth = np.zeros(len(elem_ids), dtype=np.int64)
        near = ratio < _NEAR_RATIO
        with np.errstate(divide="ignore"):
            want = np.ceil(np.log2(_NEAR_RATIO / np.where(near, ratio, 1.0))).astype(np.int64)
        depth[near] = np.clip(want[near], 1, _MAX_DEPTH)
        depth[contains] = -1
        return depth

    # -- element batches ---------------------------------------------------

    def _batch(self, kernel: str, i: int, elem_ids: np.ndarray, depth: int) -> np.ndarray:
        """Contributions (k, 3local, 3, 3) with the rule for ``depth``."""
        bary = _RULES[depth][0]
        wl = _RULES_WL[depth]
        v = self.verts[elem_ids]                        # (k, 3, 3)
        y = np.einsum("qb,kbe->kqe", bary, v)
        r = self.mesh.nodes[i] - y                      # (k, q, 3)
        if kernel == "V":
            g = stokeslet_batch(r)
        else:
            # the double layer enters the traction equation with a minus sign
            n = self.mesh.normals[elem_ids][:, None, :]
            g = -stresslet_batch(r, n)
        contrib = np.einsum("ql,kqij->klij", wl, g)
        contrib *= self.mesh.areas[elem_ids][:, None, None, None]
        return contrib

    def _duffy(self, i: int, elem_ids: np.ndarray) -> np.ndarray:
        """Single-layer contributions for elements containing node i."""
        elems = self.mesh.elements[elem_ids]
        out = np.empty((len(elem_ids), 3, 3, 3))
        for pos, (eid, tri) in enumerate(zip(elem_ids, elems)):
            local = int(np.nonzero(tri == i)[0][0])
            perm = [(local + k) % 3 for k in range(3)]
            v = self.verts[eid][perm]                   # singular vertex first
            y = _DUFFY_BARY @ v
            r = self.mesh.nodes[i] - y
            g = stokeslet_batch(r)
            c = np.einsum("q,ql,qij->lij", _DUFFY_W, _DUFFY_BARY, g)
            c *= self.mesh.areas[eid]
            out[pos][perm] = c
        return out

    def _row_contrib(self, kernel: str, i: int, elem_ids: np.ndarray) -> np.ndarray:
        """Per-element nodal contributions for row i, in elem_ids order."""
        if len(elem_ids) == self.mesh.n_elements:
            if i not in self._depth_cache:
                self._depth_cache[i] = self._depths(i, elem_ids)
            depths = self._depth_cache[i]
        else:
            depths = self._depths(i, elem_ids)
        contrib = np.zeros((len(elem_ids), 3, 3, 3))
        for d in np.unique(depths):
            sel = np.nonzero(depths == d)[0]
            if d == -1:
                if kernel == "V":
                    contrib[sel] = self._duffy(i, elem_ids[sel])
                # flat triangle through the collocation node: r.n == 0
            else:
                contrib[sel] = self._batch(kernel, i, elem_ids[sel], int(d))
        return contrib

    def _row_blocks(self, kernel: str, i: int, elem_ids: np.ndarray) -> np.ndarray:
        """Accumulate contributions into per-node 3x3 blocks, ascending
        element order (the accumulation order entry assembly replicates)."""
        contrib = self._row_contrib(kernel, i, elem_ids)
        blocks = np.zeros((self.mesh.n_nodes, 3, 3))
        np.add.at(blocks, self.mesh.elements[elem_ids].ravel(),
                  contrib.reshape(-1, 3, 3))
        return blocks

    def _k_diag_block(self, i: int) -> np.ndarray:
        """Diagonal block from the constant-field condition K 1 = -1."""
        all_elems = np.arange(self.mesh.n_elements)
        blocks = self._row_blocks("K", i, all_elems)
        return -np.eye(3) - blocks.sum(axis=0)

    # -- public assembly ---------------------------------------------------

    def single_layer(self) -> np.ndarray:
        n = self.mesh.n_nodes
        all_elems = np.arange(self.mesh.n_elements)
        v = np.empty((3 * n, 3 * n))
        for i in range(n):
            blocks = self._row_blocks("V", i, all_elems)
            v[3 * i:3 * i + 3, :] = blocks.transpose(1, 0, 2).reshape(3, 3 * n)
        _check_finite(v, "single layer")
        return v

    def double_layer(self) -> np.ndarray:
        n = self.mesh.n_nodes
        all_elems = np.arange(self.mesh.n_elements)
        k = np.empty((3 * n, 3 * n))
        for i in range(n):
            blocks = self._row_blocks("K", i, all_elems)
            blocks[i] = -np.eye(3) - blocks.sum(axis=0)
            k[3 * i:3 * i + 3, :] = blocks.transpose(1, 0, 2).reshape(3, 3 * n)
        _check_finite(k, "double layer")
        return k

    def entries(self, which: str, indices) -> np.ndarray:
        """Scattered matrix entries, bitwise identical to full assembly.

        ``indices`` are row-major linear indices into the (3n, 3n) matrix.
        """
        if which not in ("V", "K"):
            raise ValueError("operator tag must be 'V' or 'K'")
        indices = np.asarray(indices, dtype=np.int64)
        n_dofs = 3 * self.mesh.n_nodes
        if indices.size and (indices.min() < 0 or indices.max() >= n_dofs * n_dofs):
            raise IndexError("entry index out of range")
        out = np.empty(len(indices))
        rows = indices // n_dofs
        cols = indices % n_dofs
        for i in np.unique(rows // 3):
            sel = np.nonzero(rows // 3 == i)[0]
            j_nodes = cols[sel] // 3
            if which == "K" and np.any(j_nodes == i):
                blocks = self._row_blocks("K", int(i), np.arange(self.mesh.n_elements))
                blocks[i] = -np.eye(3) - blocks.sum(axis=0)
            else:
                union = np.unique(np.concatenate(
                    [self.adjacency[j] for j in np.unique(j_nodes)]))
                contrib = self._row_contrib(which, int(i), union)
                blocks = np.zeros((self.mesh.n_nodes, 3, 3))
                np.add.at(blocks, self.mesh.elements[union].ravel(),
                          contrib.reshape(-1, 3, 3))
            out[sel] = blocks[j_nodes, rows[sel] % 3, cols[sel] % 3]
        return out


def _check_finite(mat: np.ndarray, name: str) -> None:
    if not np.isfinite(mat).all():
        bad = np.argwhere(~np.isfinite(mat))[0]
        raise AssemblyError(
            f"non-finite {name} entry at row {bad[0]}, col {bad[1]} "
            f"(node {bad[0] // 3})")


def assemble_single_layer(mesh: SurfaceMesh) -> np.ndarray:
    return Assembler(mesh).single_layer()


def assemble_double_layer(mesh: SurfaceMesh) -> np.ndarray:
    return Assembler(mesh).double_layer()


def assemble_operators(mesh: SurfaceMesh, mu=None) -> BemOperators:
    a = Assembler(mesh)
    return BemOperators(V=a.single_layer(), K=a.double_layer(),
                        fingerprint=mesh_fingerprint(mesh), mu=mu)


def assemble_entries(mesh: SurfaceMesh, which: str, indices) -> np.ndarray:
    return Assembler(mesh).entries(which, indices)
