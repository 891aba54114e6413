"""Parametrized swimmer geometries and their shape velocities.

Two model swimmers are provided:

* a robotic bacterium: spherical head plus a helical tail spun by a motor
  about the x axis, parametrized by the number of helix turns and the head
  radius;
* a eukaryote-like swimmer: spherical body with two flagella beating
  mirror-symmetrically in the xy plane, driven by a synthetic traveling
  curvature wave and sampled at a fixed number of frames per period.

All meshes are generated in double precision.  Component surfaces are
disjoint closed tubes/spheres with a small clearance, which permits relative
motion without remeshing the junctions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mesh import (MeshError, RigidKit, SurfaceMesh, area_centroid, icosphere,
                   merge_meshes, min_component_distance, tube_along_centerline)

HELIX_PITCH = 1.0   # nondimensional length unit: one helix wavelength


@dataclass(frozen=True)
class MeshResolution:
    """Mesh density for one swimmer: sphere subdivision level plus tube grid."""

    sphere_subdivisions: int
    tube_circumferential: int
    tube_axial: int


BACTERIUM_DESK = MeshResolution(1, 6, 26)      # ~620 velocity DoFs
BACTERIUM_PAPER = MeshResolution(2, 8, 80)     # ~2440 velocity DoFs
EUKARYOTE_DESK = MeshResolution(1, 5, 14)      # ~590 velocity DoFs
EUKARYOTE_PAPER = MeshResolution(2, 6, 38)     # 1902 velocity DoFs


def bacterium_resolution(preset: str) -> MeshResolution:
    return {"desk": BACTERIUM_DESK, "paper": BACTERIUM_PAPER}[preset]


def eukaryote_resolution(preset: str) -> MeshResolution:
    return {"desk": EUKARYOTE_DESK, "paper": EUKARYOTE_PAPER}[preset]


@dataclass(frozen=True)
class BacteriumParams:
    """Helical-tail swimmer parameters.

    The helix pitch is fixed to 1 nondimensional length unit, which sets
    k = 2*pi, the envelope rate k_E = k, and the helix amplitude
    b = 1/(2*pi).  The tail thickness grows with the head radius as
    d = 0.02 * (pi/4) * r_head.
    """

    n_lambda: float
    r_head: float
    phase: float = 0.0

    def __post_init__(self):
        if not (0.4 <= self.n_lambda <= 4.0 and 0.4 <= self.r_head <= 4.0):
            raise ValueError(
                f"(n_lambda, r_head) = ({self.n_lambda}, {self.r_head}) "
                "outside the admissible box [0.4, 4.0]^2")

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / HELIX_PITCH

    @property
    def amplitude(self) -> float:
        return HELIX_PITCH / (2.0 * np.pi)

    @property
    def thickness(self) -> float:
        return 0.02 * (np.pi / 4.0) * self.r_head

    @property
    def tube_radius(self) -> float:
        return 0.5 * self.thickness


@dataclass(frozen=True)
class SwimmerGeometry:
    """A swimmer made of disjoint closed surface components.

    ``mesh`` is the merged union used for assembly; ``node_offsets`` gives
    the first merged-node index of each component.
    """

    components: tuple
    names: tuple
    mesh: SurfaceMesh
    x0: np.ndarray
    motor_axis: np.ndarray | None = None
    motor_rate: float = 0.0

    def node_slice(self, name: str) -> slice:
        offset = 0
        for comp, comp_name in zip(self.components, self.names):
            if comp_name == name:
                return slice(offset, offset + comp.n_nodes)
            offset += comp.n_nodes
        raise KeyError(name)

    def dof_mask(self, *names: str) -> np.ndarray:
        mask = np.zeros(self.mesh.n_nodes, dtype=bool)
        for name in names:
            mask[self.node_slice(name)] = True
        return np.repeat(mask, 3)

    def rigid_kit(self) -> RigidKit:
        return RigidKit.from_mesh(self.mesh, x0=self.x0)


def _bacterium_centerline(params: BacteriumParams, n_axial: int):
    """Helix centerline of the tail, root on the motor axis (E(0) = 0)."""
    k = params.wavenumber
    s = np.linspace(0.0, params.n_lambda * HELIX_PITCH, n_axial + 1)
    envelope = 1.0 - np.exp(-((k * s) ** 2))
    radial = params.amplitude * envelope
    x_start = params.r_head + 0.05 * params.thickness + params.tube_radius
    ang = k * s - params.phase
    return np.column_stack([x_start + s, radial * np.cos(ang), radial * np.sin(ang)])


def build_bacterium(params: BacteriumParams,
                    resolution: MeshResolution = BACTERIUM_DESK,
                    motor_rate: float = 1.0) -> SwimmerGeometry:
    """Spherical head at the origin plus a helical tail along +x."""
    head = icosphere(resolution.sphere_subdivisions, radius=params.r_head)
    centerline = _bacterium_centerline(params, resolution.tube_axial)
    tail = tube_along_centerline(centerline, params.tube_radius,
                                 resolution.tube_circumferential,
                                 cap_length=params.tube_radius)
    if head.n_nodes + tail.n_nodes < 200:
        raise MeshError(
            f"resolution too coarse: {head.n_nodes + tail.n_nodes} nodes < 200")
    if min_component_distance(head, tail) <= 0.0:
        raise MeshError("head and tail intersect")
    merged = merge_meshes([head, tail])
    return SwimmerGeometry(
        components=(head, tail), names=("head", "tail"), mesh=merged,
        x0=area_centroid(merged), motor_axis=np.array([1.0, 0.0, 0.0]),
        motor_rate=motor_rate)


def bacterium_shape_velocity(geom: SwimmerGeometry) -> np.ndarray:
    """Rigid rotation of the tail about the motor axis, zero on the head.

    The travelling-wave phase convention (angle k x - omega t) spins the
    tail about -x for positive motor rate.
    """
    v = np.zeros((geom.mesh.n_nodes, 3))
    sl = geom.node_slice("tail")
    omega = -geom.motor_rate * geom.motor_axis
    v[sl] = np.cross(omega, geom.mesh.nodes[sl])
    return v.reshape(-1)


def motor_angular_velocity(geom: SwimmerGeometry) -> np.ndarray:
    """Relative tail/head angular velocity vector."""
    return -geom.motor_rate * geom.motor_axis


# ---------------------------------------------------------------------------
# eukaryote-like swimmer


@dataclass(frozen=True)
class StrokeParams:
    """Synthetic mirror-symmetric breast stroke.

    The flagellum centerline is a planar curve reconstructed by arc-length
    integration of a traveling curvature wave

        kappa(s, t) = wave_amplitude * sin(pi s / L) * cos(2 pi (s/L - t/T)),

    superposed on a base-angle sweep psi0(t) = root_angle + base_angle +
    base_sweep * cos(2 pi t / T).  Flagellum 2 is the exact mirror image of
    flagellum 1 across the xz plane.
    """

    frames: int = 240
    body_diameter: float = 5.0
    flagellum_length: float = 8.0
    flagellum_thickness: float = 0.1
    root_angle: float = 0.9          # root location angle from +x, radians
    base_angle: float = 0.55         # mean tangent offset from the root ray
    base_sweep: float = 0.85         # amplitude of the base-angle oscillation
    wave_amplitude: float = 0.55     # curvature wave amplitude (1/length)
    tempo: float = 0.75              # power/recovery asymmetry in (-1, 1)
    resolution: MeshResolution = EUKARYOTE_DESK

    def __post_init__(self):
        if self.frames < 4:
            raise ValueError("a stroke needs at least 4 frames per period")
        if not -1.0 < self.tempo < 1.0:
            raise ValueError("tempo must stay in (-1, 1) to keep the "
                             "stroke time monotone")

    def warped_time(self, t: float) -> float:
        """Beat phase at nominal time t in [0, 1).

        Real beats are not uniform: the power stroke sweeps fast and the
        recovery stroke creeps back.  The warp keeps the period and the
        set of visited shapes but makes the traversal speed nonuniform,
        by a factor (1 + tempo) / (1 - tempo) between extremes.
        """
        return t + self.tempo * np.sin(2.0 * np.pi * t) / (2.0 * np.pi)

    @property
    def body_radius(self) -> float:
        return 0.5 * self.body_diameter

    @property
    def tube_radius(self) -> float:
        return 0.5 * self.flagellum_thickness


def _flagellum_centerline(stroke: StrokeParams, t: float) -> np.ndarray:
    """Centerline of flagellum 1 (y > 0 side) at stroke time t in [0, 1)."""
    n_axial = stroke.resolution.tube_axial
    oversample = 8
    n_fine = oversample * n_axial
    length = stroke.flagellum_length
    s = np.linspace(0.0, length, n_fine + 1)
    kappa = (stroke.wave_amplitude * np.sin(np.pi * s / length)
             * np.cos(2.0 * np.pi * (s / length - t)))
    psi0 = stroke.root_angle + stroke.base_angle + stroke.base_sweep * np.cos(2.0 * np.pi * t)
    theta = psi0 + np.concatenate([[0.0], np.cumsum(0.5 * (kappa[1:] + kappa[:-1]) * np.diff(s))])
    ds = np.diff(s)
    dx = 0.5 * (np.cos(theta[1:]) + np.cos(theta[:-1])) * ds
    dy = 0.5 * (np.sin(theta[1:]) + np.sin(theta[:-1])) * ds
    gap = 2.0 * stroke.tube_radius
    root = (stroke.body_radius + gap) * np.array([np.cos(stroke.root_angle),
                                                  np.sin(stroke.root_angle), 0.0])
    fine = np.empty((n_fine + 1, 3))
    fine[:, 0] = root[0] + np.concatenate([[0.0], np.cumsum(dx)])
    fine[:, 1] = root[1] + np.concatenate([[0.0], np.cumsum(dy)])
    fine[:, 2] = 0.0
    return fine[::oversample]


def _mirror_mesh(mesh: SurfaceMesh) -> SurfaceMesh:
    """Exact reflection across the xz plane; winding reversed to stay outward."""
    nodes = mesh.nodes * np.array([1.0, -1.0, 1.0])
    from .mesh import make_mesh

    return make_mesh(nodes, mesh.elements[:, [0, 2, 1]])


def _check_stroke_geometry(stroke: StrokeParams, centerline: np.ndarray, frame: int):
    r_tube = stroke.tube_radius
    dist_body = np.linalg.norm(centerline, axis=1)
    if dist_body.min() < stroke.body_radius + 1.5 * r_tube:
        raise MeshError(
            f"flagellum touches the body at frame {frame} "
            f"(clearance {dist_body.min() - stroke.body_radius:.3g})")
    if centerline[:, 1].min() < 1.5 * r_tube:
        raise MeshError(
            f"flagella would cross the symmetry plane at frame {frame}")
    # self-intersection: points far apart along the arc must stay separated
    n = len(centerline)
    d = np.linalg.norm(centerline[:, None, :] - centerline[None, :, :], axis=2)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    seg = stroke.flagellum_length / (n - 1)
    far = np.abs(i - j) * seg > 6.0 * r_tube
    if far.any() and d[far].min() < 3.0 * r_tube:
        raise MeshError(f"self-intersecting flagellum at frame {frame}")


def build_eukaryote(stroke: StrokeParams, frame: int) -> SwimmerGeometry:
    """Spherical body plus two mirror-symmetric flagella at the given frame.

    The frame index is periodic: frame and frame + frames give the same
    cached geometry object.
    """
    return _build_eukaryote(stroke, int(frame) % stroke.frames)


@lru_cache(maxsize=2048)
def _build_eukaryote(stroke: StrokeParams, frame: int) -> SwimmerGeometry:
    t = stroke.warped_time(frame / stroke.frames)
    body = icosphere(stroke.resolution.sphere_subdivisions, radius=stroke.body_radius)
    centerline = _flagellum_centerline(stroke, t)
    _check_stroke_geometry(stroke, centerline, frame)
    flag1 = tube_along_centerline(centerline, stroke.tube_radius,
                                  stroke.resolution.tube_circumferential,
                                  cap_length=stroke.tube_radius)
    flag2 = _mirror_mesh(flag1)
    merged = merge_meshes([body, flag1, flag2])
    return SwimmerGeometry(
        components=(body, flag1, flag2), names=("body", "flagellum1", "flagellum2"),
        mesh=merged, x0=area_centroid(merged))


def shape_velocity(stroke: StrokeParams, frame: int) -> np.ndarray:
    """Nodal shape velocity by periodic central differences across frames.

    Body nodes are at rest in the body frame; flagellar nodes move with the
    beat.  The frame time step is 1/frames of the unit period.
    """
    dt = 1.0 / stroke.frames
    fwd = build_eukaryote(stroke, (frame + 1) % stroke.frames)
    bwd = build_eukaryote(stroke, (frame - 1) % stroke.frames)
    v = (fwd.mesh.nodes - bwd.mesh.nodes) / (2.0 * dt)
    here = build_eukaryote(stroke, frame)
    v[here.node_slice("body")] = 0.0
    return v.reshape(-1)
