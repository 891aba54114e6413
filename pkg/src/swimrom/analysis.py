"""Swimming performance quantities and parameter studies.

Covers the axial swimming speed, the Lighthill-style efficiency of the
helical swimmer, an additive baseline that ignores hydrodynamic
interaction between head and tail, a two-step (coarse then focused)
efficiency optimization over the tail parameters, and reconstruction of
a full beat cycle from a handful of trained frames.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import assemble_operators
from .mesh import RigidKit
from .rommodel import (BacteriumFamily, StrokeFamily, build_rom,
                       collect_snapshots)
from .solve import drag_coefficient_head, integrated_force, split_solve
from .swimmers import (BacteriumParams, build_bacterium,
                       motor_angular_velocity)


class AnalysisError(Exception):
    pass


def axial_velocity(p_dot, omega_motor):
    """Projection of the linear velocity onto the relative rotation axis.

    ``omega_motor`` is the motor's angular velocity vector; the axis is
    the direction of the rotation of the tail relative to the body,
    omega_motor - Omega with Omega the rigid angular velocity.
    """
    rel = np.asarray(omega_motor, dtype=float) - p_dot[3:]
    nrm = np.linalg.norm(rel)
    if nrm == 0.0:
        raise AnalysisError("zero relative rotation, axial direction undefined")
    return float(p_dot[:3] @ (rel / nrm))


@dataclass
class EfficiencyRecord:
    mu: tuple
    U_axial: float
    T_motor: float
    K_head: float
    eta: float
    provenance: str


def motor_torque(geom, kit, f):
    """Torque the motor must supply to spin the tail.

    The motor balances the fluid torque on the tail; the scalar returned
    is that reaction torque projected on the direction of the relative
    tail rotation, so a driving motor gives a positive value.
    """
    f_tail = np.zeros_like(f)
    mask = geom.dof_mask("tail")
    f_tail[mask] = f[mask]
    wrench = integrated_force(kit, f_tail)
    omega = motor_angular_velocity(geom)
    return float(-wrench[3:] @ (omega / np.linalg.norm(omega)))


def lighthill_efficiency(k_head, u_axial, t_motor, omega):
    """eta = K_head U^2 / (T omega), the payload-drag to input power ratio."""
    power = t_motor * omega
    if power <= 0.0:
        raise AnalysisError(
            f"non-positive motor power {power:.3e}, check sign conventions")
    return float(k_head * u_axial**2 / power)


def bacterium_efficiency(geom, kit, sol, mu, provenance):
    """Efficiency record from a solved helical-swimmer state."""
    omega_vec = motor_angular_velocity(geom)
    u_ax = axial_velocity(sol.p_dot, omega_vec)
    t_mot = motor_torque(geom, kit, sol.f)
    k_head = drag_coefficient_head(mu[1])
    eta = lighthill_efficiency(k_head, u_ax, t_mot, geom.motor_rate)
    return EfficiencyRecord(mu=tuple(mu), U_axial=u_ax, T_motor=t_mot,
                            K_head=k_head, eta=eta, provenance=provenance)


def fom_efficiency(family, mu):
    geom = family.geometry(mu)
    sol = family.solve(mu)
    return bacterium_efficiency(geom, geom.rigid_kit(), sol, mu, "FOM")


def rom_efficiency(rom, mu):
    family = rom.family
    geom = family.geometry(mu)
    sol = rom.solve(mu)
    return bacterium_efficiency(geom, geom.rigid_kit(), sol, mu, "ROM")


class AdditiveApproach:
    """Interaction-free baseline: head and tail solved in isolation.

    The 6x6 resistances of the isolated head and isolated tail (both
    taken about the assembled swimmer's reference point) are summed, so
    every hydrodynamic coupling between the two bodies is dropped.  Head
    solves are cached per head radius.
    """

    def __init__(self, resolution, phase=0.0):
        self.resolution = resolution
        self.phase = phase
        self._head_cache = {}

    def _component_solution(self, comp_mesh, x0, v):
        ops = assemble_operators(comp_mesh)
        kit = RigidKit.from_mesh(comp_mesh, x0)
        sol = split_solve(ops, kit, v)
        return kit, sol

    def solve(self, mu):
        """Rigid velocities and per-component tractions at mu."""
        params = BacteriumParams(mu[0], mu[1], phase=self.phase)
        geom = build_bacterium(params, self.resolution)
        x0 = geom.x0
        head, tail = geom.components
        hkey = (float(mu[1]), tuple(np.round(x0, 12)))
        if hkey not in self._head_cache:
            self._head_cache[hkey] = self._component_solution(
                head, x0, np.zeros(head.n_nodes * 3))
        hkit, hsol = self._head_cache[hkey]
        omega = motor_angular_velocity(geom)
        v_tail = np.cross(omega, tail.nodes).reshape(-1)
        tkit, tsol = self._component_solution(tail, x0, v_tail)
        R = (hkit.P.T @ hkit.M @ hsol.F_rigid
             + tkit.P.T @ tkit.M @ tsol.F_rigid)
        g = tkit.P.T @ tkit.M @ tsol.f_shape
        p_dot = -np.linalg.solve(R, g)
        f_tail = tsol.F_rigid @ p_dot + tsol.f_shape
        return geom, tkit, p_dot, f_tail

    def efficiency(self, mu):
        geom, tkit, p_dot, f_tail = self.solve(mu)
        omega_vec = motor_angular_velocity(geom)
        u_ax = axial_velocity(p_dot, omega_vec)
        wrench = integrated_force(tkit, f_tail)
        t_mot = float(-wrench[3:] @ (omega_vec / np.linalg.norm(omega_vec)))
        k_head = drag_coefficient_head(mu[1])
        eta = lighthill_efficiency(k_head, u_ax, t_mot, geom.motor_rate)
        return EfficiencyRecord(mu=tuple(mu), U_axial=u_ax, T_motor=t_mot,
                                K_head=k_head, eta=eta, provenance="AA")


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def grid_search(grid_n, grid_r, evaluate):
    """Evaluate eta over a tensor grid; returns (records, argmax record)."""
    records = []
    best = None
    for a in grid_n:
        for b in grid_r:
            rec = evaluate((float(a), float(b)))
            records.append(rec)
            if best is None or rec.eta > best.eta:
                best = rec
    return records, best


@dataclass
class OptimizationResult:
    coarse_records: dict      # provenance -> list of EfficiencyRecord
    coarse_best: dict         # provenance -> EfficiencyRecord
    fine_records: dict
    fine_best: dict
    focus_box: tuple          # ((n_lo, n_hi), (r_lo, r_hi))
    verification: EfficiencyRecord  # FOM solve at the ROM fine optimum
    boundary_warning: bool


def _focus_box(best_mu, step, domain):
    lo, hi = domain
    warn = False
    box = []
    for c in best_mu:
        b_lo, b_hi = c - step, c + step
        if b_lo < lo or b_hi > hi:
            warn = True
        box.append((max(lo, b_lo), min(hi, b_hi)))
    return (box[0], box[1]), warn


def two_step_optimize(resolution, domain=(0.4, 4.0), coarse_step=0.2,
                      fine_step=0.05, train_n=21, train_r=5,
                      focus_train=5, threshold=1 - 1e-12,
                      eim_threshold=1 - 1e-12, with_aa=True, log=None):
    """Coarse reduced-model sweep, then a focused refinement.

    Step one trains a reduced model on the whole domain and grid-searches
    the efficiency with both the reduced and the full solver (and the
    additive baseline when requested).  Step two retrains on a box of one
    coarse step around the coarse argmax and repeats on a finer grid.
    A fresh full-order verification at the reduced optimum is returned.
    """
    def says(msg):
        if log is not None:
            log(msg)

    family = BacteriumFamily(resolution)
    lo, hi = domain
    train = [(a, b) for a in np.linspace(lo, hi, train_n)
             for b in np.linspace(lo, hi, train_r)]
    says(f"training coarse model on {len(train)} parameters")
    rom = build_rom(family, collect_snapshots(family, train),
                    threshold=threshold, eim_threshold=eim_threshold)
    coarse_n = _grid(lo, hi, coarse_step)
    coarse_r = _grid(lo, hi, coarse_step)
    says(f"coarse sweep {len(coarse_n)}x{len(coarse_r)}")
    coarse_records, coarse_best = {}, {}
    coarse_records["ROM"], coarse_best["ROM"] = grid_search(
        coarse_n, coarse_r, lambda mu: rom_efficiency(rom, mu))
    fom_family = BacteriumFamily(resolution)
    coarse_records["FOM"], coarse_best["FOM"] = grid_search(
        coarse_n, coarse_r, lambda mu: fom_efficiency(fom_family, mu))
    fom_family._sols.clear()
    fom_family._geoms.clear()
    if with_aa:
        aa = AdditiveApproach(resolution)
        coarse_records["AA"], coarse_best["AA"] = grid_search(
            coarse_n, coarse_r, aa.efficiency)
    box, warn = _focus_box(coarse_best["ROM"].mu, coarse_step, domain)
    (n_lo, n_hi), (r_lo, r_hi) = box
    says(f"focus box [{n_lo:.2f},{n_hi:.2f}] x [{r_lo:.2f},{r_hi:.2f}]")
    focus_family = BacteriumFamily(resolution)
    focus_train_set = [(a, b)
                       for a in np.linspace(n_lo, n_hi, focus_train)
                       for b in np.linspace(r_lo, r_hi, focus_train)]
    if n_lo == n_hi and r_lo == r_hi:
        rec = fom_efficiency(focus_family, (n_lo, r_lo))
        return OptimizationResult(coarse_records, coarse_best,
                                  {"FOM": [rec]}, {"FOM": rec}, box, rec,
                                  warn)
    rom_fine = build_rom(focus_family,
                         collect_snapshots(focus_family, focus_train_set),
                         threshold=threshold, eim_threshold=eim_threshold)
    fine_n = _grid(n_lo, n_hi, fine_step)
    fine_r = _grid(r_lo, r_hi, fine_step)
    says(f"fine sweep {len(fine_n)}x{len(fine_r)}")
    fine_records, fine_best = {}, {}
    fine_records["ROM"], fine_best["ROM"] = grid_search(
        fine_n, fine_r, lambda mu: rom_efficiency(rom_fine, mu))
    fine_records["FOM"], fine_best["FOM"] = grid_search(
        fine_n, fine_r, lambda mu: fom_efficiency(focus_family, mu))
    if with_aa:
        fine_records["AA"], fine_best["AA"] = grid_search(
            fine_n, fine_r, aa.efficiency)
    verification = fom_efficiency(focus_family, fine_best["ROM"].mu)
    return OptimizationResult(coarse_records, coarse_best, fine_records,
                              fine_best, box, verification, warn)


# ---------------------------------------------------------------------------
# stroke reconstruction and rigid-motion integration


@dataclass
class StrokeTrajectory:
    p_dot: np.ndarray        # (T, 6) rigid velocities per frame
    positions: np.ndarray    # (T, 3) integrated positions
    quaternions: np.ndarray  # (T, 4) unit orientation history, scalar first
    dt: float


def _quat_mul(a, b):
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def _quat_exp(rotvec):
    angle = np.linalg.norm(rotvec)
    if angle < 1e-30:
        return np.array([1.0, 0.0, 0.0, 0.0])
    axis = rotvec / angle
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


def integrate_rigid_motion(p_dot_series, dt):
    """Integrate rigid velocities into positions and orientations.

    Positions advance with the explicit midpoint rule (velocity averaged
    over each step); orientations advance by the quaternion exponential
    of the averaged angular velocity, renormalized every step.
    """
    if dt <= 0:
        raise AnalysisError("time step must be positive")
    pd = np.asarray(p_dot_series, dtype=float)
    T = pd.shape[0]
    pos = np.zeros((T, 3))
    quat = np.zeros((T, 4))
    quat[0] = [1.0, 0.0, 0.0, 0.0]
    for k in range(T - 1):
        v_mid = 0.5 * (pd[k, :3] + pd[k + 1, :3])
        w_mid = 0.5 * (pd[k, 3:] + pd[k + 1, 3:])
        pos[k + 1] = pos[k] + dt * v_mid
        q = _quat_mul(quat[k], _quat_exp(dt * w_mid))
        quat[k + 1] = q / np.linalg.norm(q)
    return pos, quat


@dataclass
class StrokeReconstruction:
    n_training: int
    trajectory: StrokeTrajectory
    fom_p_dot: np.ndarray
    per_frame_error: np.ndarray   # longitudinal velocity error per frame
    l2_error: float               # relative L2-in-time longitudinal error


def training_frames(frames, n_training):
    if n_training < 2:
        raise AnalysisError("need at least two training frames")
    return [int(round(i * frames / n_training)) % frames
            for i in range(n_training)]


def reconstruct_stroke(stroke, n_training, mode="split",
                       threshold=1 - 1e-12, eim_threshold=1 - 1e-12,
                       family=None, fom_p_dot=None, log=None):
    """Train on equi-spaced frames, evaluate the whole beat cycle.

    Returns a StrokeReconstruction comparing the reduced longitudinal
    velocity against fresh full-order solves at every frame.  A shared
    ``family`` (with its solution cache) and precomputed ``fom_p_dot``
    may be passed to amortize the full-order sweep across calls.
    """
    if family is None:
        family = StrokeFamily(stroke)
    frames = stroke.frames
    train = training_frames(frames, n_training)
    if log is not None:
        log(f"training on {len(train)} of {frames} frames")
    snaps = collect_snapshots(family, train)
    rom = build_rom(family, snaps, mode=mode, threshold=threshold,
                    eim_threshold=eim_threshold)
    del snaps
    pd_rom = np.empty((frames, 6))
    for t in range(frames):
        pd_rom[t] = rom.solve(t).p_dot
    if fom_p_dot is None:
        fom_p_dot = np.empty((frames, 6))
        for t in range(frames):
            if log is not None and t % 40 == 0:
                log(f"full-order sweep frame {t}")
            fom_p_dot[t] = family.solve(t).p_dot
    dt = 1.0 / frames
    pos, quat = integrate_rigid_motion(pd_rom, dt)
    traj = StrokeTrajectory(p_dot=pd_rom, positions=pos, quaternions=quat,
                            dt=dt)
    long_rom, long_fom = pd_rom[:, 0], fom_p_dot[:, 0]
    per_frame = np.abs(long_rom - long_fom)
    l2 = float(np.linalg.norm(long_rom - long_fom)
               / np.linalg.norm(long_fom))
    return StrokeReconstruction(n_training=n_training, trajectory=traj,
                                fom_p_dot=fom_p_dot,
                                per_frame_error=per_frame, l2_error=l2)
