"""Reduced swimmer models: snapshot collection, training, online solves.

A swimmer family maps a parameter (tail shape for the bacterium, beat
phase for the stroke swimmer) to a mesh, a shape velocity, and full-order
operators.  Training collects snapshots over the family and compresses
them into either

* split mode: one traction basis per right-hand side (six rigid modes
  plus the shape velocity, seven independent reduced systems) and one
  shared velocity basis, or
* monolithic mode: a single pooled traction basis and velocity basis
  feeding a reduced saddle-point system with the six balance rows.

Parametric operators enter through entry interpolation; the projected
blocks U_f^T A_i U_f and U_f^T A_i U_u are parameter independent and are
stored at full basis size, then sliced for mode sweeps.  Online solves
use the full-order mass matrix and rigid modes of the query mesh in the
force and torque balance.
"""

import json
import os

import numpy as np

from .assembly import Assembler, assemble_operators
from .container import read_container, write_container
from .rom import (AffineMatrixExpansion, GreedyReport, PodBasis, RomError,
                  mdeim_offline, mdeim_online, pod)
from .solve import SolveError, SwimSolution, split_solve
from .swimmers import (BacteriumParams, MeshResolution, StrokeParams,
                       bacterium_shape_velocity, build_bacterium,
                       build_eukaryote, shape_velocity)

_N_RHS = 7  # six rigid modes plus the shape velocity


class BacteriumFamily:
    """Helical-tail swimmers parametrized by (turn count, head radius)."""

    kind = "bacterium"

    def __init__(self, resolution, phase=0.0):
        self.resolution = resolution
        self.phase = phase
        self._geoms = {}
        self._sols = {}

    def parameter_key(self, mu):
        return (float(mu[0]), float(mu[1]))

    def geometry(self, mu):
        key = self.parameter_key(mu)
        if key not in self._geoms:
            params = BacteriumParams(key[0], key[1], phase=self.phase)
            self._geoms[key] = build_bacterium(params, self.resolution)
        return self._geoms[key]

    def velocity(self, mu):
        return bacterium_shape_velocity(self.geometry(mu))

    def operators(self, mu):
        return assemble_operators(self.geometry(mu).mesh)

    def solve(self, mu, ops=None):
        """Full-order split solution at mu, cached by parameter."""
        key = self.parameter_key(mu)
        if key not in self._sols:
            geom = self.geometry(mu)
            if ops is None:
                ops = assemble_operators(geom.mesh)
            self._sols[key] = split_solve(ops, geom.rigid_kit(),
                                          self.velocity(mu))
        return self._sols[key]

    def manifest_args(self):
        return {"resolution": list(self.resolution_tuple()),
                "phase": self.phase}

    def resolution_tuple(self):
        r = self.resolution
        return (r.sphere_subdivisions, r.tube_circumferential, r.tube_axial)


class StrokeFamily:
    """Periodic-beat swimmer parametrized by the frame index."""

    kind = "eukaryote"

    def __init__(self, stroke):
        self.stroke = stroke
        self._sols = {}

    def parameter_key(self, mu):
        return int(mu) % self.stroke.frames

    def geometry(self, mu):
        return build_eukaryote(self.stroke, self.parameter_key(mu))

    def velocity(self, mu):
        return shape_velocity(self.stroke, self.parameter_key(mu))

    def operators(self, mu):
        return assemble_operators(self.geometry(mu).mesh)

    def solve(self, mu, ops=None):
        key = self.parameter_key(mu)
        if key not in self._sols:
            geom = self.geometry(mu)
            if ops is None:
                ops = assemble_operators(geom.mesh)
            self._sols[key] = split_solve(ops, geom.rigid_kit(),
                                          self.velocity(mu))
        return self._sols[key]

    def manifest_args(self):
        s = self.stroke
        r = s.resolution
        return {"frames": s.frames, "body_diameter": s.body_diameter,
                "flagellum_length": s.flagellum_length,
                "flagellum_thickness": s.flagellum_thickness,
                "root_angle": s.root_angle, "base_angle": s.base_angle,
                "base_sweep": s.base_sweep, "wave_amplitude": s.wave_amplitude,
                "resolution": [r.sphere_subdivisions, r.tube_circumferential,
                               r.tube_axial]}


def family_from_manifest(kind, args):
    if kind == "bacterium":
        return BacteriumFamily(MeshResolution(*args["resolution"]),
                               phase=args.get("phase", 0.0))
    if kind == "eukaryote":
        res = MeshResolution(*args["resolution"])
        stroke = StrokeParams(
            frames=args["frames"], body_diameter=args["body_diameter"],
            flagellum_length=args["flagellum_length"],
            flagellum_thickness=args["flagellum_thickness"],
            root_angle=args["root_angle"], base_angle=args["base_angle"],
            base_sweep=args["base_sweep"],
            wave_amplitude=args["wave_amplitude"], resolution=res)
        return StrokeFamily(stroke)
    raise RomError(f"unknown swimmer family kind {kind!r}")


class SnapshotSet:
    """Full-order training data over a list of parameters."""

    def __init__(self, parameters, n_matrix=0):
        self.parameters = list(parameters)
        self.velocities = []      # shape velocities v(mu), (3n,)
        self.rigid_modes = []     # P(mu), (3n, 6)
        self.shape_tractions = []  # f_shape(mu), (3n,)
        self.rigid_tractions = []  # F_rigid(mu), (3n, 6)
        # Vectorized operator snapshots are preallocated as row stacks so
        # the offline stage never copies the multi-GB matrix data.
        self._n_matrix = n_matrix
        self.v_mats = None        # (n_matrix, 9n^2) rows of V(mu).ravel()
        self.k_mats = None        # same for K(mu)
        self._mat_fill = 0

    @property
    def n_snapshots(self):
        return len(self.velocities)

    def add(self, kit, v, sol, ops, store_matrices=True):
        self.velocities.append(v)
        self.rigid_modes.append(kit.P)
        self.shape_tractions.append(sol.f_shape)
        self.rigid_tractions.append(sol.F_rigid)
        if store_matrices:
            if self.v_mats is None:
                m = ops.V.size
                count = max(self._n_matrix or len(self.parameters), 1)
                self.v_mats = np.empty((count, m))
                self.k_mats = np.empty((count, m))
            if self._mat_fill >= self.v_mats.shape[0]:
                # incremental (greedy) collection outgrew the guess
                for name in ("v_mats", "k_mats"):
                    old = getattr(self, name)
                    new = np.empty((2 * old.shape[0], old.shape[1]))
                    new[: old.shape[0]] = old
                    setattr(self, name, new)
            i = self._mat_fill
            self.v_mats[i] = ops.V.ravel()
            self.k_mats[i] = ops.K.ravel()
            self._mat_fill += 1

    def matrix_columns(self, which):
        """Vectorized operator snapshots as a (9n^2, q) column view."""
        rows = self.v_mats if which == "V" else self.k_mats
        if rows is None:
            raise RomError("no matrix snapshots collected")
        return rows[: self._mat_fill].T

    def traction_columns(self, k):
        """Snapshot columns for right-hand side k (0..5 rigid, 6 shape)."""
        if k < 6:
            return np.column_stack([F[:, k] for F in self.rigid_tractions])
        return np.column_stack(self.shape_tractions)

    def velocity_columns(self):
        cols = [np.column_stack([v for v in self.velocities])]
        cols.extend(self.rigid_modes)
        return np.column_stack(cols)

    def pooled_traction_columns(self):
        cols = list(self.rigid_tractions)
        cols.append(np.column_stack(self.shape_tractions))
        return np.column_stack(cols)


def collect_snapshots(family, parameters, matrix_params=None):
    """Full-order training sweep.

    ``matrix_params`` optionally restricts the expensive matrix snapshots
    to a parameter subset: solution snapshots are cheap and stored at
    every parameter, operator snapshots at 3n x 3n dominate memory.
    """
    mat_keys = None
    n_matrix = len(list(parameters))
    if matrix_params is not None:
        mat_keys = {family.parameter_key(mu) for mu in matrix_params}
        n_matrix = sum(1 for mu in parameters
                       if family.parameter_key(mu) in mat_keys)
    snaps = SnapshotSet(parameters, n_matrix=n_matrix)
    for mu in parameters:
        geom = family.geometry(mu)
        ops = family.operators(mu)
        v = family.velocity(mu)
        sol = family.solve(mu, ops=ops)
        store = (mat_keys is None
                 or family.parameter_key(mu) in mat_keys)
        snaps.add(geom.rigid_kit(), v, sol, ops, store_matrices=store)
    return snaps


def _unit_columns(cols):
    norms = np.linalg.norm(cols, axis=0)
    norms[norms == 0.0] = 1.0
    return cols / norms


def _project_blocks(expansion, U_left, U_right):
    """Stack of U_left^T A_i U_right over the expansion terms."""
    q = expansion.n_terms
    n = U_left.shape[0]
    out = np.empty((q, U_left.shape[1], U_right.shape[1]))
    for i in range(q):
        A = expansion.basis[:, i].reshape(n, n)
        out[i] = U_left.T @ A @ U_right
    return out


class RomModel:
    """Trained reduced model, ready for online queries.

    ``tractions`` holds one PodBasis per reduced system (seven in split
    mode, one in monolithic mode); ``blocks_v[k]`` and ``blocks_k[k]``
    are the matching pre-projected operator stacks.
    """

    def __init__(self, mode, family, velocity_basis, traction_bases,
                 exp_v, exp_k, meta=None):
        if mode not in ("split", "monolithic"):
            raise RomError(f"unknown rom mode {mode!r}")
        self.mode = mode
        self.family = family
        self.velocity = velocity_basis
        self.tractions = traction_bases
        self.exp_v = exp_v
        self.exp_k = exp_k
        self.meta = dict(meta or {})
        self.blocks_v = [_project_blocks(exp_v, U.modes, U.modes)
                         for U in traction_bases]
        self.blocks_k = [_project_blocks(exp_k, U.modes, velocity_basis.modes)
                         for U in traction_bases]

    @property
    def max_traction_modes(self):
        return max(U.n_modes for U in self.tractions)

    def online_coefficients(self, mu, full_ops=None):
        """Entry-interpolation coefficients (theta_V, theta_K) at mu."""
        if full_ops is not None:
            tv = mdeim_online(self.exp_v, None, full_matrix=full_ops.V)
            tk = mdeim_online(self.exp_k, None, full_matrix=full_ops.K)
            return tv, tk
        asm = Assembler(self.family.geometry(mu).mesh)
        tv = self.exp_v.coefficients(asm.entries("V", self.exp_v.indices))
        tk = self.exp_k.coefficients(asm.entries("K", self.exp_k.indices))
        return tv, tk

    def solve(self, mu, n_modes=None, exact_ops=None):
        """Reduced solution at mu.

        ``n_modes`` caps every traction basis for convergence sweeps (the
        velocity basis stays full).  ``exact_ops`` bypasses the entry
        interpolation and projects the given full operators directly,
        isolating the basis truncation error.
        """
        geom = self.family.geometry(mu)
        kit = geom.rigid_kit()
        v = self.family.velocity(mu)
        nu = self.velocity.n_modes
        if exact_ops is None:
            tv, tk = self.online_coefficients(mu)
        if self.mode == "split":
            return self._solve_split(kit, v, n_modes, nu, exact_ops,
                                     None if exact_ops is not None else (tv, tk))
        return self._solve_monolithic(kit, v, n_modes, nu, exact_ops,
                                      None if exact_ops is not None else (tv, tk))

    def _reduced_pair(self, k, nf, nu, exact_ops, thetas):
        """(U_f^T V U_f, U_f^T K U_u) for system k at the given sizes."""
        U = self.tractions[k].modes[:, :nf]
        if exact_ops is not None:
            Vr = U.T @ exact_ops.V @ U
            Kr = U.T @ exact_ops.K @ self.velocity.modes[:, :nu]
        else:
            tv, tk = thetas
            Vr = np.einsum("q,qij->ij", tv, self.blocks_v[k][:, :nf, :nf])
            Kr = np.einsum("q,qij->ij", tk, self.blocks_k[k][:, :nf, :nu])
        return Vr, Kr

    def _solve_split(self, kit, v, n_modes, nu, exact_ops, thetas):
        Uu = self.velocity.modes[:, :nu]
        rhs_full = np.column_stack([kit.P, v])
        u_red = Uu.T @ rhs_full
        F = np.empty((kit.P.shape[0], _N_RHS))
        for k in range(_N_RHS):
            nf = self.tractions[k].n_modes
            if n_modes is not None:
                nf = min(nf, n_modes)
            Vr, Kr = self._reduced_pair(k, nf, nu, exact_ops, thetas)
            try:
                f_n = np.linalg.solve(Vr, Kr @ u_red[:, k])
            except np.linalg.LinAlgError as exc:
                raise SolveError(
                    f"reduced system {k} singular at {nf} modes, "
                    "basis likely too small") from exc
            F[:, k] = self.tractions[k].modes[:, :nf] @ f_n
        F_rigid, f_shape = F[:, :6], F[:, 6]
        PtM = kit.P.T @ kit.M
        grm = PtM @ F_rigid
        p_dot = -np.linalg.solve(grm, PtM @ f_shape)
        return SwimSolution(f=F_rigid @ p_dot + f_shape, p_dot=p_dot,
                            F_rigid=F_rigid, f_shape=f_shape)

    def _solve_monolithic(self, kit, v, n_modes, nu, exact_ops, thetas):
        nf = self.tractions[0].n_modes
        if n_modes is not None:
            nf = min(nf, n_modes)
        U = self.tractions[0].modes[:, :nf]
        Uu = self.velocity.modes[:, :nu]
        if exact_ops is not None:
            Vr = U.T @ exact_ops.V @ U
            KP = U.T @ (exact_ops.K @ kit.P)
            Kv = U.T @ (exact_ops.K @ v)
        else:
            Vr, Kr = self._reduced_pair(0, nf, nu, exact_ops, thetas)
            KP = Kr @ (Uu.T @ kit.P)
            Kv = Kr @ (Uu.T @ v)
        PtMU = kit.P.T @ (kit.M @ U)
        A = np.zeros((nf + 6, nf + 6))
        A[:nf, :nf] = Vr
        A[:nf, nf:] = -KP
        A[nf:, :nf] = PtMU
        rhs = np.concatenate([Kv, np.zeros(6)])
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolveError(
                f"reduced saddle system singular at {nf} modes") from exc
        f_n, p_dot = sol[:nf], sol[nf:]
        return SwimSolution(f=U @ f_n, p_dot=p_dot, F_rigid=None,
                            f_shape=None)

    # -- persistence ----------------------------------------------------

    def save(self, path_prefix):
        """Write <prefix>.manifest and <prefix>.bin; returns the two paths."""
        arrays = {"velocity_modes": self.velocity.modes,
                  "velocity_singular_values": self.velocity.singular_values}
        for k, U in enumerate(self.tractions):
            arrays[f"traction_modes_{k}"] = U.modes
            arrays[f"traction_singular_values_{k}"] = U.singular_values
        for tag, exp in (("v", self.exp_v), ("k", self.exp_k)):
            arrays[f"exp_{tag}_basis"] = exp.basis
            arrays[f"exp_{tag}_indices"] = exp.indices
            arrays[f"exp_{tag}_interp"] = exp.interp
        parent = os.path.dirname(path_prefix)
        if parent:
            os.makedirs(parent, exist_ok=True)
        bin_path = f"{path_prefix}.bin"
        man_path = f"{path_prefix}.manifest"
        write_container(bin_path, arrays)
        manifest = {
            "format": "swimrom-rom",
            "version": 1,
            "mode": self.mode,
            "family": self.family.kind,
            "family_args": self.family.manifest_args(),
            "n_systems": len(self.tractions),
            "velocity_modes": self.velocity.n_modes,
            "traction_modes": [U.n_modes for U in self.tractions],
            "q_v": self.exp_v.n_terms,
            "q_k": self.exp_k.n_terms,
            "meta": self.meta,
        }
        with open(man_path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return man_path, bin_path

    @classmethod
    def load(cls, path_prefix):
        with open(f"{path_prefix}.manifest", encoding="utf-8") as fh:
            manifest = json.load(fh)
        if manifest.get("format") != "swimrom-rom":
            raise RomError(f"{path_prefix}.manifest: not a rom manifest")
        if manifest["version"] != 1:
            raise RomError(f"unsupported rom version {manifest['version']}")
        arrays = read_container(f"{path_prefix}.bin")
        family = family_from_manifest(manifest["family"],
                                      manifest["family_args"])
        vel = PodBasis(arrays["velocity_modes"],
                       arrays["velocity_singular_values"], 1.0)
        tractions = [PodBasis(arrays[f"traction_modes_{k}"],
                              arrays[f"traction_singular_values_{k}"], 1.0)
                     for k in range(manifest["n_systems"])]
        n = vel.modes.shape[0]
        exps = {}
        for tag, which in (("v", "V"), ("k", "K")):
            exps[tag] = AffineMatrixExpansion(
                which, arrays[f"exp_{tag}_basis"],
                arrays[f"exp_{tag}_indices"], arrays[f"exp_{tag}_interp"],
                (n, n))
        return cls(manifest["mode"], family, vel, tractions,
                   exps["v"], exps["k"], meta=manifest.get("meta"))


def build_rom(family, snapshots, mode="split", threshold=0.9999,
              eim_threshold=0.9999, max_eim_terms=None, max_modes=None,
              meta=None, release_matrices=False):
    """Compress a snapshot set into a RomModel.

    ``max_modes`` caps each traction basis: the pre-projected operator
    blocks grow with the square of the basis size, so trimming modes the
    online sweeps never use saves a lot of offline time and memory.  The
    velocity basis is never capped; truncating it degrades the projected
    right-hand sides of every reduced system at once.
    ``release_matrices`` frees each operator snapshot stack as soon as its
    expansion is built, for runs close to the memory budget.
    """
    if snapshots.n_snapshots == 0:
        raise RomError("cannot train on an empty snapshot set")
    # Normalized columns here too: the rigid-mode columns carry far more
    # energy than the shape velocities and would otherwise crowd them out
    # of the basis.
    vel = pod(_unit_columns(snapshots.velocity_columns()), threshold)
    # Traction magnitudes vary strongly across the parameter domain, and
    # the error of interest is relative per query.  Normalizing each
    # snapshot column gives every training parameter equal weight in the
    # POD instead of letting the largest swimmers dominate the basis.
    if mode == "split":
        tractions = [pod(_unit_columns(snapshots.traction_columns(k)),
                         threshold, max_modes=max_modes)
                     for k in range(_N_RHS)]
    else:
        tractions = [pod(_unit_columns(snapshots.pooled_traction_columns()),
                         threshold, max_modes=max_modes)]
    exp_v = mdeim_offline("V", snapshots.v_mats[: snapshots._mat_fill],
                          threshold=eim_threshold, max_terms=max_eim_terms)
    if release_matrices:
        snapshots.v_mats = None
    exp_k = mdeim_offline("K", snapshots.k_mats[: snapshots._mat_fill],
                          threshold=eim_threshold, max_terms=max_eim_terms)
    if release_matrices:
        snapshots.k_mats = None
        snapshots._mat_fill = 0
    return RomModel(mode, family, vel, tractions, exp_v, exp_k, meta=meta)


def greedy_train(family, candidates, n_select, mode="split",
                 threshold=0.9999, eim_threshold=0.9999, first=0,
                 meta=None):
    """Greedy snapshot selection with incremental retraining.

    The velocity indicator is the relative projection error of the shape
    velocity onto the current velocity basis; the traction indicator is
    the full-order residual of the current reduced solution, assembled
    from the entry-interpolated operators and normalized by the norm of
    its right-hand side.  The combined indicator is their maximum, so a
    parameter is picked when either basis represents it poorly.
    Returns (RomModel, GreedyReport).
    """
    snaps = SnapshotSet([])
    state = {"rom": None}

    def evaluate(mu):
        geom = family.geometry(mu)
        ops = family.operators(mu)
        sol = family.solve(mu, ops=ops)
        snaps.parameters.append(mu)
        snaps.add(geom.rigid_kit(), family.velocity(mu), sol, ops)
        state["rom"] = build_rom(family, snaps, mode=mode,
                                 threshold=threshold,
                                 eim_threshold=eim_threshold, meta=meta)

    def indicator(mu):
        rom = state["rom"]
        v = family.velocity(mu)
        vel_err = rom.velocity.projection_error(v)
        geom = family.geometry(mu)
        kit = geom.rigid_kit()
        tv, tk = rom.online_coefficients(mu)
        V_tilde = rom.exp_v.reconstruct(tv)
        K_tilde = rom.exp_k.reconstruct(tk)
        red = rom.solve(mu)
        u = kit.P @ red.p_dot + v
        rhs = K_tilde @ u
        res = np.linalg.norm(rhs - V_tilde @ red.f)
        nrm = np.linalg.norm(rhs)
        trac_err = res / nrm if nrm > 0 else 0.0
        return max(vel_err, trac_err)

    from .rom import greedy_sample
    report = greedy_sample(candidates, evaluate, indicator, n_select,
                           first=first)
    return state["rom"], report


def traction_error(rom, mu, fom_sol, n_modes=None, exact_ops=None):
    """Relative Euclidean error of the combined traction against a
    full-order solution."""
    red = rom.solve(mu, n_modes=n_modes, exact_ops=exact_ops)
    return float(np.linalg.norm(red.f - fom_sol.f)
                 / np.linalg.norm(fom_sol.f))


def rom_error_report(rom, held_out, mode_counts=None, exact=False):
    """Error statistics against fresh full-order solves.

    Returns a list of rows (n_modes, min, mean, max) over the held-out
    parameters.  ``exact`` replaces the entry-interpolated operators
    with directly projected full operators, exposing the pure basis
    truncation error (no interpolation floor).
    """
    family = rom.family
    if mode_counts is None:
        mode_counts = sorted({max(1, rom.max_traction_modes // 2),
                              rom.max_traction_modes})
    fom = {family.parameter_key(mu): family.solve(mu) for mu in held_out}
    ops = {}
    if exact:
        ops = {family.parameter_key(mu): family.operators(mu)
               for mu in held_out}
    rows = []
    for m in mode_counts:
        errs = []
        for mu in held_out:
            key = family.parameter_key(mu)
            errs.append(traction_error(rom, mu, fom[key], n_modes=m,
                                       exact_ops=ops.get(key)))
        errs = np.array(errs)
        rows.append((m, float(errs.min()), float(errs.mean()),
                     float(errs.max())))
    return rows
