"""Command-line entry points.

Subcommands: validate (analytic sphere checks), offline (train and
persist a reduced model), online (fast parametric queries), optimize
(two-step efficiency search), stroke (beat-cycle reconstruction), and
export (VTK surfaces and operator dumps).  Every run directory gets a
plain-text manifest listing the configuration hash, per-phase timings,
and every file written.
"""

import argparse
import hashlib
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import (fom_efficiency, reconstruct_stroke, rom_efficiency,
                       two_step_optimize)
from .assembly import assemble_operators
from .config import ExperimentConfig, config_text, load_config
from .container import write_container
from .mesh import write_vtk
from .rommodel import (BacteriumFamily, RomModel, StrokeFamily, build_rom,
                       collect_snapshots, traction_error)
from .solve import monolithic_solve, sphere_oracles, split_solve
from .swimmers import (StrokeParams, bacterium_resolution,
                       eukaryote_resolution)

_STROKE_SWEEP = (6, 12, 40, 120)


class RunManifest:
    """Collects timings and emitted files for one command invocation."""

    def __init__(self, out_dir, cfg):
        self.out_dir = out_dir
        self.cfg = cfg
        self.phases = []
        self.files = []
        os.makedirs(out_dir, exist_ok=True)

    def phase(self, name, seconds):
        self.phases.append((name, seconds))

    def path(self, name):
        p = os.path.join(self.out_dir, name)
        self.files.append(name)
        return p

    def write(self):
        text = config_text(self.cfg)
        digest = hashlib.sha256(text.encode()).hexdigest()
        lines = [f"code_version = {__version__}",
                 f"config_sha256 = {digest}", "", "[config]"]
        lines += text.splitlines()
        lines += ["", "[timings_seconds]"]
        lines += [f"{name} = {sec:.3f}" for name, sec in self.phases]
        lines += ["", "[files]"]
        lines += sorted(set(self.files))
        with open(os.path.join(self.out_dir, "manifest.txt"), "w",
                  encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def write_csv(path, header, rows):
    """Deterministic CSV: repr formatting, no timing fields."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x)
                              for x in row) + "\n")


def _family(cfg):
    if cfg.swimmer == "bacterium":
        return BacteriumFamily(bacterium_resolution(cfg.resolution))
    stroke = StrokeParams(frames=cfg.frames,
                          resolution=eukaryote_resolution(cfg.resolution))
    return StrokeFamily(stroke)


def _training_parameters(cfg):
    if cfg.swimmer == "bacterium":
        return [(a, b)
                for a in np.linspace(cfg.domain_min, cfg.domain_max,
                                     cfg.train_n)
                for b in np.linspace(cfg.domain_min, cfg.domain_max,
                                     cfg.train_r)]
    return [int(round(i * cfg.frames / cfg.n_training)) % cfg.frames
            for i in range(cfg.n_training)]


def _held_out(cfg, rng):
    if cfg.swimmer == "bacterium":
        return [(rng.uniform(cfg.domain_min, cfg.domain_max),
                 rng.uniform(cfg.domain_min, cfg.domain_max))
                for _ in range(cfg.held_out)]
    return [int(f) for f in rng.integers(0, cfg.frames, cfg.held_out)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(cfg, out):
    subdivisions = 3 if cfg.resolution == "desk" else 4
    factor = 1.0 if cfg.resolution == "desk" else 0.5
    t0 = time.time()
    oracle = sphere_oracles(subdivisions)
    checks = [
        ("sphere_translation_drag", oracle["drag_rel_err"], 0.02 * factor),
        ("sphere_rotation_torque", oracle["torque_rel_err"], 0.03 * factor),
        ("interior_point_force_traction",
         oracle["stokeslet_traction_rel_err"], 0.10 * factor),
    ]
    family = _family(ExperimentConfig(swimmer="bacterium",
                                      resolution=cfg.resolution).validate())
    mu = (cfg.n_lambda, cfg.r_head)
    geom = family.geometry(mu)
    ops = assemble_operators(geom.mesh)
    kit = geom.rigid_kit()
    v = family.velocity(mu)
    s1 = split_solve(ops, kit, v)
    s2 = monolithic_solve(ops, kit, v)
    diff = (np.linalg.norm(s1.p_dot - s2.p_dot)
            / np.linalg.norm(s1.p_dot))
    checks.append(("split_vs_monolithic", diff, 1e-8))
    failures = 0
    for name, value, tol in checks:
        ok = value <= tol
        failures += 0 if ok else 1
        print(f"{name}: {value:.3e} (tolerance {tol:.3e}) "
              f"{'PASS' if ok else 'FAIL'}")
    print(f"validation finished in {time.time() - t0:.1f}s "
          f"({oracle['n_nodes']} sphere nodes)")
    return 1 if failures else 0


def cmd_offline(cfg, out):
    manifest = RunManifest(out, cfg)
    family = _family(cfg)
    params = _training_parameters(cfg)
    if not params:
        print("empty training set", file=sys.stderr)
        return 1
    t0 = time.time()
    snaps = collect_snapshots(family, params)
    manifest.phase("snapshot_collection", time.time() - t0)
    t0 = time.time()
    rom = build_rom(family, snaps, mode=cfg.mode,
                    threshold=cfg.pod_threshold,
                    eim_threshold=cfg.eim_threshold,
                    meta={"seed": cfg.seed})
    manifest.phase("basis_and_interpolation", time.time() - t0)
    t0 = time.time()
    rom.save(manifest.path("rom"))
    manifest.files.append("rom.manifest")
    manifest.files.append("rom.bin")
    manifest.files.remove("rom")
    arrays = {"velocities": np.column_stack(snaps.velocities),
              "shape_tractions": np.column_stack(snaps.shape_tractions),
              "parameters": np.asarray(
                  [family.parameter_key(mu) for mu in snaps.parameters],
                  dtype=float)}
    write_container(manifest.path("snapshots.bin"), arrays)
    manifest.phase("persistence", time.time() - t0)
    manifest.write()
    print(f"trained {cfg.mode} model on {len(params)} parameters: "
          f"{rom.max_traction_modes} traction modes, "
          f"Q = {rom.exp_v.n_terms} + {rom.exp_k.n_terms}")
    return 0


def cmd_online(cfg, out, rom_prefix):
    manifest = RunManifest(out, cfg)
    rom = RomModel.load(rom_prefix)
    rng = np.random.default_rng(cfg.seed)
    queries = _held_out(cfg, rng)
    header = ["query", "p_dot_x", "p_dot_y", "p_dot_z",
              "omega_x", "omega_y", "omega_z"]
    if cfg.swimmer == "bacterium":
        header.append("eta")
    if cfg.verify == "fom":
        header.append("traction_rel_err")
    family = rom.family
    rows = []
    t0 = time.time()
    for mu in queries:
        sol = rom.solve(mu)
        row = [str(family.parameter_key(mu)).replace(",", ";")]
        row += [float(x) for x in sol.p_dot]
        if cfg.swimmer == "bacterium":
            row.append(rom_efficiency(rom, mu).eta)
        if cfg.verify == "fom":
            row.append(traction_error(rom, mu, family.solve(mu)))
        rows.append(row)
    manifest.phase("online_queries", time.time() - t0)
    write_csv(manifest.path("online.csv"), header, rows)
    manifest.write()
    print(f"answered {len(queries)} queries")
    return 0


def cmd_optimize(cfg, out):
    manifest = RunManifest(out, cfg)
    t0 = time.time()
    result = two_step_optimize(
        bacterium_resolution(cfg.resolution),
        domain=(cfg.domain_min, cfg.domain_max),
        coarse_step=cfg.coarse_step, fine_step=cfg.fine_step,
        train_n=cfg.train_n, train_r=cfg.train_r,
        threshold=cfg.pod_threshold, eim_threshold=cfg.eim_threshold,
        log=print)
    manifest.phase("two_step_optimization", time.time() - t0)
    for stage, records in (("coarse", result.coarse_records),
                           ("fine", result.fine_records)):
        for prov, recs in records.items():
            rows = [(r.mu[0], r.mu[1], r.U_axial, r.T_motor, r.eta)
                    for r in recs]
            write_csv(manifest.path(f"{stage}_map_{prov.lower()}.csv"),
                      ["n_lambda", "r_head", "u_axial", "t_motor", "eta"],
                      rows)
    comparison = []
    for stage, best in (("coarse", result.coarse_best),
                        ("fine", result.fine_best)):
        fom_eta = best["FOM"].eta
        for prov, rec in best.items():
            comparison.append((stage, prov, rec.mu[0], rec.mu[1], rec.eta,
                               abs(rec.eta - fom_eta) / fom_eta))
    comparison.append(("verify", "FOM", result.verification.mu[0],
                       result.verification.mu[1], result.verification.eta,
                       0.0))
    write_csv(manifest.path("comparison.csv"),
              ["stage", "provenance", "n_lambda", "r_head", "eta",
               "rel_err_vs_fom"], comparison)
    manifest.write()
    b = result.fine_best["ROM"]
    print(f"optimum eta = {b.eta:.6f} at (n_lambda, r_head) = "
          f"({b.mu[0]:.3f}, {b.mu[1]:.3f})")
    return 0


def cmd_stroke(cfg, out):
    manifest = RunManifest(out, cfg)
    family = _family(cfg)
    sweep = [n for n in _STROKE_SWEEP if n <= cfg.frames // 2]
    fom_p_dot = None
    error_rows = []
    series = {}
    for n in sweep:
        t0 = time.time()
        rec = reconstruct_stroke(family.stroke, n, mode=cfg.mode,
                                 threshold=cfg.pod_threshold,
                                 eim_threshold=cfg.eim_threshold,
                                 family=family, fom_p_dot=fom_p_dot,
                                 log=print)
        manifest.phase(f"reconstruction_n{n}", time.time() - t0)
        fom_p_dot = rec.fom_p_dot
        series[n] = rec.trajectory.p_dot[:, 0]
        error_rows.append((n, rec.l2_error))
    header = ["frame", "fom_longitudinal"] + [f"rom_n{n}" for n in sweep]
    rows = []
    for t in range(cfg.frames):
        rows.append([t, float(fom_p_dot[t, 0])]
                    + [float(series[n][t]) for n in sweep])
    write_csv(manifest.path("stroke_series.csv"), header, rows)
    write_csv(manifest.path("stroke_errors.csv"),
              ["n_training", "l2_longitudinal_rel_err"], error_rows)
    manifest.write()
    for n, err in error_rows:
        print(f"n_training = {n:4d}: relative L2 error {err:.3e}")
    return 0


def cmd_export(cfg, out):
    manifest = RunManifest(out, cfg)
    family = _family(cfg)
    mu = (cfg.n_lambda, cfg.r_head) if cfg.swimmer == "bacterium" else 0
    geom = family.geometry(mu)
    ops = assemble_operators(geom.mesh)
    kit = geom.rigid_kit()
    sol = split_solve(ops, kit, family.velocity(mu))
    f = sol.f.reshape(-1, 3)
    write_vtk(manifest.path("surface.vtk"), geom.mesh,
              point_vectors={"traction": f,
                             "velocity": (kit.P @ sol.p_dot
                                          + family.velocity(mu)).reshape(-1, 3)},
              point_scalars={"traction_magnitude":
                             np.linalg.norm(f, axis=1)})
    write_container(manifest.path("operators.bin"),
                    {"V": ops.V, "K": ops.K, "M": kit.M.toarray(),
                     "P": kit.P})
    manifest.write()
    print(f"exported surface and operators for {cfg.swimmer}")
    return 0


# ---------------------------------------------------------------------------


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="swimrom",
        description="Boundary-element and reduced-order simulation of "
                    "micro-swimmers")
    parser.add_argument("command",
                        choices=["validate", "offline", "online", "optimize",
                                 "stroke", "export"])
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--resolution", choices=["desk", "paper"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--verify", choices=["fom", "none"])
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--rom", help="rom file prefix (online command)")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        for key in ("resolution", "seed", "verify", "out"):
            val = getattr(args, key)
            if val is not None:
                setattr(cfg, key, val)
        cfg.validate()
    except Exception as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    out = cfg.out
    try:
        if args.command == "validate":
            return cmd_validate(cfg, out)
        if args.command == "offline":
            return cmd_offline(cfg, out)
        if args.command == "online":
            rom_prefix = args.rom or os.path.join(out, "rom")
            return cmd_online(cfg, out, rom_prefix)
        if args.command == "optimize":
            return cmd_optimize(cfg, out)
        if args.command == "stroke":
            return cmd_stroke(cfg, out)
        return cmd_export(cfg, out)
    except Exception as exc:  # surface phase context, exit nonzero
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
