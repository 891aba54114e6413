"""Session-scoped fixtures shared by the expensive end-to-end tests.

The reduced-model studies reuse one full-order training sweep each;
building them once per session keeps the suite within desk-scale
runtimes.
"""

import numpy as np
import pytest

from swimrom.rommodel import (BacteriumFamily, StrokeFamily, build_rom,
                              collect_snapshots)
from swimrom.swimmers import (StrokeParams, bacterium_resolution,
                              eukaryote_resolution)

BACT_DOMAIN = (0.4, 4.0)


@pytest.fixture(scope="session")
def bacterium_rom_study():
    """Dense split-mode bacterium model plus seeded held-out points.

    The traction manifold winds with n_lambda, so the training grid is
    dense along that axis (41 points) and coarser in r_head (9 points).
    """
    family = BacteriumFamily(bacterium_resolution("desk"))
    lo, hi = BACT_DOMAIN
    train = [(a, b) for a in np.linspace(lo, hi, 41)
             for b in np.linspace(lo, hi, 9)]
    snaps = collect_snapshots(family, train)
    family._sols.clear()
    family._geoms.clear()
    rom = build_rom(family, snaps, mode="split", threshold=1 - 1e-12,
                    eim_threshold=1 - 1e-12, max_eim_terms=260,
                    max_modes=160, release_matrices=True)
    rng = np.random.default_rng(7)
    held = [(float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)))
            for _ in range(10)]
    return {"family": family, "rom": rom, "held_out": held,
            "train": train}


@pytest.fixture(scope="session")
def stroke_240():
    """240-frame eukaryote stroke family with a shared solve cache."""
    stroke = StrokeParams(frames=240,
                          resolution=eukaryote_resolution("desk"))
    return StrokeFamily(stroke)


@pytest.fixture(scope="session")
def stroke_48():
    """Short stroke used by the sampling-strategy comparisons."""
    stroke = StrokeParams(frames=48,
                          resolution=eukaryote_resolution("desk"))
    return StrokeFamily(stroke)


@pytest.fixture(scope="session")
def optimization_result():
    import time

    from swimrom.analysis import two_step_optimize
    t0 = time.time()
    result = two_step_optimize(bacterium_resolution("desk"),
                               domain=BACT_DOMAIN)
    return result, time.time() - t0
