"""Boundary-element and reduced-order simulation of micro-swimmers.

Direct solvers for exterior Stokes flow around deforming swimmers
(collocated single/double layer operators, split and monolithic rigid
balances) plus a reduced-order engine (POD, greedy sampling, matrix
entry interpolation) for fast parametric studies: efficiency
optimization of a helical swimmer and beat-cycle reconstruction of a
biflagellate one.
"""

__version__ = "1.0.0"

from .assembly import (AssemblyError, BemOperators, assemble_double_layer,
                       assemble_entries, assemble_operators,
                       assemble_single_layer)
from .kernels import stokeslet, stresslet
from .mesh import (MeshError, RigidKit, SurfaceMesh, icosphere, make_mesh,
                   merge_meshes, tube_along_centerline, write_vtk)
from .rom import (AffineMatrixExpansion, PodBasis, RomError, greedy_sample,
                  mdeim_offline, mdeim_online, pod)
from .rommodel import (BacteriumFamily, RomModel, SnapshotSet, StrokeFamily,
                       build_rom, collect_snapshots, greedy_train,
                       rom_error_report)
from .solve import (SolveError, SwimSolution, monolithic_solve,
                    sphere_oracles, split_solve)
from .swimmers import (BacteriumParams, MeshResolution, StrokeParams,
                       bacterium_resolution, build_bacterium,
                       build_eukaryote, eukaryote_resolution)

__all__ = [name for name in dir() if not name.startswith("_")]
