"""Validate the boundary-element solver against the unit sphere.

The analytic Stokes results for a rigid unit sphere in free space are
drag F = -6 pi mu U under translation and torque T = -8 pi mu Omega
under rotation.  This script assembles the single- and double-layer
collocation operators at a few mesh refinements and prints the observed
convergence of both oracles, plus the interior-point-force check used
by the `swimrom validate` command.
"""

import time

from swimrom.solve import sphere_oracles


def main():
    print(f"{'subdiv':>6} {'nodes':>6} {'drag err':>10} {'torque err':>11} "
          f"{'traction err':>13} {'seconds':>8}")
    for subdivisions in (1, 2, 3):
        t0 = time.time()
        oracle = sphere_oracles(subdivisions)
        print(f"{subdivisions:6d} {oracle['n_nodes']:6d} "
              f"{oracle['drag_rel_err']:10.3e} "
              f"{oracle['torque_rel_err']:11.3e} "
              f"{oracle['stokeslet_traction_rel_err']:13.3e} "
              f"{time.time() - t0:8.1f}")
    print("\nall three errors should drop with refinement; at subdiv 3 the")
    print("drag error is well inside the 2% gate used by `swimrom validate`.")


if __name__ == "__main__":
    main()
