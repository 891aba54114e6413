"""Reduced-order building blocks: POD, matrix interpolation, greedy sampling.

POD compresses snapshot collections through an SVD with an energy cutoff
on the squared singular values.  Parametric operators are handled by a
discrete empirical interpolation of matrix entries: the offline stage picks
a small set of magic entries from vectorized matrix snapshots, the online
stage assembles only those entries and solves a tiny interpolation system.
Greedy sampling drives snapshot selection with cheap error indicators so
the expensive full-order solves concentrate where the bases are weakest.
"""

import numpy as np
import scipy.linalg

from .assembly import Assembler


class RomError(Exception):
    pass


class PodBasis:
    """Orthonormal basis from an SVD of a snapshot matrix.

    Attributes
    ----------
    modes : (n, m) array, columns orthonormal.
    singular_values : all singular values of the snapshot matrix.
    energy : retained fraction of the squared singular value sum.
    """

    def __init__(self, modes, singular_values, energy):
        self.modes = modes
        self.singular_values = singular_values
        self.energy = energy

    @property
    def n_modes(self):
        return self.modes.shape[1]

    def project(self, x):
        return self.modes.T @ x

    def lift(self, c):
        return self.modes @ c

    def projection_error(self, x):
        """Relative error of the orthogonal projection onto the basis."""
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return 0.0
        r = x - self.modes @ (self.modes.T @ x)
        return np.linalg.norm(r) / nx

    def truncated(self, m):
        if m < 1 or m > self.n_modes:
            raise RomError(f"cannot truncate basis of size {self.n_modes} to {m}")
        return PodBasis(self.modes[:, :m], self.singular_values, self.energy)


def pod(snapshots, threshold=0.9999, max_modes=None):
    """Compress snapshot columns into an orthonormal basis.

    Modes are kept until the cumulative squared singular values reach
    ``threshold`` times their total.  Raises on an all-zero snapshot set.
    """
    S = np.asarray(snapshots, dtype=float)
    if S.ndim != 2 or S.shape[1] == 0:
        raise RomError("snapshots must be a nonempty 2-d column collection")
    U, sig, _ = np.linalg.svd(S, full_matrices=False)
    total = np.sum(sig**2)
    if total == 0.0:
        raise RomError("all snapshots are zero, no basis can be extracted")
    cum = np.cumsum(sig**2) / total
    m = int(np.searchsorted(cum, threshold)) + 1
    m = min(m, len(sig))
    if max_modes is not None:
        m = min(m, max_modes)
    return PodBasis(np.ascontiguousarray(U[:, :m]), sig, float(cum[m - 1]))


class AffineMatrixExpansion:
    """Entry-interpolated surrogate of a parametric matrix family.

    ``basis`` holds Q vectorized matrix modes, ``indices`` the Q magic
    linear entries (row-major into the flattened matrix), and ``interp``
    the Q x Q matrix of basis rows at the magic entries.  Online, the
    coefficients solve interp @ theta = entries(mu).
    """

    def __init__(self, which, basis, indices, interp, shape):
        self.which = which
        self.basis = basis
        self.indices = indices
        self.interp = interp
        self.shape = shape
        self._lu = None

    @property
    def n_terms(self):
        return self.basis.shape[1]

    def coefficients(self, entry_values):
        vals = np.asarray(entry_values, dtype=float)
        if vals.shape != (self.n_terms,):
            raise RomError(
                f"expected {self.n_terms} entry values, got {vals.shape}")
        return np.linalg.solve(self.interp, vals)

    def reconstruct(self, theta):
        return (self.basis @ theta).reshape(self.shape)

    def truncated(self, q):
        if q < 1 or q > self.n_terms:
            raise RomError(f"cannot truncate {self.n_terms} terms to {q}")
        return AffineMatrixExpansion(
            self.which, self.basis[:, :q], self.indices[:q],
            self.basis[self.indices[:q], :q], self.shape)


def pod_gram(S, threshold=0.9999, max_modes=None):
    """POD via the snapshot Gram matrix, for very tall snapshot stacks.

    Avoids allocating the full left-singular factor: only the retained
    modes are formed, then re-orthonormalized by QR (the Gram route
    loses orthogonality on modes with tiny singular values).
    """
    S = np.asarray(S)
    G = S.T @ S
    lam, W = np.linalg.eigh(G)
    lam, W = lam[::-1], W[:, ::-1]
    lam = np.clip(lam, 0.0, None)
    total = lam.sum()
    if total == 0.0:
        raise RomError("all snapshots are zero, no basis can be extracted")
    cum = np.cumsum(lam) / total
    m = int(np.searchsorted(cum, threshold)) + 1
    m = min(m, np.count_nonzero(lam > lam[0] * 1e-28))
    if max_modes is not None:
        m = min(m, max_modes)
    sig = np.sqrt(lam[:m])
    U = S @ (W[:, :m] / sig)
    # in-place economy QR: a second (N, m) buffer would double the peak
    # memory on matrix-snapshot stacks
    U, _ = scipy.linalg.qr(U, mode="economic", overwrite_a=True,
                           check_finite=False)
    # C layout so persisted and freshly built bases multiply identically
    return PodBasis(np.ascontiguousarray(U), np.sqrt(lam),
                    float(cum[m - 1]))


def _deim_indices(modes):
    """Classic greedy entry selection: largest residual magnitude per mode.

    Ties break toward the lowest linear index (argmax on exact float
    comparison), keeping the selection deterministic.
    """
    q = modes.shape[1]
    indices = np.empty(q, dtype=np.int64)
    indices[0] = int(np.argmax(np.abs(modes[:, 0])))
    for k in range(1, q):
        sub = modes[indices[:k], :k]
        coeff = np.linalg.solve(sub, modes[indices[:k], k])
        residual = modes[:, k] - modes[:, :k] @ coeff
        idx = int(np.argmax(np.abs(residual)))
        if idx in indices[:k]:
            raise RomError("entry interpolation selected a duplicate index")
        indices[k] = idx
    return indices


def mdeim_offline(which, matrix_snapshots, threshold=0.9999, max_terms=None):
    """Build an entry-interpolated expansion from full matrix snapshots.

    ``matrix_snapshots`` is a sequence of equally shaped square matrices.
    Each is vectorized row-major; the POD of the resulting columns gives
    the expansion basis and the greedy selection gives the magic entries.
    """
    if isinstance(matrix_snapshots, np.ndarray):
        # (n_snapshots, n*n) stack of vectorized matrices, used as-is to
        # avoid copying what can be gigabytes
        if matrix_snapshots.ndim != 2 or matrix_snapshots.shape[0] == 0:
            raise RomError("no matrix snapshots supplied")
        n = int(round(matrix_snapshots.shape[1] ** 0.5))
        shape = (n, n)
        cols = matrix_snapshots.T
    else:
        mats = list(matrix_snapshots)
        if not mats:
            raise RomError("no matrix snapshots supplied")
        shape = mats[0].shape
        cols = np.column_stack([m.ravel() for m in mats])
    # Gram-based POD keeps memory proportional to the retained modes,
    # which matters for vectorized matrix snapshots.
    basis = pod_gram(cols, threshold=threshold, max_modes=max_terms)
    indices = _deim_indices(basis.modes)
    interp = basis.modes[indices, :]
    return AffineMatrixExpansion(which, basis.modes, indices, interp, shape)


def mdeim_online(expansion, assembler, full_matrix=None):
    """Interpolation coefficients for one parameter value.

    Assembles only the magic entries through ``assembler`` (an Assembler
    over the parameter's mesh).  ``full_matrix`` short-circuits assembly
    when the matrix is already available, e.g. during offline training.
    """
    if full_matrix is not None:
        vals = full_matrix.ravel()[expansion.indices]
    else:
        vals = assembler.entries(expansion.which, expansion.indices)
    return expansion.coefficients(vals)


def expansion_matrix(expansion, assembler, full_matrix=None):
    """Surrogate matrix at one parameter value."""
    theta = mdeim_online(expansion, assembler, full_matrix=full_matrix)
    return expansion.reconstruct(theta)


class GreedyReport:
    """History of one greedy pass: chosen parameters and indicator values."""

    def __init__(self, selected, history, stagnated):
        self.selected = selected
        self.history = history
        self.stagnated = stagnated


def greedy_sample(parameters, evaluate, indicator, n_select,
                  first=0, stagnation_window=5, stagnation_drop=1e-2):
    """Generic greedy loop over a discrete parameter set.

    ``evaluate(mu)`` performs the expensive full-order work for the chosen
    parameter and updates whatever state ``indicator`` reads.  ``indicator``
    maps each remaining parameter to a cheap error estimate; the argmax is
    selected next.  Stagnation (indicator ceasing to drop over a trailing
    window) is reported, not fatal: the loop runs to ``n_select``.
    """
    params = list(parameters)
    if n_select < 1 or n_select > len(params):
        raise RomError(
            f"cannot select {n_select} from {len(params)} parameters")
    remaining = list(range(len(params)))
    selected = []
    history = []
    pick = remaining.pop(first)
    selected.append(params[pick])
    evaluate(params[pick])
    while len(selected) < n_select and remaining:
        errs = np.array([indicator(params[j]) for j in remaining])
        k = int(np.argmax(errs))
        history.append(float(errs[k]))
        pick = remaining.pop(k)
        selected.append(params[pick])
        evaluate(params[pick])
    stagnated = False
    w = stagnation_window
    if len(history) > w:
        recent = history[-w:]
        base = history[-w - 1]
        if base > 0 and min(recent) > (1.0 - stagnation_drop) * base:
            stagnated = True
    return GreedyReport(selected, history, stagnated)
