"""Dense linear algebra for composite quantum systems.

Index convention: subsystem 0 is the most significant (slowest varying)
index of the flattened amplitude vector, i.e. ``psi.reshape(dims)`` in C
order yields one tensor axis per subsystem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._validation import check_dims, check_subsystems

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10
JACOBI_TOL = 1e-13

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, index: int) -> int:
    """Mix ``(master, index)`` into a 64-bit seed with the splitmix64 finalizer."""
    x = (int(master) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector over subsystems of dimensions ``dims``."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = check_dims(self.dims)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != math.prod(dims):
            raise ValueError(f"amplitude vector of length {amps.size} does not match dims {dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector, dims: Sequence[int]) -> "PureState":
        """Normalize ``vector`` and wrap it."""
        vec = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(vec / norm, tuple(dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def permute(self, order: Sequence[int]) -> "PureState":
        """Reorder subsystems so that new subsystem ``i`` is old ``order[i]``."""
        order = check_subsystems(order, len(self.dims))
        if len(order) != len(self.dims):
            raise ValueError("order must be a permutation of all subsystems")
        t = np.transpose(self.tensor(), order)
        return PureState(t.ravel(), tuple(self.dims[i] for i in order))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace operator over subsystems of dimensions ``dims``."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = check_dims(self.dims)
        total = math.prod(dims)
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (total, total):
            raise ValueError(f"matrix of shape {mat.shape} does not match dims {dims}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        mat = 0.5 * (mat + mat.conj().T)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def permute(self, order: Sequence[int]) -> "DensityMatrix":
        """Reorder subsystems so that new subsystem ``i`` is old ``order[i]``."""
        order = check_subsystems(order, len(self.dims))
        if len(order) != len(self.dims):
            raise ValueError("order must be a permutation of all subsystems")
        n = len(self.dims)
        t = np.transpose(self.matrix.reshape(self.dims + self.dims), list(order) + [n + i for i in order])
        total = math.prod(self.dims)
        return DensityMatrix(t.reshape(total, total), tuple(self.dims[i] for i in order))

    def grouped(self, n_first: int = 1) -> "DensityMatrix":
        """Same operator viewed as a bipartite state: first ``n_first`` subsystems vs the rest."""
        if not 1 <= n_first < len(self.dims):
            raise ValueError("grouping needs two nonempty sides")
        da = math.prod(self.dims[:n_first])
        return DensityMatrix(self.matrix, (da, math.prod(self.dims) // da))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a density matrix, descending, clamped to [0, 1]."""

    eigenvalues: np.ndarray = field(repr=True)

    def rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(self.eigenvalues > tol))

    def power_trace(self, q: float) -> float:
        """``sum(lambda**q)`` with ``0**q`` taken as 0."""
        lam = self.eigenvalues[self.eigenvalues > 0]
        return float(np.sum(lam**q))


def jacobi_eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v)`` with ascending eigenvalues ``w`` and orthonormal
    eigenvectors in the columns of ``v``. Iteration stops once the
    off-diagonal Frobenius norm drops below ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("jacobi_eigh needs a square matrix")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                theta = 0.5 * math.atan2(2.0 * r, a[p, p].real - a[q, q].real)
                c, s = math.cos(theta), math.sin(theta)
                g = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ g
                a[cols, :] = g.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, cols] = v[:, cols] @ g
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _clamp_eigenvalues(w: np.ndarray) -> np.ndarray:
    if w.size and w.min() < -NEGATIVE_EIG_TOL:
        raise ValueError(f"eigenvalue {w.min():.3e} below -{NEGATIVE_EIG_TOL}: not a valid density matrix")
    return np.clip(w, 0.0, 1.0)


def hermitian_spectrum(rho: DensityMatrix | np.ndarray) -> Spectrum:
    """Descending, clamped spectrum of a density matrix."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    w, _ = jacobi_eigh(mat)
    return Spectrum(_clamp_eigenvalues(w[::-1]))


def tensor_product(factors: Iterable[PureState]) -> PureState:
    factors = list(factors)
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    amps = factors[0].amplitudes
    dims = factors[0].dims
    for f in factors[1:]:
        amps = np.kron(amps, f.amplitudes)
        dims = dims + f.dims
    return PureState(amps, dims)


def basis_state(levels: Sequence[int], dims: Sequence[int]) -> PureState:
    """Computational basis state ``|levels[0] levels[1] ...>``."""
    dims = check_dims(dims)
    if len(levels) != len(dims) or any(not 0 <= l < d for l, d in zip(levels, dims)):
        raise ValueError(f"levels {tuple(levels)} invalid for dims {dims}")
    amps = np.zeros(math.prod(dims), dtype=complex)
    amps[np.ravel_multi_index(tuple(levels), dims)] = 1.0
    return PureState(amps, dims)


def _reduced_matrix(tensor: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    n = tensor.ndim
    rest = [i for i in range(n) if i not in keep]
    t = np.transpose(tensor, list(keep) + rest)
    dk = math.prod(tensor.shape[i] for i in keep)
    m = t.reshape(dk, -1)
    return m @ m.conj().T


def reduced_state(psi: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix of ``psi`` on ``keep`` (kept in the given order)."""
    keep = check_subsystems(keep, psi.n_subsystems)
    mat = _reduced_matrix(psi.tensor(), keep)
    return DensityMatrix(mat, tuple(psi.dims[i] for i in keep))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every subsystem not in ``keep`` (kept in the given order)."""
    keep = check_subsystems(keep, rho.n_subsystems)
    n = rho.n_subsystems
    if n > 26:
        raise ValueError("too many subsystems for partial_trace")
    letters = "abcdefghijklmnopqrstuvwxyz"
    upper = letters.upper()
    row = [letters[i] for i in range(n)]
    col = [letters[i] if i not in keep else upper[i] for i in range(n)]
    out = "".join(letters[i] for i in keep) + "".join(upper[i] for i in keep)
    t = rho.matrix.reshape(rho.dims + rho.dims)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    dk = math.prod(rho.dims[i] for i in keep)
    return DensityMatrix(red.reshape(dk, dk), tuple(rho.dims[i] for i in keep))


def haar_random_pure(dims: Sequence[int], seed: int) -> PureState:
    """Haar-random pure state; deterministic for a fixed seed."""
    dims = check_dims(dims)
    rng = np.random.default_rng(seed)
    total = math.prod(dims)
    z = rng.standard_normal(total) + 1j * rng.standard_normal(total)
    return PureState(z / np.linalg.norm(z), dims)


def random_mixed(dims: Sequence[int], rank: int, seed: int) -> DensityMatrix:
    """Random density matrix of the given rank.

    Drawn by tracing a ``rank``-dimensional ancilla out of a Haar-random
    pure state, so the result follows the induced measure.
    """
    dims = check_dims(dims)
    total = math.prod(dims)
    rank = int(rank)
    if not 1 <= rank <= total:
        raise ValueError(f"rank must lie in [1, {total}], got {rank}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((total, rank)) + 1j * rng.standard_normal((total, rank))
    z /= np.linalg.norm(z)
    mat = z @ z.conj().T
    mat /= np.trace(mat).real
    return DensityMatrix(mat, dims)
