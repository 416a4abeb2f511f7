"""Concurrence and G_q-concurrence on pure and two-qubit / qubit-qudit states."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ._validation import check_q, check_subsystems, check_unit_interval
from .qcore import (
    DensityMatrix,
    PureState,
    _clamp_eigenvalues,
    hermitian_spectrum,
    jacobi_eigh,
    reduced_state,
)

_SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def _side_spectrum(psi: PureState, split: Sequence[int]) -> np.ndarray:
    split = check_subsystems(split, psi.n_subsystems, allow_full=False)
    return hermitian_spectrum(reduced_state(psi, split)).eigenvalues


def concurrence_pure(psi: PureState, split: Sequence[int]) -> float:
    """Pure-state concurrence ``sqrt(2 (1 - Tr rho_A^2))`` across ``split | rest``."""
    lam = _side_spectrum(psi, split)
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - np.sum(lam**2)))))


def gq_concurrence_pure(psi: PureState, split: Sequence[int], q: float) -> float:
    """Pure-state G_q-concurrence ``(1 - Tr rho_A^q)^(1/q)`` across ``split | rest``."""
    q = check_q(q)
    lam = _side_spectrum(psi, split)
    lam = lam[lam > 0]
    return float(max(0.0, 1.0 - np.sum(lam**q)) ** (1.0 / q))


def _h_bracket(t: np.ndarray, q: float) -> np.ndarray:
    # 1 - lp^q - lm^q with lm = (1 - sqrt(1-t))/2 evaluated without cancellation
    s = np.sqrt(1.0 - t)
    lm = t / (2.0 * (1.0 + s))
    out = -np.expm1(q * np.log1p(-lm)) - lm**q
    return np.maximum(out, 0.0)


def _h_q(t, q: float):
    t = np.asarray(t, dtype=float)
    out = _h_bracket(t, q) ** (1.0 / q)
    at_one = t == 1.0
    if np.any(at_one):
        out = np.where(at_one, (1.0 - 2.0 ** (1.0 - q)) ** (1.0 / q), out)
    return out if out.ndim else float(out)


def h_q(t, q: float):
    """Map squared concurrence ``t`` to G_q-concurrence on qubit-qudit states.

    Vectorized over ``t``; returns a float for scalar input.
    """
    q = check_q(q)
    return _h_q(check_unit_interval(t, "t"), q)


def h_q_squared(t, q: float):
    q = check_q(q)
    return _h_q(check_unit_interval(t, "t"), q) ** 2


def gq_max(q: float) -> float:
    """Largest G_q-concurrence attainable on a qubit-qudit state."""
    q = check_q(q, allow_one=True)
    return (1.0 - 2.0 ** (1.0 - q)) ** (1.0 / q)


WOOTTERS_RANK_TOL = 1e-14


def wootters_concurrence(rho: DensityMatrix) -> float:
    """Closed-form two-qubit concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` (square roots of the eigenvalues of ``rho (sy x sy) rho* (sy x sy)``)
    are the singular values of ``X.T (sy x sy) X`` with ``rho = X X^H``; this
    avoids square roots of round-off sized eigenvalues for low-rank input.
    """
    if rho.dims != (2, 2):
        raise ValueError(f"Wootters concurrence needs dims (2, 2), got {rho.dims}")
    w, v = jacobi_eigh(rho.matrix)
    _clamp_eigenvalues(w)
    keep = w > WOOTTERS_RANK_TOL
    x = v[:, keep] * np.sqrt(w[keep])
    lam = np.zeros(4)
    sv = np.linalg.svd(x.T @ _SIGMA_YY @ x, compute_uv=False)
    lam[: sv.size] = sv
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def wootters_batch(rhos: np.ndarray) -> np.ndarray:
    """Vectorized Wootters concurrence over a stack of 4x4 matrices (LAPACK)."""
    rhos = np.asarray(rhos, dtype=complex)
    w, v = np.linalg.eigh(rhos)
    x = v * np.sqrt(np.where(w > WOOTTERS_RANK_TOL, w, 0.0))[:, None, :]
    lam = np.linalg.svd(np.swapaxes(x, -1, -2) @ _SIGMA_YY @ x, compute_uv=False)
    return np.maximum(0.0, lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3])


def gq_concurrence_2xd_mixed(rho: DensityMatrix, q: float, c: float) -> float:
    """G_q-concurrence of a qubit-qudit state from its concurrence ``c``: ``h_q(c^2)``."""
    if rho.n_subsystems != 2 or rho.dims[0] != 2:
        raise ValueError(f"expected a 2 x d bipartite state, got dims {rho.dims}")
    c = float(check_unit_interval(c, "c"))
    return h_q(c * c, q)


class SpectralMeasure:
    """Pure-state measure that depends only on the reduced spectrum of one side.

    Instances are callables ``measure(psi, split)`` and additionally expose
    :meth:`weighted`, a vectorized evaluation of ``w * measure(psi / sqrt(w))``
    on subnormalized vectors used by the convex-roof optimizer.
    """

    def __init__(self, name: str, q: float):
        self.name = name
        self.q = float(q)

    def __repr__(self):
        return f"SpectralMeasure({self.name!r}, q={self.q})"

    def __call__(self, psi: PureState, split: Sequence[int]) -> float:
        lam = _side_spectrum(psi, split)
        return self._from_normalized(lam)

    def _from_normalized(self, lam: np.ndarray) -> float:
        lam = lam[lam > 0]
        bracket = max(0.0, 1.0 - float(np.sum(lam**self.q)))
        if self.name == "concurrence":
            return float(np.sqrt(2.0 * bracket))
        if self.name == "tangle":
            return 2.0 * bracket
        return float(bracket ** (1.0 / self.q))

    def side_blocks(self, vectors: np.ndarray, dims: Sequence[int], split: Sequence[int]) -> np.ndarray:
        """Rows reshaped to ``(K, d_A, d_B)`` matrices across ``split | rest``."""
        vectors = np.asarray(vectors)
        k = vectors.shape[0]
        split = tuple(split)
        da = int(np.prod([dims[i] for i in split]))
        if split == tuple(range(len(split))):
            return vectors.reshape(k, da, -1)
        rest = [i for i in range(len(dims)) if i not in split]
        t = vectors.reshape((k,) + tuple(dims))
        t = np.transpose(t, [0] + [1 + i for i in split] + [1 + i for i in rest])
        return t.reshape(k, da, -1)

    def weighted(self, vectors: np.ndarray, dims: Sequence[int], split: Sequence[int]) -> np.ndarray:
        m = self.side_blocks(vectors, dims, split)
        return self.weighted_from_side(m @ np.conj(np.swapaxes(m, -1, -2)))

    def weighted_from_side(self, r: np.ndarray) -> np.ndarray:
        """``w * measure`` from unnormalized side-A matrices ``r`` of trace ``w`` (any leading shape)."""
        if r.shape[-1] == 2:
            return self.weighted_from_qubit_side(r[..., 0, 0].real, r[..., 1, 1].real, r[..., 0, 1])
        w = np.real(np.trace(r, axis1=-2, axis2=-1))
        lam = np.clip(np.linalg.eigvalsh(r), 0.0, None)
        out = np.zeros(w.shape)
        live = w > 1e-300
        x = lam[live] / w[live][..., None]
        p = np.where(x > 0, x, 0.0) ** self.q
        bracket = np.maximum(1.0 - p.sum(axis=-1), 0.0)
        if self.name == "concurrence":
            out[live] = w[live] * np.sqrt(2.0 * bracket)
        elif self.name == "tangle":
            out[live] = w[live] * 2.0 * bracket
        else:
            out[live] = w[live] * bracket ** (1.0 / self.q)
        return out

    def weighted_from_qubit_side(self, a: np.ndarray, c: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``w * measure`` from a qubit side matrix ``[[a, b], [b*, c]]`` (closed-form spectrum)."""
        bb = b.real**2 + b.imag**2
        det = np.maximum(a * c - bb, 0.0)
        if self.name == "concurrence":
            return 2.0 * np.sqrt(det)
        w = a + c
        if self.name == "tangle":
            return np.divide(4.0 * det, w, out=np.zeros_like(w), where=w > 1e-300)
        big = 0.5 * (w + np.sqrt((a - c) ** 2 + 4.0 * bb))
        out = np.zeros_like(w)
        live = (big > 1e-300) & (w > 1e-300)
        x = det[live] / big[live] / w[live]
        bracket = np.maximum(-np.expm1(self.q * np.log1p(-x)) - x**self.q, 0.0)
        out[live] = w[live] * bracket ** (1.0 / self.q)
        return out


CONCURRENCE = SpectralMeasure("concurrence", 2.0)
# squared concurrence 2 (1 - Tr rho_A^2); its roof bounds the G_q roof from above
TANGLE = SpectralMeasure("tangle", 2.0)


def gq_measure(q: float) -> SpectralMeasure:
    """Pure-state G_q-concurrence as a roof-ready measure."""
    return SpectralMeasure("gq", check_q(q))
