"""Numerical convex-roof extension of pure-state measures.

Every decomposition of a rank-``r`` density matrix into ``m`` subnormalized
vectors is ``Psi = V @ diag(sqrt(lam)) @ E.T`` for an ``m x r`` isometry ``V``
(``E`` holds the eigenvectors). The optimizer never stores ``V``: it acts on
the rows of ``Psi`` directly with two-row unitary (Givens) rotations, which
keeps the reconstruction ``Psi^H Psi = rho`` exact, and does coordinate
descent over all row pairs. Each pair move is a 2D search over the rotation
angle and phase: a coarse batched grid followed by shrinking local grids.

The returned value is the ensemble average over an explicit decomposition,
hence always an upper bound on the true roof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .measures import CONCURRENCE, TANGLE, gq_measure, h_q, wootters_concurrence
from .qcore import DensityMatrix, PureState, derive_seed, jacobi_eigh

RANK_TOL = 1e-12
MAX_ROOF_DIM = 64

_COARSE_THETA = np.linspace(-np.pi / 2, np.pi / 2, 12, endpoint=False)
_COARSE_PHI = np.linspace(0.0, np.pi, 6, endpoint=False)
_ZOOM_OFFSETS = np.linspace(-1.0, 1.0, 7)
_ZOOM_STAGES = 7
# the tangle pre-descent only has to leave the product-state cusp; it need not converge
SMOOTH_START_SWEEPS = 30


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Probability-weighted pure-state decomposition of a mixed state."""

    weights: np.ndarray
    states: tuple[PureState, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.states),):
            raise ValueError("weights and states differ in length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("ensemble weights must be a probability vector")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", tuple(self.states))

    def density(self) -> np.ndarray:
        amps = np.array([s.amplitudes for s in self.states])
        return (amps.T * self.weights) @ amps.conj()

    def average(self, measure: Callable, split=None) -> float:
        return float(sum(w * measure(s, split) for w, s in zip(self.weights, self.states)))


@dataclass(frozen=True)
class RoofConfig:
    """Optimizer settings. ``ensemble_size=None`` means ``min(2 r, 16)``."""

    ensemble_size: int | None = None
    restarts: int = 1
    max_iters: int = 200
    step_tolerance: float = 1e-9
    seed: int = 0
    smooth_start: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.ensemble_size is not None and self.ensemble_size < 1:
            raise ValueError("ensemble_size must be positive")

    def size_for_rank(self, rank: int) -> int:
        if self.ensemble_size is not None:
            if self.ensemble_size < rank:
                raise ValueError(f"ensemble size {self.ensemble_size} is below rank {rank}")
            return self.ensemble_size
        return max(rank, min(2 * rank, 16))

    def scaled(self, factor: int) -> "RoofConfig":
        """Same settings with ``factor`` times as many restarts."""
        return replace(self, restarts=self.restarts * factor)


@dataclass(frozen=True, eq=False)
class RoofResult:
    value: float
    best_ensemble: Ensemble
    converged: bool
    iterations_used: int
    restart_values: tuple[float, ...] = field(default=())


def _eigen_ensemble(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    w, v = jacobi_eigh(rho.matrix)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    if w[-1] < -1e-10:
        raise ValueError("density matrix has a negative eigenvalue")
    keep = w > RANK_TOL
    return w[keep], v[:, keep]


def ensemble_from_mixing(rho: DensityMatrix, mixing) -> Ensemble:
    """Decomposition of ``rho`` induced by an ``m x r`` isometry ``mixing``."""
    lam, vecs = _eigen_ensemble(rho)
    mixing = np.asarray(mixing, dtype=complex)
    if mixing.ndim != 2 or mixing.shape[1] != lam.size:
        raise ValueError(f"mixing must have {lam.size} columns (the rank of rho)")
    if np.max(np.abs(mixing.conj().T @ mixing - np.eye(lam.size))) > 1e-10:
        raise ValueError("mixing matrix columns are not orthonormal")
    psi = mixing @ (np.sqrt(lam)[:, None] * vecs.T)
    return _ensemble_from_rows(psi, rho.dims)


def _ensemble_from_rows(psi: np.ndarray, dims) -> Ensemble:
    w = np.real(np.einsum("ij,ij->i", psi, psi.conj()))
    live = w > 1e-15
    weights = w[live] / w[live].sum()
    states = tuple(PureState(row / np.linalg.norm(row), dims) for row in psi[live])
    return Ensemble(weights, states)


def _weighted_evaluator(measure, dims, split):
    if hasattr(measure, "weighted"):
        return lambda x: measure.weighted(x, dims, split)

    def evaluate(x):
        out = np.zeros(x.shape[0])
        for i, row in enumerate(x):
            w = float(np.real(np.vdot(row, row)))
            if w > 1e-300:
                out[i] = w * measure(PureState(row / math.sqrt(w), dims), split)
        return out

    return evaluate


def _round_robin(m: int) -> list[list[tuple[int, int]]]:
    """Partition all row pairs into rounds of disjoint pairs (circle method)."""
    players = list(range(m)) + ([None] if m % 2 else [])
    n = len(players)
    rounds = []
    for _ in range(n - 1):
        pairs = []
        for a in range(n // 2):
            i, j = players[a], players[n - 1 - a]
            if i is not None and j is not None:
                pairs.append((min(i, j), max(i, j)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _rotate(pi, pj, theta, phi):
    # pi, pj: (P, D); theta, phi: (P, K) -> rotated rows of shape (P, K, D)
    c = np.cos(theta)[..., None]
    s = np.sin(theta)[..., None]
    e = np.exp(1j * phi)[..., None]
    pi, pj = pi[:, None, :], pj[:, None, :]
    return c * pi - e * s * pj, np.conj(e) * s * pi + c * pj


def _row_pair_evaluator(pi, pj, evaluate):
    n_pairs, dim = pi.shape

    def pair_values(th, ph):
        ni, nj = _rotate(pi, pj, th, ph)
        k = th.shape[1]
        vals = evaluate(np.concatenate([ni.reshape(-1, dim), nj.reshape(-1, dim)]))
        return (vals[: n_pairs * k] + vals[n_pairs * k:]).reshape(n_pairs, k)

    return pair_values


def _side_pair_evaluator(pi, pj, side_blocks, from_side, from_qubit_side):
    # the side-A matrix of a rotated row is a fixed quadratic form in the
    # 2x2 rotation, so candidates never touch the full vectors
    mi, mj = side_blocks(pi), side_blocks(pj)
    rii = mi @ np.conj(np.swapaxes(mi, 1, 2))
    rjj = mj @ np.conj(np.swapaxes(mj, 1, 2))
    rij = mi @ np.conj(np.swapaxes(mj, 1, 2))

    if rii.shape[-1] == 2:
        ai, ci, bi = rii[:, 0, 0].real[:, None], rii[:, 1, 1].real[:, None], rii[:, 0, 1][:, None]
        aj, cj, bj = rjj[:, 0, 0].real[:, None], rjj[:, 1, 1].real[:, None], rjj[:, 0, 1][:, None]
        r00, r01, r10, r11 = (rij[:, a, b][:, None] for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)))

        def pair_values(th, ph):
            c2, s2, cs = np.cos(th) ** 2, np.sin(th) ** 2, 0.5 * np.sin(2.0 * th)
            e = np.exp(1j * ph)
            ec = np.conj(e)
            x00 = 2.0 * cs * (ec * r00).real
            x11 = 2.0 * cs * (ec * r11).real
            x01 = cs * (ec * r01 + e * np.conj(r10))
            vi = from_qubit_side(c2 * ai + s2 * aj - x00, c2 * ci + s2 * cj - x11, c2 * bi + s2 * bj - x01)
            vj = from_qubit_side(s2 * ai + c2 * aj + x00, s2 * ci + c2 * cj + x11, s2 * bi + c2 * bj + x01)
            return vi + vj

        return pair_values

    rji = np.conj(np.swapaxes(rij, 1, 2))
    rii, rjj, rij, rji = (x[:, None] for x in (rii, rjj, rij, rji))

    def pair_values(th, ph):
        c2 = (np.cos(th) ** 2)[..., None, None]
        s2 = (np.sin(th) ** 2)[..., None, None]
        cs = (0.5 * np.sin(2.0 * th))[..., None, None]
        e = np.exp(1j * ph)[..., None, None]
        x = cs * (np.conj(e) * rij + e * rji)
        return from_side(c2 * rii + s2 * rjj - x) + from_side(s2 * rii + c2 * rjj + x)

    return pair_values


def _best_pair_moves(pair_values, current):
    """Search the (theta, phi) rotation of each row pair.

    ``pair_values(theta, phi)`` maps candidate arrays of shape ``(P, K)`` to
    pair totals. Returns per-pair best angles and totals; a zero move is
    always a candidate, so totals never exceed ``current``.
    """
    n_pairs = current.shape[0]
    th0, ph0 = np.meshgrid(_COARSE_THETA, _COARSE_PHI, indexing="ij")
    th = np.broadcast_to(th0.ravel(), (n_pairs, th0.size))
    ph = np.broadcast_to(ph0.ravel(), (n_pairs, ph0.size))
    best_th = np.zeros(n_pairs)
    best_ph = np.zeros(n_pairs)
    best_val = np.array(current, dtype=float)
    d_th = _COARSE_THETA[1] - _COARSE_THETA[0]
    d_ph = _COARSE_PHI[1] - _COARSE_PHI[0]
    oth, oph = np.meshgrid(_ZOOM_OFFSETS, _ZOOM_OFFSETS, indexing="ij")
    oth, oph = oth.ravel(), oph.ravel()
    rows = np.arange(n_pairs)
    for stage in range(_ZOOM_STAGES + 1):
        if stage:
            th = best_th[:, None] + oth * d_th
            ph = best_ph[:, None] + oph * d_ph
            d_th, d_ph = d_th / 3.0, d_ph / 3.0
        totals = pair_values(th, ph)
        j = np.argmin(totals, axis=1)
        cand = totals[rows, j]
        better = cand < best_val
        best_th = np.where(better, th[rows, j], best_th)
        best_ph = np.where(better, ph[rows, j], best_ph)
        best_val = np.where(better, cand, best_val)
    return best_th, best_ph, best_val


def _descend(psi, evaluate, max_iters, step_tolerance, side=None):
    m = psi.shape[0]
    vals = evaluate(psi)
    total = float(vals.sum())
    rounds = _round_robin(m)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iters + 1):
        start = total
        for pairs in rounds:
            ii = np.array([p[0] for p in pairs])
            jj = np.array([p[1] for p in pairs])
            current = vals[ii] + vals[jj]
            if side is None:
                pair_values = _row_pair_evaluator(psi[ii], psi[jj], evaluate)
            else:
                pair_values = _side_pair_evaluator(psi[ii], psi[jj], *side)
            th, ph, new = _best_pair_moves(pair_values, current)
            move = new < current
            if not np.any(move):
                continue
            ii, jj = ii[move], jj[move]
            ni, nj = _rotate(psi[ii], psi[jj], th[move][:, None], ph[move][:, None])
            psi[ii], psi[jj] = ni[:, 0], nj[:, 0]
            vals[ii] = evaluate(psi[ii])
            vals[jj] = evaluate(psi[jj])
            total = float(vals.sum())
        if start - total < step_tolerance:
            converged = True
            break
    return psi, total, converged, sweeps


def _random_isometry(m: int, r: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    qmat, rmat = np.linalg.qr(z)
    return qmat * (np.diag(rmat) / np.abs(np.diag(rmat)))


def roof_minimize(rho: DensityMatrix, measure, split: Sequence[int] | None = None,
                  cfg: RoofConfig | None = None) -> RoofResult:
    """Upper bound on the convex roof of ``measure`` at ``rho``.

    ``measure`` is called as ``measure(psi, split)``; if it also provides
    ``weighted(vectors, dims, split)`` that vectorized form drives the search.
    Restart 0 starts from the eigen-ensemble padded with empty members, the
    others from Haar-random isometries seeded by ``derive_seed(cfg.seed, i)``.
    With ``cfg.smooth_start`` a spectral measure is preceded, per restart, by
    a descent on the squared-concurrence roof.
    The best result over all restarts is returned (ties go to the lowest
    restart index).
    """
    cfg = cfg or RoofConfig()
    if math.prod(rho.dims) > MAX_ROOF_DIM:
        raise ValueError(f"convex roof limited to total dimension {MAX_ROOF_DIM}")
    lam, vecs = _eigen_ensemble(rho)
    r = lam.size
    m = cfg.size_for_rank(r)
    split = tuple(split) if split is not None else None
    if r == 1:
        state = PureState(vecs[:, 0] / np.linalg.norm(vecs[:, 0]), rho.dims)
        ens = Ensemble(np.ones(1), (state,))
        return RoofResult(float(measure(state, split)), ens, True, 0, (float(measure(state, split)),))

    evaluate = _weighted_evaluator(measure, rho.dims, split)
    side = None
    if hasattr(measure, "side_blocks") and split is not None:
        side = (lambda x: measure.side_blocks(x, rho.dims, split), measure.weighted_from_side,
                measure.weighted_from_qubit_side)
    base = np.sqrt(lam)[:, None] * vecs.T
    best = None
    restart_values = []
    pre = None
    if side is not None and cfg.smooth_start and measure is not TANGLE:
        pre = (_weighted_evaluator(TANGLE, rho.dims, split),
               (lambda x: TANGLE.side_blocks(x, rho.dims, split), TANGLE.weighted_from_side,
                TANGLE.weighted_from_qubit_side))
    for restart in range(cfg.restarts):
        if restart == 0:
            mixing = np.eye(m, r, dtype=complex)
        else:
            mixing = _random_isometry(m, r, np.random.default_rng(derive_seed(cfg.seed, restart)))
        psi = mixing @ base
        if pre is not None:
            # the smooth tangle roof pulls members off the cusp at product states
            psi, _, _, _ = _descend(psi, pre[0], min(cfg.max_iters, SMOOTH_START_SWEEPS), cfg.step_tolerance,
                                    pre[1])
        psi, total, converged, sweeps = _descend(psi, evaluate, cfg.max_iters, cfg.step_tolerance, side)
        restart_values.append(total)
        if best is None or total < best[1]:
            best = (psi.copy(), total, converged, sweeps)

    psi, _, converged, sweeps = best
    ens = _ensemble_from_rows(psi, rho.dims)
    value = ens.average(measure, split)
    return RoofResult(value, ens, converged, sweeps, tuple(restart_values))


@dataclass(frozen=True)
class Theorem1Check:
    """Roof of G_q against ``h_q(C^2)`` for one qubit-qudit state and one q.

    For ``d > 2`` also carries ``h_q`` of the roof of ``C^2``: the G_q roof
    lies between ``h_q((roof C)^2)`` and ``h_q(roof C^2)``, with equality
    only when an optimal decomposition has equal member concurrences.
    """

    q: float
    gq_roof: float
    concurrence: float
    concurrence_method: str
    mapped: float
    residual: float
    tangle_roof: float | None = None
    mapped_tangle: float | None = None


def theorem1_checks(rho: DensityMatrix, q_grid: Sequence[float], cfg: RoofConfig | None = None,
                    with_tangle: bool = True) -> list[Theorem1Check]:
    """Per-q comparison of the G_q roof with ``h_q(C^2)`` on a 2 x d state.

    ``C`` is Wootters' value for two qubits and the roof of C otherwise;
    all roofs share ``cfg``.
    """
    if rho.n_subsystems != 2 or rho.dims[0] != 2:
        raise ValueError(f"expected a 2 x d state, got dims {rho.dims}")
    split = (0,)
    if rho.dims == (2, 2):
        c, method, tangle = wootters_concurrence(rho), "wootters", None
    else:
        c, method = roof_minimize(rho, CONCURRENCE, split, cfg).value, "roof"
        tangle = roof_minimize(rho, TANGLE, split, cfg).value if with_tangle else None
    c = min(c, 1.0)
    out = []
    for q in q_grid:
        gq = roof_minimize(rho, gq_measure(q), split, cfg).value
        mapped = float(h_q(c * c, q))
        mt = None if tangle is None else float(h_q(min(tangle, 1.0), q))
        out.append(Theorem1Check(float(q), gq, c, method, mapped, abs(gq - mapped), tangle, mt))
    return out


def verify_theorem1(rho: DensityMatrix, q: float, cfg: RoofConfig | None = None) -> float:
    """``|roof(G_q) - h_q(C^2)|`` for a qubit-qudit state.

    ``C`` is the Wootters concurrence for two qubits and a roof estimate
    otherwise; both roofs share ``cfg``.
    """
    return theorem1_checks(rho, [q], cfg, with_tangle=False)[0].residual
