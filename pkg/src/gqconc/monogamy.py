"""Hierarchical monogamy residuals and entanglement indicators.

For an ordering ``A1, ..., AN`` and level ``k`` the indicator is

    tau_qk = G_q^2(A1 | A2..AN) - sum_{i=2}^{k-1} G_q^2(A1 Ai) - G_q^2(A1 | Ak..AN)

and its squared-concurrence analogue. Mixed terms are evaluated by the first
exact method available: a family's closed form, Wootters' formula after
compressing both sides onto their (at most two-dimensional) supports, and
otherwise a convex-roof upper bound. Each term carries its provenance tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._validation import check_q, check_unit_interval
from .catalog import FamilyRecord
from .measures import (
    CONCURRENCE,
    _h_q,
    gq_measure,
    h_q,
    h_q_squared,
    wootters_batch,
    wootters_concurrence,
)
from .qcore import DensityMatrix, PureState, hermitian_spectrum, jacobi_eigh, partial_trace, reduced_state
from .roof import MAX_ROOF_DIM, RoofConfig, RoofResult, roof_minimize

TAG_CLOSED = "closed-form"
TAG_WOOTTERS = "wootters+h_q"
TAG_ROOF = "roof-upper-bound"

MONOGAMY_TOL = 1e-9
SUPPORT_TOL = 1e-12
DEFAULT_Q_GRID = (1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0)

CLASSES = ("both-monogamous", "SGqC-only", "both-violated", "SC-only")


@dataclass(frozen=True)
class HierarchySpec:
    """Split ``A1 | A2 | ... | A_{k-1} | (A_k ... A_N)`` of ``n`` subsystems.

    ``ordering[0]`` is the focus subsystem ``A1``; ``ordering`` defaults to
    the natural order.
    """

    n: int
    k: int
    ordering: tuple[int, ...] | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.n}")
        if int(self.k) != self.k or not 3 <= self.k <= self.n:
            raise ValueError(f"k must satisfy 3 <= k <= N={self.n}, got {self.k}")
        order = tuple(range(self.n)) if self.ordering is None else tuple(int(i) for i in self.ordering)
        if sorted(order) != list(range(self.n)):
            raise ValueError(f"ordering {order} is not a permutation of 0..{self.n - 1}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "ordering", order)

    @property
    def focus(self) -> int:
        return self.ordering[0]

    @property
    def pair_parties(self) -> tuple[int, ...]:
        return self.ordering[1 : self.k - 1]

    @property
    def block_parties(self) -> tuple[int, ...]:
        return self.ordering[self.k - 1 :]


@dataclass(frozen=True)
class ResidualReport:
    """Whole-vs-parts values of one hierarchy level and their residual."""

    whole: float
    pairwise: tuple[float, ...]
    block: float
    residual: float
    measure_tag: str
    q: float | None
    method_tags: Mapping[str, str]
    ordering: tuple[int, ...]

    @classmethod
    def build(cls, whole, pairwise, block, measure_tag, q, method_tags, ordering) -> "ResidualReport":
        pairwise = tuple(float(p) for p in pairwise)
        residual = float(whole) - sum(pairwise) - float(block)
        return cls(float(whole), pairwise, float(block), residual, measure_tag, q, dict(method_tags), tuple(ordering))

    @property
    def uses_roof(self) -> bool:
        return TAG_ROOF in self.method_tags.values()


@dataclass(frozen=True)
class HierarchyTerms:
    """Squared concurrences of every term at one hierarchy level (q-independent)."""

    spec: HierarchySpec
    dims: tuple[int, ...]
    whole_spectrum: np.ndarray
    pairwise_c2: tuple[float, ...]
    block_c2: float
    tags: Mapping[str, str]

    @property
    def whole_c2(self) -> float:
        return float(max(0.0, 2.0 * (1.0 - np.sum(self.whole_spectrum**2))))

    def whole_gq2(self, q: float) -> float:
        lam = self.whole_spectrum[self.whole_spectrum > 0]
        return float(max(0.0, 1.0 - np.sum(lam**q)) ** (2.0 / q))

    def sc_report(self) -> ResidualReport:
        return ResidualReport.build(self.whole_c2, self.pairwise_c2, self.block_c2, "SC", None,
                                    self.tags, self.spec.ordering)

    def gq_report(self, q: float) -> ResidualReport:
        """SGqC residual through the qubit-qudit mapping ``G_q^2 = h_q(C^2)^2``."""
        if self.dims[self.spec.focus] != 2:
            raise ValueError("the h_q mapping needs a two-level focus subsystem")
        q = check_q(q)
        pairs = [_h_sq(c2, q) for c2 in self.pairwise_c2]
        return ResidualReport.build(self.whole_gq2(q), pairs, _h_sq(self.block_c2, q), "SGqC", q,
                                    self.tags, self.spec.ordering)

    def alpha_residual(self, q: float, alpha: float) -> float:
        rep = self.gq_report(q)
        p = alpha / 2.0
        return rep.whole**p - sum(x**p for x in rep.pairwise) - rep.block**p


def _h_sq(c2: float, q: float) -> float:
    return float(_h_q(min(max(c2, 0.0), 1.0), q)) ** 2


def _term_label(spec: HierarchySpec, i: int | None) -> str:
    return "block" if i is None else f"pair:{i}"


def _support_isometry(mat: np.ndarray) -> np.ndarray:
    w, v = jacobi_eigh(mat)
    return v[:, w > SUPPORT_TOL]


def _compressed_2x2(rho: DensityMatrix):
    """Project a bipartite state onto the product of its local supports.

    Returns ``"product"`` when one side is pure, a two-qubit DensityMatrix when
    both supports have dimension at most two, and None otherwise.
    """
    da, db = rho.dims
    t = rho.matrix.reshape(da, db, da, db)
    va = _support_isometry(np.einsum("ijkj->ik", t))
    vb = _support_isometry(np.einsum("ijil->jl", t))
    if va.shape[1] <= 1 or vb.shape[1] <= 1:
        return "product"
    if va.shape[1] > 2 or vb.shape[1] > 2:
        return None
    iso = np.kron(va, vb)
    small = iso.conj().T @ rho.matrix @ iso
    small = 0.5 * (small + small.conj().T)
    return DensityMatrix(small / np.trace(small).real, (2, 2))


def _pure_vector(rho: DensityMatrix):
    w, v = jacobi_eigh(rho.matrix)
    if np.sum(w > SUPPORT_TOL) == 1:
        vec = v[:, -1]
        return PureState(vec / np.linalg.norm(vec), rho.dims)
    return None


def mixed_concurrence(rho: DensityMatrix, cfg: RoofConfig | None = None) -> tuple[float, str]:
    """Concurrence of a bipartite state (first subsystem vs the rest) with its tag.

    Pure input and product supports are exact; supports of dimension at most
    two per side reduce to Wootters' formula; anything else is a roof upper
    bound.
    """
    if rho.n_subsystems > 2:
        rho = rho.grouped(1)
    pure = _pure_vector(rho)
    if pure is not None:
        return float(CONCURRENCE(pure, (0,))), TAG_CLOSED
    comp = _compressed_2x2(rho)
    if isinstance(comp, str):
        return 0.0, TAG_CLOSED
    if comp is not None:
        return wootters_concurrence(comp), TAG_WOOTTERS
    return roof_minimize(rho, CONCURRENCE, (0,), cfg).value, TAG_ROOF


def mixed_gq_concurrence(rho: DensityMatrix, q: float, cfg: RoofConfig | None = None) -> tuple[float, str]:
    """G_q-concurrence of a bipartite state, for any focus dimension, with its tag.

    Uses ``h_q`` of the Wootters value when both supports are at most two
    dimensional, otherwise a direct roof of the G_q-concurrence.
    """
    q = check_q(q)
    if rho.n_subsystems > 2:
        rho = rho.grouped(1)
    pure = _pure_vector(rho)
    if pure is not None:
        return float(gq_measure(q)(pure, (0,))), TAG_CLOSED
    comp = _compressed_2x2(rho)
    if isinstance(comp, str):
        return 0.0, TAG_CLOSED
    if comp is not None:
        c = wootters_concurrence(comp)
        return float(h_q(min(c, 1.0) ** 2, q)), TAG_WOOTTERS
    return roof_minimize(rho, gq_measure(q), (0,), cfg).value, TAG_ROOF


def _closed_c2(closed_terms, spec: HierarchySpec) -> dict[str, float]:
    if closed_terms is None:
        return {}
    if isinstance(closed_terms, FamilyRecord):
        return {t: float(f(spec.n, spec.k)) for t, f in closed_terms.c2_terms.items()}
    return {t: float(v) for t, v in closed_terms.items()}


def hierarchy_terms(psi: PureState, spec: HierarchySpec, roof_config: RoofConfig | None = None,
                    closed_terms: FamilyRecord | Mapping[str, float] | None = None) -> HierarchyTerms:
    """Squared concurrences of the whole, pairwise and block terms of ``psi``.

    ``closed_terms`` supplies known squared concurrences keyed ``"pairwise"``
    (applied to every pair) and ``"block"``; they are tagged closed-form.
    """
    if psi.n_subsystems != spec.n:
        raise ValueError(f"state has {psi.n_subsystems} subsystems, spec expects {spec.n}")
    known = _closed_c2(closed_terms, spec)
    whole = hermitian_spectrum(reduced_state(psi, (spec.focus,))).eigenvalues
    tags = {"whole": TAG_CLOSED}
    pairs = []
    for i in spec.pair_parties:
        label = _term_label(spec, i)
        if "pairwise" in known:
            pairs.append(known["pairwise"])
            tags[label] = TAG_CLOSED
            continue
        c, tags[label] = mixed_concurrence(reduced_state(psi, (spec.focus, i)), roof_config)
        pairs.append(c * c)
    if "block" in known:
        block = known["block"]
        tags["block"] = TAG_CLOSED
    else:
        rho = reduced_state(psi, (spec.focus,) + spec.block_parties)
        c, tags["block"] = mixed_concurrence(rho, roof_config)
        block = c * c
    return HierarchyTerms(spec, psi.dims, whole, tuple(pairs), float(block), tags)


def _require_qubits(psi: PureState):
    if any(d != 2 for d in psi.dims):
        raise ValueError(f"expected qubit subsystems, got dims {psi.dims}")


def sc_residual(psi: PureState, spec: HierarchySpec, roof_config: RoofConfig | None = None,
                closed_terms=None) -> ResidualReport:
    """Squared-concurrence residual of an N-qubit pure state."""
    _require_qubits(psi)
    return hierarchy_terms(psi, spec, roof_config, closed_terms).sc_report()


def tau_qk_pure(psi: PureState, spec: HierarchySpec, q: float, roof_config: RoofConfig | None = None,
                closed_terms=None) -> ResidualReport:
    """Indicator ``tau_qk`` of a pure state whose focus subsystem is a qubit."""
    q = check_q(q)
    if psi.dims[spec.focus] != 2:
        raise ValueError("tau_qk needs a two-level focus subsystem")
    return hierarchy_terms(psi, spec, roof_config, closed_terms).gq_report(q)


def alpha_residual(psi: PureState, spec: HierarchySpec, q: float, alpha: float,
                   roof_config: RoofConfig | None = None, closed_terms=None) -> float:
    """``G_q^a(whole) - sum G_q^a(pairs) - G_q^a(block)`` for ``a >= 2``."""
    if not alpha >= 2:
        raise ValueError(f"alpha must be >= 2, got {alpha}")
    _require_qubits(psi)
    return hierarchy_terms(psi, spec, roof_config, closed_terms).alpha_residual(check_q(q), alpha)


def residual_from_values(c2_whole: float, c2_parts: Sequence[float], q: float) -> tuple[float, float]:
    """SC and SGqC residuals from squared concurrences of a qubit-qudit hierarchy."""
    q = check_q(q)
    whole = float(check_unit_interval(c2_whole, "c2_whole", slack=0.0))
    parts = [float(p) for p in check_unit_interval(list(c2_parts), "c2_parts", slack=0.0)]
    sc = math.fsum([whole] + [-p for p in parts])
    sg = math.fsum([float(h_q_squared(whole, q))] + [-float(h_q_squared(p, q)) for p in parts])
    return sc, sg


def _mixed_terms(rho: DensityMatrix, spec: HierarchySpec, cfg) -> tuple[list, list]:
    if rho.n_subsystems != spec.n:
        raise ValueError(f"state has {rho.n_subsystems} subsystems, spec expects {spec.n}")
    if rho.dims[spec.focus] != 2:
        raise ValueError("tau_qk needs a two-level focus subsystem")
    r = rho.permute(spec.ordering)
    labels = ["whole"] + [_term_label(spec, i) for i in spec.pair_parties] + ["block"]
    parts = [r]
    parts += [partial_trace(r, (0, j)) for j in range(1, spec.k - 1)]
    parts.append(partial_trace(r, (0,) + tuple(range(spec.k - 1, spec.n))))
    return labels, [mixed_concurrence(p, cfg) for p in parts]


def tau2_mixed(rho: DensityMatrix, spec: HierarchySpec, q: float,
               roof_config: RoofConfig | None = None) -> ResidualReport:
    """Indicator built from the mixed-state terms themselves.

    Every term, the whole one included, is exact or a tagged roof upper bound.
    """
    q = check_q(q)
    labels, vals = _mixed_terms(rho, spec, roof_config)
    tags = dict(zip(labels, (t for _, t in vals)))
    g2 = [_h_sq(c * c, q) for c, _ in vals]
    return ResidualReport.build(g2[0], g2[1:-1], g2[-1], "SGqC", q, tags, spec.ordering)


class _TauMeasure:
    """``tau_qk_pure`` as a roof-ready pure-state functional."""

    def __init__(self, spec: HierarchySpec, q: float, dims, roof_config: RoofConfig | None):
        self.spec = spec
        self.q = q
        self.roof_config = roof_config
        if spec.k == spec.n and all(d == 2 for d in dims):
            self.weighted = self._weighted_all_pairs

    def __call__(self, psi: PureState, split=None) -> float:
        return tau_qk_pure(psi, self.spec, self.q, self.roof_config).residual

    def _weighted_all_pairs(self, vectors, dims, split=None):
        # k = N on qubits: every mixed term is a two-qubit Wootters value
        n = len(dims)
        vectors = np.asarray(vectors)
        kk = vectors.shape[0]
        w = np.real(np.einsum("kd,kd->k", vectors, vectors.conj()))
        live = w > 1e-300
        out = np.zeros(kk)
        if not np.any(live):
            return out
        u = vectors[live] / np.sqrt(w[live])[:, None]
        t = u.reshape((-1,) + tuple(dims))
        t = np.transpose(t, [0] + [1 + i for i in self.spec.ordering])
        m = t.reshape(t.shape[0], 2, -1)
        a = np.real(np.einsum("kd,kd->k", m[:, 0], m[:, 0].conj()))
        det = np.maximum(a * (1.0 - a) - np.abs(np.einsum("kd,kd->k", m[:, 0], m[:, 1].conj())) ** 2, 0.0)
        big = 0.5 * (1.0 + np.sqrt(np.maximum(1.0 - 4.0 * det, 0.0)))
        x = det / big
        bracket = np.maximum(-np.expm1(self.q * np.log1p(-x)) - x**self.q, 0.0)
        tau = bracket ** (2.0 / self.q)
        for j in range(1, n):
            axes = [0, 1, 1 + j] + [1 + i for i in range(1, n) if i != j]
            pm = np.transpose(t, axes).reshape(t.shape[0], 4, -1)
            rho2 = pm @ np.conj(np.swapaxes(pm, 1, 2))
            c = np.minimum(wootters_batch(rho2), 1.0)
            tau = tau - _h_q(c * c, self.q) ** 2
        out[live] = w[live] * tau
        return out


def tau1_mixed(rho: DensityMatrix, spec: HierarchySpec, q: float, cfg: RoofConfig | None = None,
               term_config: RoofConfig | None = None) -> RoofResult:
    """Convex roof of ``tau_qk_pure`` over decompositions of ``rho`` (upper bound).

    For ``k = N`` on qubits every candidate is evaluated in closed form and
    vectorized; otherwise each candidate's block term may itself need a roof
    (``term_config``), which is slow.
    """
    q = check_q(q)
    if math.prod(rho.dims) > MAX_ROOF_DIM:
        raise ValueError(f"tau1 limited to total dimension {MAX_ROOF_DIM}")
    if rho.n_subsystems != spec.n or rho.dims[spec.focus] != 2:
        raise ValueError("state does not match the hierarchy spec or has a multilevel focus subsystem")
    return roof_minimize(rho, _TauMeasure(spec, q, rho.dims, term_config), None, cfg)


@dataclass(frozen=True)
class ComparisonRow:
    q: float
    sc: ResidualReport
    sgqc: ResidualReport
    classification: str
    anomaly: bool
    rechecked: bool = False

    @property
    def sc_residual(self) -> float:
        return self.sc.residual

    @property
    def sgqc_residual(self) -> float:
        return self.sgqc.residual


def classify(sc: float, sgqc: float, tol: float = MONOGAMY_TOL) -> str:
    sc_ok, sg_ok = sc >= -tol, sgqc >= -tol
    if sc_ok and sg_ok:
        return "both-monogamous"
    if sg_ok:
        return "SGqC-only"
    if sc_ok:
        return "SC-only"
    return "both-violated"


def _gq_reports(psi, spec, terms: HierarchyTerms, q_grid, cfg, closed_terms=None) -> list[ResidualReport]:
    if psi.dims[spec.focus] == 2:
        return [terms.gq_report(q) for q in q_grid]
    # multilevel focus: no h_q mapping, every mixed term is a closed form or its own G_q roof
    known = closed_terms.closed_form_terms if isinstance(closed_terms, FamilyRecord) else {}
    mixed = [(_term_label(spec, i), "pairwise", reduced_state(psi, (spec.focus, i))) for i in spec.pair_parties]
    mixed.append(("block", "block", reduced_state(psi, (spec.focus,) + spec.block_parties)))
    out = []
    for q in q_grid:
        vals, tags = [], {"whole": TAG_CLOSED}
        for label, kind, rho in mixed:
            if kind in known:
                vals.append(float(known[kind](spec.n, spec.k, q)))
                tags[label] = TAG_CLOSED
                continue
            g, tags[label] = mixed_gq_concurrence(rho, q, cfg)
            vals.append(g * g)
        out.append(ResidualReport.build(terms.whole_gq2(q), vals[:-1], vals[-1], "SGqC", q, tags,
                                        spec.ordering))
    return out


def compare_sc_sgqc(state: PureState, spec: HierarchySpec, q_grid: Sequence[float] = DEFAULT_Q_GRID,
                    roof_config: RoofConfig | None = None, closed_terms=None,
                    recheck_factor: int = 5) -> list[ComparisonRow]:
    """SC and SGqC residuals of one state over ``q_grid`` with a classification per q.

    "SC-only" rows on a two-level focus subsystem are anomalies; if any of
    their terms came from a roof they are recomputed with ``recheck_factor``
    times the restarts before being reported.
    """
    q_grid = [check_q(q) for q in q_grid]
    cfg = roof_config or RoofConfig()
    terms = hierarchy_terms(state, spec, cfg, closed_terms)
    sc = terms.sc_report()
    rows = []
    for q, sg in zip(q_grid, _gq_reports(state, spec, terms, q_grid, cfg, closed_terms)):
        cls = classify(sc.residual, sg.residual)
        anomaly = cls == "SC-only" and state.dims[spec.focus] == 2
        rechecked = False
        if anomaly and (sc.uses_roof or sg.uses_roof):
            big = cfg.scaled(recheck_factor)
            t2 = hierarchy_terms(state, spec, big, closed_terms)
            sc2, sg2 = t2.sc_report(), _gq_reports(state, spec, t2, [q], big, closed_terms)[0]
            cls = classify(sc2.residual, sg2.residual)
            anomaly = cls == "SC-only"
            rechecked = True
            rows.append(ComparisonRow(q, sc2, sg2, cls, anomaly, rechecked))
            continue
        rows.append(ComparisonRow(q, sc, sg, cls, anomaly, rechecked))
    return rows


@dataclass(frozen=True)
class SweepRow:
    """Residuals of one state at one hierarchy level for every q."""

    k: int
    sc_residual: float
    tau: tuple[float, ...]
    q_grid: tuple[float, ...]
    tags: Mapping[str, str] = field(default_factory=dict)
    rechecked: bool = False


def hierarchy_sweep(psi: PureState, q_grid: Sequence[float] = DEFAULT_Q_GRID,
                    roof_config: RoofConfig | None = None, recheck_factor: int = 5) -> list[SweepRow]:
    """``tau_qk`` at every level ``k = 3..N`` of a qubit state, natural ordering.

    Levels with a residual below ``-MONOGAMY_TOL`` that depend on a roof
    term are recomputed with ``recheck_factor`` times the restarts.
    """
    _require_qubits(psi)
    q_grid = tuple(check_q(q) for q in q_grid)
    cfg = roof_config or RoofConfig()
    rows = []
    for k in range(3, psi.n_subsystems + 1):
        spec = HierarchySpec(psi.n_subsystems, k)
        terms = hierarchy_terms(psi, spec, cfg)
        taus = tuple(terms.gq_report(q).residual for q in q_grid)
        rechecked = False
        if min(taus + (terms.sc_report().residual,)) < -MONOGAMY_TOL and TAG_ROOF in terms.tags.values():
            terms = hierarchy_terms(psi, spec, cfg.scaled(recheck_factor))
            taus = tuple(terms.gq_report(q).residual for q in q_grid)
            rechecked = True
        rows.append(SweepRow(k, terms.sc_report().residual, taus, q_grid, dict(terms.tags), rechecked))
    return rows
