"""Finite-difference checks of the shape of ``h_q`` and ``h_q^2``.

``h_q`` should be concave in ``t`` and ``h_q^2`` monotone and convex on
``0 < t < 1``, ``1 < q <= 2``. The second derivatives factor as

    d2 h_q / dt2   = xi2^(1/q - 2) M(t, q)  / 2^(q+1)
    d2 h_q^2 / dt2 = xi2^(2/q - 2) M'(t, q) / 2^q

with ``xi2`` the bracket inside ``h_q``; this module evaluates ``M``, ``M'``,
their boundary limits at ``t -> 1`` and grid scans of the FD derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._validation import check_q
from .catalog import l_q_bound, m_and_mq_422, q0_root
from .measures import _h_q

LEMMA1_TOL = 2e-6
LEMMA2_FIRST_TOL = 1e-8
LEMMA2_SECOND_TOL = 2e-6
RICHARDSON_BAND = 0.05


@dataclass(frozen=True)
class GridSpec:
    """Rectangular ``(t, q)`` grid and the FD step used on it."""

    t_min: float = 0.01
    t_max: float = 0.99
    t_points: int = 99
    q_min: float = 1.05
    q_max: float = 2.0
    q_points: int = 20
    fd_step: float = 1e-4

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max < 1:
            raise ValueError("need 0 < t_min < t_max < 1")
        if not 1 < self.q_min <= self.q_max <= 2:
            raise ValueError("need 1 < q_min <= q_max <= 2")
        if not 1e-6 <= self.fd_step <= 1e-3:
            raise ValueError("fd_step must lie in [1e-6, 1e-3]")
        if self.t_points < 1 or self.q_points < 1:
            raise ValueError("grid needs at least one point per axis")
        if self.fd_step >= self.t_min or self.t_max + self.fd_step >= 1:
            raise ValueError("FD stencil would leave (0, 1)")

    def t_values(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_points)

    def q_values(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.q_points)


@dataclass(frozen=True)
class ScanReport:
    name: str
    violations: tuple[tuple[float, float, float], ...]
    max_violation: float
    grid: GridSpec
    n_points: int
    extremes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations


def _check_stencil(t, h: float, reach: float):
    t = np.asarray(t, dtype=float)
    if np.any(t - reach * h <= 0) or np.any(t + reach * h >= 1):
        raise ValueError(f"FD stencil t +- {reach * h:g} leaves (0, 1)")
    return t


def fd_first_derivative(f: Callable, t, h: float = 1e-4):
    """Central difference ``(f(t+h) - f(t-h)) / 2h``."""
    t = _check_stencil(t, h, 1.0)
    return (f(t + h) - f(t - h)) / (2.0 * h)


def fd_second_derivative(f: Callable, t, h: float = 1e-4, richardson: bool = False):
    """Central second difference ``(f(t-h) - 2 f(t) + f(t+h)) / h^2``.

    With ``richardson=True`` the step-``h`` and step-``h/2`` values are
    combined as ``(4 D(h/2) - D(h)) / 3``, cancelling the ``h^2`` error.
    ``f`` may be vectorized over ``t``.
    """
    t = _check_stencil(t, h, 1.0)

    def d2(step):
        return (f(t - step) - 2.0 * f(t) + f(t + step)) / (step * step)

    if not richardson:
        return d2(h)
    return (4.0 * d2(h / 2.0) - d2(h)) / 3.0


def _near_boundary(t: np.ndarray) -> np.ndarray:
    return (t <= RICHARDSON_BAND + 1e-12) | (t >= 1.0 - RICHARDSON_BAND - 1e-12)


def _second_on_grid(f, t: np.ndarray, h: float) -> np.ndarray:
    plain = fd_second_derivative(f, t, h)
    rich = fd_second_derivative(f, t, h, richardson=True)
    return np.where(_near_boundary(t), rich, plain)


def h_curve(q: float) -> Callable:
    q = check_q(q)
    return lambda t: _h_q(t, q)


def h2_curve(q: float) -> Callable:
    q = check_q(q)
    return lambda t: _h_q(t, q) ** 2


def lemma1_scan(grid: GridSpec = GridSpec()) -> ScanReport:
    """Concavity of ``h_q``: FD second derivative ``<= LEMMA1_TOL`` on the grid."""
    t = grid.t_values()
    violations, worst, hi = [], -math.inf, -math.inf
    for q in grid.q_values():
        g = _second_on_grid(h_curve(q), t, grid.fd_step)
        hi = max(hi, float(g.max()))
        for ti, gi in zip(t, g):
            if gi > LEMMA1_TOL:
                violations.append((float(ti), float(q), float(gi)))
                worst = max(worst, float(gi))
    return ScanReport("lemma1", tuple(violations), worst if violations else 0.0, grid, t.size * grid.q_points,
                      {"max_second_derivative": hi})


def lemma2_scan(grid: GridSpec = GridSpec()) -> ScanReport:
    """Monotonicity and convexity of ``h_q^2`` on the grid.

    A point violates if the first FD derivative is below ``-LEMMA2_FIRST_TOL``
    or the second below ``-LEMMA2_SECOND_TOL``; the reported value is the
    offending derivative.
    """
    t = grid.t_values()
    violations, worst = [], 0.0
    lo1, lo2 = math.inf, math.inf
    for q in grid.q_values():
        f = h2_curve(q)
        d1 = fd_first_derivative(f, t, grid.fd_step)
        d2 = _second_on_grid(f, t, grid.fd_step)
        lo1, lo2 = min(lo1, float(d1.min())), min(lo2, float(d2.min()))
        for ti, a, b in zip(t, d1, d2):
            if a < -LEMMA2_FIRST_TOL:
                violations.append((float(ti), float(q), float(a)))
                worst = max(worst, -float(a))
            if b < -LEMMA2_SECOND_TOL:
                violations.append((float(ti), float(q), float(b)))
                worst = max(worst, -float(b))
    return ScanReport("lemma2", tuple(violations), worst, grid, t.size * grid.q_points,
                      {"min_first_derivative": lo1, "min_second_derivative": lo2})


class XiM(NamedTuple):
    xi1: float
    xi2: float
    xi3: float
    xi4: float
    M: float
    M_prime: float


def xi_and_M(t, q: float) -> XiM:
    """The ``xi_1..xi_4`` building blocks and ``M``, ``M'`` at interior points."""
    q = check_q(q)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t >= 1):
        raise ValueError("xi_and_M needs 0 < t < 1")
    s = np.sqrt(1.0 - t)
    up, dn = 1.0 + s, 1.0 - s
    xi1 = (up ** (q - 1.0) - dn ** (q - 1.0)) ** 2 / (1.0 - t)
    xi2 = 1.0 - (up / 2.0) ** q - (dn / 2.0) ** q
    xi3 = up ** (q - 2.0) / (2.0 * (1.0 - t)) * (up / s - (q - 1.0))
    xi4 = dn ** (q - 2.0) / (2.0 * (1.0 - t)) * (dn / s + (q - 1.0))
    m = (1.0 - q) / 2.0 ** (q + 1.0) * xi1 + xi2 * (xi3 - xi4)
    mp = (2.0 - q) / 2.0 ** (q + 1.0) * xi1 + xi2 * (xi3 - xi4)
    out = [np.asarray(x) for x in (xi1, xi2, xi3, xi4, m, mp)]
    if t.ndim == 0:
        out = [float(x) for x in out]
    return XiM(*out)


def g_q_from_M(t, q: float):
    """``d2 h_q / dt2`` assembled from ``xi2`` and ``M``."""
    x = xi_and_M(t, q)
    return x.xi2 ** (1.0 / q - 2.0) * x.M / 2.0 ** (q + 1.0)


def g_tilde_from_M(t, q: float):
    """``d2 h_q^2 / dt2`` assembled from ``xi2`` and ``M'``."""
    x = xi_and_M(t, q)
    return x.xi2 ** (2.0 / q - 2.0) * x.M_prime / 2.0**q


def limit_t1_gq(q: float) -> float:
    """Closed-form ``lim_{t->1} d2 h_q / dt2``."""
    q = check_q(q)
    p = 2.0**q
    num = (q - 1.0) * (p * q * q - 5.0 * q * p + 6.0 * p + 4.0 * q * q - 2.0 * q - 6.0)
    return -num / (12.0 * (p - 2.0) ** ((2.0 * q - 1.0) / q))


def limit_t1_gq_tilde(q: float) -> float:
    """Closed-form ``lim_{t->1} d2 h_q^2 / dt2``."""
    q = check_q(q)
    p = 2.0**q
    num = (q * q - 3.0 * q + 2.0) * (4.0 * q + q * p - 3.0 * p)
    return 0.0 - num / (12.0 * (p - 2.0) ** ((2.0 * q - 2.0) / q))


@dataclass(frozen=True)
class TrendReport:
    q: float
    function: str
    t_sequence: tuple[float, ...]
    values: tuple[float, ...]
    trend: str  # "divergent" or "bounded"
    expected_sign: int
    note: str = ""


def boundary_divergence_probe(q: float, t_sequence: Sequence[float] = (1e-2, 1e-3, 1e-4),
                              function: str = "h") -> TrendReport:
    """Check that ``|d2 f/dt2|`` grows along a sequence ``t -> 0``.

    ``function`` is ``"h"`` (expected sign negative) or ``"h2"`` (positive).
    Each point uses a relative step ``t/10``. The trend is "divergent" when
    every value has the expected sign and magnitudes strictly increase, and
    "bounded" otherwise; ``h_2^2 = t/2`` is linear and reports bounded.
    """
    q = check_q(q)
    ts = tuple(float(t) for t in t_sequence)
    if len(ts) < 2 or any(not 0 < t < 1 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_sequence must be a decreasing sequence in (0, 1) of length >= 2")
    if function not in ("h", "h2"):
        raise ValueError("function must be 'h' or 'h2'")
    f = h_curve(q) if function == "h" else h2_curve(q)
    sign = -1 if function == "h" else 1
    vals = tuple(float(fd_second_derivative(f, t, t / 10.0, richardson=True)) for t in ts)
    mags = [abs(v) for v in vals]
    divergent = all(np.sign(v) == sign for v in vals) and all(b > a for a, b in zip(mags, mags[1:]))
    note = ""
    if function == "h2" and q == 2.0:
        divergent = False
        note = "h_2^2(t) = t/2 is linear: second derivative is identically 0 at q = 2"
    return TrendReport(q, function, ts, vals, "divergent" if divergent else "bounded", sign, note)


def gradient_M_grid(grid: GridSpec = GridSpec(), step: float = 1e-6) -> dict:
    """Central-difference gradient of ``M`` on the grid and its smallest magnitude.

    A grid check only: a strictly positive minimum says no sampled point is
    a critical point, which is weaker than excluding critical points.
    """
    t = grid.t_values()
    rows = []
    for q in grid.q_values():
        q_lo, q_hi = max(q - step, 1.0 + 1e-12), min(q + step, 2.0)
        dmt = (xi_and_M(t + step, q).M - xi_and_M(t - step, q).M) / (2.0 * step)
        dmq = (xi_and_M(t, q_hi).M - xi_and_M(t, q_lo).M) / (q_hi - q_lo)
        for ti, a, b in zip(t, dmt, dmq):
            rows.append((float(ti), float(q), float(a), float(b), math.hypot(a, b)))
    arr = np.array(rows)
    i = int(np.argmin(arr[:, 4]))
    return {"rows": rows, "min_norm": float(arr[i, 4]), "argmin": (float(arr[i, 0]), float(arr[i, 1]))}


def figure_data(grid: GridSpec = GridSpec(), theta_points: int = 33, mq_q_points: int = 19) -> dict:
    """Plot-ready tables ``name -> (header, rows)`` for the curve and surface figures."""
    qs = np.round(np.linspace(1.05, 2.0, 20), 12)
    q0 = q0_root()
    l_rows = [(float(q), l_q_bound(q)) for q in np.linspace(1.0 + 1e-3, 2.0, 200)]
    grad = gradient_M_grid(grid)
    thetas = np.linspace(0.0, math.pi / 2, theta_points)
    mqs = np.linspace(1.0, 1.5, mq_q_points)
    surface = [(float(th), float(q)) + m_and_mq_422(th, q) for th in thetas for q in mqs]
    return {
        "l_q_curve": (("q", "l_q", "q0"), [(q, v, q0) for q, v in l_rows]),
        "limit_gq": (("q", "limit_t1_gq"), [(float(q), limit_t1_gq(q)) for q in qs]),
        "limit_gq_tilde": (("q", "limit_t1_gq_tilde"), [(float(q), limit_t1_gq_tilde(q)) for q in qs]),
        "grad_M_grid": (("t", "q", "dM_dt", "dM_dq", "grad_norm"), grad["rows"]),
        "mq_surface": (("theta", "q", "M", "M_q"), surface),
    }
