"""Named state families with closed-form entanglement terms.

W and GHZ states on qubits, the totally antisymmetric qutrit triple, and the
``4 x 2 x 2`` family ``(a|000> + b|110> + a|201> + b|311>)/sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ._validation import check_q
from .measures import h_q_squared
from .qcore import PureState

TermFn = Callable[[int, int, float], float]


@dataclass(frozen=True)
class FamilyRecord:
    """A state family with closed forms for the hierarchy terms.

    ``closed_form_terms`` maps a term id (``"whole"``, ``"pairwise"``,
    ``"block"``) to a function of ``(N, k, q)`` returning the squared
    G_q-concurrence of that term. ``c2_terms`` holds the matching squared
    concurrences as functions of ``(N, k)``.
    """

    name: str
    params: Mapping[str, float] = field(default_factory=dict)
    closed_form_terms: Mapping[str, TermFn] = field(default_factory=dict)
    c2_terms: Mapping[str, Callable[[int, int], float]] = field(default_factory=dict)


def _check_n(n: int, minimum: int = 2) -> int:
    if int(n) != n or n < minimum:
        raise ValueError(f"N must be an integer >= {minimum}, got {n}")
    return int(n)


def _check_nk(n: int, k: int) -> tuple[int, int]:
    n = _check_n(n, 3)
    if int(k) != k or not 3 <= k <= n:
        raise ValueError(f"k must satisfy 3 <= k <= N={n}, got {k}")
    return n, int(k)


def w_state(n: int) -> PureState:
    """``|W_N> = (|10...0> + |01...0> + ... + |0...01>) / sqrt(N)``."""
    n = _check_n(n)
    amps = np.zeros(2**n, dtype=complex)
    for i in range(n):
        amps[1 << (n - 1 - i)] = 1.0
    return PureState(amps / math.sqrt(n), (2,) * n)


def ghz_state(n: int) -> PureState:
    """``(|0...0> + |1...1>) / sqrt(2)``."""
    n = _check_n(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
    return PureState(amps, (2,) * n)


def w_closed_c2(n: int, k: int) -> dict[str, float]:
    """Squared concurrences of the W-state hierarchy terms.

    Focus qubit against the rest, against one other qubit, and against the
    block of the last ``N - k + 1`` qubits.
    """
    n, k = _check_nk(n, k)
    return {
        "whole": 4.0 * (n - 1) / n**2,
        "pairwise": 4.0 / n**2,
        "block": 4.0 * (n - k + 1) / n**2,
    }


def w_closed_terms(n: int, k: int, q: float) -> tuple[float, float, float]:
    """Squared G_q-concurrences ``(whole, pairwise, block)`` of ``|W_N>``."""
    q = check_q(q)
    c2 = w_closed_c2(n, k)
    return tuple(float(h_q_squared(c2[t], q)) for t in ("whole", "pairwise", "block"))


def w_tau(n: int, k: int, q: float) -> float:
    """Hierarchy indicator of ``|W_N>``: whole minus ``k - 2`` pairwise terms minus the block."""
    whole, pair, block = w_closed_terms(n, k, q)
    return whole - (k - 2) * pair - block


def w_table1_value(n: int, k: int, q: float) -> float:
    """W-state indicator as tabulated for ``N = 8``: whole minus one pairwise term minus the block.

    The printed table subtracts a single pairwise term for every ``k``;
    :func:`w_tau` is the indicator with all ``k - 2`` pairwise terms.
    """
    whole, pair, block = w_closed_terms(n, k, q)
    return whole - pair - block


def w_family(n: int) -> FamilyRecord:
    n = _check_n(n, 3)
    return FamilyRecord(
        name="W",
        params={"N": n},
        closed_form_terms={
            "whole": lambda nn, kk, q: w_closed_terms(nn, kk, q)[0],
            "pairwise": lambda nn, kk, q: w_closed_terms(nn, kk, q)[1],
            "block": lambda nn, kk, q: w_closed_terms(nn, kk, q)[2],
        },
        c2_terms={t: (lambda nn, kk, t=t: w_closed_c2(nn, kk)[t]) for t in ("whole", "pairwise", "block")},
    )


# published W_8 indicator grid: rows k = 3..8, columns q = 1.3..1.7 (4 decimals)
TABLE1_Q = (1.3, 1.4, 1.5, 1.6, 1.7)
TABLE1_K = (3, 4, 5, 6, 7, 8)
TABLE1_VALUES = {
    3: (0.0031, 0.0048, 0.0063, 0.0070, 0.0069),
    4: (0.0076, 0.0128, 0.0181, 0.0230, 0.0270),
    5: (0.0119, 0.0203, 0.0295, 0.0385, 0.0466),
    6: (0.0158, 0.0274, 0.0402, 0.0532, 0.0656),
    7: (0.0193, 0.0337, 0.0501, 0.0671, 0.0837),
    8: (0.0222, 0.0391, 0.0587, 0.0796, 0.1005),
}


def antisymmetric_333() -> PureState:
    """Totally antisymmetric state of three qutrits (levels 0, 1, 2)."""
    amps = np.zeros(27, dtype=complex)
    for perm, sign in (((0, 1, 2), 1), ((0, 2, 1), -1), ((1, 2, 0), 1),
                       ((1, 0, 2), -1), ((2, 0, 1), 1), ((2, 1, 0), -1)):
        amps[np.ravel_multi_index(perm, (3, 3, 3))] = sign / math.sqrt(6.0)
    return PureState(amps, (3, 3, 3))


def l_q_bound(q: float) -> float:
    """Lower bound on the SGqC residual of the antisymmetric state.

    ``[1 - (1/3)^(q-1)]^(2/q) - 2 [1 - 2 (1/2)^q]^(2/q)``.
    """
    q = check_q(q, allow_one=True)
    whole = (1.0 - (1.0 / 3.0) ** (q - 1.0)) ** (2.0 / q)
    pair = (1.0 - 2.0 * 0.5**q) ** (2.0 / q)
    return whole - 2.0 * pair


def antisymmetric_family() -> FamilyRecord:
    # whole: reduction I/3; each pair reduction has every decomposition member
    # with an I/2 single-site spectrum; with three parties the block is a pair
    pair = lambda n, k, q: (1.0 - 2.0 * 0.5**q) ** (2.0 / q)
    return FamilyRecord(
        name="antisymmetric_333",
        closed_form_terms={
            "whole": lambda n, k, q: (1.0 - (1.0 / 3.0) ** (q - 1.0)) ** (2.0 / q),
            "pairwise": pair,
            "block": pair,
        },
        c2_terms={"whole": lambda n, k: 4.0 / 3.0, "pairwise": lambda n, k: 1.0, "block": lambda n, k: 1.0},
    )


Q0_BRACKET = (1.001, 2.0)


def q0_bracket(tolerance: float = 1e-12) -> tuple[float, float]:
    """Bisection bracket ``(lo, hi)`` of width ``<= tolerance`` around the root of ``l_q``."""
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    lo, hi = Q0_BRACKET
    f_lo, f_hi = l_q_bound(lo), l_q_bound(hi)
    if not (f_lo > 0 > f_hi):
        raise ArithmeticError(f"l_q has no sign change on [{lo}, {hi}] ({f_lo:.3e}, {f_hi:.3e})")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if l_q_bound(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def q0_root(tolerance: float = 1e-12) -> float:
    """Threshold ``q0`` below which ``l_q > 0`` (midpoint of the final bracket)."""
    lo, hi = q0_bracket(tolerance)
    return 0.5 * (lo + hi)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not -1e-12 <= theta <= math.pi / 2 + 1e-12:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    return theta


def family_422(theta: float) -> PureState:
    """``(a|000> + b|110> + a|201> + b|311>) / sqrt(2)`` with ``a = sin(theta)``, ``b = cos(theta)``."""
    theta = _check_theta(theta)
    a, b = math.sin(theta), math.cos(theta)
    amps = np.zeros(16, dtype=complex)
    for levels, coef in (((0, 0, 0), a), ((1, 1, 0), b), ((2, 0, 1), a), ((3, 1, 1), b)):
        amps[np.ravel_multi_index(levels, (4, 2, 2))] = coef / math.sqrt(2.0)
    return PureState(amps, (4, 2, 2))


def family_422_terms(theta: float, q: float) -> dict[str, float]:
    """Closed-form squared G_q terms of the ``4 x 2 x 2`` family for ``q`` in [1, 2]."""
    theta = _check_theta(theta)
    q = check_q(q, allow_one=True)
    a2, b2 = math.sin(theta) ** 2, math.cos(theta) ** 2
    whole = max(0.0, 1.0 - (a2**q + b2**q) / 2.0 ** (q - 1.0)) ** (2.0 / q)
    ab = max(0.0, 1.0 - a2**q - b2**q) ** (2.0 / q)
    ac = max(0.0, 1.0 - 0.5 ** (q - 1.0)) ** (2.0 / q)
    return {"whole": whole, "AB": ab, "AC": ac}


def family_422_c2(theta: float) -> dict[str, float]:
    """Squared concurrences ``2 - a^4 - b^4``, ``4 a^2 b^2`` and 1."""
    theta = _check_theta(theta)
    a2, b2 = math.sin(theta) ** 2, math.cos(theta) ** 2
    return {"whole": 2.0 - a2 * a2 - b2 * b2, "AB": 4.0 * a2 * b2, "AC": 1.0}


def m_and_mq_422(theta: float, q: float) -> tuple[float, float]:
    """SC residual ``M = -2 a^2 b^2`` and SGqC residual ``M_q`` of the 4x2x2 family.

    ``q`` may range over [1, 1.5]; at ``q = 1`` every term vanishes.
    """
    q = float(q)
    if not 1.0 <= q <= 1.5:
        raise ValueError(f"q must lie in [1, 1.5], got {q}")
    theta = _check_theta(theta)
    a2, b2 = math.sin(theta) ** 2, math.cos(theta) ** 2
    t = family_422_terms(theta, q)
    return -2.0 * a2 * b2, t["whole"] - t["AB"] - t["AC"]


def family_422_record(theta: float) -> FamilyRecord:
    theta = _check_theta(theta)
    return FamilyRecord(
        name="family_422",
        params={"theta": theta},
        closed_form_terms={
            "whole": lambda n, k, q: family_422_terms(theta, q)["whole"],
            "pairwise:AB": lambda n, k, q: family_422_terms(theta, q)["AB"],
            "pairwise:AC": lambda n, k, q: family_422_terms(theta, q)["AC"],
        },
        c2_terms={
            "whole": lambda n, k: family_422_c2(theta)["whole"],
            "pairwise:AB": lambda n, k: family_422_c2(theta)["AB"],
            "pairwise:AC": lambda n, k: family_422_c2(theta)["AC"],
        },
    )
