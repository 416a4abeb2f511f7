import math

import numpy as np

from gqconc.qcore import DensityMatrix, PureState


def bell() -> PureState:
    return PureState(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2))


def w3() -> PureState:
    return PureState(np.array([0, 1, 1, 0, 1, 0, 0, 0]) / math.sqrt(3), (2, 2, 2))


def werner(p: float) -> DensityMatrix:
    b = bell().amplitudes
    return DensityMatrix(p * np.outer(b, b.conj()) + (1 - p) * np.eye(4) / 4, (2, 2))


def h_reference(t: float, q: float) -> float:
    """``h_q`` written straight from the eigenvalues ``(1 +- sqrt(1-t))/2``."""
    s = math.sqrt(1.0 - t)
    return (1.0 - ((1 + s) / 2) ** q - ((1 - s) / 2) ** q) ** (1.0 / q)
