"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

Q_MIN = 1.0
Q_MAX = 2.0


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    """Return ``dims`` as a tuple of ints, each at least 2."""
    raw = tuple(dims)
    if not raw:
        raise ValueError("dims must contain at least one subsystem")
    out = tuple(int(d) for d in raw)
    if any(d < 2 or d != r for d, r in zip(out, raw)):
        raise ValueError(f"subsystem dimensions must be integers >= 2, got {raw}")
    return out


def check_q(q: float, *, allow_one: bool = False) -> float:
    """Validate the G_q order. ``allow_one`` admits the closed interval [1, 2]."""
    q = float(q)
    if not np.isfinite(q):
        raise ValueError(f"q must be finite, got {q}")
    lower_ok = q >= Q_MIN if allow_one else q > Q_MIN
    if not (lower_ok and q <= Q_MAX):
        interval = "[1, 2]" if allow_one else "(1, 2]"
        raise ValueError(f"q must lie in {interval}, got {q}")
    return q


def check_unit_interval(t, name: str = "t", slack: float = 1e-12) -> np.ndarray:
    """Clip values within ``slack`` of [0, 1]; reject anything further out."""
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if np.any(arr < -slack) or np.any(arr > 1.0 + slack):
        raise ValueError(f"{name} must lie in [0, 1], got {t}")
    return np.clip(arr, 0.0, 1.0)


def check_subsystems(indices: Iterable[int], n: int, *, allow_full: bool = True) -> tuple[int, ...]:
    """Validate a set of subsystem indices against ``n`` subsystems."""
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise ValueError("subsystem index set must be nonempty")
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate subsystem indices in {idx}")
    for i in idx:
        if not 0 <= i < n:
            raise ValueError(f"subsystem index {i} out of range for {n} subsystems")
    if not allow_full and len(idx) == n:
        raise ValueError("a bipartition needs a nonempty complement")
    return idx


def check_state_batch(X, dims: Sequence[int]) -> np.ndarray:
    """Validate a 2D batch of state vectors (one per row) for ``dims``.

    Complex input is accepted, unlike ``sklearn.utils.check_array``.
    """
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D array of state vectors, got shape {arr.shape}")
    total = int(np.prod(dims))
    if arr.shape[1] != total:
        raise ValueError(f"state vectors must have length {total} for dims {tuple(dims)}, got {arr.shape[1]}")
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("state vectors contain NaN or inf")
    return arr


def check_density_batch(X, dims: Sequence[int]) -> np.ndarray:
    """Validate a 3D batch of density matrices for ``dims``.

    Flattened rows of length ``D*D`` are reshaped.
    """
    total = int(np.prod(dims))
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape == (total, total):
        arr = arr[None]
    elif arr.ndim == 2 and arr.shape[1] == total * total:
        arr = arr.reshape(-1, total, total)
    if arr.ndim != 3 or arr.shape[1:] != (total, total):
        raise ValueError(f"expected density matrices of shape ({total}, {total}), got {np.shape(X)}")
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("density matrices contain NaN or inf")
    return arr
