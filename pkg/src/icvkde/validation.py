"""Input validation helpers, in the spirit of sklearn's ``check_array``."""

from __future__ import annotations

import numpy as np

from .errors import InsufficientDataError

__all__ = ["check_univariate_sample", "check_positive", "check_bandwidth"]


def check_univariate_sample(X, *, min_size: int = 2) -> np.ndarray:
    """Coerce ``X`` to a 1-d float64 array of finite observations.

    Accepts shapes ``(n,)`` and ``(n, 1)`` so that estimators compose with
    sklearn pipelines, which pass 2-d feature matrices.
    """
    x = np.asarray(X, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise ValueError(f"expected univariate data, got array of shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains NaN or infinite values")
    if x.size < min_size:
        raise InsufficientDataError(
            f"need at least {min_size} observations, got {x.size}"
        )
    return x


def check_positive(value, name: str) -> float:
    v = float(value)
    if not np.isfinite(v) or v <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return v


def check_bandwidth(h) -> float:
    return check_positive(h, "bandwidth")
