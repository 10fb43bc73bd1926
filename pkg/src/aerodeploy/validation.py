"""Input checking helpers shared by the estimators and functions."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ConfigInvalid, MalformedInput


def check_array(X, *, ndim=None, shape=None, dtype=np.float64, finite=True, name="array"):
    """Convert ``X`` to an ndarray and check rank, shape and finiteness.

    ``shape`` entries set to ``None`` match any length.
    """
    try:
        arr = np.asarray(X, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"{name}: cannot convert to {np.dtype(dtype).name}") from exc
    if ndim is not None and arr.ndim != ndim:
        raise MalformedInput(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if shape is not None:
        if arr.ndim != len(shape) or any(
            s is not None and s != a for s, a in zip(shape, arr.shape)
        ):
            raise MalformedInput(f"{name}: expected shape {shape}, got {arr.shape}")
    if finite and arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
        raise MalformedInput(f"{name}: contains non-finite values")
    return arr


def check_points(X, name="points") -> np.ndarray:
    """An ``(n, 3)`` finite float array; a single 3-vector is promoted."""
    arr = check_array(X, name=name)
    if arr.ndim == 1 and arr.shape[0] == 3:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise MalformedInput(f"{name}: expected (n, 3) array, got shape {arr.shape}")
    return arr


def check_vec3(v, name="vector") -> np.ndarray:
    return check_array(v, shape=(3,), name=name)


def check_unit_interval(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise ConfigInvalid(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ConfigInvalid(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ConfigInvalid(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_same_shape(*arrays, names=None):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) > 1:
        label = ", ".join(names) if names else "rasters"
        raise MalformedInput(f"{label} are not co-registered: shapes {sorted(shapes)}")
