"""Dense numeric substrate: seeded RNG, stable elementwise ops, and a
finite-difference gradient oracle.

Arrays are plain C-contiguous float64 ``numpy.ndarray`` throughout; numpy
supplies the storage and BLAS-backed products, this module supplies the
validated operation surface the rest of the package builds on.

Set :data:`DEBUG_CHECK_FINITE` to True to assert finiteness at operation
boundaries (useful while debugging gradient code, off by default).
"""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .errors import DimensionError, NumericError

DEBUG_CHECK_FINITE = False


def make_rng(seed: int) -> np.random.Generator:
    """Seeded 64-bit generator; identical seed yields an identical stream."""
    return np.random.default_rng(seed)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a 2-d float64 array."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got shape {out.shape}")
    _maybe_check_finite(out, name)
    return out


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Validate and return ``x`` as a 1-d float64 array."""
    out = np.asarray(x, dtype=np.float64)
    if out.ndim != 1:
        raise DimensionError(f"{name} must be 1-d, got shape {out.shape}")
    _maybe_check_finite(out, name)
    return out


def _maybe_check_finite(a: np.ndarray, name: str) -> None:
    if DEBUG_CHECK_FINITE and not np.all(np.isfinite(a)):
        raise NumericError(f"non-finite entries in {name}")


def matvec(a, x) -> np.ndarray:
    """Matrix-vector product with explicit shape checking."""
    a = as_matrix(a, "matvec operand A")
    x = as_vector(x, "matvec operand x")
    if a.shape[1] != x.shape[0]:
        raise DimensionError(
            f"matvec shape mismatch: A is {a.shape}, x has length {x.shape[0]}"
        )
    return a @ x


def softmax(x) -> np.ndarray:
    """Numerically stable softmax of a 1-d array (max-subtracted)."""
    x = as_vector(x, "softmax input")
    if x.shape[0] == 0:
        raise DimensionError("softmax of an empty vector is undefined")
    shifted = x - x.max()
    e = np.exp(shifted)
    return e / e.sum()


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax of a 2-d array."""
    x = as_matrix(x, "softmax input")
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def relu(x) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(0.0, np.asarray(x, dtype=np.float64))


def glorot_init(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform init on [-b, b] with b = sqrt(6 / (rows + cols))."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"glorot_init needs positive dims, got {rows}x{cols}")
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def finite_diff_grad(
    loss_fn: Callable,
    params,
    eps: float = 1e-5,
) -> dict[str, np.ndarray]:
    """Central-difference gradient of ``loss_fn(params)`` per parameter entry.

    Parameters
    ----------
    loss_fn:
        Callable returning the scalar loss for the given parameter object.
        Must be deterministic given the parameter values.
    params:
        Any object exposing ``arrays() -> dict[str, ndarray]`` whose values
        alias the live parameter storage. Entries are perturbed in place and
        restored bit-exactly before returning.
    eps:
        Perturbation half-width for (f(x+eps) - f(x-eps)) / (2 eps).

    Returns
    -------
    dict mapping each parameter name to an ndarray of the same shape
    holding the numeric gradient.
    """
    if eps <= 0:
        raise NumericError(f"finite_diff_grad needs eps > 0, got {eps}")
    arrays: Mapping[str, np.ndarray] = params.arrays()
    grads: dict[str, np.ndarray] = {}
    for name, arr in arrays.items():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for idx in range(flat.shape[0]):
            orig = flat[idx]
            flat[idx] = orig + eps
            up = float(loss_fn(params))
            flat[idx] = orig - eps
            down = float(loss_fn(params))
            flat[idx] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise NumericError(f"non-finite loss while probing {name}[{idx}]")
            gflat[idx] = (up - down) / (2.0 * eps)
        grads[name] = g
    return grads


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """Max elementwise |a - n| / max(|a|, |n|, floor) over two arrays."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - n) / denom))
