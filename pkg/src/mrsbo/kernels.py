"""Stationary covariance kernels for Gaussian process surrogates.

Three families are supported: squared-exponential (RBF), Matern with
smoothness fixed at 5/2, and the rational quadratic scale mixture. All are
stationary with ``k(x, x) = signal_variance``. Length scales are either
isotropic (a single value shared by every input dimension) or anisotropic
(one per dimension).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class KernelFamily(str, Enum):
    RBF = "rbf"
    MATERN52 = "matern52"
    RATIONAL_QUADRATIC = "rational_quadratic"


@dataclass(frozen=True)
class Kernel:
    """Covariance function with hyperparameters.

    Parameters
    ----------
    family : KernelFamily
        Functional form of the kernel.
    length_scales : array_like
        Either a single positive value (isotropic) or one positive value
        per input dimension (anisotropic).
    signal_variance : float
        Prior variance ``k(x, x)``; strictly positive.
    alpha : float
        Scale-mixture parameter of the rational quadratic family; ignored
        by the other families. Strictly positive.
    """

    family: KernelFamily
    length_scales: np.ndarray
    signal_variance: float = 1.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        if ls.ndim != 1 or ls.size < 1:
            raise ValueError("length_scales must be a scalar or 1-d vector")
        if not np.all(ls > 0):
            raise ValueError("length scales must be strictly positive")
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be strictly positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be strictly positive")
        object.__setattr__(self, "length_scales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def isotropic(self) -> bool:
        return self.length_scales.size == 1

    def with_params(self, **changes) -> "Kernel":
        return replace(self, **changes)


def rbf(length_scale=1.0, signal_variance: float = 1.0) -> Kernel:
    return Kernel(KernelFamily.RBF, np.atleast_1d(length_scale), signal_variance)


def matern52(length_scale=1.0, signal_variance: float = 1.0) -> Kernel:
    return Kernel(KernelFamily.MATERN52, np.atleast_1d(length_scale), signal_variance)


def rational_quadratic(
    length_scale=1.0, alpha: float = 1.0, signal_variance: float = 1.0
) -> Kernel:
    return Kernel(
        KernelFamily.RATIONAL_QUADRATIC,
        np.atleast_1d(length_scale),
        signal_variance,
        alpha,
    )


def _scaled_sqdist(kernel: Kernel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared distances after dividing each dimension by its length scale."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"point sets have mismatched dimensions ({A.shape[1]} vs {B.shape[1]})"
        )
    ls = kernel.length_scales
    if not kernel.isotropic and ls.size != A.shape[1]:
        raise ValueError(
            f"anisotropic kernel has {ls.size} length scales but points are "
            f"{A.shape[1]}-dimensional"
        )
    As = A / ls
    Bs = B / ls
    sq = (
        np.sum(As**2, axis=1)[:, None]
        + np.sum(Bs**2, axis=1)[None, :]
        - 2.0 * As @ Bs.T
    )
    # rounding can push tiny exact-zero distances negative
    np.maximum(sq, 0.0, out=sq)
    return sq


def kernel_eval(kernel: Kernel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Covariance matrix ``k(A, B)`` of shape ``(|A|, |B|)``.

    Symmetric positive semidefinite (up to rounding) when ``A is B``; every
    entry is bounded by ``signal_variance``.
    """
    sq = _scaled_sqdist(kernel, A, B)
    if kernel.family is KernelFamily.RBF:
        K = np.exp(-0.5 * sq)
    elif kernel.family is KernelFamily.MATERN52:
        r = np.sqrt(5.0 * sq)
        K = (1.0 + r + (5.0 / 3.0) * sq) * np.exp(-r)
    elif kernel.family is KernelFamily.RATIONAL_QUADRATIC:
        K = (1.0 + sq / (2.0 * kernel.alpha)) ** (-kernel.alpha)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown kernel family {kernel.family}")
    return kernel.signal_variance * K


def kernel_diag(kernel: Kernel, A: np.ndarray) -> np.ndarray:
    """Diagonal ``k(x, x)`` for each row of ``A`` (constant for stationary kernels)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return np.full(A.shape[0], kernel.signal_variance)
