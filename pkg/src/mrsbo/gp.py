"""Gaussian process regression: posterior inference, joint sampling, MLE.

The posterior is the standard zero-mean GP conditional

    mu(Q)    = K(Q, X) (K(X, X) + noise I)^-1 y
    Sigma(Q) = K(Q, Q) - K(Q, X) (K(X, X) + noise I)^-1 K(X, Q)

computed through a cached Cholesky factor of the (possibly jittered) train
covariance. A :class:`GaussianProcess` is immutable after construction, so
prediction and sampling are safe to run concurrently; conditioning on an
extra observation produces a new value via a low-rank factor update.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import minimize

from .kernels import Kernel, KernelFamily, kernel_diag, kernel_eval

# jitter ladder relative to the mean diagonal, applied when a covariance
# factorization fails outright
_JITTER_LADDER = (1e-10, 1e-9, 1e-8, 1e-7, 1e-6)

# negative predictive variances above -_VAR_CLAMP_REL * max(1, signal_variance)
# are rounding noise and clamped to zero; anything below is a hard error
_VAR_CLAMP_REL = 1e-8


class FactorizationError(RuntimeError):
    """Covariance matrix stayed non-positive-definite through the jitter ladder."""


@dataclass(frozen=True)
class Dataset:
    """Observed inputs (n, d) and targets (n,)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.atleast_1d(np.asarray(self.targets, dtype=float))
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"{X.shape[0]} inputs but {y.shape[0]} targets"
            )
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def append(self, x: np.ndarray, y: float) -> "Dataset":
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return Dataset(
            np.vstack([self.inputs, x]), np.append(self.targets, float(y))
        )


def empty_dataset(dim: int) -> Dataset:
    return Dataset(np.empty((0, dim)), np.empty(0))


@dataclass(frozen=True)
class FunctionSampleBlock:
    """Joint posterior draws at a fixed point set.

    ``values[i, j]`` is draw i of the latent function at ``points[j]``.
    ``base_draws`` holds the standard-normal matrix that generated the
    values; feeding it back into :func:`gp_sample_joint` against another
    (e.g. fantasy-updated) posterior yields common-random-number samples.
    """

    points: np.ndarray
    values: np.ndarray
    base_draws: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.base_draws.shape:
            raise ValueError("values and base_draws must have identical shape")
        if self.values.shape[1] != self.points.shape[0]:
            raise ValueError("one column per sampled point required")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GaussianProcess:
    """Posterior over functions conditioned on a dataset.

    ``chol`` is the lower Cholesky factor of K(X, X) + noise I (+ jitter I if
    the ladder was needed) and ``weights`` the precomputed solve against the
    targets; both are None for the empty-data prior.
    """

    kernel: Kernel
    noise_variance: float
    data: Dataset
    chol: np.ndarray | None
    weights: np.ndarray | None
    jitter: float = 0.0

    @property
    def n_data(self) -> int:
        return len(self.data)

    @property
    def input_dim(self) -> int:
        return self.data.inputs.shape[1]


def _chol_with_jitter(M: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, escalating diagonal jitter on failure."""
    try:
        return cholesky(M, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(M)))
    if scale <= 0:
        scale = 1.0
    eye = np.eye(M.shape[0])
    for level in _JITTER_LADDER:
        jitter = level * scale
        try:
            return cholesky(M + jitter * eye, lower=True), jitter
        except np.linalg.LinAlgError:
            continue
    raise FactorizationError(
        f"covariance not positive definite after jitter up to {_JITTER_LADDER[-1]:g}"
        " times the mean diagonal"
    )


def gp_fit(data: Dataset, kernel: Kernel, noise_variance: float) -> GaussianProcess:
    """Condition a zero-mean GP prior on ``data``.

    With an empty dataset the prior itself is returned. Non-positive-definite
    train covariances are retried through the jitter ladder.
    """
    if noise_variance < 0:
        raise ValueError("noise_variance must be nonnegative")
    if len(data) == 0:
        return GaussianProcess(kernel, float(noise_variance), data, None, None)
    K = kernel_eval(kernel, data.inputs, data.inputs)
    K[np.diag_indices_from(K)] += noise_variance
    L, jitter = _chol_with_jitter(K)
    w = solve_triangular(
        L, solve_triangular(L, data.targets, lower=True), lower=True, trans="T"
    )
    return GaussianProcess(kernel, float(noise_variance), data, L, w, jitter)


def gp_prior(kernel: Kernel, noise_variance: float, dim: int) -> GaussianProcess:
    return gp_fit(empty_dataset(dim), kernel, noise_variance)


def gp_predict(
    gp: GaussianProcess, queries: np.ndarray, full_cov: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Latent predictive distribution at ``queries``.

    Returns ``(means, variances)`` or ``(means, covariance)`` with
    ``full_cov=True``. Observation noise is not added; callers that need the
    predictive distribution of y add ``noise_variance`` themselves.
    """
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if gp.n_data == 0:
        mean = np.zeros(Q.shape[0])
        if full_cov:
            return mean, kernel_eval(gp.kernel, Q, Q)
        return mean, kernel_diag(gp.kernel, Q)
    Ks = kernel_eval(gp.kernel, gp.data.inputs, Q)
    mean = Ks.T @ gp.weights
    V = solve_triangular(gp.chol, Ks, lower=True)
    if full_cov:
        cov = kernel_eval(gp.kernel, Q, Q) - V.T @ V
        _clamp_diag(cov, gp.kernel.signal_variance)
        return mean, cov
    var = kernel_diag(gp.kernel, Q) - np.einsum("ij,ij->j", V, V)
    _clamp_vector(var, gp.kernel.signal_variance)
    return mean, var


def _clamp_tol(signal_variance: float) -> float:
    return _VAR_CLAMP_REL * max(1.0, signal_variance)


def _clamp_vector(var: np.ndarray, signal_variance: float) -> None:
    tol = _clamp_tol(signal_variance)
    low = var.min() if var.size else 0.0
    if low < -tol:
        raise FactorizationError(
            f"predictive variance {low:.3e} below the clamping tolerance -{tol:.1e}"
        )
    np.maximum(var, 0.0, out=var)


def _clamp_diag(cov: np.ndarray, signal_variance: float) -> None:
    d = np.diag_indices_from(cov)
    var = cov[d].copy()
    _clamp_vector(var, signal_variance)
    cov[d] = var


def gp_sample_joint(
    gp: GaussianProcess,
    queries: np.ndarray,
    n_samples: int,
    rng: np.random.Generator | None = None,
    base_draws: np.ndarray | None = None,
) -> FunctionSampleBlock:
    """Joint draws from the latent posterior at ``queries``.

    When ``base_draws`` (a standard-normal matrix of shape
    ``(n_samples, len(queries))``) is supplied the map is deterministic,
    ``values = mean + base_draws @ chol(cov).T``, which enables common random
    numbers across posteriors. The draws used are retained in the block.
    """
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if base_draws is None:
        if rng is None:
            raise ValueError("either rng or base_draws is required")
        Z = rng.standard_normal((n_samples, Q.shape[0]))
    else:
        Z = np.asarray(base_draws, dtype=float)
        if Z.shape != (n_samples, Q.shape[0]):
            raise ValueError(
                f"base_draws shape {Z.shape} != {(n_samples, Q.shape[0])}"
            )
    mean, cov = gp_predict(gp, Q, full_cov=True)
    L, _ = _chol_with_jitter(cov)
    values = mean[None, :] + Z @ L.T
    return FunctionSampleBlock(points=Q, values=values, base_draws=Z)


def log_marginal_likelihood(gp: GaussianProcess) -> float:
    """``-1/2 y^T (K + noise I)^-1 y - 1/2 log det(K + noise I) - n/2 log 2 pi``."""
    n = gp.n_data
    if n == 0:
        return 0.0
    quad = float(gp.data.targets @ gp.weights)
    logdet = 2.0 * float(np.sum(np.log(np.diag(gp.chol))))
    return -0.5 * quad - 0.5 * logdet - 0.5 * n * np.log(2.0 * np.pi)


def gp_condition_on(gp: GaussianProcess, x: np.ndarray, y: float) -> GaussianProcess:
    """Posterior updated with one extra observation ``(x, y)``.

    Equivalent to refitting on the augmented dataset but performed as a
    rank-1 extension of the cached Cholesky factor. A degenerate extension
    (new point coincides with an existing noise-free one) falls back to a
    full refit through the jitter ladder.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    new_data = gp.data.append(x, y)
    if gp.n_data == 0:
        return gp_fit(new_data, gp.kernel, gp.noise_variance)
    k_cross = kernel_eval(gp.kernel, gp.data.inputs, x)[:, 0]
    k_self = gp.kernel.signal_variance + gp.noise_variance + gp.jitter
    b = solve_triangular(gp.chol, k_cross, lower=True)
    d_sq = k_self - float(b @ b)
    if d_sq <= 1e-12 * k_self:
        return gp_fit(new_data, gp.kernel, gp.noise_variance)
    n = gp.n_data
    L = np.zeros((n + 1, n + 1))
    L[:n, :n] = gp.chol
    L[n, :n] = b
    L[n, n] = np.sqrt(d_sq)
    w = solve_triangular(
        L,
        solve_triangular(L, new_data.targets, lower=True),
        lower=True,
        trans="T",
    )
    return GaussianProcess(
        gp.kernel, gp.noise_variance, new_data, L, w, gp.jitter
    )


@dataclass(frozen=True)
class HyperBounds:
    """Positive box constraints for marginal-likelihood point estimation."""

    length_scale: tuple[float, float] = (1e-2, 1e2)
    signal_variance: tuple[float, float] = (1e-2, 1e2)

    def __post_init__(self) -> None:
        for lo, hi in (self.length_scale, self.signal_variance):
            if not (0 < lo < hi):
                raise ValueError("bounds must satisfy 0 < lower < upper")


def fit_mle(
    data: Dataset,
    family: KernelFamily,
    bounds: HyperBounds = HyperBounds(),
    n_restarts: int = 3,
    rng: np.random.Generator | None = None,
    *,
    noise_variance: float = 1e-6,
    anisotropic: bool = False,
    warm_start: Kernel | None = None,
    alpha: float = 1.0,
) -> Kernel:
    """Select length scales and signal variance by maximum marginal likelihood.

    Runs a quasi-Newton (L-BFGS-B) search in log-hyperparameter space from
    ``n_restarts + 1`` start points: a warm start when given, the rest drawn
    uniformly in the log-space box. The returned kernel never has lower
    likelihood than any start point. If every local search fails numerically
    the best feasible start is returned with a warning.
    """
    if len(data) == 0:
        raise ValueError("MLE requires a nonempty dataset")
    if rng is None:
        rng = np.random.default_rng(0)
    n_ls = data.inputs.shape[1] if anisotropic else 1
    lo = np.log(np.r_[np.full(n_ls, bounds.length_scale[0]), bounds.signal_variance[0]])
    hi = np.log(np.r_[np.full(n_ls, bounds.length_scale[1]), bounds.signal_variance[1]])

    def make_kernel(log_p: np.ndarray) -> Kernel:
        p = np.exp(log_p)
        return Kernel(family, p[:n_ls], float(p[n_ls]), alpha)

    def neg_lml(log_p: np.ndarray) -> float:
        try:
            value = log_marginal_likelihood(
                gp_fit(data, make_kernel(log_p), noise_variance)
            )
        except FactorizationError:
            return np.inf
        return -value if np.isfinite(value) else np.inf

    starts = []
    if warm_start is not None:
        ls = warm_start.length_scales
        if ls.size != n_ls:
            ls = np.full(n_ls, float(np.exp(np.mean(np.log(ls)))))
        p0 = np.log(np.r_[ls, warm_start.signal_variance])
        starts.append(np.clip(p0, lo, hi))
    while len(starts) < n_restarts + 1:
        starts.append(lo + rng.random(n_ls + 1) * (hi - lo))

    best_p, best_val = None, np.inf
    for p0 in starts:
        v0 = neg_lml(p0)
        if v0 < best_val:
            best_p, best_val = p0, v0
    any_success = False
    for p0 in starts:
        try:
            res = minimize(
                neg_lml,
                p0,
                method="L-BFGS-B",
                bounds=list(zip(lo, hi)),
                options={"maxiter": 60},
            )
        except (np.linalg.LinAlgError, FactorizationError):
            continue
        if np.isfinite(res.fun):
            any_success = True
            if res.fun < best_val:
                best_p, best_val = res.x, res.fun
    if not any_success:
        warnings.warn(
            "all MLE restarts failed numerically; returning best start point",
            RuntimeWarning,
        )
    if best_p is None or not np.isfinite(best_val):
        raise FactorizationError("no feasible hyperparameters found in bounds")
    return make_kernel(np.clip(best_p, lo, hi))
