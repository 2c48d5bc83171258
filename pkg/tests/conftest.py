"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's inference code paths:
posteriors are computed with dense ``numpy.linalg`` solves straight from the
textbook formulas, and the nested Monte Carlo acquisition oracle draws fresh
joint samples per fantasy with no common random numbers and no sample reuse.
Only ``kernel_eval`` (verified against hand values) is shared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mrsbo.kernels import Kernel, kernel_eval


@dataclass
class DensePosterior:
    """Textbook GP posterior via dense solves (the independent oracle)."""

    kernel: Kernel
    noise_variance: float
    X: np.ndarray
    y: np.ndarray

    def moments(self, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        Q = np.atleast_2d(Q)
        if self.X.shape[0] == 0:
            return np.zeros(Q.shape[0]), kernel_eval(self.kernel, Q, Q)
        K = kernel_eval(self.kernel, self.X, self.X)
        K = K + self.noise_variance * np.eye(K.shape[0])
        Ks = kernel_eval(self.kernel, self.X, Q)
        Kss = kernel_eval(self.kernel, Q, Q)
        solve = np.linalg.solve(K, np.column_stack([self.y[:, None], Ks]))
        mean = Ks.T @ solve[:, 0]
        cov = Kss - Ks.T @ solve[:, 1:]
        return mean, cov

    def log_marginal_likelihood(self) -> float:
        n = self.X.shape[0]
        K = kernel_eval(self.kernel, self.X, self.X)
        K = K + self.noise_variance * np.eye(n)
        _, logdet = np.linalg.slogdet(K)
        quad = float(self.y @ np.linalg.solve(K, self.y))
        return -0.5 * quad - 0.5 * logdet - 0.5 * n * np.log(2 * np.pi)

    def condition(self, x: np.ndarray, y: float) -> "DensePosterior":
        return DensePosterior(
            self.kernel,
            self.noise_variance,
            np.vstack([self.X, np.atleast_2d(x)]),
            np.append(self.y, y),
        )


def draw_joint(
    post: DensePosterior, Q: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Fresh joint posterior draws via eigen-decomposition (no Cholesky path)."""
    mean, cov = post.moments(Q)
    vals, vecs = np.linalg.eigh(cov)
    root = vecs * np.sqrt(np.maximum(vals, 0.0))
    return mean[None, :] + rng.standard_normal((n, Q.shape[0])) @ root.T


def discrete_entropy(w: np.ndarray) -> float:
    nz = w[w > 0]
    return float(-np.sum(nz * np.log(nz)))


def pstar_weights(values: np.ndarray) -> np.ndarray:
    counts = np.bincount(np.argmax(values, axis=1), minlength=values.shape[1])
    return counts / values.shape[0]


def expected_regret_values(values: np.ndarray) -> np.ndarray:
    return values.max(axis=1).mean() - values.mean(axis=0)


def nested_mc_oracle(
    post: DensePosterior,
    reps_points: np.ndarray,
    x_q: np.ndarray,
    n_f: int,
    n_y: int,
    rng: np.random.Generator,
) -> dict[str, float]:
    """Brute-force one-step lookahead values of ES / MRS / MRS-point.

    Fresh randomness throughout: independent now-blocks for weights and
    regrets (no sample reuse), i.i.d. fantasy observations from the
    predictive distribution at the query (noise included), an independent
    block per fantasy, dense refit per fantasy.
    """
    x_q = np.atleast_2d(x_q)
    er_now = expected_regret_values(draw_joint(post, reps_points, n_f, rng))
    w_now = pstar_weights(draw_joint(post, reps_points, n_f, rng))
    m_q, cov_q = post.moments(x_q)
    pred_var = float(cov_q[0, 0]) + post.noise_variance
    fantasies = m_q[0] + np.sqrt(max(pred_var, 0.0)) * rng.standard_normal(n_y)
    es_terms = np.empty(n_y)
    mrs_terms = np.empty(n_y)
    point_terms = np.empty(n_y)
    for k, y in enumerate(fantasies):
        updated = post.condition(x_q, float(y))
        er_f = expected_regret_values(draw_joint(updated, reps_points, n_f, rng))
        w_f = pstar_weights(draw_joint(updated, reps_points, n_f, rng))
        es_terms[k] = discrete_entropy(w_f)
        mrs_terms[k] = float(w_f @ er_f)
        point_terms[k] = float(er_f.min())
    return {
        "es": discrete_entropy(w_now) - es_terms.mean(),
        "mrs": float(w_now @ er_now) - mrs_terms.mean(),
        "mrs-point": float(er_now.min()) - point_terms.mean(),
    }
