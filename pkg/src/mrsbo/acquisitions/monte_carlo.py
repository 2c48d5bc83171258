"""Sampling-based acquisitions: entropy search and minimum regret search.

The shared machinery discretizes the posterior probability-of-maximum onto a
set of representer points, estimates expected simple regret from joint
posterior sample blocks at those points, and scores a candidate query by how
much a hypothetical ("fantasy") observation there would improve matters in
expectation:

* ES          : expected reduction of the discrete entropy of the
                probability-of-maximum weights,
* MRS-point   : expected reduction of the minimum expected simple regret,
* MRS         : expected reduction of the probability-of-maximum-weighted
                expected simple regret.

Two variance-reduction devices are on by default and can be disabled for
oracle comparisons: common random numbers (the same standard-normal base
draws generate the current and every fantasy sample block, so only posterior
moments differ) and stratified fantasy values (midpoint quantiles of the
predictive distribution at the query instead of i.i.d. draws).

The one-observation fantasy posterior at the representer points is obtained
by rank-1 Gaussian conditioning of the joint posterior at representers plus
query; this is the same distribution :func:`fantasize` followed by
resampling produces, but the fantasy covariance factor is shared across all
fantasy values, which makes candidate sweeps cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.stats import norm

from ..domain import Box
from ..gp import (
    FunctionSampleBlock,
    GaussianProcess,
    _chol_with_jitter,
    gp_condition_on,
    gp_predict,
    gp_sample_joint,
)

AcquisitionKind = Literal["es", "mrs", "mrs-point"]

# a query whose latent predictive variance is below this fraction of the
# signal variance carries no usable information; the acquisition is exactly 0
# there (dividing by the near-zero predictive variance would be pure noise)
_DEGENERATE_VAR_REL = 1e-9


@dataclass(frozen=True)
class RepresenterSet:
    """Discretization of the probability-of-maximum onto ``n_r`` points."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (P.shape[0],):
            raise ValueError("one weight per representer point required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.points.shape[0]

    def with_weights(self, weights: np.ndarray) -> "RepresenterSet":
        return RepresenterSet(self.points, weights)


@dataclass(frozen=True)
class FantasyObservation:
    """Hypothetical query/observation pair used inside one-step lookahead."""

    x_q: np.ndarray
    y: float


def fantasize(gp: GaussianProcess, obs: FantasyObservation) -> GaussianProcess:
    """Posterior updated with a hypothetical observation (low-rank update)."""
    return gp_condition_on(gp, obs.x_q, obs.y)


def sample_representers(
    gp: GaussianProcess,
    domain: Box,
    n_r: int,
    n_candidates_per_point: int = 250,
    rng: np.random.Generator | None = None,
) -> RepresenterSet:
    """Draw representer points by Thompson sampling from the posterior.

    Each representer is the argmax of one independent joint posterior draw
    over its own fresh batch of uniform candidate points. Weights are left
    uniform; :func:`estimate_pstar` assigns them from a sample block.
    """
    if n_r < 2:
        raise ValueError("need at least 2 representer points")
    if rng is None:
        raise ValueError("rng is required")
    points = np.empty((n_r, domain.dim))
    for i in range(n_r):
        candidates = domain.sample_uniform(n_candidates_per_point, rng)
        draw = gp_sample_joint(gp, candidates, 1, rng).values[0]
        points[i] = candidates[np.argmax(draw)]
    return RepresenterSet(points, np.full(n_r, 1.0 / n_r))


def estimate_pstar(block: FunctionSampleBlock) -> np.ndarray:
    """Probability-of-maximum weights: fraction of draws maximal at each point.

    Ties break toward the lowest index.
    """
    n_f, m = block.values.shape
    counts = np.bincount(np.argmax(block.values, axis=1), minlength=m)
    return counts / n_f


def expected_regret_all(block: FunctionSampleBlock) -> np.ndarray:
    """Expected simple regret of selecting each sampled point.

    The continuous max is approximated by the max over the sampled point set
    per draw, so ``er[i] - er[j] == mean(draw_j) - mean(draw_i)`` exactly and
    the argmin of expected regret is the argmax of the empirical mean.
    """
    return _er_from_values(block.values)


def expected_regret(block: FunctionSampleBlock, candidate_index: int) -> float:
    """Expected simple regret of selecting ``points[candidate_index]``."""
    return float(expected_regret_all(block)[candidate_index])


def _er_from_values(values: np.ndarray) -> np.ndarray:
    return values.max(axis=1).mean() - values.mean(axis=0)


def _entropy(w: np.ndarray) -> float:
    nz = w[w > 0]
    return float(-np.sum(nz * np.log(nz)))


def _entropy_rows(W: np.ndarray) -> np.ndarray:
    """Row-wise discrete entropy with the 0 log 0 = 0 convention."""
    safe = np.where(W > 0, W, 1.0)
    return -np.sum(W * np.log(safe), axis=1)


def _pstar_from_argmax(idx: np.ndarray, m: int) -> np.ndarray:
    """Row-wise argmax indices (n_y, n_f) -> weight matrix (n_y, m)."""
    n_y, n_f = idx.shape
    flat = idx + (np.arange(n_y) * m)[:, None]
    counts = np.bincount(flat.ravel(), minlength=n_y * m)
    return counts.reshape(n_y, m) / n_f


def _fantasy_values(
    m_q: float, sd: float, n_y: int, deviates: np.ndarray | None
) -> np.ndarray:
    """Fantasy observations at the query: stratified midpoint quantiles or,
    when precomputed standard-normal deviates are given, i.i.d. values."""
    if deviates is None:
        u = (np.arange(1, n_y + 1) - 0.5) / n_y
        return m_q + sd * norm.ppf(u)
    return m_q + sd * deviates


def make_mc_evaluator(
    gp: GaussianProcess,
    reps: RepresenterSet,
    kind: AcquisitionKind,
    *,
    n_f: int = 1000,
    n_y: int = 51,
    rng: np.random.Generator | None = None,
    base_draws: np.ndarray | None = None,
    stratified_fantasies: bool = True,
    common_random_numbers: bool = True,
    reuse_samples: bool = True,
) -> Callable[[np.ndarray], np.ndarray]:
    """Build a batched acquisition evaluator ``(m, d) -> (m,)``.

    All randomness is drawn once at construction time, so the returned
    callable is deterministic and comparisons across candidate points are
    consistent (required by the candidate-sweep maximizer). ``base_draws``
    may be supplied directly to share them across evaluators.
    """
    if kind not in ("es", "mrs", "mrs-point"):
        raise ValueError(f"unknown acquisition kind {kind!r}")
    r = len(reps)
    if base_draws is not None:
        Z = np.asarray(base_draws, dtype=float)
        if Z.shape != (n_f, r):
            raise ValueError(f"base_draws shape {Z.shape} != {(n_f, r)}")
    else:
        if rng is None:
            raise ValueError("either rng or base_draws is required")
        Z = rng.standard_normal((n_f, r))
    Z_weights = None
    if not reuse_samples:
        if rng is None:
            raise ValueError("reuse_samples=False requires rng")
        Z_weights = rng.standard_normal((n_f, r))
    fantasy_deviates = None
    if not stratified_fantasies:
        if rng is None:
            raise ValueError("stratified_fantasies=False requires rng")
        fantasy_deviates = rng.standard_normal(n_y)
    Z_fantasy = None
    if not common_random_numbers:
        if rng is None:
            raise ValueError("common_random_numbers=False requires rng")
        Z_fantasy = rng.standard_normal((n_y, n_f, r))

    need_weights = kind in ("es", "mrs")
    need_regret = kind in ("mrs", "mrs-point")
    sv = gp.kernel.signal_variance

    def evaluate(X_q: np.ndarray) -> np.ndarray:
        X_q = np.atleast_2d(np.asarray(X_q, dtype=float))
        m = X_q.shape[0]
        if r == 1:
            # a single representer has zero entropy and zero expected regret
            # relative to the one-point max, before and after any fantasy
            return np.zeros(m)
        joint = np.vstack([reps.points, X_q])
        mean_all, cov_all = gp_predict(gp, joint, full_cov=True)
        mu_P = mean_all[:r]
        Sigma_P = cov_all[:r, :r]
        L_now, _ = _chol_with_jitter(Sigma_P)
        base_now = Z @ L_now.T
        values_now = base_now + mu_P
        if Z_weights is None:
            w_now = _pstar_from_argmax(values_now.argmax(axis=1)[None, :], r)[0]
        else:
            w_now = _pstar_from_argmax(
                ((Z_weights @ L_now.T) + mu_P).argmax(axis=1)[None, :], r
            )[0]
        er_now = _er_from_values(values_now)
        if kind == "es":
            now_term = _entropy(w_now)
        elif kind == "mrs":
            now_term = float(w_now @ er_now)
        else:
            now_term = float(er_now.min())

        out = np.empty(m)
        for q in range(m):
            var_q = max(float(cov_all[r + q, r + q]), 0.0)
            if var_q <= _DEGENERATE_VAR_REL * sv:
                out[q] = 0.0
                continue
            c = cov_all[:r, r + q]
            m_q = float(mean_all[r + q])
            v = var_q + gp.noise_variance
            y = _fantasy_values(m_q, np.sqrt(v), n_y, fantasy_deviates)
            Sigma_f = Sigma_P - np.outer(c, c) / v
            L_f, _ = _chol_with_jitter(Sigma_f)
            mu_f = mu_P[None, :] + ((y - m_q) / v)[:, None] * c[None, :]
            if Z_fantasy is None:
                base_f = Z @ L_f.T
                vals = base_f[None, :, :] + mu_f[:, None, :]
                colmeans = base_f.mean(axis=0)[None, :] + mu_f
            else:
                vals = Z_fantasy @ L_f.T + mu_f[:, None, :]
                colmeans = vals.mean(axis=1)
            idx = None
            if need_weights:
                if Z_weights is None:
                    idx = vals.argmax(axis=2)
                    w_f = _pstar_from_argmax(idx, r)
                else:
                    vw = (Z_weights @ L_f.T)[None, :, :] + mu_f[:, None, :]
                    w_f = _pstar_from_argmax(vw.argmax(axis=2), r)
                    idx = vals.argmax(axis=2) if need_regret else None
            if need_regret:
                if idx is not None:
                    rowmax = np.take_along_axis(vals, idx[:, :, None], axis=2)[:, :, 0]
                else:
                    rowmax = vals.max(axis=2)
                er_f = rowmax.mean(axis=1)[:, None] - colmeans
            if kind == "es":
                fantasy_term = float(np.mean(_entropy_rows(w_f)))
            elif kind == "mrs":
                fantasy_term = float(np.mean(np.sum(w_f * er_f, axis=1)))
            else:
                fantasy_term = float(er_f.min(axis=1).mean())
            out[q] = now_term - fantasy_term
        return out

    return evaluate


def _scalar_acq(kind: AcquisitionKind):
    def acq(
        gp: GaussianProcess,
        x_q: np.ndarray,
        reps: RepresenterSet,
        n_f: int = 1000,
        n_y: int = 51,
        rng: np.random.Generator | None = None,
        **flags,
    ) -> float:
        evaluate = make_mc_evaluator(
            gp, reps, kind, n_f=n_f, n_y=n_y, rng=rng, **flags
        )
        return float(evaluate(np.atleast_2d(x_q))[0])

    return acq


acq_es = _scalar_acq("es")
acq_es.__name__ = "acq_es"
acq_es.__doc__ = """Entropy-search score of querying ``x_q``.

Monte Carlo estimate of the expected reduction, over fantasy observations
drawn from the predictive distribution at the query (observation noise
included), of the discrete entropy of the probability-of-maximum weights on
the representer points. Keyword flags are forwarded to
:func:`make_mc_evaluator`."""

acq_mrs = _scalar_acq("mrs")
acq_mrs.__name__ = "acq_mrs"
acq_mrs.__doc__ = """Minimum-regret-search score of querying ``x_q``.

Expected reduction of the probability-of-maximum-weighted expected simple
regret over the representer points; weights and regrets come from the same
sample blocks. Keyword flags are forwarded to :func:`make_mc_evaluator`."""

acq_mrs_point = _scalar_acq("mrs-point")
acq_mrs_point.__name__ = "acq_mrs_point"
acq_mrs_point.__doc__ = """Point-proxy minimum-regret-search score of querying ``x_q``.

Expected reduction of the minimum expected simple regret over the
representer points. Keyword flags are forwarded to
:func:`make_mc_evaluator`."""
