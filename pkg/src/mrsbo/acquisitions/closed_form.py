"""Closed-form acquisition functions: PI, EI, UCB and the GP-UCB schedule.

All functions are vectorized: ``x`` may be a single point ``(d,)`` or a batch
``(m, d)``, returning a float or an ``(m,)`` vector accordingly. They are pure
functions of an immutable GP and safe to evaluate in parallel.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm

from ..gp import Dataset, GaussianProcess, gp_predict

# below this, the predictive sd is treated as exactly zero and the
# deterministic limit of the acquisition is returned
_SD_FLOOR = 1e-12


def incumbent(data: Dataset) -> float:
    """Best observed target so far (the reference point for PI/EI)."""
    if len(data) == 0:
        raise ValueError("incumbent of an empty dataset is undefined")
    return float(np.max(data.targets))


def _moments(gp: GaussianProcess, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    mu, var = gp_predict(gp, np.atleast_2d(x))
    return mu, np.sqrt(var), scalar


def _ret(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def acq_pi(gp: GaussianProcess, x: np.ndarray, tau: float) -> float | np.ndarray:
    """Probability of improvement over the incumbent, Phi((mu - tau) / sd).

    At sd = 0 the limit convention applies: 1 if mu > tau else 0.
    """
    mu, sd, scalar = _moments(gp, x)
    floor = np.maximum(sd, _SD_FLOOR)
    out = norm.cdf((mu - tau) / floor)
    degenerate = sd <= _SD_FLOOR
    out = np.where(degenerate, (mu > tau).astype(float), out)
    return _ret(out, scalar)


def acq_ei(gp: GaussianProcess, x: np.ndarray, tau: float) -> float | np.ndarray:
    """Expected improvement over the incumbent, sd * (g * Phi(g) + phi(g)).

    ``g = (mu - tau) / sd``. At sd = 0 the limit is max(mu - tau, 0).
    """
    mu, sd, scalar = _moments(gp, x)
    floor = np.maximum(sd, _SD_FLOOR)
    g = (mu - tau) / floor
    out = sd * (g * norm.cdf(g) + norm.pdf(g))
    degenerate = sd <= _SD_FLOOR
    out = np.where(degenerate, np.maximum(mu - tau, 0.0), out)
    return _ret(np.maximum(out, 0.0), scalar)


def acq_ucb(gp: GaussianProcess, x: np.ndarray, kappa: float) -> float | np.ndarray:
    """Upper confidence bound mu + kappa * sd (kappa = 0 is the greedy mean)."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    mu, sd, scalar = _moments(gp, x)
    return _ret(mu + kappa * sd, scalar)


def gp_ucb_kappa(n: int, domain_size_proxy: float, delta: float = 0.1) -> float:
    """Exploration weight schedule sqrt(2 log(proxy n^2 pi^2 / (6 delta))).

    Nondecreasing in the trial index ``n`` (1-based). ``domain_size_proxy``
    stands in for the candidate-set cardinality of the theoretical schedule.
    """
    if n < 1:
        raise ValueError("trial index must be >= 1")
    arg = domain_size_proxy * n**2 * math.pi**2 / (6.0 * delta)
    return math.sqrt(max(2.0 * math.log(arg), 0.0))
