"""Bayesian optimization with regret-based sampling acquisitions.

Core pieces: GP regression (:mod:`mrsbo.gp`, :mod:`mrsbo.kernels`),
closed-form and sampling-based acquisitions (:mod:`mrsbo.acquisitions`),
derivative-free acquisition maximizers (:mod:`mrsbo.optimize`), the
single-task driver (:mod:`mrsbo.loop`), contextual policy search
(:mod:`mrsbo.contextual`) and the benchmark harness (:mod:`mrsbo.bench`).
"""

from .acquisitions import (
    FantasyObservation,
    RepresenterSet,
    acq_ei,
    acq_es,
    acq_mrs,
    acq_mrs_point,
    acq_pi,
    acq_ucb,
    estimate_pstar,
    expected_regret,
    expected_regret_all,
    fantasize,
    gp_ucb_kappa,
    incumbent,
    make_mc_evaluator,
    sample_representers,
)
from .domain import Box, sobol_points, unit_box
from .gp import (
    Dataset,
    FunctionSampleBlock,
    GaussianProcess,
    HyperBounds,
    fit_mle,
    gp_condition_on,
    gp_fit,
    gp_predict,
    gp_prior,
    gp_sample_joint,
    log_marginal_likelihood,
)
from .kernels import Kernel, KernelFamily, kernel_eval, matern52, rational_quadratic, rbf
from .loop import LoopConfig, RunRecord, bo_step, recommend, run_bo
from .optimize import SearchBudget, maximize_closed_form, maximize_mc_acq

__all__ = [
    "Box",
    "Dataset",
    "FantasyObservation",
    "FunctionSampleBlock",
    "GaussianProcess",
    "HyperBounds",
    "Kernel",
    "KernelFamily",
    "LoopConfig",
    "RepresenterSet",
    "RunRecord",
    "SearchBudget",
    "acq_ei",
    "acq_es",
    "acq_mrs",
    "acq_mrs_point",
    "acq_pi",
    "acq_ucb",
    "bo_step",
    "estimate_pstar",
    "expected_regret",
    "expected_regret_all",
    "fantasize",
    "fit_mle",
    "gp_condition_on",
    "gp_fit",
    "gp_predict",
    "gp_prior",
    "gp_sample_joint",
    "gp_ucb_kappa",
    "incumbent",
    "kernel_eval",
    "log_marginal_likelihood",
    "make_mc_evaluator",
    "matern52",
    "maximize_closed_form",
    "maximize_mc_acq",
    "rational_quadratic",
    "rbf",
    "recommend",
    "run_bo",
    "sample_representers",
    "sobol_points",
    "unit_box",
]
