from .closed_form import acq_ei, acq_pi, acq_ucb, gp_ucb_kappa, incumbent
from .monte_carlo import (
    FantasyObservation,
    RepresenterSet,
    acq_es,
    acq_mrs,
    acq_mrs_point,
    estimate_pstar,
    expected_regret,
    expected_regret_all,
    fantasize,
    make_mc_evaluator,
    sample_representers,
)

__all__ = [
    "acq_ei",
    "acq_pi",
    "acq_ucb",
    "gp_ucb_kappa",
    "incumbent",
    "FantasyObservation",
    "RepresenterSet",
    "acq_es",
    "acq_mrs",
    "acq_mrs_point",
    "estimate_pstar",
    "expected_regret",
    "expected_regret_all",
    "fantasize",
    "make_mc_evaluator",
    "sample_representers",
]
