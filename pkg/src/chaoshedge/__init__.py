"""Chaotic hedging: hedge path-dependent payoffs with truncated chaos expansions.

Payoffs are regressed on closed-form iterated integrals of random-feature
neurons (Hermite evaluation of the Kailath-Segall identity); the fitted
readout weights yield an explicit hedging strategy on the simulation grid.
"""

from .errors import ChaosHedgeError, ConfigError, NumericalError, SimulationError
from .models import (
    AffineMultiD,
    BrownianMotion,
    Cev,
    PathBatch,
    Polynomial1D,
    TimeGrid,
    load_path_batch,
    sample_affine_model,
    save_path_batch,
    simulate_paths,
    zero_drift,
)
from .features import Distribution, FeatureBank, FeatureInit, RandomNeuron, sample_feature_bank
from .chaos import ChaosDesign, HedgePaths
from .regression import FitResult, fit_readout, imse, mse
from .payoffs import AsianPut, BasketPut, EuropeanCall, evaluate_payoff
from .oracle import (
    QuadratureSpec,
    asian_put_value_delta,
    basket_put_value_delta,
    bm_call_delta,
)
from .harness import (
    ExperimentConfig,
    FitReport,
    OrderReport,
    Seeds,
    config_dumps,
    config_loads,
    emit_results,
    reference_hedge,
    report_dumps,
    reproduce_config,
    run_and_emit,
    run_experiment,
)
from .estimator import ChaosFeatures, ChaosHedgeRegressor

__version__ = "0.1.0"

__all__ = [
    "AffineMultiD",
    "AsianPut",
    "BasketPut",
    "BrownianMotion",
    "Cev",
    "ChaosDesign",
    "ChaosFeatures",
    "ChaosHedgeError",
    "ChaosHedgeRegressor",
    "ConfigError",
    "Distribution",
    "EuropeanCall",
    "ExperimentConfig",
    "FeatureBank",
    "FeatureInit",
    "FitReport",
    "FitResult",
    "HedgePaths",
    "NumericalError",
    "OrderReport",
    "PathBatch",
    "Polynomial1D",
    "QuadratureSpec",
    "RandomNeuron",
    "Seeds",
    "SimulationError",
    "TimeGrid",
    "asian_put_value_delta",
    "basket_put_value_delta",
    "bm_call_delta",
    "config_dumps",
    "config_loads",
    "emit_results",
    "evaluate_payoff",
    "fit_readout",
    "imse",
    "load_path_batch",
    "mse",
    "reference_hedge",
    "report_dumps",
    "reproduce_config",
    "run_and_emit",
    "run_experiment",
    "sample_affine_model",
    "sample_feature_bank",
    "save_path_batch",
    "simulate_paths",
    "zero_drift",
    "__version__",
]
