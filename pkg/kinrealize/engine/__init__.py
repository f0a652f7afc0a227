from .code import (APIState, KinRealizeError, ContractViolation, NotKineticError, DivergenceError, InfeasibleError,
                   NumericFailure, RankDeficiencyError, ConfigError, StageError)
from .kinetic import (ComplexMatrix, KineticSystem, KirchhoffMatrix, Trajectory, Realization, benchmark_model,
                      simulate, r_max, info_ratio)
from .realization import UncertaintyRegion, RealizationProblem, dense_realization
from .enumeration import RealizationSet, enumerate_all, brute_force_enumerate
from .estimation import RegressionData, EstimationResult, build_regression, lse_fit, sbl_fit, confidence_region
from .pipeline import ExperimentConfig, run_pipeline, run_sweep, generate_data
