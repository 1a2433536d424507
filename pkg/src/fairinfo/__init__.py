"""Information auditing, refinement, and fair selection for calibrated risk scores."""

from .population import (
    ALL,
    Cell,
    EmptyScopeError,
    Group,
    Population,
    PopulationError,
    Predictor,
    ScoreDistribution,
    base_rate,
    bayes_predictor,
    constant_predictor,
    dump_population,
    load_population,
    score_distribution,
)
from .information import (
    CalibrationError,
    CalibrationReport,
    InformationReport,
    calibrate,
    check_calibration,
    empirical_log_likelihood,
    entropic_information_content,
    entropic_information_loss,
    expected_log_likelihood,
    information_content,
    information_loss,
    information_report,
)
from .refinement import (
    MergeReport,
    RefinementCheck,
    SampleBudget,
    UndersampledError,
    draw_sample_counts,
    draw_sample_stream,
    eta_merge_counter,
    feature_informativeness,
    feature_predictor,
    is_refinement,
    merge_from_samples,
    merge_oracle,
    refinement_distance,
)
from .policy import (
    ImpactParams,
    PolicyStats,
    SelectionRule,
    ThresholdPolicy,
    dominance_check,
    evaluate,
    sweep_curves,
    threshold_for_rate,
)
from .lp import Constraint, LinearProgram, LpSolution
from .lp import solve as solve_lp
from .optimize import (
    OptimizationResult,
    OptimizationSpec,
    build_lp,
    cost_of_fairness,
    solve_by_sweep,
    solve_optimization,
    verify_improvement,
)
from . import synth

__version__ = "0.1.0"
