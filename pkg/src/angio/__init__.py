"""Simulation and stability certificates for delayed tumor-vasculature models.

The package covers three growth laws for a tumor volume x coupled to an
effective vascular support K, with optional bounded delay in the stimulatory
feedback and time-varying dosing schedules:

* ``ModelKind.MODEL1``: Gompertz growth, full support dynamics
* ``ModelKind.MODEL2``: Gompertz growth, reduced support dynamics
* ``ModelKind.MODEL3``: Richards growth, full support dynamics

``integrate`` runs the fixed-step method-of-steps solver and returns a dense
trajectory; the ``analysis`` module turns comparison-matrix and energy
arguments into machine-checkable stability verdicts; ``scenario`` binds both
to a JSON configuration format shared with the ``angio`` command line tool.
"""

from .analysis import (
    ComparisonMatrix,
    EquilibriumPoint,
    Linearization,
    MMatrixDiagnostic,
    NoEquilibrium,
    StabilityCriterion,
    StabilityReport,
    Verdict,
    asymptotic_attractor_check,
    burton_check,
    comparison_matrix,
    equilibrium_for,
    equilibrium_model1,
    equilibrium_model2,
    equilibrium_model3,
    equilibrium_residual,
    is_m_matrix,
    leading_principal_minors,
    linearize_model1,
    m_matrix_certificate,
    model1_local_stability,
    model2_local_stability,
)
from .dde import (
    HistoryFunction,
    IntegratorOptions,
    PositivityMode,
    Trajectory,
    convergence_metric,
    eval_trajectory,
    integrate,
    solve_dde,
)
from .errors import (
    AngioError,
    DivergenceFault,
    DomainError,
    IntegrationFault,
    InternalCheckError,
    ParameterError,
    PositivityFault,
    RangeError,
)
from .models import (
    DelayKind,
    DelaySpec,
    ModelKind,
    ModelParams,
    State,
    TreatmentSchedule,
    constant_rate,
    exp_decay_rate,
    from_exponential_coords,
    growth_rates,
    inverse_decay_rate,
    lienard_rhs,
    log_growth_rates,
    model1_deviation_rhs,
    model2_deviation_rhs,
    pk_concentration,
    pk_infusion_rate,
    rhs_model1,
    rhs_model2,
    rhs_model3,
    to_exponential_coords,
)
from .scenario import (
    Scenario,
    ScenarioError,
    SweepGrid,
    load_scenario,
    load_sweep,
    parse_scenario,
    parse_sweep,
    stability_report,
)

__version__ = "0.1.0"

__all__ = [
    "AngioError",
    "ComparisonMatrix",
    "DelayKind",
    "DelaySpec",
    "DivergenceFault",
    "DomainError",
    "EquilibriumPoint",
    "HistoryFunction",
    "IntegrationFault",
    "IntegratorOptions",
    "InternalCheckError",
    "Linearization",
    "MMatrixDiagnostic",
    "ModelKind",
    "ModelParams",
    "NoEquilibrium",
    "ParameterError",
    "PositivityFault",
    "PositivityMode",
    "RangeError",
    "Scenario",
    "ScenarioError",
    "StabilityCriterion",
    "StabilityReport",
    "State",
    "SweepGrid",
    "Trajectory",
    "TreatmentSchedule",
    "Verdict",
    "asymptotic_attractor_check",
    "burton_check",
    "comparison_matrix",
    "constant_rate",
    "convergence_metric",
    "equilibrium_for",
    "equilibrium_model1",
    "equilibrium_model2",
    "equilibrium_model3",
    "equilibrium_residual",
    "eval_trajectory",
    "exp_decay_rate",
    "from_exponential_coords",
    "growth_rates",
    "integrate",
    "inverse_decay_rate",
    "is_m_matrix",
    "leading_principal_minors",
    "lienard_rhs",
    "linearize_model1",
    "load_scenario",
    "load_sweep",
    "log_growth_rates",
    "m_matrix_certificate",
    "model1_deviation_rhs",
    "model1_local_stability",
    "model2_deviation_rhs",
    "model2_local_stability",
    "parse_scenario",
    "parse_sweep",
    "pk_concentration",
    "pk_infusion_rate",
    "rhs_model1",
    "rhs_model2",
    "rhs_model3",
    "solve_dde",
    "stability_report",
    "to_exponential_coords",
    "__version__",
]
