"""Exact-numerics simulation and analysis of a four-photon cluster-state
experiment: the linear-optics controlled-phase gate, the cluster state it
prepares, stabilizer/witness/Bell analysis, entanglement persistency, and
the coincidence-counting statistics pipeline."""

__version__ = "0.1.0"

from .qstate import (
    DensityMatrix,
    ImpossibleOutcomeError,
    OperatorExpr,
    PauliString,
    PureState,
    expectation,
    fidelity,
    ideal_cphase,
    logarithmic_negativity,
    make_bell,
    make_cluster4,
    make_ghz,
    maximally_mixed,
    partial_trace,
    product_state,
    project,
    project_pure,
    state_from_json_dict,
    state_to_json_dict,
)
from .result import AnalysisResult
from .photonics import (
    FockPolynomial,
    Network,
    NoiseParams,
    PdbsSpec,
    build_gate_network,
    evolve,
    gate_truth_amplitudes,
    pdbs_transfer,
    run_cluster_experiment,
    run_gate_pair,
)
from .stabilizer import (
    BELL_LHV_BOUND,
    BELL_MAX,
    MeasurementSetting,
    StabilizerGroup,
    bell_operator,
    bell_value,
    cluster4_generators,
    fidelity_from_stabilizers,
    full_group,
    settings_plan,
    witness_c3,
    witness_c4,
    witness_rho_abc,
)
from .analysis import (
    PersistencyReport,
    persistency_report,
    reduce_by_loss,
    reduce_by_x_projection,
    reduce_to_pair,
)
from .counts import (
    CountRecord,
    CorrectedRecord,
    EfficiencyTable,
    ExperimentConfig,
    IncompatibleSettingError,
    NoDataError,
    PlanningError,
    correlation,
    efficiency_correct,
    estimate,
    exact_record,
    outcome_probabilities,
    sample_counts,
    synthesize_records,
    tomography_2q,
    tomography_settings,
)
