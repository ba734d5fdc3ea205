//! Simulation laboratory: random marketplace instances, the diagonal toy
//! scenario, the three threat models, and seeded experiment sweeps.

pub mod attack;
pub mod experiment;
pub mod generate;

pub use attack::{
    apply, apply_self_promotion, apply_slandering, apply_slandering_direct,
    apply_slandering_indirect, apply_sybil, AttackKind, AttackSpec,
};
pub use experiment::{
    run_experiment, DataPoint, ExperimentConfig, ExperimentKind, ExperimentReport, TrialFailure,
};
pub use generate::{gen_matrix, sample_triangular, toy_scenario, GeneratorConfig, ToyScenarioConfig};
