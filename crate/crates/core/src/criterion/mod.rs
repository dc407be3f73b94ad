//! The explicit transience criterion for branching random walks in i.i.d.
//! random environment, and critical parameters for the classical cases.

mod critical;
mod exponential;
mod minimax;

pub use critical::{
    ct_brw_critical_lambda, independent_branching_critical_m, CriticalLambda, CriticalMean, Graph,
};
pub use exponential::{half_space_witness, inf_theta, log_phi, phi, InfTheta, MeanVector};
pub use minimax::{
    classify_cross_check, criterion_value, criterion_value_of, CriterionOptions, CriterionReport,
    CrossCheckReport, Verdict,
};
