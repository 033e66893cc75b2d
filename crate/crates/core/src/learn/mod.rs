//! Binary linear learners: the local SVM base learner and GreedyTL.

mod greedy;
mod model;
mod ridge;
mod sources;
mod svm;

pub use greedy::{forward_select, greedy_tl, GreedyTlConfig, Selection};
pub use model::{
    BinaryProblem, CoefficientPayload, FeatureSpace, LinearModel, ModelKind, ModelRecord, ZERO_EPS,
};
pub use ridge::{ridge_solve, Cholesky, RidgeSystem};
pub use sources::{source_features, SourceSet};
pub use svm::{hinge_objective, train_svm, SvmConfig};
