//! Smooth convex margin losses and solvers for L2-regularised linear
//! classification.
//!
//! ```
//! use smoothsvm::{LossSpec, Objective, TronConfig, synthetic_dataset, tron_train};
//!
//! let data = synthetic_dataset(200, 20, 5, 0.0, 7).unwrap().dataset;
//! let loss = LossSpec::smooth_hinge_m(0.5).unwrap();
//! let obj = Objective::new(&data, 1e-2, loss).unwrap();
//! let report = tron_train(&obj, &TronConfig::default()).unwrap();
//! assert!(report.converged);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod loss;
pub mod solver;
pub mod sparse;
pub mod special;

pub use data::{
    accuracy, kfold_indices, kfold_split, parse_libsvm, predict, sparsity_metric, synthetic_dataset, write_libsvm,
    Dataset, FoldSplit, SplitPlan, SyntheticData,
};
pub use error::{Error, ParseError, Result};
pub use loss::{CurvatureCertificate, GeneratorPair, LossFamily, LossSpec, OpenInterval};
pub use solver::{
    cg_subproblem, fgd_train, pegasos_train, sgd_train, train, tron_train, trust_region_update, CgOutcome, CgStatus,
    FgdConfig, Objective, SgdConfig, SolverConfig, StepSchedule, TrainReport, TronConfig, XiPolicy,
};
pub use sparse::{CsrMatrix, HessianOperator};
