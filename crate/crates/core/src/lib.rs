//! Stabilized adaptive orthogonal-polynomial filters for spectral graph
//! neural networks on the `[-1, 1]` spectral domain.
//!
//! The filter basis is the Jacobi family `P_k^{(α,β)}` evaluated on the
//! shifted Laplacian `L̂ = L_sym - I`, with per-node layer normalization
//! between recurrence steps. Three basis modes differ only in how many
//! shape parameters they learn:
//!
//! | mode | learnables | effective `(α, β)` |
//! |---|---|---|
//! | [`BasisMode::Static`] | 0 | `(-0.5, -0.5)` |
//! | [`BasisMode::Gegenbauer`] | 1 (`λ`) | `(λ - 0.5, λ - 0.5)` |
//! | [`BasisMode::FullJacobi`] | 2 | `(α, β)` |
//!
//! Modules, bottom-up: [`graph`] (CSR storage and `L̂`), [`basis`]
//! (recurrences and propagation), [`autodiff`] (tape and Adam), [`model`]
//! (two-layer network), [`data`] (container format and folds), [`trainer`]
//! (runs, cross-validation, ablations), [`gradcheck`], [`report`] and
//! [`cli`].

pub mod autodiff;
pub mod basis;
pub mod cli;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod model;
pub mod report;
pub mod trainer;

pub use basis::{BasisMode, BasisParams};
pub use data::{load_dataset, Dataset, FoldPlan, Split};
pub use error::{AopfError, Result};
pub use graph::{shifted_laplacian, ShiftedLaplacian, SparseGraph};
pub use model::{AopfNetwork, ParamReport};
pub use trainer::{cross_validate, k_ablation, train_run, CvResult, RunResult, TrainConfig};
