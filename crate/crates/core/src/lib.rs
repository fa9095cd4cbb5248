//! Training-free keyframe selection for long videos.
//!
//! Given unit-normalized per-frame embeddings and query relevance scores, the
//! selector greedily picks `k` frames maximizing
//! `Σ relevance + λ · log det(G_F + εI)`, where `G_F` is the Gram matrix of
//! the chosen frames. The inverse of `G_F + εI` is grown by block bordering,
//! so no step re-inverts a matrix. `λ` comes from the score variability and
//! the frames-per-slot ratio, and a gate on the peak score falls back to
//! diversity-only selection when the query matches nothing well.
//!
//! ```
//! use keyframe_select::{plan_selection, EmbeddingSet, RelevanceVector, SelectionConfig};
//!
//! let e = EmbeddingSet::from_rows(&[[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]]).unwrap();
//! let r = RelevanceVector::new(vec![0.9, 0.85, 0.5]).unwrap();
//! let (plan, result) = plan_selection(&e, &r, &SelectionConfig::default().with_k(2)).unwrap();
//! assert_eq!(result.indices, vec![0, 2]);
//! assert!(plan.gate.eta == 1);
//! ```
//!
//! The `parallel` feature (on by default) runs the per-step candidate scan
//! and the benchmark seeds on rayon. Results are identical either way.

// `!(x > bound)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod cli;
pub mod config;
pub mod embedding;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod selector;
pub mod synth;

pub use adaptive::{
    blend_lambda, blend_weight, coefficient_of_variation, lambda_bud, lambda_var, plan_selection,
    plan_selection_with, relevance_gate, ForceMode, GateDecision, PlanOptions, SelectionPlan,
};
pub use config::SelectionConfig;
pub use embedding::{normalize_embeddings, EmbeddingSet, RelevanceVector};
pub use error::{Error, Result};
pub use oracle::{det_identity_check, exhaustive_optimum, naive_select, OracleReport};
pub use selector::{
    diversity_gain, extend_state, logdet_diversity, marginal_gain, rdmv_select, rdmv_select_with,
    GateMode, GramInverseState, Scan, SelectOptions, SelectionResult,
};
