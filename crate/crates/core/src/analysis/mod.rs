//! Executable reproductions of the scheme's known weaknesses.
//!
//! * [`reproduce_failure`]: the decryption-after-update failure of the
//!   original construction, with exact residual checks on the mock backend.
//! * [`rollback_attack`]: forging a past-time leaf component from a
//!   ciphertext of the shared-randomness variant, using public data only.
//! * [`check_rerandomization`]: structural coherence of updated ciphertexts.
//! * [`size_census`]: element counts for keys and ciphertexts.
//! * [`scenario`]: seeded lifecycle scripts for cross-backend comparison.
//!
//! All reports serialize to JSON with a versioned `schema` field.

mod attack;
mod census;
mod failure;
mod rerandomization;
pub mod scenario;

use thiserror::Error;

use crate::scheme::SchemeError;
use crate::trees::TreeError;

pub use attack::{
    attack_matrix, attack_trial, demonstrate_rollback, forgery_plan, rollback_attack, AttackCell,
    AttackReport, ComponentRef, ControlRun, Forgery, TranscriptStep, TrialOutcome,
};
pub use census::{ciphertext_size, size_census, CiphertextSize, NodeSize, SizeReport};
pub use failure::{reproduce_failure, Cell, CellOutcome, FailureReport, ResidualCheck};
pub use rerandomization::check_rerandomization;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("invalid target: target time {target} is not before ciphertext time {ct_t}")]
    InvalidTarget { ct_t: u64, target: u64 },
    #[error("no combination of ciphertext components yields F_h({target})")]
    NotConstructible { target: u64 },
    #[error("this analysis needs discrete logs and only runs on the mock backend")]
    RequiresMockBackend,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;
