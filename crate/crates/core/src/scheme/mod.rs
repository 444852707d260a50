//! The eight RS-IBE algorithms.
//!
//! One implementation serves three ciphertext variants:
//!
//! * [`SchemeVariant::WeiOriginal`]: a shared base `(C0, C1, C2)` under `s`,
//!   per-node components under independent `s_v`, except that the leaf
//!   `v_T` reuses `s`.
//! * [`SchemeVariant::NaiveSharedS`]: every node component reuses `s`.
//! * [`SchemeVariant::CorrectedParallel`]: no shared base; every node carries
//!   its own complete sub-ciphertext under an independent exponent.
//!
//! Ciphertext delegation comes in two modes. [`DelegationMode::Verbatim`]
//! multiplies the ancestor's tail elements `C_{v,j}` without regard to the
//! target label's bits; [`DelegationMode::BitCorrected`] raises them to
//! `b_{v'}[j]`, so that the delegated `C_{v',0}` keeps the form
//! `(h_0 prod h_j^{b_{v'}[j]})^x`.

mod ciphertext;
mod keys;
mod params;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{Group, GroupError, PairingBackend, ScalarSource};
use crate::trees::{Identity, NodeLabel, TimePeriod, TreeError};

pub use ciphertext::{
    decrypt, encrypt, pairing_product, update_ct, BaseComponents, Ciphertext, NodeComponent,
    ParallelPart,
};
pub use keys::{
    common_node, derive_dk, gen_key, revoke, update_key, DecryptionKey, KeyPair, KeyUpdate,
    PrivateKey,
};
pub use params::{setup, Dual, MasterKey, NodeSplit, PublicParams, SystemState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("identity {id} has {got} bits, expected {expected}")]
    InvalidIdentity { id: String, got: usize, expected: usize },
    #[error("cannot update a ciphertext from time {from} back to {to}")]
    InvalidUpdate { from: u64, to: u64 },
    #[error("identity is revoked at this time: no common node between private key and key update")]
    Revoked,
    #[error("rejected: key predates ciphertext")]
    Rejected,
    #[error("decryption key is for {key} but ciphertext is for {ciphertext}")]
    IdentityMismatch { key: String, ciphertext: String },
    #[error("malformed {what}: {reason}")]
    Malformed { what: &'static str, reason: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

impl SchemeError {
    pub(crate) fn malformed(what: &'static str, reason: impl Into<String>) -> Self {
        SchemeError::Malformed { what, reason: reason.into() }
    }
}

pub type Result<T, E = SchemeError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeVariant {
    #[serde(rename = "wei")]
    WeiOriginal,
    #[serde(rename = "naive")]
    NaiveSharedS,
    #[serde(rename = "corrected")]
    CorrectedParallel,
}

impl SchemeVariant {
    pub const ALL: [SchemeVariant; 3] =
        [SchemeVariant::WeiOriginal, SchemeVariant::NaiveSharedS, SchemeVariant::CorrectedParallel];

    /// Whether ciphertexts carry the shared `(C0, C1, C2)` base.
    pub fn has_base(self) -> bool {
        !matches!(self, SchemeVariant::CorrectedParallel)
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeVariant::WeiOriginal => "wei",
            SchemeVariant::NaiveSharedS => "naive",
            SchemeVariant::CorrectedParallel => "corrected",
        }
    }
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "wei" => Ok(SchemeVariant::WeiOriginal),
            "naive" => Ok(SchemeVariant::NaiveSharedS),
            "corrected" => Ok(SchemeVariant::CorrectedParallel),
            _ => Err(format!("unknown variant {s:?} (expected wei, naive or corrected)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelegationMode {
    Verbatim,
    #[default]
    BitCorrected,
}

impl DelegationMode {
    pub fn name(self) -> &'static str {
        match self {
            DelegationMode::Verbatim => "verbatim",
            DelegationMode::BitCorrected => "bit-corrected",
        }
    }
}

impl fmt::Display for DelegationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DelegationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "verbatim" => Ok(DelegationMode::Verbatim),
            "bit-corrected" => Ok(DelegationMode::BitCorrected),
            _ => Err(format!("unknown delegation mode {s:?} (expected verbatim or bit-corrected)")),
        }
    }
}

/// Deterministic GT element derived from an arbitrary seed string.
pub fn message_from_seed<B: PairingBackend>(seed: &str) -> B::Gt {
    let digest: [u8; 32] = Sha256::new()
        .chain_update(b"rsibe.message.v1")
        .chain_update(seed.as_bytes())
        .finalize()
        .into();
    let x = ScalarSource::from_seed(digest).sample("message");
    B::Gt::generator().exp(&x)
}

/// Uniformly random GT element.
pub fn random_message<B: PairingBackend>(src: &mut ScalarSource) -> B::Gt {
    B::Gt::generator().exp(&src.sample("message"))
}

pub(crate) fn check_identity(id: &Identity, n: usize) -> Result<()> {
    if id.len() != n {
        return Err(SchemeError::InvalidIdentity { id: id.to_string(), got: id.len(), expected: n });
    }
    Ok(())
}

pub(crate) fn check_time(t: TimePeriod, ell: usize) -> Result<TimePeriod> {
    Ok(t.check(ell)?)
}

pub(crate) fn label_of(prefix: &str, node: &NodeLabel) -> String {
    format!("{prefix}[{node}]")
}
