//! Revocable-storage identity-based encryption (RS-IBE) with ciphertext
//! update, together with tooling that exercises its failure modes.
//!
//! The crate has four layers:
//!
//! * [`group`]: the bilinear-group interface with an exponent-space mock
//!   backend and a BLS12-381 backend.
//! * [`trees`]: revocation-tree covers (`KUNodes`) and time-tree node sets
//!   (`CTNodes`) for ciphertext delegation.
//! * [`scheme`]: setup, key generation, key update, decryption-key
//!   derivation, encryption, ciphertext update, decryption and revocation,
//!   for three ciphertext variants.
//! * [`analysis`]: the decryption-failure matrix of the original
//!   construction, the rollback attack on the shared-exponent variant,
//!   re-randomization checks and a size census.
//!
//! Everything is generic over [`group::PairingBackend`]; the aliases below
//! fix the backend.

pub mod analysis;
pub mod artifact;
pub mod group;
pub mod scheme;
pub mod trees;

pub use group::{CurveBackend, MockBackend, Scalar, ScalarSource};
pub use scheme::{DelegationMode, SchemeError, SchemeVariant};
pub use trees::{Identity, NodeLabel, TimePeriod};

pub type MockParams = scheme::PublicParams<MockBackend>;
pub type MockMasterKey = scheme::MasterKey<MockBackend>;
pub type MockState = scheme::SystemState<MockBackend>;
pub type MockPrivateKey = scheme::PrivateKey<MockBackend>;
pub type MockKeyUpdate = scheme::KeyUpdate<MockBackend>;
pub type MockDecryptionKey = scheme::DecryptionKey<MockBackend>;
pub type MockCiphertext = scheme::Ciphertext<MockBackend>;

pub type CurveParams = scheme::PublicParams<CurveBackend>;
pub type CurveMasterKey = scheme::MasterKey<CurveBackend>;
pub type CurveState = scheme::SystemState<CurveBackend>;
pub type CurvePrivateKey = scheme::PrivateKey<CurveBackend>;
pub type CurveKeyUpdate = scheme::KeyUpdate<CurveBackend>;
pub type CurveDecryptionKey = scheme::DecryptionKey<CurveBackend>;
pub type CurveCiphertext = scheme::Ciphertext<CurveBackend>;
