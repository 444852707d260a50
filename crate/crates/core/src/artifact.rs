//! Self-describing JSON files for scheme objects.
//!
//! Every file is an envelope
//! `{schema, kind, backend, variant?, body, trace?}`: `kind` names the
//! contained type, `backend` the group it lives in, `variant` the
//! ciphertext variant where one applies. Loading checks the envelope
//! against the requested type and backend and then validates the body.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{BackendKind, Group, PairingBackend, Trace};
use crate::scheme::{
    Ciphertext, DecryptionKey, KeyUpdate, MasterKey, PrivateKey, PublicParams, SchemeError,
    SchemeVariant, SystemState,
};
use crate::trees::RevocationList;

pub const ARTIFACT_SCHEMA: &str = "rsibe.artifact/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    PublicParams,
    MasterKey,
    State,
    PrivateKey,
    KeyUpdate,
    DecryptionKey,
    Ciphertext,
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArtifactError {
    #[error("not a valid artifact file: {0}")]
    Syntax(String),
    #[error("unsupported artifact schema {0:?}")]
    Schema(String),
    #[error("expected a {expected} artifact, found {found}")]
    Kind { expected: ArtifactKind, found: ArtifactKind },
    #[error("artifact is for the {found} backend, expected {expected}")]
    Backend { expected: BackendKind, found: BackendKind },
    #[error("artifact variant {found} does not match {expected}")]
    Variant { expected: SchemeVariant, found: SchemeVariant },
    #[error("invalid {kind}: {source}")]
    Invalid { kind: ArtifactKind, source: SchemeError },
}

/// Fields shared by every artifact file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub kind: ArtifactKind,
    pub backend: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<SchemeVariant>,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    #[serde(flatten)]
    header: Header,
    body: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace: Option<Trace>,
}

/// Authority state: the revocation tree with its node splits, and the
/// revocation list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StateFile<B: PairingBackend> {
    pub tree: SystemState<B>,
    pub revocations: RevocationList,
}

pub trait Artifact<B: PairingBackend>: Serialize + DeserializeOwned {
    const KIND: ArtifactKind;

    fn variant(&self) -> Option<SchemeVariant> {
        None
    }

    /// Invariants of the loaded value, against the public parameters.
    fn check(&self, pp: &PublicParams<B>) -> Result<(), SchemeError>;
}

impl<B: PairingBackend> Artifact<B> for PublicParams<B> {
    const KIND: ArtifactKind = ArtifactKind::PublicParams;

    fn check(&self, _: &PublicParams<B>) -> Result<(), SchemeError> {
        self.validate()
    }
}

impl<B: PairingBackend> Artifact<B> for MasterKey<B> {
    const KIND: ArtifactKind = ArtifactKind::MasterKey;

    fn check(&self, pp: &PublicParams<B>) -> Result<(), SchemeError> {
        if !self.matches(pp) {
            return Err(SchemeError::malformed("master key", "does not match the public parameters"));
        }
        Ok(())
    }
}

impl<B: PairingBackend> Artifact<B> for StateFile<B> {
    const KIND: ArtifactKind = ArtifactKind::State;

    fn check(&self, pp: &PublicParams<B>) -> Result<(), SchemeError> {
        let bad = |r: &str| Err(SchemeError::malformed("state", r));
        if self.tree.depth() != pp.n {
            return bad("tree depth does not match n");
        }
        let mut leaves = BTreeSet::new();
        for (id, &leaf) in self.tree.assignments() {
            if id.len() != pp.n || leaf >= pp.n_max() || !leaves.insert(leaf) {
                return bad("inconsistent leaf assignment");
            }
        }
        for (x, split) in self.tree.node_secrets() {
            if x.depth() > pp.n || split.g_x0.op(&split.g_x1) != pp.g2 {
                return bad("node split does not multiply to g2");
            }
        }
        for (id, t) in self.revocations.entries() {
            if self.tree.leaf_of(id).is_none() || t.0 >= pp.t_max() {
                return bad("revocation entry for an unknown identity or time");
            }
        }
        Ok(())
    }
}

impl<B: PairingBackend> Artifact<B> for PrivateKey<B> {
    const KIND: ArtifactKind = ArtifactKind::PrivateKey;

    fn check(&self, pp: &PublicParams<B>) -> Result<(), SchemeError> {
        self.validate(pp)
    }
}

impl<B: PairingBackend> Artifact<B> for KeyUpdate<B> {
    const KIND: ArtifactKind = ArtifactKind::KeyUpdate;

    fn check(&self, pp: &PublicParams<B>) -> Result<(), SchemeError> {
        self.validate(pp)
    }
}

impl<B: PairingBackend> Artifact<B> for DecryptionKey<B> {
    const KIND: ArtifactKind = ArtifactKind::DecryptionKey;

    fn check(&self, pp: &PublicParams<B>) -> Result<(), SchemeError> {
        self.validate(pp)
    }
}

impl<B: PairingBackend> Artifact<B> for Ciphertext<B> {
    const KIND: ArtifactKind = ArtifactKind::Ciphertext;

    fn variant(&self) -> Option<SchemeVariant> {
        Some(self.variant)
    }

    fn check(&self, pp: &PublicParams<B>) -> Result<(), SchemeError> {
        self.validate(pp)
    }
}

/// Pretty-printed envelope, newline-terminated.
pub fn to_json<B: PairingBackend, A: Artifact<B>>(value: &A, trace: Option<&Trace>) -> String {
    let envelope = Envelope {
        header: Header {
            schema: ARTIFACT_SCHEMA.into(),
            kind: A::KIND,
            backend: B::KIND,
            variant: value.variant(),
        },
        body: serde_json::to_value(value).expect("artifacts serialize"),
        trace: trace.cloned(),
    };
    let mut out = serde_json::to_string_pretty(&envelope).expect("artifacts serialize");
    out.push('\n');
    out
}

/// Reads only the envelope fields.
pub fn read_header(text: &str) -> Result<Header, ArtifactError> {
    let header: Header = serde_json::from_str(text).map_err(|e| ArtifactError::Syntax(e.to_string()))?;
    if header.schema != ARTIFACT_SCHEMA {
        return Err(ArtifactError::Schema(header.schema));
    }
    Ok(header)
}

fn open<B: PairingBackend, A: Artifact<B>>(text: &str) -> Result<(A, Option<Trace>), ArtifactError> {
    let envelope: Envelope = serde_json::from_str(text).map_err(|e| ArtifactError::Syntax(e.to_string()))?;
    let h = &envelope.header;
    if h.schema != ARTIFACT_SCHEMA {
        return Err(ArtifactError::Schema(h.schema.clone()));
    }
    if h.kind != A::KIND {
        return Err(ArtifactError::Kind { expected: A::KIND, found: h.kind });
    }
    if h.backend != B::KIND {
        return Err(ArtifactError::Backend { expected: B::KIND, found: h.backend });
    }
    let value: A = serde_json::from_value(envelope.body).map_err(|e| ArtifactError::Syntax(e.to_string()))?;
    if let (Some(declared), Some(actual)) = (envelope.header.variant, value.variant()) {
        if declared != actual {
            return Err(ArtifactError::Variant { expected: declared, found: actual });
        }
    }
    Ok((value, envelope.trace))
}

/// Loads and validates an artifact of type `A` against `pp`.
pub fn from_json<B: PairingBackend, A: Artifact<B>>(
    text: &str,
    pp: &PublicParams<B>,
) -> Result<(A, Option<Trace>), ArtifactError> {
    let (value, trace) = open::<B, A>(text)?;
    value.check(pp).map_err(|source| ArtifactError::Invalid { kind: A::KIND, source })?;
    Ok((value, trace))
}

/// Loads and validates public parameters.
pub fn params_from_json<B: PairingBackend>(text: &str) -> Result<PublicParams<B>, ArtifactError> {
    let (pp, _) = open::<B, PublicParams<B>>(text)?;
    pp.validate().map_err(|source| ArtifactError::Invalid { kind: ArtifactKind::PublicParams, source })?;
    Ok(pp)
}
