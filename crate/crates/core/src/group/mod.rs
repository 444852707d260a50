//! Bilinear group abstraction.
//!
//! Scheme code is written once against [`PairingBackend`] and runs on two
//! backends:
//!
//! * [`MockBackend`]: every element is stored as its discrete logarithm with
//!   respect to a fixed generator of its group, so the pairing is a field
//!   multiplication and every scheme equation can be checked exactly.
//! * [`CurveBackend`]: BLS12-381 through arkworks.
//!
//! Both backends share the scalar field of BLS12-381, so the same seeded
//! [`ScalarSource`] drives identical draw sequences on either of them.

mod curve;
mod mock;
pub(crate) mod scalar;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{CurveBackend, CurveG1, CurveG2, CurveGt};
pub use mock::{MockBackend, MockG1, MockG2, MockGt};
pub use scalar::{
    scalar_from_hex, scalar_to_hex, Scalar, ScalarSource, Trace, TraceEntry,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group mismatch: expected {expected}, found {found}")]
    GroupMismatch { expected: GroupTag, found: GroupTag },
    #[error("cannot decode {group} element: {reason}")]
    Decode { group: GroupTag, reason: String },
}

impl GroupError {
    pub(crate) fn decode(group: GroupTag, reason: impl Into<String>) -> Self {
        GroupError::Decode { group, reason: reason.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    G1,
    G2,
    Gt,
}

impl GroupTag {
    /// Tag byte prefixed to mock-backend encodings.
    pub fn byte(self) -> u8 {
        match self {
            GroupTag::G1 => 0x01,
            GroupTag::G2 => 0x02,
            GroupTag::Gt => 0x03,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(GroupTag::G1),
            0x02 => Some(GroupTag::G2),
            0x03 => Some(GroupTag::Gt),
            _ => None,
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupTag::G1 => "G1",
            GroupTag::G2 => "G2",
            GroupTag::Gt => "GT",
        })
    }
}

/// A prime-order group written multiplicatively.
pub trait Group: Clone + PartialEq + Eq + fmt::Debug + Send + Sync + 'static {
    const TAG: GroupTag;
    /// Length of the canonical encoding in bytes.
    const ENCODED_LEN: usize;

    fn identity() -> Self;
    fn generator() -> Self;
    fn op(&self, rhs: &Self) -> Self;
    fn exp(&self, e: &Scalar) -> Self;
    fn inv(&self) -> Self;

    fn div(&self, rhs: &Self) -> Self {
        self.op(&rhs.inv())
    }

    fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    fn to_bytes(&self) -> Vec<u8>;
    fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError>;

    fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    fn from_hex(s: &str) -> Result<Self, GroupError> {
        let bytes = hex::decode(s).map_err(|e| GroupError::decode(Self::TAG, e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Curve,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Mock => "mock",
            BackendKind::Curve => "curve",
        })
    }
}

/// Asymmetric pairing `e: G1 x G2 -> GT`.
pub trait PairingBackend:
    Clone + Copy + fmt::Debug + Default + PartialEq + Eq + Send + Sync + 'static
{
    const KIND: BackendKind;

    type G1: Group;
    type G2: Group;
    type Gt: Group;

    fn pair(a: &Self::G1, b: &Self::G2) -> Self::Gt;

    /// Product of pairings.
    fn multi_pair(pairs: &[(&Self::G1, &Self::G2)]) -> Self::Gt {
        pairs
            .iter()
            .fold(Self::Gt::identity(), |acc, (a, b)| acc.op(&Self::pair(a, b)))
    }

    /// Discrete log relative to the G1 generator. Only the mock backend answers.
    fn dlog_g1(_: &Self::G1) -> Option<Scalar> {
        None
    }
    fn dlog_g2(_: &Self::G2) -> Option<Scalar> {
        None
    }
    fn dlog_gt(_: &Self::Gt) -> Option<Scalar> {
        None
    }
}

/// Backend selection recorded in the public parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Requested security level in bits.
    pub security_parameter: u32,
    /// Record every sampled exponent (mock backend only).
    #[serde(default)]
    pub mock_trace: bool,
}

impl BackendConfig {
    pub fn mock() -> Self {
        BackendConfig { kind: BackendKind::Mock, security_parameter: 128, mock_trace: false }
    }

    pub fn mock_traced() -> Self {
        BackendConfig { mock_trace: true, ..Self::mock() }
    }

    pub fn curve() -> Self {
        BackendConfig { kind: BackendKind::Curve, security_parameter: 128, mock_trace: false }
    }

    pub fn for_backend<B: PairingBackend>() -> Self {
        match B::KIND {
            BackendKind::Mock => Self::mock(),
            BackendKind::Curve => Self::curve(),
        }
    }

    /// A scalar source that records draws iff this is a traced mock configuration.
    pub fn scalar_source(&self, seed: [u8; 32]) -> ScalarSource {
        let src = ScalarSource::from_seed(seed);
        if self.kind == BackendKind::Mock && self.mock_trace {
            src.traced()
        } else {
            src
        }
    }
}

/// An element tagged with its group, for callers that handle elements
/// dynamically. Scheme code uses the typed `B::G1`/`B::G2`/`B::Gt` directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupElem<B: PairingBackend> {
    G1(B::G1),
    G2(B::G2),
    Gt(B::Gt),
}

impl<B: PairingBackend> GroupElem<B> {
    pub fn tag(&self) -> GroupTag {
        match self {
            GroupElem::G1(_) => GroupTag::G1,
            GroupElem::G2(_) => GroupTag::G2,
            GroupElem::Gt(_) => GroupTag::Gt,
        }
    }

    pub fn identity(tag: GroupTag) -> Self {
        match tag {
            GroupTag::G1 => GroupElem::G1(B::G1::identity()),
            GroupTag::G2 => GroupElem::G2(B::G2::identity()),
            GroupTag::Gt => GroupElem::Gt(B::Gt::identity()),
        }
    }

    pub fn generator(tag: GroupTag) -> Self {
        match tag {
            GroupTag::G1 => GroupElem::G1(B::G1::generator()),
            GroupTag::G2 => GroupElem::G2(B::G2::generator()),
            GroupTag::Gt => GroupElem::Gt(B::Gt::generator()),
        }
    }

    pub fn op(&self, rhs: &Self) -> Result<Self, GroupError> {
        match (self, rhs) {
            (GroupElem::G1(a), GroupElem::G1(b)) => Ok(GroupElem::G1(a.op(b))),
            (GroupElem::G2(a), GroupElem::G2(b)) => Ok(GroupElem::G2(a.op(b))),
            (GroupElem::Gt(a), GroupElem::Gt(b)) => Ok(GroupElem::Gt(a.op(b))),
            _ => Err(GroupError::GroupMismatch { expected: self.tag(), found: rhs.tag() }),
        }
    }

    pub fn exp(&self, e: &Scalar) -> Self {
        match self {
            GroupElem::G1(a) => GroupElem::G1(a.exp(e)),
            GroupElem::G2(a) => GroupElem::G2(a.exp(e)),
            GroupElem::Gt(a) => GroupElem::Gt(a.exp(e)),
        }
    }

    pub fn inv(&self) -> Self {
        match self {
            GroupElem::G1(a) => GroupElem::G1(a.inv()),
            GroupElem::G2(a) => GroupElem::G2(a.inv()),
            GroupElem::Gt(a) => GroupElem::Gt(a.inv()),
        }
    }

    pub fn pair(a: &Self, b: &Self) -> Result<Self, GroupError> {
        match (a, b) {
            (GroupElem::G1(x), GroupElem::G2(y)) => Ok(GroupElem::Gt(B::pair(x, y))),
            (GroupElem::G1(_), other) => {
                Err(GroupError::GroupMismatch { expected: GroupTag::G2, found: other.tag() })
            }
            (other, _) => {
                Err(GroupError::GroupMismatch { expected: GroupTag::G1, found: other.tag() })
            }
        }
    }

    /// Discrete log with respect to the group generator (mock backend only).
    pub fn dlog(&self) -> Option<Scalar> {
        match self {
            GroupElem::G1(a) => B::dlog_g1(a),
            GroupElem::G2(a) => B::dlog_g2(a),
            GroupElem::Gt(a) => B::dlog_gt(a),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            GroupElem::G1(a) => a.to_bytes(),
            GroupElem::G2(a) => a.to_bytes(),
            GroupElem::Gt(a) => a.to_bytes(),
        }
    }

    pub fn from_bytes(bytes: &[u8], tag: GroupTag) -> Result<Self, GroupError> {
        Ok(match tag {
            GroupTag::G1 => GroupElem::G1(B::G1::from_bytes(bytes)?),
            GroupTag::G2 => GroupElem::G2(B::G2::from_bytes(bytes)?),
            GroupTag::Gt => GroupElem::Gt(B::Gt::from_bytes(bytes)?),
        })
    }
}

/// Serde adapters encoding group elements as lowercase hex of their
/// canonical bytes.
pub mod hex_elem {
    use super::Group;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<G: Group, S: Serializer>(g: &G, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&g.to_hex())
    }

    pub fn deserialize<'de, G: Group, D: Deserializer<'de>>(d: D) -> Result<G, D::Error> {
        let s = String::deserialize(d)?;
        G::from_hex(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::super::Group;
        use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<G: Group, S: Serializer>(v: &[G], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for g in v {
                seq.serialize_element(&g.to_hex())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, G: Group, D: Deserializer<'de>>(d: D) -> Result<Vec<G>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| G::from_hex(s).map_err(D::Error::custom)).collect()
        }
    }
}
