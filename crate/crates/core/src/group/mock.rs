use ark_ff::{One, Zero};

use super::scalar::{scalar_from_bytes_be, scalar_to_bytes_be};
use super::{BackendKind, Group, GroupError, GroupTag, PairingBackend, Scalar};

/// Exponent-space pairing: `e(g1^a, g2^b) = gt^(ab)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MockBackend;

macro_rules! mock_group {
    ($(#[$doc:meta])* $name:ident, $tag:expr) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub struct $name(Scalar);

        impl $name {
            pub fn from_dlog(e: Scalar) -> Self {
                $name(e)
            }

            pub fn dlog(&self) -> Scalar {
                self.0
            }
        }

        impl Group for $name {
            const TAG: GroupTag = $tag;
            const ENCODED_LEN: usize = 33;

            fn identity() -> Self {
                $name(Scalar::zero())
            }

            fn generator() -> Self {
                $name(Scalar::one())
            }

            fn op(&self, rhs: &Self) -> Self {
                $name(self.0 + rhs.0)
            }

            fn exp(&self, e: &Scalar) -> Self {
                $name(self.0 * e)
            }

            fn inv(&self) -> Self {
                $name(-self.0)
            }

            fn to_bytes(&self) -> Vec<u8> {
                let mut out = Vec::with_capacity(Self::ENCODED_LEN);
                out.push(Self::TAG.byte());
                out.extend_from_slice(&scalar_to_bytes_be(&self.0));
                out
            }

            fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
                let (&tag, rest) = bytes
                    .split_first()
                    .ok_or_else(|| GroupError::decode(Self::TAG, "empty input"))?;
                match GroupTag::from_byte(tag) {
                    None => {
                        return Err(GroupError::decode(Self::TAG, format!("unknown tag byte {tag:#04x}")))
                    }
                    Some(found) if found != Self::TAG => {
                        return Err(GroupError::GroupMismatch { expected: Self::TAG, found })
                    }
                    Some(_) => {}
                }
                if rest.len() != 32 {
                    return Err(GroupError::decode(
                        Self::TAG,
                        format!("expected {} bytes, got {}", Self::ENCODED_LEN, bytes.len()),
                    ));
                }
                scalar_from_bytes_be(rest)
                    .map($name)
                    .ok_or_else(|| GroupError::decode(Self::TAG, "exponent not reduced mod p"))
            }
        }
    };
}

mock_group!(
    /// Mock G1 element, stored as its exponent.
    MockG1,
    GroupTag::G1
);
mock_group!(MockG2, GroupTag::G2);
mock_group!(MockGt, GroupTag::Gt);

impl PairingBackend for MockBackend {
    const KIND: BackendKind = BackendKind::Mock;

    type G1 = MockG1;
    type G2 = MockG2;
    type Gt = MockGt;

    fn pair(a: &MockG1, b: &MockG2) -> MockGt {
        MockGt(a.0 * b.0)
    }

    fn dlog_g1(a: &MockG1) -> Option<Scalar> {
        Some(a.0)
    }

    fn dlog_g2(a: &MockG2) -> Option<Scalar> {
        Some(a.0)
    }

    fn dlog_gt(a: &MockGt) -> Option<Scalar> {
        Some(a.0)
    }
}
