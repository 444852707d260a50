use std::sync::OnceLock;

use ark_bls12_381::{Bls12_381, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use super::{BackendKind, Group, GroupError, GroupTag, PairingBackend, Scalar};

/// BLS12-381 (Type-3 pairing).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CurveBackend;

fn serialize<T: CanonicalSerialize>(v: &T, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    v.serialize_compressed(&mut out).expect("writing to a Vec cannot fail");
    out
}

/// Decodes with full validation and rejects any encoding that does not
/// re-encode to the same bytes.
fn deserialize<T: CanonicalSerialize + CanonicalDeserialize>(
    bytes: &[u8],
    tag: GroupTag,
    len: usize,
) -> Result<T, GroupError> {
    if bytes.len() != len {
        return Err(GroupError::decode(tag, format!("expected {len} bytes, got {}", bytes.len())));
    }
    let v = T::deserialize_compressed(bytes).map_err(|e| GroupError::decode(tag, e.to_string()))?;
    if serialize(&v, len) != bytes {
        return Err(GroupError::decode(tag, "non-canonical encoding"));
    }
    Ok(v)
}

macro_rules! curve_group {
    ($(#[$doc:meta])* $name:ident, $inner:ty, $affine:ty, $tag:expr, $len:expr) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub struct $name(pub $inner);

        impl Group for $name {
            const TAG: GroupTag = $tag;
            const ENCODED_LEN: usize = $len;

            fn identity() -> Self {
                $name(<$inner>::zero())
            }
            fn generator() -> Self {
                $name(<$inner as PrimeGroup>::generator())
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
                serialize(&self.0.into_affine(), Self::ENCODED_LEN)
            }
            fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
                deserialize::<$affine>(bytes, Self::TAG, Self::ENCODED_LEN).map(|a| $name(a.into()))
            }
        }
    };
}

curve_group!(
    /// BLS12-381 G1 point.
    CurveG1,
    G1Projective,
    G1Affine,
    GroupTag::G1,
    48
);
curve_group!(
    /// BLS12-381 G2 point.
    CurveG2,
    G2Projective,
    G2Affine,
    GroupTag::G2,
    96
);

/// BLS12-381 target-group element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveGt(pub PairingOutput<Bls12_381>);

static GT_GENERATOR: OnceLock<CurveGt> = OnceLock::new();

impl Group for CurveGt {
    const TAG: GroupTag = GroupTag::Gt;
    const ENCODED_LEN: usize = 576;

    fn identity() -> Self {
        CurveGt(PairingOutput::zero())
    }
    /// `e(g1, g2)` for the fixed source-group generators.
    fn generator() -> Self {
        *GT_GENERATOR.get_or_init(|| {
            CurveGt(Bls12_381::pairing(
                <G1Projective as PrimeGroup>::generator(),
                <G2Projective as PrimeGroup>::generator(),
            ))
        })
    }
    fn op(&self, rhs: &Self) -> Self {
        CurveGt(self.0 + rhs.0)
    }
    fn exp(&self, e: &Scalar) -> Self {
        CurveGt(self.0 * e)
    }
    fn inv(&self) -> Self {
        CurveGt(-self.0)
    }
    fn to_bytes(&self) -> Vec<u8> {
        serialize(&self.0, Self::ENCODED_LEN)
    }
    fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
        deserialize::<PairingOutput<Bls12_381>>(bytes, Self::TAG, Self::ENCODED_LEN).map(CurveGt)
    }
}

impl PairingBackend for CurveBackend {
    const KIND: BackendKind = BackendKind::Curve;

    type G1 = CurveG1;
    type G2 = CurveG2;
    type Gt = CurveGt;

    fn pair(a: &CurveG1, b: &CurveG2) -> CurveGt {
        CurveGt(Bls12_381::pairing(a.0, b.0))
    }

    fn multi_pair(pairs: &[(&CurveG1, &CurveG2)]) -> CurveGt {
        let a: Vec<G1Affine> = pairs.iter().map(|(a, _)| a.0.into_affine()).collect();
        let b: Vec<G2Affine> = pairs.iter().map(|(_, b)| b.0.into_affine()).collect();
        CurveGt(Bls12_381::multi_pairing(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ScalarSource;

    #[test]
    fn round_trip_and_canonical() {
        let mut src = ScalarSource::seeded(5);
        let x = CurveG1::generator().exp(&src.sample(""));
        let y = CurveG2::generator().exp(&src.sample(""));
        let z = CurveBackend::pair(&x, &y);
        assert_eq!(CurveG1::from_bytes(&x.to_bytes()).unwrap(), x);
        assert_eq!(CurveG2::from_bytes(&y.to_bytes()).unwrap(), y);
        assert_eq!(CurveGt::from_bytes(&z.to_bytes()).unwrap(), z);
        // a second projective representative encodes identically
        let x2 = x.op(&x).op(&x.inv());
        assert_eq!(x2.to_bytes(), x.to_bytes());
    }

    #[test]
    fn malformed_bytes_rejected() {
        let x = CurveG1::generator().to_bytes();
        assert!(CurveG1::from_bytes(&x[..47]).is_err());
        let mut off = x.clone();
        off[47] ^= 0x01;
        // flipping a low bit of x almost surely leaves the curve
        assert!(CurveG1::from_bytes(&off).is_err());
        assert!(CurveG2::from_bytes(&x).is_err());
    }

    #[test]
    fn bilinear_on_small_exponents() {
        let a = CurveG1::generator().exp(&Scalar::from(2u64));
        let b = CurveG2::generator().exp(&Scalar::from(3u64));
        assert_eq!(CurveBackend::pair(&a, &b), CurveGt::generator().exp(&Scalar::from(6u64)));
        assert!(CurveBackend::pair(&CurveG1::identity(), &b).is_identity());
        assert!(!CurveGt::generator().is_identity());
        assert!(CurveBackend::dlog_g1(&a).is_none());
    }

    #[test]
    fn multi_pair_matches_product() {
        let mut src = ScalarSource::seeded(9);
        let a = CurveG1::generator().exp(&src.sample(""));
        let b = CurveG2::generator().exp(&src.sample(""));
        let c = CurveG1::generator().exp(&src.sample(""));
        let expected = CurveBackend::pair(&a, &b).op(&CurveBackend::pair(&c, &b));
        assert_eq!(CurveBackend::multi_pair(&[(&a, &b), (&c, &b)]), expected);
    }
}
