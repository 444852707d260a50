use ark_ff::{BigInteger, PrimeField, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Exponents live in the scalar field of BLS12-381 for both backends.
pub type Scalar = ark_bls12_381::Fr;

/// Fixed-width (32 byte) big-endian encoding.
pub fn scalar_to_bytes_be(s: &Scalar) -> [u8; 32] {
    let v = s.into_bigint().to_bytes_be();
    let mut out = [0u8; 32];
    out[32 - v.len()..].copy_from_slice(&v);
    out
}

/// Rejects encodings that are not exactly 32 bytes or not reduced mod p.
pub fn scalar_from_bytes_be(bytes: &[u8]) -> Option<Scalar> {
    if bytes.len() != 32 {
        return None;
    }
    let mut limbs = [0u64; 4];
    for (i, chunk) in bytes.rchunks(8).enumerate() {
        let mut buf = [0u8; 8];
        buf.copy_from_slice(chunk);
        limbs[i] = u64::from_be_bytes(buf);
    }
    Scalar::from_bigint(ark_ff::BigInt::new(limbs))
}

pub fn scalar_to_hex(s: &Scalar) -> String {
    hex::encode(scalar_to_bytes_be(s))
}

pub fn scalar_from_hex(s: &str) -> Option<Scalar> {
    scalar_from_bytes_be(&hex::decode(s).ok()?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub label: String,
    #[serde(with = "scalar_hex")]
    pub value: Scalar,
}

/// Ordered log of labelled scalar draws.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace(pub Vec<TraceEntry>);

impl Trace {
    /// Most recent draw recorded under `label`.
    pub fn last(&self, label: &str) -> Option<Scalar> {
        self.0.iter().rev().find(|e| e.label == label).map(|e| e.value)
    }

    pub fn all(&self, label: &str) -> Vec<Scalar> {
        self.0.iter().filter(|e| e.label == label).map(|e| e.value).collect()
    }

    /// Entries recorded at or after position `mark`.
    pub fn since(&self, mark: usize) -> Trace {
        Trace(self.0.get(mark..).unwrap_or_default().to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_value(&self, value: &Scalar) -> bool {
        self.0.iter().any(|e| e.value == *value)
    }
}

/// Seeded source of nonzero scalars.
///
/// Every draw carries a label naming its draw site, e.g. `encrypt.s` or
/// `encrypt.s_v[011]`. When tracing is on, the labelled values are kept in a
/// [`Trace`] for white-box checks.
#[derive(Clone, Debug)]
pub struct ScalarSource {
    rng: ChaCha20Rng,
    trace: Option<Trace>,
}

impl ScalarSource {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        ScalarSource { rng: ChaCha20Rng::from_seed(seed), trace: None }
    }

    pub fn seeded(seed: u64) -> Self {
        ScalarSource { rng: ChaCha20Rng::seed_from_u64(seed), trace: None }
    }

    /// Independent stream for one named operation under a master seed.
    pub fn for_operation(seed: &[u8; 32], context: &str) -> Self {
        let mut h = Sha256::new();
        h.update(b"rsibe.scalar-source.v1");
        h.update(seed);
        h.update((context.len() as u64).to_be_bytes());
        h.update(context.as_bytes());
        Self::from_seed(h.finalize().into())
    }

    pub fn traced(mut self) -> Self {
        self.trace.get_or_insert_with(Trace::default);
        self
    }

    pub fn is_traced(&self) -> bool {
        self.trace.is_some()
    }

    /// Uniform over `[1, p-1]`.
    pub fn sample(&mut self, label: &str) -> Scalar {
        let value = loop {
            let mut wide = [0u8; 64];
            self.rng.fill_bytes(&mut wide);
            let s = Scalar::from_le_bytes_mod_order(&wide);
            if !s.is_zero() {
                break s;
            }
        };
        if let Some(trace) = self.trace.as_mut() {
            trace.0.push(TraceEntry { label: label.to_owned(), value });
        }
        value
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    /// Current trace length, for slicing out the draws of a later step.
    pub fn mark(&self) -> usize {
        self.trace.as_ref().map_or(0, Trace::len)
    }

    pub fn take_trace(&mut self) -> Option<Trace> {
        self.trace.as_mut().map(std::mem::take)
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

pub(crate) mod scalar_hex {
    use super::{scalar_from_hex, scalar_to_hex, Scalar};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&scalar_to_hex(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let s = String::deserialize(d)?;
        scalar_from_hex(&s).ok_or_else(|| D::Error::custom("malformed scalar"))
    }
}
