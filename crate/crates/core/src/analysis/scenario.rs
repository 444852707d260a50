//! Seeded lifecycle scripts, run unchanged on either backend.
//!
//! The same seed drives the same scalar draws on both backends, so the two
//! runs compute corresponding elements and must report identical outcomes.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::Result;
use crate::group::{BackendConfig, PairingBackend, ScalarSource};
use crate::scheme::{
    decrypt, derive_dk, encrypt, gen_key, random_message, revoke, setup, update_ct, update_key,
    Ciphertext, DelegationMode, PrivateKey, SchemeError, SchemeVariant,
};
use crate::trees::{Identity, TimePeriod};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Step {
    KeyGen { user: u64 },
    Revoke { user: u64, t: u64 },
    Encrypt { user: u64, t: u64 },
    /// Updates the ciphertext in `slot` in place.
    UpdateCt { slot: usize, t: u64 },
    /// Derives the user's key at `t` and decrypts the ciphertext in `slot`.
    Decrypt { slot: usize, user: u64, t: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub seed: u64,
    pub n: usize,
    pub ell: usize,
    pub variant: SchemeVariant,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Done,
    Recovered,
    WrongResult,
    Rejected,
    Revoked,
    Failed(String),
}

impl ScenarioScript {
    /// A random script over a 4-user, 8-period system. Most steps are
    /// chosen to be valid given the steps before them (keys for keyed users,
    /// decryption by the ciphertext's recipient); about one in five is
    /// drawn blindly and may fail.
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (n, ell) = (2, 3);
        let users = 1u64 << n;
        let periods = 1u64 << ell;
        let variant = SchemeVariant::ALL[rng.gen_range(0..3)];
        let first = rng.gen_range(0..users);
        let mut keyed = vec![first];
        // (recipient, time) of each ciphertext slot
        let mut slots: Vec<(u64, u64)> = Vec::new();
        let mut steps = vec![Step::KeyGen { user: first }];
        let len = rng.gen_range(10..18);
        while steps.len() < len {
            let blind = rng.gen_bool(0.2);
            let any_user = rng.gen_range(0..users);
            let user = if blind { any_user } else { keyed[rng.gen_range(0..keyed.len())] };
            let step = match rng.gen_range(0..10) {
                0..=1 => {
                    let fresh: Vec<u64> = (0..users).filter(|u| !keyed.contains(u)).collect();
                    let user = if blind || fresh.is_empty() { any_user } else { fresh[rng.gen_range(0..fresh.len())] };
                    if !keyed.contains(&user) {
                        keyed.push(user);
                    }
                    Step::KeyGen { user }
                }
                2 => Step::Revoke { user, t: rng.gen_range(0..periods) },
                3..=4 => {
                    let t = rng.gen_range(0..periods);
                    slots.push((user, t));
                    Step::Encrypt { user, t }
                }
                5 if !slots.is_empty() => {
                    let slot = rng.gen_range(0..slots.len());
                    let from = if blind { 0 } else { slots[slot].1 };
                    let t = rng.gen_range(from..periods);
                    if t >= slots[slot].1 {
                        slots[slot].1 = t;
                    }
                    Step::UpdateCt { slot, t }
                }
                6..=9 if !slots.is_empty() => {
                    let slot = rng.gen_range(0..slots.len());
                    let (owner, ct_t) = slots[slot];
                    let user = if blind { any_user } else { owner };
                    let from = if blind { 0 } else { ct_t };
                    Step::Decrypt { slot, user, t: rng.gen_range(from..periods) }
                }
                _ => continue,
            };
            steps.push(step);
        }
        ScenarioScript { seed, n, ell, variant, steps }
    }
}

fn failed(e: SchemeError) -> Outcome {
    match e {
        SchemeError::Rejected => Outcome::Rejected,
        SchemeError::Revoked => Outcome::Revoked,
        e => Outcome::Failed(e.to_string()),
    }
}

/// Runs `script` and reports one outcome per step.
pub fn run_script<B: PairingBackend>(script: &ScenarioScript) -> Result<Vec<Outcome>> {
    let mut src = ScalarSource::seeded(script.seed);
    let (mk, pp, mut st, mut rl) =
        setup::<B>(BackendConfig::for_backend::<B>(), 1 << script.n, 1 << script.ell, &mut src)?;
    let mut keys: BTreeMap<u64, PrivateKey<B>> = BTreeMap::new();
    let mut slots: Vec<(Ciphertext<B>, B::Gt)> = Vec::new();
    let id = |user: u64| Identity::from_index(user, script.n);

    let mut outcomes = Vec::with_capacity(script.steps.len());
    for step in &script.steps {
        let outcome = match *step {
            Step::KeyGen { user } => match gen_key(&id(user), &mk, &mut st, &pp, &mut src) {
                Ok(sk) => {
                    keys.insert(user, sk);
                    Outcome::Done
                }
                Err(e) => failed(e),
            },
            Step::Revoke { user, t } => match revoke(&id(user), TimePeriod(t), &mut rl, &st, &pp) {
                Ok(()) => Outcome::Done,
                Err(e) => failed(e),
            },
            Step::Encrypt { user, t } => {
                let m = random_message::<B>(&mut src);
                match encrypt(&pp, &id(user), TimePeriod(t), &m, script.variant, DelegationMode::BitCorrected, &mut src) {
                    Ok(ct) => {
                        slots.push((ct, m));
                        Outcome::Done
                    }
                    Err(e) => failed(e),
                }
            }
            Step::UpdateCt { slot, t } => match update_ct(&slots[slot].0, TimePeriod(t), &pp, &mut src) {
                Ok(ct) => {
                    slots[slot].0 = ct;
                    Outcome::Done
                }
                Err(e) => failed(e),
            },
            Step::Decrypt { slot, user, t } => match keys.get(&user) {
                None => Outcome::Failed(format!("no private key for user {user}")),
                Some(sk) => {
                    let (ct, m) = &slots[slot];
                    let result = update_key(TimePeriod(t), &rl, &mk, &mut st, &pp, &mut src)
                        .and_then(|ku| derive_dk(sk, &ku, &pp, &mut src))
                        .and_then(|dk| decrypt(ct, &dk, &pp, &mut src));
                    match result {
                        Ok(out) if out == *m => Outcome::Recovered,
                        Ok(_) => Outcome::WrongResult,
                        Err(e) => failed(e),
                    }
                }
            },
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}
