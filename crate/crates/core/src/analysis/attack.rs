use ark_ff::{Field, One, PrimeField, Zero};
use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::group::{scalar_to_hex, BackendKind, Group, PairingBackend, Scalar, ScalarSource};
use crate::group::BackendConfig;
use crate::scheme::{
    decrypt, derive_dk, encrypt, gen_key, pairing_product, random_message, revoke, setup, update_key,
    BaseComponents, Ciphertext, DecryptionKey, DelegationMode, PublicParams, SchemeError, SchemeVariant,
};
use crate::trees::{Identity, NodeLabel, TimePeriod};

pub const ATTACK_SCHEMA: &str = "rsibe.attack-report/v1";

/// A public ciphertext element usable in a forgery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "kebab-case")]
pub enum ComponentRef {
    /// `C_{v,0}`, exponent vector `e_0 + sum_{j <= |v|} b_v[j] e_j`.
    Head { node: NodeLabel },
    /// `C_{v,j}`, exponent vector `e_j`.
    Tail { node: NodeLabel, j: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub source: ComponentRef,
    /// Exponent applied to the source element: a small signed integer, or
    /// the hex encoding of the field element otherwise.
    pub coefficient: String,
}

/// Forged leaf component for an earlier time, with the base triple it is
/// decrypted against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forgery<B: PairingBackend> {
    pub target: TimePeriod,
    pub leaf_c0: B::G1,
    pub base: BaseComponents<B>,
    /// Where the base triple came from.
    pub base_source: String,
    /// `leaf_c0 = prod source^coefficient`.
    pub transcript: Vec<TranscriptStep>,
}

impl<B: PairingBackend> Forgery<B> {
    /// The decryption equation evaluated on the forged components.
    pub fn decrypt(&self, dk: &DecryptionKey<B>) -> B::Gt {
        pairing_product(&self.base.c0, &self.base.c1, &self.base.c2, &self.leaf_c0, dk)
    }
}

fn coefficient_text(c: &Scalar) -> String {
    let small = |x: &Scalar| {
        let limbs = x.into_bigint().0;
        (limbs[1..].iter().all(|&l| l == 0) && limbs[0] < 1 << 32).then_some(limbs[0])
    };
    match (small(c), small(&-*c)) {
        (Some(k), _) => k.to_string(),
        (None, Some(k)) => format!("-{k}"),
        (None, None) => scalar_to_hex(c),
    }
}

fn head_vector(node: &NodeLabel, ell: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(); ell + 1];
    v[0] = Scalar::one();
    for j in 1..=node.depth() {
        if node.bit(j) {
            v[j] = Scalar::one();
        }
    }
    v
}

/// Solves `sum_k x_k cols[k] = b` over the scalar field by Gauss-Jordan
/// elimination, setting free variables to zero.
fn solve(cols: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let rows = b.len();
    let width = cols.len();
    let mut m: Vec<Vec<Scalar>> =
        (0..rows).map(|i| cols.iter().map(|c| c[i]).chain(std::iter::once(b[i])).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].inverse().expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[width].is_zero()) {
        return None;
    }
    let mut x = vec![Scalar::zero(); width];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][width];
    }
    Some(x)
}

/// Which ciphertext elements, raised to which exponents, multiply to
/// `F_h(target)` raised to the shared randomness. Depends only on the set of
/// ciphertext nodes, never on element values. `None` if no combination
/// exists.
pub fn forgery_plan<'a, I>(ell: usize, nodes: I, target: TimePeriod) -> Option<Vec<(ComponentRef, Scalar)>>
where
    I: IntoIterator<Item = &'a NodeLabel>,
{
    let mut refs = Vec::new();
    let mut cols = Vec::new();
    for v in nodes {
        refs.push(ComponentRef::Head { node: v.clone() });
        cols.push(head_vector(v, ell));
        for j in v.depth() + 1..=ell {
            refs.push(ComponentRef::Tail { node: v.clone(), j });
            let mut e = vec![Scalar::zero(); ell + 1];
            e[j] = Scalar::one();
            cols.push(e);
        }
    }
    let goal = head_vector(&target.leaf_label(ell), ell);
    let x = solve(&cols, &goal)?;
    Some(refs.into_iter().zip(x).filter(|(_, c)| !c.is_zero()).collect())
}

/// Builds a leaf component for `target < ct.t` from the public elements of
/// `ct` alone.
///
/// The forgery is always computed when the linear system is solvable. It
/// only decrypts correctly if every node shares the base randomness, which
/// is the case for the shared-randomness variant only. For the variant
/// without a base, the parallel triple of the first node used is taken.
pub fn rollback_attack<B: PairingBackend>(
    ct: &Ciphertext<B>,
    target: TimePeriod,
    pp: &PublicParams<B>,
) -> Result<Forgery<B>> {
    if target >= ct.t {
        return Err(AnalysisError::InvalidTarget { ct_t: ct.t.0, target: target.0 });
    }
    ct.validate(pp)?;
    let plan = forgery_plan(pp.ell, ct.nodes.keys(), target)
        .ok_or(AnalysisError::NotConstructible { target: target.0 })?;

    let mut leaf_c0 = B::G1::identity();
    let mut transcript = Vec::with_capacity(plan.len());
    for (source, coeff) in &plan {
        let elem = match source {
            ComponentRef::Head { node } => &ct.nodes[node].c0,
            ComponentRef::Tail { node, j } => ct.nodes[node].tail_elem(node.depth(), *j),
        };
        leaf_c0 = leaf_c0.op(&elem.exp(coeff));
        transcript.push(TranscriptStep { source: source.clone(), coefficient: coefficient_text(coeff) });
    }

    let (base, base_source) = match &ct.base {
        Some(b) => (b.clone(), "ciphertext base (C0, C1, C2)".to_string()),
        None => {
            let (node, part) = plan
                .iter()
                .find_map(|(r, _)| {
                    let node = match r {
                        ComponentRef::Head { node } | ComponentRef::Tail { node, .. } => node,
                    };
                    ct.nodes[node].parallel.as_ref().map(|p| (node, p))
                })
                .ok_or_else(|| SchemeError::malformed("ciphertext", "no base components"))?;
            let base = BaseComponents { c0: part.a.clone(), c1: part.b.clone(), c2: part.c.clone() };
            (base, format!("parallel triple of node {}", node.display()))
        }
    };
    Ok(Forgery { target, leaf_c0, base, base_source, transcript })
}

/// Result of one end-to-end rollback attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub variant: SchemeVariant,
    pub constructible: bool,
    /// The forgery decrypted under the victim's old key equals the message.
    pub recovered: bool,
    /// The victim could not derive a key for the ciphertext's time.
    pub victim_revoked_at_ct_time: bool,
    /// Honest decryption with the old key was refused.
    pub direct_decrypt_rejected: bool,
    pub base_source: Option<String>,
    pub transcript: Vec<TranscriptStep>,
}

/// Victim holds a decryption key for `target`, is revoked from `ct_t` on,
/// and receives a fresh ciphertext for `ct_t`. The attacker sees only the
/// public parameters and the serialized ciphertext.
pub fn attack_trial<B: PairingBackend>(
    n: usize,
    ell: usize,
    ct_t: TimePeriod,
    target: TimePeriod,
    variant: SchemeVariant,
    mut src: ScalarSource,
) -> Result<TrialOutcome> {
    if target >= ct_t {
        return Err(AnalysisError::InvalidTarget { ct_t: ct_t.0, target: target.0 });
    }
    let (mk, pp, mut st, mut rl) =
        setup::<B>(BackendConfig::for_backend::<B>(), 1 << n, 1 << ell, &mut src)?;
    let victim = Identity::from_index(0, n);
    let sk = gen_key(&victim, &mk, &mut st, &pp, &mut src)?;
    let ku_old = update_key(target, &rl, &mk, &mut st, &pp, &mut src)?;
    let dk_old = derive_dk(&sk, &ku_old, &pp, &mut src)?;
    revoke(&victim, ct_t, &mut rl, &st, &pp)?;
    let ku_now = update_key(ct_t, &rl, &mk, &mut st, &pp, &mut src)?;
    let victim_revoked_at_ct_time =
        matches!(derive_dk(&sk, &ku_now, &pp, &mut src), Err(SchemeError::Revoked));

    let m = random_message::<B>(&mut src);
    let ct = encrypt(&pp, &victim, ct_t, &m, variant, DelegationMode::BitCorrected, &mut src)?;
    let bytes = serde_json::to_vec(&ct).expect("ciphertexts serialize");
    let seen: Ciphertext<B> = serde_json::from_slice(&bytes)
        .map_err(|e| SchemeError::malformed("ciphertext", e.to_string()))?;
    let direct_decrypt_rejected = decrypt(&seen, &dk_old, &pp, &mut src) == Err(SchemeError::Rejected);

    let (constructible, recovered, base_source, transcript) = match rollback_attack(&seen, target, &pp) {
        Ok(f) => (true, f.decrypt(&dk_old) == m, Some(f.base_source), f.transcript),
        Err(AnalysisError::NotConstructible { .. }) => (false, false, None, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(TrialOutcome {
        variant,
        constructible,
        recovered,
        victim_revoked_at_ct_time,
        direct_decrypt_rejected,
        base_source,
        transcript,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlRun {
    pub variant: SchemeVariant,
    pub constructible: bool,
    pub recovered: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackReport {
    pub schema: String,
    pub backend: BackendKind,
    pub n: usize,
    pub ell: usize,
    pub seed: String,
    pub ct_t: TimePeriod,
    pub target: TimePeriod,
    #[serde(flatten)]
    pub attack: TrialOutcome,
    /// The same attack, same seed, against the other variants.
    pub controls: Vec<ControlRun>,
}

/// Runs the attack against `variant` and, as controls, against the other two.
pub fn demonstrate_rollback<B: PairingBackend>(
    n: usize,
    ell: usize,
    ct_t: TimePeriod,
    target: TimePeriod,
    seed: [u8; 32],
    variant: SchemeVariant,
) -> Result<AttackReport> {
    let attack = attack_trial::<B>(n, ell, ct_t, target, variant, ScalarSource::from_seed(seed))?;
    let controls = SchemeVariant::ALL
        .into_iter()
        .filter(|&v| v != variant)
        .map(|v| {
            attack_trial::<B>(n, ell, ct_t, target, v, ScalarSource::from_seed(seed))
                .map(|o| ControlRun { variant: v, constructible: o.constructible, recovered: o.recovered })
        })
        .collect::<Result<_>>()?;
    Ok(AttackReport {
        schema: ATTACK_SCHEMA.into(),
        backend: B::KIND,
        n,
        ell,
        seed: hex::encode(seed),
        ct_t,
        target,
        attack,
        controls,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackCell {
    pub ct_t: u64,
    pub target: u64,
    pub constructible: bool,
    pub naive_recovered: bool,
    pub wei_recovered: bool,
    pub corrected_recovered: bool,
}

/// Every `(ct_t, target)` with `target < ct_t`, attacked on all three variants.
pub fn attack_matrix<B: PairingBackend>(ell: usize, seed: [u8; 32]) -> Result<Vec<AttackCell>> {
    let t_max = 1u64 << ell;
    let mut cells = Vec::new();
    for ct_t in 1..t_max {
        for target in 0..ct_t {
            let ctx = format!("attack-matrix[{ct_t},{target}]");
            let run = |v| {
                attack_trial::<B>(1, ell, TimePeriod(ct_t), TimePeriod(target), v, ScalarSource::for_operation(&seed, &ctx))
            };
            let naive = run(SchemeVariant::NaiveSharedS)?;
            let wei = run(SchemeVariant::WeiOriginal)?;
            let corrected = run(SchemeVariant::CorrectedParallel)?;
            cells.push(AttackCell {
                ct_t,
                target,
                constructible: naive.constructible,
                naive_recovered: naive.recovered,
                wei_recovered: wei.recovered,
                corrected_recovered: corrected.recovered,
            });
        }
    }
    Ok(cells)
}
