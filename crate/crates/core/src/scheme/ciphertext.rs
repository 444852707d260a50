use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::keys::DecryptionKey;
use super::params::PublicParams;
use super::{check_identity, check_time, label_of, DelegationMode, Result, SchemeError, SchemeVariant};
use crate::group::{hex_elem, Group, PairingBackend, Scalar, ScalarSource};
use crate::trees::{ct_nodes, find_prefix_ancestor, Identity, NodeLabel, TimePeriod};

/// `(C0, C1, C2) = (M e(g1,g2)^s, g^-s, F_u(ID)^s)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BaseComponents<B: PairingBackend> {
    #[serde(with = "hex_elem")]
    pub c0: B::Gt,
    #[serde(with = "hex_elem")]
    pub c1: B::G1,
    #[serde(with = "hex_elem")]
    pub c2: B::G1,
}

/// Per-node copy of the base triple, used by the corrected variant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParallelPart<B: PairingBackend> {
    #[serde(with = "hex_elem")]
    pub a: B::Gt,
    #[serde(with = "hex_elem")]
    pub b: B::G1,
    #[serde(with = "hex_elem")]
    pub c: B::G1,
}

/// Component `CT_v` for time-tree node `v` under exponent `x`:
/// `c0 = (h_0 prod_{j<=|b_v|} h_j^{b_v[j]})^x` and `tail = [h_j^x]` for
/// `j = |b_v|+1 ..= l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NodeComponent<B: PairingBackend> {
    #[serde(with = "hex_elem")]
    pub c0: B::G1,
    #[serde(with = "hex_elem::vec")]
    pub tail: Vec<B::G1>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<ParallelPart<B>>,
}

impl<B: PairingBackend> NodeComponent<B> {
    /// `C_{v,j}` for `|b_v| < j <= l`.
    pub fn tail_elem(&self, depth: usize, j: usize) -> &B::G1 {
        &self.tail[j - depth - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Ciphertext<B: PairingBackend> {
    pub variant: SchemeVariant,
    pub mode: DelegationMode,
    pub id: Identity,
    pub t: TimePeriod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseComponents<B>>,
    pub nodes: BTreeMap<NodeLabel, NodeComponent<B>>,
}

impl<B: PairingBackend> Ciphertext<B> {
    pub fn validate(&self, pp: &PublicParams<B>) -> Result<()> {
        check_identity(&self.id, pp.n)?;
        check_time(self.t, pp.ell)?;
        let bad = |r: String| Err(SchemeError::malformed("ciphertext", r));
        let expected = ct_nodes(pp.ell, self.t)?;
        if !self.nodes.keys().eq(expected.iter()) {
            return bad(format!("node set does not match CTNodes at time {}", self.t));
        }
        if self.base.is_some() != self.variant.has_base() {
            return bad(format!("base components inconsistent with variant {}", self.variant));
        }
        let parallel = self.variant == SchemeVariant::CorrectedParallel;
        for (v, comp) in &self.nodes {
            if comp.tail.len() != pp.ell - v.depth() {
                return bad(format!("node {} has {} tail elements", v.display(), comp.tail.len()));
            }
            if comp.parallel.is_some() != parallel {
                return bad(format!("node {} parallel part inconsistent with variant", v.display()));
            }
        }
        Ok(())
    }

    pub fn leaf(&self, ell: usize) -> Option<&NodeComponent<B>> {
        self.nodes.get(&self.t.leaf_label(ell))
    }

    /// `(source-group elements, target-group elements)`.
    pub fn element_count(&self) -> (usize, usize) {
        let mut source = 0;
        let mut target = 0;
        if self.base.is_some() {
            source += 2;
            target += 1;
        }
        for comp in self.nodes.values() {
            source += 1 + comp.tail.len();
            if comp.parallel.is_some() {
                source += 2;
                target += 1;
            }
        }
        (source, target)
    }
}

fn node_component<B: PairingBackend>(
    pp: &PublicParams<B>,
    v: &NodeLabel,
    x: &Scalar,
    parallel: Option<(&B::Gt, &B::Gt, &B::G1)>,
) -> NodeComponent<B> {
    NodeComponent {
        c0: pp.h_prefix_g1(v).exp(x),
        tail: (v.depth() + 1..=pp.ell).map(|j| pp.h[j].g1.exp(x)).collect(),
        parallel: parallel.map(|(m, egg, f_u)| ParallelPart {
            a: m.op(&egg.exp(x)),
            b: pp.g.g1.exp(x).inv(),
            c: f_u.exp(x),
        }),
    }
}

/// `Encrypt(ID, T, M, PP)`.
pub fn encrypt<B: PairingBackend>(
    pp: &PublicParams<B>,
    id: &Identity,
    t: TimePeriod,
    m: &B::Gt,
    variant: SchemeVariant,
    mode: DelegationMode,
    src: &mut ScalarSource,
) -> Result<Ciphertext<B>> {
    check_identity(id, pp.n)?;
    let t = check_time(t, pp.ell)?;
    let f_u = pp.f_u_g1(id)?;
    let egg = pp.egg();
    let leaf = t.leaf_label(pp.ell);

    let s = variant.has_base().then(|| src.sample("encrypt.s"));
    let base = s.map(|s| BaseComponents {
        c0: m.op(&egg.exp(&s)),
        c1: pp.g.g1.exp(&s).inv(),
        c2: f_u.exp(&s),
    });

    let mut nodes = BTreeMap::new();
    for v in ct_nodes(pp.ell, t)? {
        let s_v = match (variant, s) {
            (SchemeVariant::WeiOriginal, Some(s)) if v == leaf => s,
            (SchemeVariant::NaiveSharedS, Some(s)) => s,
            _ => src.sample(&label_of("encrypt.s_v", &v)),
        };
        let parallel = (!variant.has_base()).then_some((m, &egg, &f_u));
        let comp = node_component(pp, &v, &s_v, parallel);
        nodes.insert(v, comp);
    }
    Ok(Ciphertext { variant, mode, id: id.clone(), t, base, nodes })
}

/// Moves the component of ancestor `v` down to `target` and re-randomizes
/// it by `x`.
fn delegate<B: PairingBackend>(
    pp: &PublicParams<B>,
    mode: DelegationMode,
    v: &NodeLabel,
    comp: &NodeComponent<B>,
    target: &NodeLabel,
    x: &Scalar,
    parallel_ctx: Option<(&B::Gt, &B::G1)>,
) -> NodeComponent<B> {
    let (d, d2) = (v.depth(), target.depth());
    let mut c0 = comp.c0.clone();
    for j in d + 1..=d2 {
        let take = match mode {
            DelegationMode::Verbatim => true,
            DelegationMode::BitCorrected => target.bit(j),
        };
        if take {
            c0 = c0.op(comp.tail_elem(d, j));
        }
    }
    c0 = c0.op(&pp.h_prefix_g1(target).exp(x));
    let tail = (d2 + 1..=pp.ell)
        .map(|j| comp.tail_elem(d, j).op(&pp.h[j].g1.exp(x)))
        .collect();
    let parallel = match (&comp.parallel, parallel_ctx) {
        (Some(p), Some((egg, f_u))) => Some(ParallelPart {
            a: p.a.op(&egg.exp(x)),
            b: p.b.op(&pp.g.g1.exp(x).inv()),
            c: p.c.op(&f_u.exp(x)),
        }),
        _ => None,
    };
    NodeComponent { c0, tail, parallel }
}

/// `UpdateCT(CT_{ID,T}, T', PP)`.
pub fn update_ct<B: PairingBackend>(
    ct: &Ciphertext<B>,
    t_new: TimePeriod,
    pp: &PublicParams<B>,
    src: &mut ScalarSource,
) -> Result<Ciphertext<B>> {
    let t_new = check_time(t_new, pp.ell)?;
    if t_new < ct.t {
        return Err(SchemeError::InvalidUpdate { from: ct.t.0, to: t_new.0 });
    }
    ct.validate(pp)?;
    let f_u = pp.f_u_g1(&ct.id)?;
    let egg = pp.egg();
    let leaf = t_new.leaf_label(pp.ell);

    let s_new = ct.variant.has_base().then(|| src.sample("update_ct.s'"));
    let base = match (&ct.base, s_new) {
        (Some(b), Some(s)) => Some(BaseComponents {
            c0: b.c0.op(&egg.exp(&s)),
            c1: b.c1.op(&pp.g.g1.exp(&s).inv()),
            c2: b.c2.op(&f_u.exp(&s)),
        }),
        _ => None,
    };

    let mut nodes = BTreeMap::new();
    for target in ct_nodes(pp.ell, t_new)? {
        let v = find_prefix_ancestor(ct.nodes.keys(), &target)?;
        let x = match (ct.variant, s_new) {
            (SchemeVariant::WeiOriginal, Some(s)) if target == leaf => s,
            (SchemeVariant::NaiveSharedS, Some(s)) => s,
            _ => src.sample(&label_of("update_ct.s_v", &target)),
        };
        let parallel_ctx = (!ct.variant.has_base()).then_some((&egg, &f_u));
        let comp = delegate(pp, ct.mode, &v, &ct.nodes[&v], &target, &x, parallel_ctx);
        nodes.insert(target, comp);
    }
    Ok(Ciphertext { variant: ct.variant, mode: ct.mode, id: ct.id.clone(), t: t_new, base, nodes })
}

/// `C0 · e(C1, D1) · e(C2, D2) · e(C_{v_T,0}, D3)`.
pub fn pairing_product<B: PairingBackend>(
    c0: &B::Gt,
    c1: &B::G1,
    c2: &B::G1,
    leaf_c0: &B::G1,
    dk: &DecryptionKey<B>,
) -> B::Gt {
    c0.op(&B::multi_pair(&[(c1, &dk.d1), (c2, &dk.d2), (leaf_c0, &dk.d3)]))
}

/// `Decrypt(CT_{ID,T}, DK_{ID,T'}, PP)`.
///
/// Rejects keys older than the ciphertext. Otherwise updates the ciphertext
/// to the key's time (also when the times are equal) and evaluates the
/// pairing product on the leaf component. The result is returned as is;
/// whether it equals the plaintext depends on the variant.
pub fn decrypt<B: PairingBackend>(
    ct: &Ciphertext<B>,
    dk: &DecryptionKey<B>,
    pp: &PublicParams<B>,
    src: &mut ScalarSource,
) -> Result<B::Gt> {
    if dk.id != ct.id {
        return Err(SchemeError::IdentityMismatch { key: dk.id.to_string(), ciphertext: ct.id.to_string() });
    }
    if dk.t < ct.t {
        return Err(SchemeError::Rejected);
    }
    let updated = update_ct(ct, dk.t, pp, src)?;
    let leaf = updated
        .leaf(pp.ell)
        .ok_or_else(|| SchemeError::malformed("ciphertext", "missing leaf component"))?;
    let (c0, c1, c2) = match (&updated.base, &leaf.parallel) {
        (Some(b), _) => (&b.c0, &b.c1, &b.c2),
        (None, Some(p)) => (&p.a, &p.b, &p.c),
        (None, None) => return Err(SchemeError::malformed("ciphertext", "no base components")),
    };
    Ok(pairing_product(c0, c1, c2, &leaf.c0, dk))
}
