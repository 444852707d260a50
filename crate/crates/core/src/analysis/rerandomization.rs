use ark_ff::Field;

use super::{AnalysisError, Result};
use crate::group::{PairingBackend, Scalar};
use crate::scheme::{Ciphertext, NodeComponent, PublicParams, SchemeVariant};
use crate::trees::{find_prefix_ancestor, NodeLabel};

struct Logs<'a, B: PairingBackend> {
    pp: &'a PublicParams<B>,
}

impl<B: PairingBackend> Logs<'_, B> {
    fn g1(&self, x: &B::G1) -> Result<Scalar> {
        B::dlog_g1(x).ok_or(AnalysisError::RequiresMockBackend)
    }

    fn gt(&self, x: &B::Gt) -> Result<Scalar> {
        B::dlog_gt(x).ok_or(AnalysisError::RequiresMockBackend)
    }

    /// The single exponent `x` with `comp = CT_v(x)`, or `None` if the head
    /// and tail elements disagree.
    fn node_exponent(&self, v: &NodeLabel, comp: &NodeComponent<B>) -> Result<Option<Scalar>> {
        let Some(inv) = self.g1(&self.pp.h_prefix_g1(v))?.inverse() else { return Ok(None) };
        let x = self.g1(&comp.c0)? * inv;
        for j in v.depth() + 1..=self.pp.ell {
            if self.g1(comp.tail_elem(v.depth(), j))? != x * self.g1(&self.pp.h[j].g1)? {
                return Ok(None);
            }
        }
        Ok(Some(x))
    }

    /// Exponent `x` of a base triple `(M e(g1,g2)^x, g^-x, F_u^x)`, checked
    /// against the triple it was updated from.
    fn triple_exponent(
        &self,
        (c0, c1, c2): (&B::Gt, &B::G1, &B::G1),
        (prev_c0, prev_x): (&B::Gt, Scalar),
        f_u: Scalar,
    ) -> Result<Option<Scalar>> {
        let Some(inv) = self.g1(&self.pp.g.g1)?.inverse() else { return Ok(None) };
        let x = -self.g1(c1)? * inv;
        let coherent = self.g1(c2)? == x * f_u
            && self.gt(c0)? - self.gt(prev_c0)? == (x - prev_x) * self.gt(&self.pp.egg())?;
        Ok(coherent.then_some(x))
    }
}

/// Whether `after` has the exponent structure of a fresh encryption at its
/// time, given the ciphertext `before` it was derived from.
///
/// Every node must carry one exponent across its head and tail elements.
/// With a base, the leaf of `after` must share the base exponent (every node
/// must, for the shared-randomness variant) and the message-carrying element
/// must have moved by exactly the change in base exponent. Without a base,
/// each node's parallel triple must carry the node exponent and its message
/// element must have moved by the change relative to the node it was
/// delegated from. Needs discrete logs, so only the mock backend answers.
pub fn check_rerandomization<B: PairingBackend>(
    before: &Ciphertext<B>,
    after: &Ciphertext<B>,
    pp: &PublicParams<B>,
) -> Result<bool> {
    if B::dlog_g1(&pp.g.g1).is_none() {
        return Err(AnalysisError::RequiresMockBackend);
    }
    if before.validate(pp).is_err()
        || after.validate(pp).is_err()
        || before.variant != after.variant
        || before.id != after.id
        || after.t < before.t
    {
        return Ok(false);
    }
    let logs = Logs { pp };
    let f_u = logs.g1(&pp.f_u_g1(&after.id)?)?;

    let mut before_x = std::collections::BTreeMap::new();
    for (v, comp) in &before.nodes {
        match logs.node_exponent(v, comp)? {
            Some(x) => before_x.insert(v.clone(), x),
            None => return Ok(false),
        };
    }
    let mut after_x = std::collections::BTreeMap::new();
    for (v, comp) in &after.nodes {
        match logs.node_exponent(v, comp)? {
            Some(x) => after_x.insert(v.clone(), x),
            None => return Ok(false),
        };
    }

    match (&before.base, &after.base) {
        (Some(b0), Some(b1)) => {
            let Some(inv) = logs.g1(&pp.g.g1)?.inverse() else { return Ok(false) };
            let s0 = -logs.g1(&b0.c1)? * inv;
            let Some(s1) = logs.triple_exponent((&b1.c0, &b1.c1, &b1.c2), (&b0.c0, s0), f_u)? else {
                return Ok(false);
            };
            let leaf = after.t.leaf_label(pp.ell);
            if after_x[&leaf] != s1 {
                return Ok(false);
            }
            if after.variant == SchemeVariant::NaiveSharedS && after_x.values().any(|x| *x != s1) {
                return Ok(false);
            }
            Ok(true)
        }
        (None, None) => {
            for (v, comp) in &after.nodes {
                let anc = find_prefix_ancestor(before.nodes.keys(), v)?;
                let (Some(p1), Some(p0)) = (&comp.parallel, &before.nodes[&anc].parallel) else {
                    return Ok(false);
                };
                let x = logs.triple_exponent((&p1.a, &p1.b, &p1.c), (&p0.a, before_x[&anc]), f_u)?;
                if x != Some(after_x[v]) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(false),
    }
}
