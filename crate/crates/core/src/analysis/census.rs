use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::scheme::SchemeVariant;
use crate::trees::{ct_nodes, NodeLabel, TimePeriod};

pub const CENSUS_SCHEMA: &str = "rsibe.size-census/v1";

/// Elements attached to one ciphertext node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSize {
    pub node: NodeLabel,
    /// Head plus tail, `l - |b_v| + 1`.
    pub delegation: usize,
    /// Parallel triple, 3 or 0.
    pub parallel: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiphertextSize {
    pub t: TimePeriod,
    pub nodes: Vec<NodeSize>,
    /// `C0, C1, C2`: 3 or 0.
    pub base: usize,
    pub source_group: usize,
    pub target_group: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub schema: String,
    pub n: usize,
    pub ell: usize,
    pub variant: SchemeVariant,
    /// One pair per node on the leaf-to-root path, `n + 1` pairs.
    pub private_key_entries: usize,
    pub private_key_elements: usize,
    pub key_update_elements_per_node: usize,
    /// Without revocations the cover is the root alone.
    pub key_update_elements_unrevoked: usize,
    pub decryption_key_elements: usize,
    pub ciphertexts: Vec<CiphertextSize>,
    pub max_ciphertext_total: usize,
}

/// Element count of a fresh ciphertext at `t`, from the node set alone.
pub fn ciphertext_size(ell: usize, t: TimePeriod, variant: SchemeVariant) -> Result<CiphertextSize> {
    let parallel = if variant.has_base() { 0 } else { 3 };
    let nodes: Vec<NodeSize> = ct_nodes(ell, t)?
        .into_iter()
        .map(|v| NodeSize { delegation: ell - v.depth() + 1, node: v, parallel })
        .collect();
    let base = if variant.has_base() { 3 } else { 0 };
    let delegation: usize = nodes.iter().map(|s| s.delegation).sum();
    let parallel_total: usize = nodes.iter().map(|s| s.parallel).sum();
    // one of every triple is the GT element
    let target_group = (base + parallel_total) / 3;
    let total = base + delegation + parallel_total;
    Ok(CiphertextSize { t, nodes, base, source_group: total - target_group, target_group, total })
}

/// Sizes for keys and for a ciphertext at each time in `times` (every time
/// period when `None`, allowed up to `l = 16`).
pub fn size_census(n: usize, ell: usize, variant: SchemeVariant, times: Option<&[TimePeriod]>) -> Result<SizeReport> {
    if n == 0 || ell == 0 || n > 63 || ell > 63 {
        return Err(AnalysisError::InvalidParameter(format!("n = {n} and ell = {ell} must lie in 1..=63")));
    }
    let all: Vec<TimePeriod>;
    let times = match times {
        Some(ts) => ts,
        None if ell <= 16 => {
            all = (0..1u64 << ell).map(TimePeriod).collect();
            &all
        }
        None => {
            return Err(AnalysisError::InvalidParameter(format!(
                "listing every period for ell = {ell} is too large; pass explicit times"
            )))
        }
    };
    let ciphertexts = times.iter().map(|&t| ciphertext_size(ell, t, variant)).collect::<Result<Vec<_>>>()?;
    Ok(SizeReport {
        schema: CENSUS_SCHEMA.into(),
        n,
        ell,
        variant,
        private_key_entries: n + 1,
        private_key_elements: 2 * (n + 1),
        key_update_elements_per_node: 2,
        key_update_elements_unrevoked: 2,
        decryption_key_elements: 3,
        max_ciphertext_total: ciphertexts.iter().map(|c| c.total).max().unwrap_or(0),
        ciphertexts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wei_three_three() {
        let c = ciphertext_size(3, TimePeriod(3), SchemeVariant::WeiOriginal).unwrap();
        assert_eq!(c.total, 7);
        assert_eq!((c.source_group, c.target_group), (6, 1));
        let per: Vec<(String, usize)> = c.nodes.iter().map(|s| (s.node.to_string(), s.delegation)).collect();
        assert_eq!(per, [("011".to_string(), 1), ("1".to_string(), 3)]);
    }

    #[test]
    fn corrected_swaps_base_for_per_node_triples() {
        for t in 0..16 {
            let w = ciphertext_size(4, TimePeriod(t), SchemeVariant::WeiOriginal).unwrap();
            let c = ciphertext_size(4, TimePeriod(t), SchemeVariant::CorrectedParallel).unwrap();
            assert_eq!(c.total, w.total - 3 + 3 * w.nodes.len());
            assert_eq!(c.target_group, w.nodes.len());
        }
    }

    #[test]
    fn census_lists_every_period() {
        let r = size_census(3, 2, SchemeVariant::NaiveSharedS, None).unwrap();
        assert_eq!(r.ciphertexts.len(), 4);
        assert_eq!(r.private_key_entries, 4);
        // t = 0: nodes 00, 01, 1 carry 1 + 1 + 2
        assert_eq!(r.ciphertexts[0].total, 3 + 1 + 1 + 2);
        assert_eq!(r.max_ciphertext_total, 7);
        assert!(size_census(3, 20, SchemeVariant::NaiveSharedS, None).is_err());
        assert_eq!(size_census(3, 20, SchemeVariant::NaiveSharedS, Some(&[TimePeriod(5)])).unwrap().ciphertexts.len(), 1);
    }
}
