//! Binary-tree machinery for revocation and time management.
//!
//! The revocation tree assigns each identity a leaf and publishes key
//! updates on the complete-subtree cover of the non-revoked leaves. The time
//! tree maps period `t` to the leaf whose label is the big-endian bit string
//! of `t`; a ciphertext for `t` carries one component per node of
//! [`ct_nodes`], whose subtrees cover exactly the periods `t..2^l`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::IteratorRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {node} is not a leaf of a depth-{depth} tree")]
    InvalidNode { node: String, depth: usize },
    #[error("time period {t} outside [0, {t_max})")]
    InvalidTime { t: u64, t_max: u64 },
    #[error("revocation tree is full ({capacity} leaves)")]
    CapacityExceeded { capacity: u64 },
    #[error("identity {0} already has a leaf")]
    AlreadyAssigned(Identity),
    #[error("identity {0} has no leaf in the revocation tree")]
    UnknownIdentity(Identity),
    #[error("identity {0} is already revoked")]
    AlreadyRevoked(Identity),
    #[error("no candidate is a prefix of {0}")]
    NoAncestor(NodeLabel),
    #[error("several candidates are prefixes of {0}")]
    AmbiguousAncestor(NodeLabel),
    #[error("malformed bit string {0:?}")]
    MalformedBits(String),
    #[error("tree depth {0} is not supported (max 63)")]
    UnsupportedDepth(usize),
}

fn parse_bits(s: &str) -> Result<Vec<bool>, TreeError> {
    if s == "ε" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(TreeError::MalformedBits(s.to_owned())),
        })
        .collect()
}

fn bits_of(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

fn write_bits(bits: &[bool], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for &b in bits {
        f.write_str(if b { "1" } else { "0" })?;
    }
    Ok(())
}

/// A node addressed by the bits on the path from the root (`0` = left).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeLabel {
    bits: Vec<bool>,
}

impl NodeLabel {
    pub fn root() -> Self {
        NodeLabel { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        NodeLabel { bits }
    }

    /// Leaf `index` of a tree of the given depth.
    pub fn leaf(index: u64, depth: usize) -> Self {
        NodeLabel { bits: bits_of(index, depth) }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn depth(&self) -> usize {
        self.bits.len()
    }

    pub fn is_root(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit `j` counted from 1, as in `b_v[j]`.
    pub fn bit(&self, j: usize) -> bool {
        self.bits[j - 1]
    }

    pub fn is_prefix_of(&self, other: &NodeLabel) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn parent(&self) -> Option<NodeLabel> {
        if self.is_root() {
            None
        } else {
            Some(NodeLabel { bits: self.bits[..self.bits.len() - 1].to_vec() })
        }
    }

    pub fn child(&self, bit: bool) -> NodeLabel {
        let mut bits = self.bits.clone();
        bits.push(bit);
        NodeLabel { bits }
    }

    pub fn left_child(&self) -> NodeLabel {
        self.child(false)
    }

    pub fn right_child(&self) -> NodeLabel {
        self.child(true)
    }

    /// Index among nodes of the same depth (left to right).
    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    /// Leaf indices of a depth-`depth` tree under this node.
    pub fn leaf_range(&self, depth: usize) -> std::ops::Range<u64> {
        let span = depth - self.depth();
        let start = self.index() << span;
        start..start + (1u64 << span)
    }

    /// Text form used in reports, with `ε` for the root.
    pub fn display(&self) -> String {
        if self.is_root() {
            "ε".to_owned()
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(&self.bits, f)
    }
}

impl fmt::Debug for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeLabel({})", self.display())
    }
}

impl FromStr for NodeLabel {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bits(s).map(NodeLabel::from_bits)
    }
}

impl Serialize for NodeLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Time period `t` in `[0, 2^l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimePeriod(pub u64);

impl TimePeriod {
    pub fn check(self, depth: usize) -> Result<Self, TreeError> {
        let t_max = 1u64 << depth;
        if self.0 < t_max {
            Ok(self)
        } else {
            Err(TreeError::InvalidTime { t: self.0, t_max })
        }
    }

    /// `v_T`: the `depth`-bit big-endian encoding of `t`.
    pub fn leaf_label(self, depth: usize) -> NodeLabel {
        NodeLabel::leaf(self.0, depth)
    }
}

impl fmt::Display for TimePeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An identity is an `n`-bit string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identity {
    bits: Vec<bool>,
}

impl Identity {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Identity { bits }
    }

    pub fn from_index(value: u64, n: usize) -> Self {
        Identity { bits: bits_of(value, n) }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `ID[i]`, counted from 1.
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i - 1]
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(&self.bits, f)
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Identity({self})")
    }
}

impl FromStr for Identity {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" {
            return Err(TreeError::MalformedBits(s.to_owned()));
        }
        parse_bits(s).map(Identity::from_bits)
    }
}

impl Serialize for Identity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Identity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Root-to-leaf chain of a leaf in a depth-`depth` tree, inclusive.
pub fn path(leaf: &NodeLabel, depth: usize) -> Result<Vec<NodeLabel>, TreeError> {
    if leaf.depth() != depth {
        return Err(TreeError::InvalidNode { node: leaf.display(), depth });
    }
    Ok((0..=depth).map(|k| NodeLabel::from_bits(leaf.bits[..k].to_vec())).collect())
}

/// `RightSibling(Path(v_T)) \ Path(Parent(v_T)) ∪ {v_T}`.
///
/// `RightSibling(S)` maps every non-root `v` in `S` to the right child of
/// its parent; the root contributes nothing.
pub fn ct_nodes(depth: usize, t: TimePeriod) -> Result<BTreeSet<NodeLabel>, TreeError> {
    let t = t.check(depth)?;
    let leaf = t.leaf_label(depth);
    let leaf_path = path(&leaf, depth)?;
    let right_siblings: BTreeSet<NodeLabel> = leaf_path
        .iter()
        .filter_map(NodeLabel::parent)
        .map(|p| p.right_child())
        .collect();
    let parent_path: BTreeSet<NodeLabel> = match leaf.parent() {
        Some(parent) => leaf_path.iter().filter(|v| v.is_prefix_of(&parent)).cloned().collect(),
        None => BTreeSet::new(),
    };
    let mut out: BTreeSet<NodeLabel> = right_siblings.difference(&parent_path).cloned().collect();
    out.insert(leaf);
    Ok(out)
}

/// `{v | Parent(v) ∈ Path(v_T), v ∉ Path(v_T)} ∪ {v_T}`.
///
/// Kept for comparison with [`ct_nodes`]: the left siblings in this set
/// cover periods before `t`.
pub fn ct_nodes_wei(depth: usize, t: TimePeriod) -> Result<BTreeSet<NodeLabel>, TreeError> {
    let t = t.check(depth)?;
    let leaf = t.leaf_label(depth);
    let leaf_path = path(&leaf, depth)?;
    let on_path: BTreeSet<&NodeLabel> = leaf_path.iter().collect();
    let mut out = BTreeSet::new();
    for v in &leaf_path {
        if v.depth() == depth {
            continue;
        }
        for child in [v.left_child(), v.right_child()] {
            if !on_path.contains(&child) {
                out.insert(child);
            }
        }
    }
    out.insert(leaf);
    Ok(out)
}

/// The unique candidate that is a prefix of `target` (a node is its own prefix).
pub fn find_prefix_ancestor<'a, I>(candidates: I, target: &NodeLabel) -> Result<NodeLabel, TreeError>
where
    I: IntoIterator<Item = &'a NodeLabel>,
{
    let mut found: Option<&NodeLabel> = None;
    for c in candidates {
        if c.is_prefix_of(target) {
            if found.is_some() {
                return Err(TreeError::AmbiguousAncestor(target.clone()));
            }
            found = Some(c);
        }
    }
    found.cloned().ok_or_else(|| TreeError::NoAncestor(target.clone()))
}

/// Leaves of a depth-`depth` tree lying under any of `nodes`.
pub fn covered_leaves<'a, I>(nodes: I, depth: usize) -> BTreeSet<u64>
where
    I: IntoIterator<Item = &'a NodeLabel>,
{
    nodes.into_iter().flat_map(|v| v.leaf_range(depth)).collect()
}

/// How [`RevocationTree::assign_leaf`] picks a free leaf.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafPolicy {
    #[default]
    FirstFree,
    Random,
}

/// The revocation tree `BT` plus lazily created per-node secrets of type `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevocationTree<S> {
    depth: usize,
    #[serde(default)]
    policy: LeafPolicy,
    assignments: BTreeMap<Identity, u64>,
    node_secrets: BTreeMap<NodeLabel, S>,
}

impl<S> RevocationTree<S> {
    pub fn new(depth: usize) -> Result<Self, TreeError> {
        Self::with_policy(depth, LeafPolicy::FirstFree)
    }

    pub fn with_policy(depth: usize, policy: LeafPolicy) -> Result<Self, TreeError> {
        if depth > 63 {
            return Err(TreeError::UnsupportedDepth(depth));
        }
        Ok(RevocationTree { depth, policy, assignments: BTreeMap::new(), node_secrets: BTreeMap::new() })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn capacity(&self) -> u64 {
        1u64 << self.depth
    }

    pub fn policy(&self) -> LeafPolicy {
        self.policy
    }

    pub fn leaf_of(&self, id: &Identity) -> Option<u64> {
        self.assignments.get(id).copied()
    }

    pub fn assignments(&self) -> &BTreeMap<Identity, u64> {
        &self.assignments
    }

    /// Maps `id` to a free leaf according to the tree's policy. Leaves are
    /// never reassigned, even after revocation.
    pub fn assign_leaf<R: Rng>(&mut self, id: &Identity, rng: &mut R) -> Result<u64, TreeError> {
        if self.assignments.contains_key(id) {
            return Err(TreeError::AlreadyAssigned(id.clone()));
        }
        let capacity = self.capacity();
        if self.assignments.len() as u64 >= capacity {
            return Err(TreeError::CapacityExceeded { capacity });
        }
        let used: BTreeSet<u64> = self.assignments.values().copied().collect();
        let mut free = (0..capacity).filter(|leaf| !used.contains(leaf));
        let leaf = match self.policy {
            LeafPolicy::FirstFree => free.next(),
            LeafPolicy::Random => free.choose(rng),
        }
        .ok_or(TreeError::CapacityExceeded { capacity })?;
        self.assignments.insert(id.clone(), leaf);
        Ok(leaf)
    }

    pub fn node_secret(&self, node: &NodeLabel) -> Option<&S> {
        self.node_secrets.get(node)
    }

    /// Fetches the secret stored at `node`, creating it on first use.
    pub fn node_secret_or_insert_with<F: FnOnce() -> S>(&mut self, node: &NodeLabel, make: F) -> &S {
        self.node_secrets.entry(node.clone()).or_insert_with(make)
    }

    pub fn node_secrets(&self) -> &BTreeMap<NodeLabel, S> {
        &self.node_secrets
    }
}

/// Revocation records `(ID, T)`: `ID` is excluded from key updates at every
/// time `>= T`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RevocationList {
    entries: BTreeMap<Identity, TimePeriod>,
}

impl RevocationList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: Identity, t: TimePeriod) -> Result<(), TreeError> {
        if self.entries.contains_key(&id) {
            return Err(TreeError::AlreadyRevoked(id));
        }
        self.entries.insert(id, t);
        Ok(())
    }

    pub fn revoked_from(&self, id: &Identity) -> Option<TimePeriod> {
        self.entries.get(id).copied()
    }

    pub fn is_revoked_at(&self, id: &Identity, t: TimePeriod) -> bool {
        self.revoked_from(id).is_some_and(|from| from <= t)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Identity, &TimePeriod)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Complete-subtree cover of the leaves not revoked at `t`.
///
/// Marks the paths of all leaves revoked at or before `t`; the answer is
/// every unmarked child of a marked node, or the root if nothing is marked.
/// Leaves that were never assigned count as non-revoked.
pub fn ku_nodes<S>(tree: &RevocationTree<S>, rl: &RevocationList, t: TimePeriod) -> BTreeSet<NodeLabel> {
    let depth = tree.depth();
    let mut marked = BTreeSet::new();
    for (id, _) in rl.entries().filter(|(_, from)| **from <= t) {
        if let Some(leaf) = tree.leaf_of(id) {
            marked.extend(path(&NodeLabel::leaf(leaf, depth), depth).expect("leaf has tree depth"));
        }
    }
    if marked.is_empty() {
        return BTreeSet::from([NodeLabel::root()]);
    }
    let mut cover = BTreeSet::new();
    for x in marked.iter().filter(|x| x.depth() < depth) {
        for child in [x.left_child(), x.right_child()] {
            if !marked.contains(&child) {
                cover.insert(child);
            }
        }
    }
    cover
}
