use serde::{Deserialize, Serialize};

use super::{check_identity, check_time, Result, SchemeError};
use crate::group::{
    hex_elem, scalar::scalar_hex, BackendConfig, BackendKind, Group, GroupElem, GroupTag,
    PairingBackend, Scalar, ScalarSource,
};
use crate::trees::{Identity, NodeLabel, RevocationList, RevocationTree, TimePeriod};

/// One public base published in both source groups with the same discrete log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Dual<B: PairingBackend> {
    #[serde(with = "hex_elem")]
    pub g1: B::G1,
    #[serde(with = "hex_elem")]
    pub g2: B::G2,
}

impl<B: PairingBackend> Dual<B> {
    pub fn from_exponent(e: &Scalar) -> Self {
        Dual { g1: B::G1::generator().exp(e), g2: B::G2::generator().exp(e) }
    }

    fn is_consistent(&self) -> bool {
        B::pair(&self.g1, &B::G2::generator()) == B::pair(&B::G1::generator(), &self.g2)
    }
}

/// Ciphertext-side material lives in G1, key-side material in G2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PublicParams<B: PairingBackend> {
    pub backend: BackendConfig,
    /// Identity bit length; `N_max = 2^n`.
    pub n: usize,
    /// Time bit length; `T_max = 2^ell`.
    pub ell: usize,
    pub g: Dual<B>,
    /// `g^alpha`, ciphertext side.
    #[serde(with = "hex_elem")]
    pub g1: B::G1,
    #[serde(with = "hex_elem")]
    pub g2: B::G2,
    pub u: Vec<Dual<B>>,
    pub h: Vec<Dual<B>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MasterKey<B: PairingBackend> {
    /// `g_2^alpha`.
    #[serde(with = "hex_elem")]
    pub msk: B::G2,
    /// The master exponent; key generation raises per-node splits to it.
    #[serde(with = "scalar_hex")]
    pub alpha: Scalar,
}

/// Per-node split of `g_2` stored in the revocation tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NodeSplit<B: PairingBackend> {
    #[serde(with = "hex_elem")]
    pub g_x0: B::G2,
    #[serde(with = "hex_elem")]
    pub g_x1: B::G2,
}

/// The authority state `ST`.
pub type SystemState<B> = RevocationTree<NodeSplit<B>>;

impl<B: PairingBackend> PublicParams<B> {
    pub fn n_max(&self) -> u64 {
        1u64 << self.n
    }

    pub fn t_max(&self) -> u64 {
        1u64 << self.ell
    }

    /// `e(g_1, g_2)`.
    pub fn egg(&self) -> B::Gt {
        B::pair(&self.g1, &self.g2)
    }

    /// Indices `i` with a factor `u_i` in `F_u(ID)`: 0 and the set bits.
    fn f_u_indices(&self, id: &Identity) -> Result<Vec<usize>> {
        check_identity(id, self.n)?;
        Ok(std::iter::once(0).chain((1..=self.n).filter(|&i| id.bit(i))).collect())
    }

    /// `F_u(ID) = u_0 prod u_i^{ID[i]}` in G1.
    pub fn f_u_g1(&self, id: &Identity) -> Result<B::G1> {
        Ok(self.f_u_indices(id)?.into_iter().fold(B::G1::identity(), |acc, i| acc.op(&self.u[i].g1)))
    }

    /// `F_u(ID)` in G2.
    pub fn f_u_g2(&self, id: &Identity) -> Result<B::G2> {
        Ok(self.f_u_indices(id)?.into_iter().fold(B::G2::identity(), |acc, i| acc.op(&self.u[i].g2)))
    }

    pub fn f_u(&self, id: &Identity, side: GroupTag) -> Result<GroupElem<B>> {
        match side {
            GroupTag::G1 => Ok(GroupElem::G1(self.f_u_g1(id)?)),
            GroupTag::G2 => Ok(GroupElem::G2(self.f_u_g2(id)?)),
            GroupTag::Gt => Err(SchemeError::InvalidParameter("F_u lives in a source group".into())),
        }
    }

    /// `h_0 prod_{j <= |b|} h_j^{b[j]}` in G1 for a time-tree node.
    pub fn h_prefix_g1(&self, node: &NodeLabel) -> B::G1 {
        (1..=node.depth())
            .filter(|&j| node.bit(j))
            .fold(self.h[0].g1.clone(), |acc, j| acc.op(&self.h[j].g1))
    }

    pub fn h_prefix_g2(&self, node: &NodeLabel) -> B::G2 {
        (1..=node.depth())
            .filter(|&j| node.bit(j))
            .fold(self.h[0].g2.clone(), |acc, j| acc.op(&self.h[j].g2))
    }

    /// `F_h(T) = h_0 prod h_j^{T[j]}` in G1.
    pub fn f_h_g1(&self, t: TimePeriod) -> Result<B::G1> {
        let t = check_time(t, self.ell)?;
        Ok(self.h_prefix_g1(&t.leaf_label(self.ell)))
    }

    pub fn f_h_g2(&self, t: TimePeriod) -> Result<B::G2> {
        let t = check_time(t, self.ell)?;
        Ok(self.h_prefix_g2(&t.leaf_label(self.ell)))
    }

    pub fn f_h(&self, t: TimePeriod, side: GroupTag) -> Result<GroupElem<B>> {
        match side {
            GroupTag::G1 => Ok(GroupElem::G1(self.f_h_g1(t)?)),
            GroupTag::G2 => Ok(GroupElem::G2(self.f_h_g2(t)?)),
            GroupTag::Gt => Err(SchemeError::InvalidParameter("F_h lives in a source group".into())),
        }
    }

    /// Structural checks run on every load.
    pub fn validate(&self) -> Result<()> {
        let bad = |r: &str| Err(SchemeError::malformed("public parameters", r));
        if self.backend.kind != B::KIND {
            return bad(&format!("backend {} does not match {}", self.backend.kind, B::KIND));
        }
        if self.u.len() != self.n + 1 || self.h.len() != self.ell + 1 {
            return bad("base vector lengths do not match n and ell");
        }
        if self.n == 0 || self.ell == 0 || self.n > 63 || self.ell > 63 {
            return bad("n and ell must lie in 1..=63");
        }
        let duals = std::iter::once(&self.g).chain(&self.u).chain(&self.h);
        for d in duals {
            if d.g1.is_identity() || d.g2.is_identity() {
                return bad("identity element among the bases");
            }
            if !d.is_consistent() {
                return bad("G1 and G2 copies of a base disagree");
            }
        }
        if self.g1.is_identity() || self.g2.is_identity() {
            return bad("identity element among the bases");
        }
        Ok(())
    }
}

impl<B: PairingBackend> MasterKey<B> {
    /// `e(g_1, g_2) = e(g, MK)`.
    pub fn matches(&self, pp: &PublicParams<B>) -> bool {
        pp.egg() == B::pair(&pp.g.g1, &self.msk) && pp.g2.exp(&self.alpha) == self.msk
    }
}

fn log2_exact(x: u64, what: &str) -> Result<usize> {
    if x < 2 || !x.is_power_of_two() {
        return Err(SchemeError::InvalidParameter(format!("{what} = {x} must be a power of two >= 2")));
    }
    Ok(x.trailing_zeros() as usize)
}

/// `Setup(1^lambda, N_max, T_max)`.
///
/// Every base is sampled as a random exponent of the fixed generators, so
/// the G1 and G2 copies share a discrete log and both backends consume the
/// same draws.
pub fn setup<B: PairingBackend>(
    backend: BackendConfig,
    n_max: u64,
    t_max: u64,
    src: &mut ScalarSource,
) -> Result<(MasterKey<B>, PublicParams<B>, SystemState<B>, RevocationList)> {
    if backend.kind != B::KIND {
        return Err(SchemeError::InvalidParameter(format!(
            "backend config says {} but the scheme is instantiated with {}",
            backend.kind,
            B::KIND
        )));
    }
    if backend.kind == BackendKind::Curve {
        if backend.mock_trace {
            return Err(SchemeError::InvalidParameter("tracing is only available on the mock backend".into()));
        }
        if backend.security_parameter > 128 {
            return Err(SchemeError::InvalidParameter(format!(
                "BLS12-381 does not reach {} bits of security",
                backend.security_parameter
            )));
        }
    }
    let n = log2_exact(n_max, "N_max")?;
    let ell = log2_exact(t_max, "T_max")?;
    if n > 63 || ell > 63 {
        return Err(SchemeError::InvalidParameter("tree depth above 63".into()));
    }

    let g = Dual::<B>::from_exponent(&src.sample("setup.g"));
    let g2 = B::G2::generator().exp(&src.sample("setup.g2"));
    let alpha = src.sample("setup.alpha");
    let g1 = g.g1.exp(&alpha);
    let u = (0..=n).map(|i| Dual::from_exponent(&src.sample(&format!("setup.u[{i}]")))).collect();
    let h = (0..=ell).map(|j| Dual::from_exponent(&src.sample(&format!("setup.h[{j}]")))).collect();

    let mk = MasterKey { msk: g2.exp(&alpha), alpha };
    let pp = PublicParams { backend, n, ell, g, g1, g2, u, h };
    Ok((mk, pp, RevocationTree::new(n)?, RevocationList::new()))
}
