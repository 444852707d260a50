use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::{MasterKey, NodeSplit, PublicParams, SystemState};
use super::{check_identity, check_time, label_of, Result, SchemeError};
use crate::group::{hex_elem, Group, PairingBackend, ScalarSource};
use crate::trees::{ku_nodes, path, Identity, NodeLabel, RevocationList, TimePeriod, TreeError};

/// A pair of G2 elements attached to a revocation-tree node:
/// `(K_{x,0}, K_{x,1})` in a private key, `(U_{x,0}, U_{x,1})` in a key update.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KeyPair<B: PairingBackend> {
    #[serde(with = "hex_elem")]
    pub k0: B::G2,
    #[serde(with = "hex_elem")]
    pub k1: B::G2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PrivateKey<B: PairingBackend> {
    pub id: Identity,
    pub leaf: u64,
    pub entries: BTreeMap<NodeLabel, KeyPair<B>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KeyUpdate<B: PairingBackend> {
    pub t: TimePeriod,
    pub entries: BTreeMap<NodeLabel, KeyPair<B>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DecryptionKey<B: PairingBackend> {
    pub id: Identity,
    pub t: TimePeriod,
    #[serde(with = "hex_elem")]
    pub d1: B::G2,
    #[serde(with = "hex_elem")]
    pub d2: B::G2,
    #[serde(with = "hex_elem")]
    pub d3: B::G2,
}

impl<B: PairingBackend> PrivateKey<B> {
    pub fn validate(&self, pp: &PublicParams<B>) -> Result<()> {
        check_identity(&self.id, pp.n)?;
        if self.leaf >= pp.n_max() {
            return Err(SchemeError::malformed("private key", "leaf index out of range"));
        }
        let expected = path(&NodeLabel::leaf(self.leaf, pp.n), pp.n)?;
        if !self.entries.keys().eq(expected.iter()) {
            return Err(SchemeError::malformed("private key", "entries are not the leaf's path"));
        }
        Ok(())
    }
}

impl<B: PairingBackend> KeyUpdate<B> {
    pub fn validate(&self, pp: &PublicParams<B>) -> Result<()> {
        check_time(self.t, pp.ell)?;
        if self.entries.keys().any(|x| x.depth() > pp.n) {
            return Err(SchemeError::malformed("key update", "node deeper than the revocation tree"));
        }
        Ok(())
    }
}

impl<B: PairingBackend> DecryptionKey<B> {
    pub fn validate(&self, pp: &PublicParams<B>) -> Result<()> {
        check_identity(&self.id, pp.n)?;
        check_time(self.t, pp.ell)?;
        Ok(())
    }
}

fn split_for<B: PairingBackend>(
    st: &mut SystemState<B>,
    node: &NodeLabel,
    pp: &PublicParams<B>,
    src: &mut ScalarSource,
) -> NodeSplit<B> {
    st.node_secret_or_insert_with(node, || {
        let g_x0 = B::G2::generator().exp(&src.sample(&label_of("split.g_x0", node)));
        let g_x1 = pp.g2.div(&g_x0);
        NodeSplit { g_x0, g_x1 }
    })
    .clone()
}

/// `GenKey(ID, MK, ST, PP)`: assigns a leaf and issues one key pair per
/// node on its path, creating node splits on first touch.
pub fn gen_key<B: PairingBackend>(
    id: &Identity,
    mk: &MasterKey<B>,
    st: &mut SystemState<B>,
    pp: &PublicParams<B>,
    src: &mut ScalarSource,
) -> Result<PrivateKey<B>> {
    check_identity(id, pp.n)?;
    let leaf = st.assign_leaf(id, src.rng())?;
    let f_u = pp.f_u_g2(id)?;
    let mut entries = BTreeMap::new();
    for x in path(&NodeLabel::leaf(leaf, pp.n), pp.n)? {
        let split = split_for(st, &x, pp, src);
        let r = src.sample(&label_of(&format!("gen_key[{id}].r_x0"), &x));
        let k0 = split.g_x0.exp(&mk.alpha).op(&f_u.exp(&r));
        let k1 = pp.g.g2.exp(&r);
        entries.insert(x, KeyPair { k0, k1 });
    }
    Ok(PrivateKey { id: id.clone(), leaf, entries })
}

/// `UpdateKey(T, RL, MK, ST, PP)` over the complete-subtree cover at `t`.
pub fn update_key<B: PairingBackend>(
    t: TimePeriod,
    rl: &RevocationList,
    mk: &MasterKey<B>,
    st: &mut SystemState<B>,
    pp: &PublicParams<B>,
    src: &mut ScalarSource,
) -> Result<KeyUpdate<B>> {
    let t = check_time(t, pp.ell)?;
    let f_h = pp.f_h_g2(t)?;
    let mut entries = BTreeMap::new();
    for x in ku_nodes(st, rl, t) {
        let split = split_for(st, &x, pp, src);
        let r = src.sample(&label_of(&format!("update_key[{t}].r_x1"), &x));
        let u0 = split.g_x1.exp(&mk.alpha).op(&f_h.exp(&r));
        let u1 = pp.g.g2.exp(&r);
        entries.insert(x, KeyPair { k0: u0, k1: u1 });
    }
    Ok(KeyUpdate { t, entries })
}

/// First node (root side) shared by the private key and the key update.
pub fn common_node<B: PairingBackend>(sk: &PrivateKey<B>, ku: &KeyUpdate<B>) -> Option<NodeLabel> {
    let mut on_path: Vec<&NodeLabel> = sk.entries.keys().collect();
    on_path.sort_by_key(|x| x.depth());
    on_path.into_iter().find(|x| ku.entries.contains_key(*x)).cloned()
}

/// `DeriveDK(SK_ID, KU_T, PP)`, re-randomized with fresh `r_0, r_1`.
pub fn derive_dk<B: PairingBackend>(
    sk: &PrivateKey<B>,
    ku: &KeyUpdate<B>,
    pp: &PublicParams<B>,
    src: &mut ScalarSource,
) -> Result<DecryptionKey<B>> {
    check_identity(&sk.id, pp.n)?;
    let t = check_time(ku.t, pp.ell)?;
    let x = common_node(sk, ku).ok_or(SchemeError::Revoked)?;
    let (k, u) = (&sk.entries[&x], &ku.entries[&x]);
    let r0 = src.sample("derive_dk.r0");
    let r1 = src.sample("derive_dk.r1");
    let d1 = k.k0
        .op(&u.k0)
        .op(&pp.f_u_g2(&sk.id)?.exp(&r0))
        .op(&pp.f_h_g2(t)?.exp(&r1));
    let d2 = k.k1.op(&pp.g.g2.exp(&r0));
    let d3 = u.k1.op(&pp.g.g2.exp(&r1));
    Ok(DecryptionKey { id: sk.id.clone(), t, d1, d2, d3 })
}

/// `Revoke(ID, T, RL, ST)`: records `(ID, T)`.
pub fn revoke<B: PairingBackend>(
    id: &Identity,
    t: TimePeriod,
    rl: &mut RevocationList,
    st: &SystemState<B>,
    pp: &PublicParams<B>,
) -> Result<()> {
    check_identity(id, pp.n)?;
    let t = check_time(t, pp.ell)?;
    if st.leaf_of(id).is_none() {
        return Err(TreeError::UnknownIdentity(id.clone()).into());
    }
    rl.insert(id.clone(), t)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{BackendConfig, MockBackend, Scalar};
    use crate::scheme::setup;

    type B = MockBackend;

    struct Fixture {
        mk: MasterKey<B>,
        pp: PublicParams<B>,
        st: SystemState<B>,
        rl: RevocationList,
        src: ScalarSource,
    }

    fn fixture(n_max: u64) -> Fixture {
        let mut src = ScalarSource::seeded(99).traced();
        let (mk, pp, st, rl) = setup::<B>(BackendConfig::mock_traced(), n_max, 8, &mut src).unwrap();
        Fixture { mk, pp, st, rl, src }
    }

    fn id(s: &str) -> Identity {
        s.parse().unwrap()
    }

    #[test]
    fn private_key_covers_path() {
        let mut f = fixture(4);
        let sk = gen_key(&id("01"), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        assert_eq!(sk.entries.len(), 3);
        sk.validate(&f.pp).unwrap();
        for split in f.st.node_secrets().values() {
            assert_eq!(split.g_x0.op(&split.g_x1), f.pp.g2);
        }
    }

    #[test]
    fn shared_nodes_reuse_splits() {
        let mut f = fixture(4);
        gen_key(&id("00"), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        let root_split = f.st.node_secret(&NodeLabel::root()).unwrap().clone();
        let before = f.st.node_secrets().len();
        gen_key(&id("01"), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        assert_eq!(f.st.node_secret(&NodeLabel::root()).unwrap(), &root_split);
        // leaves 0 and 1 share root and node "0"; only the new leaf is added
        assert_eq!(f.st.node_secrets().len(), before + 1);
    }

    #[test]
    fn key_structure_in_exponent_space() {
        let mut f = fixture(4);
        let who = id("10");
        let sk = gen_key(&who, &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        let trace = f.src.trace().unwrap().clone();
        let fu = f.pp.f_u_g2(&who).unwrap().dlog();
        for (x, kp) in &sk.entries {
            let g_x0 = f.st.node_secret(x).unwrap().g_x0.dlog();
            let r = trace.last(&label_of("gen_key[10].r_x0", x)).unwrap();
            assert_eq!(kp.k0.dlog(), g_x0 * f.mk.alpha + fu * r);
            assert_eq!(kp.k1.dlog(), f.pp.g.g2.dlog() * r);
        }

        let ku = update_key(TimePeriod(5), &f.rl, &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        assert_eq!(ku.entries.keys().collect::<Vec<_>>(), vec![&NodeLabel::root()]);
        let trace = f.src.trace().unwrap().clone();
        let fh = f.pp.f_h_g2(TimePeriod(5)).unwrap().dlog();
        let u = &ku.entries[&NodeLabel::root()];
        let g_x1 = f.st.node_secret(&NodeLabel::root()).unwrap().g_x1.dlog();
        let r = trace.last("update_key[5].r_x1[]").unwrap();
        assert_eq!(u.k0.dlog(), g_x1 * f.mk.alpha + fh * r);

        let dk = derive_dk(&sk, &ku, &f.pp, &mut f.src).unwrap();
        let trace = f.src.trace().unwrap().clone();
        let rho0 = trace.last("gen_key[10].r_x0[]").unwrap() + trace.last("derive_dk.r0").unwrap();
        let rho1 = r + trace.last("derive_dk.r1").unwrap();
        let g = f.pp.g.g2.dlog();
        assert_eq!(dk.d1.dlog(), f.mk.alpha * f.pp.g2.dlog() + rho0 * fu + rho1 * fh);
        assert_eq!(dk.d2.dlog(), g * rho0);
        assert_eq!(dk.d3.dlog(), g * rho1);
    }

    #[test]
    fn one_revoked_of_four_gives_two_entries() {
        let mut f = fixture(4);
        for s in ["00", "01", "10", "11"] {
            gen_key(&id(s), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        }
        revoke(&id("00"), TimePeriod(0), &mut f.rl, &f.st, &f.pp).unwrap();
        let ku = update_key(TimePeriod(0), &f.rl, &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        assert_eq!(ku.entries.len(), 2);
    }

    #[test]
    fn derivations_rerandomize() {
        let mut f = fixture(4);
        let sk = gen_key(&id("11"), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        let ku = update_key(TimePeriod(2), &f.rl, &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        let a = derive_dk(&sk, &ku, &f.pp, &mut f.src).unwrap();
        let b = derive_dk(&sk, &ku, &f.pp, &mut f.src).unwrap();
        assert_ne!(a.d1.to_bytes(), b.d1.to_bytes());
        // both keep the form D1 = g2^alpha F_u^rho0 F_h^rho1 with rho read off D2, D3
        for dk in [&a, &b] {
            let g = f.pp.g.g2.dlog();
            let rho0 = dk.d2.dlog() / g;
            let rho1 = dk.d3.dlog() / g;
            let expected: Scalar = f.mk.alpha * f.pp.g2.dlog()
                + rho0 * f.pp.f_u_g2(&sk.id).unwrap().dlog()
                + rho1 * f.pp.f_h_g2(TimePeriod(2)).unwrap().dlog();
            assert_eq!(dk.d1.dlog(), expected);
        }
    }

    #[test]
    fn revocation_effective_from_its_time() {
        let mut f = fixture(4);
        let who = id("01");
        let sk = gen_key(&who, &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        revoke(&who, TimePeriod(3), &mut f.rl, &f.st, &f.pp).unwrap();
        let ku2 = update_key(TimePeriod(2), &f.rl, &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        let ku3 = update_key(TimePeriod(3), &f.rl, &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        assert!(derive_dk(&sk, &ku2, &f.pp, &mut f.src).is_ok());
        assert_eq!(derive_dk(&sk, &ku3, &f.pp, &mut f.src), Err(SchemeError::Revoked));
    }

    #[test]
    fn revoke_guards() {
        let mut f = fixture(4);
        assert_eq!(
            revoke(&id("10"), TimePeriod(0), &mut f.rl, &f.st, &f.pp),
            Err(SchemeError::Tree(TreeError::UnknownIdentity(id("10"))))
        );
        gen_key(&id("10"), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        assert!(revoke(&id("10"), TimePeriod(8), &mut f.rl, &f.st, &f.pp).is_err());
    }

    #[test]
    fn keygen_capacity_and_reuse() {
        let mut f = fixture(2);
        gen_key(&id("0"), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        assert!(matches!(
            gen_key(&id("0"), &f.mk, &mut f.st, &f.pp, &mut f.src),
            Err(SchemeError::Tree(TreeError::AlreadyAssigned(_)))
        ));
        gen_key(&id("1"), &f.mk, &mut f.st, &f.pp, &mut f.src).unwrap();
        let mut g = fixture(2);
        gen_key(&id("0"), &g.mk, &mut g.st, &g.pp, &mut g.src).unwrap();
        gen_key(&id("1"), &g.mk, &mut g.st, &g.pp, &mut g.src).unwrap();
        // n = 1 admits only two identities, so a third is a length error first
        assert!(matches!(
            gen_key(&id("00"), &g.mk, &mut g.st, &g.pp, &mut g.src),
            Err(SchemeError::InvalidIdentity { .. })
        ));
    }
}
