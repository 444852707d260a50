use proptest::prelude::*;
use rsibe::group::{BackendConfig, Group, PairingBackend, ScalarSource};
use rsibe::scheme::{
    decrypt, derive_dk, encrypt, gen_key, random_message, setup, update_ct, update_key, DecryptionKey,
    MasterKey, PrivateKey, PublicParams, SchemeError, SystemState,
};
use rsibe::trees::RevocationList;
use rsibe::{CurveBackend, DelegationMode, Identity, MockBackend, SchemeVariant, TimePeriod};

struct System<B: PairingBackend> {
    mk: MasterKey<B>,
    pp: PublicParams<B>,
    st: SystemState<B>,
    rl: RevocationList,
    src: ScalarSource,
    sk: PrivateKey<B>,
    id: Identity,
}

impl<B: PairingBackend> System<B> {
    fn new(seed: u64, ell: usize) -> Self {
        let mut src = ScalarSource::seeded(seed);
        let (mk, pp, mut st, rl) = setup::<B>(BackendConfig::for_backend::<B>(), 4, 1 << ell, &mut src).unwrap();
        let id = Identity::from_index(2, 2);
        let sk = gen_key(&id, &mk, &mut st, &pp, &mut src).unwrap();
        System { mk, pp, st, rl, src, sk, id }
    }

    fn dk(&mut self, t: u64) -> DecryptionKey<B> {
        let ku = update_key(TimePeriod(t), &self.rl, &self.mk, &mut self.st, &self.pp, &mut self.src).unwrap();
        derive_dk(&self.sk, &ku, &self.pp, &mut self.src).unwrap()
    }

    /// Encrypts at `t`, walks the update chain, decrypts at `tp`.
    fn round_trip(&mut self, variant: SchemeVariant, t: u64, chain: &[u64], tp: u64) -> Result<bool, SchemeError> {
        let m = random_message::<B>(&mut self.src);
        let mut ct = encrypt(&self.pp, &self.id, TimePeriod(t), &m, variant, DelegationMode::BitCorrected, &mut self.src)?;
        for &u in chain {
            ct = update_ct(&ct, TimePeriod(u), &self.pp, &mut self.src)?;
        }
        let dk = self.dk(tp);
        Ok(decrypt(&ct, &dk, &self.pp, &mut self.src)? == m)
    }
}

/// Sorted times `t <= chain... <= tp` within `2^ell`.
fn timeline(ell: usize) -> impl Strategy<Value = (u64, Vec<u64>, u64)> {
    prop::collection::vec(0..1u64 << ell, 2..6).prop_map(|mut v| {
        v.sort_unstable();
        let tp = v.pop().unwrap();
        let t = v.remove(0);
        (t, v, tp)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_variants_always_decrypt(seed in any::<u64>(), (t, chain, tp) in timeline(4)) {
        let mut sys = System::<MockBackend>::new(seed, 4);
        for variant in [SchemeVariant::NaiveSharedS, SchemeVariant::CorrectedParallel] {
            prop_assert!(sys.round_trip(variant, t, &chain, tp).unwrap(), "{}", variant);
        }
    }

    #[test]
    fn original_decrypts_only_without_moving(seed in any::<u64>(), (t, chain, tp) in timeline(4)) {
        let mut sys = System::<MockBackend>::new(seed, 4);
        let moved = chain.last().copied().unwrap_or(t) != t || tp != t;
        prop_assert_eq!(sys.round_trip(SchemeVariant::WeiOriginal, t, &chain, tp).unwrap(), !moved);
    }

    #[test]
    fn older_keys_are_rejected(seed in any::<u64>(), a in 0u64..16, b in 0u64..16) {
        prop_assume!(a != b);
        let (tp, t) = (a.min(b), a.max(b));
        let mut sys = System::<MockBackend>::new(seed, 4);
        for variant in SchemeVariant::ALL {
            prop_assert_eq!(sys.round_trip(variant, t, &[], tp), Err(SchemeError::Rejected));
        }
    }
}

#[test]
fn curve_backend_agrees_on_a_few_timelines() {
    let mut curve = System::<CurveBackend>::new(5, 2);
    let mut mock = System::<MockBackend>::new(5, 2);
    for (variant, t, chain, tp) in [
        (SchemeVariant::WeiOriginal, 0, vec![], 0),
        (SchemeVariant::WeiOriginal, 0, vec![], 3),
        (SchemeVariant::NaiveSharedS, 1, vec![2], 3),
        (SchemeVariant::CorrectedParallel, 0, vec![1, 2], 2),
    ] {
        let c = curve.round_trip(variant, t, &chain, tp).unwrap();
        assert_eq!(c, mock.round_trip(variant, t, &chain, tp).unwrap());
        assert_eq!(c, variant != SchemeVariant::WeiOriginal || tp == t);
    }
}

#[test]
fn decryption_key_shape_in_exponents() {
    let mut src = ScalarSource::seeded(9).traced();
    let (mk, pp, mut st, rl) = setup::<MockBackend>(BackendConfig::mock_traced(), 4, 4, &mut src).unwrap();
    let id = Identity::from_index(1, 2);
    let sk = gen_key(&id, &mk, &mut st, &pp, &mut src).unwrap();
    let ku = update_key(TimePeriod(2), &rl, &mk, &mut st, &pp, &mut src).unwrap();
    let dk = derive_dk(&sk, &ku, &pp, &mut src).unwrap();
    let tr = src.trace().unwrap();
    // the root is the only common node without revocations
    let r0 = tr.last("gen_key[01].r_x0[]").unwrap() + tr.last("derive_dk.r0").unwrap();
    let r1 = tr.last("update_key[2].r_x1[]").unwrap() + tr.last("derive_dk.r1").unwrap();
    let g = pp.g.g2.dlog();
    assert_eq!(dk.d2.dlog(), r0 * g);
    assert_eq!(dk.d3.dlog(), r1 * g);
    let f_u = pp.f_u_g2(&id).unwrap().dlog();
    let f_h = pp.f_h_g2(TimePeriod(2)).unwrap().dlog();
    assert_eq!(dk.d1.dlog(), mk.msk.dlog() + r0 * f_u + r1 * f_h);
    assert!(!dk.d1.is_identity());
}
