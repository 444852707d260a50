use anyhow::{bail, Context, Result};
use rsibe::analysis::{demonstrate_rollback, reproduce_failure, size_census, CellOutcome};
use rsibe::artifact::StateFile;
use rsibe::group::{BackendConfig, BackendKind, Group, PairingBackend, ScalarSource};
use rsibe::scheme::{
    decrypt, derive_dk, encrypt, gen_key, message_from_seed, revoke, setup, update_ct, update_key,
    Ciphertext, DecryptionKey, KeyUpdate, MasterKey, PrivateKey, PublicParams,
};
use rsibe::{SchemeVariant, TimePeriod};
use sha2::{Digest, Sha256};

use crate::workspace::{check_name, ct_file, dk_file, ku_file, report_file, sk_file, MK, PP, STATE};
use crate::{Command, Ctx};

/// Short stable handle for a GT element.
fn fingerprint<G: Group>(x: &G) -> String {
    hex::encode(&Sha256::digest(x.to_bytes())[..8])
}

impl Ctx {
    /// The scalar stream of one command. Each command hashes its own
    /// context string into the master seed.
    fn source<B: PairingBackend>(&self, context: &str, pp: Option<&PublicParams<B>>) -> ScalarSource {
        let src = ScalarSource::for_operation(&self.seed, context);
        let recorded = pp.is_some_and(|pp| pp.backend.mock_trace);
        if B::KIND == BackendKind::Mock && (self.trace || recorded) {
            src.traced()
        } else {
            src
        }
    }

    fn check_variant(&self, ct: &Ciphertext<impl PairingBackend>, file: &str) -> Result<()> {
        if let Some(v) = self.variant.filter(|v| *v != ct.variant) {
            bail!("{file} holds a {} ciphertext but --variant {v} was given", ct.variant);
        }
        Ok(())
    }

    fn variant_or(&self, default: SchemeVariant) -> SchemeVariant {
        self.variant.unwrap_or(default)
    }
}

pub fn run<B: PairingBackend>(ctx: &Ctx, command: &Command) -> Result<()> {
    let ws = &ctx.ws;
    match command {
        Command::Setup { n_max, t_max, lambda } => {
            let config = BackendConfig { kind: B::KIND, security_parameter: *lambda, mock_trace: ctx.trace };
            let mut src = ctx.source::<B>("setup", None);
            let (mk, pp, tree, revocations) = setup::<B>(config, *n_max, *t_max, &mut src)?;
            let trace = src.trace();
            ws.store::<B, _>(PP, &pp, trace)?;
            ws.store::<B, _>(MK, &mk, trace)?;
            ws.store::<B, _>(STATE, &StateFile { tree, revocations }, trace)?;
            println!("setup: {} backend, N_max = {n_max}, T_max = {t_max}; wrote {PP}, {MK}, {STATE}", B::KIND);
        }
        Command::Keygen { id } => {
            let pp = ws.load_params::<B>()?;
            let mk: MasterKey<B> = ws.load(MK, &pp)?;
            let mut state: StateFile<B> = ws.load(STATE, &pp)?;
            let mut src = ctx.source(&format!("keygen:{id}"), Some(&pp));
            let sk = gen_key(id, &mk, &mut state.tree, &pp, &mut src)?;
            ws.store::<B, _>(&sk_file(id), &sk, src.trace())?;
            ws.store::<B, _>(STATE, &state, None)?;
            println!("keygen: {id} holds leaf {}; wrote {}", sk.leaf, sk_file(id));
        }
        Command::Revoke { id, t } => {
            let pp = ws.load_params::<B>()?;
            let mut state: StateFile<B> = ws.load(STATE, &pp)?;
            revoke(id, TimePeriod(*t), &mut state.revocations, &state.tree, &pp)?;
            ws.store::<B, _>(STATE, &state, None)?;
            println!("revoke: {id} from t = {t}");
        }
        Command::UpdateKey { t } => {
            let t = TimePeriod(*t);
            let pp = ws.load_params::<B>()?;
            let mk: MasterKey<B> = ws.load(MK, &pp)?;
            let mut state: StateFile<B> = ws.load(STATE, &pp)?;
            let mut src = ctx.source(&format!("update-key:{t}"), Some(&pp));
            let ku = update_key(t, &state.revocations, &mk, &mut state.tree, &pp, &mut src)?;
            ws.store::<B, _>(&ku_file(t), &ku, src.trace())?;
            ws.store::<B, _>(STATE, &state, None)?;
            let nodes: Vec<String> = ku.entries.keys().map(|x| x.display()).collect();
            println!("update-key: t = {t} covers [{}]; wrote {}", nodes.join(", "), ku_file(t));
        }
        Command::DeriveDk { id, t } => {
            let t = TimePeriod(*t);
            let pp = ws.load_params::<B>()?;
            let sk: PrivateKey<B> = ws.load(&sk_file(id), &pp)?;
            let ku: KeyUpdate<B> = ws.load(&ku_file(t), &pp)?;
            let mut src = ctx.source(&format!("derive-dk:{id}:{t}"), Some(&pp));
            let dk = derive_dk(&sk, &ku, &pp, &mut src).with_context(|| format!("{id} at t = {t}"))?;
            ws.store::<B, _>(&dk_file(id, t), &dk, src.trace())?;
            println!("derive-dk: wrote {}", dk_file(id, t));
        }
        Command::Encrypt { id, t, message, name } => {
            let t = TimePeriod(*t);
            let name = name.clone().unwrap_or_else(|| format!("{id}.{t}"));
            check_name(&name)?;
            let pp = ws.load_params::<B>()?;
            let variant = ctx.variant_or(SchemeVariant::CorrectedParallel);
            let m = message_from_seed::<B>(message);
            let mut src = ctx.source(&format!("encrypt:{name}"), Some(&pp));
            let ct = encrypt(&pp, id, t, &m, variant, ctx.mode, &mut src)?;
            ws.store::<B, _>(&ct_file(&name), &ct, src.trace())?;
            println!(
                "encrypt: message {message:?} ({}) for {id} at t = {t}, {variant}; wrote {}",
                fingerprint(&m),
                ct_file(&name)
            );
        }
        Command::UpdateCt { name, t, out } => {
            let t = TimePeriod(*t);
            let out = out.as_deref().unwrap_or(name);
            check_name(out)?;
            let pp = ws.load_params::<B>()?;
            let ct: Ciphertext<B> = ws.load(&ct_file(name), &pp)?;
            ctx.check_variant(&ct, &ct_file(name))?;
            let mut src = ctx.source(&format!("update-ct:{name}:{t}"), Some(&pp));
            let updated = update_ct(&ct, t, &pp, &mut src)?;
            ws.store::<B, _>(&ct_file(out), &updated, src.trace())?;
            println!("update-ct: {} from t = {} to t = {t}; wrote {}", ct_file(name), ct.t, ct_file(out));
        }
        Command::Decrypt { name, id, t, expect } => {
            let t = TimePeriod(*t);
            let pp = ws.load_params::<B>()?;
            let ct: Ciphertext<B> = ws.load(&ct_file(name), &pp)?;
            ctx.check_variant(&ct, &ct_file(name))?;
            let dk: DecryptionKey<B> = ws.load(&dk_file(id, t), &pp)?;
            let mut src = ctx.source(&format!("decrypt:{name}:{id}:{t}"), Some(&pp));
            let out = decrypt(&ct, &dk, &pp, &mut src)?;
            println!("decrypt: {} with {} gives {}", ct_file(name), dk_file(id, t), fingerprint(&out));
            if let Some(seed) = expect {
                if out != message_from_seed::<B>(seed) {
                    bail!("wrong result: output is not the message {seed:?}");
                }
                println!("recovered message {seed:?}");
            }
        }
        Command::DemoFailure { n, ell } => {
            let variant = ctx.variant_or(SchemeVariant::WeiOriginal);
            let report = reproduce_failure::<B>(*n, *ell, ctx.seed, variant, ctx.mode)?;
            print!("{}", report.render_matrix());
            if let Some(holds) = report.residuals_hold() {
                let checked = report.residual_checks.as_ref().map_or(0, Vec::len);
                println!("residual checks: {checked} cells, {}", if holds { "all exact" } else { "MISMATCH" });
            }
            if let Some(met) = report.expectation_met {
                println!("expected pattern: {}", if met { "yes" } else { "no" });
            }
            let file = report_file(&format!("failure.{}.{}", variant.name(), ctx.mode.name()));
            ws.write(&file, &to_pretty(&report))?;
            println!("wrote {file}");
            let diagonal = report
                .cells
                .iter()
                .filter(|c| c.t == c.t_prime && c.outcome == CellOutcome::MessageRecovered)
                .count();
            println!("diagonal recovered: {diagonal}/{}", 1u64 << ell);
        }
        Command::DemoAttack { n, ell, ct_t, target } => {
            let variant = ctx.variant_or(SchemeVariant::NaiveSharedS);
            let report = demonstrate_rollback::<B>(*n, *ell, TimePeriod(*ct_t), TimePeriod(*target), ctx.seed, variant)?;
            let a = &report.attack;
            println!("rollback {variant}: ciphertext at t = {ct_t}, target t = {target}");
            if a.constructible {
                println!("forged leaf component:");
                for step in &a.transcript {
                    println!("  {} ^ {}", serde_json::to_string(&step.source)?, step.coefficient);
                }
                println!("base: {}", a.base_source.as_deref().unwrap_or("-"));
            } else {
                println!("no combination of ciphertext elements reaches the target");
            }
            println!("victim revoked at ciphertext time: {}", a.victim_revoked_at_ct_time);
            println!("honest decryption with the old key rejected: {}", a.direct_decrypt_rejected);
            println!("message recovered: {}", a.recovered);
            for c in &report.controls {
                println!("control {}: constructible {}, recovered {}", c.variant, c.constructible, c.recovered);
            }
            let file = report_file(&format!("attack.{}", variant.name()));
            ws.write(&file, &to_pretty(&report))?;
            println!("wrote {file}");
        }
        Command::Census { n, ell, t } => {
            let variant = ctx.variant_or(SchemeVariant::WeiOriginal);
            let times: Vec<TimePeriod> = t.iter().copied().map(TimePeriod).collect();
            let report = size_census(*n, *ell, variant, (!times.is_empty()).then_some(times.as_slice()))?;
            println!(
                "{variant}: private key {} entries ({} elements), key update {} per node, decryption key {}",
                report.private_key_entries,
                report.private_key_elements,
                report.key_update_elements_per_node,
                report.decryption_key_elements
            );
            for c in &report.ciphertexts {
                let nodes: Vec<String> = c.nodes.iter().map(|s| s.node.display()).collect();
                println!(
                    "  t = {:>3}: {:>3} elements ({} G1, {} GT) over [{}]",
                    c.t,
                    c.total,
                    c.source_group,
                    c.target_group,
                    nodes.join(", ")
                );
            }
            println!("largest ciphertext: {}", report.max_ciphertext_total);
            let file = report_file(&format!("census.{}", variant.name()));
            ws.write(&file, &to_pretty(&report))?;
            println!("wrote {file}");
        }
    }
    Ok(())
}

fn to_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

