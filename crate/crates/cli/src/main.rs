//! `rsibe`: command-line driver for the RS-IBE scheme and its analyses.

mod commands;
mod workspace;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::RngCore;
use rsibe::group::BackendKind;
use rsibe::{CurveBackend, DelegationMode, Identity, MockBackend, SchemeVariant};
use sha2::{Digest, Sha256};

use crate::workspace::{Workspace, PP};

#[derive(Parser)]
#[command(name = "rsibe", version, about = "Revocable-storage identity-based encryption")]
struct Cli {
    /// Directory holding the artifact files.
    #[arg(long, global = true, default_value = ".")]
    workspace: PathBuf,
    /// Group backend; defaults to the one recorded in pp.json, or mock.
    #[arg(long, global = true)]
    backend: Option<BackendArg>,
    /// Ciphertext variant for encrypt and the demos; checked against loaded ciphertexts.
    #[arg(long, global = true)]
    variant: Option<VariantArg>,
    /// Delegation rule used by ciphertext updates.
    #[arg(long, global = true, default_value = "bit-corrected")]
    mode: ModeArg,
    /// Master seed in hex. 32 bytes are used as is, other lengths are hashed.
    /// Without a seed every command draws fresh OS randomness.
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<[u8; 32]>,
    /// Embed exponent traces in written artifacts (mock backend only).
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Create pp.json, mk.json and state.json.
    Setup {
        #[arg(long, default_value_t = 8)]
        n_max: u64,
        #[arg(long, default_value_t = 16)]
        t_max: u64,
        /// Security parameter in bits.
        #[arg(long, default_value_t = 128)]
        lambda: u32,
    },
    /// Issue a private key: sk.<id>.json.
    Keygen {
        #[arg(long)]
        id: Identity,
    },
    /// Revoke an identity from time t on.
    Revoke {
        #[arg(long)]
        id: Identity,
        #[arg(long)]
        t: u64,
    },
    /// Publish the key update for time t: ku.<t>.json.
    UpdateKey {
        #[arg(long)]
        t: u64,
    },
    /// Combine sk.<id> and ku.<t> into dk.<id>.<t>.json.
    DeriveDk {
        #[arg(long)]
        id: Identity,
        #[arg(long)]
        t: u64,
    },
    /// Encrypt the message derived from a seed string: ct.<name>.json.
    Encrypt {
        #[arg(long)]
        id: Identity,
        #[arg(long)]
        t: u64,
        /// Seed string from which the GT message is derived.
        #[arg(long)]
        message: String,
        /// Defaults to <id>.<t>.
        #[arg(long)]
        name: Option<String>,
    },
    /// Move ct.<name> forward to time t.
    UpdateCt {
        #[arg(long)]
        name: String,
        #[arg(long)]
        t: u64,
        /// Write to ct.<out>.json instead of overwriting.
        #[arg(long)]
        out: Option<String>,
    },
    /// Decrypt ct.<name> with dk.<id>.<t>.
    Decrypt {
        #[arg(long)]
        name: String,
        #[arg(long)]
        id: Identity,
        #[arg(long)]
        t: u64,
        /// Fail unless the output equals the message derived from this seed.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Decryption outcome for every pair t <= t'; reports/failure.<variant>.<mode>.json.
    DemoFailure {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        ell: usize,
    },
    /// Roll a ciphertext back to an earlier time; reports/attack.<variant>.json.
    DemoAttack {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        ell: usize,
        #[arg(long, default_value_t = 3)]
        ct_t: u64,
        #[arg(long, default_value_t = 0)]
        target: u64,
    },
    /// Element counts of keys and ciphertexts; reports/census.<variant>.json.
    Census {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        ell: usize,
        /// Times to list; every period when omitted.
        #[arg(long)]
        t: Vec<u64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Mock,
    Curve,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Wei,
    Naive,
    Corrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Verbatim,
    BitCorrected,
}

fn parse_seed(s: &str) -> Result<[u8; 32], String> {
    let bytes = hex::decode(s).map_err(|e| format!("seed is not hex: {e}"))?;
    Ok(match <[u8; 32]>::try_from(bytes.as_slice()) {
        Ok(seed) => seed,
        Err(_) => Sha256::digest(&bytes).into(),
    })
}

/// Options shared by every command.
pub struct Ctx {
    pub ws: Workspace,
    pub variant: Option<SchemeVariant>,
    pub mode: DelegationMode,
    pub seed: [u8; 32],
    pub trace: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let ws = Workspace::new(&cli.workspace);
    let flag = cli.backend.map(|b| match b {
        BackendArg::Mock => BackendKind::Mock,
        BackendArg::Curve => BackendKind::Curve,
    });
    let uses_workspace_params = !matches!(
        cli.command,
        Command::Setup { .. } | Command::DemoFailure { .. } | Command::DemoAttack { .. } | Command::Census { .. }
    );
    let backend = if uses_workspace_params {
        let recorded = ws.header(PP)?.backend;
        if let Some(flag) = flag.filter(|f| *f != recorded) {
            bail!("--backend {flag} does not match the {recorded} backend recorded in {PP}");
        }
        recorded
    } else {
        flag.unwrap_or(BackendKind::Mock)
    };
    let seed = cli.seed.unwrap_or_else(|| {
        let mut s = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut s);
        s
    });
    let ctx = Ctx {
        ws,
        variant: cli.variant.map(|v| match v {
            VariantArg::Wei => SchemeVariant::WeiOriginal,
            VariantArg::Naive => SchemeVariant::NaiveSharedS,
            VariantArg::Corrected => SchemeVariant::CorrectedParallel,
        }),
        mode: match cli.mode {
            ModeArg::Verbatim => DelegationMode::Verbatim,
            ModeArg::BitCorrected => DelegationMode::BitCorrected,
        },
        seed,
        trace: cli.trace,
    };
    if ctx.trace && backend == BackendKind::Curve {
        bail!("--trace is only available on the mock backend");
    }
    match backend {
        BackendKind::Mock => commands::run::<MockBackend>(&ctx, &cli.command),
        BackendKind::Curve => commands::run::<CurveBackend>(&ctx, &cli.command),
    }
}
