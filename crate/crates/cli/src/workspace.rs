use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rsibe::artifact::{self, Artifact, Header};
use rsibe::group::{PairingBackend, Trace};
use rsibe::scheme::PublicParams;
use rsibe::{Identity, TimePeriod};

pub const PP: &str = "pp.json";
pub const MK: &str = "mk.json";
pub const STATE: &str = "state.json";

pub fn sk_file(id: &Identity) -> String {
    format!("sk.{id}.json")
}

pub fn ku_file(t: TimePeriod) -> String {
    format!("ku.{t}.json")
}

pub fn dk_file(id: &Identity, t: TimePeriod) -> String {
    format!("dk.{id}.{t}.json")
}

pub fn ct_file(name: &str) -> String {
    format!("ct.{name}.json")
}

pub fn report_file(name: &str) -> String {
    format!("reports/{name}.json")
}

/// Ciphertext names end up in file names.
pub fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) {
        bail!("invalid ciphertext name {name:?}: use letters, digits, '.', '_' and '-'");
    }
    Ok(())
}

/// A directory of artifact files.
pub struct Workspace {
    dir: PathBuf,
}

impl Workspace {
    pub fn new(dir: &Path) -> Self {
        Workspace { dir: dir.to_path_buf() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn read(&self, name: &str) -> Result<String> {
        let path = self.path(name);
        fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))
    }

    pub fn write(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn header(&self, name: &str) -> Result<Header> {
        artifact::read_header(&self.read(name)?).with_context(|| format!("in {name}"))
    }

    pub fn load_params<B: PairingBackend>(&self) -> Result<PublicParams<B>> {
        artifact::params_from_json(&self.read(PP)?).with_context(|| format!("in {PP}"))
    }

    pub fn load<B: PairingBackend, A: Artifact<B>>(&self, name: &str, pp: &PublicParams<B>) -> Result<A> {
        let (value, _) = artifact::from_json::<B, A>(&self.read(name)?, pp).with_context(|| format!("in {name}"))?;
        Ok(value)
    }

    pub fn store<B: PairingBackend, A: Artifact<B>>(&self, name: &str, value: &A, trace: Option<&Trace>) -> Result<()> {
        self.write(name, &artifact::to_json::<B, A>(value, trace))
    }
}
