//! Run manifests: what was run, with which settings, on which bytes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::commands::{self, AugmentArgs, ClassifyArgs, EvalArgs, Phase1Args, Phase2Args, VocabArgs};
use crate::{CliError, Context};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Fully resolved settings, defaults included.
    pub config: Value,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_secs: f64,
}

pub fn digest(path: &Path) -> anyhow::Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// Re-runs a manifest's command and checks every output byte for byte.
pub fn replay(path: &Path) -> Result<(), CliError> {
    let m = RunManifest::load(path)?;
    for input in &m.inputs {
        let now = digest(&input.path)?;
        if now.sha256 != input.sha256 {
            return Err(anyhow!("input {} changed since the run was recorded", input.path.display()).into());
        }
    }
    let inner = Context {
        jobs: m.jobs,
        manifest: None,
        show_config: false,
        write_manifest: false,
    };
    let cfg = m.config.clone();
    let outputs = match m.command.as_str() {
        "vocab" => commands::replay_as::<VocabArgs>(cfg, &inner)?,
        "phase1" => commands::replay_as::<Phase1Args>(cfg, &inner)?,
        "phase2" => commands::replay_as::<Phase2Args>(cfg, &inner)?,
        "eval" => commands::replay_as::<EvalArgs>(cfg, &inner)?,
        "augment" => commands::replay_as::<AugmentArgs>(cfg, &inner)?,
        "classify" => commands::replay_as::<ClassifyArgs>(cfg, &inner)?,
        other => return Err(anyhow!("unknown command `{other}` in manifest").into()),
    };
    let fresh: Vec<FileDigest> = outputs.iter().map(|p| digest(p)).collect::<anyhow::Result<_>>()?;
    for (old, new) in m.outputs.iter().zip(&fresh) {
        if old != new {
            return Err(anyhow!("output {} differs from the recorded run", old.path.display()).into());
        }
    }
    if fresh.len() != m.outputs.len() {
        return Err(anyhow!("replay produced a different set of outputs").into());
    }
    println!("replay ok: {} outputs reproduced", fresh.len());
    Ok(())
}
