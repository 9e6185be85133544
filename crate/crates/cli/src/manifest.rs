//! Stage provenance: `manifest.json` in every output directory records, per
//! stage run, the config hash, tool version and SHA-256 digests of inputs
//! and outputs. Inputs produced by an earlier stage are checked against the
//! digest recorded when they were written.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct StageRecord {
    pub command: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Manifest, CliError> {
        let path = dir.join(MANIFEST_NAME);
        if !path.exists() {
            return Ok(Manifest {
                tool: "treeprobe".into(),
                ..Default::default()
            });
        }
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    /// Digest recorded for `file_name` by the stage that last wrote it.
    fn recorded_output(&self, file_name: &str) -> Option<(&str, &str)> {
        self.stages.iter().find_map(|(stage, rec)| {
            rec.outputs
                .get(file_name)
                .map(|d| (stage.as_str(), d.as_str()))
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Refuses inputs whose digest no longer matches the manifest of the
/// directory they were produced in, unless `force` is set.
pub fn check_fresh(path: &Path, force: bool) -> Result<String, CliError> {
    if !path.is_file() {
        return Err(CliError::input(format!(
            "input {} does not exist",
            path.display()
        )));
    }
    let digest = file_digest(path)?;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = file_name(path);
    let manifest = Manifest::load(dir)?;
    if let Some((stage, recorded)) = manifest.recorded_output(&name) {
        if recorded != digest {
            let message = format!(
                "{} changed since stage {stage} wrote it (digest mismatch); rerun that stage or pass --force",
                path.display()
            );
            if !force {
                return Err(CliError::input(message));
            }
            log::warn!("{message}");
        }
    }
    Ok(digest)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Outputs of one stage, staged in temporary files and renamed into place
/// together on commit. Dropping an uncommitted set removes the temporaries.
pub struct OutputSet {
    dir: PathBuf,
    pending: Vec<(String, NamedTempFile, String)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
        Ok(OutputSet {
            dir: dir.to_owned(),
            pending: Vec::new(),
        })
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: &[u8]) -> Result<(), CliError> {
        let name = name.into();
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(CliError::internal)?;
        tmp.write_all(bytes).map_err(CliError::internal)?;
        tmp.flush().map_err(CliError::internal)?;
        self.pending.push((name, tmp, sha256_hex(bytes)));
        Ok(())
    }

    /// Move every output into place and record the stage in the manifest.
    pub fn commit(
        self,
        stage_key: &str,
        command: &str,
        config: &serde_json::Value,
        inputs: BTreeMap<String, String>,
    ) -> Result<Vec<PathBuf>, CliError> {
        let mut manifest = Manifest::load(&self.dir)?;
        let mut outputs = BTreeMap::new();
        let mut written = Vec::new();
        for (name, tmp, digest) in self.pending {
            let target = self.dir.join(&name);
            tmp.persist(&target)
                .map_err(|e| CliError::internal(e.error))?;
            outputs.insert(name, digest);
            written.push(target);
        }
        let config_json = serde_json::to_string(config).expect("config serializes");
        let record = StageRecord {
            command: command.to_owned(),
            config_hash: sha256_hex(config_json.as_bytes()),
            config: config.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            inputs,
            outputs,
        };
        manifest.tool = "treeprobe".into();
        manifest.stages.insert(stage_key.to_owned(), record);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(CliError::internal)?;
        tmp.write_all(text.as_bytes()).map_err(CliError::internal)?;
        tmp.write_all(b"\n").map_err(CliError::internal)?;
        tmp.persist(self.dir.join(MANIFEST_NAME))
            .map_err(|e| CliError::internal(e.error))?;
        Ok(written)
    }
}
