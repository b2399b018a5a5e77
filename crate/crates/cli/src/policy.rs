use std::path::{Path, PathBuf};
use std::str::FromStr;

use vaf_extract::agents::{AgentModelFile, TeamModel};

use crate::error::{CliError, CliResult};
use crate::run_dir::RunDir;

/// Where actions come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySpec {
    Scripted,
    GroundTruth,
    Model(PathBuf),
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "scripted" => Ok(PolicySpec::Scripted),
            "ground_truth" => Ok(PolicySpec::GroundTruth),
            "" | "model:" => Err("empty policy".into()),
            other => Ok(PolicySpec::Model(PathBuf::from(
                other.strip_prefix("model:").unwrap_or(other),
            ))),
        }
    }
}

impl PolicySpec {
    /// Name for manifests; model paths are covered by input hashes.
    pub fn kind(&self) -> &'static str {
        match self {
            PolicySpec::Scripted => "scripted",
            PolicySpec::GroundTruth => "ground_truth",
            PolicySpec::Model(_) => "model",
        }
    }
}

fn model_files(path: &Path) -> CliResult<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = std::fs::read_dir(path).map_err(|e| vaf_extract::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("agent_") && n.ends_with(".model.json"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::usage(format!(
            "{} holds no agent_*.model.json files",
            path.display()
        )));
    }
    Ok(files)
}

/// Loads a model file, or every `agent_*.model.json` in a directory, as one
/// team, recording the files read.
pub fn load_team(path: &Path, run: &mut RunDir) -> CliResult<TeamModel> {
    if !path.exists() {
        return Err(CliError::usage(format!(
            "{} does not exist",
            path.display()
        )));
    }
    let files = model_files(path)?;
    for file in &files {
        let (_, catalog) = AgentModelFile::read(file)?;
        run.input(file)?;
        run.input(&catalog)?;
    }
    Ok(TeamModel::load_decentralized(&files)?)
}
