//! Output directories with a manifest of input and output hashes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use vaf_extract::Error;

use crate::error::CliResult;

#[derive(Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    parameters: &'a BTreeMap<String, Value>,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}

fn base_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub struct RunDir {
    root: PathBuf,
    command: &'static str,
    parameters: BTreeMap<String, Value>,
    inputs: BTreeSet<(String, String)>,
    outputs: BTreeMap<String, String>,
}

impl RunDir {
    pub fn create(root: &Path, command: &'static str) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::Io {
            path: root.to_path_buf(),
            source: e,
        })?;
        Ok(RunDir {
            root: root.to_path_buf(),
            command,
            parameters: BTreeMap::new(),
            inputs: BTreeSet::new(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn param(&mut self, name: &str, value: impl Into<Value>) {
        self.parameters.insert(name.to_string(), value.into());
    }

    /// Records an input file by base name and content hash.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = read_file(path)?;
        self.inputs.insert((base_name(path), sha256_hex(&bytes)));
        Ok(())
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::Io {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
        std::fs::write(&path, contents).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        self.outputs
            .insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(self) -> CliResult<()> {
        let entries = |m: Vec<(String, String)>| {
            m.into_iter()
                .map(|(name, sha256)| FileEntry { name, sha256 })
                .collect()
        };
        let manifest = Manifest {
            command: self.command,
            parameters: &self.parameters,
            inputs: entries(self.inputs.into_iter().collect()),
            outputs: entries(self.outputs.into_iter().collect()),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.root.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
        Ok(())
    }
}
