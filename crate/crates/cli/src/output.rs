//! Artifact writing and the run manifest.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "both" => Ok(Format::Both),
            _ => Err(format!("format must be json, csv or both, got {s:?}")),
        }
    }
}

#[derive(Serialize)]
struct ArtifactEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a BTreeMap<String, String>,
    artifacts: Vec<ArtifactEntry>,
}

pub struct Artifacts {
    pub dir: PathBuf,
    pub format: Format,
    written: Vec<ArtifactEntry>,
}

impl Artifacts {
    pub fn new(dir: PathBuf, format: Format) -> Result<Self, Failure> {
        std::fs::create_dir_all(&dir)
            .map_err(|e| Failure::internal(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts { dir, format, written: vec![] })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(ArtifactEntry { path: name.to_string(), sha256: hex(&Sha256::digest(bytes)) });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        if self.format == Format::Csv {
            return Ok(());
        }
        let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::internal(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn csv(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        if self.format == Format::Json {
            return Ok(());
        }
        self.write(name, text.as_bytes())
    }

    pub fn force_csv(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        self.write(name, text.as_bytes())
    }

    pub fn finish(mut self, command: &str, config: &BTreeMap<String, String>) -> Result<(), Failure> {
        let artifacts = std::mem::take(&mut self.written);
        let m = Manifest { command, config, artifacts };
        let mut s = serde_json::to_string_pretty(&m).map_err(|e| Failure::internal(e.to_string()))?;
        s.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, s).map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
