//! Run manifests: everything needed to replay a command.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::{Experiment, Format};

pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub tool_version: String,
    pub format: Format,
    pub command: Experiment,
    /// Files written by the run, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: Experiment, format: Format, outputs: Vec<String>) -> Self {
        RunManifest {
            schema: MANIFEST_SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            format,
            command,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.json", self.command.name()));
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.schema != MANIFEST_SCHEMA {
            bail!("unsupported manifest schema {}", m.schema);
        }
        Ok(m)
    }
}
