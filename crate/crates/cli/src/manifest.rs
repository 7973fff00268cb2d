use serde::{Deserialize, Serialize};

use crate::inputs::sha256_hex;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    pub role: String,
    pub source: String,
    pub sha256: String,
}

impl InputHash {
    pub fn new(role: &str, source: &str, text: &str) -> Self {
        InputHash {
            role: role.to_string(),
            source: source.to_string(),
            sha256: sha256_hex(text),
        }
    }
}

/// What it takes to rerun a command: the effective configuration, the
/// seeds and hashes of every input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<InputHash>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        seeds: Vec<u64>,
        inputs: Vec<InputHash>,
    ) -> Self {
        RunManifest {
            command: command.to_string(),
            // argv[0] varies with the install location
            args: std::env::args().skip(1).collect(),
            config,
            seeds,
            inputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
