//! Artifacts held in memory until written, JSON envelopes and the schema.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: &str = "1.0";
pub const SCHEMA: &str = include_str!("../schema/weierlab.schema.json");
pub const SCHEMA_FILE: &str = "weierlab.schema.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub version: &'static str,
}

impl Provenance {
    pub fn new(config_echo: &str, seed: u64) -> Self {
        let digest = Sha256::digest(config_echo.as_bytes());
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self { config_sha256, seed, version: env!("CARGO_PKG_VERSION") }
    }
}

/// Named JSON and CSV outputs of one subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub json: Vec<(String, Value)>,
    pub csv: Vec<(String, String)>,
}

impl Artifacts {
    pub fn push_json(&mut self, name: &str, command: &str, provenance: &Provenance, result: impl Serialize) {
        let v = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "provenance": provenance,
            "result": result,
        });
        self.json.push((name.to_string(), v));
    }

    pub fn push_csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> io::Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.csv.push((name.to_string(), String::from_utf8(buf).expect("csv is utf-8")));
        Ok(())
    }

    /// File name and exact bytes of every artifact, in emission order.
    pub fn files(&self, json: bool, csv: bool) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if json {
            for (name, v) in &self.json {
                let mut text = serde_json::to_string_pretty(v).expect("json serializes");
                text.push('\n');
                out.push((name.clone(), text));
            }
        }
        if csv {
            out.extend(self.csv.iter().cloned());
        }
        out
    }

    pub fn write(&self, dir: &Path, json: bool, csv: bool) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, text) in self.files(json, csv) {
            fs::write(dir.join(name), text)?;
        }
        if json {
            fs::write(dir.join(SCHEMA_FILE), SCHEMA)?;
        }
        Ok(())
    }
}

/// Schema violations of one JSON document, empty when valid.
pub fn schema_errors(doc: &Value) -> Vec<String> {
    let schema: Value = serde_json::from_str(SCHEMA).expect("embedded schema parses");
    let validator = jsonschema::validator_for(&schema).expect("embedded schema compiles");
    validator.iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path())).collect()
}
