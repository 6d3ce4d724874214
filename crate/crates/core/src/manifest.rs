use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub tool_version: String,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch; the only field allowed to differ between reruns.
    pub created_at: u64,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, output_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            parameters,
            seed: None,
            output_dir: output_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn with_inputs<I: IntoIterator<Item = S>, S: Into<String>>(mut self, inputs: I) -> Self {
        self.inputs = inputs.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
