//! Self-describing command reports: inputs echoed for provenance, results,
//! wall time and the graph fingerprint. Re-running a command reproduces the
//! report byte for byte except the wall-time field.

use chainscope::error::Result;
use chainscope::storage::hex_string;
use chainscope::transition::TransitionGraph;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct Report {
    command: &'static str,
    inputs: serde_json::Value,
    started: Instant,
    body: Option<serde_json::Value>,
}

impl Report {
    pub fn start(command: &'static str, inputs: serde_json::Value) -> Self {
        Self {
            command,
            inputs,
            started: Instant::now(),
            body: None,
        }
    }

    pub fn finish(&mut self, graph: &TransitionGraph, results: serde_json::Value) {
        self.body = Some(json!({
            "command": self.command,
            "inputs": self.inputs,
            "results": results,
            "fingerprint": hex_string(graph.fingerprint()),
            "wall_time_ms": self.started.elapsed().as_millis() as u64,
        }));
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let body = self.body.as_ref().expect("finish before write");
        let path = out_dir.join(format!("{}.json", self.command));
        std::fs::write(&path, serde_json::to_string_pretty(body)?)?;
        println!("report: {}", path.display());
        Ok(())
    }
}

/// Resolve the output directory, defaulting to the working directory.
pub fn ensure_dir(out: Option<&Path>) -> Result<PathBuf> {
    let dir = out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
