//! Result persistence: CSV tables, JSON reports, and the provenance
//! manifest. All writers are deterministic given identical values; floats
//! use the shortest round-tripping decimal form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use morphoevo_core::nsga2::{ParetoArchive, ProgressRecord};

use crate::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Where a scenario came from and what its bytes hash to.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSource {
    pub name: String,
    /// A file path, or `builtin:<name>` for bundled scenarios.
    pub source: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationCounts {
    pub total: u64,
    pub outer: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputHash {
    pub file: String,
    pub sha256: String,
}

/// Provenance record written last into every output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario: ScenarioSource,
    /// Display form of the controller, for simulate runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub seed: u64,
    pub threads: usize,
    /// Budget currency for evolve runs: "total" or "outer".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counting: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<EvaluationCounts>,
    pub created_utc: String,
    /// Result files this run wrote, with their content hashes.
    pub outputs: Vec<OutputHash>,
}

impl RunManifest {
    pub fn new(command: &str, scenario: ScenarioSource, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            scenario,
            model: None,
            seed,
            threads: rayon::current_num_threads(),
            counting: None,
            evaluations: None,
            created_utc: chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            outputs: Vec::new(),
        }
    }
}

/// Writes result files into `dir`, recording each hash, then writes
/// `manifest.json` last.
pub struct OutputDir {
    dir: PathBuf,
    hashes: Vec<OutputHash>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), hashes: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, file: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(file), contents)?;
        self.hashes
            .push(OutputHash { file: file.to_string(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(())
    }

    /// Consumes the recorded hashes into the manifest and writes it.
    pub fn finish(self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self.hashes;
        let json = to_json(&manifest);
        fs::write(self.dir.join("manifest.json"), json)?;
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// The final non-dominated set: one row per member, knees flagged.
pub fn pareto_csv(archive: &ParetoArchive) -> String {
    let mut out = String::from("id,f1,f2,is_knee,tree\n");
    for (id, member) in archive.members.iter().enumerate() {
        let knee = archive.knees.contains(&id);
        writeln!(
            out,
            "{id},{},{},{knee},{}",
            member.objectives.f1,
            member.objectives.f2,
            member.tree.serialize()
        )
        .expect("string write");
    }
    out
}

/// Per-generation progress: counters, front size, best accuracy, and the
/// cumulative-archive hypervolume.
pub fn progress_csv(progress: &[ProgressRecord]) -> String {
    let mut out =
        String::from("generation,total_evaluations,outer_evaluations,front_size,best_f2,hypervolume\n");
    for r in progress {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.generation,
            r.total_evaluations,
            r.outer_evaluations,
            r.front_size,
            r.best_f2,
            r.hypervolume
        )
        .expect("string write");
    }
    out
}
