//! CSV emission. Every file opens with `#`-prefixed metadata lines, then a
//! header row.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Facts that identify a run.
#[derive(Clone, Debug)]
pub struct RunMeta {
    pub command: String,
    pub config_hash: String,
    pub tier: String,
    pub fock_cutoff: usize,
    pub seed: u64,
    pub engine: String,
}

impl RunMeta {
    pub fn new(command: &str, cfg: &ExperimentConfig, engine: &str) -> Self {
        RunMeta {
            command: command.into(),
            config_hash: cfg.hash(),
            tier: cfg.tier.to_string(),
            fock_cutoff: cfg.fock_cutoff,
            seed: cfg.rng_seed,
            engine: engine.into(),
        }
    }

    fn lines(&self) -> Vec<(String, String)> {
        vec![
            ("artifact".into(), format!("dotbus {VERSION}")),
            ("command".into(), self.command.clone()),
            ("config_sha256".into(), self.config_hash.clone()),
            ("tier".into(), self.tier.clone()),
            ("fock_cutoff".into(), self.fock_cutoff.to_string()),
            ("engine".into(), self.engine.clone()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra metadata lines, e.g. summary numbers.
    pub notes: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn write(&self, path: &Path, meta: &RunMeta) -> Result<()> {
        let mut file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        for (k, v) in meta.lines().iter().chain(&self.notes) {
            writeln!(file, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal that round-trips.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn prepare_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

/// Reads a file written by [`CsvTable::write`]: metadata, header, rows.
pub fn read_table(path: &Path) -> Result<(Vec<(String, String)>, Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let meta = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l[1..].trim().split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok((meta, header, rows))
}
