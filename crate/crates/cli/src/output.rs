//! Report envelopes, aligned text tables and all-or-nothing artifact writes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Options;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Meta {
    pub toolkit_version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new(command: &str, options: &Options) -> Self {
        Meta {
            toolkit_version: TOOLKIT_VERSION,
            command: command.to_string(),
            config_hash: options.config_hash(command),
            seed: options.seed,
            config: options.echo(),
        }
    }

    pub fn header(&self) -> String {
        let seed = self.seed.map_or_else(|| "-".to_string(), |s| s.to_string());
        format!(
            "# argclust {}  command={}  seed={}  config_hash={}\n",
            self.toolkit_version, self.command, seed, self.config_hash
        )
    }
}

/// Column-aligned text table.
#[derive(Debug, Default)]
pub struct Table {
    title: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: &str, header: &[&str]) -> Self {
        Table {
            title: title.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "## {}", self.title);
        }
        let _ = writeln!(out, "{}", line(&self.header));
        for row in &self.rows {
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.4}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), num)
}

/// Files produced by a command, written only once everything succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, content: impl Into<Vec<u8>>) {
        self.files.push((name.into(), content.into()));
    }

    /// Writes every file into `dir` through temporary names. If any write
    /// fails, files already written by this call are removed.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| -> Result<()> {
            for (name, content) in &self.files {
                let target = dir.join(name);
                let tmp = dir.join(format!(".{name}.partial"));
                std::fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
                written.push(tmp.clone());
                std::fs::rename(&tmp, &target).with_context(|| format!("writing {}", target.display()))?;
                written.pop();
                written.push(target);
            }
            Ok(())
        })();
        if let Err(e) = result {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
        Ok(written)
    }
}

/// JSON document `{ "meta": …, "result": … }` with a trailing newline.
pub fn json_document<T: Serialize>(meta: &Meta, result: &T) -> Result<String> {
    let doc = serde_json::json!({ "meta": meta, "result": result });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}
