//! Sentence embedding tables.
//!
//! File format (UTF-8):
//!
//! ```text
//! DIM <d>[\t<provenance>]
//! <sentence_id>\t<f1> <f2> ... <fd>
//! ```
//!
//! Vectors are already aggregated per sentence; ids must be unique.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    provenance: String,
}

impl EmbeddingTable {
    pub fn new(dim: usize, provenance: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
            provenance: provenance.into(),
        })
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let id = id.into();
        if id.is_empty() || id.contains(['\t', '\n', '\r']) {
            return Err(Error::invalid(format!("invalid sentence id {id:?}")));
        }
        if vector.len() != self.dim {
            return Err(Error::LengthMismatch {
                left: vector.len(),
                right: self.dim,
            });
        }
        if let Some(x) = vector.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite component {x} for `{id}`")));
        }
        if self.vectors.contains_key(&id) {
            return Err(Error::DuplicateId { kind: "embedding", id });
        }
        self.vectors.insert(id, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice).ok_or_else(|| Error::Missing {
            kind: "embedding",
            id: id.to_string(),
        })
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        super::cosine(self.get(a)?, self.get(b)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file, &path.display().to_string())
    }

    pub fn read<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::io(source, e))?,
            None => return Err(Error::parse(source, 1, "empty embedding file")),
        };
        let (head, provenance) = header.split_once('\t').unwrap_or((&header, ""));
        let dim: usize = head
            .strip_prefix("DIM ")
            .and_then(|d| d.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::parse(source, 1, format!("expected `DIM <d>` header, found {head:?}")))?;
        let mut table = EmbeddingTable::new(dim, provenance)?;
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(source, e))?;
            let (id, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source, line_no, "expected `<id>\\t<values>`"))?;
            let values: Vec<f64> = rest
                .split(' ')
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(source, line_no, format!("invalid number {t:?}")))
                })
                .collect::<Result<_>>()?;
            if values.len() != dim {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("vector for `{id}` has {} values, expected {dim}", values.len()),
                ));
            }
            table.insert(id, values).map_err(|e| match e {
                Error::DuplicateId { id, .. } => Error::parse(source, line_no, format!("duplicate id `{id}`")),
                other => Error::parse(source, line_no, other.to_string()),
            })?;
        }
        Ok(table)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<output>", e);
        if self.provenance.is_empty() {
            writeln!(out, "DIM {}", self.dim).map_err(io)?;
        } else {
            writeln!(out, "DIM {}\t{}", self.dim, self.provenance).map_err(io)?;
        }
        for (id, v) in &self.vectors {
            let values: Vec<String> = v.iter().map(f64::to_string).collect();
            writeln!(out, "{id}\t{}", values.join(" ")).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

pub fn embedding_similarity(table: &EmbeddingTable, a: &str, b: &str) -> Result<f64> {
    table.similarity(a, b)
}
