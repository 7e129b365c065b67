//! On-disk formats: the corpus file and the embedding file.
//!
//! Corpus: UTF-8 lines, `id<TAB>text` or `id<TAB>text<TAB>label` with label
//! in {-1, 1}; `#` comments and blank lines are skipped.
//!
//! Embedding files carry a four-line header
//!
//! ```text
//! emb1 bin            (or: emb1 txt)
//! model <name>
//! dim <d>
//! count <n>
//! ```
//!
//! followed by one record per entry: the binary variant stores `<id>\n` plus
//! `d` little-endian f64 values; the text variant stores
//! `<id>\t<v0> <v1> ...` with shortest-roundtrip float formatting. Both
//! variants reload bit-exactly.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vector::{PointCloud, Vector};

/// One corpus sentence with an optional human label (+1 fair, -1 unfair).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    pub label: Option<i8>,
}

/// Loads a corpus file, validating id uniqueness and label values.
pub fn load_corpus(path: &Path) -> Result<Vec<CorpusRecord>> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let id = fields[0];
        let text = fields[1];
        if id.is_empty() {
            return Err(Error::parse(path, lineno, "empty record id"));
        }
        if text.is_empty() {
            return Err(Error::parse(
                path,
                lineno,
                format!("record `{id}` has empty text"),
            ));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(
                path,
                lineno,
                format!("duplicate record id `{id}`"),
            ));
        }
        let label = match fields.get(2) {
            None => None,
            Some(&"1") | Some(&"+1") => Some(1),
            Some(&"-1") => Some(-1),
            Some(other) => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("label must be -1 or 1, got `{other}`"),
                ));
            }
        };
        records.push(CorpusRecord {
            id: id.to_string(),
            text: text.to_string(),
            label,
        });
    }
    Ok(records)
}

/// Writes a corpus file in the same format `load_corpus` reads.
pub fn save_corpus(records: &[CorpusRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in records {
        if r.id.contains(['\t', '\n']) || r.text.contains(['\t', '\n']) {
            return Err(Error::InvalidParam(format!(
                "record `{}` contains tab or newline",
                r.id
            )));
        }
        match r.label {
            Some(l) => out.push_str(&format!("{}\t{}\t{}\n", r.id, r.text, l)),
            None => out.push_str(&format!("{}\t{}\n", r.id, r.text)),
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Label map from the labeled subset of a corpus.
pub fn corpus_labels(records: &[CorpusRecord]) -> std::collections::BTreeMap<String, i8> {
    records
        .iter()
        .filter_map(|r| r.label.map(|l| (r.id.clone(), l)))
        .collect()
}

/// Embedding file variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Binary,
    Text,
}

fn check_token(path: &Path, s: &str, what: &str) -> Result<()> {
    if s.contains('\n') || s.contains('\t') || s.contains('\r') {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: format!("{what} must not contain tabs or newlines: {s:?}"),
        });
    }
    Ok(())
}

/// Serializes a cloud (records in ascending id order) with its model name.
pub fn save_embeddings(
    cloud: &PointCloud,
    model: &str,
    path: &Path,
    format: EmbeddingFormat,
) -> Result<()> {
    check_token(path, model, "model name")?;
    let mut buf: Vec<u8> = Vec::new();
    let tag = match format {
        EmbeddingFormat::Binary => "bin",
        EmbeddingFormat::Text => "txt",
    };
    buf.extend_from_slice(
        format!(
            "emb1 {tag}\nmodel {model}\ndim {}\ncount {}\n",
            cloud.dim(),
            cloud.len()
        )
        .as_bytes(),
    );
    for (id, v) in cloud.iter() {
        check_token(path, id, "record id")?;
        match format {
            EmbeddingFormat::Binary => {
                buf.extend_from_slice(id.as_bytes());
                buf.push(b'\n');
                for x in v.values() {
                    buf.extend_from_slice(&x.to_le_bytes());
                }
            }
            EmbeddingFormat::Text => {
                buf.extend_from_slice(id.as_bytes());
                buf.push(b'\t');
                let mut first = true;
                for x in v.values() {
                    if !first {
                        buf.push(b' ');
                    }
                    first = false;
                    buf.extend_from_slice(format!("{x}").as_bytes());
                }
                buf.push(b'\n');
            }
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn read_line(&mut self, path: &Path) -> Result<&'a str> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return Err(Error::parse(path, self.line, "unexpected end of file"));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::parse(path, self.line, "invalid utf-8"))?;
        self.pos += 1;
        self.line += 1;
        Ok(s)
    }

    fn read_exact(&mut self, n: usize, path: &Path) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::parse(path, self.line, "truncated record payload"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

fn header_field<'a>(path: &Path, line: &'a str, key: &str, lineno: usize) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| {
            rest.strip_prefix(' ')
                .or(if rest.is_empty() { Some("") } else { None })
        })
        .ok_or_else(|| Error::parse(path, lineno, format!("expected `{key} ...` header line")))
}

/// Loads either embedding file variant, sniffing the first line.
///
/// Returns the cloud and the model name from the header. Values are checked
/// finite and per-record dimensions must match the header.
pub fn load_embeddings(path: &Path) -> Result<(PointCloud, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut cur = Cursor {
        bytes: &bytes,
        pos: 0,
        line: 1,
    };
    let magic = cur.read_line(path)?;
    let format = match magic {
        "emb1 bin" => EmbeddingFormat::Binary,
        "emb1 txt" => EmbeddingFormat::Text,
        other => {
            return Err(Error::parse(
                path,
                1,
                format!("unrecognized embedding file magic `{other}`"),
            ));
        }
    };
    let model = header_field(path, cur.read_line(path)?, "model", 2)?.to_string();
    let dim_line = cur.read_line(path)?;
    let dim: usize = header_field(path, dim_line, "dim", 3)?
        .parse()
        .map_err(|_| Error::parse(path, 3, "dim must be an integer"))?;
    let count_line = cur.read_line(path)?;
    let count: usize = header_field(path, count_line, "count", 4)?
        .parse()
        .map_err(|_| Error::parse(path, 4, "count must be an integer"))?;
    if dim == 0 && count > 0 {
        return Err(Error::parse(path, 3, "dim must be positive"));
    }

    let mut cloud = PointCloud::new();
    for _ in 0..count {
        let lineno = cur.line;
        match format {
            EmbeddingFormat::Binary => {
                let id = cur.read_line(path)?.to_string();
                let payload = cur.read_exact(dim * 8, path)?;
                let values: Vec<f64> = payload
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                    .collect();
                let v = Vector::new(values)
                    .map_err(|e| Error::parse(path, lineno, format!("record `{id}`: {e}")))?;
                cloud
                    .insert(id.clone(), v)
                    .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
            }
            EmbeddingFormat::Text => {
                let line = cur.read_line(path)?;
                let (id, rest) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(path, lineno, "expected `<id>\\t<values>`"))?;
                let values: Vec<f64> = rest
                    .split(' ')
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| Error::parse(path, lineno, format!("bad float `{s}`")))
                    })
                    .collect::<Result<_>>()?;
                if values.len() != dim {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("record `{id}` has {} values, expected {dim}", values.len()),
                    ));
                }
                let v = Vector::new(values)
                    .map_err(|e| Error::parse(path, lineno, format!("record `{id}`: {e}")))?;
                cloud
                    .insert(id.to_string(), v)
                    .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
            }
        }
    }
    if cloud.len() != count {
        return Err(Error::parse(
            path,
            cur.line,
            format!("header count {count} but parsed {}", cloud.len()),
        ));
    }
    if !cloud.is_empty() && cloud.dim() != dim {
        return Err(Error::parse(
            path,
            cur.line,
            format!("header dim {dim} but records have dim {}", cloud.dim()),
        ));
    }
    Ok((cloud, model))
}

/// Loads a precomputed embedding file, discarding the model name.
pub fn load_precomputed(path: &Path) -> Result<PointCloud> {
    load_embeddings(path).map(|(cloud, _)| cloud)
}
