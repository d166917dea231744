//! Plain-text tensor format.
//!
//! ```text
//! # comment
//! tensor v1
//! dims 2 3 4
//! 1 2 1 806
//! 2 1 1 833
//! ```
//!
//! Indices are 1-based. Unlisted cells are zero, and zero-valued lines are
//! dropped on read.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tensor::SparseTensor;

const HEADER: &str = "tensor v1";

pub fn read_tensor<R: BufRead>(reader: R) -> Result<SparseTensor> {
    let mut header_seen = false;
    let mut dims: Option<Vec<usize>> = None;
    let mut entries = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if !header_seen {
            if text.split_whitespace().collect::<Vec<_>>() != ["tensor", "v1"] {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header `{HEADER}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let mut fields = text.split_whitespace();
        let Some(d) = &dims else {
            if fields.next() != Some("dims") {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected `dims d1 ... dm`".into(),
                });
            }
            let parsed = fields
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad dimension: {e}"),
                })?;
            if parsed.len() < 2 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "a tensor needs at least two modes".into(),
                });
            }
            if parsed.contains(&0) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "dimensions must be positive".into(),
                });
            }
            dims = Some(parsed);
            continue;
        };
        let tokens: Vec<&str> = fields.collect();
        if tokens.len() != d.len() + 1 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!(
                    "expected {} indices and a value, found {} fields",
                    d.len(),
                    tokens.len()
                ),
            });
        }
        let mut idx = Vec::with_capacity(d.len());
        for (k, tok) in tokens[..d.len()].iter().enumerate() {
            let j: usize = tok.parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad index `{tok}`: {e}"),
            })?;
            if j == 0 || j > d[k] {
                return Err(Error::IndexOutOfRange {
                    mode: k,
                    index: j,
                    dim: d[k],
                });
            }
            idx.push(j);
        }
        let value_tok = tokens[d.len()];
        let value: f64 = value_tok.parse().map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad value `{value_tok}`: {e}"),
        })?;
        entries.push((idx, value));
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 0,
            msg: format!("missing header `{HEADER}`"),
        });
    }
    let dims = dims.ok_or(Error::Parse {
        line: 0,
        msg: "missing `dims` line".into(),
    })?;
    SparseTensor::from_one_based(dims, entries)
}

/// Writes `f` with shortest round-trip decimal values, so reading the output
/// back reproduces the tensor exactly.
pub fn write_tensor<W: Write>(f: &SparseTensor, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    let dims: Vec<String> = f.dims().iter().map(|d| d.to_string()).collect();
    writeln!(out, "dims {}", dims.join(" "))?;
    for (idx, v) in f.entries() {
        let idx: Vec<String> = idx.iter().map(|j| (j + 1).to_string()).collect();
        writeln!(out, "{} {}", idx.join(" "), v)?;
    }
    Ok(())
}

pub fn read_tensor_file(path: &std::path::Path) -> Result<SparseTensor> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_tensor(std::io::BufReader::new(file))
}
