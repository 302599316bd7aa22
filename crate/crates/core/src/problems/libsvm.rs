use std::io::Write;
use std::path::Path;

use crate::blocks::CscMatrix;
use crate::error::{Result, SmartcdError};

/// Examples as columns of a `p × m` feature matrix, with `±1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub features: CscMatrix,
    pub labels: Vec<f64>,
}

pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<LabeledData> {
    let text = std::fs::read_to_string(path)?;
    parse_libsvm_str(&text)
}

/// Parses `label idx:val idx:val ...` lines (1-based indices). Labels `0`
/// and `-1` map to −1, `1` and `+1` to +1.
pub fn parse_libsvm_str(text: &str) -> Result<LabeledData> {
    let mut triplets = Vec::new();
    let mut labels = Vec::new();
    let mut p = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label = match label_tok.parse::<f64>() {
            Ok(v) if v == 1.0 => 1.0,
            Ok(v) if v == -1.0 || v == 0.0 => -1.0,
            _ => {
                return Err(SmartcdError::Label {
                    line: line_no,
                    label: label_tok.to_string(),
                })
            }
        };
        let col = labels.len();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| SmartcdError::Parse {
                line: line_no,
                message: format!("expected index:value, got {tok:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| SmartcdError::Parse {
                line: line_no,
                message: format!("bad feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(SmartcdError::Parse {
                    line: line_no,
                    message: "feature indices are 1-based".into(),
                });
            }
            let val: f64 = val.parse().map_err(|_| SmartcdError::Parse {
                line: line_no,
                message: format!("bad feature value {val:?}"),
            })?;
            p = p.max(idx);
            triplets.push((idx - 1, col, val));
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(SmartcdError::Parse {
            line: 0,
            message: "file contains no examples".into(),
        });
    }
    Ok(LabeledData {
        features: CscMatrix::from_triplets(p, labels.len(), &triplets)?,
        labels,
    })
}

/// Writes one line per example; values use the shortest round-trip format.
pub fn write_libsvm<W: Write>(data: &LabeledData, mut out: W) -> Result<()> {
    for (j, &label) in data.labels.iter().enumerate() {
        write!(out, "{}", if label > 0.0 { "+1" } else { "-1" })?;
        let (idx, val) = data.features.col(j);
        for (&r, &v) in idx.iter().zip(val) {
            write!(out, " {}:{}", r + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
