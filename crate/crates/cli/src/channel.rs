//! Channel documents and the `bssc:P` shorthand.
//!
//! ```toml
//! name = "noiseless"
//! input_size = 2
//! y1 = [[1.0, 0.0], [0.0, 1.0]]
//! y2 = [[1.0, 0.0], [0.0, 1.0]]
//! ```

use std::path::Path;

use bcbounds_core::bounds::bssc;
use bcbounds_core::probcore::{BroadcastChannel, Pmf, TransitionMatrix};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, Result};

/// Raw channel document as written on disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub name: Option<String>,
    pub input_size: Spanned<i64>,
    pub y1: Spanned<Vec<Spanned<Vec<f64>>>>,
    pub y2: Spanned<Vec<Spanned<Vec<f64>>>>,
}

/// A validated channel and the label it was loaded under.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedChannel {
    pub name: String,
    pub source: String,
    pub channel: BroadcastChannel,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Parses and validates a channel document. `path` only labels diagnostics.
pub fn parse_channel(text: &str, path: &str) -> Result<LoadedChannel> {
    let doc: ChannelFile = toml::from_str(text).map_err(|e| match e.span() {
        Some(span) => CliError::Channel {
            path: path.into(),
            line: line_of(text, span.start),
            field: "document".into(),
            message: e.message().to_string(),
        },
        None => CliError::Syntax {
            path: path.into(),
            message: e.message().to_string(),
        },
    })?;
    let at = |offset: usize, field: &str, message: String| CliError::Channel {
        path: path.into(),
        line: line_of(text, offset),
        field: field.into(),
        message,
    };
    let n = *doc.input_size.get_ref();
    if n < 1 {
        return Err(at(
            doc.input_size.span().start,
            "input_size",
            format!("must be at least 1, got {n}"),
        ));
    }
    let n = n as usize;
    let matrix =
        |field: &str, rows: &Spanned<Vec<Spanned<Vec<f64>>>>| -> Result<TransitionMatrix> {
            if rows.get_ref().len() != n {
                return Err(at(
                    rows.span().start,
                    field,
                    format!(
                        "expected {n} rows (input_size), found {}",
                        rows.get_ref().len()
                    ),
                ));
            }
            let width = rows.get_ref()[0].get_ref().len();
            for (i, row) in rows.get_ref().iter().enumerate() {
                let r = row.get_ref();
                if r.len() != width {
                    return Err(at(
                        row.span().start,
                        field,
                        format!("row {i} has {} entries, row 0 has {width}", r.len()),
                    ));
                }
                Pmf::new(r.clone())
                    .map_err(|e| at(row.span().start, field, format!("row {i}: {e}")))?;
            }
            let plain = rows.get_ref().iter().map(|r| r.get_ref().clone()).collect();
            TransitionMatrix::new(plain).map_err(|e| at(rows.span().start, field, e.to_string()))
        };
    let y1 = matrix("y1", &doc.y1)?;
    let y2 = matrix("y2", &doc.y2)?;
    let channel = BroadcastChannel::new(y1, y2)?;
    Ok(LoadedChannel {
        name: doc.name.unwrap_or_else(|| path.to_string()),
        source: path.to_string(),
        channel,
    })
}

/// Resolves `--channel`: `bssc:P` builds the skew-symmetric channel with
/// crossover `P`, anything else is read as a channel document.
pub fn load_channel(spec: &str) -> Result<LoadedChannel> {
    if let Some(p) = spec.strip_prefix("bssc:") {
        let p: f64 = p.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "bad crossover in {spec:?}: expected bssc:P with P in [0, 1]"
            ))
        })?;
        let channel = bssc(p).map_err(|e| CliError::Usage(format!("{spec}: {e}")))?;
        return Ok(LoadedChannel {
            name: spec.to_string(),
            source: spec.to_string(),
            channel,
        });
    }
    let text = std::fs::read_to_string(Path::new(spec)).map_err(|source| CliError::Io {
        action: "read",
        path: spec.into(),
        source,
    })?;
    parse_channel(&text, spec)
}
