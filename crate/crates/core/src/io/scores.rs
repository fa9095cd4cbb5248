use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::embedding::RelevanceVector;
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct ScoreDocument {
    scores: Vec<f64>,
}

/// Accepts one decimal per line (blank lines ignored) or a JSON object
/// with a `"scores"` array.
pub fn parse_scores(text: &str) -> Result<RelevanceVector> {
    if text.trim_start().starts_with('{') {
        let doc: ScoreDocument = serde_json::from_str(text)
            .map_err(|e| Error::format(format!("invalid score document: {e}")))?;
        return RelevanceVector::new(doc.scores);
    }

    let mut scores = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::data(format!("line {}: cannot parse {line:?} as a number", lineno + 1))
        })?;
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::data(format!(
                "line {}: score {line} is outside [0, 1]",
                lineno + 1
            )));
        }
        scores.push(v);
    }
    RelevanceVector::new(scores)
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<RelevanceVector> {
    parse_scores(&fs::read_to_string(path)?)
}
