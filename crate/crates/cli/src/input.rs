//! Newline-delimited sample files.

use std::path::Path;

use dkw_core::SortedSample;

use crate::CliError;

/// Parses one finite number per line. Blank lines and lines starting with
/// `#` (after leading whitespace) are skipped; line numbers are 1-based.
pub fn parse_sample_str(text: &str) -> Result<SortedSample, CliError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => return Err(CliError::Parse { line: i + 1, token: line.to_string() }),
        }
    }
    if values.is_empty() {
        return Err(CliError::EmptySample);
    }
    Ok(SortedSample::new(values)?)
}

pub fn parse_sample_file(path: &Path) -> Result<SortedSample, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_sample_str(&text)
}
