//! On-disk formats: JSON-lines annotation, pose and report documents, and
//! the binary field container.

mod annotation;
mod fields;
mod poses;
mod report;

pub use annotation::{load_annotations, save_annotations, AnnotationDocument};
pub use fields::{
    decode_field_stack, decode_field_stream, encode_field_stack, encoded_len, load_field_stack,
    save_field_stack, FIELD_MAGIC, FIELD_VERSION, HEADER_LEN,
};
pub use poses::{load_poses, save_poses, PoseFrame};
pub use report::{load_report, report_entries, save_report};

use std::fmt;

/// Version written into every text document header.
pub const TEXT_VERSION: u32 = 1;

/// Where in a file an error was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Byte(usize),
    Line { line: usize, column: usize },
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Byte(b) => write!(f, "byte {b}"),
            Position::Line { line, column: 0 } => write!(f, "line {line}"),
            Position::Line { line, column } => write!(f, "line {line}, column {column}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("{position}: bad magic bytes")]
    BadMagic { position: Position },
    #[error("{position}: unknown format version {version}")]
    UnknownVersion { position: Position, version: u32 },
    #[error("{position}: malformed header: {reason}")]
    MalformedHeader { position: Position, reason: String },
    #[error("{position}: truncated payload, expected {expected} bytes but found {actual}")]
    Truncated {
        position: Position,
        expected: usize,
        actual: usize,
    },
    #[error("{position}: {count} unexpected trailing bytes")]
    TrailingBytes { position: Position, count: usize },
    #[error("{position}: invalid value: {reason}")]
    InvalidValue { position: Position, reason: String },
    #[error("{position}: syntax error: {reason}")]
    Syntax { position: Position, reason: String },
    #[error("{position}: schema error: {reason}")]
    Schema { position: Position, reason: String },
    #[error("{position}: {reason}")]
    Validation { position: Position, reason: String },
}

impl FormatError {
    pub fn position(&self) -> Position {
        match self {
            FormatError::BadMagic { position }
            | FormatError::UnknownVersion { position, .. }
            | FormatError::MalformedHeader { position, .. }
            | FormatError::Truncated { position, .. }
            | FormatError::TrailingBytes { position, .. }
            | FormatError::InvalidValue { position, .. }
            | FormatError::Syntax { position, .. }
            | FormatError::Schema { position, .. }
            | FormatError::Validation { position, .. } => *position,
        }
    }
}

/// Rounds to six significant digits, the precision of every number written
/// to a text document.
pub fn canonical(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn line_pos(line: usize) -> Position {
    Position::Line { line, column: 0 }
}

/// Maps a serde_json error on a single line to a positioned format error.
fn json_error(err: serde_json::Error, line: usize) -> FormatError {
    use serde_json::error::Category;
    let position = Position::Line {
        line,
        column: err.column(),
    };
    let reason = strip_location(&err.to_string());
    match err.classify() {
        Category::Data => FormatError::Schema { position, reason },
        _ => FormatError::Syntax { position, reason },
    }
}

fn strip_location(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Splits a text document into numbered non-empty lines.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parses and checks the `format`/`version` fields every header carries.
fn check_header_kind(value: &serde_json::Value, expected: &str) -> Result<(), FormatError> {
    let pos = line_pos(1);
    let Some(obj) = value.as_object() else {
        return Err(FormatError::MalformedHeader {
            position: pos,
            reason: "header must be an object".into(),
        });
    };
    match obj.get("format").and_then(|v| v.as_str()) {
        Some(f) if f == expected => {}
        Some(f) => {
            return Err(FormatError::MalformedHeader {
                position: pos,
                reason: format!("expected format \"{expected}\", found \"{f}\""),
            })
        }
        None => {
            return Err(FormatError::MalformedHeader {
                position: pos,
                reason: "missing \"format\"".into(),
            })
        }
    }
    match obj.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == TEXT_VERSION as u64 => Ok(()),
        Some(v) => Err(FormatError::UnknownVersion {
            position: pos,
            version: v.min(u32::MAX as u64) as u32,
        }),
        None => Err(FormatError::MalformedHeader {
            position: pos,
            reason: "missing \"version\"".into(),
        }),
    }
}

fn parse_header<T: serde::de::DeserializeOwned>(
    text: &str,
    expected: &str,
) -> Result<(T, usize), FormatError> {
    let Some((line, header)) = numbered_lines(text).next() else {
        return Err(FormatError::MalformedHeader {
            position: line_pos(1),
            reason: "empty document".into(),
        });
    };
    let value: serde_json::Value = serde_json::from_str(header).map_err(|e| json_error(e, line))?;
    check_header_kind(&value, expected)?;
    let parsed = serde_json::from_value(value).map_err(|e| FormatError::MalformedHeader {
        position: line_pos(line),
        reason: strip_location(&e.to_string()),
    })?;
    Ok((parsed, line))
}

fn check_joint_names(names: &[String], line: usize) -> Result<(), FormatError> {
    let canonical = crate::model::JointKind::canonical_names();
    if names.len() != canonical.len() || names.iter().zip(canonical.iter()).any(|(a, b)| a != b) {
        return Err(FormatError::Schema {
            position: line_pos(line),
            reason: format!(
                "joint names must be the {} canonical names in order, found {} names",
                canonical.len(),
                names.len()
            ),
        });
    }
    Ok(())
}

fn to_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("document types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_is_idempotent_and_six_digits() {
        assert_eq!(canonical(123.456789), 123.457);
        assert_eq!(canonical(0.000123456789), 0.000123457);
        for x in [1.0 / 3.0, 2.0f64.sqrt() * 1e5, -7.25, 1e-300] {
            assert_eq!(canonical(canonical(x)), canonical(x));
        }
    }
}
