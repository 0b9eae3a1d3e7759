//! Shared spec-string parsing for the model and target-function grammars.

use std::fmt;

/// A grammar error; the message names the offending key or token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    input: String,
    detail: String,
}

impl ParseError {
    pub fn new(input: &str, detail: impl Into<String>) -> Self {
        ParseError {
            input: input.to_string(),
            detail: detail.into(),
        }
    }

    pub fn unknown_key(input: &str, key: &str) -> Self {
        Self::new(input, format!("unknown key '{key}'"))
    }

    pub fn missing_key(input: &str, key: &str) -> Self {
        Self::new(input, format!("missing required key '{key}'"))
    }

    pub fn bad_value(input: &str, key: &str, value: &str) -> Self {
        Self::new(input, format!("key '{key}': cannot parse value '{value}'"))
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse '{}': {}", self.input, self.detail)
    }
}

impl std::error::Error for ParseError {}

/// Splits `k1=v1,k2=v2` into pairs.
pub(crate) fn kv_pairs(s: &str) -> Result<Vec<(String, String)>, ParseError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => {
                out.push((k.trim().to_string(), v.trim().to_string()));
            }
            _ => {
                return Err(ParseError::new(
                    s,
                    format!("expected key=value, got '{part}'"),
                ))
            }
        }
    }
    Ok(out)
}

/// Parses a strictly positive finite float for the named key.
pub(crate) fn parse_positive(input: &str, key: &str, value: &str) -> Result<f64, ParseError> {
    let v: f64 = value
        .parse()
        .map_err(|_| ParseError::bad_value(input, key, value))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ParseError::new(
            input,
            format!("key '{key}': value must be finite and > 0, got {value}"),
        ))
    }
}

/// Parses a non-negative float, allowing `inf` for open-ended bounds.
pub(crate) fn parse_nonneg_or_inf(input: &str, key: &str, value: &str) -> Result<f64, ParseError> {
    if value.eq_ignore_ascii_case("inf") || value.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    let v: f64 = value
        .parse()
        .map_err(|_| ParseError::bad_value(input, key, value))?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(ParseError::new(
            input,
            format!("key '{key}': value must be >= 0, got {value}"),
        ))
    }
}
