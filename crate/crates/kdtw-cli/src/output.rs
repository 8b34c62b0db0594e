//! Deterministic serialization: every float is written with 17 significant
//! digits so that runs are diffable and round-trip exactly.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{:.16e}", value)
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Serializes a value to JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value.serialize(&mut ser).context("serializing JSON")?;
    Ok(String::from_utf8(out).expect("serde_json emits utf8"))
}

/// Writes a value as JSON to `path`, with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Formats a float with 17 significant digits (scientific notation).
pub fn fmt(x: f64) -> String {
    kdtw::dataset::format_f64(x)
}

/// Formats an optional float; `None` prints as `nan`.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_else(|| "nan".into())
}
