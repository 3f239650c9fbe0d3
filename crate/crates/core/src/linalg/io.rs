//! Matrix and vector files.
//!
//! Matrices are either headerless CSV (one row per line) or the binary
//! layout `"GKMX"`, version byte `0x01`, `u64` LE rows, `u64` LE cols, then the
//! row-major `f64` LE payload. Readers detect the format from the magic bytes;
//! writers pick binary for `.gkmx` and `.bin` paths and CSV otherwise.

use super::Matrix;
use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"GKMX";
const VERSION: u8 = 1;
const HEADER: usize = 4 + 1 + 8 + 8;

pub fn encode_binary(m: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * m.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing GKMX header".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported GKMX version {}", bytes[4])));
    }
    let rows = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[13..21].try_into().unwrap());
    let count = rows
        .checked_mul(cols)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::Format("GKMX dimensions overflow".into()))?;
    let payload = &bytes[HEADER..];
    if Some(payload.len()) != count.checked_mul(8) {
        return Err(Error::Format(format!(
            "GKMX payload has {} bytes, expected {} for {rows}x{cols}",
            payload.len(),
            count * 8
        )));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Matrix::from_vec(rows as usize, cols as usize, data)
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse {:?} as a number", tok.trim())))
}

pub fn parse_csv(text: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line.split(',').map(|t| parse_real(t, ln + 1)).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty matrix file".into()));
    }
    Matrix::from_rows(&rows).map_err(|e| Error::Format(e.to_string()))
}

pub fn to_csv(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let bytes = fs::read(path.as_ref())?;
    if bytes.starts_with(MAGIC) {
        return decode_binary(&bytes);
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Format(format!("{} is neither GKMX nor text", path.as_ref().display())))?;
    parse_csv(&text)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let binary = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("gkmx") | Some("bin")
    );
    if binary {
        fs::write(path, encode_binary(m))?;
    } else {
        fs::write(path, to_csv(m))?;
    }
    Ok(())
}

/// One real per line.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_real(l, i + 1))
        .collect()
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut s = String::new();
    for x in v {
        s.push_str(&format!("{x:?}\n"));
    }
    fs::write(path, s)?;
    Ok(())
}
