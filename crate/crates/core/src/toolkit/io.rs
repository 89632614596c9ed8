//! Plain-text matrix files.
//!
//! ```text
//! # comment
//! m n
//! a+bi a-bi ...      (mn lines of mn entries)
//! ```
//!
//! Entries are complex literals `a+bi`, `a-bi`, a bare real `a` or a bare
//! imaginary `bi`. Emission writes 17 significant digits, so parse and emit
//! round-trip exactly.

use std::path::Path;

use crate::bipartite::BipartiteMatrix;
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, C64};

/// Parses one complex literal.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let parse_f = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse::<f64>().ok(),
        }
    };
    let z = if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is neither leading nor part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => C64::new(body[..k].parse::<f64>().ok()?, parse_f(&body[k..])?),
            None => C64::new(0.0, parse_f(body)?),
        }
    } else {
        C64::new(s.parse::<f64>().ok()?, 0.0)
    };
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

/// `a+bi` / `a-bi` with 17 significant digits in each part.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}i", z.re, sign, z.im.abs())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a matrix file into a bipartite matrix with the declared factor sizes.
pub fn parse_matrix(text: &str) -> Result<BipartiteMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header \"m n\""))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let dim = |s: &str| s.parse::<usize>().ok().filter(|&d| d > 0);
    let (m, n) = match dims.as_slice() {
        [a, b] => match (dim(a), dim(b)) {
            (Some(m), Some(n)) => (m, n),
            _ => return Err(parse_err(hline, format!("bad header {header:?}; expected two positive integers"))),
        },
        _ => return Err(parse_err(hline, format!("bad header {header:?}; expected \"m n\""))),
    };
    let d = m.checked_mul(n).ok_or_else(|| parse_err(hline, "dimensions overflow"))?;

    let mut entries = Vec::with_capacity(d * d);
    let mut rows = 0;
    let mut last_line = hline;
    for (k, line) in lines {
        last_line = k;
        if rows == d {
            return Err(parse_err(k, format!("more than {d} rows")));
        }
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != d {
            return Err(parse_err(k, format!("expected {d} entries, found {}", row.len())));
        }
        for tok in row {
            let z = parse_complex(tok).ok_or_else(|| parse_err(k, format!("bad complex literal {tok:?}")))?;
            entries.push(z);
        }
        rows += 1;
    }
    if rows != d {
        return Err(parse_err(last_line, format!("expected {d} rows, found {rows}")));
    }
    BipartiteMatrix::new(m, n, ComplexMatrix::from_row_major(d, d, entries)?)
}

/// Writes the matrix file text for `t`.
pub fn emit_matrix(t: &BipartiteMatrix) -> String {
    let mat = t.mat();
    let mut out = format!("{} {}\n", t.m(), t.n());
    for i in 0..mat.rows() {
        let row: Vec<String> = (0..mat.cols()).map(|j| format_complex(mat.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<BipartiteMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix_file(path: impl AsRef<Path>, t: &BipartiteMatrix) -> Result<()> {
    std::fs::write(path, emit_matrix(t))?;
    Ok(())
}
