//! Plain-text tensor fixtures.
//!
//! ```text
//! M N
//! I_1 .. I_M
//! J_1 .. J_N
//! re im        <- one line per entry, in unfolding order
//! ```
//!
//! Floats are written in shortest round-trip exponent form, so
//! `read(write(t)) == t` bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{DenseTensor, TensorShape};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

pub fn to_fixture_string<T: Real>(t: &DenseTensor<T>) -> String {
    let shape = t.shape();
    let join = |d: &[usize]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::with_capacity(32 * t.entries().len() + 32);
    let _ = writeln!(out, "{} {}", shape.row_dims().len(), shape.col_dims().len());
    let _ = writeln!(out, "{}", join(shape.row_dims()));
    let _ = writeln!(out, "{}", join(shape.col_dims()));
    for z in t.entries() {
        let _ = writeln!(out, "{:e} {:e}", z.re, z.im);
    }
    out
}

pub fn parse_fixture<T: Real>(text: &str) -> Result<DenseTensor<T>> {
    let mut lines = text.lines().enumerate();
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
    };
    let (ln, header) = next("header line")?;
    let counts = parse_usizes(header, ln)?;
    let [m, n] = counts[..] else {
        return Err(Error::Parse { line: ln, msg: "expected `M N`".into() });
    };
    let (ln, rows) = next("row dims")?;
    let row_dims = parse_usizes(rows, ln)?;
    if row_dims.len() != m {
        return Err(Error::Parse { line: ln, msg: format!("expected {m} row dims, found {}", row_dims.len()) });
    }
    let (ln, cols) = next("column dims")?;
    let col_dims = parse_usizes(cols, ln)?;
    if col_dims.len() != n {
        return Err(Error::Parse { line: ln, msg: format!("expected {n} column dims, found {}", col_dims.len()) });
    }
    let shape = TensorShape::new(row_dims, col_dims).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;

    let mut entries = Vec::with_capacity(shape.len());
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse { line: line_no, msg: "expected `re im`".into() });
        };
        let parse = |s: &str| {
            s.parse::<T>().map_err(|_| Error::Parse { line: line_no, msg: format!("bad float `{s}`") })
        };
        let z = Cx::new(parse(re)?, parse(im)?);
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Parse { line: line_no, msg: "non-finite entry".into() });
        }
        entries.push(z);
    }
    if entries.len() != shape.len() {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {} entries, found {}", shape.len(), entries.len()),
        });
    }
    DenseTensor::new(shape, entries)
}

fn parse_usizes(line: &str, ln: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| tok.parse::<usize>().map_err(|_| Error::Parse { line: ln, msg: format!("bad integer `{tok}`") }))
        .collect()
}

pub fn write_fixture<T: Real>(t: &DenseTensor<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_fixture_string(t))?;
    Ok(())
}

pub fn read_fixture<T: Real>(path: impl AsRef<Path>) -> Result<DenseTensor<T>> {
    let text = std::fs::read_to_string(path)?;
    parse_fixture(&text)
}
