//! Plain-text serialization for lattice fields.
//!
//! Format (one header item per line, then samples in row-major order):
//!
//! ```text
//! rholab-lattice v1
//! dim 2
//! low -10 -10
//! high 10 10
//! h 0.625
//! n 33 33
//! samples 1089
//! 0.5
//! ...
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! write/read is bit-exact for finite doubles.

use super::{Lattice, LatticeField};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

const MAGIC: &str = "rholab-lattice v1";

pub fn to_text(field: &LatticeField) -> String {
    let lat = field.lattice();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "dim {}", lat.dim());
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(s, "low {}", join(lat.low()));
    let _ = writeln!(s, "high {}", join(&lat.high()));
    let _ = writeln!(s, "h {}", lat.spacing());
    let _ = writeln!(
        s,
        "n {}",
        lat.counts()
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(s, "samples {}", field.samples().len());
    for v in field.samples() {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn from_text(text: &str) -> Result<LatticeField> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
    if head.trim() != MAGIC {
        return Err(Error::Parse(format!("bad magic line: {head:?}")));
    }
    let mut dim: Option<usize> = None;
    let mut low: Option<Vec<f64>> = None;
    let mut high: Option<Vec<f64>> = None;
    let mut h: Option<f64> = None;
    let mut n: Option<Vec<usize>> = None;
    let mut count: Option<usize> = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| Error::Parse(format!("bad header line: {line:?}")))?;
        match key {
            "dim" => dim = Some(parse_one(rest)?),
            "low" => low = Some(parse_floats(rest)?),
            "high" => high = Some(parse_floats(rest)?),
            "h" => h = Some(parse_float(rest)?),
            "n" => {
                n = Some(
                    rest.split_whitespace()
                        .map(parse_one)
                        .collect::<Result<Vec<usize>>>()?,
                )
            }
            "samples" => {
                count = Some(parse_one(rest)?);
                break;
            }
            other => return Err(Error::Parse(format!("unknown header key {other:?}"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("missing dim".into()))?;
    let low = low.ok_or_else(|| Error::Parse("missing low".into()))?;
    let high = high.ok_or_else(|| Error::Parse("missing high".into()))?;
    let h = h.ok_or_else(|| Error::Parse("missing h".into()))?;
    let n = n.ok_or_else(|| Error::Parse("missing n".into()))?;
    let count = count.ok_or_else(|| Error::Parse("missing samples".into()))?;
    if low.len() != dim || high.len() != dim || n.len() != dim {
        return Err(Error::Parse("dim mismatch in header".into()));
    }
    let lat = Lattice::closed_box(&low, &high, h)?;
    if lat.counts() != n.as_slice() {
        return Err(Error::Parse(format!(
            "inconsistent counts: header {:?}, derived {:?}",
            n,
            lat.counts()
        )));
    }
    let mut samples = Vec::with_capacity(count);
    for line in text
        .lines()
        .skip_while(|l| !l.trim().starts_with("samples"))
        .skip(1)
    {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        for tok in line.split_whitespace() {
            samples.push(parse_float(tok)?);
        }
    }
    if samples.len() != count {
        return Err(Error::Parse(format!(
            "expected {count} samples, found {}",
            samples.len()
        )));
    }
    LatticeField::from_samples(&lat, samples)
}

pub fn write_file(field: &LatticeField, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(field))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<LatticeField> {
    let text = std::fs::read_to_string(path)?;
    from_text(&text)
}

fn parse_float(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad float {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite value {s:?}")));
    }
    Ok(v)
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(parse_float).collect()
}

fn parse_one<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}
