//! Plain-text schedule files.
//!
//! ```text
//! # fockramp schedule v1
//! # method = faquad
//! # t_f = 2.0000000000000000e2
//! # c = 1.2345678901234567e-2        (or "none")
//! # A0 = ...  Af, B0, kappa, eps, C, n_target likewise
//! t A
//! 0.0000000000000000e0 -2.5000000000000000e-1
//! ...
//! ```
//!
//! Floats carry 17 significant digits, so a write/read cycle is exact.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Method, Schedule};
use crate::error::{Error, Result};
use crate::model::DeformationPath;

const HEADER: &str = "# fockramp schedule v1";

pub fn write_schedule<W: Write>(mut w: W, s: &Schedule) -> Result<()> {
    let p = &s.path;
    writeln!(w, "{HEADER}")?;
    writeln!(w, "# method = {}", s.method)?;
    writeln!(w, "# t_f = {:.16e}", s.t_f)?;
    match s.c_value {
        Some(c) => writeln!(w, "# c = {c:.16e}")?,
        None => writeln!(w, "# c = none")?,
    }
    for (k, v) in [("A0", p.a0), ("Af", p.af), ("B0", p.b0), ("kappa", p.kappa), ("eps", p.eps), ("C", p.c)] {
        writeln!(w, "# {k} = {v:.16e}")?;
    }
    writeln!(w, "# n_target = {}", p.n_target)?;
    writeln!(w, "t A")?;
    for (t, a) in s.samples() {
        writeln!(w, "{t:.16e} {a:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what}: '{s}'")))
}

pub fn read_schedule<R: BufRead>(r: R) -> Result<Schedule> {
    let mut lines = r.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != HEADER {
        return Err(Error::Parse(format!("not a schedule file (header '{first}')")));
    }
    let mut meta = HashMap::new();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut in_body = false;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.split_once('=').ok_or_else(|| Error::Parse(format!("bad header line '{line}'")))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        } else if !in_body {
            if line != "t A" {
                return Err(Error::Parse(format!("expected column header 't A', got '{line}'")));
            }
            in_body = true;
        } else {
            let mut cols = line.split_whitespace();
            let (Some(t), Some(a), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("expected two columns, got '{line}'")));
            };
            times.push(parse_f64(t, "time")?);
            values.push(parse_f64(a, "control value")?);
        }
    }
    let get = |k: &str| meta.get(k).ok_or_else(|| Error::Parse(format!("missing header field '{k}'")));
    let num = |k: &str| get(k).and_then(|v| parse_f64(v, k));
    let method: Method = get("method")?.parse()?;
    let c_value = match get("c")?.as_str() {
        "none" => None,
        v => Some(parse_f64(v, "c")?),
    };
    let n_target = get("n_target")?.parse().map_err(|_| Error::Parse("bad n_target".into()))?;
    let path = DeformationPath::custom(num("A0")?, num("Af")?, num("B0")?, num("kappa")?, num("eps")?, num("C")?, n_target)?;
    let t_f = num("t_f")?;
    if times.last() != Some(&t_f) {
        return Err(Error::Parse("last sample time differs from t_f".into()));
    }
    Schedule::from_samples(path, method, c_value, times, values)
}
