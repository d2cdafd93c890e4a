//! Fixed-layout text form of an [`LpProblem`].
//!
//! ```text
//! LP <max|min> <vars> <rows>
//! OBJ <c_1> ... <c_n>
//! ROW <le|eq|ge> <rhs> <a_1> ... <a_n>
//! BND <lo> <hi>
//! END
//! ```
//!
//! One `ROW` per constraint and one `BND` per variable. Numbers use a fixed
//! 24-character scientific field with 17 significant digits, so a dump reads
//! back bit-identically.

use std::fmt::Write;

use super::{Constraint, LpProblem, Relation, Sense};
use crate::error::{Error, Result};

fn num(out: &mut String, v: f64) {
    if v == f64::INFINITY {
        let _ = write!(out, " {:>24}", "inf");
    } else if v == f64::NEG_INFINITY {
        let _ = write!(out, " {:>24}", "-inf");
    } else {
        let _ = write!(out, " {v:>24.17e}");
    }
}

pub fn to_text(p: &LpProblem) -> String {
    let mut out = String::new();
    let sense = match p.sense {
        Sense::Max => "max",
        Sense::Min => "min",
    };
    let _ = writeln!(out, "LP {sense} {} {}", p.vars(), p.constraints.len());
    out.push_str("OBJ");
    for &c in &p.objective {
        num(&mut out, c);
    }
    out.push('\n');
    for c in &p.constraints {
        let rel = match c.relation {
            Relation::Le => "le",
            Relation::Eq => "eq",
            Relation::Ge => "ge",
        };
        let _ = write!(out, "ROW {rel}");
        num(&mut out, c.rhs);
        for &a in &c.coeffs {
            num(&mut out, a);
        }
        out.push('\n');
    }
    for &(lo, hi) in &p.bounds {
        out.push_str("BND");
        num(&mut out, lo);
        num(&mut out, hi);
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad number {tok:?}"),
        }),
    }
}

pub fn from_text(text: &str) -> Result<LpProblem> {
    let err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, head) = lines.next().ok_or_else(|| err(1, "empty dump"))?;
    let h: Vec<&str> = head.split_whitespace().collect();
    if h.len() != 4 || h[0] != "LP" {
        return Err(err(ln, "expected `LP <sense> <vars> <rows>`"));
    }
    let sense = match h[1] {
        "max" => Sense::Max,
        "min" => Sense::Min,
        _ => return Err(err(ln, "unknown sense")),
    };
    let n: usize = h[2].parse().map_err(|_| err(ln, "bad variable count"))?;
    let rows: usize = h[3].parse().map_err(|_| err(ln, "bad row count"))?;

    let (ln, obj) = lines.next().ok_or_else(|| err(ln + 1, "missing OBJ"))?;
    let toks: Vec<&str> = obj.split_whitespace().collect();
    if toks.first() != Some(&"OBJ") || toks.len() != n + 1 {
        return Err(err(ln, "malformed OBJ line"));
    }
    let objective = toks[1..]
        .iter()
        .map(|t| parse_num(t, ln))
        .collect::<Result<Vec<_>>>()?;
    let mut p = LpProblem::new(sense, objective);

    for _ in 0..rows {
        let (ln, row) = lines.next().ok_or_else(|| err(0, "missing ROW"))?;
        let toks: Vec<&str> = row.split_whitespace().collect();
        if toks.first() != Some(&"ROW") || toks.len() != n + 3 {
            return Err(err(ln, "malformed ROW line"));
        }
        let relation = match toks[1] {
            "le" => Relation::Le,
            "eq" => Relation::Eq,
            "ge" => Relation::Ge,
            _ => return Err(err(ln, "unknown relation")),
        };
        let rhs = parse_num(toks[2], ln)?;
        let coeffs = toks[3..]
            .iter()
            .map(|t| parse_num(t, ln))
            .collect::<Result<Vec<_>>>()?;
        p.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }
    for j in 0..n {
        let (ln, b) = lines.next().ok_or_else(|| err(0, "missing BND"))?;
        let toks: Vec<&str> = b.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "BND" {
            return Err(err(ln, "malformed BND line"));
        }
        p.bounds[j] = (parse_num(toks[1], ln)?, parse_num(toks[2], ln)?);
    }
    match lines.next() {
        Some((_, "END")) => Ok(p),
        Some((ln, _)) => Err(err(ln, "expected END")),
        None => Err(err(0, "missing END")),
    }
}
