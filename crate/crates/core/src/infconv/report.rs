//! JSON and CSV forms of a sharing result.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rv::SimpleRandomVariable;

use super::{Certificate, SharingResult, SubAtom};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct SharingReport<'a> {
    pub schema_version: u32,
    /// `None` when the value is `-inf`.
    pub value: Option<f64>,
    pub negative_infinity: bool,
    pub composition: &'a [SubAtom],
    pub tail: &'a [usize],
    pub allocations: Vec<&'a [f64]>,
    pub certificates: &'a [Certificate],
    pub initial: f64,
    pub post: Option<f64>,
    pub reduction: Option<f64>,
    pub y_shift: Option<f64>,
    pub lower_bound: Option<ExtendedReal>,
}

impl SharingResult {
    pub fn report(&self) -> SharingReport<'_> {
        SharingReport {
            schema_version: SCHEMA_VERSION,
            value: self.value.finite(),
            negative_infinity: self.value.is_negative_infinity(),
            composition: &self.sub_atoms,
            tail: &self.tail,
            allocations: self.allocations.iter().map(SimpleRandomVariable::values).collect(),
            certificates: &self.certificates,
            initial: self.initial,
            post: self.post,
            reduction: self.reduction,
            y_shift: self.y_shift,
            lower_bound: self.lower_bound,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report())?)
    }
}

/// One row per piece: `atom,x,agent,fraction`.
pub fn allocation_csv(res: &SharingResult, x: &SimpleRandomVariable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["atom", "x", "agent", "fraction"]).map_err(io)?;
    for s in &res.sub_atoms {
        let xv = x.values().get(s.atom).ok_or(Error::CoverViolation(s.atom))?;
        w.serialize((s.atom, xv, s.agent, s.fraction)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
