//! Run reports.
//!
//! Structured output is line-delimited JSON. The first line is the report,
//! `{"type":"report","version":1,...}`, holding everything that depends only
//! on the search inputs; every big integer is a decimal string and every
//! rational is `"n/d"` (or `"n"`). The second line,
//! `{"type":"timing",...}`, carries wall time and worker count, so that two
//! runs of the same search differ only on that line.
//!
//! Text output prints the same report as `path: value` lines.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::SearchKey;
use crate::descent::{map_to_target, DescentStats, DescentTrace, Frontier, Status};
use crate::error::{Error, Result};
use crate::forms::Curve;
use crate::point::{RationalPoint, Variant};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(rename = "type")]
    pub kind: String,
    pub version: u32,
    pub status: Status,
    pub search: SearchKey,
    pub curve: Curve,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<RationalPoint>,
    /// `½·ln max(|num x|, den x)`, two decimals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naive_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<DescentTrace>,
    /// Some quartic was searched without a complete local proof.
    pub unproven: bool,
    pub stats: DescentStats,
    pub frontier: Frontier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    #[serde(rename = "type")]
    pub kind: String,
    pub version: u32,
    pub wall_seconds: f64,
    pub workers: usize,
}

impl Timing {
    pub fn new(wall_seconds: f64, workers: usize) -> Self {
        Self {
            kind: "timing".into(),
            version: REPORT_VERSION,
            wall_seconds,
            workers,
        }
    }
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl Report {
    /// Re-check a report on its own: the point is on the curve, the trace
    /// re-validates and maps to the reported point.
    pub fn verify(&self) -> Result<()> {
        if self.version != REPORT_VERSION || self.kind != "report" {
            return Err(Error::Invariant(format!("not a version {REPORT_VERSION} report")));
        }
        let curve = self.search.source.curve()?;
        if curve != self.curve {
            return Err(Error::Invariant("report curve does not match its source".into()));
        }
        match (self.status, &self.point, &self.trace, &self.variant) {
            (Status::Found, Some(p), Some(t), Some(v)) => {
                if !p.lies_on(&curve) {
                    return Err(Error::Invariant("reported point is not on the curve".into()));
                }
                if p.y().numer().sign() == num_bigint::Sign::NoSign {
                    return Err(Error::Invariant("reported point has y = 0".into()));
                }
                t.validate()?;
                let searched = t.point.as_ref().ok_or_else(|| Error::Invariant("trace without point".into()))?;
                if map_to_target(&curve, v, searched).as_ref() != Some(p) {
                    return Err(Error::Invariant("trace point does not map to the reported point".into()));
                }
                Ok(())
            }
            (Status::Found, ..) => Err(Error::Invariant("found report is missing the point or trace".into())),
            (_, None, None, None) => Ok(()),
            _ => Err(Error::Invariant("a point is reported without status found".into())),
        }
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// `path: value` lines of the same content.
    pub fn to_text(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut out = String::new();
        flatten("", &value, &mut out);
        Ok(out)
    }
}

/// Render the point the way the paper prints x.
pub fn describe_point(p: &RationalPoint) -> String {
    format!("x = {}\ny = {}", crate::point::format_rational(p.x()), crate::point::format_rational(p.y()))
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, v, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push_str(&format!("{prefix}: [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        _ => out.push_str(&format!("{prefix}: {}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
