//! Versioned run reports.
//!
//! A report has a header (tool, version, wall-clock time) and a body (the
//! normalized arguments, seed and results). Everything that can vary between
//! identical runs lives in the header, so equal inputs give equal bodies.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Header {
    pub fn now() -> Self {
        Header {
            tool: TOOL.into(),
            version: VERSION.into(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub command: String,
    /// Arguments that determine the results; output and threading flags are
    /// dropped.
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub results: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub header: Header,
    pub body: Body,
}

impl Report {
    pub fn new(body: Body) -> Self {
        Report {
            schema: SCHEMA,
            header: Header::now(),
            body,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))?;
        if report.schema != SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported report schema {} (expected {SCHEMA})",
                report.schema
            )));
        }
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// `key,value` rows with dotted keys for nested fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let value = serde_json::to_value(self).expect("reports serialize");
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["key", "value"]).map_err(io)?;
        for (k, v) in rows {
            w.write_record([k, v]).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
