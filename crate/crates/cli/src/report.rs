//! Output assembly. Every number leaves as a decimal string; balls carry an
//! explicit radius.

use std::io::Write;

use serde_json::{json, Map, Value};

use nwheat::numerics::{format_ball, format_mag_up, Ball, Mag, SignedLog};

use crate::args::Format;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const MAX_DIGITS: u32 = 40;

pub struct Report {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub results: Vec<Value>,
    pub certified: bool,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &'static str, params: Map<String, Value>) -> Report {
        Report { command, params, results: Vec::new(), certified: true, csv_header: Vec::new(), csv_rows: Vec::new() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "params": self.params,
            "results": self.results,
            "certified": self.certified,
        })
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json()).map_err(|e| CliError::Compute(e.to_string()))?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.csv_header)?;
                for row in &self.csv_rows {
                    w.write_record(row)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

pub fn ball(b: &Ball) -> Value {
    let d = format_ball(b, MAX_DIGITS);
    json!({ "mid": d.mid, "rad": d.rad })
}

pub fn ball_fields(b: &Ball) -> [String; 2] {
    let d = format_ball(b, MAX_DIGITS);
    [d.mid, d.rad]
}

pub fn mag(m: Mag) -> Value {
    Value::String(format_mag_up(m))
}

pub fn slog(s: &SignedLog) -> Value {
    if s.is_zero() {
        return json!({ "sign": 0 });
    }
    json!({ "sign": s.sign().as_i8(), "ln_abs": ball(s.logmag()) })
}

/// `log10` of a positive log-magnitude, as a short decimal for tables.
pub fn log10_str(s: &SignedLog) -> String {
    if s.is_zero() {
        return "-inf".into();
    }
    format!("{:.6}", s.logmag().to_f64() / std::f64::consts::LN_10)
}
