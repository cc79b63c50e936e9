//! Run-report plumbing shared by the CLI: every output starts with a header
//! line carrying the schema version, the full configuration echo and a stable
//! content hash of it, so replays with the same configuration are verifiably
//! byte-identical in the body.

use std::io::Write;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// FNV-1a over the canonical config string; stable across platforms.
pub fn config_hash(config: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in config.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Round-trip safe float formatting: 17 significant digits, '.' decimal.
pub fn fmt_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(crate::error::Error::InvalidParameter(format!(
                "unknown output format '{other}'"
            ))),
        }
    }
}

/// Writer that emits the standard header and then delegates rows.
pub struct Report<W: Write> {
    sink: W,
    format: OutputFormat,
    wrote_json_rows: bool,
}

impl<W: Write> Report<W> {
    pub fn new(mut sink: W, format: OutputFormat, command: &str, config: &str) -> Result<Self> {
        let hash = config_hash(config);
        match format {
            OutputFormat::Csv => {
                writeln!(
                    sink,
                    "# schema={SCHEMA_VERSION} command={command} config=\"{config}\" hash={hash:016x}"
                )?;
            }
            OutputFormat::Json => {
                writeln!(
                    sink,
                    "{{\"schema\":{SCHEMA_VERSION},\"command\":\"{command}\",\"config\":\"{config}\",\"hash\":\"{hash:016x}\"}}"
                )?;
            }
        }
        Ok(Report {
            sink,
            format,
            wrote_json_rows: false,
        })
    }

    pub fn format(&self) -> OutputFormat {
        self.format
    }

    pub fn csv_header(&mut self, columns: &[&str]) -> Result<()> {
        if self.format == OutputFormat::Csv {
            writeln!(self.sink, "{}", columns.join(","))?;
        }
        Ok(())
    }

    pub fn csv_row(&mut self, values: &[f64]) -> Result<()> {
        match self.format {
            OutputFormat::Csv => {
                let row: Vec<String> = values.iter().map(|v| fmt_float(*v)).collect();
                writeln!(self.sink, "{}", row.join(","))?;
            }
            OutputFormat::Json => {
                let row: Vec<String> = values.iter().map(|v| fmt_float(*v)).collect();
                writeln!(self.sink, "[{}]", row.join(","))?;
                self.wrote_json_rows = true;
            }
        }
        Ok(())
    }

    /// A JSON document line (also emitted under CSV as a trailing comment
    /// footer, so CSV bodies stay machine-readable).
    pub fn json_value(&mut self, value: &serde_json::Value) -> Result<()> {
        match self.format {
            OutputFormat::Csv => writeln!(self.sink, "# {value}")?,
            OutputFormat::Json => writeln!(self.sink, "{value}")?,
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.sink.flush()?;
        Ok(self.sink)
    }
}
