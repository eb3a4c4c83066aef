//! File formats. Every output carries a [`Provenance`] block with the tool
//! version and the full run configuration: as a `meta` object in JSON, as
//! leading `#` lines in CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::SlotSample;
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::sim::{BatchStats, ProbeRecord, SlotTrace};

pub const TOOL: &str = "contention";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
}

impl Provenance {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
        }
    }

    pub fn write_csv_comment<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# {} {} {}", self.tool, self.version, self.command)?;
        writeln!(w, "# config {}", self.config)
    }
}

fn io(context: &str) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        context: context.into(),
        source,
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            context: "writing csv".into(),
            source,
        },
        other => Error::Io {
            context: "writing csv".into(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookHeader {
    pub n_users: u32,
    pub epsilon: f64,
    pub residual_mass: f64,
    pub entropy_bits: f64,
    pub expected_delay: f64,
    pub enumerated_entropy_bits: f64,
    pub delay_lower: f64,
    pub delay_upper: f64,
    pub entries: usize,
    pub truncated: bool,
}

impl CodebookHeader {
    pub fn of(cb: &Codebook) -> Self {
        let h = cb.entropy();
        let d = cb.expected_delay();
        Self {
            n_users: cb.n_users(),
            epsilon: cb.epsilon(),
            residual_mass: cb.residual_mass(),
            entropy_bits: h.estimate_bits,
            expected_delay: d.estimate,
            enumerated_entropy_bits: h.enumerated_bits,
            delay_lower: d.lower,
            delay_upper: d.upper,
            entries: cb.entries().len(),
            truncated: cb.truncated(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRow {
    pub threshold: f64,
    pub codeword: String,
    pub probability: f64,
    pub depth: usize,
}

fn rows(cb: &Codebook, limit: Option<usize>) -> impl Iterator<Item = EntryRow> + '_ {
    cb.entries()
        .iter()
        .take(limit.unwrap_or(usize::MAX))
        .map(|e| EntryRow {
            threshold: e.threshold,
            codeword: e.codeword.to_string(),
            probability: e.probability,
            depth: e.depth,
        })
}

/// `{meta, header, entries}`; `limit` keeps only the most probable entries.
pub fn codebook_json(cb: &Codebook, meta: &Provenance, limit: Option<usize>) -> Value {
    json!({
        "meta": meta,
        "header": CodebookHeader::of(cb),
        "entries": rows(cb, limit).collect::<Vec<_>>(),
    })
}

pub fn write_codebook_csv<W: Write>(
    mut w: W,
    cb: &Codebook,
    meta: &Provenance,
    limit: Option<usize>,
) -> Result<()> {
    meta.write_csv_comment(&mut w).map_err(io("writing csv"))?;
    let header = serde_json::to_string(&CodebookHeader::of(cb)).expect("plain struct");
    writeln!(w, "# header {header}").map_err(io("writing csv"))?;
    let mut out = csv::Writer::from_writer(w);
    for row in rows(cb, limit) {
        out.serialize(row).map_err(csv_err)?;
    }
    out.flush().map_err(io("writing csv"))
}

/// One line of a batch summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub n_users: usize,
    pub channel: String,
    pub strategy: String,
    pub slots: u64,
    #[serde(rename = "K")]
    pub max_minislots: usize,
    pub seed: u64,
    pub mean_delay_conditional: f64,
    pub mean_delay_charged: f64,
    pub delay_std_error: f64,
    pub success_rate: f64,
    pub empirical_entropy_bits: f64,
}

impl BatchRow {
    pub fn new(n_users: usize, channel: &str, strategy: &str, stats: &BatchStats) -> Self {
        Self {
            n_users,
            channel: channel.into(),
            strategy: strategy.into(),
            slots: stats.slots,
            max_minislots: stats.max_minislots,
            seed: stats.seed,
            mean_delay_conditional: stats.mean_delay_conditional,
            mean_delay_charged: stats.mean_delay_charged,
            delay_std_error: stats.delay_std_error,
            success_rate: stats.success_rate,
            empirical_entropy_bits: stats.empirical_codeword_entropy,
        }
    }
}

/// Rows of any serializable record type, after the provenance comment.
pub fn write_rows_csv<W: Write, T: Serialize>(
    mut w: W,
    meta: &Provenance,
    rows: &[T],
) -> Result<()> {
    meta.write_csv_comment(&mut w).map_err(io("writing csv"))?;
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row).map_err(csv_err)?;
    }
    out.flush().map_err(io("writing csv"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub slot: u64,
    pub gains: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aux: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub state: Option<usize>,
    pub codeword: String,
    pub probes: Vec<ProbeRecord>,
    pub winner: Option<usize>,
    pub minislots: usize,
    pub declared: bool,
}

impl TraceLine {
    pub fn new(slot: u64, sample: &SlotSample, trace: &SlotTrace) -> Self {
        Self {
            slot,
            gains: sample.gains.clone(),
            aux: sample.aux.clone(),
            state: sample.state,
            codeword: trace.codeword().to_string(),
            probes: trace.probes.clone(),
            winner: trace.winner,
            minislots: trace.minislots_used,
            declared: trace.declared_without_probe,
        }
    }
}

/// Writes one JSON object per line.
pub fn write_json_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(|e| Error::Io {
        context: "writing json".into(),
        source: e.into(),
    })?;
    writeln!(w).map_err(io("writing json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::CodebookBuilder;

    #[test]
    fn codebook_csv_has_header_row_after_comments() {
        let cb = CodebookBuilder::new(2).epsilon(1e-3).build().unwrap();
        let meta = Provenance::new("codebook", json!({"n_users": 2}));
        let mut buf = Vec::new();
        write_codebook_csv(&mut buf, &cb, &meta, Some(3)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# contention"));
        assert_eq!(lines[3], "threshold,codeword,probability,depth");
        assert_eq!(lines[4], "0.5,1,0.5,1");
        assert_eq!(lines[5], "0.75,e1,0.125,2");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn codebook_json_shape() {
        let cb = CodebookBuilder::new(2).epsilon(1e-3).build().unwrap();
        let v = codebook_json(&cb, &Provenance::new("codebook", json!({})), None);
        assert_eq!(v["meta"]["version"], VERSION);
        assert_eq!(v["header"]["n_users"], 2);
        assert_eq!(v["entries"][2]["codeword"], "01");
        assert_eq!(v["entries"][2]["threshold"], 0.25);
    }
}
