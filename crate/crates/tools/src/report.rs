//! Machine-readable outputs. Every report opens with `# key<TAB>value` lines
//! describing the configuration that produced it.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use gsr_core::direct::DeltaGapTable;
use gsr_core::gsr::{AuditReport, DroppedQuery};
use gsr_core::GsrResult;
use sha2::{Digest, Sha256};

use crate::error::{FormatError, Result};

const DIGEST_PREFIX_BYTES: u64 = 16 << 20;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the first 16 MiB of a file plus its length, as 16 hex digits.
pub fn file_digest(path: &Path) -> Result<String> {
    let len = std::fs::metadata(path)?.len();
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut r = File::open(path)?.take(DIGEST_PREFIX_BYTES);
    loop {
        let n = r.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    h.update(len.to_le_bytes());
    Ok(hex(&h.finalize()[..8]))
}

pub fn text_digest(text: &str) -> String {
    hex(&Sha256::digest(text.as_bytes())[..8])
}

/// Ordered `key -> value` header.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Header(pub Vec<(String, String)>);

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string().replace(['\t', '\n'], " ")));
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("# {k}\t{v}\n")).collect()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn dropped_lines(out: &mut String, label: &str, dropped: &[DroppedQuery]) {
    for d in dropped {
        out.push_str(&format!("# {label}\t{}\t{}\n", d.query_id, d.reason.as_str()));
    }
}

fn points_table(out: &mut String, result: &GsrResult) {
    out.push_str("query_id\tg_q\tg_L\tk_used\n");
    for p in &result.points {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", p.query_id, p.gq, p.gl, p.k_used));
    }
}

pub fn audit_tsv(header: &Header, system: &str, report: &AuditReport) -> String {
    let mut out = String::from("# gsr audit\n");
    out.push_str(&format!("# system\t{system}\n"));
    out.push_str(&header.render());
    points_table(&mut out, &report.system);
    let r = &report.system;
    out.push_str(&format!("# slope\t{}\n", r.slope));
    out.push_str(&format!("# intercept\t{}\n", r.intercept));
    out.push_str(&format!("# n\t{}\n", r.n));
    out.push_str(&format!("# perfect_slope\t{}\n", report.perfect.slope));
    out.push_str(&format!("# relative_pct\t{}\n", opt(r.relative_pct)));
    dropped_lines(&mut out, "dropped", &report.system_dropped);
    dropped_lines(&mut out, "perfect_dropped", &report.perfect_dropped);
    out
}

/// A slope without a perfect-engine reference (toy and synthetic runs).
pub fn slope_tsv(header: &Header, system: &str, result: &GsrResult, dropped: &[DroppedQuery]) -> String {
    let mut out = String::from("# gsr audit\n");
    out.push_str(&format!("# system\t{system}\n"));
    out.push_str(&header.render());
    points_table(&mut out, result);
    out.push_str(&format!("# slope\t{}\n", result.slope));
    out.push_str(&format!("# intercept\t{}\n", result.intercept));
    out.push_str(&format!("# n\t{}\n", result.n));
    out.push_str(&format!("# relative_pct\t{}\n", opt(result.relative_pct)));
    dropped_lines(&mut out, "dropped", dropped);
    out
}

/// System name and slope read back from an audit report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub system: String,
    pub slope: f64,
    pub relative_pct: Option<f64>,
}

pub fn parse_audit_summary(text: &str) -> Result<ReportSummary> {
    let mut system = None;
    let mut slope = None;
    let mut relative_pct = None;
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.strip_prefix("# ") else { continue };
        let mut parts = rest.splitn(2, '\t');
        let (Some(k), Some(v)) = (parts.next(), parts.next()) else { continue };
        let num = |v: &str| {
            v.parse::<f64>().map_err(|_| FormatError::BadLine {
                line: i + 1,
                message: format!("{k}: {v:?} is not a number"),
            })
        };
        match k {
            "system" => system = Some(v.to_string()),
            "slope" => slope = Some(num(v)?),
            "relative_pct" if v != "NA" => relative_pct = Some(num(v)?),
            _ => {}
        }
    }
    match (system, slope) {
        (Some(system), Some(slope)) => Ok(ReportSummary {
            system,
            slope,
            relative_pct,
        }),
        _ => Err(FormatError::BadHeader("audit report lacks system or slope".into())),
    }
}

pub fn scatter_csv(result: &GsrResult) -> String {
    let mut out = String::from("query_id,g_q,g_L\n");
    for p in &result.points {
        out.push_str(&format!("{},{},{}\n", p.query_id, p.gq, p.gl));
    }
    out
}

/// Per-query rows of named metrics plus a trailing `mean` row.
pub fn metrics_tsv(header: &Header, names: &[&str], rows: &[(String, Vec<f64>)]) -> String {
    let mut out = header.render();
    out.push_str("query_id");
    for n in names {
        out.push('\t');
        out.push_str(n);
    }
    out.push('\n');
    let mut sums = vec![0.0; names.len()];
    for (q, vals) in rows {
        out.push_str(q);
        for (s, v) in sums.iter_mut().zip(vals) {
            *s += v;
            out.push_str(&format!("\t{v}"));
        }
        out.push('\n');
    }
    out.push_str("mean");
    for s in sums {
        let m = if rows.is_empty() { f64::NAN } else { s / rows.len() as f64 };
        out.push_str(&format!("\t{m}"));
    }
    out.push('\n');
    out
}

fn bound(b: Option<f64>, inf: &str) -> String {
    b.map_or_else(|| inf.to_string(), |x| x.to_string())
}

pub fn bins_tsv(header: &Header, table: &DeltaGapTable) -> String {
    let mut out = header.render();
    out.push_str("bin_lo\tbin_hi\tpct_male\tpct_female\tpct_neutral\tn_queries\n");
    for b in &table.bins {
        let pct = |v: Option<f64>| v.map_or_else(|| "empty".to_string(), |x| x.to_string());
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            bound(b.lo, "-inf"),
            bound(b.hi, "inf"),
            pct(b.pct_male),
            pct(b.pct_female),
            pct(b.pct_neutral),
            b.n_queries
        ));
    }
    out
}

pub fn gap_records_tsv(table: &DeltaGapTable) -> String {
    let mut out = String::from("query_id\tg_q\tm\tf\tgap\traw_delta_gap\tdelta_gap_sign\n");
    for r in &table.records {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.query_id,
            r.gq,
            r.m,
            r.f,
            r.gap,
            opt(r.raw_delta),
            r.delta_gap_sign
        ));
    }
    out
}
