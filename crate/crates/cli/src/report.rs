//! Report rows and the deterministic CSV/JSON writers.

use serde::Serialize;

use crate::config::ReportFormat;

pub const CSV_HEADER: &str = "domain_id,n,N,k,theorem,lhs,rhs,slack,trivial,degenerate_gap,\
lambda_k,lambda_k_plus_1,rho_min,rho_max,lambda_k_vs_1_plus_4_over_n";

/// One report row. Inequality rows fill every column; identity-suite
/// summary rows leave the k/λ columns empty and use `lhs` for the observed
/// defect (or worst slack), `rhs` for the gate, and `slack` for the margin.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub domain_id: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub num_vertices: usize,
    pub k: Option<usize>,
    pub theorem: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub trivial: Option<bool>,
    pub degenerate_gap: Option<bool>,
    pub lambda_k: Option<f64>,
    pub lambda_k_plus_1: Option<f64>,
    pub rho_min: f64,
    pub rho_max: f64,
    pub lambda_k_vs_1_plus_4_over_n: Option<bool>,
}

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_bool(b: Option<bool>) -> String {
    b.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            csv_escape(&r.domain_id),
            r.n.to_string(),
            r.num_vertices.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            csv_escape(&r.theorem),
            fmt_opt_f64(r.lhs),
            fmt_opt_f64(r.rhs),
            fmt_opt_f64(r.slack),
            fmt_opt_bool(r.trivial),
            fmt_opt_bool(r.degenerate_gap),
            fmt_opt_f64(r.lambda_k),
            fmt_opt_f64(r.lambda_k_plus_1),
            fmt_f64(r.rho_min),
            fmt_f64(r.rho_max),
            fmt_opt_bool(r.lambda_k_vs_1_plus_4_over_n),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
pub struct ReportMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct JsonReport<'a> {
    meta: &'a ReportMeta,
    rows: &'a [ReportRow],
}

pub fn to_json(meta: &ReportMeta, rows: &[ReportRow]) -> String {
    let mut out = serde_json::to_string_pretty(&JsonReport { meta, rows })
        .expect("report serialization cannot fail");
    out.push('\n');
    out
}

pub fn render(format: ReportFormat, meta: &ReportMeta, rows: &[ReportRow]) -> String {
    match format {
        ReportFormat::Csv => to_csv(rows),
        ReportFormat::Json => to_json(meta, rows),
    }
}
