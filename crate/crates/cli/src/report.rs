//! Per-method aggregation of case records.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use segkit::metrics::SegReport;
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::record::CaseRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub case_id: String,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub report: Option<SegReport>,
}

/// Column means; `None` where no finite value contributed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Means {
    pub dice: Option<f64>,
    pub accuracy: Option<f64>,
    pub ri: Option<f64>,
    pub voi: Option<f64>,
    pub gce: Option<f64>,
    pub bde: Option<f64>,
    pub psnr: Option<f64>,
    pub mae: Option<f64>,
}

impl Means {
    fn from_values(v: [Option<f64>; 8]) -> Self {
        Self {
            dice: v[0],
            accuracy: v[1],
            ri: v[2],
            voi: v[3],
            gce: v[4],
            bde: v[5],
            psnr: v[6],
            mae: v[7],
        }
    }

    pub fn values(&self) -> [Option<f64>; 8] {
        [
            self.dice,
            self.accuracy,
            self.ri,
            self.voi,
            self.gce,
            self.bde,
            self.psnr,
            self.mae,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub cases: usize,
    /// Cases that carried a report.
    pub scored: usize,
    /// Scored cases whose PSNR was infinite and left out of its mean.
    pub psnr_inf: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub mean: Means,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub cases: Vec<CaseRow>,
    pub summary: Vec<MethodSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Rows sorted by case id then method; one summary per method present.
pub fn aggregate(records: &[CaseRecord]) -> Result<AggregateReport> {
    if records.is_empty() {
        bail!("no case records to aggregate");
    }
    let mut cases: Vec<CaseRow> = records
        .iter()
        .map(|r| CaseRow {
            case_id: r.case_id.clone(),
            method: r.method,
            confidence: r.confidence,
            report: r.report,
        })
        .collect();
    cases.sort_by(|a, b| (&a.case_id, a.method).cmp(&(&b.case_id, b.method)));
    if let Some(w) = cases
        .windows(2)
        .find(|w| (&w[0].case_id, w[0].method) == (&w[1].case_id, w[1].method))
    {
        bail!("case {} appears twice for {}", w[0].case_id, w[0].method.as_str());
    }

    let mut by_method: BTreeMap<Method, Vec<&CaseRow>> = BTreeMap::new();
    for row in &cases {
        by_method.entry(row.method).or_default().push(row);
    }
    let summary = by_method
        .into_iter()
        .map(|(method, rows)| {
            let reports: Vec<SegReport> = rows.iter().filter_map(|r| r.report).collect();
            let mut cols = [None; 8];
            for (k, col) in cols.iter_mut().enumerate() {
                *col = mean(reports.iter().map(|r| r.values()[k]).filter(|v| v.is_finite()));
            }
            MethodSummary {
                method,
                cases: rows.len(),
                scored: reports.len(),
                psnr_inf: reports.iter().filter(|r| r.psnr.is_infinite()).count(),
                confidence: mean(rows.iter().filter_map(|r| r.confidence)),
                mean: Means::from_values(cols),
            }
        })
        .collect();
    Ok(AggregateReport { cases, summary })
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_infinite() => "inf".to_string(),
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    }
}

/// Fixed-width table: one line per case, then one `mean` line per method.
pub fn render_text(agg: &AggregateReport) -> String {
    let with_conf = agg.cases.iter().any(|r| r.confidence.is_some());
    let id_w = agg
        .cases
        .iter()
        .map(|r| r.case_id.len())
        .chain(["mean".len(), "case".len()])
        .max()
        .unwrap_or(4);

    let mut out = String::new();
    let mut header = format!("{:<id_w$}  {:<8}", "case", "method");
    if with_conf {
        let _ = write!(header, "  {:>10}", "confidence");
    }
    for f in SegReport::FIELDS {
        let _ = write!(header, "  {f:>9}");
    }
    out.push_str(header.trim_end());
    out.push('\n');

    let mut line = |id: &str, method: Method, conf: Option<f64>, vals: [Option<f64>; 8]| {
        let mut s = format!("{id:<id_w$}  {:<8}", method.as_str());
        if with_conf {
            let _ = write!(s, "  {:>10}", cell(conf));
        }
        for v in vals {
            let _ = write!(s, "  {:>9}", cell(v));
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    for r in &agg.cases {
        let vals = r.report.map(|rep| rep.values().map(Some)).unwrap_or([None; 8]);
        line(&r.case_id, r.method, r.confidence, vals);
    }
    for s in &agg.summary {
        line("mean", s.method, s.confidence, s.mean.values());
    }
    for s in agg.summary.iter().filter(|s| s.psnr_inf > 0) {
        let _ = writeln!(
            out,
            "{}: {} of {} scored cases had psnr=inf (excluded from the mean)",
            s.method.as_str(),
            s.psnr_inf,
            s.scored
        );
    }
    out
}
