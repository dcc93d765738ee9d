//! Report records and writers.
//!
//! Scalars are serialized as strings: shortest round-trip decimals in float
//! mode and `numerator/denominator` in exact mode, so reports are bit-exact
//! under re-parsing. JSON reports carry the full value vectors of every
//! instance; the CSV format is the fixed 15-column table
//! `inequality_id,q,n,b,p,s,t,r,seed,backend,lhs,rhs,ratio,margin,holds`.

use serde::{Deserialize, Serialize};

use qcalc::inequalities::{ExponentParams, RatioValue, VerificationReport};
use qcalc::scalar::Scalar;

pub const CSV_HEADER: &str = "inequality_id,q,n,b,p,s,t,r,seed,backend,lhs,rhs,ratio,margin,holds";

/// One verified instance. String-typed scalars keep the record
/// backend-agnostic and byte-stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub inequality_id: String,
    pub q: String,
    pub n: usize,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    pub seed: u64,
    pub backend: String,
    pub lhs: String,
    pub rhs: String,
    pub ratio: String,
    pub margin: String,
    pub holds: bool,
    pub values_f: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values_g: Option<Vec<String>>,
}

impl VerifyRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.inequality_id,
            self.q,
            self.n,
            self.b,
            opt(&self.p),
            opt(&self.s),
            opt(&self.t),
            opt(&self.r),
            self.seed,
            self.backend,
            self.lhs,
            self.rhs,
            self.ratio,
            self.margin,
            self.holds
        )
    }
}

/// Per-cell aggregate for the printed summary table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub q: String,
    pub n: usize,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    pub trials: usize,
    pub max_ratio: f64,
    pub min_margin: f64,
    pub all_hold: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySummary {
    pub total_records: usize,
    pub failures: usize,
    pub all_hold: bool,
    pub cells: Vec<CellSummary>,
    /// Largest relative lhs/rhs disagreement between backends
    /// (`--backend both` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_max_divergence: Option<f64>,
    /// Instances whose backends disagree beyond 1e-10 relative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_divergent_instances: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReportFile<C> {
    pub config: C,
    pub records: Vec<VerifyRecord>,
    pub summary: VerifySummary,
}

/// One search cell with its extremizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchCellRecord {
    pub q: String,
    pub n: usize,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    pub best_ratio: String,
    pub best_values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_second: Option<Vec<String>>,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReportFile<C> {
    pub config: C,
    pub best_ratio: String,
    pub best_cell: usize,
    pub evaluations: u64,
    pub cells: Vec<SearchCellRecord>,
    pub trajectory: Vec<(u64, String)>,
}

/// Shortest round-trip decimal for a float, `num/den` for a rational.
pub fn scalar_string<S: Scalar>(value: &S) -> String {
    value.to_string()
}

pub fn ratio_string<S: Scalar>(ratio: &RatioValue<S>) -> String {
    ratio.to_string()
}

pub fn exponent_strings(params: &ExponentParams) -> [Option<String>; 4] {
    [
        params.p.map(|e| e.to_string()),
        params.s.map(|e| e.to_string()),
        params.t.map(|e| e.to_string()),
        params.r.map(|e| e.to_string()),
    ]
}

/// Assembles a record from a verification report plus instance metadata.
#[allow(clippy::too_many_arguments)]
pub fn record_from_report<S: Scalar>(
    report: &VerificationReport<S>,
    q: String,
    b: String,
    n: usize,
    seed: u64,
    values_f: &[S],
    values_g: Option<&[S]>,
) -> VerifyRecord {
    let [p, s, t, r] = exponent_strings(&report.params);
    VerifyRecord {
        inequality_id: report.inequality.to_string(),
        q,
        n,
        b,
        p,
        s,
        t,
        r,
        seed,
        backend: S::BACKEND.to_string(),
        lhs: scalar_string(&report.lhs),
        rhs: scalar_string(&report.rhs),
        ratio: ratio_string(&report.ratio),
        margin: scalar_string(&report.margin),
        holds: report.holds,
        values_f: values_f.iter().map(scalar_string).collect(),
        values_g: values_g.map(|vs| vs.iter().map(scalar_string).collect()),
    }
}

pub fn render_csv(records: &[VerifyRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for record in records {
        out.push_str(&record.csv_row());
        out.push('\n');
    }
    out
}
