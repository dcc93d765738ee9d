//! Randomized verification campaigns over (q, n, exponent) grids.
//!
//! Every grid cell runs `trials` seeded instances; instance seeds derive
//! from the master seed and the global instance index, so a campaign is
//! reproducible from its command line alone. Cells dispatch to a worker
//! pool; record order is by cell then trial regardless of scheduling.

use std::sync::Arc;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qcalc::explore::{derive_seed, FunctionGenerator, GeneratorConfig, HypothesisViolationKind};
use qcalc::inequalities::{
    verify_instance, verify_instance_float, ExponentParams, InequalityId, VerifyOptions,
};
use qcalc::lattice::{LatticeFunction, QLatticePartition};
use qcalc::scalar::{Exponent, Scalar};

use crate::records::{
    record_from_report, CellSummary, VerifyRecord, VerifyReportFile, VerifySummary,
};
use crate::CliError;

pub const BACKEND_AGREEMENT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    Float,
    Exact,
    Both,
}

impl BackendChoice {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "float" => Ok(BackendChoice::Float),
            "exact" => Ok(BackendChoice::Exact),
            "both" => Ok(BackendChoice::Both),
            other => Err(CliError::Config(format!(
                "unknown backend {other:?}; expected float, exact, or both"
            ))),
        }
    }

    pub fn wants_float(self) -> bool {
        matches!(self, BackendChoice::Float | BackendChoice::Both)
    }

    pub fn wants_exact(self) -> bool {
        matches!(self, BackendChoice::Exact | BackendChoice::Both)
    }
}

/// Echo of the resolved configuration, embedded in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignEcho {
    pub command: String,
    pub inequality: String,
    pub q: Vec<String>,
    pub n: Vec<usize>,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<String>>,
    pub trials: u64,
    pub seed: u64,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<String>,
    pub unchecked: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violate: Option<String>,
}

/// A validated campaign: everything needed to run instances.
pub struct Campaign {
    pub inequality: InequalityId,
    pub q_strings: Vec<String>,
    pub n_values: Vec<usize>,
    pub b_string: String,
    pub param_sets: Vec<ExponentParams>,
    pub trials: u64,
    pub seed: u64,
    pub backend: BackendChoice,
    pub tol_string: Option<String>,
    pub unchecked: bool,
    pub violate: Option<HypothesisViolationKind>,
    pub echo: CampaignEcho,
}

pub struct CampaignOutcome {
    pub records: Vec<VerifyRecord>,
    pub summary: VerifySummary,
}

fn parse_exponent_list(
    name: &str,
    values: &Option<Vec<String>>,
) -> Result<Option<Vec<Exponent>>, CliError> {
    let Some(values) = values else {
        return Ok(None);
    };
    if values.is_empty() {
        return Err(CliError::Config(format!("--{name} given with no values")));
    }
    values
        .iter()
        .map(|text| {
            text.parse::<Exponent>()
                .map_err(|e| CliError::Config(format!("--{name} {text:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn reject_inapplicable(
    inequality: InequalityId,
    name: &str,
    present: bool,
) -> Result<(), CliError> {
    if present {
        return Err(CliError::Config(format!(
            "--{name} does not apply to {inequality}"
        )));
    }
    Ok(())
}

/// Builds the exponent grid for the inequality, rejecting inapplicable or
/// out-of-domain flags.
#[allow(clippy::too_many_arguments)]
pub fn build_param_sets(
    inequality: InequalityId,
    p: &Option<Vec<String>>,
    s: &Option<Vec<String>>,
    t: &Option<Vec<String>>,
    r: &Option<Vec<String>>,
) -> Result<Vec<ExponentParams>, CliError> {
    let p_list = parse_exponent_list("p", p)?;
    let s_list = parse_exponent_list("s", s)?;
    let t_list = parse_exponent_list("t", t)?;
    let r_list = parse_exponent_list("r", r)?;

    match inequality {
        InequalityId::OpialGeneral | InequalityId::HolderStep => {
            reject_inapplicable(inequality, "s", s_list.is_some())?;
            reject_inapplicable(inequality, "t", t_list.is_some())?;
            reject_inapplicable(inequality, "r", r_list.is_some())?;
            let p_list =
                p_list.ok_or_else(|| CliError::Config(format!("{inequality} requires --p")))?;
            for p in &p_list {
                if p.is_negative() {
                    return Err(CliError::Config(format!("--p {p} must be >= 0")));
                }
            }
            Ok(p_list.into_iter().map(ExponentParams::for_p).collect())
        }
        InequalityId::OpialP1 | InequalityId::TwoFunction => {
            reject_inapplicable(inequality, "p", p_list.is_some())?;
            reject_inapplicable(inequality, "s", s_list.is_some())?;
            reject_inapplicable(inequality, "t", t_list.is_some())?;
            reject_inapplicable(inequality, "r", r_list.is_some())?;
            Ok(vec![ExponentParams::none()])
        }
        InequalityId::YoungPair => {
            reject_inapplicable(inequality, "p", p_list.is_some())?;
            reject_inapplicable(inequality, "r", r_list.is_some())?;
            let s_list =
                s_list.ok_or_else(|| CliError::Config(format!("{inequality} requires --s")))?;
            let t_list =
                t_list.ok_or_else(|| CliError::Config(format!("{inequality} requires --t")))?;
            for e in s_list.iter().chain(&t_list) {
                if !e.is_positive() {
                    return Err(CliError::Config(format!("--s/--t {e} must be > 0")));
                }
            }
            Ok(s_list
                .iter()
                .flat_map(|s| t_list.iter().map(move |t| ExponentParams::for_st(*s, *t)))
                .collect())
        }
        InequalityId::Wirtinger => {
            reject_inapplicable(inequality, "p", p_list.is_some())?;
            reject_inapplicable(inequality, "s", s_list.is_some())?;
            reject_inapplicable(inequality, "t", t_list.is_some())?;
            let r_list =
                r_list.ok_or_else(|| CliError::Config(format!("{inequality} requires --r")))?;
            for r in &r_list {
                if !r.is_positive() {
                    return Err(CliError::Config(format!("--r {r} must be > 0")));
                }
            }
            Ok(r_list.into_iter().map(ExponentParams::for_r).collect())
        }
    }
}

pub fn parse_scalar_in_unit_interval<S: Scalar>(name: &str, text: &str) -> Result<S, CliError> {
    let value =
        S::parse(text).map_err(|e| CliError::Config(format!("--{name} {text:?}: {e}")))?;
    if value <= S::zero() || value >= S::one() {
        return Err(CliError::Config(format!(
            "--{name} {text} must lie strictly between 0 and 1"
        )));
    }
    Ok(value)
}

pub fn parse_positive_scalar<S: Scalar>(name: &str, text: &str) -> Result<S, CliError> {
    let value =
        S::parse(text).map_err(|e| CliError::Config(format!("--{name} {text:?}: {e}")))?;
    if value <= S::zero() {
        return Err(CliError::Config(format!("--{name} {text} must be positive")));
    }
    Ok(value)
}

impl Campaign {
    /// Validates the whole configuration up front; nothing runs and nothing
    /// is written unless this succeeds.
    #[allow(clippy::too_many_arguments)]
    pub fn validate(
        inequality: &str,
        q: Vec<String>,
        n: Vec<usize>,
        b: String,
        p: Option<Vec<String>>,
        s: Option<Vec<String>>,
        t: Option<Vec<String>>,
        r: Option<Vec<String>>,
        trials: u64,
        seed: u64,
        backend: &str,
        tol: Option<String>,
        unchecked: bool,
        violate: Option<String>,
    ) -> Result<Self, CliError> {
        let inequality: InequalityId = inequality
            .parse()
            .map_err(|e: String| CliError::Config(e))?;
        let backend = BackendChoice::parse(backend)?;
        if q.is_empty() {
            return Err(CliError::Config("--q needs at least one value".into()));
        }
        if n.is_empty() {
            return Err(CliError::Config("--n needs at least one value".into()));
        }
        for n_value in &n {
            if *n_value == 0 {
                return Err(CliError::Config("--n values must be at least 1".into()));
            }
        }
        if trials == 0 {
            return Err(CliError::Config("--trials must be at least 1".into()));
        }

        // Each q and b must parse and satisfy the lattice domain in every
        // backend the campaign will run.
        for q_text in &q {
            if backend.wants_float() {
                parse_scalar_in_unit_interval::<f64>("q", q_text)?;
            }
            if backend.wants_exact() {
                parse_scalar_in_unit_interval::<BigRational>("q", q_text)?;
            }
        }
        if backend.wants_float() {
            parse_positive_scalar::<f64>("b", &b)?;
        }
        if backend.wants_exact() {
            parse_positive_scalar::<BigRational>("b", &b)?;
        }
        if let Some(tol_text) = &tol {
            if backend.wants_float() {
                let value = f64::parse(tol_text)
                    .map_err(|e| CliError::Config(format!("--tol {tol_text:?}: {e}")))?;
                if value < 0.0 {
                    return Err(CliError::Config("--tol must be nonnegative".into()));
                }
            }
            if backend.wants_exact() {
                let value = BigRational::parse(tol_text)
                    .map_err(|e| CliError::Config(format!("--tol {tol_text:?}: {e}")))?;
                if value < BigRational::zero() {
                    return Err(CliError::Config("--tol must be nonnegative".into()));
                }
            }
        }

        let param_sets = build_param_sets(inequality, &p, &s, &t, &r)?;
        if backend.wants_exact() {
            for params in &param_sets {
                if !params.all_integral() {
                    return Err(CliError::Config(
                        "the exact backend requires integer exponents".into(),
                    ));
                }
            }
        }

        let violate_kind = match violate.as_deref() {
            None => None,
            Some("boundary") => Some(HypothesisViolationKind::Boundary),
            Some("monotonicity") => Some(HypothesisViolationKind::Monotonicity),
            Some(other) => {
                return Err(CliError::Config(format!(
                    "unknown --violate {other:?}; expected boundary or monotonicity"
                )))
            }
        };
        if violate_kind.is_some() && !unchecked {
            return Err(CliError::Config(
                "--violate requires --unchecked".into(),
            ));
        }

        let echo = CampaignEcho {
            command: "verify".into(),
            inequality: inequality.to_string(),
            q: q.clone(),
            n: n.clone(),
            b: b.clone(),
            p,
            s,
            t,
            r,
            trials,
            seed,
            backend: match backend {
                BackendChoice::Float => "float",
                BackendChoice::Exact => "exact",
                BackendChoice::Both => "both",
            }
            .into(),
            tol: tol.clone(),
            unchecked,
            violate,
        };

        Ok(Campaign {
            inequality,
            q_strings: q,
            n_values: n,
            b_string: b,
            param_sets,
            trials,
            seed,
            backend,
            tol_string: tol,
            unchecked,
            violate: violate_kind,
            echo,
        })
    }

    pub fn run(&self) -> Result<CampaignOutcome, CliError> {
        let cells: Vec<(usize, usize, usize)> = self
            .q_strings
            .iter()
            .enumerate()
            .flat_map(|(qi, _)| {
                self.n_values.iter().enumerate().flat_map(move |(ni, _)| {
                    (0..self.param_sets.len()).map(move |pi| (qi, ni, pi))
                })
            })
            .collect();

        let float_parts: Option<Vec<Vec<Arc<QLatticePartition<f64>>>>> = self
            .backend
            .wants_float()
            .then(|| self.partitions::<f64>())
            .transpose()?;
        let exact_parts: Option<Vec<Vec<Arc<QLatticePartition<BigRational>>>>> = self
            .backend
            .wants_exact()
            .then(|| self.partitions::<BigRational>())
            .transpose()?;

        let float_tol: Option<f64> = self
            .tol_string
            .as_ref()
            .map(|t| f64::parse(t).expect("validated"));
        let exact_tol: Option<BigRational> = self
            .tol_string
            .as_ref()
            .map(|t| BigRational::parse(t).expect("validated"));

        struct InstanceOutput {
            records: Vec<VerifyRecord>,
            divergence: Option<f64>,
        }

        let instances: Vec<u64> = (0..cells.len() as u64 * self.trials).collect();
        let outputs: Vec<InstanceOutput> = instances
            .par_iter()
            .map(|global| {
                let cell = (global / self.trials) as usize;
                let (qi, ni, pi) = cells[cell];
                let params = &self.param_sets[pi];
                let instance_seed = derive_seed(self.seed, *global);
                let mut records = Vec::with_capacity(2);

                let mut float_sides: Option<(f64, f64)> = None;
                let mut exact_sides: Option<(f64, f64)> = None;

                if let Some(parts) = &float_parts {
                    let partition = &parts[qi][ni];
                    let (f, g) = self.generate::<f64>(partition, instance_seed);
                    let opts = VerifyOptions {
                        check_hypotheses: !self.unchecked,
                        tolerance: float_tol,
                    };
                    let report =
                        verify_instance_float(self.inequality, &f, g.as_ref(), params, &opts)
                            .map_err(|e| CliError::Runtime(e.to_string()))?;
                    float_sides = Some((report.lhs, report.rhs));
                    records.push(record_from_report(
                        &report,
                        self.q_strings[qi].clone(),
                        self.b_string.clone(),
                        self.n_values[ni],
                        instance_seed,
                        f.values(),
                        g.as_ref().map(|g| g.values()),
                    ));
                }

                if let Some(parts) = &exact_parts {
                    let partition = &parts[qi][ni];
                    let (f, g) = self.generate::<BigRational>(partition, instance_seed);
                    let opts = VerifyOptions {
                        check_hypotheses: !self.unchecked,
                        tolerance: exact_tol.clone(),
                    };
                    let report =
                        verify_instance(self.inequality, &f, g.as_ref(), params, &opts)
                            .map_err(|e| CliError::Runtime(e.to_string()))?;
                    exact_sides = Some((report.lhs.to_f64(), report.rhs.to_f64()));
                    records.push(record_from_report(
                        &report,
                        self.q_strings[qi].clone(),
                        self.b_string.clone(),
                        self.n_values[ni],
                        instance_seed,
                        f.values(),
                        g.as_ref().map(|g| g.values()),
                    ));
                }

                let divergence = match (float_sides, exact_sides) {
                    (Some((fl, fr)), Some((el, er))) => {
                        let rel = |a: f64, b: f64| {
                            let scale = a.abs().max(b.abs());
                            if scale == 0.0 {
                                0.0
                            } else {
                                (a - b).abs() / scale
                            }
                        };
                        Some(rel(fl, el).max(rel(fr, er)))
                    }
                    _ => None,
                };
                Ok(InstanceOutput {
                    records,
                    divergence,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;

        let records: Vec<VerifyRecord> = outputs
            .iter()
            .flat_map(|o| o.records.iter().cloned())
            .collect();
        let failures = records.iter().filter(|r| !r.holds).count();

        let mut cell_summaries: Vec<CellSummary> = Vec::new();
        for (cell_index, (qi, ni, pi)) in cells.iter().enumerate() {
            let start = cell_index as u64 * self.trials;
            let cell_outputs = &outputs[start as usize..(start + self.trials) as usize];
            let backends: &[&str] = match self.backend {
                BackendChoice::Float => &["float"],
                BackendChoice::Exact => &["exact"],
                BackendChoice::Both => &["float", "exact"],
            };
            for (which, backend_name) in backends.iter().enumerate() {
                let cell_records: Vec<&VerifyRecord> = cell_outputs
                    .iter()
                    .map(|o| &o.records[which])
                    .collect();
                let mut max_ratio = f64::NEG_INFINITY;
                let mut min_margin = f64::INFINITY;
                let mut all_hold = true;
                for record in &cell_records {
                    if let Ok(ratio) = parse_scalar_approx(&record.ratio) {
                        if ratio.is_finite() {
                            max_ratio = max_ratio.max(ratio);
                        }
                    }
                    if let Ok(margin) = parse_scalar_approx(&record.margin) {
                        min_margin = min_margin.min(margin);
                    }
                    all_hold &= record.holds;
                }
                let params = &self.param_sets[*pi];
                cell_summaries.push(CellSummary {
                    q: self.q_strings[*qi].clone(),
                    n: self.n_values[*ni],
                    backend: (*backend_name).into(),
                    p: params.p.map(|e| e.to_string()),
                    s: params.s.map(|e| e.to_string()),
                    t: params.t.map(|e| e.to_string()),
                    r: params.r.map(|e| e.to_string()),
                    trials: cell_records.len(),
                    max_ratio,
                    min_margin,
                    all_hold,
                });
            }
        }

        let divergences: Vec<f64> = outputs.iter().filter_map(|o| o.divergence).collect();
        let (backend_max_divergence, backend_divergent_instances) = if divergences.is_empty() {
            (None, None)
        } else {
            (
                Some(divergences.iter().cloned().fold(0.0, f64::max)),
                Some(
                    divergences
                        .iter()
                        .filter(|d| **d > BACKEND_AGREEMENT_TOL)
                        .count(),
                ),
            )
        };

        let summary = VerifySummary {
            total_records: records.len(),
            failures,
            all_hold: failures == 0,
            cells: cell_summaries,
            backend_max_divergence,
            backend_divergent_instances,
        };

        Ok(CampaignOutcome { records, summary })
    }

    fn partitions<S: Scalar>(&self) -> Result<Vec<Vec<Arc<QLatticePartition<S>>>>, CliError> {
        let b = S::parse(&self.b_string).expect("validated");
        self.q_strings
            .iter()
            .map(|q_text| {
                let q = S::parse(q_text).expect("validated");
                self.n_values
                    .iter()
                    .map(|n| {
                        QLatticePartition::shared(q.clone(), b.clone(), *n)
                            .map_err(|e| CliError::Config(e.to_string()))
                    })
                    .collect()
            })
            .collect()
    }

    fn generate<S: Scalar>(
        &self,
        partition: &Arc<QLatticePartition<S>>,
        seed: u64,
    ) -> (LatticeFunction<S>, Option<LatticeFunction<S>>) {
        let mut gen = FunctionGenerator::new(GeneratorConfig::uniform(seed));
        let make = |gen: &mut FunctionGenerator| match self.violate {
            None => gen.q_decreasing(partition),
            Some(HypothesisViolationKind::Boundary) => gen.boundary_violating(partition),
            Some(HypothesisViolationKind::Monotonicity) => gen.non_monotone(partition),
        };
        let f = make(&mut gen);
        let g = self
            .inequality
            .needs_second_function()
            .then(|| make(&mut gen));
        (f, g)
    }
}

/// Record scalars arrive as float strings or `num/den` rationals; the
/// summary table only needs an approximation.
fn parse_scalar_approx(text: &str) -> Result<f64, ()> {
    if let Ok(v) = text.parse::<f64>() {
        return Ok(v);
    }
    num_rational::BigRational::parse(text)
        .map(|v| v.to_f64())
        .map_err(|_| ())
}

pub fn render_report<C: Serialize>(
    config: &C,
    outcome: &CampaignOutcome,
    format: &str,
) -> Result<String, CliError> {
    match format {
        "json" => {
            let file = VerifyReportFile {
                config,
                records: outcome.records.clone(),
                summary: outcome.summary.clone(),
            };
            let mut text = serde_json::to_string_pretty(&file)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        "csv" => Ok(crate::records::render_csv(&outcome.records)),
        other => Err(CliError::Config(format!(
            "unknown format {other:?}; expected json or csv"
        ))),
    }
}

pub fn summary_table(summary: &VerifySummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:<7} {:>4}  {:<16} {:>7} {:>14} {:>14}  {}\n",
        "q", "backend", "n", "params", "trials", "max_ratio", "min_margin", "holds"
    ));
    for cell in &summary.cells {
        let mut params = String::new();
        for (name, value) in [("p", &cell.p), ("s", &cell.s), ("t", &cell.t), ("r", &cell.r)] {
            if let Some(value) = value {
                if !params.is_empty() {
                    params.push(' ');
                }
                params.push_str(&format!("{name}={value}"));
            }
        }
        if params.is_empty() {
            params.push('-');
        }
        out.push_str(&format!(
            "{:<10} {:<7} {:>4}  {:<16} {:>7} {:>14.6e} {:>14.6e}  {}\n",
            cell.q,
            cell.backend,
            cell.n,
            params,
            cell.trials,
            cell.max_ratio,
            cell.min_margin,
            if cell.all_hold { "yes" } else { "NO" }
        ));
    }
    out.push_str(&format!(
        "total records: {}; failures: {}\n",
        summary.total_records, summary.failures
    ));
    if let Some(divergence) = summary.backend_max_divergence {
        let flagged = summary.backend_divergent_instances.unwrap_or(0);
        out.push_str(&format!(
            "backend agreement: max relative divergence {divergence:.3e}; instances beyond {BACKEND_AGREEMENT_TOL:.0e}: {flagged}\n"
        ));
    }
    out
}
