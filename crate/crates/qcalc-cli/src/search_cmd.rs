//! The tightness-search command: wraps the random-restart hill climber and
//! emits per-cell results with the extremizing value vectors. Search runs in
//! the float backend; reports are JSON only (cells carry value vectors that
//! do not fit the fixed verify CSV schema).

use serde::{Deserialize, Serialize};

use qcalc::explore::{ratio_search, GeneratorConfig, SearchConfig, SearchResult, SearchSpace};
use qcalc::inequalities::InequalityId;
use qcalc::lattice::QLatticePartition;

use crate::campaign::{build_param_sets, parse_positive_scalar, parse_scalar_in_unit_interval};
use crate::records::{exponent_strings, SearchCellRecord, SearchReportFile};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchEcho {
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
    pub budget: u64,
    pub seed: u64,
}

pub struct SearchRun {
    pub space: SearchSpace,
    pub config: SearchConfig,
    pub echo: SearchEcho,
}

#[allow(clippy::too_many_arguments)]
pub fn validate_search(
    inequality: &str,
    q: Vec<String>,
    n: Vec<usize>,
    b: String,
    p: Option<Vec<String>>,
    s: Option<Vec<String>>,
    t: Option<Vec<String>>,
    r: Option<Vec<String>>,
    budget: u64,
    seed: u64,
    format: &str,
) -> Result<SearchRun, CliError> {
    if format != "json" {
        return Err(CliError::Config(
            "search reports are JSON only; drop --format or pass json".into(),
        ));
    }
    let inequality: InequalityId = inequality
        .parse()
        .map_err(|e: String| CliError::Config(e))?;
    if budget == 0 {
        return Err(CliError::Config("--budget must be at least 1".into()));
    }
    if q.is_empty() || n.is_empty() {
        return Err(CliError::Config("--q and --n need at least one value".into()));
    }
    let b_value: f64 = parse_positive_scalar("b", &b)?;
    let mut partitions = Vec::new();
    for q_text in &q {
        let q_value: f64 = parse_scalar_in_unit_interval("q", q_text)?;
        for n_value in &n {
            if *n_value == 0 {
                return Err(CliError::Config("--n values must be at least 1".into()));
            }
            partitions.push(
                QLatticePartition::shared(q_value, b_value, *n_value)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            );
        }
    }
    let params = build_param_sets(inequality, &p, &s, &t, &r)?;

    let echo = SearchEcho {
        command: "search".into(),
        inequality: inequality.to_string(),
        q,
        n,
        b,
        p,
        s,
        t,
        r,
        budget,
        seed,
    };
    let mut config = SearchConfig::new(budget, GeneratorConfig::uniform(seed));
    config.record_trajectory = true;
    Ok(SearchRun {
        space: SearchSpace {
            inequality,
            partitions,
            params,
        },
        config,
        echo,
    })
}

pub fn run_search(run: &SearchRun) -> Result<(SearchResult, String), CliError> {
    let result = ratio_search(&run.space, &run.config)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let cells = result
        .cells
        .iter()
        .map(|cell| {
            let [p, s, t, r] = exponent_strings(&cell.params);
            SearchCellRecord {
                q: cell.q.to_string(),
                n: cell.n,
                b: cell.b.to_string(),
                p,
                s,
                t,
                r,
                best_ratio: cell.best_ratio.to_string(),
                best_values: cell.best_values.iter().map(f64::to_string).collect(),
                best_second: cell
                    .best_second
                    .as_ref()
                    .map(|vs| vs.iter().map(f64::to_string).collect()),
                evaluations: cell.evaluations,
            }
        })
        .collect();

    let file = SearchReportFile {
        config: &run.echo,
        best_ratio: result.best_ratio.to_string(),
        best_cell: result.best_cell,
        evaluations: result.evaluations,
        cells,
        trajectory: result
            .trajectory
            .clone()
            .unwrap_or_default()
            .into_iter()
            .map(|(i, v)| (i, v.to_string()))
            .collect(),
    };
    let mut rendered =
        serde_json::to_string_pretty(&file).map_err(|e| CliError::Runtime(e.to_string()))?;
    rendered.push('\n');
    Ok((result, rendered))
}
