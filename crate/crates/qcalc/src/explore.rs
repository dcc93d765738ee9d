//! Random generation of hypothesis-satisfying lattice functions, stochastic
//! tightness search, and hypothesis-necessity probes.
//!
//! Generated functions are built from nonnegative increments:
//! `values[0] = 0`, `values[j+1] = values[j] + delta_j`, so they satisfy the
//! q-decreasing and zero-boundary hypotheses by construction. Increments are
//! drawn in double precision and quantized onto a dyadic grid (multiples of
//! `2^-32`, capped at `2^14`), so the same draw produces bit-identical
//! lattice values in the float and exact backends.
//!
//! The tightness search runs independent random restarts with coordinatewise
//! hill climbing on the increment vectors, maximizing the lhs/rhs ratio of a
//! chosen inequality. Restarts derive their generators from (master seed,
//! cell index, restart index), so results are reproducible and independent
//! of scheduling; cells run on a worker pool.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::inequalities::{
    ExponentParams, InequalityId, VerificationReport, VerifyError, VerifyOptions, verify_instance,
};
use crate::lattice::{LatticeFunction, QLatticePartition};
use crate::scalar::{Exponent, Scalar};

/// Increment grid: multiples of 2^-32 capped at 2^14. Cumulative sums of up
/// to 128 such increments stay exactly representable in an f64 mantissa.
const INCREMENT_GRID: f64 = 4_294_967_296.0; // 2^32
const INCREMENT_CAP: f64 = 16_384.0; // 2^14

/// Evaluations per hill-climbing restart.
const RESTART_EVALS: u64 = 200;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ExploreError {
    #[error("zero_fraction must lie in [0, 1], got {0}")]
    InvalidZeroFraction(f64),
    #[error("distribution parameter must be positive and finite, got {0}")]
    InvalidDistributionParameter(f64),
    #[error("search budget must be at least 1")]
    EmptyBudget,
    #[error("search grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// How increment magnitudes are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IncrementDistribution {
    /// Uniform on [0, 1).
    Uniform01,
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// Shifted Pareto `(1-u)^(-1/alpha) - 1`; small `alpha` gives heavy tails.
    HeavyTail { alpha: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub distribution: IncrementDistribution,
    /// Probability of forcing an increment to 0, creating plateaus.
    pub zero_fraction: f64,
}

impl GeneratorConfig {
    pub fn new(
        seed: u64,
        distribution: IncrementDistribution,
        zero_fraction: f64,
    ) -> Result<Self, ExploreError> {
        if !(0.0..=1.0).contains(&zero_fraction) {
            return Err(ExploreError::InvalidZeroFraction(zero_fraction));
        }
        let param = match distribution {
            IncrementDistribution::Uniform01 => 1.0,
            IncrementDistribution::Exponential { mean } => mean,
            IncrementDistribution::HeavyTail { alpha } => alpha,
        };
        if !param.is_finite() || param <= 0.0 {
            return Err(ExploreError::InvalidDistributionParameter(param));
        }
        Ok(GeneratorConfig {
            seed,
            distribution,
            zero_fraction,
        })
    }

    /// Uniform increments with a 10% plateau fraction.
    pub fn uniform(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            distribution: IncrementDistribution::Uniform01,
            zero_fraction: 0.1,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorConfig {
            seed,
            ..self.clone()
        }
    }
}

/// SplitMix64 step, used to derive independent stream seeds.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seed for an independent substream identified by `salt`.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    splitmix64(master ^ splitmix64(salt))
}

/// Snaps a raw nonnegative draw onto the dyadic increment grid.
fn quantize_increment(x: f64) -> f64 {
    let clamped = x.clamp(0.0, INCREMENT_CAP);
    (clamped * INCREMENT_GRID).round() / INCREMENT_GRID
}

/// Builds the lattice function with `values[0] = 0` and the given
/// increments, embedding the f64 cumulative sums exactly into `S` so both
/// backends see identical values.
pub fn function_from_increments<S: Scalar>(
    partition: &Arc<QLatticePartition<S>>,
    increments: &[f64],
) -> LatticeFunction<S> {
    assert_eq!(
        increments.len(),
        partition.n(),
        "one increment per subinterval"
    );
    let mut values = Vec::with_capacity(partition.n() + 1);
    let mut running = 0.0f64;
    values.push(S::from_dyadic(running));
    for delta in increments {
        running += delta;
        values.push(S::from_dyadic(running));
    }
    LatticeFunction::new(partition, values).expect("finite cumulative sums")
}

/// A seeded stream of random lattice functions.
pub struct FunctionGenerator {
    cfg: GeneratorConfig,
    rng: ChaCha8Rng,
}

impl FunctionGenerator {
    pub fn new(cfg: GeneratorConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        FunctionGenerator { cfg, rng }
    }

    fn sample_magnitude(&mut self) -> f64 {
        let u: f64 = self.rng.gen();
        let raw = match self.cfg.distribution {
            IncrementDistribution::Uniform01 => u,
            IncrementDistribution::Exponential { mean } => -mean * (1.0 - u).ln(),
            IncrementDistribution::HeavyTail { alpha } => (1.0 - u).powf(-1.0 / alpha) - 1.0,
        };
        quantize_increment(raw)
    }

    /// One increment draw: zero with probability `zero_fraction`, otherwise
    /// a quantized magnitude from the configured distribution.
    pub fn increment(&mut self) -> f64 {
        let gate: f64 = self.rng.gen();
        if gate < self.cfg.zero_fraction {
            0.0
        } else {
            self.sample_magnitude()
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    pub fn pick(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    fn increments(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.increment()).collect()
    }

    /// A hypothesis-satisfying draw: q-decreasing with `f(b) = 0`.
    pub fn q_decreasing<S: Scalar>(
        &mut self,
        partition: &Arc<QLatticePartition<S>>,
    ) -> LatticeFunction<S> {
        let increments = self.increments(partition.n());
        function_from_increments(partition, &increments)
    }

    /// Drops the zero-boundary hypothesis only: `f(b) = c > 0`, still
    /// q-decreasing.
    pub fn boundary_violating<S: Scalar>(
        &mut self,
        partition: &Arc<QLatticePartition<S>>,
    ) -> LatticeFunction<S> {
        let offset = self.sample_magnitude().max(1.0 / INCREMENT_GRID);
        let increments = self.increments(partition.n());
        let mut values = Vec::with_capacity(partition.n() + 1);
        let mut running = offset;
        values.push(S::from_dyadic(running));
        for delta in &increments {
            running += delta;
            values.push(S::from_dyadic(running));
        }
        LatticeFunction::new(partition, values).expect("finite values")
    }

    /// Drops the monotonicity hypothesis only: `f(b) = 0`, signed increments
    /// with at least one strict decrease whenever any increment is nonzero.
    pub fn non_monotone<S: Scalar>(
        &mut self,
        partition: &Arc<QLatticePartition<S>>,
    ) -> LatticeFunction<S> {
        let mut increments = self.increments(partition.n());
        for delta in increments.iter_mut() {
            if self.rng.gen::<f64>() < 0.5 {
                *delta = -*delta;
            }
        }
        if increments.iter().all(|d| *d >= 0.0) {
            if let Some(last) = increments.iter_mut().rev().find(|d| **d > 0.0) {
                *last = -*last;
            }
        }
        function_from_increments(partition, &increments)
    }
}

/// One draw with the given config; the same config yields the same function.
pub fn random_q_decreasing<S: Scalar>(
    partition: &Arc<QLatticePartition<S>>,
    cfg: &GeneratorConfig,
) -> LatticeFunction<S> {
    FunctionGenerator::new(cfg.clone()).q_decreasing(partition)
}

/// The grid a search sweeps: one inequality over partitions x exponent sets.
#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub inequality: InequalityId,
    pub partitions: Vec<Arc<QLatticePartition<f64>>>,
    pub params: Vec<ExponentParams>,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Total verifier evaluations, split evenly across grid cells.
    pub budget: u64,
    pub generator: GeneratorConfig,
    /// Record (evaluation index, best ratio) pairs at each improvement.
    pub record_trajectory: bool,
    /// Optional increment vector seeding the first restart of every cell
    /// whose subinterval count matches its length.
    pub initial_increments: Option<Vec<f64>>,
}

impl SearchConfig {
    pub fn new(budget: u64, generator: GeneratorConfig) -> Self {
        SearchConfig {
            budget,
            generator,
            record_trajectory: false,
            initial_increments: None,
        }
    }
}

/// Best ratio found in one grid cell, with the extremizing value vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSearchResult {
    pub q: f64,
    pub n: usize,
    pub b: f64,
    pub params: ExponentParams,
    pub best_ratio: f64,
    pub best_values: Vec<f64>,
    pub best_second: Option<Vec<f64>>,
    pub evaluations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_ratio: f64,
    /// Index into `cells` of the cell achieving `best_ratio`.
    pub best_cell: usize,
    pub cells: Vec<CellSearchResult>,
    pub evaluations: u64,
    /// Cumulative-evaluation/best-ratio pairs, strictly improving, when
    /// trajectory recording was requested.
    pub trajectory: Option<Vec<(u64, f64)>>,
}

struct RestartOutcome {
    best_ratio: f64,
    best_f: Vec<f64>,
    best_g: Option<Vec<f64>>,
    evaluations: u64,
    improvements: Vec<(u64, f64)>,
}

fn validate_search_params(
    inequality: InequalityId,
    params: &ExponentParams,
) -> Result<(), ExploreError> {
    let bad = |name: &'static str, value: Exponent, constraint: &'static str| {
        ExploreError::Verify(VerifyError::ExponentOutOfDomain {
            name,
            value,
            constraint,
        })
    };
    let need = |value: Option<Exponent>, name: &'static str| {
        value.ok_or(ExploreError::Verify(VerifyError::MissingParameter { name }))
    };
    match inequality {
        InequalityId::OpialGeneral | InequalityId::HolderStep => {
            let p = need(params.p, "p")?;
            if p.is_negative() {
                return Err(bad("p", p, "must be >= 0"));
            }
        }
        InequalityId::OpialP1 | InequalityId::TwoFunction => {}
        InequalityId::YoungPair => {
            let s = need(params.s, "s")?;
            let t = need(params.t, "t")?;
            if !s.is_positive() {
                return Err(bad("s", s, "must be > 0"));
            }
            if !t.is_positive() {
                return Err(bad("t", t, "must be > 0"));
            }
        }
        InequalityId::Wirtinger => {
            let r = need(params.r, "r")?;
            if !r.is_positive() {
                return Err(bad("r", r, "must be > 0"));
            }
        }
    }
    Ok(())
}

fn eval_ratio(
    inequality: InequalityId,
    partition: &Arc<QLatticePartition<f64>>,
    params: &ExponentParams,
    incr_f: &[f64],
    incr_g: Option<&Vec<f64>>,
) -> Result<f64, ExploreError> {
    let f = function_from_increments(partition, incr_f);
    let g = incr_g.map(|incr| function_from_increments(partition, incr));
    let report = verify_instance(inequality, &f, g.as_ref(), params, &VerifyOptions::default())?;
    Ok(report.ratio.to_f64())
}

fn run_restart(
    inequality: InequalityId,
    partition: &Arc<QLatticePartition<f64>>,
    params: &ExponentParams,
    generator_cfg: &GeneratorConfig,
    seed: u64,
    max_evals: u64,
    initial: Option<&Vec<f64>>,
) -> Result<RestartOutcome, ExploreError> {
    let mut gen = FunctionGenerator::new(generator_cfg.with_seed(seed));
    let n = partition.n();
    let needs_g = inequality.needs_second_function();

    let seeded = |gen: &mut FunctionGenerator| match initial {
        Some(vector) if vector.len() == n => vector.clone(),
        _ => gen.increments(n),
    };
    let mut incr_f = seeded(&mut gen);
    let mut incr_g: Option<Vec<f64>> = needs_g.then(|| seeded(&mut gen));

    let mut current = eval_ratio(inequality, partition, params, &incr_f, incr_g.as_ref())?;
    let mut evaluations = 1u64;
    let mut improvements = vec![(1, current)];
    let mut best_f = incr_f.clone();
    let mut best_g = incr_g.clone();

    while evaluations < max_evals {
        let coords = n * if needs_g { 2 } else { 1 };
        let k = gen.pick(coords);
        let old = if k < n {
            incr_f[k]
        } else {
            incr_g.as_ref().expect("second increment vector")[k - n]
        };
        // Multiplicative move, log-uniform in [1/2, 2]; a dead coordinate
        // gets a fresh draw instead, since scaling zero goes nowhere.
        let proposal = if old > 0.0 {
            old * ((gen.uniform() * 2.0 - 1.0) * LN_2).exp()
        } else {
            gen.increment()
        };
        if k < n {
            incr_f[k] = proposal;
        } else {
            incr_g.as_mut().expect("second increment vector")[k - n] = proposal;
        }

        let candidate = eval_ratio(inequality, partition, params, &incr_f, incr_g.as_ref())?;
        evaluations += 1;
        if candidate > current {
            current = candidate;
            best_f = incr_f.clone();
            best_g = incr_g.clone();
            improvements.push((evaluations, candidate));
        } else if k < n {
            incr_f[k] = old;
        } else {
            incr_g.as_mut().expect("second increment vector")[k - n] = old;
        }
    }

    Ok(RestartOutcome {
        best_ratio: current,
        best_f,
        best_g,
        evaluations,
        improvements,
    })
}

fn run_cell(
    inequality: InequalityId,
    partition: &Arc<QLatticePartition<f64>>,
    params: &ExponentParams,
    cell_index: usize,
    cell_budget: u64,
    cfg: &SearchConfig,
) -> Result<(CellSearchResult, Vec<(u64, f64)>), ExploreError> {
    let cell_seed = derive_seed(cfg.generator.seed, cell_index as u64);
    let restarts = cell_budget.div_ceil(RESTART_EVALS);

    let mut best: Option<RestartOutcome> = None;
    let mut evaluations = 0u64;
    let mut improvements: Vec<(u64, f64)> = Vec::new();
    for restart in 0..restarts {
        let allowance = RESTART_EVALS.min(cell_budget - evaluations);
        if allowance == 0 {
            break;
        }
        let outcome = run_restart(
            inequality,
            partition,
            params,
            &cfg.generator,
            derive_seed(cell_seed, restart),
            allowance,
            if restart == 0 {
                cfg.initial_increments.as_ref()
            } else {
                None
            },
        )?;
        for (local_eval, ratio) in &outcome.improvements {
            if improvements.last().is_none_or(|(_, best)| ratio > best) {
                improvements.push((evaluations + local_eval, *ratio));
            }
        }
        evaluations += outcome.evaluations;
        if best
            .as_ref()
            .is_none_or(|b| outcome.best_ratio > b.best_ratio)
        {
            best = Some(outcome);
        }
    }

    let best = best.expect("at least one restart ran");
    let values = function_from_increments::<f64>(partition, &best.best_f)
        .values()
        .to_vec();
    let second = best.best_g.as_ref().map(|incr| {
        function_from_increments::<f64>(partition, incr)
            .values()
            .to_vec()
    });
    Ok((
        CellSearchResult {
            q: *partition.q(),
            n: partition.n(),
            b: *partition.b(),
            params: *params,
            best_ratio: best.best_ratio,
            best_values: values,
            best_second: second,
            evaluations,
        },
        improvements,
    ))
}

/// Random-restart hill climbing for the largest lhs/rhs ratio of an
/// inequality over a grid of partitions and exponent sets. Deterministic
/// for a fixed master seed regardless of scheduling.
pub fn ratio_search(space: &SearchSpace, cfg: &SearchConfig) -> Result<SearchResult, ExploreError> {
    if cfg.budget == 0 {
        return Err(ExploreError::EmptyBudget);
    }
    if space.partitions.is_empty() || space.params.is_empty() {
        return Err(ExploreError::EmptyGrid);
    }
    for params in &space.params {
        validate_search_params(space.inequality, params)?;
    }

    let cells: Vec<(Arc<QLatticePartition<f64>>, ExponentParams)> = space
        .partitions
        .iter()
        .flat_map(|part| {
            space
                .params
                .iter()
                .map(move |params| (Arc::clone(part), *params))
        })
        .collect();
    let cell_budget = (cfg.budget / cells.len() as u64).max(1);

    let outcomes: Vec<(CellSearchResult, Vec<(u64, f64)>)> = cells
        .par_iter()
        .enumerate()
        .map(|(index, (partition, params))| {
            run_cell(space.inequality, partition, params, index, cell_budget, cfg)
        })
        .collect::<Result<_, _>>()?;

    let mut best_cell = 0usize;
    let mut evaluations = 0u64;
    let mut trajectory: Vec<(u64, f64)> = Vec::new();
    for (index, (cell, improvements)) in outcomes.iter().enumerate() {
        if cell.best_ratio > outcomes[best_cell].0.best_ratio {
            best_cell = index;
        }
        if cfg.record_trajectory {
            for (local_eval, ratio) in improvements {
                if trajectory.last().is_none_or(|(_, best)| ratio > best) {
                    trajectory.push((evaluations + local_eval, *ratio));
                }
            }
        }
        evaluations += cell.evaluations;
    }

    Ok(SearchResult {
        best_ratio: outcomes[best_cell].0.best_ratio,
        best_cell,
        cells: outcomes.into_iter().map(|(cell, _)| cell).collect(),
        evaluations,
        trajectory: cfg.record_trajectory.then_some(trajectory),
    })
}

/// Which hypothesis a necessity probe deliberately violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypothesisViolationKind {
    /// Keep monotonicity, drop `f(b) = 0`.
    Boundary,
    /// Keep `f(b) = 0`, drop monotonicity.
    Monotonicity,
}

/// A hypothesis-violating instance on which the inequality fails, with the
/// full value vectors for reproducibility.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub violation: HypothesisViolationKind,
    pub values: Vec<f64>,
    pub second: Option<Vec<f64>>,
    pub report: VerificationReport<f64>,
    pub draws_used: u64,
}

/// Fuzzes functions violating exactly one hypothesis through the bypassed
/// verifier and reports the first failing instance, or `None` when the
/// budget is exhausted without one.
pub fn hypothesis_necessity_probe(
    inequality: InequalityId,
    partition: &Arc<QLatticePartition<f64>>,
    params: &ExponentParams,
    violation: HypothesisViolationKind,
    budget: u64,
    cfg: &GeneratorConfig,
) -> Result<Option<Counterexample>, ExploreError> {
    validate_search_params(inequality, params)?;
    let mut gen = FunctionGenerator::new(cfg.clone());
    let opts = VerifyOptions::unchecked();
    let needs_g = inequality.needs_second_function();

    for draw in 0..budget {
        let make = |gen: &mut FunctionGenerator| match violation {
            HypothesisViolationKind::Boundary => gen.boundary_violating(partition),
            HypothesisViolationKind::Monotonicity => gen.non_monotone(partition),
        };
        let f = make(&mut gen);
        let g = needs_g.then(|| make(&mut gen));
        let report = verify_instance(inequality, &f, g.as_ref(), params, &opts)?;
        if !report.holds {
            return Ok(Some(Counterexample {
                violation,
                values: f.values().to_vec(),
                second: g.map(|g| g.values().to_vec()),
                report,
                draws_used: draw + 1,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::telescoping_residual;
    use num_rational::BigRational;

    fn part_f64(q: f64, b: f64, n: usize) -> Arc<QLatticePartition<f64>> {
        QLatticePartition::shared(q, b, n).unwrap()
    }

    #[test]
    fn zero_fraction_one_generates_the_zero_function() {
        let cfg = GeneratorConfig::new(7, IncrementDistribution::Uniform01, 1.0).unwrap();
        let part = part_f64(0.5, 1.0, 6);
        let f = random_q_decreasing(&part, &cfg);
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn same_seed_reproduces_the_function() {
        let cfg = GeneratorConfig::uniform(42);
        let part = part_f64(0.7, 2.0, 12);
        let f1 = random_q_decreasing::<f64>(&part, &cfg);
        let f2 = random_q_decreasing::<f64>(&part, &cfg);
        assert_eq!(f1.values(), f2.values());
    }

    #[test]
    fn generated_functions_satisfy_hypotheses() {
        let part = part_f64(0.5, 1.0, 16);
        for (seed, dist) in [
            (1, IncrementDistribution::Uniform01),
            (2, IncrementDistribution::Exponential { mean: 0.5 }),
            (3, IncrementDistribution::HeavyTail { alpha: 1.5 }),
        ] {
            let cfg = GeneratorConfig::new(seed, dist, 0.2).unwrap();
            let mut gen = FunctionGenerator::new(cfg);
            for _ in 0..1000 {
                let f = gen.q_decreasing(&part);
                assert!(f.is_q_decreasing());
                assert!(f.boundary_value().is_zero());
                // q-decreasing + zero boundary: nonnegative, max at a.
                assert!(f.values().iter().all(|v| *v >= 0.0));
                assert!(f.values().iter().all(|v| v <= f.left_value()));
            }
        }
    }

    #[test]
    fn float_and_exact_draws_agree_bitwise() {
        let cfg = GeneratorConfig::uniform(99);
        let part = part_f64(0.3, 1.0, 64);
        let exact_part = part.to_exact();
        let f = random_q_decreasing::<f64>(&part, &cfg);
        let e = random_q_decreasing::<BigRational>(&exact_part, &cfg);
        for (fv, ev) in f.values().iter().zip(e.values()) {
            assert_eq!(BigRational::from_dyadic(*fv), *ev);
        }
    }

    #[test]
    fn generator_config_validation() {
        assert!(GeneratorConfig::new(0, IncrementDistribution::Uniform01, 1.5).is_err());
        assert!(
            GeneratorConfig::new(0, IncrementDistribution::Exponential { mean: 0.0 }, 0.0)
                .is_err()
        );
        assert!(
            GeneratorConfig::new(0, IncrementDistribution::HeavyTail { alpha: -1.0 }, 0.0)
                .is_err()
        );
    }

    #[test]
    fn search_p_zero_returns_exactly_one() {
        let space = SearchSpace {
            inequality: InequalityId::OpialGeneral,
            partitions: vec![part_f64(0.5, 1.0, 4)],
            params: vec![ExponentParams::for_p(Exponent::from_int(0))],
        };
        let cfg = SearchConfig::new(50, GeneratorConfig::uniform(5));
        let result = ratio_search(&space, &cfg).unwrap();
        assert_eq!(result.best_ratio, 1.0);
    }

    #[test]
    fn search_holder_equality_from_constant_derivative_seed() {
        // Increments proportional to the subinterval widths make |D_q f|
        // constant, the Hoelder equality case.
        let part = part_f64(0.5, 1.0, 4);
        let widths: Vec<f64> = (0..part.n())
            .map(|j| part.point(j) - part.point(j + 1))
            .collect();
        let space = SearchSpace {
            inequality: InequalityId::HolderStep,
            partitions: vec![Arc::clone(&part)],
            params: vec![ExponentParams::for_p(Exponent::from_int(3))],
        };
        let mut cfg = SearchConfig::new(100, GeneratorConfig::uniform(11));
        cfg.initial_increments = Some(widths);
        let result = ratio_search(&space, &cfg).unwrap();
        assert!((result.best_ratio - 1.0).abs() <= 1e-12);
        assert!(result.best_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn search_improves_on_the_ramp_ratio_and_never_exceeds_one() {
        let space = SearchSpace {
            inequality: InequalityId::OpialGeneral,
            partitions: vec![part_f64(0.5, 1.0, 2)],
            params: vec![ExponentParams::for_p(Exponent::one())],
        };
        let cfg = SearchConfig::new(2000, GeneratorConfig::uniform(3));
        let result = ratio_search(&space, &cfg).unwrap();
        // The ramp b - x achieves 2/9; the optimum for n = 2 is 1/(3 sqrt 2).
        assert!(result.best_ratio >= 2.0 / 9.0);
        assert!(result.best_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn search_is_deterministic_and_trajectory_monotone() {
        let space = SearchSpace {
            inequality: InequalityId::YoungPair,
            partitions: vec![part_f64(0.5, 1.0, 3), part_f64(0.9, 1.0, 5)],
            params: vec![ExponentParams::for_st(
                Exponent::one(),
                Exponent::from_int(2),
            )],
        };
        let mut cfg = SearchConfig::new(600, GeneratorConfig::uniform(17));
        cfg.record_trajectory = true;
        let r1 = ratio_search(&space, &cfg).unwrap();
        let r2 = ratio_search(&space, &cfg).unwrap();
        assert_eq!(r1, r2);

        let trajectory = r1.trajectory.as_ref().unwrap();
        assert!(!trajectory.is_empty());
        assert!(trajectory
            .windows(2)
            .all(|w| w[0].1 < w[1].1 && w[0].0 <= w[1].0));
        assert_eq!(trajectory.last().unwrap().1, r1.best_ratio);
    }

    #[test]
    fn search_best_ratio_is_nondecreasing_in_budget() {
        // Growing the budget extends each restart's evaluation stream and
        // appends restarts, so the running max can only improve.
        let space = SearchSpace {
            inequality: InequalityId::OpialGeneral,
            partitions: vec![part_f64(0.5, 1.0, 3)],
            params: vec![ExponentParams::for_p(Exponent::one())],
        };
        let mut previous = 0.0;
        for budget in [50, 200, 800, 3200] {
            let cfg = SearchConfig::new(budget, GeneratorConfig::uniform(13));
            let result = ratio_search(&space, &cfg).unwrap();
            assert!(
                result.best_ratio >= previous,
                "budget {budget} regressed: {} < {previous}",
                result.best_ratio
            );
            previous = result.best_ratio;
        }
    }

    #[test]
    fn search_rejects_degenerate_setups() {
        let space = SearchSpace {
            inequality: InequalityId::OpialGeneral,
            partitions: vec![],
            params: vec![ExponentParams::for_p(Exponent::one())],
        };
        let cfg = SearchConfig::new(10, GeneratorConfig::uniform(0));
        assert!(matches!(
            ratio_search(&space, &cfg),
            Err(ExploreError::EmptyGrid)
        ));

        let space = SearchSpace {
            inequality: InequalityId::OpialGeneral,
            partitions: vec![part_f64(0.5, 1.0, 2)],
            params: vec![ExponentParams::for_p(Exponent::one())],
        };
        assert!(matches!(
            ratio_search(&space, &SearchConfig::new(0, GeneratorConfig::uniform(0))),
            Err(ExploreError::EmptyBudget)
        ));
    }

    #[test]
    fn boundary_probe_finds_a_counterexample() {
        // Independent oracle: brute force over a coarse grid at n = 2 shows
        // a violating instance exists once f(b) = c > 0 is allowed.
        let part = part_f64(0.5, 1.0, 2);
        let mut oracle_found = false;
        'outer: for c in 1..=10 {
            for d0 in 0..=10 {
                for d1 in 0..=10 {
                    let c = f64::from(c) * 0.1;
                    let values = vec![
                        c,
                        c + f64::from(d0) * 0.1,
                        c + f64::from(d0 + d1) * 0.1,
                    ];
                    let f = LatticeFunction::new(&part, values).unwrap();
                    let report = verify_instance(
                        InequalityId::OpialP1,
                        &f,
                        None,
                        &ExponentParams::none(),
                        &VerifyOptions::unchecked(),
                    )
                    .unwrap();
                    if !report.holds {
                        oracle_found = true;
                        break 'outer;
                    }
                }
            }
        }
        assert!(oracle_found, "brute-force oracle found no violation");

        let found = hypothesis_necessity_probe(
            InequalityId::OpialP1,
            &part,
            &ExponentParams::none(),
            HypothesisViolationKind::Boundary,
            500,
            &GeneratorConfig::uniform(23),
        )
        .unwrap();
        let counterexample = found.expect("probe should find a violation");
        assert!(!counterexample.report.holds);
        assert_eq!(counterexample.values.len(), 3);
        assert!(counterexample.values[0] > 0.0);
    }

    #[test]
    fn two_function_monotonicity_probe_finds_nothing() {
        // The two-function bound needs no monotonicity: its proof chain is
        // the telescoping identity plus monotonicity-free inequalities.
        let part = part_f64(0.5, 1.0, 4);
        let found = hypothesis_necessity_probe(
            InequalityId::TwoFunction,
            &part,
            &ExponentParams::none(),
            HypothesisViolationKind::Monotonicity,
            300,
            &GeneratorConfig::uniform(31),
        )
        .unwrap();
        assert!(found.is_none());

        // And the telescoping identity itself is exact on such draws.
        let cfg = GeneratorConfig::uniform(37);
        let mut gen = FunctionGenerator::new(cfg);
        let exact_part = part.to_exact();
        for _ in 0..50 {
            let f = gen.non_monotone::<BigRational>(&exact_part);
            let g = gen.non_monotone::<BigRational>(&exact_part);
            let residual = telescoping_residual(&f, &g).unwrap();
            assert!(residual.is_zero());
        }
    }

    #[test]
    fn probe_with_zero_budget_reports_absence() {
        let part = part_f64(0.5, 1.0, 2);
        let found = hypothesis_necessity_probe(
            InequalityId::OpialP1,
            &part,
            &ExponentParams::none(),
            HypothesisViolationKind::Boundary,
            0,
            &GeneratorConfig::uniform(0),
        )
        .unwrap();
        assert!(found.is_none());
    }
}
