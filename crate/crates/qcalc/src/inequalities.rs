//! Verifiers for Opial-, Young-, and Wirtinger-type inequalities on the
//! q-lattice.
//!
//! Each verifier evaluates both sides of one inequality on concrete lattice
//! functions and reports the sides, their ratio, the margin `rhs - lhs`, and
//! a verdict. The inequalities, for q-decreasing `f`, `g` vanishing at the
//! right endpoint (`f(b) = 0`):
//!
//! - general Opial: `int |D_q f| |f|^p <= (b-a)^p int |D_q f|^{p+1}`, `p >= 0`;
//! - two-function: `int (f D_q g + g(qx) D_q f) <= (b-a)/2 int ((D_q f)^2 + (D_q g)^2)`,
//!   whose left side telescopes to `-f(a) g(a)` for any pair vanishing at `b`;
//! - Young pair: `int |f|^s |g|^t <= (b-a)^{s+t} (s/(s+t) int |D_q f|^{s+t} + t/(s+t) int |D_q g|^{s+t})`;
//! - Wirtinger: the Young pair at `s = t = r`, `g = f`;
//! - Hoelder step: `(b(1-q) sum q^j |D_q f|)^{p+1} <= (b-a)^p int |D_q f|^{p+1}`,
//!   which needs no monotonicity at all.
//!
//! All integrals are restricted q-integrals over the lattice. Hypothesis
//! checks are on by default and can be bypassed to probe what breaks without
//! them. Verdicts absorb a relative rounding slack in the float backend and
//! none in the exact backend.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use thiserror::Error;

use crate::lattice::{LatticeFunction, QLatticePartition, restricted_sum};
use crate::scalar::{Exponent, Scalar, ScalarError, max_scalar};

/// Largest `n` for which the float path re-verifies overflowing
/// integer-exponent instances in exact arithmetic.
const EXACT_FALLBACK_MAX_N: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InequalityId {
    OpialGeneral,
    OpialP1,
    TwoFunction,
    YoungPair,
    Wirtinger,
    HolderStep,
}

impl InequalityId {
    pub const ALL: [InequalityId; 6] = [
        InequalityId::OpialGeneral,
        InequalityId::OpialP1,
        InequalityId::TwoFunction,
        InequalityId::YoungPair,
        InequalityId::Wirtinger,
        InequalityId::HolderStep,
    ];

    pub fn needs_second_function(self) -> bool {
        matches!(self, InequalityId::TwoFunction | InequalityId::YoungPair)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::OpialGeneral => "opial-general",
            InequalityId::OpialP1 => "opial-p1",
            InequalityId::TwoFunction => "two-function",
            InequalityId::YoungPair => "young-pair",
            InequalityId::Wirtinger => "wirtinger",
            InequalityId::HolderStep => "holder-step",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        InequalityId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == text)
            .ok_or_else(|| format!("unknown inequality {text:?}"))
    }
}

/// Which function of a two-function verifier an error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionRole {
    First,
    Second,
}

impl fmt::Display for FunctionRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionRole::First => write!(f, "f"),
            FunctionRole::Second => write!(f, "g"),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum VerifyError {
    #[error("functions live on different partitions")]
    PartitionMismatch,
    #[error("hypothesis violated: {role} is not q-decreasing (first violation at index {index})")]
    NotQDecreasing { role: FunctionRole, index: usize },
    #[error("hypothesis violated: {role}(b) must be 0, found {value}")]
    NonzeroBoundary { role: FunctionRole, value: String },
    #[error("exponent {name} = {value} outside its domain ({constraint})")]
    ExponentOutOfDomain {
        name: &'static str,
        value: Exponent,
        constraint: &'static str,
    },
    #[error("argument {name} = {value} must be nonnegative")]
    NegativeValue { name: &'static str, value: String },
    #[error("inequality requires parameter {name}")]
    MissingParameter { name: &'static str },
    #[error("inequality requires a second function")]
    MissingSecondFunction,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// The exponents an inequality instance was evaluated with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ExponentParams {
    pub p: Option<Exponent>,
    pub s: Option<Exponent>,
    pub t: Option<Exponent>,
    pub r: Option<Exponent>,
}

impl ExponentParams {
    pub fn none() -> Self {
        ExponentParams::default()
    }

    pub fn for_p(p: Exponent) -> Self {
        ExponentParams {
            p: Some(p),
            ..Default::default()
        }
    }

    pub fn for_st(s: Exponent, t: Exponent) -> Self {
        ExponentParams {
            s: Some(s),
            t: Some(t),
            ..Default::default()
        }
    }

    pub fn for_r(r: Exponent) -> Self {
        ExponentParams {
            r: Some(r),
            ..Default::default()
        }
    }

    /// True when every exponent present is an integer (the precondition for
    /// exact-backend evaluation).
    pub fn all_integral(&self) -> bool {
        [self.p, self.s, self.t, self.r]
            .iter()
            .flatten()
            .all(Exponent::is_integer)
    }
}

/// `lhs / rhs` with the degenerate right side called out explicitly.
#[derive(Clone, Debug, PartialEq)]
pub enum RatioValue<S> {
    Finite(S),
    /// `rhs = 0` with `lhs != 0`; the verdict is decided by the margin, not
    /// by this sentinel.
    Infinite,
}

impl<S: Scalar> RatioValue<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            RatioValue::Finite(v) => Some(v),
            RatioValue::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RatioValue::Finite(v) => v.to_f64(),
            RatioValue::Infinite => f64::INFINITY,
        }
    }
}

impl<S: Scalar> fmt::Display for RatioValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioValue::Finite(v) => write!(f, "{v}"),
            RatioValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Both sides of one inequality instance and the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport<S> {
    pub inequality: InequalityId,
    pub lhs: S,
    pub rhs: S,
    pub ratio: RatioValue<S>,
    pub margin: S,
    pub holds: bool,
    pub params: ExponentParams,
}

impl<S: Scalar> VerificationReport<S> {
    /// Builds the report from computed sides. The verdict is
    /// `margin >= -tol * scale` with `scale = max(|lhs|, |rhs|, 1)`; the
    /// ratio is 0 when both sides vanish and infinite when only `rhs` does.
    pub fn from_sides(
        inequality: InequalityId,
        lhs: S,
        rhs: S,
        params: ExponentParams,
        tolerance: Option<&S>,
    ) -> Self {
        let tol = tolerance.cloned().unwrap_or_else(S::verify_tolerance);
        let margin = rhs.sub(&lhs);
        let scale = max_scalar(&max_scalar(&lhs.abs(), &rhs.abs()), &S::one());
        let holds = if lhs.is_finite() && rhs.is_finite() {
            margin >= tol.mul(&scale).neg()
        } else {
            // With an overflowed side the only safe verdict is an upper
            // side strictly above the lower one.
            rhs > lhs
        };
        let ratio = if rhs.is_zero() {
            if lhs.is_zero() {
                RatioValue::Finite(S::zero())
            } else {
                RatioValue::Infinite
            }
        } else {
            RatioValue::Finite(lhs.div(&rhs))
        };
        VerificationReport {
            inequality,
            lhs,
            rhs,
            ratio,
            margin,
            holds,
            params,
        }
    }
}

/// Controls shared by all verifiers.
#[derive(Clone, Debug)]
pub struct VerifyOptions<S> {
    /// Check q-monotonicity and the zero boundary value before evaluating.
    /// Bypassing the checks evaluates the sides anyway, which is how
    /// hypothesis-necessity probes demonstrate counterexamples.
    pub check_hypotheses: bool,
    /// Overrides the backend's verdict tolerance.
    pub tolerance: Option<S>,
}

impl<S> Default for VerifyOptions<S> {
    fn default() -> Self {
        VerifyOptions {
            check_hypotheses: true,
            tolerance: None,
        }
    }
}

impl<S> VerifyOptions<S> {
    pub fn unchecked() -> Self {
        VerifyOptions {
            check_hypotheses: false,
            tolerance: None,
        }
    }
}

fn check_hypotheses<S: Scalar>(
    f: &LatticeFunction<S>,
    role: FunctionRole,
) -> Result<(), VerifyError> {
    if let Some(index) = f
        .values()
        .windows(2)
        .position(|w| w[1] < w[0])
    {
        return Err(VerifyError::NotQDecreasing { role, index });
    }
    if !f.boundary_value().is_zero() {
        return Err(VerifyError::NonzeroBoundary {
            role,
            value: f.boundary_value().to_string(),
        });
    }
    Ok(())
}

fn require_nonnegative(name: &'static str, e: &Exponent) -> Result<(), VerifyError> {
    if e.is_negative() {
        return Err(VerifyError::ExponentOutOfDomain {
            name,
            value: *e,
            constraint: "must be >= 0",
        });
    }
    Ok(())
}

fn require_positive(name: &'static str, e: &Exponent) -> Result<(), VerifyError> {
    if !e.is_positive() {
        return Err(VerifyError::ExponentOutOfDomain {
            name,
            value: *e,
            constraint: "must be > 0",
        });
    }
    Ok(())
}

fn max_abs<S: Scalar>(values: &[S]) -> S {
    let mut m = S::zero();
    for v in values {
        m = max_scalar(&m, &v.abs());
    }
    m
}

/// `b(1-q) sum q^j |base[j]|^e`, factoring the largest magnitude out of the
/// power so large exponents cannot overflow inside the sum.
fn weighted_abs_power_sum<S: Scalar>(
    partition: &QLatticePartition<S>,
    base: &[S],
    e: &Exponent,
) -> Result<S, ScalarError> {
    debug_assert_eq!(base.len(), partition.n());
    if e.is_zero() {
        return Ok(restricted_sum(partition, |_| S::one()));
    }
    if e.as_integer() == Some(1) {
        return Ok(restricted_sum(partition, |j| base[j].abs()));
    }
    let m = max_abs(base);
    if m.is_zero() {
        return Ok(S::zero());
    }
    let powered: Vec<S> = base
        .iter()
        .map(|v| v.abs().div(&m).pow(e))
        .collect::<Result<_, _>>()?;
    Ok(m.pow(e)?.mul(&restricted_sum(partition, |j| powered[j].clone())))
}

/// `b(1-q) sum q^j |u[j]| |v[j]|^e` with the same overflow guard on the
/// powered factor.
fn weighted_abs_mixed_sum<S: Scalar>(
    partition: &QLatticePartition<S>,
    u: &[S],
    v: &[S],
    e: &Exponent,
) -> Result<S, ScalarError> {
    debug_assert_eq!(u.len(), partition.n());
    debug_assert_eq!(v.len(), partition.n());
    if e.is_zero() {
        return Ok(restricted_sum(partition, |j| u[j].abs()));
    }
    if e.as_integer() == Some(1) {
        return Ok(restricted_sum(partition, |j| u[j].abs().mul(&v[j].abs())));
    }
    let m = max_abs(v);
    if m.is_zero() {
        return Ok(S::zero());
    }
    let terms: Vec<S> = u
        .iter()
        .zip(v)
        .map(|(uj, vj)| Ok(uj.abs().mul(&vj.abs().div(&m).pow(e)?)))
        .collect::<Result<_, ScalarError>>()?;
    Ok(m.pow(e)?.mul(&restricted_sum(partition, |j| terms[j].clone())))
}

/// General Opial inequality: `int |D_q f| |f|^p <= (b-a)^p int |D_q f|^{p+1}`
/// for q-decreasing `f` with `f(b) = 0` and `p >= 0`.
pub fn verify_opial_general<S: Scalar>(
    f: &LatticeFunction<S>,
    p: &Exponent,
    opts: &VerifyOptions<S>,
) -> Result<VerificationReport<S>, VerifyError> {
    require_nonnegative("p", p)?;
    if opts.check_hypotheses {
        check_hypotheses(f, FunctionRole::First)?;
    }
    let partition = f.partition();
    let deriv = f.q_derivative();
    let lhs = weighted_abs_mixed_sum(
        partition,
        deriv.quotients(),
        &f.values()[..partition.n()],
        p,
    )?;
    let p_plus_one = *p + Exponent::one();
    let integral = weighted_abs_power_sum(partition, deriv.quotients(), &p_plus_one)?;
    let rhs = partition.width().pow(p)?.mul(&integral);
    Ok(VerificationReport::from_sides(
        InequalityId::OpialGeneral,
        lhs,
        rhs,
        ExponentParams::for_p(*p),
        opts.tolerance.as_ref(),
    ))
}

/// The `p = 1` Opial inequality, by direct delegation.
pub fn verify_opial_p1<S: Scalar>(
    f: &LatticeFunction<S>,
    opts: &VerifyOptions<S>,
) -> Result<VerificationReport<S>, VerifyError> {
    let mut report = verify_opial_general(f, &Exponent::one(), opts)?;
    report.inequality = InequalityId::OpialP1;
    Ok(report)
}

fn two_function_lhs<S: Scalar>(f: &LatticeFunction<S>, g: &LatticeFunction<S>) -> S {
    let partition = f.partition();
    let df = f.q_derivative();
    let dg = g.q_derivative();
    restricted_sum(partition, |j| {
        // f(x) D_q g(x) + g(qx) D_q f(x) at x = b q^j; g(qx) = values[j+1].
        f.value(j)
            .mul(dg.quotient(j))
            .add(&g.value(j + 1).mul(df.quotient(j)))
    })
}

/// Two-function inequality:
/// `int (f D_q g + g(qx) D_q f) <= (b-a)/2 int ((D_q f)^2 + (D_q g)^2)`.
pub fn verify_two_function<S: Scalar>(
    f: &LatticeFunction<S>,
    g: &LatticeFunction<S>,
    opts: &VerifyOptions<S>,
) -> Result<VerificationReport<S>, VerifyError> {
    if !f.same_partition(g) {
        return Err(VerifyError::PartitionMismatch);
    }
    if opts.check_hypotheses {
        check_hypotheses(f, FunctionRole::First)?;
        check_hypotheses(g, FunctionRole::Second)?;
    }
    let partition = f.partition();
    let df = f.q_derivative();
    let dg = g.q_derivative();
    let lhs = two_function_lhs(f, g);
    let sum_of_squares = restricted_sum(partition, |j| {
        df.quotient(j)
            .mul(df.quotient(j))
            .add(&dg.quotient(j).mul(dg.quotient(j)))
    });
    let rhs = partition
        .width()
        .div(&S::from_int(2))
        .mul(&sum_of_squares);
    Ok(VerificationReport::from_sides(
        InequalityId::TwoFunction,
        lhs,
        rhs,
        ExponentParams::none(),
        opts.tolerance.as_ref(),
    ))
}

/// The discrete product rule behind the two-function inequality: its left
/// side telescopes to `-f(a) g(a)` for any pair with `f(b) = g(b) = 0`,
/// monotone or not. Returns `lhs - (-f(a) g(a))`, exactly zero in the exact
/// backend.
pub fn telescoping_residual<S: Scalar>(
    f: &LatticeFunction<S>,
    g: &LatticeFunction<S>,
) -> Result<S, VerifyError> {
    if !f.same_partition(g) {
        return Err(VerifyError::PartitionMismatch);
    }
    for (fun, role) in [(f, FunctionRole::First), (g, FunctionRole::Second)] {
        if !fun.boundary_value().is_zero() {
            return Err(VerifyError::NonzeroBoundary {
                role,
                value: fun.boundary_value().to_string(),
            });
        }
    }
    let lhs = two_function_lhs(f, g);
    let telescoped = f.left_value().mul(g.left_value()).neg();
    Ok(lhs.sub(&telescoped))
}

/// `1/2 (x^2 + y^2) + x y = 1/2 (x + y)^2 >= 0`, the margin of the
/// elementary inequality `-xy <= (x^2 + y^2)/2`.
pub fn am_gm_margin<S: Scalar>(x: &S, y: &S) -> S {
    let half = S::from_ratio(1, 2);
    half.mul(&x.mul(x).add(&y.mul(y))).add(&x.mul(y))
}

/// Margin of the scalar Young inequality
/// `z^s w^t <= (s z^{s+t} + t w^{s+t}) / (s+t)` for `z, w >= 0`, `s, t > 0`.
pub fn young_scalar_margin<S: Scalar>(
    z: &S,
    w: &S,
    s: &Exponent,
    t: &Exponent,
) -> Result<S, VerifyError> {
    require_positive("s", s)?;
    require_positive("t", t)?;
    if *z < S::zero() {
        return Err(VerifyError::NegativeValue {
            name: "z",
            value: z.to_string(),
        });
    }
    if *w < S::zero() {
        return Err(VerifyError::NegativeValue {
            name: "w",
            value: w.to_string(),
        });
    }
    let st = *s + *t;
    let lhs = z.pow(s)?.mul(&w.pow(t)?);
    let weighted = s
        .to_scalar::<S>()
        .mul(&z.pow(&st)?)
        .add(&t.to_scalar::<S>().mul(&w.pow(&st)?));
    let rhs = weighted.div(&st.to_scalar::<S>());
    Ok(rhs.sub(&lhs))
}

/// Young-pair inequality:
/// `int |f|^s |g|^t <= (b-a)^{s+t} (s/(s+t) int |D_q f|^{s+t} + t/(s+t) int |D_q g|^{s+t})`.
pub fn verify_young_pair<S: Scalar>(
    f: &LatticeFunction<S>,
    g: &LatticeFunction<S>,
    s: &Exponent,
    t: &Exponent,
    opts: &VerifyOptions<S>,
) -> Result<VerificationReport<S>, VerifyError> {
    require_positive("s", s)?;
    require_positive("t", t)?;
    if !f.same_partition(g) {
        return Err(VerifyError::PartitionMismatch);
    }
    if opts.check_hypotheses {
        check_hypotheses(f, FunctionRole::First)?;
        check_hypotheses(g, FunctionRole::Second)?;
    }
    let partition = f.partition();
    let n = partition.n();

    // lhs = b(1-q) sum q^j |f_j|^s |g_j|^t, with both powers scaled by the
    // respective maxima to keep large exponents in range.
    let mf = max_abs(&f.values()[..n]);
    let mg = max_abs(&g.values()[..n]);
    let lhs = if (mf.is_zero() && !s.is_zero()) || (mg.is_zero() && !t.is_zero()) {
        S::zero()
    } else {
        let terms: Vec<S> = (0..n)
            .map(|j| {
                let zf = f.value(j).abs().div(&mf).pow(s)?;
                let zg = g.value(j).abs().div(&mg).pow(t)?;
                Ok(zf.mul(&zg))
            })
            .collect::<Result<_, ScalarError>>()?;
        mf.pow(s)?
            .mul(&mg.pow(t)?)
            .mul(&restricted_sum(partition, |j| terms[j].clone()))
    };

    let st = *s + *t;
    let df_integral = weighted_abs_power_sum(partition, f.q_derivative().quotients(), &st)?;
    let dg_integral = weighted_abs_power_sum(partition, g.q_derivative().quotients(), &st)?;
    let weighted = s
        .to_scalar::<S>()
        .mul(&df_integral)
        .add(&t.to_scalar::<S>().mul(&dg_integral));
    let rhs = partition
        .width()
        .pow(&st)?
        .mul(&weighted.div(&st.to_scalar::<S>()));

    Ok(VerificationReport::from_sides(
        InequalityId::YoungPair,
        lhs,
        rhs,
        ExponentParams::for_st(*s, *t),
        opts.tolerance.as_ref(),
    ))
}

/// Wirtinger-type inequality
/// `int |h|^{2r} <= (b-a)^{2r} int |D_q h|^{2r}`, the Young pair at
/// `s = t = r` with both functions equal; implemented by delegation so the
/// specialization is structural.
pub fn verify_wirtinger<S: Scalar>(
    h: &LatticeFunction<S>,
    r: &Exponent,
    opts: &VerifyOptions<S>,
) -> Result<VerificationReport<S>, VerifyError> {
    require_positive("r", r)?;
    let mut report = verify_young_pair(h, h, r, r, opts)?;
    report.inequality = InequalityId::Wirtinger;
    report.params = ExponentParams::for_r(*r);
    Ok(report)
}

/// The weighted Hoelder inequality used as the second proof step:
/// `(b(1-q) sum q^j |D_q f|)^{p+1} <= (b-a)^p int |D_q f|^{p+1}`.
/// Holds for arbitrary lattice functions; no hypotheses are checked.
pub fn verify_discrete_holder_step<S: Scalar>(
    f: &LatticeFunction<S>,
    p: &Exponent,
    opts: &VerifyOptions<S>,
) -> Result<VerificationReport<S>, VerifyError> {
    require_nonnegative("p", p)?;
    let partition = f.partition();
    let deriv = f.q_derivative();
    let total_variation = restricted_sum(partition, |j| deriv.quotient(j).abs());
    let p_plus_one = *p + Exponent::one();
    let lhs = total_variation.pow(&p_plus_one)?;
    let integral = weighted_abs_power_sum(partition, deriv.quotients(), &p_plus_one)?;
    let rhs = partition.width().pow(p)?.mul(&integral);
    Ok(VerificationReport::from_sides(
        InequalityId::HolderStep,
        lhs,
        rhs,
        ExponentParams::for_p(*p),
        opts.tolerance.as_ref(),
    ))
}

/// Dispatches to the verifier selected by `inequality`, pulling the
/// exponents it needs out of `params`.
pub fn verify_instance<S: Scalar>(
    inequality: InequalityId,
    f: &LatticeFunction<S>,
    g: Option<&LatticeFunction<S>>,
    params: &ExponentParams,
    opts: &VerifyOptions<S>,
) -> Result<VerificationReport<S>, VerifyError> {
    let need = |value: Option<Exponent>, name: &'static str| {
        value.ok_or(VerifyError::MissingParameter { name })
    };
    match inequality {
        InequalityId::OpialGeneral => verify_opial_general(f, &need(params.p, "p")?, opts),
        InequalityId::OpialP1 => verify_opial_p1(f, opts),
        InequalityId::HolderStep => verify_discrete_holder_step(f, &need(params.p, "p")?, opts),
        InequalityId::Wirtinger => verify_wirtinger(f, &need(params.r, "r")?, opts),
        InequalityId::TwoFunction => {
            let g = g.ok_or(VerifyError::MissingSecondFunction)?;
            verify_two_function(f, g, opts)
        }
        InequalityId::YoungPair => {
            let g = g.ok_or(VerifyError::MissingSecondFunction)?;
            verify_young_pair(f, g, &need(params.s, "s")?, &need(params.t, "t")?, opts)
        }
    }
}

/// Float-backend verification with an exact escape hatch: when a computed
/// side overflows to infinity, all exponents are integers, and `n <= 64`,
/// the instance is lifted into the exact backend (float inputs embed
/// exactly) and the verdict and margin sign are taken from the exact run.
/// Sides saturate to `+-inf` in the returned float report.
pub fn verify_instance_float(
    inequality: InequalityId,
    f: &LatticeFunction<f64>,
    g: Option<&LatticeFunction<f64>>,
    params: &ExponentParams,
    opts: &VerifyOptions<f64>,
) -> Result<VerificationReport<f64>, VerifyError> {
    let report = verify_instance(inequality, f, g, params, opts)?;
    if report.lhs.is_finite() && report.rhs.is_finite() {
        return Ok(report);
    }
    if !params.all_integral() || f.partition().n() > EXACT_FALLBACK_MAX_N {
        return Ok(report);
    }

    let f_exact = f.to_exact();
    let g_exact = g.map(LatticeFunction::to_exact);
    let exact_opts = VerifyOptions::<BigRational> {
        check_hypotheses: opts.check_hypotheses,
        tolerance: None,
    };
    let exact = verify_instance(inequality, &f_exact, g_exact.as_ref(), params, &exact_opts)?;
    Ok(VerificationReport {
        inequality: exact.inequality,
        lhs: exact.lhs.to_f64(),
        rhs: exact.rhs.to_f64(),
        ratio: match &exact.ratio {
            RatioValue::Finite(v) => RatioValue::Finite(v.to_f64()),
            RatioValue::Infinite => RatioValue::Infinite,
        },
        margin: exact.margin.to_f64(),
        holds: exact.holds,
        params: exact.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::QLatticePartition;
    use std::sync::Arc;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::from_ratio(num, den)
    }

    fn ramp_instance() -> (
        Arc<QLatticePartition<BigRational>>,
        LatticeFunction<BigRational>,
    ) {
        let part = QLatticePartition::shared(rat(1, 2), rat(1, 1), 2).unwrap();
        let ramp = LatticeFunction::tabulate(&part, |x| rat(1, 1).sub(x)).unwrap();
        (part, ramp)
    }

    #[test]
    fn opial_general_worked_example() {
        let (_, ramp) = ramp_instance();
        let report =
            verify_opial_general(&ramp, &Exponent::one(), &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, rat(1, 8));
        assert_eq!(report.rhs, rat(9, 16));
        assert_eq!(report.ratio, RatioValue::Finite(rat(2, 9)));
        assert_eq!(report.margin, rat(7, 16));
        assert!(report.holds);
    }

    #[test]
    fn opial_general_worked_example_float() {
        let part = QLatticePartition::shared(0.5, 1.0, 2).unwrap();
        let ramp = LatticeFunction::tabulate(&part, |x| 1.0 - x).unwrap();
        let report =
            verify_opial_general(&ramp, &Exponent::one(), &VerifyOptions::default()).unwrap();
        assert!((report.lhs - 0.125).abs() <= 1e-14 * 0.125);
        assert!((report.rhs - 0.5625).abs() <= 1e-14 * 0.5625);
        assert!(report.holds);
    }

    #[test]
    fn opial_p_zero_collapses_to_equality() {
        let part = QLatticePartition::shared(0.7, 2.0, 5).unwrap();
        let f = LatticeFunction::new(&part, vec![0.0, 0.25, 0.5, 0.5, 1.25, 2.0]).unwrap();
        let report =
            verify_opial_general(&f, &Exponent::from_int(0), &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, report.rhs);
        assert_eq!(report.ratio, RatioValue::Finite(1.0));
        assert!(report.holds);
    }

    #[test]
    fn opial_zero_function_is_vacuous() {
        let (part, _) = ramp_instance();
        let zero = LatticeFunction::tabulate(&part, |_| rat(0, 1)).unwrap();
        let report =
            verify_opial_general(&zero, &Exponent::one(), &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, rat(0, 1));
        assert_eq!(report.rhs, rat(0, 1));
        assert_eq!(report.ratio, RatioValue::Finite(rat(0, 1)));
        assert!(report.holds);
    }

    #[test]
    fn opial_p1_delegates_to_general() {
        let (_, ramp) = ramp_instance();
        let general =
            verify_opial_general(&ramp, &Exponent::one(), &VerifyOptions::default()).unwrap();
        let p1 = verify_opial_p1(&ramp, &VerifyOptions::default()).unwrap();
        assert_eq!(p1.lhs, general.lhs);
        assert_eq!(p1.rhs, general.rhs);
        assert_eq!(p1.ratio, general.ratio);
        assert_eq!(p1.inequality, InequalityId::OpialP1);
    }

    #[test]
    fn hypothesis_checks_fire_and_can_be_bypassed() {
        let part = QLatticePartition::shared(0.5, 1.0, 2).unwrap();

        let rising = LatticeFunction::new(&part, vec![0.0, 0.5, 0.25]).unwrap();
        assert!(matches!(
            verify_opial_general(&rising, &Exponent::one(), &VerifyOptions::default()),
            Err(VerifyError::NotQDecreasing { index: 1, .. })
        ));

        let shifted = LatticeFunction::new(&part, vec![1.0, 1.5, 2.0]).unwrap();
        assert!(matches!(
            verify_opial_general(&shifted, &Exponent::one(), &VerifyOptions::default()),
            Err(VerifyError::NonzeroBoundary { .. })
        ));

        // Bypassing evaluates anyway.
        let report =
            verify_opial_general(&shifted, &Exponent::one(), &VerifyOptions::unchecked()).unwrap();
        assert!(report.lhs.is_finite());

        assert!(matches!(
            verify_opial_general(
                &rising,
                &Exponent::from_int(-1),
                &VerifyOptions::unchecked()
            ),
            Err(VerifyError::ExponentOutOfDomain { name: "p", .. })
        ));
    }

    #[test]
    fn two_function_worked_example() {
        let (_, ramp) = ramp_instance();
        let report = verify_two_function(&ramp, &ramp, &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, rat(-9, 16));
        assert_eq!(report.rhs, rat(9, 16));
        assert!(report.holds);

        // lhs telescopes to -f(a)g(a).
        let expected = ramp.left_value().mul(ramp.left_value()).neg();
        assert_eq!(report.lhs, expected);
    }

    #[test]
    fn two_function_zero_first_function() {
        let (part, ramp) = ramp_instance();
        let zero = LatticeFunction::tabulate(&part, |_| rat(0, 1)).unwrap();
        let report = verify_two_function(&zero, &ramp, &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, rat(0, 1));
        assert!(report.rhs > rat(0, 1));
        assert!(report.holds);
    }

    #[test]
    fn two_function_partition_mismatch() {
        let (_, ramp) = ramp_instance();
        let other = QLatticePartition::shared(rat(1, 3), rat(1, 1), 2).unwrap();
        let g = LatticeFunction::tabulate(&other, |x| rat(1, 1).sub(x)).unwrap();
        assert!(matches!(
            verify_two_function(&ramp, &g, &VerifyOptions::default()),
            Err(VerifyError::PartitionMismatch)
        ));
    }

    #[test]
    fn telescoping_residual_vanishes_without_monotonicity() {
        let part = QLatticePartition::shared(rat(2, 5), rat(3, 1), 4).unwrap();
        // Non-monotone values, boundary still zero.
        let f = LatticeFunction::new(
            &part,
            vec![rat(0, 1), rat(5, 2), rat(-1, 3), rat(7, 4), rat(1, 9)],
        )
        .unwrap();
        let g = LatticeFunction::new(
            &part,
            vec![rat(0, 1), rat(-3, 7), rat(11, 5), rat(-2, 1), rat(4, 3)],
        )
        .unwrap();
        assert_eq!(telescoping_residual(&f, &g).unwrap(), rat(0, 1));

        let (_, ramp) = ramp_instance();
        assert_eq!(telescoping_residual(&ramp, &ramp).unwrap(), rat(0, 1));
    }

    #[test]
    fn am_gm_margin_examples() {
        assert_eq!(am_gm_margin(&1.0, &-1.0), 0.0);
        assert_eq!(am_gm_margin(&1.0, &1.0), 2.0);
        assert_eq!(am_gm_margin(&rat(3, 1), &rat(-2, 1)), rat(1, 2));
    }

    #[test]
    fn young_scalar_margin_examples() {
        let one = Exponent::one();
        assert_eq!(
            young_scalar_margin(&rat(1, 1), &rat(1, 1), &one, &one).unwrap(),
            rat(0, 1)
        );
        assert_eq!(
            young_scalar_margin(&rat(2, 1), &rat(0, 1), &one, &one).unwrap(),
            rat(2, 1)
        );
        assert_eq!(
            young_scalar_margin(&rat(1, 1), &rat(2, 1), &one, &Exponent::from_int(2)).unwrap(),
            rat(5, 3)
        );
        assert!(matches!(
            young_scalar_margin(&rat(-1, 1), &rat(1, 1), &one, &one),
            Err(VerifyError::NegativeValue { name: "z", .. })
        ));
        assert!(matches!(
            young_scalar_margin(&rat(1, 1), &rat(1, 1), &Exponent::from_int(0), &one),
            Err(VerifyError::ExponentOutOfDomain { name: "s", .. })
        ));
    }

    #[test]
    fn young_pair_worked_example() {
        let (_, ramp) = ramp_instance();
        let one = Exponent::one();
        let report =
            verify_young_pair(&ramp, &ramp, &one, &one, &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, rat(1, 16));
        assert_eq!(report.rhs, rat(27, 64));
        assert!(report.holds);
    }

    #[test]
    fn young_pair_and_wirtinger_zero_function() {
        let (part, ramp) = ramp_instance();
        let zero = LatticeFunction::tabulate(&part, |_| rat(0, 1)).unwrap();
        let one = Exponent::one();
        let report =
            verify_young_pair(&zero, &ramp, &one, &one, &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, rat(0, 1));
        assert!(report.rhs > rat(0, 1));
        assert!(report.holds);

        let report = verify_wirtinger(&zero, &one, &VerifyOptions::default()).unwrap();
        assert_eq!(report.lhs, rat(0, 1));
        assert_eq!(report.rhs, rat(0, 1));
        assert!(report.holds);
    }

    #[test]
    fn wirtinger_is_the_diagonal_young_pair() {
        let (_, ramp) = ramp_instance();
        let one = Exponent::one();
        let young =
            verify_young_pair(&ramp, &ramp, &one, &one, &VerifyOptions::default()).unwrap();
        let wirtinger = verify_wirtinger(&ramp, &one, &VerifyOptions::default()).unwrap();
        assert_eq!(wirtinger.lhs, young.lhs);
        assert_eq!(wirtinger.rhs, young.rhs);
        assert_eq!(wirtinger.lhs, rat(1, 16));
        assert_eq!(wirtinger.rhs, rat(27, 64));
        assert_eq!(wirtinger.inequality, InequalityId::Wirtinger);
        assert_eq!(wirtinger.params.r, Some(one));
    }

    #[test]
    fn wirtinger_fractional_exponent_float() {
        let part = QLatticePartition::shared(0.5, 1.0, 4).unwrap();
        let h = LatticeFunction::new(&part, vec![0.0, 0.25, 0.25, 0.75, 1.5]).unwrap();
        for r in [Exponent::new(1, 2).unwrap(), Exponent::one(), Exponent::from_int(2)] {
            let report = verify_wirtinger(&h, &r, &VerifyOptions::default()).unwrap();
            assert!(report.holds, "r = {r}");
        }
    }

    #[test]
    fn holder_step_equality_at_constant_quotients() {
        // |D_q f| constant is the Hoelder equality case; for the ramp the
        // sides are (b-a)^{p+1} on both ends, exactly in the exact backend.
        let (part, ramp) = ramp_instance();
        for p in [0, 1, 2, 5] {
            let report = verify_discrete_holder_step(
                &ramp,
                &Exponent::from_int(p),
                &VerifyOptions::default(),
            )
            .unwrap();
            let expected = Scalar::pow(part.width(), &Exponent::from_int(p + 1)).unwrap();
            assert_eq!(report.lhs, expected);
            assert_eq!(report.rhs, expected);
            assert!(report.holds);
        }
    }

    #[test]
    fn holder_step_ignores_monotonicity() {
        let part = QLatticePartition::shared(rat(1, 2), rat(2, 1), 3).unwrap();
        let jagged = LatticeFunction::new(
            &part,
            vec![rat(1, 1), rat(-2, 1), rat(3, 2), rat(-1, 4)],
        )
        .unwrap();
        let report = verify_discrete_holder_step(
            &jagged,
            &Exponent::from_int(2),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(report.holds);
        assert!(report.margin >= rat(0, 1));
    }

    #[test]
    fn holder_step_p_zero_is_identity_for_every_function() {
        let part = QLatticePartition::shared(0.3, 1.0, 6).unwrap();
        let f = LatticeFunction::new(&part, vec![0.5, -0.25, 1.0, 0.0, -2.0, 0.75, 0.1]).unwrap();
        let report =
            verify_discrete_holder_step(&f, &Exponent::from_int(0), &VerifyOptions::default())
                .unwrap();
        assert_eq!(report.lhs, report.rhs);
        assert_eq!(report.ratio, RatioValue::Finite(1.0));
    }

    #[test]
    fn proof_chain_links_hold_separately() {
        // step 1: int |D_q f| |f|^p <= (sum |f_j - f_{j+1}|)^{p+1}, which is
        // the Hoelder-step lhs; step 2 is the Hoelder report itself.
        let part = QLatticePartition::shared(rat(3, 5), rat(2, 1), 5).unwrap();
        let f = LatticeFunction::new(
            &part,
            vec![rat(0, 1), rat(1, 4), rat(1, 4), rat(7, 8), rat(9, 8), rat(2, 1)],
        )
        .unwrap();
        for p in [0i64, 1, 2, 5] {
            let p = Exponent::from_int(p);
            let opial = verify_opial_general(&f, &p, &VerifyOptions::default()).unwrap();
            let holder = verify_discrete_holder_step(&f, &p, &VerifyOptions::default()).unwrap();
            assert!(opial.lhs <= holder.lhs, "step 1 fails at p = {p}");
            assert!(holder.holds, "step 2 fails at p = {p}");
            assert_eq!(opial.rhs, holder.rhs);
        }
    }

    #[test]
    fn eq6_sign_structure() {
        let part = QLatticePartition::shared(rat(1, 2), rat(1, 1), 4).unwrap();
        let f = LatticeFunction::new(
            &part,
            vec![rat(0, 1), rat(1, 8), rat(1, 2), rat(1, 2), rat(3, 4)],
        )
        .unwrap();
        let g = LatticeFunction::new(
            &part,
            vec![rat(0, 1), rat(0, 1), rat(1, 4), rat(5, 8), rat(5, 8)],
        )
        .unwrap();
        let report = verify_two_function(&f, &g, &VerifyOptions::default()).unwrap();
        assert!(report.lhs <= rat(0, 1));
        assert!(report.rhs >= rat(0, 1));
        assert_eq!(report.lhs, f.left_value().mul(g.left_value()).neg());
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let part = QLatticePartition::shared(rat(1, 2), rat(1, 1), 3).unwrap();
        let f = LatticeFunction::new(
            &part,
            vec![rat(0, 1), rat(1, 3), rat(1, 2), rat(9, 8)],
        )
        .unwrap();
        let p = Exponent::from_int(2);
        let base = verify_opial_general(&f, &p, &VerifyOptions::default()).unwrap();
        for lambda in [rat(1, 3), rat(1, 1), rat(7, 1)] {
            let scaled = f.scaled(&lambda);
            let report = verify_opial_general(&scaled, &p, &VerifyOptions::default()).unwrap();
            assert_eq!(report.ratio, base.ratio, "lambda = {lambda}");
        }
    }

    #[test]
    fn float_overflow_falls_back_to_exact() {
        let part = QLatticePartition::shared(0.5, 1.0, 2).unwrap();
        let f = LatticeFunction::new(&part, vec![0.0, 1e200, 2e200]).unwrap();
        let params = ExponentParams::for_st(Exponent::from_int(3), Exponent::from_int(5));
        let report = verify_instance_float(
            InequalityId::YoungPair,
            &f,
            Some(&f),
            &params,
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(report.holds);
        assert!(!report.rhs.is_finite());

        // Same instance purely in float overflows without a verdict rescue.
        let raw = verify_instance(
            InequalityId::YoungPair,
            &f,
            Some(&f),
            &params,
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(!raw.rhs.is_finite());
        assert!(!raw.holds, "both sides infinite cannot be confirmed");
    }

    #[test]
    fn overflowed_lower_side_is_not_confirmed() {
        // An infinite lhs against a finite rhs must come out as a failure,
        // not slip through the tolerance comparison.
        let report = VerificationReport::from_sides(
            InequalityId::OpialGeneral,
            f64::INFINITY,
            1.0,
            ExponentParams::none(),
            None,
        );
        assert!(!report.holds);

        let report = VerificationReport::from_sides(
            InequalityId::OpialGeneral,
            1.0,
            f64::INFINITY,
            ExponentParams::none(),
            None,
        );
        assert!(report.holds);
    }

    #[test]
    fn instance_dispatch_requires_parameters() {
        let part = QLatticePartition::shared(0.5, 1.0, 2).unwrap();
        let f = LatticeFunction::new(&part, vec![0.0, 0.5, 0.75]).unwrap();
        assert!(matches!(
            verify_instance(
                InequalityId::OpialGeneral,
                &f,
                None,
                &ExponentParams::none(),
                &VerifyOptions::default()
            ),
            Err(VerifyError::MissingParameter { name: "p" })
        ));
        assert!(matches!(
            verify_instance(
                InequalityId::TwoFunction,
                &f,
                None,
                &ExponentParams::none(),
                &VerifyOptions::default()
            ),
            Err(VerifyError::MissingSecondFunction)
        ));
    }

    #[test]
    fn inequality_ids_round_trip() {
        for id in InequalityId::ALL {
            assert_eq!(id.as_str().parse::<InequalityId>().unwrap(), id);
        }
        assert!("nonsense".parse::<InequalityId>().is_err());
    }
}
