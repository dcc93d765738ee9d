//! The q-geometric lattice and the calculus operators living on it.
//!
//! For a base `0 < q < 1`, a right endpoint `b > 0`, and a subinterval count
//! `n >= 1`, the lattice is the strictly decreasing point set
//!
//! ```text
//!   x_j = b * q^j,   j = 0..=n,   a = x_n = b * q^n.
//! ```
//!
//! Functions are tabulated on these points. Three operators are provided:
//!
//! - the q-derivative `(D_q f)(x) = (f(x) - f(qx)) / (x - qx)`, realized on
//!   the lattice as forward difference quotients;
//! - the Jackson q-integral on `[0, a]`, the series
//!   `a(1-q) * sum_j q^j f(a q^j)` truncated adaptively;
//! - the restricted q-integral on `[a, b]` with `a = b q^n`, the finite sum
//!   `b(1-q) * sum_{j=0}^{n-1} q^j f(b q^j)`.
//!
//! A function is q-decreasing when `f(qx) >= f(x)`, i.e. when its tabulated
//! values are nondecreasing in `j`; decreasing functions are q-decreasing.

use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::scalar::{Accumulator, Exponent, Scalar};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice base q = {q} must satisfy 0 < q < 1 strictly")]
    InvalidBase { q: String },
    #[error("right endpoint b = {b} must be positive and finite")]
    InvalidEndpoint { b: String },
    #[error("subinterval count n must be at least 1")]
    InvalidSubintervalCount,
    #[error("expected {expected} lattice values, got {got}")]
    ValueCountMismatch { expected: usize, got: usize },
    #[error("non-finite value at lattice index {index}")]
    NonFiniteValue { index: usize },
    #[error("functions live on different partitions")]
    PartitionMismatch,
    #[error("series did not meet the truncation criterion within {max_terms} terms")]
    ConvergenceFailure { max_terms: usize },
    #[error("integration bounds must satisfy 0 <= a <= b, got a = {lower}, b = {upper}")]
    InvalidBounds { lower: String, upper: String },
    #[error("relative tolerance must be positive")]
    InvalidTolerance,
}

/// The geometric grid `b, bq, bq^2, ..., bq^n` with `a = b q^n`.
///
/// Powers of `q` and the lattice points are computed once at construction;
/// all accessors are cheap. Immutable after construction.
#[derive(Debug, Clone)]
pub struct QLatticePartition<S: Scalar> {
    q: S,
    b: S,
    n: usize,
    q_powers: Vec<S>,
    points: Vec<S>,
    width: S,
    weight_factor: S,
}

impl<S: Scalar> PartialEq for QLatticePartition<S> {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.b == other.b && self.n == other.n
    }
}

impl<S: Scalar> QLatticePartition<S> {
    pub fn new(q: S, b: S, n: usize) -> Result<Self, LatticeError> {
        let zero = S::zero();
        let one = S::one();
        if !q.is_finite() || q <= zero || q >= one {
            return Err(LatticeError::InvalidBase { q: q.to_string() });
        }
        if !b.is_finite() || b <= zero {
            return Err(LatticeError::InvalidEndpoint { b: b.to_string() });
        }
        if n == 0 {
            return Err(LatticeError::InvalidSubintervalCount);
        }

        let mut q_powers = Vec::with_capacity(n + 1);
        let mut points = Vec::with_capacity(n + 1);
        let mut power = S::one();
        for j in 0..=n {
            let point = b.mul(&power);
            // Structural invariant: points strictly decrease. Multiplying a
            // positive float by q < 1 cannot round upward past the previous
            // point, so this only trips on degenerate subnormal-scale input.
            if j > 0 && point >= points[j - 1] {
                return Err(LatticeError::InvalidEndpoint { b: b.to_string() });
            }
            q_powers.push(power.clone());
            points.push(point);
            power = power.mul(&q);
        }

        let width = b.sub(&points[n]);
        let weight_factor = b.mul(&one.sub(&q));
        Ok(QLatticePartition {
            q,
            b,
            n,
            q_powers,
            points,
            width,
            weight_factor,
        })
    }

    /// Convenience constructor returning the shared handle used by lattice
    /// functions.
    pub fn shared(q: S, b: S, n: usize) -> Result<Arc<Self>, LatticeError> {
        Self::new(q, b, n).map(Arc::new)
    }

    pub fn q(&self) -> &S {
        &self.q
    }

    pub fn b(&self) -> &S {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The left endpoint `a = b q^n`.
    pub fn a(&self) -> &S {
        &self.points[self.n]
    }

    /// Lattice point `x_j = b q^j` for `0 <= j <= n`.
    pub fn point(&self, j: usize) -> &S {
        &self.points[j]
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    /// `q^j` for `0 <= j <= n`.
    pub fn q_power(&self, j: usize) -> &S {
        &self.q_powers[j]
    }

    /// Interval length `b - a`.
    pub fn width(&self) -> &S {
        &self.width
    }

    /// The weight prefactor `b (1 - q)` of the restricted integral.
    pub fn weight_factor(&self) -> &S {
        &self.weight_factor
    }
}

impl QLatticePartition<f64> {
    /// Lifts the partition into the exact backend. The float values of `q`
    /// and `b` embed exactly (they are dyadic rationals), so the exact
    /// partition describes the same mathematical lattice.
    pub fn to_exact(&self) -> Arc<QLatticePartition<BigRational>> {
        QLatticePartition::shared(
            BigRational::from_dyadic(self.q),
            BigRational::from_dyadic(self.b),
            self.n,
        )
        .expect("valid float partition lifts to a valid exact partition")
    }
}

/// The q-natural number `[n]_q = (1 - q^n) / (1 - q) = q^{n-1} + ... + q + 1`.
pub fn q_natural<S: Scalar>(n: u32, q: &S) -> S {
    if n == 0 {
        return S::zero();
    }
    let one = S::one();
    let qn = q
        .pow(&Exponent::from_int(i64::from(n)))
        .expect("integer exponent");
    one.sub(&qn).div(&one.sub(q))
}

/// A function tabulated on the lattice: `values[j] = f(b q^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction<S: Scalar> {
    partition: Arc<QLatticePartition<S>>,
    values: Vec<S>,
}

impl<S: Scalar> LatticeFunction<S> {
    pub fn new(
        partition: &Arc<QLatticePartition<S>>,
        values: Vec<S>,
    ) -> Result<Self, LatticeError> {
        if values.len() != partition.n() + 1 {
            return Err(LatticeError::ValueCountMismatch {
                expected: partition.n() + 1,
                got: values.len(),
            });
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(LatticeError::NonFiniteValue { index });
            }
        }
        Ok(LatticeFunction {
            partition: Arc::clone(partition),
            values,
        })
    }

    /// Samples a pointwise function onto the lattice.
    pub fn tabulate(
        partition: &Arc<QLatticePartition<S>>,
        f: impl Fn(&S) -> S,
    ) -> Result<Self, LatticeError> {
        let values: Vec<S> = partition.points().iter().map(f).collect();
        Self::new(partition, values)
    }

    pub fn partition(&self) -> &Arc<QLatticePartition<S>> {
        &self.partition
    }

    pub fn value(&self, j: usize) -> &S {
        &self.values[j]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// `f(b)`, the value at the right endpoint (index 0).
    pub fn boundary_value(&self) -> &S {
        &self.values[0]
    }

    /// `f(a)`, the value at the left endpoint (index n).
    pub fn left_value(&self) -> &S {
        &self.values[self.partition.n()]
    }

    pub fn same_partition(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.partition, &other.partition) || self.partition == other.partition
    }

    /// Pointwise scaling by a constant factor.
    pub fn scaled(&self, factor: &S) -> Self {
        LatticeFunction {
            partition: Arc::clone(&self.partition),
            values: self.values.iter().map(|v| v.mul(factor)).collect(),
        }
    }

    /// True iff `f(qx) >= f(x)` on the lattice, i.e. values nondecreasing
    /// in `j`, with a slack subtracted from the earlier value before the
    /// comparison. Slack 0 is the strict lattice predicate.
    pub fn is_q_decreasing_with_slack(&self, slack: &S) -> bool {
        self.values
            .windows(2)
            .all(|w| w[1] >= w[0].sub(slack))
    }

    pub fn is_q_decreasing(&self) -> bool {
        self.is_q_decreasing_with_slack(&S::zero())
    }

    /// True iff `f(qx) <= f(x)` on the lattice, i.e. values nonincreasing
    /// in `j`, with slack.
    pub fn is_q_increasing_with_slack(&self, slack: &S) -> bool {
        self.values
            .windows(2)
            .all(|w| w[1] <= w[0].add(slack))
    }

    pub fn is_q_increasing(&self) -> bool {
        self.is_q_increasing_with_slack(&S::zero())
    }

    /// The forward q-difference quotients of this function.
    pub fn q_derivative(&self) -> LatticeDerivative<S> {
        let part = &self.partition;
        let quotients = (0..part.n())
            .map(|j| {
                let dv = self.values[j].sub(&self.values[j + 1]);
                let dx = part.point(j).sub(part.point(j + 1));
                dv.div(&dx)
            })
            .collect();
        LatticeDerivative {
            partition: Arc::clone(part),
            quotients,
        }
    }

    /// The restricted q-integral `b(1-q) * sum_{j=0}^{n-1} q^j values[j]`.
    /// The value at the left endpoint (index n) never enters.
    pub fn restricted_integral(&self) -> S {
        restricted_sum(&self.partition, |j| self.values[j].clone())
    }
}

impl LatticeFunction<f64> {
    /// Exact lift into the rational backend over the lifted partition.
    pub fn to_exact(&self) -> LatticeFunction<BigRational> {
        let partition = self.partition.to_exact();
        let values = self.values.iter().map(|v| BigRational::from_dyadic(*v)).collect();
        LatticeFunction::new(&partition, values).expect("lifted values stay valid")
    }
}

/// The q-derivative of a lattice function: `quotients[j] = (D_q f)(b q^j)`
/// for `j = 0..n-1`. The denominators `b q^j (1 - q)` are structurally
/// positive, so no division by zero can occur on a valid partition.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDerivative<S: Scalar> {
    partition: Arc<QLatticePartition<S>>,
    quotients: Vec<S>,
}

impl<S: Scalar> LatticeDerivative<S> {
    pub fn partition(&self) -> &Arc<QLatticePartition<S>> {
        &self.partition
    }

    pub fn quotient(&self, j: usize) -> &S {
        &self.quotients[j]
    }

    pub fn quotients(&self) -> &[S] {
        &self.quotients
    }
}

/// The weighted lattice sum `b(1-q) * sum_{j=0}^{n-1} q^j term(j)`:
/// the restricted q-integral of an arbitrary integrand given by its values
/// at the lattice points `x_j`, `j = 0..n-1`.
pub fn restricted_sum<S: Scalar>(
    partition: &QLatticePartition<S>,
    mut term: impl FnMut(usize) -> S,
) -> S {
    let mut acc = S::accumulator();
    for j in 0..partition.n() {
        acc.add(partition.q_power(j).mul(&term(j)));
    }
    partition.weight_factor().mul(&acc.total())
}

/// Truncation controls for the infinite Jackson series.
#[derive(Debug, Clone)]
pub struct JacksonOptions<S> {
    /// A term is "small" when its magnitude drops below `rel_tol` times the
    /// magnitude of the running partial sum (or below `rel_tol` itself while
    /// the partial sum is zero).
    pub rel_tol: S,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl<S: Scalar> Default for JacksonOptions<S> {
    fn default() -> Self {
        JacksonOptions {
            rel_tol: S::from_ratio(1, 100_000_000_000_000),
            max_terms: 100_000,
        }
    }
}

// A single small term is not evidence of convergence: integrands vanishing
// at the upper endpoint produce a zero first term of a nonzero series.
const CONSECUTIVE_SMALL_TERMS: usize = 3;

/// The Jackson q-integral on `[0, upper]`:
/// `upper * (1-q) * sum_{j=0}^inf q^j f(upper * q^j)`, truncated once
/// [`JacksonOptions::rel_tol`] is met by three consecutive terms.
pub fn jackson_integral_zero<S: Scalar>(
    f: impl Fn(&S) -> S,
    upper: &S,
    q: &S,
    opts: &JacksonOptions<S>,
) -> Result<S, LatticeError> {
    let zero = S::zero();
    let one = S::one();
    if !q.is_finite() || *q <= zero || *q >= one {
        return Err(LatticeError::InvalidBase { q: q.to_string() });
    }
    if !upper.is_finite() || *upper <= zero {
        return Err(LatticeError::InvalidEndpoint {
            b: upper.to_string(),
        });
    }
    if opts.rel_tol <= zero {
        return Err(LatticeError::InvalidTolerance);
    }

    let mut acc = S::accumulator();
    let mut q_power = S::one();
    let mut small_run = 0usize;
    for index in 0..opts.max_terms {
        let x = upper.mul(&q_power);
        let fx = f(&x);
        if !fx.is_finite() {
            return Err(LatticeError::NonFiniteValue { index });
        }
        let term = q_power.mul(&fx);
        acc.add(term.clone());

        let partial = acc.total();
        let threshold = if partial.is_zero() {
            opts.rel_tol.clone()
        } else {
            opts.rel_tol.mul(&partial.abs())
        };
        if term.abs() <= threshold {
            small_run += 1;
            if small_run >= CONSECUTIVE_SMALL_TERMS {
                let factor = upper.mul(&one.sub(q));
                return Ok(factor.mul(&acc.total()));
            }
        } else {
            small_run = 0;
        }
        q_power = q_power.mul(q);
    }
    Err(LatticeError::ConvergenceFailure {
        max_terms: opts.max_terms,
    })
}

/// The Jackson q-integral on `[lower, upper]`, defined as the difference of
/// the two integrals from zero. Identical bounds integrate to zero.
pub fn jackson_integral_ab<S: Scalar>(
    f: impl Fn(&S) -> S,
    lower: &S,
    upper: &S,
    q: &S,
    opts: &JacksonOptions<S>,
) -> Result<S, LatticeError> {
    let zero = S::zero();
    if *lower < zero || *upper < *lower {
        return Err(LatticeError::InvalidBounds {
            lower: lower.to_string(),
            upper: upper.to_string(),
        });
    }
    if *lower == *upper {
        return Ok(S::zero());
    }
    let upper_part = jackson_integral_zero(&f, upper, q, opts)?;
    if lower.is_zero() {
        return Ok(upper_part);
    }
    let lower_part = jackson_integral_zero(&f, lower, q, opts)?;
    Ok(upper_part.sub(&lower_part))
}
