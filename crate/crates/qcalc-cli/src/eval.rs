//! Direct operator evaluation on a small built-in function grammar.
//!
//! Functions are polynomials up to degree 4 written as sums of terms
//! (`"1 + 2x - x^3"`, coefficients may be fractions like `"1/2x^2"`) plus
//! the literal `"b-x"`, which uses the partition's right endpoint. The
//! exact backend evaluates coefficients exactly and prints `num/den`.

use std::sync::Arc;

use qcalc::lattice::{
    jackson_integral_ab, q_natural, JacksonOptions, LatticeFunction, QLatticePartition,
};
use qcalc::scalar::Scalar;

use crate::CliError;

const MAX_DEGREE: usize = 4;

/// A parsed function: coefficient strings are kept verbatim so each backend
/// re-parses them at its own precision (exactly, for rationals).
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedFunction {
    /// The ramp `b - x` on the active partition.
    BMinusX,
    /// Terms (degree, coefficient text), degrees up to 4.
    Polynomial(Vec<(usize, String)>),
}

pub fn parse_function(text: &str) -> Result<ParsedFunction, CliError> {
    let squeezed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if squeezed.is_empty() {
        return Err(CliError::Config("empty function".into()));
    }
    if squeezed == "b-x" {
        return Ok(ParsedFunction::BMinusX);
    }

    // Split into sign-carrying terms.
    let mut terms: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, c) in squeezed.chars().enumerate() {
        if (c == '+' || c == '-') && i > 0 {
            terms.push(std::mem::take(&mut current));
            if c == '-' {
                current.push('-');
            }
        } else {
            current.push(c);
        }
    }
    terms.push(current);

    let mut parsed = Vec::new();
    for term in terms {
        if term.is_empty() || term == "-" {
            return Err(CliError::Config(format!("cannot parse function {text:?}")));
        }
        let (coeff, degree) = match term.find('x') {
            None => (term.clone(), 0usize),
            Some(pos) => {
                let mut coeff = term[..pos].trim_end_matches('*').to_string();
                if coeff.is_empty() || coeff == "+" {
                    coeff = "1".into();
                } else if coeff == "-" {
                    coeff = "-1".into();
                }
                let rest = &term[pos + 1..];
                let degree = if rest.is_empty() {
                    1
                } else if let Some(exp) = rest.strip_prefix('^') {
                    exp.parse::<usize>().map_err(|_| {
                        CliError::Config(format!("bad exponent in term {term:?}"))
                    })?
                } else {
                    return Err(CliError::Config(format!("cannot parse term {term:?}")));
                };
                (coeff, degree)
            }
        };
        if degree > MAX_DEGREE {
            return Err(CliError::Config(format!(
                "only polynomials up to degree {MAX_DEGREE} are supported"
            )));
        }
        // Validate the coefficient early so errors surface before any run.
        f64::parse(&coeff)
            .map_err(|_| CliError::Config(format!("bad coefficient in term {term:?}")))?;
        parsed.push((degree, coeff));
    }
    Ok(ParsedFunction::Polynomial(parsed))
}

pub fn eval_function<S: Scalar>(parsed: &ParsedFunction, x: &S, b: &S) -> S {
    match parsed {
        ParsedFunction::BMinusX => b.sub(x),
        ParsedFunction::Polynomial(terms) => {
            let mut total = S::zero();
            for (degree, coeff) in terms {
                let coeff = S::parse(coeff).expect("validated at parse time");
                let mut term = coeff;
                for _ in 0..*degree {
                    term = term.mul(x);
                }
                total = total.add(&term);
            }
            total
        }
    }
}

pub struct EvalInputs<'a> {
    pub function: Option<&'a str>,
    pub q: &'a str,
    pub b: &'a str,
    pub n: usize,
    pub j: usize,
    pub lower: Option<&'a str>,
    pub rel_tol: &'a str,
    pub max_terms: usize,
}

/// Evaluates one operator and returns the printed value.
pub fn run_eval<S: Scalar>(operator: &str, inputs: &EvalInputs) -> Result<String, CliError> {
    let q: S = crate::campaign::parse_scalar_in_unit_interval("q", inputs.q)?;
    match operator {
        "q-natural" => {
            let n = u32::try_from(inputs.n)
                .map_err(|_| CliError::Config("--n out of range".into()))?;
            Ok(q_natural(n, &q).to_string())
        }
        "q-derivative" | "restricted-integral" => {
            let b: S = crate::campaign::parse_positive_scalar("b", inputs.b)?;
            let function = parse_function(inputs.function.ok_or_else(|| {
                CliError::Config(format!("{operator} requires --fn"))
            })?)?;
            let partition = QLatticePartition::shared(q, b.clone(), inputs.n)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let tabulated = tabulate(&partition, &function, &b)?;
            if operator == "q-derivative" {
                if inputs.j >= partition.n() {
                    return Err(CliError::Config(format!(
                        "--j must be below n = {}",
                        partition.n()
                    )));
                }
                Ok(tabulated.q_derivative().quotient(inputs.j).to_string())
            } else {
                Ok(tabulated.restricted_integral().to_string())
            }
        }
        "jackson-ab" => {
            let upper: S = crate::campaign::parse_positive_scalar("b", inputs.b)?;
            let lower: S = match inputs.lower {
                None => S::zero(),
                Some(text) => {
                    let value = S::parse(text)
                        .map_err(|e| CliError::Config(format!("--a {text:?}: {e}")))?;
                    if value < S::zero() {
                        return Err(CliError::Config("--a must be nonnegative".into()));
                    }
                    value
                }
            };
            let function = parse_function(inputs.function.ok_or_else(|| {
                CliError::Config("jackson-ab requires --fn".into())
            })?)?;
            let opts = JacksonOptions {
                rel_tol: parse_positive_tol::<S>(inputs.rel_tol)?,
                max_terms: inputs.max_terms,
            };
            // For "b-x" the ramp endpoint is the integral's upper bound.
            jackson_integral_ab(
                |x: &S| eval_function(&function, x, &upper),
                &lower,
                &upper,
                &q,
                &opts,
            )
            .map(|v| v.to_string())
            .map_err(|e| CliError::Runtime(e.to_string()))
        }
        other => Err(CliError::Config(format!(
            "unknown operator {other:?}; expected q-natural, q-derivative, restricted-integral, or jackson-ab"
        ))),
    }
}

fn parse_positive_tol<S: Scalar>(text: &str) -> Result<S, CliError> {
    let value =
        S::parse(text).map_err(|e| CliError::Config(format!("--rel-tol {text:?}: {e}")))?;
    if value <= S::zero() {
        return Err(CliError::Config("--rel-tol must be positive".into()));
    }
    Ok(value)
}

fn tabulate<S: Scalar>(
    partition: &Arc<QLatticePartition<S>>,
    function: &ParsedFunction,
    b: &S,
) -> Result<LatticeFunction<S>, CliError> {
    LatticeFunction::tabulate(partition, |x| eval_function(function, x, b))
        .map_err(|e| CliError::Runtime(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_polynomials_and_the_ramp() {
        assert_eq!(parse_function(" b - x ").unwrap(), ParsedFunction::BMinusX);
        assert_eq!(
            parse_function("1 + 2x - x^3").unwrap(),
            ParsedFunction::Polynomial(vec![
                (0, "1".into()),
                (1, "2".into()),
                (3, "-1".into()),
            ])
        );
        assert_eq!(
            parse_function("1/2x^2").unwrap(),
            ParsedFunction::Polynomial(vec![(2, "1/2".into())])
        );
        assert!(parse_function("x^5").is_err());
        assert!(parse_function("sin(x)").is_err());
        assert!(parse_function("").is_err());
    }

    #[test]
    fn evaluates_polynomials() {
        let f = parse_function("1 - 2x + x^2").unwrap();
        assert_eq!(eval_function(&f, &3.0, &0.0), 4.0);
        let ramp = parse_function("b-x").unwrap();
        assert_eq!(eval_function(&ramp, &0.25, &1.0), 0.75);
    }
}
