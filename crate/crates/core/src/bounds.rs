//! Prime-interval constants from certified lower bounds on C⁺(A).
//!
//! With `L ≤ C⁺(A)`, every `c ≥ (1 + 2α)/L` is admissible: under RH for
//! `A = 36/11` (primes in `(x, x + c√x log x]`), under GRH for `A = 4`
//! (primes `≡ b mod q` in `(x, x + c φ(q) √x log x]`).

use std::fmt;

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::certify::{Certificate, CertifiedBound};
use crate::rigor::{parse_exact_rational, Enclosure, Precision};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("certified lower bound {0} is not positive; no constant follows")]
    VacuousBound(String),
    #[error("alpha = {0} must be nonnegative")]
    NegativeAlpha(String),
    #[error("certificate: {0}")]
    Certificate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Context {
    RhPrimes,
    GrhProgressions,
    Generic,
}

impl Context {
    pub fn for_a(a: &Rational) -> Context {
        if *a == Rational::from((36, 11)) {
            Context::RhPrimes
        } else if *a == 4 {
            Context::GrhProgressions
        } else {
            Context::Generic
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Context::RhPrimes => "RH-primes",
            Context::GrhProgressions => "GRH-progressions",
            Context::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone)]
pub struct IntervalConstant {
    pub a: Rational,
    pub alpha: Rational,
    /// The lower bound on C⁺(A) the constant was derived from.
    pub lower: Rational,
    /// `(1 + 2α)/lower`, exactly.
    pub c_exact: Rational,
    /// `c_exact` rounded up to a float.
    pub c_upper: Enclosure,
    pub context: Context,
    pub statement: String,
}

/// Digits after the decimal point in rendered constants.
pub const DISPLAY_PLACES: u32 = 4;

const BITS: u32 = 128;

/// `x` rounded up to `places` decimals.
pub fn decimal_up(x: &Rational, places: u32) -> String {
    let scale = Integer::from(Integer::u_pow_u(10, places));
    let scaled = Rational::from(x * &scale);
    let (_, ceil) = scaled.fract_ceil(Integer::new());
    let neg = ceil < 0;
    let digits = Integer::from(ceil.abs_ref()).to_string();
    let p = places as usize;
    let padded = format!("{digits:0>width$}", width = p + 1);
    let (int, frac) = padded.split_at(padded.len() - p);
    let sign = if neg { "-" } else { "" };
    if p == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn float_to_rational(x: &Float) -> Option<Rational> {
    x.to_rational()
}

/// The constant for a raw lower bound `lower ≤ C⁺(a)`. Prefer
/// [`interval_constant`], which only accepts verified bounds.
pub fn interval_constant_from_lower(
    a: &Rational,
    lower: &Rational,
    alpha: &Rational,
) -> Result<IntervalConstant, BoundsError> {
    if *lower <= 0 {
        return Err(BoundsError::VacuousBound(lower.to_f64().to_string()));
    }
    if *alpha < 0 {
        return Err(BoundsError::NegativeAlpha(alpha.to_string()));
    }
    let num = Rational::from(1 + Rational::from(alpha * 2u32));
    let c_exact = Rational::from(&num / lower);
    let c_float = Float::with_val_round(BITS, &c_exact, Round::Up).0;
    let prec = Precision::new(BITS).unwrap_or_default();
    let c_upper = Enclosure::from_float(&c_float, prec);
    let context = Context::for_a(a);
    let statement = render(a, alpha, lower, &c_exact, context);
    Ok(IntervalConstant {
        a: a.clone(),
        alpha: alpha.clone(),
        lower: lower.clone(),
        c_exact,
        c_upper,
        context,
        statement,
    })
}

pub fn interval_constant(b: &CertifiedBound, alpha: &Rational) -> Result<IntervalConstant, BoundsError> {
    let lower = b.certified_lower();
    let lower = float_to_rational(&lower).ok_or_else(|| BoundsError::VacuousBound(lower.to_string()))?;
    interval_constant_from_lower(b.a(), &lower, alpha)
}

/// Bound on `limsup (p_{n+1} − p_n)/(√p_n log p_n)`, per `φ(q)` for progressions:
/// the `α = 0` constant.
pub fn gap_constant(b: &CertifiedBound) -> Result<Enclosure, BoundsError> {
    Ok(interval_constant(b, &Rational::new())?.c_upper)
}

/// Reads the lower bound back from a certificate. Its decimal string was
/// rounded down when written, so it is still a valid lower bound.
pub fn lower_from_certificate(cert: &Certificate) -> Result<(Rational, Rational), BoundsError> {
    let a = parse_exact_rational(&cert.a).map_err(|e| BoundsError::Certificate(e.to_string()))?;
    let lower = parse_exact_rational(&cert.certified_lower).map_err(|e| BoundsError::Certificate(e.to_string()))?;
    Ok((a, lower))
}

fn render(a: &Rational, alpha: &Rational, lower: &Rational, c: &Rational, context: Context) -> String {
    let l = decimal_down(lower, DISPLAY_PLACES);
    let c = decimal_up(c, DISPLAY_PLACES);
    let al = alpha.to_string();
    let gap = decimal_up(&Rational::from(lower.recip_ref()), DISPLAY_PLACES);
    match context {
        Context::RhPrimes => format!(
            "Assume RH. C+(36/11) >= {l}, so for alpha = {al}:\n  \
             inf{{c > 0 : liminf (pi(x + c sqrt(x) log x) - pi(x))/sqrt(x) > {al}}} <= {c}\n  \
             gaps: limsup (p_(n+1) - p_n)/(sqrt(p_n) log p_n) <= {gap}"
        ),
        Context::GrhProgressions => format!(
            "Assume GRH; q >= 3, gcd(b, q) = 1. C+(4) >= {l}, so for alpha = {al}:\n  \
             inf{{c1 > 0 : liminf (pi(x + c1 phi(q) sqrt(x) log x; q, b) - pi(x; q, b))/sqrt(x) > {al}}} <= {c}\n  \
             gaps: limsup (p_(n+1,q,b) - p_(n,q,b))/(sqrt(p_(n,q,b)) log p_(n,q,b)) <= {gap} phi(q)"
        ),
        Context::Generic => format!("C+({a}) >= {l}, so (1 + 2*{al})/C+({a}) <= {c}"),
    }
}

fn decimal_down(x: &Rational, places: u32) -> String {
    let neg = Rational::from(-x);
    let up = decimal_up(&neg, places);
    match up.strip_prefix('-') {
        Some(s) => s.to_string(),
        None if up.chars().all(|c| c == '0' || c == '.') => up,
        None => format!("-{up}"),
    }
}

/// JSON record for one constant.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantRecord {
    #[serde(rename = "A")]
    pub a: String,
    pub alpha: String,
    pub certified_lower: String,
    pub c_upper: String,
    pub c_display: String,
    pub context: Context,
    pub statement: String,
}

impl IntervalConstant {
    pub fn record(&self) -> ConstantRecord {
        ConstantRecord {
            a: self.a.to_string(),
            alpha: self.alpha.to_string(),
            certified_lower: decimal_down(&self.lower, 30),
            c_upper: decimal_up(&self.c_exact, 30),
            c_display: decimal_up(&self.c_exact, DISPLAY_PLACES),
            context: self.context,
            statement: self.statement.clone(),
        }
    }
}
