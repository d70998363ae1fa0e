//! Midpoint-radius ball arithmetic on top of MPFR, plus the few special
//! functions the certification pipeline needs.
//!
//! An [`Enclosure`] is a ball `[mid - rad, mid + rad]` whose midpoint is an
//! MPFR float at the working precision and whose radius is a 64-bit MPFR
//! float that is only ever rounded upward. Every operation returns a ball
//! containing the exact result for all members of the inputs. A ball with
//! infinite radius is "indeterminate"; operations never panic on it, callers
//! check [`Enclosure::is_finite`] at the end of a computation.

mod special;

pub use special::{erfc_enclosure, gamma, sup_clip_positive, upper_incomplete_gamma};

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign, Div};

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bits carried by every radius.
pub const RAD_PREC: u32 = 64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RigorError {
    #[error("precision must be at least {min} bits, got {got}")]
    InvalidPrecision { got: u32, min: u32 },
    #[error("{function}: argument outside the domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },
    #[error("{function}: result radius is not finite at {bits} bits")]
    PrecisionExhausted { function: &'static str, bits: u32 },
    #[error("not a decimal or rational literal: {0:?}")]
    Parse(String),
}

/// Working precision of enclosure midpoints, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 64;
    pub const DEFAULT_BITS: u32 = 256;
    /// Ceiling for automatic precision doubling.
    pub const MAX_ESCALATION_BITS: u32 = 4096;

    pub fn new(bits: u32) -> Result<Self, RigorError> {
        if bits < Self::MIN_BITS {
            return Err(RigorError::InvalidPrecision {
                got: bits,
                min: Self::MIN_BITS,
            });
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn doubled(self) -> Self {
        Precision(self.0.saturating_mul(2))
    }

    pub fn with_guard(self, extra: u32) -> Self {
        Precision(self.0 + extra)
    }

    pub fn max(self, other: Self) -> Self {
        Precision(self.0.max(other.0))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(Self::DEFAULT_BITS)
    }
}

impl TryFrom<u32> for Precision {
    type Error = RigorError;
    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        Precision::new(bits)
    }
}

impl From<Precision> for u32 {
    fn from(p: Precision) -> u32 {
        p.0
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Runs `run` at `start`, doubling the precision while `retry` says the
/// failure is due to insufficient precision, up to `max_bits`.
pub fn escalate<T, E>(
    start: Precision,
    max_bits: u32,
    mut run: impl FnMut(Precision) -> Result<T, E>,
    retry: impl Fn(&E) -> bool,
) -> Result<T, E> {
    let mut prec = start;
    loop {
        match run(prec) {
            Err(e) if retry(&e) && prec.doubled().bits() <= max_bits => prec = prec.doubled(),
            other => return other,
        }
    }
}

// ---------------------------------------------------------------------------
// radius helpers: everything rounded up at RAD_PREC

fn mag_zero() -> Float {
    Float::new(RAD_PREC)
}

fn mag_inf() -> Float {
    Float::with_val(RAD_PREC, rug::float::Special::Infinity)
}

fn mag_up(x: &Float) -> Float {
    Float::with_val_round(RAD_PREC, x.abs_ref(), Round::Up).0
}

fn mag_down(x: &Float) -> Float {
    Float::with_val_round(RAD_PREC, x.abs_ref(), Round::Down).0
}

fn mag_add(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RAD_PREC, a + b, Round::Up).0
}

fn mag_mul(a: &Float, b: &Float) -> Float {
    if a.is_zero() || b.is_zero() {
        return mag_zero();
    }
    Float::with_val_round(RAD_PREC, a * b, Round::Up).0
}

/// Bound on `|y - exact|` when `y` is the round-to-nearest result reported
/// with ordering `ord`.
fn rounding_error(y: &Float, ord: Ordering) -> Float {
    if ord == Ordering::Equal || y.is_zero() {
        return mag_zero();
    }
    let mut e = mag_up(y);
    e >>= y.prec() - 1;
    e
}

fn sanitize(rad: Float) -> Float {
    if rad.is_nan() {
        mag_inf()
    } else {
        rad
    }
}

/// Parses `"36/11"`, `"-4.8"`, `"1e-20"`, `"520"` into an exact rational.
pub fn parse_exact_rational(src: &str) -> Result<Rational, RigorError> {
    let s = src.trim();
    let err = || RigorError::Parse(src.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_exact_rational(n)?;
        let d = parse_exact_rational(d)?;
        if d == 0 {
            return Err(err());
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let mut value = Rational::from(Integer::from_str_radix(&digits, 10).map_err(|_| err())?);
    let shift = exponent - frac_part.len() as i64;
    let ten_pow = Integer::from(Integer::u_pow_u(10, shift.unsigned_abs() as u32));
    if shift >= 0 {
        value *= ten_pow;
    } else {
        value /= ten_pow;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// A rigorous ball `[mid - rad, mid + rad]`.
#[derive(Clone, Debug)]
pub struct Enclosure {
    mid: Float,
    rad: Float,
}

impl Enclosure {
    pub fn zero(prec: Precision) -> Self {
        Enclosure {
            mid: Float::new(prec.bits()),
            rad: mag_zero(),
        }
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_int(1, prec)
    }

    pub fn from_int(v: i64, prec: Precision) -> Self {
        let (mid, ord) = Float::with_val_round(prec.bits(), v, Round::Nearest);
        let rad = rounding_error(&mid, ord);
        Enclosure { mid, rad }
    }

    pub fn from_rational(q: &Rational, prec: Precision) -> Self {
        let (mid, ord) = Float::with_val_round(prec.bits(), q, Round::Nearest);
        let rad = rounding_error(&mid, ord);
        Enclosure { mid, rad }
    }

    /// Exact rational parse of a decimal or `p/q` literal, then rounding.
    pub fn from_decimal(src: &str, prec: Precision) -> Result<Self, RigorError> {
        Ok(Self::from_rational(&parse_exact_rational(src)?, prec))
    }

    pub fn from_float(x: &Float, prec: Precision) -> Self {
        let (mid, ord) = Float::with_val_round(prec.bits(), x, Round::Nearest);
        let rad = rounding_error(&mid, ord);
        Enclosure { mid, rad }
    }

    /// Zero-radius ball around `x`, keeping its precision.
    pub fn exact(x: Float) -> Self {
        Enclosure {
            mid: x,
            rad: mag_zero(),
        }
    }

    pub fn from_mid_rad(mid: Float, rad: &Float) -> Self {
        Enclosure {
            mid,
            rad: sanitize(mag_up(rad)),
        }
    }

    /// Smallest representable ball containing `[lo, hi]`.
    pub fn from_endpoints(lo: &Float, hi: &Float, prec: Precision) -> Self {
        if !lo.is_finite() || !hi.is_finite() {
            return Enclosure {
                mid: Float::new(prec.bits()),
                rad: mag_inf(),
            };
        }
        let mid = Float::with_val(prec.bits(), lo + hi) / 2u32;
        let above = Float::with_val_round(RAD_PREC, hi - &mid, Round::Up).0;
        let below = Float::with_val_round(RAD_PREC, &mid - lo, Round::Up).0;
        let rad = if above > below { above } else { below };
        Enclosure {
            mid,
            rad: mag_up(&rad),
        }
    }

    pub fn indeterminate(prec: Precision) -> Self {
        Enclosure {
            mid: Float::new(prec.bits()),
            rad: mag_inf(),
        }
    }

    pub fn pi(prec: Precision) -> Self {
        let (mid, ord) = Float::with_val_round(prec.bits(), Constant::Pi, Round::Nearest);
        let rad = rounding_error(&mid, ord);
        Enclosure { mid, rad }
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> &Float {
        &self.rad
    }

    pub fn prec(&self) -> Precision {
        Precision(self.mid.prec())
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.mid.is_finite() && self.rad.is_finite()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Lower endpoint, rounded down at the midpoint precision.
    pub fn lower(&self) -> Float {
        Float::with_val_round(self.mid.prec(), &self.mid - &self.rad, Round::Down).0
    }

    /// Upper endpoint, rounded up at the midpoint precision.
    pub fn upper(&self) -> Float {
        Float::with_val_round(self.mid.prec(), &self.mid + &self.rad, Round::Up).0
    }

    /// Upper bound on `|x|` over the ball.
    pub fn abs_upper(&self) -> Float {
        Float::with_val_round(self.mid.prec(), Float::with_val(self.mid.prec(), self.mid.abs_ref()) + &self.rad, Round::Up).0
    }

    fn exact_bounds(&self) -> Option<(Rational, Rational)> {
        let m = self.mid.to_rational()?;
        let r = self.rad.to_rational()?;
        Some((Rational::from(&m - &r), m + r))
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        match self.exact_bounds() {
            Some((lo, hi)) => &lo <= x && x <= &hi,
            None => true,
        }
    }

    pub fn contains_float(&self, x: &Float) -> bool {
        match x.to_rational() {
            Some(q) => self.contains_rational(&q),
            None => !self.is_finite(),
        }
    }

    /// True when `other` lies inside `self`.
    pub fn contains(&self, other: &Enclosure) -> bool {
        match (self.exact_bounds(), other.exact_bounds()) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((a, b)), Some((c, d))) => a <= c && d <= b,
        }
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        match (self.exact_bounds(), other.exact_bounds()) {
            (Some((a, b)), Some((c, d))) => a <= d && c <= b,
            _ => true,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.contains_rational(&Rational::new())
    }

    pub fn is_positive(&self) -> bool {
        self.is_finite() && self.lower() > 0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.is_finite() && self.lower() >= 0
    }

    pub fn is_negative(&self) -> bool {
        self.is_finite() && self.upper() < 0
    }

    /// Rounds the midpoint to `prec`, widening the radius as needed.
    pub fn with_prec(&self, prec: Precision) -> Self {
        let (mid, ord) = Float::with_val_round(prec.bits(), &self.mid, Round::Nearest);
        let rad = mag_add(&self.rad, &rounding_error(&mid, ord));
        Enclosure { mid, rad }
    }

    /// Widens the radius by `err`.
    pub fn add_error(&mut self, err: &Float) {
        self.rad = sanitize(mag_add(&self.rad, &mag_up(err)));
    }

    /// Smallest ball containing both inputs.
    pub fn hull(&self, other: &Enclosure) -> Self {
        let prec = self.prec().max(other.prec());
        let lo = self.lower().min(&other.lower()).clone();
        let hi = self.upper().max(&other.upper()).clone();
        Self::from_endpoints(&lo, &hi, prec)
    }

    pub fn abs(&self) -> Self {
        if self.contains_zero() {
            let zero = Float::new(self.mid.prec());
            Self::from_endpoints(&zero, &self.abs_upper(), self.prec())
        } else if self.mid.is_sign_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn sqr(&self) -> Self {
        if self.contains_zero() {
            let prec = self.mid.prec();
            let u = self.abs_upper();
            let hi = Float::with_val_round(prec, &u * &u, Round::Up).0;
            return Self::from_endpoints(&Float::new(prec), &hi, self.prec());
        }
        let a = self.abs();
        &a * &a
    }

    pub fn recip(&self) -> Self {
        &Enclosure::one(self.prec()) / self
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self * &Enclosure::from_int(k, self.prec())
    }

    pub fn div_int(&self, k: i64) -> Self {
        self / &Enclosure::from_int(k, self.prec())
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        self * &Enclosure::from_rational(q, self.prec())
    }

    /// Multiplication by `2^k`, exact.
    pub fn mul_pow2(&self, k: i32) -> Self {
        let mut out = self.clone();
        if k >= 0 {
            out.mid <<= k as u32;
            out.rad <<= k as u32;
        } else {
            out.mid >>= (-k) as u32;
            out.rad >>= (-k) as u32;
        }
        out
    }

    pub fn pow_int(&self, n: u32) -> Self {
        let base = if n % 2 == 0 { self.abs() } else { self.clone() };
        let mut result = Enclosure::one(self.prec());
        let mut b = base;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        result
    }

    fn monotone(
        &self,
        increasing: bool,
        f: impl Fn(&mut Float, Round) -> Ordering,
    ) -> Enclosure {
        if !self.is_finite() {
            return Enclosure::indeterminate(self.prec());
        }
        let prec = self.prec();
        let (mut a, mut b) = (self.lower(), self.upper());
        if increasing {
            f(&mut a, Round::Down);
            f(&mut b, Round::Up);
            Self::from_endpoints(&a, &b, prec)
        } else {
            f(&mut a, Round::Up);
            f(&mut b, Round::Down);
            Self::from_endpoints(&b, &a, prec)
        }
    }

    pub fn exp(&self) -> Self {
        self.monotone(true, |x, r| x.exp_round(r))
    }

    pub fn ln(&self) -> Result<Self, RigorError> {
        if !self.is_positive() {
            return Err(RigorError::Domain {
                function: "ln",
                detail: format!("argument {self} is not certainly positive"),
            });
        }
        Ok(self.monotone(true, |x, r| x.ln_round(r)))
    }

    pub fn sqrt(&self) -> Result<Self, RigorError> {
        if !self.is_nonnegative() {
            return Err(RigorError::Domain {
                function: "sqrt",
                detail: format!("argument {self} is not certainly nonnegative"),
            });
        }
        Ok(self.monotone(true, |x, r| x.sqrt_round(r)))
    }

    /// `self^exponent` for a positive base.
    pub fn pow(&self, exponent: &Enclosure) -> Result<Self, RigorError> {
        Ok((&self.ln()? * exponent).exp())
    }

    /// Sum in iteration order.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Enclosure>, prec: Precision) -> Self {
        let mut acc = Enclosure::zero(prec);
        for x in items {
            acc += x;
        }
        acc
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn mid_string(&self, digits: usize) -> String {
        format_float(&self.mid, digits)
    }
}

/// Scientific-notation rendering with `digits` significant digits, nearest.
pub fn format_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

/// Decimal rendering rounded in the given direction, so the printed value
/// is itself a valid one-sided bound.
pub fn format_float_directed(x: &Float, digits: usize, round: Round) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix_round(10, Some(digits), round)
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} +/- {}]",
            format_float(&self.mid, 20),
            format_float(&self.rad, 3)
        )
    }
}

// ---------------------------------------------------------------------------
// arithmetic

fn add_impl(a: &Enclosure, b: &Enclosure, negate_b: bool) -> Enclosure {
    let prec = a.mid.prec().max(b.mid.prec());
    let (mid, ord) = if negate_b {
        Float::with_val_round(prec, &a.mid - &b.mid, Round::Nearest)
    } else {
        Float::with_val_round(prec, &a.mid + &b.mid, Round::Nearest)
    };
    let rad = mag_add(&mag_add(&a.rad, &b.rad), &rounding_error(&mid, ord));
    Enclosure {
        mid,
        rad: sanitize(rad),
    }
}

fn mul_impl(a: &Enclosure, b: &Enclosure) -> Enclosure {
    let prec = a.mid.prec().max(b.mid.prec());
    if !a.rad.is_finite() || !b.rad.is_finite() {
        return Enclosure::indeterminate(Precision(prec));
    }
    let (mid, ord) = Float::with_val_round(prec, &a.mid * &b.mid, Round::Nearest);
    let mut rad = mag_mul(&mag_up(&a.mid), &b.rad);
    rad = mag_add(&rad, &mag_mul(&mag_up(&b.mid), &a.rad));
    rad = mag_add(&rad, &mag_mul(&a.rad, &b.rad));
    rad = mag_add(&rad, &rounding_error(&mid, ord));
    Enclosure {
        mid,
        rad: sanitize(rad),
    }
}

fn div_impl(a: &Enclosure, b: &Enclosure) -> Enclosure {
    let prec = a.mid.prec().max(b.mid.prec());
    if !a.is_finite() || !b.is_finite() || b.contains_zero() {
        return Enclosure::indeterminate(Precision(prec));
    }
    let (mid, ord) = Float::with_val_round(prec, &a.mid / &b.mid, Round::Nearest);
    // |x/y - a/b| <= (|b| ra + |a| rb) / (|b| (|b| - rb))
    let bm_down = mag_down(&b.mid);
    let gap = Float::with_val_round(RAD_PREC, &bm_down - &b.rad, Round::Down).0;
    let denom = Float::with_val_round(RAD_PREC, &bm_down * &gap, Round::Down).0;
    let num = mag_add(
        &mag_mul(&mag_up(&b.mid), &a.rad),
        &mag_mul(&mag_up(&a.mid), &b.rad),
    );
    let mut rad = if num.is_zero() {
        mag_zero()
    } else if denom <= 0 {
        mag_inf()
    } else {
        Float::with_val_round(RAD_PREC, &num / &denom, Round::Up).0
    };
    rad = mag_add(&rad, &rounding_error(&mid, ord));
    Enclosure {
        mid,
        rad: sanitize(rad),
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Enclosure> for &Enclosure {
            type Output = Enclosure;
            fn $method(self, rhs: &Enclosure) -> Enclosure {
                $body(self, rhs)
            }
        }
        impl $trait<Enclosure> for Enclosure {
            type Output = Enclosure;
            fn $method(self, rhs: Enclosure) -> Enclosure {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Enclosure> for Enclosure {
            type Output = Enclosure;
            fn $method(self, rhs: &Enclosure) -> Enclosure {
                $body(&self, rhs)
            }
        }
        impl $trait<Enclosure> for &Enclosure {
            type Output = Enclosure;
            fn $method(self, rhs: Enclosure) -> Enclosure {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| add_impl(a, b, false));
binop!(Sub, sub, |a, b| add_impl(a, b, true));
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl AddAssign<&Enclosure> for Enclosure {
    fn add_assign(&mut self, rhs: &Enclosure) {
        *self = add_impl(self, rhs, false);
    }
}

impl SubAssign<&Enclosure> for Enclosure {
    fn sub_assign(&mut self, rhs: &Enclosure) {
        *self = add_impl(self, rhs, true);
    }
}

impl MulAssign<&Enclosure> for Enclosure {
    fn mul_assign(&mut self, rhs: &Enclosure) {
        *self = mul_impl(self, rhs);
    }
}

impl Neg for &Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure {
            mid: Float::with_val(self.mid.prec(), -&self.mid),
            rad: self.rad.clone(),
        }
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        -&self
    }
}
