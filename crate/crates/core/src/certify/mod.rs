//! Rigorous verification of an SOS tuple.
//!
//! Every block must be PSD; the residual of the Fourier constraint is
//! absorbed into `Q₄` through a tridiagonal correction, and the quotient
//! `(f₁(0) − f₂(0) − A ∫_{|x|>1} f₃) / (∫f₁ + ∫f₂)` is enclosed. Its lower
//! endpoint bounds C⁺(A) from below: `F = f₁ − f₂` has `‖F‖₁ ≤ ∫f₁ + ∫f₂`
//! and `(F̂)⁺ ≤ f₃` once the constraint holds with `f₄ ⪰ 0`.

mod psd;

use std::fmt;

use rug::float::Round;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laguerre::{Basis, EvenGaussianPoly, LaguerreError, ProductBasis};
use crate::rigor::{self, format_float, format_float_directed, Enclosure, Precision};
use crate::sdp::{Block, SosTuple};
use crate::sym::SymMatrix;

pub use psd::{psd_lower_bound, PsdBound, Verdict};

pub const CERTIFICATE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("block {block} is not certified PSD: lambda_min in [{lower}, {upper}]")]
    PsdFailure {
        block: String,
        lower: String,
        upper: String,
    },
    #[error("residual absorption failed: b = {b} < 2B = {two_b}")]
    Gershgorin { b: String, two_b: String },
    #[error("indeterminate at {bits} bits: {detail}")]
    Indeterminate { bits: u32, detail: String },
    #[error("denominator {0} is not certified positive")]
    Denominator(String),
    #[error(transparent)]
    Laguerre(#[from] LaguerreError),
    #[error(transparent)]
    Rigor(#[from] rigor::RigorError),
}

impl CertifyError {
    fn is_indeterminate(&self) -> bool {
        matches!(self, CertifyError::Indeterminate { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SdpSolution,
    ExplicitCandidate,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::SdpSolution => "sdp-solution",
            Provenance::ExplicitCandidate => "explicit-candidate",
        })
    }
}

/// Margins recorded while certifying an SOS tuple.
#[derive(Debug, Clone)]
pub struct Checks {
    /// Lower bound on `λ_min(Q₄)`.
    pub b: Float,
    /// Upper bound on the largest tridiagonal residual coefficient.
    pub big_b: Float,
    pub per_block: Vec<(String, Float)>,
}

/// A lower bound on C⁺(A) whose verification passed. Only this crate can
/// construct one.
#[derive(Debug, Clone)]
pub struct CertifiedBound {
    a: Rational,
    degree: usize,
    bound: Enclosure,
    provenance: Provenance,
    checks: Option<Checks>,
    precision_bits: u32,
}

impl CertifiedBound {
    pub(crate) fn new(
        a: Rational,
        degree: usize,
        bound: Enclosure,
        provenance: Provenance,
        checks: Option<Checks>,
        precision_bits: u32,
    ) -> Self {
        CertifiedBound {
            a,
            degree,
            bound,
            provenance,
            checks,
            precision_bits,
        }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bound(&self) -> &Enclosure {
        &self.bound
    }

    /// `midpoint − radius`, rounded down.
    pub fn certified_lower(&self) -> Float {
        self.bound.lower()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn checks(&self) -> Option<&Checks> {
        self.checks.as_ref()
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn certificate(&self, config_hash: Option<&str>) -> Certificate {
        let digits = 40;
        let down = |x: &Float| format_float_directed(x, digits, Round::Down);
        let up = |x: &Float| format_float_directed(x, digits, Round::Up);
        Certificate {
            schema_version: CERTIFICATE_SCHEMA_VERSION,
            a: self.a.to_string(),
            degree: self.degree,
            certified_lower: down(&self.certified_lower()),
            bound_midpoint: format_float(self.bound.mid(), digits),
            bound_radius: up(self.bound.rad()),
            b: self.checks.as_ref().map(|c| down(&c.b)),
            big_b: self.checks.as_ref().map(|c| up(&c.big_b)),
            precision_bits: self.precision_bits,
            provenance: self.provenance,
            per_block_eigen_lower: self
                .checks
                .as_ref()
                .map(|c| c.per_block.iter().map(|(k, v)| (k.clone(), down(v))).collect())
                .unwrap_or_default(),
            config_hash: config_hash.map(str::to_string),
        }
    }
}

/// Versioned JSON certificate. Lower bounds are printed rounded down and
/// radii rounded up, so the decimal strings remain valid bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    #[serde(rename = "A")]
    pub a: String,
    pub degree: usize,
    pub certified_lower: String,
    pub bound_midpoint: String,
    pub bound_radius: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub big_b: Option<String>,
    pub precision_bits: u32,
    pub provenance: Provenance,
    #[serde(default)]
    pub per_block_eigen_lower: std::collections::BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

/// `Q′` with `v_dᵀ Q′ v_d = Σ diag_i L_i² + Σ offdiag_i · 2 L_i L_{i+1}`.
#[derive(Debug, Clone)]
pub struct TridiagonalRep {
    pub diag: Vec<Enclosure>,
    pub offdiag: Vec<Enclosure>,
}

impl TridiagonalRep {
    /// `max(|diag_i|, |2 offdiag_i|)`, rounded up. Each Gershgorin disc of
    /// `Q′` then has radius plus center at most `2B`.
    pub fn big_b(&self) -> Float {
        let mut m = Float::new(rigor::RAD_PREC);
        for d in &self.diag {
            m.max_mut(&d.abs_upper());
        }
        for o in &self.offdiag {
            m.max_mut(&o.mul_int(2).abs_upper());
        }
        m
    }

    pub fn to_matrix(&self) -> SymMatrix {
        let n = self.diag.len();
        let prec = self.diag[0].prec();
        SymMatrix::from_fn(n, |i, j| {
            if i == j {
                self.diag[i].clone()
            } else if j == i + 1 {
                self.offdiag[i].clone()
            } else {
                Enclosure::zero(prec)
            }
        })
    }
}

/// `p₁..p₄` of a tuple, in the Laguerre basis.
pub fn tuple_polynomials(t: &SosTuple) -> Result<[EvenGaussianPoly; 4], LaguerreError> {
    Ok([t.polynomial(1)?, t.polynomial(2)?, t.polynomial(3)?, t.polynomial(4)?])
}

/// Laguerre coefficients of `(f̂₁ − f̂₂) − (f₃ − f₄)`.
pub fn residual_polynomial(t: &SosTuple) -> Result<EvenGaussianPoly, LaguerreError> {
    Ok(residual_of(&tuple_polynomials(t)?))
}

fn residual_of(p: &[EvenGaussianPoly; 4]) -> EvenGaussianPoly {
    p[0].fourier_transform()
        .sub(&p[1].fourier_transform())
        .sub(&p[2])
        .add(&p[3])
}

pub fn to_tridiagonal(r: &EvenGaussianPoly, d: usize) -> Result<TridiagonalRep, LaguerreError> {
    let basis = ProductBasis::new(d, r.prec());
    to_tridiagonal_with(&basis, r)
}

fn to_tridiagonal_with(basis: &ProductBasis, r: &EvenGaussianPoly) -> Result<TridiagonalRep, LaguerreError> {
    let y = basis.coordinates(r.to_laguerre().coeffs())?;
    let d = basis.d;
    Ok(TridiagonalRep {
        diag: (0..=d).map(|i| y[2 * i].clone()).collect(),
        offdiag: (0..d).map(|i| y[2 * i + 1].clone()).collect(),
    })
}

/// Replaces `Q₄` by `Q₄ − Q′`, which zeroes the residual exactly.
pub fn absorb(t: &SosTuple, tri: &TridiagonalRep) -> SosTuple {
    let mut out = t.clone();
    out.q[3] = t.q[3].sub(&tri.to_matrix());
    out
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub prec: Precision,
    pub max_bits: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            prec: Precision::default(),
            max_bits: Precision::MAX_ESCALATION_BITS,
        }
    }
}

/// Guard bits for degree `d`: Laguerre coordinates of products reach
/// `binom(2d, d)` and the monomial detour inside the quadratic-form
/// expansion cancels about `4^d` more.
pub fn guard_bits(d: usize) -> u32 {
    6 * d as u32 + 64
}

fn fmt_f(x: &Float) -> String {
    format_float(x, 12)
}

fn verdict_ge(lower: &Float, upper: &Float, threshold_lo: &Float, threshold_hi: &Float) -> Verdict {
    if lower >= threshold_hi {
        Verdict::Pass
    } else if upper < threshold_lo {
        Verdict::Fail
    } else {
        Verdict::Indeterminate
    }
}

pub fn absorb_and_certify(t: &SosTuple, a: &Rational, opts: &CertifyOptions) -> Result<CertifiedBound, CertifyError> {
    rigor::escalate(
        opts.prec,
        opts.max_bits,
        |prec| certify_at(t, a, prec),
        CertifyError::is_indeterminate,
    )
}

fn certify_at(t: &SosTuple, a: &Rational, prec: Precision) -> Result<CertifiedBound, CertifyError> {
    let d = t.d;
    let wp = prec.with_guard(guard_bits(d));
    let tw = t.with_prec(wp);
    let zero = Float::new(rigor::RAD_PREC);
    let indeterminate = |detail: String| CertifyError::Indeterminate {
        bits: prec.bits(),
        detail,
    };

    let mut per_block = Vec::with_capacity(8);
    for block in [
        Block::Q(1),
        Block::Q(2),
        Block::Q(3),
        Block::R(1),
        Block::R(2),
        Block::R(3),
        Block::R(4),
    ] {
        let name = block_name(block);
        let bound = psd_lower_bound(tw.block(block));
        match verdict_ge(&bound.lower, &bound.upper, &zero, &zero) {
            Verdict::Pass => per_block.push((name, bound.lower)),
            Verdict::Fail => {
                return Err(CertifyError::PsdFailure {
                    block: name,
                    lower: fmt_f(&bound.lower),
                    upper: fmt_f(&bound.upper),
                })
            }
            Verdict::Indeterminate => {
                return Err(indeterminate(format!(
                    "lambda_min({name}) in [{}, {}]",
                    fmt_f(&bound.lower),
                    fmt_f(&bound.upper)
                )))
            }
        }
    }

    let q4 = psd_lower_bound(&tw.q[3]);
    let polys = tuple_polynomials(&tw)?;
    let r = residual_of(&polys);
    let basis = ProductBasis::new(d, wp);
    let tri = to_tridiagonal_with(&basis, &r)?;
    let big_b = tri.big_b();
    let two_b_hi = Float::with_val_round(rigor::RAD_PREC, &big_b * 2u32, Round::Up).0;
    // 2B is at least the smallest possible magnitude of every coefficient
    let mut two_b_lo = Float::new(rigor::RAD_PREC);
    let doubled: Vec<Enclosure> = tri.offdiag.iter().map(|x| x.mul_int(2)).collect();
    for x in tri.diag.iter().chain(&doubled) {
        if !x.contains_zero() {
            let m = Float::with_val(rigor::RAD_PREC, x.lower().abs()).min(&x.upper().abs());
            two_b_lo.max_mut(&m);
        }
    }
    two_b_lo *= 2u32;
    match verdict_ge(&q4.lower, &q4.upper, &two_b_lo, &two_b_hi) {
        Verdict::Pass => per_block.push((block_name(Block::Q(4)), q4.lower.clone())),
        Verdict::Fail => {
            return Err(CertifyError::Gershgorin {
                b: fmt_f(&q4.upper),
                two_b: fmt_f(&two_b_lo),
            })
        }
        Verdict::Indeterminate => {
            return Err(indeterminate(format!(
                "b in [{}, {}] against 2B <= {}",
                fmt_f(&q4.lower),
                fmt_f(&q4.upper),
                fmt_f(&two_b_hi)
            )))
        }
    }

    let bound = quotient(&polys[0], &polys[1], &polys[2], a, wp)?;
    if !bound.is_finite() || bound.rad().is_infinite() {
        return Err(indeterminate("bound enclosure is unbounded".into()));
    }
    Ok(CertifiedBound::new(
        a.clone(),
        d,
        bound.with_prec(prec),
        Provenance::SdpSolution,
        Some(Checks {
            b: q4.lower,
            big_b,
            per_block,
        }),
        prec.bits(),
    ))
}

/// `(p₁(0) − p₂(0) − A ∫_{|x|>1} f₃) / (∫f₁ + ∫f₂)`.
fn quotient(
    p1: &EvenGaussianPoly,
    p2: &EvenGaussianPoly,
    p3: &EvenGaussianPoly,
    a: &Rational,
    prec: Precision,
) -> Result<Enclosure, CertifyError> {
    let one = Enclosure::one(prec);
    let num = &(&p1.eval_at_zero() - &p2.eval_at_zero())
        - &(&Enclosure::from_rational(a, prec) * &p3.tail_integral(&one)?);
    let den = &p1.integral_over_line()? + &p2.integral_over_line()?;
    if !den.is_positive() {
        return Err(CertifyError::Denominator(den.to_string()));
    }
    Ok(&num / &den)
}

/// The objective of a tuple without any verification; used to compare
/// against certified values.
pub fn objective_value(t: &SosTuple, a: &Rational) -> Result<Enclosure, CertifyError> {
    let p = tuple_polynomials(t)?;
    quotient(&p[0], &p[1], &p[2], a, t.prec())
}

/// `F = f₁ − f₂` in the monomial basis.
pub fn difference_function(t: &SosTuple) -> Result<EvenGaussianPoly, LaguerreError> {
    Ok(t.polynomial(1)?.sub(&t.polynomial(2)?).to_basis(Basis::Monomial))
}

fn block_name(b: Block) -> String {
    match b {
        Block::Q(i) => format!("Q{i}"),
        Block::R(i) => format!("R{i}"),
    }
}
