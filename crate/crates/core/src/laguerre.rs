//! Even Gaussian-polynomial functions `p(x²) e^{-πx²}`.
//!
//! Polynomials are stored either in powers of `u = x²` ([`Basis::Monomial`])
//! or in the Laguerre basis `L_k^{-1/2}(πu)` ([`Basis::Laguerre`]). Internally
//! everything passes through powers of the scaled variable `w = πu`, where
//! the Laguerre polynomials, the basis changes and the Fourier transform all
//! have rational coefficients; π only enters through `x^{2k} = w^k / π^k`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rigor::{self, Enclosure, Precision, RigorError};
use crate::sym::SymMatrix;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LaguerreError {
    #[error("degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("moment order {0} must be even")]
    OddMoment(u32),
    #[error(transparent)]
    Rigor(#[from] RigorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// `f(x) = Σ a_k x^{2k} e^{-πx²}`
    Monomial,
    /// `f(x) = Σ b_k L_k^{-1/2}(πx²) e^{-πx²}`
    Laguerre,
}

/// `binom(k - 1/2, m)`
fn binom_shifted_half(k: usize, m: usize) -> Rational {
    let mut r = Rational::from(1);
    let top = Rational::from((2 * k as i64 - 1, 2));
    for i in 0..m {
        r *= Rational::from(&top - Rational::from(i as i64));
        r /= (i + 1) as u64;
    }
    r
}

fn factorial(k: usize) -> Integer {
    Integer::from(Integer::factorial(k as u32))
}

/// Monomial coefficients (in `w`) of `L_0^{-1/2}, …, L_n^{-1/2}`, from the
/// three-term recurrence `(k+1) L_{k+1} = (2k + 1/2 - w) L_k - (k - 1/2) L_{k-1}`.
pub fn laguerre_table(n: usize) -> Vec<Vec<Rational>> {
    let mut table: Vec<Vec<Rational>> = vec![vec![Rational::from(1)]];
    if n == 0 {
        return table;
    }
    table.push(vec![Rational::from((1, 2)), Rational::from(-1)]);
    for k in 1..n {
        let a = Rational::from((4 * k as i64 + 1, 2));
        let b = Rational::from((2 * k as i64 - 1, 2));
        let mut next = vec![Rational::new(); k + 2];
        for (i, c) in table[k].iter().enumerate() {
            next[i] += Rational::from(&a * c);
            next[i + 1] -= c;
        }
        for (i, c) in table[k - 1].iter().enumerate() {
            next[i] -= Rational::from(&b * c);
        }
        for c in next.iter_mut() {
            *c /= (k + 1) as u64;
        }
        table.push(next);
    }
    table
}

/// `L_k^{-1/2}(w)` as monomial coefficients in `w`.
pub fn laguerre_coeffs(k: usize) -> Vec<Rational> {
    laguerre_table(k).pop().unwrap()
}

/// Laguerre coefficients of `w^k`: `w^k = k! Σ_j (-1)^j binom(k-1/2, k-j) L_j`.
pub fn monomial_in_laguerre(k: usize) -> Vec<Rational> {
    let kf = factorial(k);
    (0..=k)
        .map(|j| {
            let mut c = binom_shifted_half(k, k - j) * &kf;
            if j % 2 == 1 {
                c = -c;
            }
            c
        })
        .collect()
}

/// Laguerre coefficients of the transform of `L_k^{-1/2}(πx²) e^{-πx²}`,
/// which is `(πt²)^k / k! · e^{-πt²}`.
pub fn fourier_of_laguerre(k: usize) -> Vec<Rational> {
    let kf = factorial(k);
    monomial_in_laguerre(k)
        .into_iter()
        .map(|c| c / &kf)
        .collect()
}

/// `L_k^{-1/2}(0) = binom(k - 1/2, k)`.
pub fn laguerre_at_zero(k: usize) -> Rational {
    binom_shifted_half(k, k)
}

/// `∫_ℝ (πx²)^k e^{-πx²} dx = Γ(k + 1/2)/√π = (2k)! / (4^k k!)`.
pub fn w_moment(k: usize) -> Rational {
    Rational::from((factorial(2 * k), factorial(k) << (2 * k as u32)))
}

/// Enclosure versions of the rational tables, cached per (degree, precision).
pub struct Tables {
    pub prec: Precision,
    pub n: usize,
    /// `lag_to_w[k][j]`: coefficient of `w^j` in `L_k`.
    pub lag_to_w: Vec<Vec<Enclosure>>,
    /// `w_to_lag[k][j]`: coefficient of `L_j` in `w^k`.
    pub w_to_lag: Vec<Vec<Enclosure>>,
    /// `fourier[k][j]`: coefficient of `L_j` in the transform of `L_k`.
    pub fourier: Vec<Vec<Enclosure>>,
    pub at_zero: Vec<Enclosure>,
    /// `pi_pow[k] = π^k`
    pub pi_pow: Vec<Enclosure>,
    pub pi: Enclosure,
}

type TableCache = Mutex<HashMap<(usize, u32), Arc<Tables>>>;

pub fn tables(n: usize, prec: Precision) -> Arc<Tables> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(n, prec.bits())) {
        return t.clone();
    }
    let t = Arc::new(build_tables(n, prec));
    cache.lock().unwrap().insert((n, prec.bits()), t.clone());
    t
}

fn build_tables(n: usize, prec: Precision) -> Tables {
    let conv = |rows: Vec<Vec<Rational>>| -> Vec<Vec<Enclosure>> {
        rows.iter()
            .map(|r| r.iter().map(|q| Enclosure::from_rational(q, prec)).collect())
            .collect()
    };
    let lag_to_w = conv(laguerre_table(n));
    let w_to_lag = conv((0..=n).map(monomial_in_laguerre).collect());
    let fourier = conv((0..=n).map(fourier_of_laguerre).collect());
    let at_zero = (0..=n)
        .map(|k| Enclosure::from_rational(&laguerre_at_zero(k), prec))
        .collect();
    let pi = Enclosure::pi(prec);
    let mut pi_pow = vec![Enclosure::one(prec)];
    for k in 1..=n {
        let next = &pi_pow[k - 1] * &pi;
        pi_pow.push(next);
    }
    Tables {
        prec,
        n,
        lag_to_w,
        w_to_lag,
        fourier,
        at_zero,
        pi_pow,
        pi,
    }
}

/// `Σ_k c_k · rows[k]`, with `rows[k]` of length `k + 1`.
fn triangular_combine(coeffs: &[Enclosure], rows: &[Vec<Enclosure>], prec: Precision) -> Vec<Enclosure> {
    let mut out = vec![Enclosure::zero(prec); coeffs.len()];
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_exact() && c.mid().is_zero() {
            continue;
        }
        for (j, r) in rows[k].iter().enumerate() {
            out[j] += &(c * r);
        }
    }
    out
}

fn convolve(a: &[Enclosure], b: &[Enclosure], prec: Precision) -> Vec<Enclosure> {
    let mut out = vec![Enclosure::zero(prec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct EvenGaussianPoly {
    basis: Basis,
    coeffs: Vec<Enclosure>,
    prec: Precision,
}

impl EvenGaussianPoly {
    pub fn new(basis: Basis, coeffs: Vec<Enclosure>, prec: Precision) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![Enclosure::zero(prec)]
        } else {
            coeffs
        };
        EvenGaussianPoly {
            basis,
            coeffs,
            prec,
        }
    }

    pub fn from_rationals(basis: Basis, coeffs: &[Rational], prec: Precision) -> Self {
        Self::new(
            basis,
            coeffs
                .iter()
                .map(|q| Enclosure::from_rational(q, prec))
                .collect(),
            prec,
        )
    }

    pub fn zero(basis: Basis, prec: Precision) -> Self {
        Self::new(basis, vec![], prec)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coeffs(&self) -> &[Enclosure] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Enclosure> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    fn tables(&self) -> Arc<Tables> {
        tables(self.degree(), self.prec)
    }

    /// Coefficients in powers of `w = πx²`.
    pub fn w_coeffs(&self) -> Vec<Enclosure> {
        let t = self.tables();
        match self.basis {
            Basis::Monomial => self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a / &t.pi_pow[k])
                .collect(),
            Basis::Laguerre => triangular_combine(&self.coeffs, &t.lag_to_w, self.prec),
        }
    }

    pub fn from_w_coeffs(basis: Basis, w: Vec<Enclosure>, prec: Precision) -> Self {
        let t = tables(w.len().saturating_sub(1), prec);
        let coeffs = match basis {
            Basis::Monomial => w
                .iter()
                .enumerate()
                .map(|(k, c)| c * &t.pi_pow[k])
                .collect(),
            Basis::Laguerre => triangular_combine(&w, &t.w_to_lag, prec),
        };
        Self::new(basis, coeffs, prec)
    }

    pub fn to_basis(&self, basis: Basis) -> Self {
        if basis == self.basis {
            return self.clone();
        }
        Self::from_w_coeffs(basis, self.w_coeffs(), self.prec)
    }

    pub fn to_laguerre(&self) -> Self {
        self.to_basis(Basis::Laguerre)
    }

    pub fn to_monomial(&self) -> Self {
        self.to_basis(Basis::Monomial)
    }

    /// Fourier transform `∫ f(x) e^{-2πixt} dx`; the result is in the
    /// Laguerre basis. On monomials it is diagonal: `a_k ↦ a_k k!/π^k`.
    pub fn fourier_transform(&self) -> Self {
        let t = self.tables();
        let coeffs = match self.basis {
            Basis::Monomial => self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let kf = Rational::from(factorial(k));
                    &a.mul_rational(&kf) / &t.pi_pow[k]
                })
                .collect(),
            Basis::Laguerre => triangular_combine(&self.coeffs, &t.fourier, self.prec),
        };
        Self::new(Basis::Laguerre, coeffs, self.prec)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Enclosure, &Enclosure) -> Enclosure) -> Self {
        let other = other.to_basis(self.basis);
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Enclosure::zero(self.prec);
        let coeffs = (0..n)
            .map(|k| {
                f(
                    self.coeffs.get(k).unwrap_or(&zero),
                    other.coeffs.get(k).unwrap_or(&zero),
                )
            })
            .collect();
        Self::new(self.basis, coeffs, self.prec.max(other.prec))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Enclosure) -> Self {
        Self::new(
            self.basis,
            self.coeffs.iter().map(|a| a * c).collect(),
            self.prec,
        )
    }

    /// Product of the polynomial parts (the Gaussian factor is left to the
    /// caller), in the basis of `self`.
    pub fn multiply(&self, other: &Self, max_degree: usize) -> Result<Self, LaguerreError> {
        let degree = self.degree() + other.degree();
        if degree > max_degree {
            return Err(LaguerreError::DegreeOverflow {
                degree,
                cap: max_degree,
            });
        }
        let prec = self.prec.max(other.prec);
        match self.basis {
            Basis::Monomial => {
                let other = other.to_monomial();
                Ok(Self::new(
                    Basis::Monomial,
                    convolve(&self.coeffs, &other.coeffs, prec),
                    prec,
                ))
            }
            Basis::Laguerre => {
                let w = convolve(&self.w_coeffs(), &other.w_coeffs(), prec);
                Ok(Self::from_w_coeffs(Basis::Laguerre, w, prec))
            }
        }
    }

    /// `f(x) = p(x²) e^{-πx²}`.
    pub fn eval(&self, x: &Enclosure) -> Enclosure {
        let prec = self.prec.max(x.prec());
        let w = &Enclosure::pi(prec) * &x.sqr();
        let poly = match self.basis {
            Basis::Monomial => {
                let u = x.sqr();
                let mut acc = Enclosure::zero(prec);
                for a in self.coeffs.iter().rev() {
                    acc = &(&acc * &u) + a;
                }
                acc
            }
            Basis::Laguerre => {
                let values = laguerre_values(self.degree(), &w);
                let mut acc = Enclosure::zero(prec);
                for (b, l) in self.coeffs.iter().zip(&values) {
                    acc += &(b * l);
                }
                acc
            }
        };
        &poly * &(-&w).exp()
    }

    /// `f(0) = p(0)`.
    pub fn eval_at_zero(&self) -> Enclosure {
        match self.basis {
            Basis::Monomial => self.coeffs[0].clone(),
            Basis::Laguerre => {
                let t = self.tables();
                let mut acc = Enclosure::zero(self.prec);
                for (b, l) in self.coeffs.iter().zip(&t.at_zero) {
                    acc += &(b * l);
                }
                acc
            }
        }
    }

    /// `∫_ℝ f(x) dx`. In the Laguerre basis only `L_0` integrates to a
    /// nonzero value (`1`); monomials use the closed-form moments.
    pub fn integral_over_line(&self) -> Result<Enclosure, LaguerreError> {
        match self.basis {
            Basis::Laguerre => Ok(self.coeffs[0].clone()),
            Basis::Monomial => {
                let mut acc = Enclosure::zero(self.prec);
                for (k, a) in self.coeffs.iter().enumerate() {
                    acc += &(a * &full_moment(2 * k as u32, self.prec)?);
                }
                Ok(acc)
            }
        }
    }

    /// `∫_{|x| > T} f(x) dx`.
    pub fn tail_integral(&self, t: &Enclosure) -> Result<Enclosure, LaguerreError> {
        let n = self.degree();
        let w_tails = w_tail_moments(n, &t.with_prec(self.prec))?;
        let tab = self.tables();
        let mut acc = Enclosure::zero(self.prec);
        match self.basis {
            Basis::Monomial => {
                for (k, a) in self.coeffs.iter().enumerate() {
                    acc += &(&(a * &w_tails[k]) / &tab.pi_pow[k]);
                }
            }
            Basis::Laguerre => {
                for (b, row) in self.coeffs.iter().zip(&tab.lag_to_w) {
                    if b.is_exact() && b.mid().is_zero() {
                        continue;
                    }
                    let mut lk = Enclosure::zero(self.prec);
                    for (c, w) in row.iter().zip(&w_tails) {
                        lk += &(c * w);
                    }
                    acc += &(b * &lk);
                }
            }
        }
        Ok(acc)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(Enclosure::is_finite)
    }
}

/// `L_0^{-1/2}(w), …, L_n^{-1/2}(w)` by the recurrence.
pub fn laguerre_values(n: usize, w: &Enclosure) -> Vec<Enclosure> {
    let prec = w.prec();
    let mut out = vec![Enclosure::one(prec)];
    if n == 0 {
        return out;
    }
    let half = Enclosure::from_rational(&Rational::from((1, 2)), prec);
    out.push(&half - w);
    for k in 1..n {
        let a = &Enclosure::from_rational(&Rational::from((4 * k as i64 + 1, 2)), prec) - w;
        let b = Enclosure::from_rational(&Rational::from((2 * k as i64 - 1, 2)), prec);
        let next = (&(&a * &out[k]) - &(&b * &out[k - 1])).div_int(k as i64 + 1);
        out.push(next);
    }
    out
}

/// `∫_ℝ x^m e^{-πx²} dx = Γ((m+1)/2) / π^{(m+1)/2}` for even `m`.
pub fn full_moment(m: u32, prec: Precision) -> Result<Enclosure, LaguerreError> {
    if m % 2 == 1 {
        return Err(LaguerreError::OddMoment(m));
    }
    let k = (m / 2) as usize;
    // Γ(k + 1/2)/π^{k + 1/2} = (2k)!/(4^k k!) / π^k
    let t = tables(k, prec);
    Ok(&Enclosure::from_rational(&w_moment(k), prec) / &t.pi_pow[k])
}

/// `∫_T^∞ x^m e^{-πx²} dx = Γ((m+1)/2, πT²) / (2 π^{(m+1)/2})` for even `m`.
pub fn tail_moment(m: u32, t: &Enclosure) -> Result<Enclosure, LaguerreError> {
    if m % 2 == 1 {
        return Err(LaguerreError::OddMoment(m));
    }
    let prec = t.prec();
    let pi = Enclosure::pi(prec);
    let s = Enclosure::from_rational(&Rational::from((m as i64 + 1, 2)), prec);
    let g = rigor::upper_incomplete_gamma(&s, &(&pi * &t.sqr()))?;
    let denom = pi.pow(&s)?.mul_int(2);
    Ok(&g / &denom)
}

/// `∫_{|x| > T} (πx²)^k e^{-πx²} dx = Γ(k + 1/2, πT²)/√π` for `k = 0..=n`,
/// by upward recurrence from `Γ(1/2, y) = √π erfc(√y)`.
pub fn w_tail_moments(n: usize, t: &Enclosure) -> Result<Vec<Enclosure>, LaguerreError> {
    let prec = t.prec();
    let pi = Enclosure::pi(prec);
    let y = &pi * &t.sqr();
    let sqrt_pi = pi.sqrt()?;
    let mut g = &rigor::erfc_enclosure(&y.sqrt()?)? * &sqrt_pi; // Γ(1/2, y)
    let e = (-&y).exp();
    let mut y_pow = y.sqrt()?; // y^{1/2}
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        out.push(&g / &sqrt_pi);
        // Γ(s+1, y) = s Γ(s, y) + y^s e^{-y}, s = k + 1/2
        let s = Enclosure::from_rational(&Rational::from((2 * k as i64 + 1, 2)), prec);
        g = &(&s * &g) + &(&y_pow * &e);
        y_pow = &y_pow * &y;
    }
    Ok(out)
}

/// Expands `p(u) = v_d(u)ᵀ Q v_d(u) + u · v_{d-1}(u)ᵀ R v_{d-1}(u)`, with
/// `v_k(u) = (L_0^{-1/2}(πu), …, L_k^{-1/2}(πu))`, into the Laguerre basis.
pub fn quadratic_form_expand(
    q: &SymMatrix,
    r: &SymMatrix,
    d: usize,
) -> Result<EvenGaussianPoly, LaguerreError> {
    if q.dim() != d + 1 || r.dim() != d {
        return Err(LaguerreError::Dimension(format!(
            "expected Q of size {} and R of size {d}, got {} and {}",
            d + 1,
            q.dim(),
            r.dim()
        )));
    }
    let prec = q.prec().max(r.prec());
    let t = tables(2 * d, prec);
    let mut w = gram_in_w(q, &t.lag_to_w, prec);
    w.resize(2 * d + 1, Enclosure::zero(prec));
    if d > 0 {
        let rw = gram_in_w(r, &t.lag_to_w, prec);
        for (n, c) in rw.iter().enumerate() {
            w[n + 1] += &(c / &t.pi);
        }
    }
    Ok(EvenGaussianPoly::from_w_coeffs(Basis::Laguerre, w, prec))
}

/// Powers-of-`w` coefficients of `Σ_{jk} M_jk L_j(w) L_k(w)`.
fn gram_in_w(m: &SymMatrix, lag: &[Vec<Enclosure>], prec: Precision) -> Vec<Enclosure> {
    let n = m.dim();
    // t1[j][b] = Σ_k M_jk C_k[b]
    let mut t1 = vec![vec![Enclosure::zero(prec); n]; n];
    for j in 0..n {
        for k in 0..n {
            let mjk = m.get(j, k);
            if mjk.is_exact() && mjk.mid().is_zero() {
                continue;
            }
            for (b, c) in lag[k].iter().enumerate() {
                t1[j][b] += &(mjk * c);
            }
        }
    }
    // coefficient of w^{a+b} collects Σ_j C_j[a] t1[j][b]
    let mut out = vec![Enclosure::zero(prec); 2 * n - 1];
    for j in 0..n {
        for (a, c) in lag[j].iter().enumerate() {
            for (b, v) in t1[j].iter().enumerate() {
                out[a + b] += &(c * v);
            }
        }
    }
    out
}

/// `w · Σ c_k L_k` in the Laguerre basis, from
/// `w L_k = -(k+1) L_{k+1} + (2k + 1/2) L_k - (k - 1/2) L_{k-1}`.
pub fn mul_w(c: &[Enclosure], prec: Precision) -> Vec<Enclosure> {
    let mut out = vec![Enclosure::zero(prec); c.len() + 1];
    for (k, ck) in c.iter().enumerate() {
        if ck.is_exact() && ck.mid().is_zero() {
            continue;
        }
        out[k + 1] -= &ck.mul_int(k as i64 + 1);
        out[k] += &ck.mul_rational(&Rational::from((4 * k as i64 + 1, 2)));
        if k > 0 {
            out[k - 1] -= &ck.mul_rational(&Rational::from((2 * k as i64 - 1, 2)));
        }
    }
    out
}

/// The basis `{L_i², 2 L_i L_{i+1}}` of polynomials of degree `≤ 2d`, ordered
/// so that element `n` has Laguerre degree exactly `n`: `n = 2i` is `L_i²`,
/// `n = 2i + 1` is `2 L_i L_{i+1}`.
pub struct ProductBasis {
    pub d: usize,
    pub prec: Precision,
    /// Laguerre coefficients of each element, length `n + 1`.
    pub elements: Vec<Vec<Enclosure>>,
}

impl ProductBasis {
    pub fn new(d: usize, prec: Precision) -> Self {
        // rows[k] holds L_j L_k for the current j, k ≥ j
        let n = 2 * d + 1;
        let unit = |k: usize| {
            let mut v = vec![Enclosure::zero(prec); k + 1];
            v[k] = Enclosure::one(prec);
            v
        };
        let mut prev: Vec<Vec<Enclosure>> = Vec::new();
        let mut cur: Vec<Vec<Enclosure>> = (0..=d + 1).map(unit).collect();
        let mut elements = vec![Vec::new(); n];
        for j in 0..=d {
            // cur[k - j] = L_j L_k for k = j..=d+1
            elements[2 * j] = cur[0].clone();
            if j < d {
                elements[2 * j + 1] = cur[1].iter().map(|c| c.mul_int(2)).collect();
            }
            if j == d {
                break;
            }
            let a = Rational::from((4 * j as i64 + 1, 2));
            let b = Rational::from((2 * j as i64 - 1, 2));
            let mut next = Vec::with_capacity(cur.len() - 1);
            for k in j + 1..=d + 1 {
                let base = &cur[k - j];
                let mut v = mul_w(base, prec);
                for x in v.iter_mut() {
                    *x = -&*x;
                }
                for (i, c) in base.iter().enumerate() {
                    v[i] += &c.mul_rational(&a);
                }
                if j > 0 {
                    // L_{j-1} L_k, stored in prev at offset k - (j - 1)
                    for (i, c) in prev[k - j + 1].iter().enumerate() {
                        v[i] -= &c.mul_rational(&b);
                    }
                }
                let v: Vec<Enclosure> = v.iter().map(|x| x.div_int(j as i64 + 1)).collect();
                next.push(trim_to(v, j + 1 + k));
            }
            prev = std::mem::replace(&mut cur, next);
        }
        ProductBasis { d, prec, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Coordinates of a Laguerre-basis polynomial of degree `≤ 2d`, by back
    /// substitution on the triangular basis.
    pub fn coordinates(&self, lag: &[Enclosure]) -> Result<Vec<Enclosure>, LaguerreError> {
        let n = self.len();
        let top = lag
            .iter()
            .rposition(|c| !(c.is_exact() && c.mid().is_zero()))
            .unwrap_or(0);
        if top >= n {
            return Err(LaguerreError::DegreeOverflow {
                degree: top,
                cap: n - 1,
            });
        }
        let mut r: Vec<Enclosure> = lag.iter().take(n).cloned().collect();
        r.resize(n, Enclosure::zero(self.prec));
        let mut y = vec![Enclosure::zero(self.prec); n];
        for m in (0..n).rev() {
            let e = &self.elements[m];
            y[m] = &r[m] / &e[m];
            for (i, c) in e.iter().enumerate().take(m) {
                let t = c * &y[m];
                r[i] -= &t;
            }
        }
        Ok(y)
    }

    /// Laguerre coefficients of `Σ y_n · element_n`.
    pub fn combine(&self, y: &[Enclosure]) -> Vec<Enclosure> {
        let mut out = vec![Enclosure::zero(self.prec); self.len()];
        for (yn, e) in y.iter().zip(&self.elements) {
            for (i, c) in e.iter().enumerate() {
                out[i] += &(yn * c);
            }
        }
        out
    }
}

fn trim_to(mut v: Vec<Enclosure>, degree: usize) -> Vec<Enclosure> {
    v.truncate(degree + 1);
    v
}
