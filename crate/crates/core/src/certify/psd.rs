//! Rigorous bounds on the smallest eigenvalue of a symmetric matrix.
//!
//! An approximate eigenvector matrix `V` (double-precision eigensolver,
//! polished by Jacobi sweeps at working precision) is treated as exact.
//! With `N = VᵀMV` and `G = VᵀV` enclosed in ball arithmetic,
//! `λ_min(M) = min_y yᵀNy / yᵀGy`, and Gershgorin discs of `N` and `G`
//! bound numerator and denominator.

use nalgebra::SymmetricEigen;
use rug::float::Round;
use rug::Float;

use crate::rigor::{Enclosure, Precision};
use crate::sym::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

/// `lower ≤ λ_min(M) ≤ upper`.
#[derive(Debug, Clone)]
pub struct PsdBound {
    pub lower: Float,
    pub upper: Float,
}

impl PsdBound {
    pub fn verdict(&self, threshold: &Float) -> Verdict {
        if self.lower >= *threshold {
            Verdict::Pass
        } else if self.upper < *threshold {
            Verdict::Fail
        } else {
            Verdict::Indeterminate
        }
    }

    pub fn enclosure(&self) -> Enclosure {
        let prec = Precision::new(self.lower.prec().max(Precision::MIN_BITS)).unwrap_or_default();
        Enclosure::from_endpoints(&self.lower, &self.upper, prec)
    }
}

const MAX_SWEEPS: usize = 12;

/// Dense square matrix of midpoints, row-major.
struct Dense {
    n: usize,
    a: Vec<Float>,
}

impl Dense {
    fn at(&self, i: usize, j: usize) -> &Float {
        &self.a[i * self.n + j]
    }
}

fn jacobi_refine(m: &SymMatrix, v0: Vec<Float>, bits: u32) -> Vec<Float> {
    let n = m.dim();
    let mut v = v0;
    // a = Vᵀ M V at midpoint precision
    let mid = |i: usize, j: usize| Float::with_val(bits, m.get(i, j).mid());
    let mut mv = vec![Float::new(bits); n * n];
    for i in 0..n {
        for k in 0..n {
            let mut acc = Float::new(bits);
            for j in 0..n {
                acc += mid(i, j) * &v[j * n + k];
            }
            mv[i * n + k] = acc;
        }
    }
    let mut a = Dense {
        n,
        a: vec![Float::new(bits); n * n],
    };
    for k in 0..n {
        for l in k..n {
            let mut acc = Float::new(bits);
            for i in 0..n {
                acc += Float::with_val(bits, &v[i * n + k] * &mv[i * n + l]);
            }
            a.a[k * n + l] = acc.clone();
            a.a[l * n + k] = acc;
        }
    }
    let scale = a
        .a
        .iter()
        .map(|x| x.to_f64().abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = Float::with_val(bits, scale) >> (bits as i32 - 8);
    for _ in 0..MAX_SWEEPS {
        let mut off = Float::new(bits);
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q).clone();
                if apq.clone().abs() > off {
                    off = apq.clone().abs();
                }
                if apq.is_zero() || apq.clone().abs() <= tol {
                    continue;
                }
                // rotation zeroing a[p][q]
                let theta = Float::with_val(bits, a.at(q, q) - a.at(p, p)) / (Float::with_val(bits, &apq) * 2u32);
                let root = Float::with_val(bits, theta.clone().square() + 1u32).sqrt();
                let t = if theta.is_sign_negative() {
                    Float::with_val(bits, -1) / (Float::with_val(bits, -&theta) + &root)
                } else {
                    Float::with_val(bits, 1) / (theta + &root)
                };
                let c = Float::with_val(bits, t.clone().square() + 1u32).sqrt().recip();
                let s = Float::with_val(bits, &t * &c);
                for k in 0..n {
                    let akp = a.at(k, p).clone();
                    let akq = a.at(k, q).clone();
                    a.a[k * n + p] = Float::with_val(bits, &c * &akp) - Float::with_val(bits, &s * &akq);
                    a.a[k * n + q] = Float::with_val(bits, &s * &akp) + Float::with_val(bits, &c * &akq);
                }
                for k in 0..n {
                    let apk = a.at(p, k).clone();
                    let aqk = a.at(q, k).clone();
                    a.a[p * n + k] = Float::with_val(bits, &c * &apk) - Float::with_val(bits, &s * &aqk);
                    a.a[q * n + k] = Float::with_val(bits, &s * &apk) + Float::with_val(bits, &c * &aqk);
                }
                for k in 0..n {
                    let vkp = v[k * n + p].clone();
                    let vkq = v[k * n + q].clone();
                    v[k * n + p] = Float::with_val(bits, &c * &vkp) - Float::with_val(bits, &s * &vkq);
                    v[k * n + q] = Float::with_val(bits, &s * &vkp) + Float::with_val(bits, &c * &vkq);
                }
            }
        }
        if off <= tol {
            break;
        }
    }
    v
}

/// Rigorous enclosure of `λ_min(M)`.
pub fn psd_lower_bound(m: &SymMatrix) -> PsdBound {
    let n = m.dim();
    let prec = m.prec();
    let bits = prec.bits();
    if n == 0 {
        let inf = Float::with_val(bits, rug::float::Special::Infinity);
        return PsdBound {
            lower: inf.clone(),
            upper: inf,
        };
    }
    if !m.is_finite() {
        return PsdBound {
            lower: Float::with_val(bits, rug::float::Special::NegInfinity),
            upper: Float::with_val(bits, rug::float::Special::Infinity),
        };
    }
    let eig = SymmetricEigen::new(m.to_f64());
    let mut v0 = vec![Float::new(bits); n * n];
    for i in 0..n {
        for k in 0..n {
            v0[i * n + k] = Float::with_val(bits, eig.eigenvectors[(i, k)]);
        }
    }
    let v = jacobi_refine(m, v0, bits);
    let ve: Vec<Enclosure> = v.into_iter().map(Enclosure::exact).collect();

    // W = M V, N = Vᵀ W, G = Vᵀ V
    let mut w = vec![Enclosure::zero(prec); n * n];
    for i in 0..n {
        for k in 0..n {
            let mut acc = Enclosure::zero(prec);
            for j in 0..n {
                acc += &(m.get(i, j) * &ve[j * n + k]);
            }
            w[i * n + k] = acc;
        }
    }
    let nm = SymMatrix::from_fn(n, |k, l| {
        let mut acc = Enclosure::zero(prec);
        for i in 0..n {
            acc += &(&ve[i * n + k] * &w[i * n + l]);
        }
        acc
    });
    let gm = SymMatrix::from_fn(n, |k, l| {
        let mut acc = Enclosure::zero(prec);
        for i in 0..n {
            acc += &(&ve[i * n + k] * &ve[i * n + l]);
        }
        acc
    });

    let disc = |s: &SymMatrix, i: usize| {
        let mut r = Enclosure::zero(prec);
        for j in (0..n).filter(|&j| j != i) {
            r += &s.get(i, j).abs();
        }
        r
    };
    let mut g_n = Float::with_val(bits, rug::float::Special::Infinity);
    let mut g_lo = Float::with_val(bits, rug::float::Special::Infinity);
    let mut g_hi = Float::with_val(bits, rug::float::Special::NegInfinity);
    let mut upper = Float::with_val(bits, rug::float::Special::Infinity);
    for i in 0..n {
        let rn = disc(&nm, i);
        let rg = disc(&gm, i);
        g_n.min_mut(&(nm.get(i, i) - &rn).lower());
        g_lo.min_mut(&(gm.get(i, i) - &rg).lower());
        g_hi.max_mut(&(gm.get(i, i) + &rg).upper());
        upper.min_mut(&(nm.get(i, i) / gm.get(i, i)).upper());
    }
    let lower = if !g_lo.is_sign_positive() || g_lo.is_zero() {
        Float::with_val(bits, rug::float::Special::NegInfinity)
    } else if g_n.is_sign_negative() {
        Float::with_val_round(bits, &g_n / &g_lo, Round::Down).0
    } else {
        Float::with_val_round(bits, &g_n / &g_hi, Round::Down).0
    };
    PsdBound { lower, upper }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn identity() {
        let b = psd_lower_bound(&SymMatrix::identity(5, p()));
        let gap = Float::with_val(256, 1 - &b.lower);
        assert!(gap >= 0 && gap < 1e-60, "{gap}");
        assert!(b.upper >= 1.0);
        assert_eq!(b.verdict(&Float::new(64)), Verdict::Pass);
    }

    #[test]
    fn indefinite_two_by_two() {
        let m = SymMatrix::from_rationals(
            &[
                vec![Rational::from(1), Rational::from(2)],
                vec![Rational::from(2), Rational::from(1)],
            ],
            p(),
        );
        let b = psd_lower_bound(&m);
        assert!(b.upper <= -1.0 + 1e-60);
        assert!(b.lower <= -1.0);
        let gap = Float::with_val(256, -1 - &b.lower);
        assert!(gap >= 0 && gap < 1e-60, "{gap}");
        assert_eq!(b.verdict(&Float::new(64)), Verdict::Fail);
    }

    #[test]
    fn nearly_singular_gram_matrix() {
        // G Gᵀ + 1e-20 I with a rank-deficient G
        let n = 12;
        let g: Vec<Vec<i64>> = (0..n).map(|i| (0..4).map(|j| ((i * 7 + j * 3) % 5) as i64 - 2).collect()).collect();
        let eps = Enclosure::from_decimal("1e-20", p()).unwrap();
        let m = SymMatrix::from_fn(n, |i, j| {
            let dot: i64 = (0..4).map(|k| g[i][k] * g[j][k]).sum();
            let v = Enclosure::from_int(dot, p());
            if i == j { &v + &eps } else { v }
        });
        let b = psd_lower_bound(&m);
        assert_eq!(b.verdict(&Float::new(64)), Verdict::Pass);
        assert!(b.lower > 0.99e-20 && b.upper < 1.01e-20, "{} {}", b.lower, b.upper);
    }
}
