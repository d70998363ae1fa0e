//! Explicit candidates `F(x) = Σ c_j x^{2k_j} e^{-λ_j x²}` certified straight
//! from the extremal quotient: enclosures of `F(0)`, `‖F‖₁` and
//! `∫_{|t|>1} (F̂)⁺`.

mod quadrature;

use std::path::Path;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{CertifiedBound, Provenance};
use crate::laguerre::{self, Basis, EvenGaussianPoly};
use crate::rigor::{Enclosure, Precision, RigorError};

pub use quadrature::{QuadratureOptions, QuadratureResult};

#[derive(Debug, Error)]
pub enum CandidateError {
    #[error("candidate has no nonzero terms")]
    Empty,
    #[error("term {index}: {detail}")]
    InvalidTerm { index: usize, detail: String },
    #[error("{path}: {detail}")]
    Input { path: String, detail: String },
    #[error(transparent)]
    Rigor(#[from] RigorError),
}

/// `c · x^{2k} · e^{-λx²}`
#[derive(Debug, Clone)]
pub struct Term {
    pub c: Enclosure,
    pub k: u32,
    pub lambda: Enclosure,
}

#[derive(Debug, Clone)]
pub struct GaussianMixture {
    terms: Vec<Term>,
    prec: Precision,
}

/// JSON form of a term; numbers are decimal strings so nothing passes
/// through binary floating point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub c: String,
    #[serde(deserialize_with = "int_or_string")]
    pub k: u32,
    pub lambda: String,
}

fn int_or_string<'de, D: serde::Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u32),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(k) => Ok(k),
        Raw::Str(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

impl GaussianMixture {
    pub fn new(terms: Vec<Term>, prec: Precision) -> Result<Self, CandidateError> {
        for (index, t) in terms.iter().enumerate() {
            if !t.lambda.is_positive() {
                return Err(CandidateError::InvalidTerm {
                    index,
                    detail: format!("lambda {} is not positive", t.lambda),
                });
            }
        }
        Ok(GaussianMixture { terms, prec })
    }

    pub fn from_specs(specs: &[TermSpec], prec: Precision) -> Result<Self, CandidateError> {
        let terms = specs
            .iter()
            .enumerate()
            .map(|(index, s)| {
                let parse = |v: &str| {
                    Enclosure::from_decimal(v, prec).map_err(|e| CandidateError::InvalidTerm {
                        index,
                        detail: e.to_string(),
                    })
                };
                Ok(Term {
                    c: parse(&s.c)?,
                    k: s.k,
                    lambda: parse(&s.lambda)?,
                })
            })
            .collect::<Result<Vec<_>, CandidateError>>()?;
        Self::new(terms, prec)
    }

    pub fn from_json(text: &str, prec: Precision) -> Result<Self, CandidateError> {
        let specs: Vec<TermSpec> = serde_json::from_str(text).map_err(|e| CandidateError::Input {
            path: "<json>".into(),
            detail: e.to_string(),
        })?;
        Self::from_specs(&specs, prec)
    }

    pub fn load(path: &Path, prec: Precision) -> Result<Self, CandidateError> {
        let text = std::fs::read_to_string(path).map_err(|e| CandidateError::Input {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::from_json(&text, prec).map_err(|e| match e {
            CandidateError::Input { detail, .. } => CandidateError::Input {
                path: path.display().to_string(),
                detail,
            },
            other => other,
        })
    }

    /// `p(x²) e^{-πx²}` as a mixture with every `λ = π`.
    pub fn from_even_poly(p: &EvenGaussianPoly) -> Self {
        let mono = p.to_basis(Basis::Monomial);
        let pi = Enclosure::pi(p.prec());
        let terms = mono
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| Term {
                c: c.clone(),
                k: k as u32,
                lambda: pi.clone(),
            })
            .collect();
        GaussianMixture {
            terms,
            prec: p.prec(),
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.c.is_exact() && t.c.mid().is_zero())
    }

    pub fn scale(&self, s: &Enclosure) -> Self {
        GaussianMixture {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    c: &t.c * s,
                    ..t.clone()
                })
                .collect(),
            prec: self.prec,
        }
    }

    /// `F(X)` for any interval `X`; `F` is even so only `|X|` matters.
    pub fn eval_enclosure(&self, x: &Enclosure) -> Enclosure {
        let ax = x.abs();
        quadrature::eval_even(self, &ax)
    }
}

/// Term-wise transform. With `c′ = √(π/λ)`, `x^{2k} e^{-λx²}` maps to
/// `c′^{2k+1} (k!/π^k) L_k^{-1/2}(π c′² t²) e^{-π c′² t²}`, and `π c′² = π²/λ`.
pub fn mixture_fourier(f: &GaussianMixture) -> GaussianMixture {
    let prec = f.prec;
    let pi = Enclosure::pi(prec);
    let mut terms = Vec::new();
    for t in &f.terms {
        let cp = (&pi / &t.lambda).sqrt().unwrap_or_else(|_| Enclosure::indeterminate(prec));
        let lam = &pi.sqr() / &t.lambda;
        let k = t.k as usize;
        let fact = Enclosure::from_rational(&Rational::from(Integer::from(Integer::factorial(t.k))), prec);
        let scale = &(&t.c * &cp.pow_int(2 * t.k + 1)) * &(&fact / &pi.pow_int(t.k));
        let lag = laguerre::laguerre_coeffs(k);
        let mut lam_pow = Enclosure::one(prec);
        for (j, l) in lag.iter().enumerate() {
            let c = &(&scale * &Enclosure::from_rational(l, prec)) * &lam_pow;
            terms.push(Term {
                c,
                k: j as u32,
                lambda: lam.clone(),
            });
            lam_pow = &lam_pow * &lam;
        }
    }
    GaussianMixture { terms, prec }
}

pub fn verified_integral_positive_part(g: &GaussianMixture, opts: &QuadratureOptions) -> QuadratureResult {
    quadrature::integrate(g, quadrature::Mode::PositivePartBeyondOne, opts)
}

pub fn verified_l1_norm(f: &GaussianMixture, opts: &QuadratureOptions) -> QuadratureResult {
    quadrature::integrate(f, quadrature::Mode::AbsoluteValue, opts)
}

/// Everything computed while certifying a candidate.
#[derive(Debug, Clone)]
pub struct CandidateReport {
    pub bound: CertifiedBound,
    pub f_at_zero: Enclosure,
    pub l1: QuadratureResult,
    pub positive_part: QuadratureResult,
    /// The certified lower endpoint is `≤ 0`: valid but says nothing.
    pub vacuous: bool,
}

pub fn certify_candidate(
    f: &GaussianMixture,
    a: &Rational,
    opts: &QuadratureOptions,
) -> Result<CandidateReport, CandidateError> {
    if f.terms.is_empty() || f.is_zero() {
        return Err(CandidateError::Empty);
    }
    let prec = f.prec;
    let f0 = f.eval_enclosure(&Enclosure::zero(prec));
    let l1 = verified_l1_norm(f, opts);
    let positive_part = verified_integral_positive_part(&mixture_fourier(f), opts);
    let num = &f0 - &(&Enclosure::from_rational(a, prec) * &positive_part.value);
    let bound = &num / &l1.value;
    let degree = f.terms.iter().map(|t| t.k as usize).max().unwrap_or(0);
    let vacuous = !bound.is_positive();
    Ok(CandidateReport {
        bound: CertifiedBound::new(a.clone(), degree, bound, Provenance::ExplicitCandidate, None, prec.bits()),
        f_at_zero: f0,
        l1,
        positive_part,
        vacuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigor::{self, parse_exact_rational};

    fn p() -> Precision {
        Precision::default()
    }

    fn mix(terms: &[(&str, u32, &str)]) -> GaussianMixture {
        let specs: Vec<TermSpec> = terms
            .iter()
            .map(|(c, k, l)| TermSpec {
                c: c.to_string(),
                k: *k,
                lambda: l.to_string(),
            })
            .collect();
        GaussianMixture::from_specs(&specs, p()).unwrap()
    }

    fn gaussian() -> GaussianMixture {
        GaussianMixture::new(
            vec![Term {
                c: Enclosure::one(p()),
                k: 0,
                lambda: Enclosure::pi(p()),
            }],
            p(),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = mixture_fourier(&gaussian());
        assert_eq!(g.terms().len(), 1);
        assert!(g.terms()[0].c.overlaps(&Enclosure::one(p())));
        assert!(g.terms()[0].lambda.overlaps(&Enclosure::pi(p())));
    }

    #[test]
    fn scaled_gaussian_transform() {
        let g = mixture_fourier(&mix(&[("1", 0, "2")]));
        let pi = Enclosure::pi(p());
        let two = Enclosure::from_int(2, p());
        assert!(g.terms()[0].c.overlaps(&(&pi / &two).sqrt().unwrap()));
        assert!(g.terms()[0].lambda.overlaps(&(&pi.sqr() / &two)));
    }

    #[test]
    fn x_squared_transform_matches_laguerre_module() {
        let f = GaussianMixture::new(
            vec![Term {
                c: Enclosure::one(p()),
                k: 1,
                lambda: Enclosure::pi(p()),
            }],
            p(),
        )
        .unwrap();
        let g = mixture_fourier(&f);
        let pi = Enclosure::pi(p());
        assert!(g.terms()[0].c.overlaps(&pi.recip().div_int(2)));
        assert!(g.terms()[1].c.overlaps(&Enclosure::from_int(-1, p())));
        let poly = EvenGaussianPoly::from_rationals(Basis::Monomial, &[Rational::new(), Rational::from(1)], p());
        let ft = poly.fourier_transform().to_monomial();
        for (t, c) in g.terms().iter().zip(ft.coeffs()) {
            assert!(t.c.overlaps(c));
        }
    }

    #[test]
    fn values_at_zero() {
        assert!(gaussian().eval_enclosure(&Enclosure::zero(p())).overlaps(&Enclosure::one(p())));
        let f = mix(&[("-4.8", 1, "3.3"), ("1.5", 1, "7.4"), ("520", 12, "9.7"), ("1.3", 0, "2.8"), ("0.18", 0, "2")]);
        let v = f.eval_enclosure(&Enclosure::zero(p()));
        assert!(v.contains_rational(&parse_exact_rational("1.48").unwrap()));
    }

    #[test]
    fn l1_of_simple_functions() {
        let opts = QuadratureOptions::default();
        let r = verified_l1_norm(&gaussian(), &opts);
        assert!(r.value.upper() >= 1.0);
        assert!(r.value.upper() < 1.0 + 1e-10);
        let x2 = GaussianMixture::new(
            vec![Term {
                c: Enclosure::one(p()),
                k: 1,
                lambda: Enclosure::pi(p()),
            }],
            p(),
        )
        .unwrap();
        let r = verified_l1_norm(&x2, &opts);
        let expect = Enclosure::pi(p()).recip().div_int(2);
        assert!(r.value.upper() >= expect.lower());
        assert!(r.value.upper().to_f64() - expect.mid_f64() < 1e-10);
    }

    #[test]
    fn positive_part_of_gaussian_tail() {
        let opts = QuadratureOptions::default();
        let r = verified_integral_positive_part(&gaussian(), &opts);
        let pi = Enclosure::pi(p());
        let erfc = rigor::erfc_enclosure(&pi.sqrt().unwrap()).unwrap();
        assert!(r.value.upper() >= erfc.lower());
        assert!(r.value.upper().to_f64() - erfc.mid_f64() < 1e-10);
        // (1/(2π) − t²) e^{-πt²} is negative beyond 1
        let g = mixture_fourier(&GaussianMixture::new(
            vec![Term {
                c: Enclosure::one(p()),
                k: 1,
                lambda: Enclosure::pi(p()),
            }],
            p(),
        )
        .unwrap());
        let r = verified_integral_positive_part(&g, &opts);
        assert!(r.value.upper() < 1e-20);
    }

    #[test]
    fn gaussian_candidate_bound() {
        let rep = certify_candidate(&gaussian(), &Rational::from(1), &QuadratureOptions::default()).unwrap();
        let pi = Enclosure::pi(p());
        let expected = &Enclosure::one(p()) - &rigor::erfc_enclosure(&pi.sqrt().unwrap()).unwrap();
        assert!(rep.bound.certified_lower() <= expected.upper());
        assert!(expected.mid_f64() - rep.bound.certified_lower().to_f64() < 1e-9);
        assert!(!rep.vacuous);
    }

    #[test]
    fn empty_candidate_is_rejected() {
        let f = GaussianMixture::new(vec![], p()).unwrap();
        assert!(matches!(
            certify_candidate(&f, &Rational::from(1), &QuadratureOptions::default()),
            Err(CandidateError::Empty)
        ));
        assert!(GaussianMixture::from_json(r#"[{"c": "1", "k": 0, "lambda": "-1"}]"#, p()).is_err());
        assert!(GaussianMixture::from_json(r#"[{"c": "1", "k": "2", "lambda": "1"}]"#, p()).is_ok());
    }
}
