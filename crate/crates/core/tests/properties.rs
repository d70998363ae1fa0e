use cplus::candidate::{mixture_fourier, GaussianMixture, Term};
use cplus::certify::psd_lower_bound;
use cplus::laguerre::{Basis, EvenGaussianPoly};
use cplus::rigor::{Enclosure, Precision};
use cplus::sym::SymMatrix;
use proptest::prelude::*;
use rug::{Float, Rational};

fn prec() -> Precision {
    Precision::default()
}

fn rationals(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-500i64..=500, 1i64..=50), 1..=max_len)
        .prop_map(|v| v.into_iter().map(Rational::from).collect())
}

fn rat(x: &Rational) -> Enclosure {
    Enclosure::from_rational(x, prec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // f̂(0) = ∫ f
    #[test]
    fn transform_at_zero_is_integral(c in rationals(16)) {
        let p = EvenGaussianPoly::from_rationals(Basis::Laguerre, &c, prec());
        let lhs = p.fourier_transform().eval_at_zero();
        let rhs = p.integral_over_line().unwrap();
        prop_assert!(lhs.overlaps(&rhs));
    }

    #[test]
    fn basis_change_preserves_values(c in rationals(16), x in -40i64..=40) {
        let p = EvenGaussianPoly::from_rationals(Basis::Monomial, &c, prec());
        let xe = rat(&Rational::from((x, 10)));
        prop_assert!(p.eval(&xe).overlaps(&p.to_laguerre().eval(&xe)));
    }

    #[test]
    fn mixture_agrees_with_polynomial(c in rationals(8), x in 0i64..=30) {
        let p = EvenGaussianPoly::from_rationals(Basis::Monomial, &c, prec());
        let m = GaussianMixture::from_even_poly(&p);
        let xe = rat(&Rational::from((x, 10)));
        prop_assert!(m.eval_enclosure(&xe).overlaps(&p.eval(&xe)));
        let mf = mixture_fourier(&m);
        prop_assert!(mf.eval_enclosure(&xe).overlaps(&p.fourier_transform().eval(&xe)));
    }

    #[test]
    fn mixture_transform_is_involution(
        terms in prop::collection::vec((-100i64..=100, 0u32..=4, 1i64..=40), 1..=4),
        x in 0i64..=25,
    ) {
        let terms = terms
            .into_iter()
            .map(|(c, k, l)| Term { c: rat(&Rational::from(c)), k, lambda: rat(&Rational::from((l, 4))) })
            .collect();
        let f = GaussianMixture::new(terms, prec()).unwrap();
        let back = mixture_fourier(&mixture_fourier(&f));
        let xe = rat(&Rational::from((x, 10)));
        prop_assert!(back.eval_enclosure(&xe).overlaps(&f.eval_enclosure(&xe)));
    }

    // A rigorous λ_min lower bound cannot exceed any Rayleigh quotient.
    #[test]
    fn psd_bound_below_rayleigh(
        n in 1usize..=6,
        raw in prop::collection::vec(-20i64..=20, 36),
        v in prop::collection::vec(-9i64..=9, 6),
    ) {
        let m = SymMatrix::from_fn(n, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            Enclosure::from_int(raw[a * 6 + b], prec())
        });
        prop_assume!(v[..n].iter().any(|&x| x != 0));
        let bound = psd_lower_bound(&m);
        let mut num = Rational::new();
        let mut den = Rational::new();
        for i in 0..n {
            den += v[i] * v[i];
            for j in 0..n {
                num += Rational::from(raw[i.min(j) * 6 + i.max(j)] * v[i] * v[j]);
            }
        }
        let q = Float::with_val(256, &(num / den));
        prop_assert!(bound.lower <= q && bound.lower <= bound.upper);
    }
}
