use rug::float::Round;
use rug::Float;

use super::{Enclosure, Precision, RigorError};

/// Location of the minimum of Γ on (0, ∞) and a lower bound on the minimum.
const GAMMA_ARGMIN_BELOW: f64 = 1.4616;
const GAMMA_ARGMIN_ABOVE: f64 = 1.4617;
const GAMMA_MIN_LOWER: &str = "0.8856";

fn ensure_finite(v: Enclosure, function: &'static str) -> Result<Enclosure, RigorError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RigorError::PrecisionExhausted {
            function,
            bits: v.prec().bits(),
        })
    }
}

/// Γ(s) for s > 0.
pub fn gamma(s: &Enclosure) -> Result<Enclosure, RigorError> {
    if !s.is_positive() {
        return Err(RigorError::Domain {
            function: "gamma",
            detail: format!("s = {s} is not certainly positive"),
        });
    }
    let prec = s.prec();
    let (lo, hi) = (s.lower(), s.upper());
    let eval = |x: &Float, round: Round| {
        let mut y = x.clone();
        y.gamma_round(round);
        y
    };
    let out = if lo >= GAMMA_ARGMIN_ABOVE {
        Enclosure::from_endpoints(&eval(&lo, Round::Down), &eval(&hi, Round::Up), prec)
    } else if hi <= GAMMA_ARGMIN_BELOW {
        Enclosure::from_endpoints(&eval(&hi, Round::Down), &eval(&lo, Round::Up), prec)
    } else {
        let floor = Float::with_val(prec.bits(), Float::parse(GAMMA_MIN_LOWER).unwrap());
        let a = eval(&lo, Round::Up);
        let b = eval(&hi, Round::Up);
        Enclosure::from_endpoints(&floor, &a.max(&b), prec)
    };
    ensure_finite(out, "gamma")
}

/// erfc(x) = (2/√π) ∫ₓ^∞ e^{-t²} dt.
pub fn erfc_enclosure(x: &Enclosure) -> Result<Enclosure, RigorError> {
    let out = x.monotone(false, |v, r| v.erfc_round(r));
    ensure_finite(out, "erfc")
}

/// Upper bound on `sup { max(y, 0) : y ∈ e }`.
pub fn sup_clip_positive(e: &Enclosure) -> Float {
    let u = e.upper();
    if u.is_sign_negative() || u.is_zero() {
        Float::new(u.prec())
    } else {
        u
    }
}

/// Upper incomplete gamma Γ(s, x) = ∫ₓ^∞ t^{s-1} e^{-t} dt for s > 0, x ≥ 0.
///
/// Large `x` uses the asymptotic expansion, truncated once the term index
/// passes `s - 1`, where the remainder is bounded by the first omitted term.
/// Otherwise Γ(s) - γ(s, x) with the lower function summed as a positive
/// series, carrying enough guard bits to absorb the cancellation.
pub fn upper_incomplete_gamma(s: &Enclosure, x: &Enclosure) -> Result<Enclosure, RigorError> {
    if !s.is_finite() || !x.is_finite() {
        return Err(RigorError::PrecisionExhausted {
            function: "upper_incomplete_gamma",
            bits: s.prec().max(x.prec()).bits(),
        });
    }
    if s.mid().is_sign_negative() || s.mid().is_zero() || !s.is_positive() {
        return Err(RigorError::Domain {
            function: "upper_incomplete_gamma",
            detail: format!("s = {s} must be positive"),
        });
    }
    if x.mid().is_sign_negative() && !x.mid().is_zero() {
        return Err(RigorError::Domain {
            function: "upper_incomplete_gamma",
            detail: format!("x = {x} must be nonnegative"),
        });
    }
    let prec = s.prec().max(x.prec());
    let x = if x.lower() < 0 {
        Enclosure::from_endpoints(&Float::new(prec.bits()), &x.upper(), prec)
    } else {
        x.clone()
    };
    if x.upper().is_zero() {
        return gamma(s);
    }
    if let Some(v) = asymptotic(s, &x, prec) {
        return ensure_finite(v, "upper_incomplete_gamma");
    }
    series(s, &x, prec)
}

fn asymptotic(s: &Enclosure, x: &Enclosure, prec: Precision) -> Option<Enclosure> {
    if !x.is_positive() || x.lower() <= s.upper() + 1u32 {
        return None;
    }
    let wp = prec.with_guard(32);
    let s = s.with_prec(wp);
    let x = x.with_prec(wp);
    let min_terms = {
        let v = s.upper().to_f64() - 1.0;
        if v <= 0.0 {
            0
        } else {
            v.ceil() as i64
        }
    };
    let mut tol = Float::with_val(64, 1u32);
    tol >>= prec.bits() + 8;
    let mut term = Enclosure::one(wp);
    let mut sum = Enclosure::zero(wp);
    let mut n: i64 = 0;
    let mut previous = term.abs_upper();
    loop {
        let mag = term.abs_upper();
        if n >= min_terms && mag < tol {
            break;
        }
        if n > min_terms && mag > previous {
            return None;
        }
        if n > 64 * i64::from(prec.bits()) {
            return None;
        }
        previous = mag;
        sum += &term;
        n += 1;
        let factor = &(&s - &Enclosure::from_int(n, wp)) / &x;
        term = &term * &factor;
    }
    sum.add_error(&term.abs_upper());
    let s_minus_one = &s - &Enclosure::one(wp);
    let prefactor = &x.pow(&s_minus_one).ok()? * &(-&x).exp();
    Some((&prefactor * &sum).with_prec(prec))
}

fn series(s: &Enclosure, x: &Enclosure, prec: Precision) -> Result<Enclosure, RigorError> {
    // Estimated bits lost in Γ(s) - γ(s, x).
    let sf = s.mid_f64();
    let xf = x.upper().to_f64();
    let lg = ln_gamma_f64(sf);
    let log_upper = if xf > sf {
        (sf - 1.0) * xf.ln() - xf
    } else {
        lg
    };
    let loss = ((lg - log_upper) / std::f64::consts::LN_2).max(0.0);
    let mut guard = loss.ceil() as u32 + 32;
    for _ in 0..4 {
        let wp = prec.with_guard(guard);
        let value = series_at(s, x, wp)?;
        let rounded = value.with_prec(prec);
        if rounded.is_finite() {
            let mut limit = rounded.mid().clone().abs();
            limit >>= prec.bits() / 2;
            if rounded.is_positive() && *rounded.rad() <= limit {
                return Ok(rounded);
            }
        }
        guard *= 2;
    }
    Err(RigorError::PrecisionExhausted {
        function: "upper_incomplete_gamma",
        bits: prec.with_guard(guard).bits(),
    })
}

fn series_at(s: &Enclosure, x: &Enclosure, wp: Precision) -> Result<Enclosure, RigorError> {
    let s = s.with_prec(wp);
    let x = x.with_prec(wp);
    let mut term = s.recip();
    let mut sum = term.clone();
    let x_hi = x.upper();
    let s_lo = s.lower();
    let mut n: u64 = 0;
    loop {
        n += 1;
        let denom = &s + &Enclosure::from_int(n as i64, wp);
        term = &(&term * &x) / &denom;
        sum += &term;
        // ratio of consecutive remaining terms is at most x / (s + n + 1)
        let next = Float::with_val_round(wp.bits(), &s_lo + (n + 1), Round::Down).0;
        let twice_x = Float::with_val_round(wp.bits(), &x_hi * 2u32, Round::Up).0;
        if twice_x < next {
            let mut scaled = sum.lower();
            scaled >>= wp.bits();
            if term.abs_upper() <= scaled {
                break;
            }
        }
        if n > 1_000_000 {
            return Err(RigorError::PrecisionExhausted {
                function: "upper_incomplete_gamma",
                bits: wp.bits(),
            });
        }
    }
    // remaining tail ≤ term · q / (1 - q) ≤ term for q ≤ 1/2
    sum.add_error(&term.abs_upper());
    let lower_gamma = &(&x.pow(&s)? * &(-&x).exp()) * &sum;
    Ok(&gamma(&s)? - &lower_gamma)
}

fn ln_gamma_f64(s: f64) -> f64 {
    let (v, _) = Float::with_val(64, s).ln_abs_gamma();
    v.to_f64()
}
