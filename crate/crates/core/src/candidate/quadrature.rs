//! Adaptive verified quadrature on `[a, ∞)` for even mixtures.
//!
//! Sign-definite pieces use the midpoint rule with its remainder
//! `h³/24 · f″(ξ)` enclosed over the piece; pieces where the sign is unknown
//! fall back to `[max(0, ∫f), h · sup f⁺]`. Beyond the cutoff `T` the
//! term-wise bound `Σ|c| Γ(k+½, λT²) / (2λ^{k+½})` is added as `[0, bound]`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rug::Float;

use super::GaussianMixture;
use crate::rigor::{upper_incomplete_gamma, Enclosure, Precision};

#[derive(Debug, Clone)]
pub struct QuadratureOptions {
    /// Stop once the enclosure width drops below this.
    pub target_width: f64,
    pub max_subdivisions: usize,
    /// Term-wise tail bound that fixes the cutoff `T`.
    pub tail_tolerance: f64,
    pub initial_pieces: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            target_width: 1e-10,
            max_subdivisions: 1_000_000,
            tail_tolerance: 1e-25,
            initial_pieces: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: Enclosure,
    pub subdivisions: usize,
    pub tail_cutoff: Enclosure,
    /// False when the budget ran out first; the value is still valid.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// `∫_ℝ |f|`
    AbsoluteValue,
    /// `∫_{|t|>1} f⁺`
    PositivePartBeyondOne,
}

/// `Σ_p c_p x^p · e^{-λx²}` for one `λ`, with the first two derivatives.
struct Group {
    lam: Enclosure,
    lam_lo: Enclosure,
    lam_hi: Enclosure,
    f: Vec<Enclosure>,
    d1: Vec<Enclosure>,
    d2: Vec<Enclosure>,
    /// Per power: where `x^p e^{-λx²}` may peak, and an upper bound on the peak.
    peaks: Vec<Option<(Float, Float, Float)>>,
}

/// Coefficients of `(P e^{-λx²})′ = (P′ − 2λxP) e^{-λx²}`.
fn differentiate(c: &[Enclosure], lam: &Enclosure, prec: Precision) -> Vec<Enclosure> {
    let mut out = vec![Enclosure::zero(prec); c.len() + 1];
    for (p, cp) in c.iter().enumerate() {
        if p > 0 {
            out[p - 1] += &cp.mul_int(p as i64);
        }
        out[p + 1] -= &(cp * lam).mul_int(2);
    }
    out
}

impl Group {
    fn new(lam: Enclosure, f: Vec<Enclosure>, prec: Precision) -> Self {
        let d1 = differentiate(&f, &lam, prec);
        let d2 = differentiate(&d1, &lam, prec);
        let lam_lo = Enclosure::exact(lam.lower());
        let lam_hi = Enclosure::exact(lam.upper());
        let e1 = Enclosure::one(prec).exp();
        let peaks = (0..d2.len())
            .map(|p| {
                if p == 0 {
                    return None;
                }
                let half_p = Enclosure::from_int(p as i64, prec).div_int(2);
                let x_lo = (&half_p / &lam_hi).sqrt().ok()?.lower();
                let x_hi = (&half_p / &lam_lo).sqrt().ok()?.upper();
                // (p/(2eλ))^{p/2}
                let base = &half_p / &(&e1 * &lam_lo);
                let peak = if p % 2 == 0 {
                    base.pow_int(p as u32 / 2)
                } else {
                    &base.pow_int(p as u32 / 2) * &base.sqrt().ok()?
                };
                Some((x_lo, x_hi, peak.upper()))
            })
            .collect();
        Group {
            lam,
            lam_lo,
            lam_hi,
            f,
            d1,
            d2,
            peaks,
        }
    }
}

/// `F` with terms grouped by `λ` so each exponential is evaluated once.
struct Compiled {
    groups: Vec<Group>,
    prec: Precision,
}

#[derive(Clone, Copy)]
enum Order {
    F,
    D1,
    D2,
}

impl Compiled {
    fn new(f: &GaussianMixture) -> Self {
        let prec = f.prec;
        let mut raw: Vec<(Enclosure, Vec<Enclosure>)> = Vec::new();
        for t in &f.terms {
            let p = 2 * t.k as usize;
            let idx = match raw
                .iter()
                .position(|(l, _)| l.mid() == t.lambda.mid() && l.rad() == t.lambda.rad())
            {
                Some(i) => i,
                None => {
                    raw.push((t.lambda.clone(), Vec::new()));
                    raw.len() - 1
                }
            };
            let c = &mut raw[idx].1;
            if c.len() <= p {
                c.resize(p + 1, Enclosure::zero(prec));
            }
            c[p] += &t.c;
        }
        Compiled {
            groups: raw.into_iter().map(|(l, c)| Group::new(l, c, prec)).collect(),
            prec,
        }
    }

    fn coeffs<'a>(g: &'a Group, order: Order) -> &'a [Enclosure] {
        match order {
            Order::F => &g.f,
            Order::D1 => &g.d1,
            Order::D2 => &g.d2,
        }
    }

    fn point(&self, x: &Enclosure, order: Order) -> Enclosure {
        let mut acc = Enclosure::zero(self.prec);
        let x2 = x.sqr();
        for g in &self.groups {
            let e = (-&(&g.lam * &x2)).exp();
            let mut poly = Enclosure::zero(self.prec);
            // Horner in x
            for c in Self::coeffs(g, order).iter().rev() {
                poly = &(&poly * x) + c;
            }
            acc += &(&poly * &e);
        }
        acc
    }

    /// Ranges of `F`, `F′`, `F″` over `[lo, hi] ⊂ [0, ∞)`, term by term.
    fn ranges(&self, lo: &Float, hi: &Float) -> [Enclosure; 3] {
        let prec = self.prec;
        let l = Enclosure::exact(lo.clone());
        let h = Enclosure::exact(hi.clone());
        let (l2, h2) = (l.sqr(), h.sqr());
        let mut out = [Enclosure::zero(prec), Enclosure::zero(prec), Enclosure::zero(prec)];
        for g in &self.groups {
            let e_l_min = (-&(&g.lam_hi * &l2)).exp();
            let e_h_min = (-&(&g.lam_hi * &h2)).exp();
            let e_l_max = (-&(&g.lam_lo * &l2)).exp();
            let e_h_max = (-&(&g.lam_lo * &h2)).exp();
            let mut lp = Enclosure::one(prec);
            let mut hp = Enclosure::one(prec);
            for p in 0..g.d2.len() {
                let min = (&lp * &e_l_min).lower().min(&(&hp * &e_h_min).lower());
                let mut max = (&lp * &e_l_max).upper().max(&(&hp * &e_h_max).upper());
                if let Some((x_lo, x_hi, peak)) = &g.peaks[p] {
                    if *x_hi >= *lo && *x_lo <= *hi {
                        max.max_mut(peak);
                    }
                }
                let r = Enclosure::from_endpoints(&min, &max, prec);
                for (slot, order) in [Order::F, Order::D1, Order::D2].into_iter().enumerate() {
                    if let Some(c) = Self::coeffs(g, order).get(p) {
                        out[slot] += &(c * &r);
                    }
                }
                lp = &lp * &l;
                hp = &hp * &h;
            }
        }
        out
    }

    /// Range of `F` on `[lo, hi]` with the mean-value refinement; also
    /// returns `F(m)` and the range of `F″`.
    fn range_full(&self, lo: &Float, hi: &Float) -> (Enclosure, Enclosure, Enclosure) {
        let prec = self.prec;
        let [naive, d1, d2] = self.ranges(lo, hi);
        let m = midpoint(lo, hi, prec);
        let half = Float::with_val(prec.bits(), hi - &m);
        let spread = Enclosure::from_endpoints(&(-half.clone()), &half, prec);
        let fm = self.point(&Enclosure::exact(m), Order::F);
        let centered = &fm + &(&d1 * &spread);
        (intersect(&naive, &centered, prec), fm, d2)
    }
}

fn intersect(a: &Enclosure, b: &Enclosure, prec: Precision) -> Enclosure {
    let lo = a.lower().max(&b.lower());
    let hi = a.upper().min(&b.upper());
    if lo > hi {
        return a.clone();
    }
    Enclosure::from_endpoints(&lo, &hi, prec)
}

/// Enclosure of `F(x)` for `x ≥ 0`.
pub(crate) fn eval_even(f: &GaussianMixture, x: &Enclosure) -> Enclosure {
    let c = Compiled::new(f);
    if x.is_exact() {
        return c.point(x, Order::F);
    }
    c.range_full(&x.lower(), &x.upper()).0
}

fn midpoint(lo: &Float, hi: &Float, prec: Precision) -> Float {
    // exact: endpoints come from bisection of dyadic intervals
    let bits = prec.bits().max(lo.prec()).max(hi.prec()) + 1;
    Float::with_val(bits, lo + hi) >> 1u32
}

struct Ctx {
    f: Compiled,
    mode: Mode,
    prec: Precision,
}

impl Ctx {
    fn contribution(&self, lo: &Float, hi: &Float) -> Enclosure {
        let prec = self.prec;
        let he = Enclosure::exact(Float::with_val(prec.bits(), hi - lo));
        let (range, fm, d2) = self.f.range_full(lo, hi);
        let rem = (&he.pow_int(3) * &d2).div_int(24);
        let integral = &(&he * &fm) + &rem;
        let zero = Float::new(prec.bits());
        match self.mode {
            Mode::AbsoluteValue => {
                if range.is_positive() {
                    integral
                } else if range.is_negative() {
                    -&integral
                } else {
                    let lower = integral.abs().lower().max(&zero);
                    let upper = (&he * &range.abs()).upper();
                    Enclosure::from_endpoints(&lower, &upper, prec)
                }
            }
            Mode::PositivePartBeyondOne => {
                if range.is_positive() {
                    integral
                } else if range.upper() <= 0 {
                    Enclosure::zero(prec)
                } else {
                    let lower = integral.lower().max(&zero);
                    let upper = (&he * &Enclosure::exact(range.upper())).upper();
                    Enclosure::from_endpoints(&lower, &upper, prec)
                }
            }
        }
    }
}

struct Piece {
    lo: Float,
    hi: Float,
    value: Enclosure,
    width: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width.total_cmp(&other.width)
    }
}

fn width_of(e: &Enclosure) -> f64 {
    let w = Float::with_val(64, e.upper() - e.lower());
    if w.is_nan() {
        f64::INFINITY
    } else {
        w.to_f64()
    }
}

/// Upper bound for `∫_T^∞ |F|` term by term.
fn tail_bound(f: &GaussianMixture, t: &Enclosure) -> Enclosure {
    let prec = f.prec;
    let mut acc = Enclosure::zero(prec);
    for term in &f.terms {
        let s = &Enclosure::from_int(term.k as i64, prec) + &Enclosure::one(prec).div_int(2);
        let x = &term.lambda * &t.sqr();
        let g = match upper_incomplete_gamma(&s, &x) {
            Ok(g) => g,
            Err(_) => return Enclosure::indeterminate(prec),
        };
        let lam_pow = match term.lambda.sqrt() {
            Ok(r) => &term.lambda.pow_int(term.k) * &r,
            Err(_) => return Enclosure::indeterminate(prec),
        };
        acc += &(&(&term.c.abs() * &g) / &lam_pow).div_int(2);
    }
    acc
}

fn cutoff(f: &GaussianMixture, start: u32, tol: f64) -> (Enclosure, Enclosure) {
    let prec = f.prec;
    let mut t = start.max(1);
    loop {
        let te = Enclosure::from_int(t as i64, prec);
        let b = tail_bound(f, &te);
        if (b.is_finite() && b.upper() < tol) || t >= 1 << 16 {
            return (te, b);
        }
        t += 1;
    }
}

pub(crate) fn integrate(f: &GaussianMixture, mode: Mode, opts: &QuadratureOptions) -> QuadratureResult {
    let prec = f.prec;
    let bits = prec.bits();
    let start: u32 = match mode {
        Mode::AbsoluteValue => 0,
        Mode::PositivePartBeyondOne => 1,
    };
    let (t, tail) = cutoff(f, start + 1, opts.tail_tolerance);
    let zero = Float::new(bits);
    let tail = Enclosure::from_endpoints(&zero, &tail.upper().max(&zero), prec);

    let ctx = Ctx {
        f: Compiled::new(f),
        mode,
        prec,
    };

    let a = Float::with_val(bits, start);
    let b = t.mid().clone();
    let pieces = opts.initial_pieces.max(1);
    let step = Float::with_val(bits, &b - &a) / pieces as u32;
    let mut heap = BinaryHeap::with_capacity(pieces);
    let mut total_width = 0.0;
    for i in 0..pieces {
        let lo = Float::with_val(bits, &a + Float::with_val(bits, &step * i as u32));
        let hi = if i + 1 == pieces {
            b.clone()
        } else {
            Float::with_val(bits, &a + Float::with_val(bits, &step * (i + 1) as u32))
        };
        let value = ctx.contribution(&lo, &hi);
        let width = width_of(&value);
        total_width += width;
        heap.push(Piece { lo, hi, value, width });
    }
    let target = opts.target_width / 2.0 - width_of(&tail);
    let mut subdivisions = pieces;
    while total_width > target && subdivisions < opts.max_subdivisions {
        let Some(piece) = heap.pop() else { break };
        let mid = midpoint(&piece.lo, &piece.hi, prec);
        total_width -= piece.width;
        for (lo, hi) in [(piece.lo, mid.clone()), (mid, piece.hi)] {
            let value = ctx.contribution(&lo, &hi);
            let width = width_of(&value);
            total_width += width;
            heap.push(Piece { lo, hi, value, width });
        }
        subdivisions += 1;
        // running sum drifts; resync occasionally
        if subdivisions % 4096 == 0 {
            total_width = heap.iter().map(|p| p.width).sum();
        }
    }
    let mut sum = tail;
    for p in heap.iter() {
        sum += &p.value;
    }
    let value = sum.mul_pow2(1);
    let converged = width_of(&value) <= opts.target_width;
    QuadratureResult {
        value,
        subdivisions,
        tail_cutoff: t,
        converged,
    }
}
