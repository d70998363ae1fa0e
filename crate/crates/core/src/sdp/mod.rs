//! Semidefinite program for C⁺(A) at degree `d`.
//!
//! The unknowns are eight PSD blocks: `Q̃₁..Q̃₄` of size `d + 1` and
//! `R̃₁..R̃₄` of size `d`. Block `i` defines
//! `pᵢ(u) = v_d(u)ᵀ Qᵢ v_d(u) + u · v_{d-1}(u)ᵀ Rᵢ v_{d-1}(u)` with
//! `Qᵢ = Q̃ᵢ + εI`, `Rᵢ = R̃ᵢ + εI`, and `fᵢ(x) = pᵢ(x²) e^{-πx²}`.
//!
//! The residual `(f̂₁ − f̂₂) − (f₃ − f₄)` is constrained coordinate-wise in
//! the product basis `{L_i², 2 L_i L_{i+1}}` (see [`ProductBasis`]). Its
//! coordinates stay of order one while Laguerre coordinates of products grow
//! like `binom(2d, d)`, which the solver cannot absorb in double-precision
//! input. The verifier re-derives the residual independently.

mod sdpa;

use rug::Rational;
use thiserror::Error;

use crate::laguerre::{self, EvenGaussianPoly, Basis, LaguerreError, ProductBasis};
use crate::rigor::{Enclosure, Precision, RigorError};
use crate::sym::SymMatrix;

pub use sdpa::{read_sdpa, read_solution, to_sdpa_string, write_sdpa, SolutionMeta, SKEW_TOLERANCE};

/// Default number of significant digits in emitted `.dat-s` files.
pub const DEFAULT_DIGITS: usize = 60;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("{path}: missing {what}")]
    Missing { path: String, what: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Laguerre(#[from] LaguerreError),
    #[error(transparent)]
    Rigor(#[from] RigorError),
}

/// Blocks in solver order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Q(usize),
    R(usize),
}

impl Block {
    /// 0-based solver block index.
    pub fn index(self) -> usize {
        match self {
            Block::Q(i) => i - 1,
            Block::R(i) => i + 3,
        }
    }

    pub fn from_index(k: usize) -> Block {
        if k < 4 {
            Block::Q(k + 1)
        } else {
            Block::R(k - 3)
        }
    }
}

/// One upper-triangle entry `(i ≤ j)` of a block coefficient matrix.
#[derive(Debug, Clone)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: Enclosure,
}

/// `Σ_blocks F • Y = rhs`, where off-diagonal entries count twice.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub rhs: Enclosure,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub a: Rational,
    pub d: usize,
    pub epsilon: Rational,
    /// Subtracted from the objective per unit of `tr Q₃ + tr R₃`.
    pub trace_penalty: Rational,
    pub block_sizes: Vec<usize>,
    pub constraints: Vec<Constraint>,
    /// Maximized.
    pub objective: Vec<Entry>,
    /// Added to `objective • Y` to give the value at `Y + εI`.
    pub objective_constant: Enclosure,
    pub prec: Precision,
}

impl SdpProblem {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }
}

/// `(Q₁..Q₄, R₁..R₄)` with the ε shift already applied.
#[derive(Debug, Clone)]
pub struct SosTuple {
    pub d: usize,
    pub q: [SymMatrix; 4],
    pub r: [SymMatrix; 4],
    pub epsilon: Rational,
}

impl SosTuple {
    pub fn new(q: [SymMatrix; 4], r: [SymMatrix; 4], epsilon: Rational) -> Result<Self, SdpError> {
        let d = q[0].dim().saturating_sub(1);
        if q.iter().any(|m| m.dim() != d + 1) || r.iter().any(|m| m.dim() != d) {
            return Err(SdpError::Dimension(format!(
                "blocks must be {} (Q) and {d} (R)",
                d + 1
            )));
        }
        Ok(SosTuple { d, q, r, epsilon })
    }

    pub fn block(&self, b: Block) -> &SymMatrix {
        match b {
            Block::Q(i) => &self.q[i - 1],
            Block::R(i) => &self.r[i - 1],
        }
    }

    pub fn block_mut(&mut self, b: Block) -> &mut SymMatrix {
        match b {
            Block::Q(i) => &mut self.q[i - 1],
            Block::R(i) => &mut self.r[i - 1],
        }
    }

    pub fn prec(&self) -> Precision {
        self.q
            .iter()
            .chain(self.r.iter())
            .map(SymMatrix::prec)
            .max()
            .unwrap_or_default()
    }

    pub fn with_prec(&self, prec: Precision) -> Self {
        SosTuple {
            d: self.d,
            q: self.q.clone().map(|m| m.with_prec(prec)),
            r: self.r.clone().map(|m| m.with_prec(prec)),
            epsilon: self.epsilon.clone(),
        }
    }

    /// `pᵢ` in the Laguerre basis, `i = 1..=4`.
    pub fn polynomial(&self, i: usize) -> Result<EvenGaussianPoly, LaguerreError> {
        laguerre::quadratic_form_expand(&self.q[i - 1], &self.r[i - 1], self.d)
    }

    /// Multiplies every block by `c`.
    pub fn scale(&self, c: &Enclosure) -> Self {
        SosTuple {
            d: self.d,
            q: self.q.clone().map(|m| m.scale(c)),
            r: self.r.clone().map(|m| m.scale(c)),
            epsilon: self.epsilon.clone(),
        }
    }
}

/// Values of a vector-valued linear functional on every product `L_j L_k`,
/// `0 ≤ j ≤ k ≤ d`, given its values on the product basis.
///
/// Uses `L_j L_{k} = [(2(k−j)−2) L_j L_{k−1} + (j+1) L_{j+1} L_{k−1}
///   + (j − 1/2) L_{j−1} L_{k−1} − (k − 3/2) L_j L_{k−2}] / k` for `k ≥ j + 2`,
/// which follows from the three-term recurrence applied to both factors.
struct PairTable {
    d: usize,
    values: Vec<Vec<Enclosure>>,
}

impl PairTable {
    fn slot(d: usize, j: usize, k: usize) -> usize {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        j * (d + 1) + k - j * (j + 1) / 2
    }

    fn new(d: usize, basis_values: &[Vec<Enclosure>], prec: Precision) -> Self {
        let len = basis_values[0].len();
        let mut values = vec![Vec::new(); (d + 1) * (d + 2) / 2];
        for j in 0..=d {
            values[Self::slot(d, j, j)] = basis_values[2 * j].clone();
            if j < d {
                values[Self::slot(d, j, j + 1)] =
                    basis_values[2 * j + 1].iter().map(|v| v.div_int(2)).collect();
            }
        }
        for dist in 2..=d {
            for j in 0..=d - dist {
                let k = j + dist;
                let a = &values[Self::slot(d, j, k - 1)];
                let b = &values[Self::slot(d, j + 1, k - 1)];
                let c = &values[Self::slot(d, j, k - 2)];
                let e = (j > 0).then(|| &values[Self::slot(d, j - 1, k - 1)]);
                let ca = Rational::from(2 * dist as i64 - 2);
                let cb = Rational::from(j as i64 + 1);
                let cc = Rational::from((2 * k as i64 - 3, 2));
                let ce = Rational::from((2 * j as i64 - 1, 2));
                let mut out = Vec::with_capacity(len);
                for n in 0..len {
                    let mut v = &a[n].mul_rational(&ca) + &b[n].mul_rational(&cb);
                    v -= &c[n].mul_rational(&cc);
                    if let Some(e) = e {
                        v += &e[n].mul_rational(&ce);
                    }
                    out.push(v.div_int(k as i64));
                }
                debug_assert!(out.iter().all(|x| x.prec() >= prec));
                values[Self::slot(d, j, k)] = out;
            }
        }
        PairTable { d, values }
    }

    fn get(&self, j: usize, k: usize) -> &[Enclosure] {
        &self.values[Self::slot(self.d, j, k)]
    }

    /// Values on `w L_j L_k` for `j, k < d`, from
    /// `w L_j = −(j+1) L_{j+1} + (2j + 1/2) L_j − (j − 1/2) L_{j−1}`.
    fn times_w(&self, j: usize, k: usize) -> Vec<Enclosure> {
        let up = self.get(j + 1, k);
        let mid = self.get(j, k);
        let c0 = Rational::from((4 * j as i64 + 1, 2));
        let c1 = Rational::from((2 * j as i64 - 1, 2));
        (0..mid.len())
            .map(|n| {
                let mut v = &mid[n].mul_rational(&c0) - &up[n].mul_int(j as i64 + 1);
                if j > 0 {
                    v -= &self.get(j - 1, k)[n].mul_rational(&c1);
                }
                v
            })
            .collect()
    }
}

fn dot(a: &[Enclosure], b: &[Enclosure], prec: Precision) -> Enclosure {
    let mut acc = Enclosure::zero(prec);
    for (x, y) in a.iter().zip(b) {
        acc += &(x * y);
    }
    acc
}

fn push(entries: &mut Vec<Entry>, block: Block, i: usize, j: usize, value: Enclosure) {
    if value.mid().is_zero() && value.is_exact() {
        return;
    }
    entries.push(Entry {
        block: block.index(),
        i,
        j,
        value,
    });
}

#[derive(Debug, Clone)]
pub struct AssembleOptions {
    pub prec: Precision,
    /// Small penalty on `tr Q₃ + tr R₃`. The tail Gram matrix is so badly
    /// conditioned that, once rounded to doubles, the solver can find a
    /// spurious improving ray through `Q₃ = Q₄`; the penalty closes it.
    /// Verification recomputes the true objective, so it costs only a
    /// little optimality.
    pub trace_penalty: Rational,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            prec: Precision::default(),
            trace_penalty: Rational::from((1, 10_000_000_000u64)),
        }
    }
}

pub fn assemble(a: &Rational, d: usize, epsilon: &Rational) -> Result<SdpProblem, SdpError> {
    assemble_with_options(a, d, epsilon, &AssembleOptions::default())
}

pub fn assemble_with_precision(
    a: &Rational,
    d: usize,
    epsilon: &Rational,
    prec: Precision,
) -> Result<SdpProblem, SdpError> {
    let opts = AssembleOptions {
        prec,
        ..AssembleOptions::default()
    };
    assemble_with_options(a, d, epsilon, &opts)
}

pub fn assemble_with_options(
    a: &Rational,
    d: usize,
    epsilon: &Rational,
    opts: &AssembleOptions,
) -> Result<SdpProblem, SdpError> {
    let prec = opts.prec;
    if opts.trace_penalty < 0 {
        return Err(SdpError::InvalidInput("trace penalty must be nonnegative".into()));
    }
    if *a < 1 {
        return Err(SdpError::InvalidInput(format!("A = {a} must be at least 1")));
    }
    if d < 2 {
        return Err(SdpError::InvalidInput(format!("degree {d} must be at least 2")));
    }
    if *epsilon < 0 {
        return Err(SdpError::InvalidInput("epsilon must be nonnegative".into()));
    }
    // Laguerre coordinates of products reach binom(2d, d); keep that many
    // bits on top of the requested precision.
    let wp = prec.with_guard(4 * d as u32 + 64);
    let n = 2 * d + 1;
    let pb = ProductBasis::new(d, wp);

    // psi[m]: product-basis coordinates of the transform of element m
    let mut psi = Vec::with_capacity(n);
    for e in &pb.elements {
        let ft = EvenGaussianPoly::new(Basis::Laguerre, e.clone(), wp).fourier_transform();
        psi.push(pb.coordinates(ft.coeffs())?);
    }
    let unit: Vec<Vec<Enclosure>> = (0..n)
        .map(|m| {
            (0..n)
                .map(|i| if i == m { Enclosure::one(wp) } else { Enclosure::zero(wp) })
                .collect()
        })
        .collect();
    let tri = PairTable::new(d, &unit, wp);
    let ftri = PairTable::new(d, &psi, wp);

    // scalar functionals on basis elements: ∫ over ℝ and over |x| > 1
    let one = Enclosure::one(wp);
    let w_tails = laguerre::w_tail_moments(n, &one)?;
    let tables = laguerre::tables(n, wp);
    let lag_tail: Vec<Enclosure> = (0..n)
        .map(|i| dot(&tables.lag_to_w[i], &w_tails, wp))
        .collect();
    let integral: Vec<Enclosure> = pb.elements.iter().map(|e| e[0].clone()).collect();
    let tail: Vec<Enclosure> = pb.elements.iter().map(|e| dot(e, &lag_tail, wp)).collect();
    let at_zero: Vec<Enclosure> = (0..=d)
        .map(|k| Enclosure::from_rational(&laguerre::laguerre_at_zero(k), wp))
        .collect();
    let inv_pi = tables.pi.recip();
    let a_enc = Enclosure::from_rational(a, wp);
    let mu = Enclosure::from_rational(&opts.trace_penalty, wp);
    let penalized = |j: usize, k: usize, v: Enclosure| if j == k { &v - &mu } else { v };

    let mut rows: Vec<Vec<Entry>> = vec![Vec::new(); n + 1];
    let mut objective = Vec::new();
    for j in 0..=d {
        for k in j..=d {
            let t = tri.get(j, k);
            let ft = ftri.get(j, k);
            for m in 0..n {
                push(&mut rows[m], Block::Q(1), j, k, ft[m].clone());
                push(&mut rows[m], Block::Q(2), j, k, -&ft[m]);
                push(&mut rows[m], Block::Q(3), j, k, -&t[m]);
                push(&mut rows[m], Block::Q(4), j, k, t[m].clone());
            }
            let int = dot(t, &integral, wp);
            push(&mut rows[n], Block::Q(1), j, k, int.clone());
            push(&mut rows[n], Block::Q(2), j, k, int);
            let zero_val = &at_zero[j] * &at_zero[k];
            push(&mut objective, Block::Q(1), j, k, zero_val.clone());
            push(&mut objective, Block::Q(2), j, k, -&zero_val);
            push(&mut objective, Block::Q(3), j, k, penalized(j, k, -&(&a_enc * &dot(t, &tail, wp))));
        }
    }
    for j in 0..d {
        for k in j..d {
            let t: Vec<Enclosure> = tri.times_w(j, k).iter().map(|v| v * &inv_pi).collect();
            let ft: Vec<Enclosure> = ftri.times_w(j, k).iter().map(|v| v * &inv_pi).collect();
            for m in 0..n {
                push(&mut rows[m], Block::R(1), j, k, ft[m].clone());
                push(&mut rows[m], Block::R(2), j, k, -&ft[m]);
                push(&mut rows[m], Block::R(3), j, k, -&t[m]);
                push(&mut rows[m], Block::R(4), j, k, t[m].clone());
            }
            let int = dot(&t, &integral, wp);
            push(&mut rows[n], Block::R(1), j, k, int.clone());
            push(&mut rows[n], Block::R(2), j, k, int);
            push(&mut objective, Block::R(3), j, k, penalized(j, k, -&(&a_enc * &dot(&t, &tail, wp))));
        }
    }

    let eps = Enclosure::from_rational(epsilon, wp);
    let trace = |entries: &[Entry]| {
        let mut acc = Enclosure::zero(wp);
        for e in entries.iter().filter(|e| e.i == e.j) {
            acc += &e.value;
        }
        acc
    };
    let constraints = rows
        .into_iter()
        .enumerate()
        .map(|(m, entries)| {
            let base = if m == n { Enclosure::one(wp) } else { Enclosure::zero(wp) };
            let rhs = &base - &(&eps * &trace(&entries));
            Constraint { entries, rhs }
        })
        .collect();
    let objective_constant = &eps * &trace(&objective);

    Ok(SdpProblem {
        a: a.clone(),
        d,
        epsilon: epsilon.clone(),
        trace_penalty: opts.trace_penalty.clone(),
        block_sizes: vec![d + 1, d + 1, d + 1, d + 1, d, d, d, d],
        constraints,
        objective,
        objective_constant,
        prec,
    })
}
