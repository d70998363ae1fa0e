//! Symmetric matrices of enclosures, stored as the upper triangle.

use nalgebra::DMatrix;
use rug::Rational;

use crate::rigor::{Enclosure, Precision};

#[derive(Clone, Debug)]
pub struct SymMatrix {
    n: usize,
    data: Vec<Enclosure>,
}

impl SymMatrix {
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        assert!(j < self.n, "index ({i}, {j}) out of range for {}x{}", self.n, self.n);
        i * self.n + j - i - i * i.saturating_sub(1) / 2
    }

    pub fn zeros(n: usize, prec: Precision) -> Self {
        SymMatrix {
            n,
            data: vec![Enclosure::zero(prec); n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut m = Self::zeros(n, prec);
        for i in 0..n {
            m.set(i, i, Enclosure::one(prec));
        }
        m
    }

    /// Builds from the upper triangle `f(i, j)`, `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Enclosure) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    pub fn from_rationals(rows: &[Vec<Rational>], prec: Precision) -> Self {
        Self::from_fn(rows.len(), |i, j| Enclosure::from_rational(&rows[i][j], prec))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Enclosure {
        &self.data[self.slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Enclosure) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn prec(&self) -> Precision {
        self.data
            .iter()
            .map(Enclosure::prec)
            .max()
            .unwrap_or_default()
    }

    pub fn with_prec(&self, prec: Precision) -> Self {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|e| e.with_prec(prec)).collect(),
        }
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&mut self, shift: &Enclosure) {
        for i in 0..self.n {
            let v = self.get(i, i) + shift;
            self.set(i, i, v);
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Enclosure) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Midpoints rounded to double precision.
    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).mid_f64())
    }

    /// Upper-triangle entries `(i, j, value)`, `i <= j`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, &Enclosure)> {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i..n).map(move |j| (i, j)))
            .zip(self.data.iter())
            .map(|((i, j), v)| (i, j, v))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(Enclosure::is_finite)
    }
}
