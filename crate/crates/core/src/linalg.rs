//! Envelope (skyline) Cholesky factorization for Hermitian positive
//! definite matrices with a narrow profile.
//!
//! Row `i` stores the entries from its first structurally non-zero column
//! `first[i]` up to the diagonal. Fill-in during factorization never leaves
//! that envelope, so storage and work scale with the profile instead of
//! `n²`/`n³`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Lower triangle of a Hermitian matrix in envelope storage.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeMatrix {
    first: Vec<usize>,
    rows: Vec<Vec<Complex64>>,
}

impl EnvelopeMatrix {
    /// Zero matrix with the given row starts. `first[i] <= i` is required.
    pub fn zeros(first: Vec<usize>) -> Self {
        let rows = first
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                assert!(f <= i, "envelope start {f} beyond diagonal of row {i}");
                vec![Complex64::new(0.0, 0.0); i - f + 1]
            })
            .collect();
        Self { first, rows }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn first(&self, row: usize) -> usize {
        self.first[row]
    }

    /// Adds `value` to entry `(row, col)`, `col <= row`.
    pub fn add(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(col <= row && col >= self.first[row]);
        self.rows[row][col - self.first[row]] += value;
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        if col < self.first[row] || col > row {
            Complex64::new(0.0, 0.0)
        } else {
            self.rows[row][col - self.first[row]]
        }
    }

    /// Adds `value` to every diagonal entry.
    pub fn shift_diagonal(&mut self, value: f64) {
        for (i, row) in self.rows.iter_mut().enumerate() {
            let d = i - self.first[i];
            row[d] += value;
        }
    }

    /// In-place factorization `A = L L^H`.
    pub fn cholesky(mut self) -> Result<EnvelopeCholesky> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..i {
                let fj = self.first[j];
                let start = fi.max(fj);
                let mut acc = self.rows[i][j - fi];
                for k in start..j {
                    acc -= self.rows[i][k - fi] * self.rows[j][k - fj].conj();
                }
                let diag = self.rows[j][j - fj].re;
                self.rows[i][j - fi] = acc / diag;
            }
            let mut d = self.rows[i][i - fi].re;
            for k in fi..i {
                d -= self.rows[i][k - fi].norm_sqr();
            }
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::SolverFailure(format!(
                    "matrix not positive definite at pivot {i} (value {d})"
                )));
            }
            self.rows[i][i - fi] = Complex64::new(d.sqrt(), 0.0);
        }
        Ok(EnvelopeCholesky { factor: self })
    }
}

/// Cholesky factor in envelope storage.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCholesky {
    factor: EnvelopeMatrix,
}

impl EnvelopeCholesky {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let l = &self.factor;
        let n = l.dim();
        assert_eq!(b.len(), n);
        // L y = b
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = l.first[i];
            let row = &l.rows[i];
            let mut acc = y[i];
            for k in fi..i {
                acc -= row[k - fi] * y[k];
            }
            y[i] = acc / row[i - fi].re;
        }
        // L^H x = y, sweeping rows of L from the bottom
        for i in (0..n).rev() {
            let fi = l.first[i];
            let row = &l.rows[i];
            y[i] /= row[i - fi].re;
            let xi = y[i];
            for k in fi..i {
                y[k] -= row[k - fi].conj() * xi;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_dense(a: &DMatrix<Complex64>) -> EnvelopeMatrix {
        let n = a.nrows();
        let first = (0..n)
            .map(|i| (0..=i).find(|&j| a[(i, j)].norm() != 0.0).unwrap_or(i))
            .collect();
        let mut m = EnvelopeMatrix::zeros(first);
        for i in 0..n {
            for j in m.first(i)..=i {
                m.add(i, j, a[(i, j)]);
            }
        }
        m
    }

    #[test]
    fn matches_dense_solve_on_periodic_band() {
        let n = 12;
        // B has a main diagonal, one sub-diagonal and a wrap-around corner
        let mut b = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            b[(i, i)] = c(1.0 + 0.1 * i as f64, 0.2);
            b[(i, (i + n - 1) % n)] = c(0.3, -0.4 * (i as f64).sin());
        }
        let a = b.adjoint() * &b + DMatrix::identity(n, n) * c(0.05, 0.0);
        let rhs: Vec<_> = (0..n).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let expect = a
            .clone()
            .lu()
            .solve(&DVector::from_vec(rhs.clone()))
            .unwrap();
        let env = from_dense(&a);
        assert_eq!(env.first(n - 1), 0);
        assert_eq!(env.first(3), 2);
        let x = env.cholesky().unwrap().solve(&rhs);
        for i in 0..n {
            assert!((x[i] - expect[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut m = EnvelopeMatrix::zeros(vec![0, 0]);
        m.add(0, 0, c(1.0, 0.0));
        m.add(1, 0, c(2.0, 0.0));
        m.add(1, 1, c(1.0, 0.0));
        assert!(matches!(m.cholesky(), Err(Error::SolverFailure(_))));
    }

    #[test]
    fn diagonal_shift() {
        let mut m = EnvelopeMatrix::zeros(vec![0, 1]);
        m.shift_diagonal(2.0);
        assert_eq!(m.get(1, 1), c(2.0, 0.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
        let x = m.cholesky().unwrap().solve(&[c(4.0, 0.0), c(0.0, 2.0)]);
        assert!((x[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(0.0, 1.0)).norm() < 1e-15);
    }
}
