use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::DenseMatrix;

/// Dense complex matrix, row-major like [`DenseMatrix`]. Only used for
/// eigenvector matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn normalize_columns(&mut self) {
        for j in 0..self.cols {
            let nrm = (0..self.rows).map(|i| self[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.0 {
                for i in 0..self.rows {
                    self[(i, j)] /= nrm;
                }
            }
        }
    }

    /// `X^H X`, Hermitian positive semidefinite.
    pub fn gram(&self) -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.rows {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
        }
        g
    }

    /// Real symmetric embedding `[[Re, −Im], [Im, Re]]` of a Hermitian
    /// matrix. Its spectrum is the Hermitian spectrum with each value doubled.
    pub fn hermitian_real_embedding(&self) -> DenseMatrix {
        let n = self.rows;
        let mut out = DenseMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..self.cols {
                let z = self[(i, j)];
                out[(i, j)] = z.re;
                out[(n + i, n + j)] = z.re;
                out[(i, n + j)] = -z.im;
                out[(n + i, j)] = z.im;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}
