//! Triplet assembly of sparse symmetric matrices.

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CscMatrix};

/// Unsorted `(row, col, value)` entries; duplicates are summed on conversion.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    /// Scatter a dense local block whose rows/columns map to `dofs`.
    pub fn add_block(&mut self, dofs: &[usize], block: &DMatrix<f64>) {
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                self.push(i, j, block[(a, b)]);
            }
        }
    }

    pub fn extend(&mut self, other: Triplets) {
        self.entries.extend(other.entries);
    }

    pub fn to_csc(&self) -> CscMatrix<f64> {
        let mut coo = CooMatrix::new(self.n, self.n);
        for &(i, j, v) in &self.entries {
            coo.push(i, j, v);
        }
        CscMatrix::from(&coo)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

/// Clamp negative eigenvalues of a symmetric matrix to zero.
pub fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    // nalgebra's symmetric QR can return NaN on some contact blocks
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| sym[(i, j)]);
    let Ok(eig) = a.self_adjoint_eigen(faer::Side::Lower) else {
        // no convergence: keep only the positive diagonal
        return DMatrix::from_diagonal(&sym.diagonal().map(|d| d.max(0.0)));
    };
    let (s, u) = (eig.S(), eig.U());
    if (0..n).all(|k| s[k] >= 0.0) {
        return sym;
    }
    DMatrix::from_fn(n, n, |i, j| (0..n).filter(|&k| s[k] > 0.0).map(|k| u[(i, k)] * s[k] * u[(j, k)]).sum())
}
