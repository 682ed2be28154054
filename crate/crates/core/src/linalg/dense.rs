use faer::{Mat, MatRef, Side};

use super::LinalgError;

/// Symmetric matrix stored as its packed lower triangle (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricDense {
    n: usize,
    data: Vec<f64>,
}

fn idx(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl SymmetricDense {
    pub fn zeros(n: usize) -> Self {
        SymmetricDense {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Takes the lower triangle of `f(i, j)`, `j <= i`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                data.push(f(i, j));
            }
        }
        SymmetricDense { n, data }
    }

    /// Symmetric part of a square matrix.
    pub fn from_mat(m: MatRef<'_, f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[idx(i, j)] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[idx(i, j)] += v;
    }

    pub fn to_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn quad(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let row = &self.data[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            for (j, &a) in row[..i].iter().enumerate() {
                s += 2.0 * a * x[i] * x[j];
            }
            s += row[i] * x[i] * x[i];
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

pub(crate) fn eig_mat(a: MatRef<'_, f64>) -> Result<SymEig, LinalgError> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(LinalgError::NonFinite);
            }
        }
    }
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence)?;
    let s = e.S().column_vector();
    let values: Vec<f64> = (0..a.nrows()).map(|i| s[i]).collect();
    // faer returns ascending order already; keep the contract explicit
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    Ok(SymEig {
        values,
        vectors: e.U().to_owned(),
    })
}

pub fn sym_eig(a: &SymmetricDense) -> Result<SymEig, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    eig_mat(a.to_mat().as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simple_spectra() {
        let e = sym_eig(&SymmetricDense::identity(4)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let e = sym_eig(&SymmetricDense::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        for (v, w) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - w).abs() < 1e-15);
        }
        let mut bad = SymmetricDense::identity(2);
        bad.set(1, 0, f64::NAN);
        assert_eq!(sym_eig(&bad).unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn packed_quad() {
        let a = SymmetricDense::from_fn(3, |i, j| (i + 2 * j + 1) as f64);
        let m = a.to_mat();
        let x = [0.5, -1.0, 2.0];
        let mut want = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                want += x[i] * m[(i, j)] * x[j];
            }
        }
        assert!((a.quad(&x) - want).abs() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn reconstruction(n in 1usize..40, entries in prop::collection::vec(-1.0f64..1.0, 1600)) {
            let m = Mat::from_fn(n, n, |i, j| entries[i * 40 + j]);
            let a = SymmetricDense::from_mat((m.transpose() * &m).as_ref());
            let e = sym_eig(&a).unwrap();
            let q = &e.vectors;
            let lam = Mat::from_fn(n, n, |i, j| if i == j { e.values[i] } else { 0.0 });
            let recon = q * &lam * q.transpose();
            let am = a.to_mat();
            let scale = am.norm_l2().max(1e-300);
            prop_assert!((&recon - &am).norm_l2() <= 1e-10 * scale);
            let orth = q.transpose() * q - Mat::<f64>::identity(n, n);
            prop_assert!(orth.norm_l2() <= 1e-10);
        }
    }
}
