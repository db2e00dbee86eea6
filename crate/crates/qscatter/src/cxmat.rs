//! Dense complex matrices of dimension 2 and 4, which is all the physics
//! ever needs (channel blocks and the two-particle S matrix). Row-major
//! storage, Gauss-Jordan inverse with partial pivoting.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CxError {
    #[error("unsupported dimension {0} (only 2 and 4)")]
    BadDim(usize),
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimMismatch(usize, usize),
    #[error("entry count {got} does not match dimension {dim}")]
    BadLength { dim: usize, got: usize },
    #[error("singular matrix: pivot {pivot:.3e} below tolerance {tol:.3e}")]
    Singular { pivot: f64, tol: f64 },
}

/// Relative pivot tolerance for [`CMat::inverse`]: a matrix is treated as
/// singular when the best available pivot falls below `1e-13 * max|entry|`.
pub const PIVOT_RTOL: f64 = 1e-13;

/// Square complex matrix, `dim` is 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self, CxError> {
        if dim != 2 && dim != 4 {
            return Err(CxError::BadDim(dim));
        }
        if data.len() != dim * dim {
            return Err(CxError::BadLength { dim, got: data.len() });
        }
        debug_assert!(data.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Result<Self, CxError> {
        Self::new(dim, vec![Complex64::new(0.0, 0.0); dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self, CxError> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul(&self, rhs: &CMat) -> Result<CMat, CxError> {
        if self.dim != rhs.dim {
            return Err(CxError::DimMismatch(self.dim, rhs.dim));
        }
        let n = self.dim;
        let mut out = CMat::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..n {
                    acc += self.get(i, l) * rhs.get(l, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> CMat {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i));
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn sub(&self, rhs: &CMat) -> Result<CMat, CxError> {
        if self.dim != rhs.dim {
            return Err(CxError::DimMismatch(self.dim, rhs.dim));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        CMat::new(self.dim, data)
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        let data = self.data.iter().map(|a| a * s).collect();
        CMat { dim: self.dim, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &CMat) -> Result<f64, CxError> {
        Ok(self.sub(rhs)?.max_abs())
    }

    /// Determinant of a 2x2 matrix.
    pub fn det2(&self) -> Result<Complex64, CxError> {
        if self.dim != 2 {
            return Err(CxError::BadDim(self.dim));
        }
        Ok(self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0))
    }

    /// Gauss-Jordan inverse with partial pivoting. The pivot tolerance is
    /// relative to the largest entry of the input; a failure here is a
    /// signal (e.g. a total-reflection channel), never silently regularized.
    pub fn inverse(&self) -> Result<CMat, CxError> {
        let n = self.dim;
        let tol = PIVOT_RTOL * self.max_abs();
        let mut a = self.clone();
        let mut inv = CMat::identity(n)?;
        for col in 0..n {
            let (prow, pmag) = (col..n)
                .map(|r| (r, a.get(r, col).norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if pmag < tol || pmag == 0.0 {
                return Err(CxError::Singular { pivot: pmag, tol });
            }
            if prow != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(prow, j));
                    a.set(col, j, y);
                    a.set(prow, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(prow, j));
                    inv.set(col, j, y);
                    inv.set(prow, j, x);
                }
            }
            let piv = a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) / piv);
                inv.set(col, j, inv.get(col, j) / piv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col);
                if factor.norm() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let av = a.get(r, j) - factor * a.get(col, j);
                    a.set(r, j, av);
                    let iv = inv.get(r, j) - factor * inv.get(col, j);
                    inv.set(r, j, iv);
                }
            }
        }
        Ok(inv)
    }
}

/// The Pauli matrix sigma_y = [[0, -i], [i, 0]].
pub fn sigma_y() -> CMat {
    let i = Complex64::new(0.0, 1.0);
    CMat::new(2, vec![Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_times_identity() {
        let i4 = CMat::identity(4).unwrap();
        assert_eq!(i4.mul(&i4).unwrap(), i4);
    }

    #[test]
    fn diagonal_product() {
        let d2 = CMat::new(2, vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        let d3 = CMat::new(2, vec![c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]).unwrap();
        let p = d2.mul(&d3).unwrap();
        assert_eq!(p.get(0, 0), c(6.0, 0.0));
        assert_eq!(p.get(1, 1), c(6.0, 0.0));
        assert_eq!(p.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn sigma_y_squares_to_identity() {
        let sy = sigma_y();
        let p = sy.mul(&sy).unwrap();
        assert!(p.max_abs_diff(&CMat::identity(2).unwrap()).unwrap() == 0.0);
    }

    #[test]
    fn adjoint_conjugates() {
        let m = CMat::new(2, vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(m.adjoint().get(0, 0), c(0.0, -1.0));
        assert_eq!(sigma_y().adjoint(), sigma_y());
    }

    #[test]
    fn det2_values() {
        assert_eq!(CMat::identity(2).unwrap().det2().unwrap(), c(1.0, 0.0));
        // (0)(0) - (-i)(i) = -1
        assert_eq!(sigma_y().det2().unwrap(), c(-1.0, 0.0));
    }

    #[test]
    fn det2_rejects_dim4() {
        assert_eq!(CMat::identity(4).unwrap().det2(), Err(CxError::BadDim(4)));
    }

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let i4 = CMat::identity(4).unwrap();
        assert!(i4.inverse().unwrap().max_abs_diff(&i4).unwrap() < 1e-15);
        let mut d = CMat::zeros(4).unwrap();
        for i in 0..4 {
            d.set(i, i, c(2.0, 0.0));
        }
        let dinv = d.inverse().unwrap();
        for i in 0..4 {
            assert_eq!(dinv.get(i, i), c(0.5, 0.0));
        }
    }

    #[test]
    fn singular_is_an_error() {
        let mut m = CMat::zeros(2).unwrap();
        m.set(0, 0, c(1.0, 0.0));
        m.set(1, 1, c(1e-15, 0.0));
        assert!(matches!(m.inverse(), Err(CxError::Singular { .. })));
        assert!(matches!(CMat::zeros(4).unwrap().inverse(), Err(CxError::Singular { .. })));
    }

    #[test]
    fn dim_mismatch_rejected() {
        let a = CMat::identity(2).unwrap();
        let b = CMat::identity(4).unwrap();
        assert_eq!(a.mul(&b), Err(CxError::DimMismatch(2, 4)));
    }

    #[test]
    fn bad_dims_rejected() {
        assert_eq!(CMat::zeros(3), Err(CxError::BadDim(3)));
        assert!(matches!(
            CMat::new(2, vec![c(0.0, 0.0); 3]),
            Err(CxError::BadLength { dim: 2, got: 3 })
        ));
    }
}
