//! The flat local model: base dimension, fiber rank, constant fiber metric.
//!
//! A [`ModelSignature`] fixes the coordinate chart once and for all. Base
//! coordinates x^1..x^n carry degree 0, odd fiber coordinates xi_1..xi_m
//! degree 1, momenta p_1..p_n degree 2. The fiber metric g is a constant
//! real symmetric invertible m x m matrix; its inverse is precomputed at
//! construction so bracket formulas never re invert.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Shared handle to a model signature. Functions and operators hold one of
/// these; mixing handles with different contents is a contract error.
pub type Model = Arc<ModelSignature>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSignature {
    n: usize,
    m: usize,
    g: Matrix,
    g_inv: Matrix,
}

impl ModelSignature {
    /// Validates and freezes a model: g must be m x m, symmetric, real and
    /// invertible.
    pub fn new(n: usize, m: usize, g: Matrix) -> Result<Model> {
        if g.rows() != m || g.cols() != m {
            return Err(Error::DimensionMismatch {
                left: g.rows(),
                right: m,
            });
        }
        if !g.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !g.is_real() {
            return Err(Error::NotReal);
        }
        let g_inv = g.inverse()?;
        Ok(Arc::new(ModelSignature { n, m, g, g_inv }))
    }

    /// Model with the standard Euclidean fiber metric.
    pub fn euclidean(n: usize, m: usize) -> Model {
        ModelSignature::new(n, m, Matrix::identity(m)).expect("identity metric is admissible")
    }

    /// Model with the split half pairing of a doubled rank r bundle,
    /// g = [[0, I/2], [I/2, 0]] on A (+) A*.
    pub fn half_pairing(n: usize, r: usize) -> Model {
        let mut g = Matrix::zero(2 * r, 2 * r);
        for a in 0..r {
            g.set(a, r + a, Scalar::half());
            g.set(r + a, a, Scalar::half());
        }
        ModelSignature::new(n, 2 * r, g).expect("half pairing metric is admissible")
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn fiber_rank(&self) -> usize {
        self.m
    }

    /// Metric entry g_{ab}, 1-indexed.
    pub fn g(&self, a: usize, b: usize) -> &Scalar {
        self.g_matrix().at(a - 1, b - 1)
    }

    /// Inverse metric entry g^{ab}, 1-indexed.
    pub fn g_inv(&self, a: usize, b: usize) -> &Scalar {
        self.g_inv_matrix().at(a - 1, b - 1)
    }

    pub fn g_matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn g_inv_matrix(&self) -> &Matrix {
        &self.g_inv
    }

    pub fn check_coordinate(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange {
                what: "coordinate",
                index: i,
                bound: self.n,
            });
        }
        Ok(())
    }

    pub fn check_fiber(&self, a: usize) -> Result<()> {
        if a == 0 || a > self.m {
            return Err(Error::IndexOutOfRange {
                what: "fiber",
                index: a,
                bound: self.m,
            });
        }
        Ok(())
    }
}

impl fmt::Display for ModelSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model(n={}, m={})", self.n, self.m)
    }
}

/// Checks two handles describe the same model, for binary operations.
pub fn same_model(a: &Model, b: &Model) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::SignatureMismatch {
            left: a.to_string(),
            right: b.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_metric() {
        let bad = Matrix::from_rows(vec![
            vec![Scalar::zero(), Scalar::one()],
            vec![Scalar::from_int(2), Scalar::zero()],
        ])
        .unwrap();
        assert_eq!(ModelSignature::new(1, 2, bad), Err(Error::NotSymmetric));

        let complex = Matrix::from_rows(vec![vec![Scalar::i()]]).unwrap();
        assert_eq!(ModelSignature::new(1, 1, complex), Err(Error::NotReal));

        let singular = Matrix::zero(2, 2);
        assert_eq!(
            ModelSignature::new(1, 2, singular),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn half_pairing_inverse() {
        let sig = ModelSignature::half_pairing(2, 3);
        assert_eq!(sig.fiber_rank(), 6);
        assert_eq!(*sig.g(1, 4), Scalar::half());
        assert_eq!(*sig.g_inv(1, 4), Scalar::from_int(2));
        assert_eq!(*sig.g(1, 1), Scalar::zero());
    }

    #[test]
    fn model_identity_check() {
        let a = ModelSignature::euclidean(2, 3);
        let b = ModelSignature::euclidean(2, 3);
        let c = ModelSignature::euclidean(2, 4);
        assert!(same_model(&a, &b).is_ok());
        assert!(same_model(&a, &c).is_err());
    }
}
