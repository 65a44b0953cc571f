//! Exact symbolic engine for flat graded symplectic local models.
//!
//! The engine works over the polynomial function algebra of the degree 2
//! graded symplectic model T*[2]R^n (+) E[1] with a constant fiber metric:
//! base coordinates x^i of degree 0, odd fiber coordinates xi_a of degree 1,
//! momenta p_i of degree 2. On top of that it builds the Clifford algebra of
//! the fiber, spinor differential operators, and the Weyl quantization map
//! connecting the two, all with coefficients in Q(sqrt2, i) so that every
//! identity is checked by exact structural equality.
//!
//! Layering, bottom to top:
//!
//! * [`scalar`], [`poly`]: the number field and sparse base polynomials.
//! * [`matrix`]: dense exact matrices, used for metrics and frame changes.
//! * [`space`], [`graded`]: the graded algebra, its Poisson bracket, tau.
//! * [`clifford`], [`operator`]: Clifford elements, spinor operators, Witt
//!   frame matrix representations.
//! * [`weyl`]: quantization, dequantization, the rescaling law, the star
//!   expansion.
//! * [`courant`], [`bialgebroid`]: the two geometric front ends, generating
//!   operators for Courant structures and doubled Lie bialgebroids.

pub mod bialgebroid;
pub mod clifford;
pub mod courant;
pub mod error;
pub mod graded;
pub mod matrix;
pub mod operator;
pub mod poly;
pub mod sampling;
pub mod scalar;
pub mod space;
pub mod weyl;

pub use error::{Error, Result};
pub use scalar::Scalar;
