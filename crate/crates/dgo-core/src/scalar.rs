//! The coefficient field Q(sqrt2, i).
//!
//! Every number in the engine is a + b*sqrt2 + c*i + d*i*sqrt2 with exact
//! rational components. The field is closed under the two conjugations we
//! need: complex conjugation (negate the i components) and the Galois swap
//! sqrt2 -> -sqrt2. Chaining both gives an exact field inverse, so equality
//! of any two derived quantities is a decidable structural test.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An element a + b*sqrt2 + c*i + d*i*sqrt2 of Q(sqrt2, i).
///
/// `BigRational` keeps each component reduced with a positive denominator,
/// so derived equality is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        Scalar { a, b, c, d }
    }

    pub fn zero() -> Self {
        Scalar::from_int(0)
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::new(rat(n, 1), rat(0, 1), rat(0, 1), rat(0, 1))
    }

    /// The rational n/d. Panics if d = 0.
    pub fn rational(n: i64, d: i64) -> Self {
        Scalar::new(rat(n, d), rat(0, 1), rat(0, 1), rat(0, 1))
    }

    pub fn from_rat(r: BigRational) -> Self {
        Scalar::new(r, rat(0, 1), rat(0, 1), rat(0, 1))
    }

    pub fn sqrt2() -> Self {
        Scalar::new(rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1))
    }

    pub fn i() -> Self {
        Scalar::new(rat(0, 1), rat(0, 1), rat(1, 1), rat(0, 1))
    }

    pub fn half() -> Self {
        Scalar::rational(1, 2)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    /// True when the element lies in the real subfield Q(sqrt2).
    pub fn is_real(&self) -> bool {
        self.c.is_zero() && self.d.is_zero()
    }

    /// True when the element lies in Q.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero() && self.is_real()
    }

    /// Complex conjugation, the automorphism fixing Q(sqrt2).
    pub fn conj(&self) -> Self {
        Scalar::new(self.a.clone(), self.b.clone(), -&self.c, -&self.d)
    }

    /// The Galois automorphism sqrt2 -> -sqrt2, fixing Q(i).
    pub fn galois_sqrt2(&self) -> Self {
        Scalar::new(self.a.clone(), -&self.b, self.c.clone(), -&self.d)
    }

    /// Exact field inverse.
    ///
    /// z * conj(z) lands in Q(sqrt2); one more conjugation sqrt2 -> -sqrt2
    /// pushes the norm down to Q, where inversion is rational arithmetic.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroInversion);
        }
        let w = self * &self.conj();
        debug_assert!(w.is_real());
        let ws = w.galois_sqrt2();
        let norm = &w * &ws;
        debug_assert!(norm.is_rational() && !norm.a.is_zero());
        let inv_norm = Scalar::from_rat(norm.a.recip());
        Ok(&(&self.conj() * &ws) * &inv_norm)
    }

    /// sqrt2 raised to an arbitrary integer power, so 2^(k/2) for even k
    /// and 2^((k-1)/2) * sqrt2 for odd k, with negative k inverting.
    pub fn sqrt2_pow(k: i64) -> Self {
        let q = k.div_euclid(2);
        let r = k.rem_euclid(2);
        let two = BigRational::from(BigInt::from(2));
        let pow2 = if q >= 0 {
            num_traits::pow::pow(two, q as usize)
        } else {
            num_traits::pow::pow(two.recip(), (-q) as usize)
        };
        let base = Scalar::from_rat(pow2);
        if r == 0 {
            base
        } else {
            base * Scalar::sqrt2()
        }
    }

    /// Small integer power, with negative exponents going through `inverse`.
    pub fn pow(&self, k: i32) -> Result<Self> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut out = Scalar::one();
        for _ in 0..k.unsigned_abs() {
            out *= &base;
        }
        Ok(out)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::new(
            &self.a + &rhs.a,
            &self.b + &rhs.b,
            &self.c + &rhs.c,
            &self.d + &rhs.d,
        )
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.a += &rhs.a;
        self.b += &rhs.b;
        self.c += &rhs.c;
        self.d += &rhs.d;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(
            &self.a - &rhs.a,
            &self.b - &rhs.b,
            &self.c - &rhs.c,
            &self.d - &rhs.d,
        )
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.a -= &rhs.a;
        self.b -= &rhs.b;
        self.c -= &rhs.c;
        self.d -= &rhs.d;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-&self.a, -&self.b, -&self.c, -&self.d)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        // Componentwise expansion of the relations sqrt2^2 = 2, i^2 = -1.
        let (a1, b1, c1, d1) = (&self.a, &self.b, &self.c, &self.d);
        let (a2, b2, c2, d2) = (&rhs.a, &rhs.b, &rhs.c, &rhs.d);
        let two = BigRational::from(BigInt::from(2));
        Scalar::new(
            a1 * a2 + &two * (b1 * b2) - c1 * c2 - &two * (d1 * d2),
            a1 * b2 + b1 * a2 - c1 * d2 - d1 * c2,
            a1 * c2 + c1 * a2 + &two * (b1 * d2) + &two * (d1 * b2),
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        )
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// Canonical form, parseable back by the front end grammar:
    /// terms in the order 1, sqrt2, i, i*sqrt2 with unit coefficients
    /// elided, joined by " + " and " - ".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: [(&BigRational, &str); 4] = [
            (&self.a, ""),
            (&self.b, "sqrt2"),
            (&self.c, "i"),
            (&self.d, "i*sqrt2"),
        ];
        let mut wrote = false;
        for (coeff, sym) in parts {
            if coeff.is_zero() {
                continue;
            }
            let mag = coeff.abs();
            if wrote {
                f.write_str(if coeff.is_negative() { " - " } else { " + " })?;
            } else if coeff.is_negative() {
                f.write_str("-")?;
            }
            if sym.is_empty() {
                write!(f, "{}", fmt_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(sym)?;
            } else {
                write!(f, "{}*{}", fmt_rational(&mag), sym)?;
            }
            wrote = true;
        }
        if !wrote {
            f.write_str("0")?;
        }
        Ok(())
    }
}
