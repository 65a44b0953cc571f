//! Sparse polynomials in the base coordinates x^1..x^n over [`Scalar`].
//!
//! These are the degree 0 functions of the graded model. Terms live in a
//! `BTreeMap` keyed by exponent vectors, which gives a canonical order for
//! display and makes structural equality canonical once zero coefficients
//! are dropped on every write.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A sparse multivariate polynomial with `n` base variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePolynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl BasePolynomial {
    pub fn zero(n: usize) -> Self {
        BasePolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Scalar::one())
    }

    pub fn constant(n: usize, value: Scalar) -> Self {
        let mut p = Self::zero(n);
        if !value.is_zero() {
            p.terms.insert(vec![0; n], value);
        }
        p
    }

    /// The coordinate x^i, 1-indexed.
    pub fn var(n: usize, i: usize) -> Result<Self> {
        let mut exps = vec![0u32; n];
        *exps
            .get_mut(i.wrapping_sub(1))
            .ok_or(Error::IndexOutOfRange {
                what: "coordinate",
                index: i,
                bound: n,
            })? = 1;
        Ok(Self::monomial(n, exps, Scalar::one()))
    }

    /// A single term coeff * x^exps. Zero coefficients collapse to zero.
    pub fn monomial(n: usize, exps: Vec<u32>, coeff: Scalar) -> Self {
        assert_eq!(exps.len(), n, "exponent vector length must equal n");
        let mut p = Self::zero(n);
        if !coeff.is_zero() {
            p.terms.insert(exps, coeff);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> Scalar {
        self.terms
            .get(&vec![0u32; self.n])
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Scalar)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn insert_add(&mut self, exps: Vec<u32>, coeff: &Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero(self.n);
        }
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c * s);
        }
        out
    }

    /// The partial derivative with respect to x^i, 1-indexed.
    pub fn partial(&self, i: usize) -> Result<Self> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange {
                what: "coordinate",
                index: i,
                bound: self.n,
            });
        }
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let k = e[i - 1];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i - 1] = k - 1;
            out.insert_add(e2, &(c * &Scalar::from_int(k as i64)));
        }
        Ok(out)
    }

    /// Complex conjugation applied to every coefficient.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.conj());
        }
        out
    }

    /// Evaluate at a rational point, mostly a test oracle.
    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        assert_eq!(point.len(), self.n);
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &k) in point.iter().zip(e.iter()) {
                for _ in 0..k {
                    term *= xi;
                }
            }
            acc += &term;
        }
        acc
    }
}

impl Add for &BasePolynomial {
    type Output = BasePolynomial;
    fn add(self, rhs: &BasePolynomial) -> BasePolynomial {
        assert_eq!(self.n, rhs.n, "polynomials over different base dimensions");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c);
        }
        out
    }
}

impl Add for BasePolynomial {
    type Output = BasePolynomial;
    fn add(self, rhs: BasePolynomial) -> BasePolynomial {
        &self + &rhs
    }
}

impl AddAssign<&BasePolynomial> for BasePolynomial {
    fn add_assign(&mut self, rhs: &BasePolynomial) {
        assert_eq!(self.n, rhs.n, "polynomials over different base dimensions");
        for (e, c) in &rhs.terms {
            self.insert_add(e.clone(), c);
        }
    }
}

impl Sub for &BasePolynomial {
    type Output = BasePolynomial;
    fn sub(self, rhs: &BasePolynomial) -> BasePolynomial {
        self + &(-rhs)
    }
}

impl Sub for BasePolynomial {
    type Output = BasePolynomial;
    fn sub(self, rhs: BasePolynomial) -> BasePolynomial {
        &self - &rhs
    }
}

impl Neg for &BasePolynomial {
    type Output = BasePolynomial;
    fn neg(self) -> BasePolynomial {
        let mut out = BasePolynomial::zero(self.n);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }
}

impl Neg for BasePolynomial {
    type Output = BasePolynomial;
    fn neg(self) -> BasePolynomial {
        -&self
    }
}

impl Mul for &BasePolynomial {
    type Output = BasePolynomial;
    fn mul(self, rhs: &BasePolynomial) -> BasePolynomial {
        assert_eq!(self.n, rhs.n, "polynomials over different base dimensions");
        let mut out = BasePolynomial::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert_add(e, &(c1 * c2));
            }
        }
        out
    }
}

impl Mul for BasePolynomial {
    type Output = BasePolynomial;
    fn mul(self, rhs: BasePolynomial) -> BasePolynomial {
        &self * &rhs
    }
}

/// Renders one monomial factor like `x1^2*x3`, or an empty string for the
/// constant monomial.
pub(crate) fn fmt_exponents(exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (idx, &k) in exps.iter().enumerate() {
        if k == 1 {
            parts.push(format!("x{}", idx + 1));
        } else if k > 1 {
            parts.push(format!("x{}^{}", idx + 1, k));
        }
    }
    parts.join("*")
}

/// Splits a scalar into a join sign and the factor text used inside larger
/// products. Multi-term scalars get parentheses and a positive sign.
pub(crate) fn scalar_factor(coeff: &Scalar) -> (bool, String) {
    let s = coeff.to_string();
    if s.contains(' ') {
        (false, format!("({s})"))
    } else if let Some(stripped) = s.strip_prefix('-') {
        (true, stripped.to_string())
    } else {
        (false, s)
    }
}

/// Appends `sign bodytext` to `out` with " + " / " - " joiners.
pub(crate) fn push_term(out: &mut String, negative: bool, body: &str) {
    if out.is_empty() {
        if negative {
            out.push('-');
        }
    } else {
        out.push_str(if negative { " - " } else { " + " });
    }
    out.push_str(body);
}

impl fmt::Display for BasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (e, c) in &self.terms {
            let mono = fmt_exponents(e);
            let (neg, cs) = scalar_factor(c);
            let body = if mono.is_empty() {
                cs
            } else if cs == "1" {
                mono
            } else {
                format!("{cs}*{mono}")
            };
            push_term(&mut out, neg, &body);
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
pub(crate) mod test_utils {
    use super::*;
    use proptest::prelude::*;

    pub fn arb_poly(n: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = BasePolynomial> {
        let term = (
            proptest::collection::vec(0..=max_deg, n),
            (-6i64..=6, 1i64..=3),
        );
        proptest::collection::vec(term, 0..=max_terms).prop_map(move |terms| {
            let mut p = BasePolynomial::zero(n);
            for (exps, (num, den)) in terms {
                let trimmed: Vec<u32> = exps
                    .iter()
                    .map(|&e| e.min(max_deg))
                    .collect();
                p += &BasePolynomial::monomial(n, trimmed, Scalar::rational(num, den));
            }
            p
        })
    }
}

#[cfg(test)]
mod tests {
    use super::test_utils::arb_poly;
    use super::*;
    use proptest::prelude::*;

    fn x(n: usize, i: usize) -> BasePolynomial {
        BasePolynomial::var(n, i).unwrap()
    }

    #[test]
    fn partial_examples() {
        let n = 2;
        let p = &x(n, 1) * &x(n, 1);
        assert_eq!(p.partial(1).unwrap(), x(n, 1).scale(&Scalar::from_int(2)));
        assert_eq!(x(n, 1).partial(2).unwrap(), BasePolynomial::zero(n));
        let q = &(&x(n, 1) * &x(n, 2)) + &BasePolynomial::constant(n, Scalar::from_int(3));
        assert_eq!(q.partial(1).unwrap(), x(n, 2));
    }

    #[test]
    fn partial_index_contract() {
        let p = BasePolynomial::one(2);
        assert!(matches!(
            p.partial(0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            p.partial(3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn display_and_structure() {
        let n = 3;
        let p = &(&x(n, 1) * &x(n, 1)).scale(&Scalar::rational(-3, 2)) + &x(n, 3);
        assert_eq!(p.to_string(), "x3 - 3/2*x1^2");
        let q = x(n, 1).scale(&(Scalar::one() + Scalar::sqrt2()));
        assert_eq!(q.to_string(), "(1 + sqrt2)*x1");
        assert_eq!(BasePolynomial::zero(n).to_string(), "0");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn ring_laws(p in arb_poly(3, 3, 4), q in arb_poly(3, 3, 4), r in arb_poly(3, 3, 4)) {
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        }

        #[test]
        fn partials_commute(p in arb_poly(3, 4, 5)) {
            for i in 1..=3usize {
                for j in 1..=3usize {
                    prop_assert_eq!(
                        p.partial(i).unwrap().partial(j).unwrap(),
                        p.partial(j).unwrap().partial(i).unwrap()
                    );
                }
            }
        }

        #[test]
        fn partial_satisfies_leibniz(p in arb_poly(2, 3, 4), q in arb_poly(2, 3, 4)) {
            for i in 1..=2usize {
                let lhs = (&p * &q).partial(i).unwrap();
                let rhs = &(&p.partial(i).unwrap() * &q) + &(&p * &q.partial(i).unwrap());
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
