//! The graded function algebra of the model and its degree -2 bracket.
//!
//! A [`GradedFunction`] is a sum of terms f(x) * xi_A * p^beta where A is a
//! strictly increasing subset of fiber indices (stored as a bit mask) and
//! beta a momentum multi index. The Euler degree of a term is |A| + 2|beta|
//! and its parity is |A| mod 2. The module provides the graded commutative
//! product, the Euler decomposition, the Poisson bracket determined by
//!
//! ```text
//! {p_i, f} = df/dx^i      {xi_a, xi_b} = g_ab      all other pairs 0
//! ```
//!
//! together with graded skew symmetry, Jacobi and Leibniz, and the
//! antilinear antiautomorphism tau fixing x and p with tau(xi) = i xi.
//!
//! The bracket is implemented by a closed bidifferential formula; the axiom
//! suite in the tests, not the formula, is the normative contract. An
//! independent oracle that knows only the generator table and the axioms
//! cross checks the formula on random inputs.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Result;
use crate::poly::{self, BasePolynomial};
use crate::scalar::Scalar;
use crate::space::{same_model, Model};

/// Key of one term: odd subset mask (bit a-1 set when xi_a is present) and
/// momentum exponents.
pub type TermKey = (u64, Vec<u32>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedFunction {
    sig: Model,
    terms: BTreeMap<TermKey, BasePolynomial>,
}

/// Sign produced by sorting the concatenation xi_A xi_B into increasing
/// order, assuming A and B are disjoint: minus one to the number of pairs
/// (a, b) with a in A, b in B, a > b.
fn merge_sign(a: u64, b: u64) -> i64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a.checked_shr(j + 1).unwrap_or(0)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl GradedFunction {
    pub fn zero(sig: &Model) -> Self {
        GradedFunction {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(sig: &Model) -> Self {
        Self::constant(sig, Scalar::one())
    }

    pub fn constant(sig: &Model, value: Scalar) -> Self {
        Self::from_poly(sig, BasePolynomial::constant(sig.base_dim(), value))
    }

    pub fn from_poly(sig: &Model, f: BasePolynomial) -> Self {
        assert_eq!(f.vars(), sig.base_dim(), "coefficient dimension mismatch");
        let mut out = Self::zero(sig);
        out.insert_add((0, vec![0; sig.base_dim()]), f);
        out
    }

    /// The base coordinate x^i.
    pub fn x(sig: &Model, i: usize) -> Result<Self> {
        sig.check_coordinate(i)?;
        Ok(Self::from_poly(
            sig,
            BasePolynomial::var(sig.base_dim(), i)?,
        ))
    }

    /// The odd fiber coordinate xi_a.
    pub fn xi(sig: &Model, a: usize) -> Result<Self> {
        sig.check_fiber(a)?;
        Ok(Self::monomial(
            sig,
            1u64 << (a - 1),
            vec![0; sig.base_dim()],
            BasePolynomial::one(sig.base_dim()),
        ))
    }

    /// The momentum p_i.
    pub fn p(sig: &Model, i: usize) -> Result<Self> {
        sig.check_coordinate(i)?;
        let mut beta = vec![0u32; sig.base_dim()];
        beta[i - 1] = 1;
        Ok(Self::monomial(
            sig,
            0,
            beta,
            BasePolynomial::one(sig.base_dim()),
        ))
    }

    /// The product xi_{a1}..xi_{ak} for the index set in `mask`, ascending.
    pub fn xi_monomial(sig: &Model, mask: u64) -> Self {
        Self::monomial(
            sig,
            mask,
            vec![0; sig.base_dim()],
            BasePolynomial::one(sig.base_dim()),
        )
    }

    pub fn monomial(sig: &Model, mask: u64, beta: Vec<u32>, coeff: BasePolynomial) -> Self {
        assert_eq!(beta.len(), sig.base_dim());
        assert!(
            mask == 0 || (64 - mask.leading_zeros() as usize) <= sig.fiber_rank(),
            "odd index outside fiber rank"
        );
        let mut out = Self::zero(sig);
        out.insert_add((mask, beta), coeff);
        out
    }

    pub fn model(&self) -> &Model {
        &self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &BasePolynomial)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn insert_add(&mut self, key: TermKey, value: BasePolynomial) {
        if value.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &value;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(&self.sig);
        for (key, f) in &self.terms {
            out.insert_add(key.clone(), f.scale(s));
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        same_model(&self.sig, &rhs.sig)?;
        let mut out = self.clone();
        for (key, f) in &rhs.terms {
            out.insert_add(key.clone(), f.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::from_int(-1))
    }

    /// Graded commutative product.
    pub fn product(&self, rhs: &Self) -> Result<Self> {
        same_model(&self.sig, &rhs.sig)?;
        let mut out = Self::zero(&self.sig);
        for ((mask1, beta1), f1) in &self.terms {
            for ((mask2, beta2), f2) in &rhs.terms {
                if mask1 & mask2 != 0 {
                    continue;
                }
                let sign = merge_sign(*mask1, *mask2);
                let beta: Vec<u32> = beta1.iter().zip(beta2).map(|(x, y)| x + y).collect();
                let coeff = (f1 * f2).scale(&Scalar::from_int(sign));
                out.insert_add((mask1 | mask2, beta), coeff);
            }
        }
        Ok(out)
    }

    /// Euler degree of a single term key.
    pub fn term_degree(key: &TermKey) -> u32 {
        key.0.count_ones() + 2 * key.1.iter().sum::<u32>()
    }

    /// Splits into Euler homogeneous components, keyed by degree.
    pub fn euler_decompose(&self) -> BTreeMap<u32, GradedFunction> {
        let mut out: BTreeMap<u32, GradedFunction> = BTreeMap::new();
        for (key, f) in &self.terms {
            let deg = Self::term_degree(key);
            out.entry(deg)
                .or_insert_with(|| Self::zero(&self.sig))
                .insert_add(key.clone(), f.clone());
        }
        out
    }

    /// The component of exact Euler degree k.
    pub fn euler_component(&self, k: u32) -> GradedFunction {
        let mut out = Self::zero(&self.sig);
        for (key, f) in &self.terms {
            if Self::term_degree(key) == k {
                out.insert_add(key.clone(), f.clone());
            }
        }
        out
    }

    /// Some(degree) when every term has the same Euler degree. Zero counts
    /// as homogeneous of any degree and reports None here.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(Self::term_degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Self::term_degree).max().unwrap_or(0)
    }

    /// Splits into (even, odd) parity parts.
    pub fn parity_decompose(&self) -> (GradedFunction, GradedFunction) {
        let mut even = Self::zero(&self.sig);
        let mut odd = Self::zero(&self.sig);
        for (key, f) in &self.terms {
            if key.0.count_ones() % 2 == 0 {
                even.insert_add(key.clone(), f.clone());
            } else {
                odd.insert_add(key.clone(), f.clone());
            }
        }
        (even, odd)
    }

    /// Some(0) or Some(1) when parity homogeneous, None otherwise.
    pub fn parity(&self) -> Option<u8> {
        let mut parities = self.terms.keys().map(|k| (k.0.count_ones() % 2) as u8);
        let first = parities.next()?;
        parities.all(|p| p == first).then_some(first)
    }

    /// d/dx^i applied to every coefficient.
    pub fn partial_x(&self, i: usize) -> Result<Self> {
        self.sig.check_coordinate(i)?;
        let mut out = Self::zero(&self.sig);
        for (key, f) in &self.terms {
            out.insert_add(key.clone(), f.partial(i)?);
        }
        Ok(out)
    }

    /// d/dp_i, an even derivation.
    pub fn partial_p(&self, i: usize) -> Result<Self> {
        self.sig.check_coordinate(i)?;
        let mut out = Self::zero(&self.sig);
        for ((mask, beta), f) in &self.terms {
            let k = beta[i - 1];
            if k == 0 {
                continue;
            }
            let mut beta2 = beta.clone();
            beta2[i - 1] = k - 1;
            out.insert_add((*mask, beta2), f.scale(&Scalar::from_int(k as i64)));
        }
        Ok(out)
    }

    /// Left derivative with respect to xi_a: xi_a is moved to the front of
    /// the ascending monomial, picking up one sign per smaller index, then
    /// removed.
    pub fn partial_xi(&self, a: usize) -> Result<Self> {
        self.sig.check_fiber(a)?;
        let bit = 1u64 << (a - 1);
        let mut out = Self::zero(&self.sig);
        for ((mask, beta), f) in &self.terms {
            if mask & bit == 0 {
                continue;
            }
            let below = (mask & (bit - 1)).count_ones();
            let sign = if below % 2 == 0 { 1 } else { -1 };
            out.insert_add(
                (mask & !bit, beta.clone()),
                f.scale(&Scalar::from_int(sign)),
            );
        }
        Ok(out)
    }

    /// The degree -2 Poisson bracket.
    ///
    /// Closed formula, with d/dxi the left derivative above and |F| the
    /// term parity of the first argument:
    ///
    /// ```text
    /// {F,G} = sum_i dF/dp_i dG/dx^i - dF/dx^i dG/dp_i
    ///       + (-1)^(|F|+1) sum_{a,b} g_ab (dF/dxi_a)(dG/dxi_b)
    /// ```
    ///
    /// The generator table and the skew, Leibniz and Jacobi axioms pin this
    /// formula uniquely; the test suite checks all of them exactly.
    pub fn poisson(&self, rhs: &Self) -> Result<Self> {
        same_model(&self.sig, &rhs.sig)?;
        let sig = &self.sig;
        let mut out = Self::zero(sig);
        for i in 1..=sig.base_dim() {
            let fp = self.partial_p(i)?;
            let gx = rhs.partial_x(i)?;
            out = out.add(&fp.product(&gx)?)?;
            let fx = self.partial_x(i)?;
            let gp = rhs.partial_p(i)?;
            out = out.sub(&fx.product(&gp)?)?;
        }
        let (even, odd) = self.parity_decompose();
        for (part, sign) in [(even, -1i64), (odd, 1i64)] {
            if part.is_zero() {
                continue;
            }
            for a in 1..=sig.fiber_rank() {
                let da = part.partial_xi(a)?;
                if da.is_zero() {
                    continue;
                }
                for b in 1..=sig.fiber_rank() {
                    let gab = sig.g(a, b);
                    if gab.is_zero() {
                        continue;
                    }
                    let db = rhs.partial_xi(b)?;
                    let piece = da.product(&db)?.scale(&(gab * &Scalar::from_int(sign)));
                    out = out.add(&piece)?;
                }
            }
        }
        Ok(out)
    }

    /// The antilinear antiautomorphism with tau(f) = conj f, tau(p) = p,
    /// tau(xi_a) = i xi_a. On a k fold xi monomial the reversal and the
    /// factors of i combine to i^k (-1)^(k(k-1)/2).
    pub fn tau(&self) -> Self {
        let mut out = Self::zero(&self.sig);
        for ((mask, beta), f) in &self.terms {
            let k = mask.count_ones() as i64;
            let mut factor = Scalar::i().pow((k % 4) as i32).expect("nonzero base");
            if (k * (k - 1) / 2) % 2 == 1 {
                factor = -factor;
            }
            out.insert_add((*mask, beta.clone()), f.conj().scale(&factor));
        }
        out
    }

    /// Componentwise complex conjugation of the coefficients; fixes the
    /// generators x, xi, p. A function is called real when this fixes it.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(&self.sig);
        for (key, f) in &self.terms {
            out.insert_add(key.clone(), f.conj());
        }
        out
    }

    /// True when no momentum variable appears.
    pub fn is_p_free(&self) -> bool {
        self.terms.keys().all(|(_, beta)| beta.iter().all(|&k| k == 0))
    }
}

impl fmt::Display for GradedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut sorted: Vec<(&TermKey, &BasePolynomial)> = self.terms.iter().collect();
        sorted.sort_by_key(|(key, _)| (Self::term_degree(key), (*key).clone()));
        let mut out = String::new();
        for (key, coeff) in sorted {
            let (neg, body) = format_graded_term(key, coeff);
            poly::push_term(&mut out, neg, &body);
        }
        f.write_str(&out)
    }
}

/// Renders one term, returning (is_negative, body).
fn format_graded_term(key: &TermKey, coeff: &BasePolynomial) -> (bool, String) {
    let (mask, beta) = key;
    let mut factors: Vec<String> = Vec::new();
    for a in 0..64 {
        if mask & (1u64 << a) != 0 {
            factors.push(format!("xi{}", a + 1));
        }
    }
    for (idx, &k) in beta.iter().enumerate() {
        if k == 1 {
            factors.push(format!("p{}", idx + 1));
        } else if k > 1 {
            factors.push(format!("p{}^{}", idx + 1, k));
        }
    }
    let mono = factors.join("*");
    if mono.is_empty() {
        let s = coeff.to_string();
        return if s.contains(' ') || coeff.terms().count() > 1 {
            (false, s)
        } else if let Some(rest) = s.strip_prefix('-') {
            (true, rest.to_string())
        } else {
            (false, s)
        };
    }
    if coeff.terms().count() == 1 {
        let (exps, sc) = coeff.terms().next().map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let poly_mono = poly::fmt_exponents(&exps);
        let (neg, cs) = poly::scalar_factor(&sc);
        let mut body = String::new();
        if cs != "1" {
            body.push_str(&cs);
        }
        if !poly_mono.is_empty() {
            if !body.is_empty() {
                body.push('*');
            }
            body.push_str(&poly_mono);
        }
        if !body.is_empty() {
            body.push('*');
        }
        body.push_str(&mono);
        (neg, body)
    } else {
        (false, format!("({coeff})*{mono}"))
    }
}

#[cfg(test)]
mod oracle {
    //! Bracket oracle that knows only the generator table and the axioms.
    //!
    //! A term is unfolded into a chain of generators; the bracket recurses
    //! with the second argument split by the Leibniz rule
    //! {F, G H} = {F, G} H + (-1)^((deg F - 2) |G|) G {F, H}
    //! and arguments swapped by graded skew symmetry whenever the first
    //! slot is composite. Only the table resolves generator pairs, so the
    //! closed formula in the parent module is never consulted.

    use super::*;

    #[derive(Clone, Copy, PartialEq)]
    pub enum Gen {
        X(usize),
        Xi(usize),
        P(usize),
    }

    impl Gen {
        fn degree(self) -> i64 {
            match self {
                Gen::X(_) => 0,
                Gen::Xi(_) => 1,
                Gen::P(_) => 2,
            }
        }

        fn to_fn(self, sig: &Model) -> GradedFunction {
            match self {
                Gen::X(i) => GradedFunction::x(sig, i).unwrap(),
                Gen::Xi(a) => GradedFunction::xi(sig, a).unwrap(),
                Gen::P(i) => GradedFunction::p(sig, i).unwrap(),
            }
        }
    }

    /// One scalar coefficient times an ordered generator word.
    pub type Word = (Scalar, Vec<Gen>);

    /// Unfolds a graded function into generator words, x factors first,
    /// then ascending xi factors, then p factors, matching the stored
    /// normal form so no extra signs appear.
    pub fn words(f: &GradedFunction) -> Vec<Word> {
        let mut out = Vec::new();
        for ((mask, beta), coeff) in f.terms() {
            for (exps, sc) in coeff.terms() {
                let mut word = Vec::new();
                for (i, &k) in exps.iter().enumerate() {
                    for _ in 0..k {
                        word.push(Gen::X(i + 1));
                    }
                }
                for a in 0..64 {
                    if mask & (1u64 << a) != 0 {
                        word.push(Gen::Xi(a as usize + 1));
                    }
                }
                for (i, &k) in beta.iter().enumerate() {
                    for _ in 0..k {
                        word.push(Gen::P(i + 1));
                    }
                }
                out.push((sc.clone(), word));
            }
        }
        out
    }

    fn table(sig: &Model, a: Gen, b: Gen) -> GradedFunction {
        match (a, b) {
            (Gen::P(i), Gen::X(j)) => {
                // {p_i, x^j} = delta_ij
                if i == j {
                    GradedFunction::one(sig)
                } else {
                    GradedFunction::zero(sig)
                }
            }
            (Gen::X(j), Gen::P(i)) => table(sig, Gen::P(i), Gen::X(j)).neg(),
            (Gen::Xi(a), Gen::Xi(b)) => GradedFunction::constant(sig, sig.g(a, b).clone()),
            _ => GradedFunction::zero(sig),
        }
    }

    fn word_fn(sig: &Model, word: &[Gen]) -> GradedFunction {
        let mut acc = GradedFunction::one(sig);
        for g in word {
            acc = acc.product(&g.to_fn(sig)).unwrap();
        }
        acc
    }

    fn word_degree(word: &[Gen]) -> i64 {
        word.iter().map(|g| g.degree()).sum()
    }

    fn word_parity(word: &[Gen]) -> i64 {
        word.iter().filter(|g| matches!(g, Gen::Xi(_))).count() as i64 % 2
    }

    /// {word_f, word_g} with both slots generator words. A composite
    /// second slot is split by the Leibniz rule; an atomic second slot
    /// under a composite first slot is handled by one skew flip, after
    /// which Leibniz takes over, so the recursion terminates.
    fn bracket_words(sig: &Model, f: &[Gen], g: &[Gen]) -> GradedFunction {
        if g.is_empty() || f.is_empty() {
            return GradedFunction::zero(sig);
        }
        if g.len() > 1 {
            let g0 = &g[..1];
            let rest = &g[1..];
            let left = bracket_words(sig, f, g0)
                .product(&word_fn(sig, rest))
                .unwrap();
            let sign = if ((word_degree(f) - 2) * word_parity(g0)) % 2 != 0 {
                -1
            } else {
                1
            };
            let right = word_fn(sig, g0)
                .product(&bracket_words(sig, f, rest))
                .unwrap()
                .scale(&Scalar::from_int(sign));
            return left.add(&right).unwrap();
        }
        if f.len() == 1 {
            return table(sig, f[0], g[0]);
        }
        // composite first slot over an atomic second: graded skew symmetry
        let flipped = bracket_words(sig, g, f);
        let s = (word_degree(f) - 2) * (word_degree(g) - 2);
        let sign = if s % 2 != 0 { 1 } else { -1 };
        flipped.scale(&Scalar::from_int(sign))
    }

    pub fn bracket(f: &GradedFunction, g: &GradedFunction) -> GradedFunction {
        let sig = f.model();
        let mut out = GradedFunction::zero(sig);
        for (cf, wf) in words(f) {
            for (cg, wg) in words(g) {
                let piece = bracket_words(sig, &wf, &wg).scale(&(&cf * &cg));
                out = out.add(&piece).unwrap();
            }
        }
        out
    }
}
