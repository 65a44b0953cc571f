//! Spinor differential operators in the flat model.
//!
//! A [`SpinorOperator`] is a sum of normal ordered terms
//! coefficient(x) * c_A * d^beta, Clifford word in the middle, derivatives
//! on the right. Composition rewrites with three flat commutation rules:
//! derivatives past coefficients by the Leibniz rule, derivatives past
//! Clifford generators freely, Clifford words by normal ordering. The
//! filtration order of a term is |A| + 2|beta| and the principal symbol of
//! the top layer lands in the graded algebra with a factor sqrt2 per
//! Clifford generator.
//!
//! Operators act on spinor valued polynomial sections through a Witt
//! frame, and agreement on the finite monomial section family is a
//! complete equality oracle for operators of bounded derivative order.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::binomial;

use crate::clifford::{CliffordElement, WittFrame};
use crate::error::{Error, Result};
use crate::graded::GradedFunction;
use crate::poly::{self, BasePolynomial};
use crate::scalar::Scalar;
use crate::space::{same_model, Model};

/// Key of one normal ordered term: Clifford index mask and derivative
/// multi index.
pub type OpKey = (u64, Vec<u32>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinorOperator {
    sig: Model,
    terms: BTreeMap<OpKey, BasePolynomial>,
}

/// A spinor valued polynomial section: one polynomial per exterior basis
/// state of the Witt half frame.
pub type Section = Vec<BasePolynomial>;

impl SpinorOperator {
    pub fn zero(sig: &Model) -> Self {
        SpinorOperator {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(sig: &Model) -> Self {
        Self::from_poly(sig, BasePolynomial::one(sig.base_dim()))
    }

    pub fn scalar(sig: &Model, s: Scalar) -> Self {
        Self::from_poly(sig, BasePolynomial::constant(sig.base_dim(), s))
    }

    /// Multiplication by a base polynomial.
    pub fn from_poly(sig: &Model, f: BasePolynomial) -> Self {
        let mut out = Self::zero(sig);
        out.insert_add((0, vec![0; sig.base_dim()]), f);
        out
    }

    /// The Clifford generator c_a as an operator.
    pub fn clifford_gen(sig: &Model, a: usize) -> Result<Self> {
        sig.check_fiber(a)?;
        Ok(Self::monomial(
            sig,
            1u64 << (a - 1),
            vec![0; sig.base_dim()],
            BasePolynomial::one(sig.base_dim()),
        ))
    }

    /// The flat derivative d/dx^i.
    pub fn derivative(sig: &Model, i: usize) -> Result<Self> {
        sig.check_coordinate(i)?;
        let mut beta = vec![0u32; sig.base_dim()];
        beta[i - 1] = 1;
        Ok(Self::monomial(sig, 0, beta, BasePolynomial::one(sig.base_dim())))
    }

    /// Lifts a Clifford element to the operator acting by left module
    /// multiplication.
    pub fn from_clifford(u: &CliffordElement) -> Self {
        let sig = u.model();
        let mut out = Self::zero(sig);
        for (mask, coeff) in u.terms() {
            out.insert_add((*mask, vec![0; sig.base_dim()]), coeff.clone());
        }
        out
    }

    pub fn monomial(sig: &Model, mask: u64, beta: Vec<u32>, coeff: BasePolynomial) -> Self {
        assert_eq!(beta.len(), sig.base_dim());
        assert!(
            mask == 0 || (64 - mask.leading_zeros() as usize) <= sig.fiber_rank(),
            "generator index outside fiber rank"
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

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &BasePolynomial)> {
        self.terms.iter()
    }

    pub(crate) fn insert_add(&mut self, key: OpKey, value: BasePolynomial) {
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

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(&self.sig);
        for (key, f) in &self.terms {
            out.insert_add(key.clone(), f.scale(s));
        }
        out
    }

    /// Filtration order |A| + 2|beta| of a term key.
    pub fn term_order(key: &OpKey) -> u32 {
        key.0.count_ones() + 2 * key.1.iter().sum::<u32>()
    }

    /// Max term order; None for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(Self::term_order).max()
    }

    /// Some(0) or Some(1) when all terms share the Clifford parity.
    pub fn parity(&self) -> Option<u8> {
        let mut parities = self.terms.keys().map(|k| (k.0.count_ones() % 2) as u8);
        let first = parities.next()?;
        parities.all(|p| p == first).then_some(first)
    }

    pub fn parity_decompose(&self) -> (Self, Self) {
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

    /// Operator composition in normal form.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        same_model(&self.sig, &rhs.sig)?;
        let sig = &self.sig;
        let mut out = Self::zero(sig);
        for ((mask1, beta1), f1) in &self.terms {
            for ((mask2, beta2), f2) in &rhs.terms {
                // d^beta1 past f2 by the Leibniz rule
                for gamma in sub_indices(beta1) {
                    let mut binom_factor = 1u64;
                    for (b, g) in beta1.iter().zip(&gamma) {
                        binom_factor *= binomial(*b as u64, *g as u64);
                    }
                    let mut df2 = f2.clone();
                    for (i, &g) in gamma.iter().enumerate() {
                        for _ in 0..g {
                            df2 = df2.partial(i + 1)?;
                        }
                    }
                    if df2.is_zero() {
                        continue;
                    }
                    let coeff = (f1 * &df2).scale(&Scalar::from_int(binom_factor as i64));
                    // Clifford normal ordering of c_{mask1} c_{mask2}
                    let cl = CliffordElement::monomial(sig, *mask1, BasePolynomial::one(sig.base_dim()))
                        .product(&CliffordElement::monomial(
                            sig,
                            *mask2,
                            BasePolynomial::one(sig.base_dim()),
                        ))?;
                    let beta: Vec<u32> = beta1
                        .iter()
                        .zip(&gamma)
                        .zip(beta2)
                        .map(|((b, g), b2)| b - g + b2)
                        .collect();
                    for (mask, cl_coeff) in cl.terms() {
                        out.insert_add((*mask, beta.clone()), &coeff * cl_coeff);
                    }
                }
            }
        }
        Ok(out)
    }

    /// The graded commutator [A, B] = A B - (-1)^(|A||B|) B A, extended
    /// bilinearly over parity components.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        let (ae, ao) = self.parity_decompose();
        let (be, bo) = rhs.parity_decompose();
        let mut out = Self::zero(&self.sig);
        for (a, pa) in [(ae, 0u8), (ao, 1u8)] {
            if a.is_zero() {
                continue;
            }
            for (b, pb) in [(&be, 0u8), (&bo, 1u8)] {
                if b.is_zero() {
                    continue;
                }
                let ab = a.compose(b)?;
                let ba = b.compose(&a)?;
                let piece = if pa * pb == 1 { ab.add(&ba)? } else { ab.sub(&ba)? };
                out = out.add(&piece)?;
            }
        }
        Ok(out)
    }

    /// The principal symbol of the top filtration layer: each top term
    /// coeff c_A d^beta maps to coeff (sqrt2)^|A| xi_A p^beta.
    pub fn principal_symbol(&self) -> Result<GradedFunction> {
        let Some(k) = self.order() else {
            return Err(Error::Domain(
                "the zero operator has no principal symbol".into(),
            ));
        };
        Ok(self.symbol_layer(k))
    }

    /// The symbol of the order k layer (zero when the layer is empty).
    pub fn symbol_layer(&self, k: u32) -> GradedFunction {
        let mut out = GradedFunction::zero(&self.sig);
        for ((mask, beta), f) in &self.terms {
            if Self::term_order(&(*mask, beta.clone())) != k {
                continue;
            }
            let weight = Scalar::sqrt2_pow(mask.count_ones() as i64);
            out = out
                .add(&GradedFunction::monomial(
                    &self.sig,
                    *mask,
                    beta.clone(),
                    f.scale(&weight),
                ))
                .expect("same model");
        }
        out
    }

    /// The formal adjoint: antilinear antiautomorphism with f* = conj f,
    /// c_a* = c_a, (d_i)* = -d_i. Each term is rebuilt as the composition
    /// of its reversed factors.
    pub fn adjoint(&self) -> Result<Self> {
        let sig = &self.sig;
        let mut out = Self::zero(sig);
        for ((mask, beta), f) in &self.terms {
            // (f c_A d^beta)* = (-1)^|beta| d^beta (f c_A)*, and the
            // Clifford adjoint already conjugates the coefficient
            let cl_adj = CliffordElement::monomial(sig, *mask, f.clone()).adjoint();
            let mid = Self::from_clifford(&cl_adj);
            let deriv = Self::monomial(sig, 0, beta.clone(), BasePolynomial::one(sig.base_dim()));
            let total: u32 = beta.iter().sum();
            let sign = if total % 2 == 1 { -1 } else { 1 };
            out = out.add(&deriv.compose(&mid)?.scale(&Scalar::from_int(sign)))?;
        }
        Ok(out)
    }

    /// Complex conjugation: antilinear algebra morphism fixing c_a and
    /// d_i. An operator is real when fixed by it.
    pub fn op_conjugate(&self) -> Self {
        let mut out = Self::zero(&self.sig);
        for (key, f) in &self.terms {
            out.insert_add(key.clone(), f.conj());
        }
        out
    }

    /// Applies the operator to a spinor valued polynomial section in the
    /// given Witt frame.
    pub fn apply(&self, section: &Section, frame: &WittFrame) -> Result<Section> {
        same_model(&self.sig, frame.model())?;
        let dim = frame.dim();
        if section.len() != dim {
            return Err(Error::DimensionMismatch {
                left: section.len(),
                right: dim,
            });
        }
        let n = self.sig.base_dim();
        let mut out: Section = vec![BasePolynomial::zero(n); dim];
        for ((mask, beta), f) in &self.terms {
            // derivatives first
            let mut derived: Section = section.clone();
            for (i, &k) in beta.iter().enumerate() {
                for _ in 0..k {
                    for comp in derived.iter_mut() {
                        *comp = comp.partial(i + 1)?;
                    }
                }
            }
            if derived.iter().all(BasePolynomial::is_zero) {
                continue;
            }
            // then the Clifford word, then the coefficient
            let word = frame.word_matrix(*mask)?;
            for (row, out_comp) in out.iter_mut().enumerate() {
                let mut acc = BasePolynomial::zero(n);
                for (col, der_comp) in derived.iter().enumerate() {
                    let w = word.at(row, col);
                    if w.is_zero() || der_comp.is_zero() {
                        continue;
                    }
                    acc += &der_comp.scale(w);
                }
                if !acc.is_zero() {
                    *out_comp += &(&acc * f);
                }
            }
        }
        Ok(out)
    }

    /// The vacuum section (constant 1 in the empty wedge component).
    pub fn vacuum(sig: &Model, frame: &WittFrame) -> Section {
        let mut s = vec![BasePolynomial::zero(sig.base_dim()); frame.dim()];
        s[0] = BasePolynomial::one(sig.base_dim());
        s
    }

    /// Complete equality oracle for operators of bounded derivative
    /// order: agreement on all sections x^gamma e_S with |gamma| up to
    /// the larger total derivative order.
    pub fn agree_on_sections(&self, rhs: &Self, frame: &WittFrame) -> Result<bool> {
        same_model(&self.sig, &rhs.sig)?;
        let n = self.sig.base_dim();
        let max_beta = self
            .terms
            .keys()
            .chain(rhs.terms.keys())
            .map(|(_, beta)| beta.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        for gamma in bounded_multi_indices(n, max_beta) {
            let mono = BasePolynomial::monomial(n, gamma.clone(), Scalar::one());
            for s in 0..frame.dim() {
                let mut section = vec![BasePolynomial::zero(n); frame.dim()];
                section[s] = mono.clone();
                if self.apply(&section, frame)? != rhs.apply(&section, frame)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// All multi indices componentwise at most `beta`.
pub(crate) fn sub_indices(beta: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &b in beta {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for prefix in &out {
            for k in 0..=b {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// All multi indices of length n with total degree at most `max_total`.
pub(crate) fn bounded_multi_indices(n: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, left: u32) {
        if pos == current.len() {
            out.push(current.clone());
            return;
        }
        for k in 0..=left {
            current[pos] = k;
            rec(out, current, pos + 1, left - k);
        }
        current[pos] = 0;
    }
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    rec(&mut out, &mut current, 0, max_total);
    out
}

impl fmt::Display for SpinorOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut sorted: Vec<(&OpKey, &BasePolynomial)> = self.terms.iter().collect();
        sorted.sort_by_key(|(key, _)| (Self::term_order(key), (*key).clone()));
        let mut out = String::new();
        for (key, coeff) in sorted {
            let (neg, body) = format_operator_term(key, coeff);
            poly::push_term(&mut out, neg, &body);
        }
        f.write_str(&out)
    }
}

fn format_operator_term(key: &OpKey, coeff: &BasePolynomial) -> (bool, String) {
    let (mask, beta) = key;
    let mut factors: Vec<String> = Vec::new();
    for a in 0..64 {
        if mask & (1u64 << a) != 0 {
            factors.push(format!("c{}", a + 1));
        }
    }
    for (idx, &k) in beta.iter().enumerate() {
        if k == 1 {
            factors.push(format!("d{}", idx + 1));
        } else if k > 1 {
            factors.push(format!("d{}^{}", idx + 1, k));
        }
    }
    let mono = factors.join("*");
    if mono.is_empty() {
        let s = coeff.to_string();
        return if coeff.terms().count() > 1 {
            (false, s)
        } else if let Some(rest) = s.strip_prefix('-') {
            (true, rest.to_string())
        } else {
            (false, s)
        };
    }
    if coeff.terms().count() == 1 {
        let (exps, sc) = coeff
            .terms()
            .next()
            .map(|(e, c)| (e.clone(), c.clone()))
            .unwrap();
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
