//! The Clifford algebra of the fiber, the Chevalley map, and the Witt
//! frame spinor representation.
//!
//! Generators c_a obey c_a c_b + c_b c_a = 2 g_ab. Elements are kept in
//! normal form, ordered products c_A over strictly increasing index sets,
//! with polynomial coefficients. [`chevalley`] quantizes a momentum free
//! graded function by antisymmetrization and [`cl_symbol`] inverts it by
//! peeling the top filtration layer. A [`WittFrame`] turns elements into
//! exact matrices acting on the exterior algebra of the isotropic half
//! frame, which is the independent oracle for every operator identity.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::graded::GradedFunction;
use crate::matrix::{Matrix, PolyMatrix};
use crate::poly::{self, BasePolynomial};
use crate::scalar::Scalar;
use crate::space::{same_model, Model};

/// An element of the Clifford algebra with polynomial coefficients,
/// keyed by the index set of the normal ordered generator word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordElement {
    sig: Model,
    terms: BTreeMap<u64, BasePolynomial>,
}

impl CliffordElement {
    pub fn zero(sig: &Model) -> Self {
        CliffordElement {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(sig: &Model) -> Self {
        Self::scalar(sig, Scalar::one())
    }

    pub fn scalar(sig: &Model, value: Scalar) -> Self {
        Self::monomial(
            sig,
            0,
            BasePolynomial::constant(sig.base_dim(), value),
        )
    }

    /// The generator c_a, 1-indexed.
    pub fn generator(sig: &Model, a: usize) -> Result<Self> {
        sig.check_fiber(a)?;
        Ok(Self::monomial(
            sig,
            1u64 << (a - 1),
            BasePolynomial::one(sig.base_dim()),
        ))
    }

    pub fn monomial(sig: &Model, mask: u64, coeff: BasePolynomial) -> Self {
        assert_eq!(coeff.vars(), sig.base_dim());
        assert!(
            mask == 0 || (64 - mask.leading_zeros() as usize) <= sig.fiber_rank(),
            "generator index outside fiber rank"
        );
        let mut out = Self::zero(sig);
        out.insert_add(mask, coeff);
        out
    }

    pub fn model(&self) -> &Model {
        &self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u64, &BasePolynomial)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, mask: u64, coeff: BasePolynomial) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mask) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        same_model(&self.sig, &rhs.sig)?;
        let mut out = self.clone();
        for (mask, f) in &rhs.terms {
            out.insert_add(*mask, f.clone());
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
        for (mask, f) in &self.terms {
            out.insert_add(*mask, f.scale(s));
        }
        out
    }

    pub fn scale_poly(&self, p: &BasePolynomial) -> Self {
        let mut out = Self::zero(&self.sig);
        for (mask, f) in &self.terms {
            out.insert_add(*mask, f * p);
        }
        out
    }

    /// Highest filtration degree |A| present, 0 for the zero element.
    pub fn filtration_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.count_ones())
            .max()
            .unwrap_or(0)
    }

    /// Some(0) or Some(1) when every word length has the same parity.
    pub fn parity(&self) -> Option<u8> {
        let mut parities = self.terms.keys().map(|m| (m.count_ones() % 2) as u8);
        let first = parities.next()?;
        parities.all(|p| p == first).then_some(first)
    }

    pub fn parity_decompose(&self) -> (Self, Self) {
        let mut even = Self::zero(&self.sig);
        let mut odd = Self::zero(&self.sig);
        for (mask, f) in &self.terms {
            if mask.count_ones() % 2 == 0 {
                even.insert_add(*mask, f.clone());
            } else {
                odd.insert_add(*mask, f.clone());
            }
        }
        (even, odd)
    }

    /// Normal ordered product.
    pub fn product(&self, rhs: &Self) -> Result<Self> {
        same_model(&self.sig, &rhs.sig)?;
        let mut out = Self::zero(&self.sig);
        for (mask1, f1) in &self.terms {
            for (mask2, f2) in &rhs.terms {
                let coeff = f1 * f2;
                // multiply c_{mask1} by the generators of mask2, ascending
                let mut acc: Vec<(u64, Scalar)> = vec![(*mask1, Scalar::one())];
                let mut rest = *mask2;
                while rest != 0 {
                    let b = rest.trailing_zeros() as usize + 1;
                    rest &= rest - 1;
                    let mut next = Vec::new();
                    for (mask, s) in &acc {
                        for (m2, s2) in right_mul_generator(&self.sig, *mask, b) {
                            next.push((m2, s * &s2));
                        }
                    }
                    acc = merge_like_terms(next);
                }
                for (mask, s) in acc {
                    out.insert_add(mask, coeff.scale(&s));
                }
            }
        }
        Ok(out)
    }

    /// The super commutator [u, v] = uv - (-1)^(|u||v|) vu, extended
    /// bilinearly over parity components.
    pub fn super_commutator(&self, rhs: &Self) -> Result<Self> {
        let (ue, uo) = self.parity_decompose();
        let (ve, vo) = rhs.parity_decompose();
        let mut out = Self::zero(&self.sig);
        for (u, pu) in [(ue, 0u8), (uo, 1u8)] {
            if u.is_zero() {
                continue;
            }
            for (v, pv) in [(&ve, 0u8), (&vo, 1u8)] {
                if v.is_zero() {
                    continue;
                }
                let uv = u.product(v)?;
                let vu = v.product(&u)?;
                let piece = if pu * pv == 1 {
                    uv.add(&vu)?
                } else {
                    uv.sub(&vu)?
                };
                out = out.add(&piece)?;
            }
        }
        Ok(out)
    }

    /// The adjoint antiautomorphism: generators are fixed, coefficients
    /// are conjugated, words are reversed. The reversed word is multiplied
    /// out in the algebra, which matters for non diagonal metrics where
    /// reordering creates contraction terms.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(&self.sig);
        for (mask, f) in &self.terms {
            let mut word = Self::one(&self.sig);
            for a in (1..=self.sig.fiber_rank()).rev() {
                if mask & (1u64 << (a - 1)) != 0 {
                    let gen = Self::generator(&self.sig, a).expect("index in range");
                    word = word.product(&gen).expect("same model");
                }
            }
            out = out
                .add(&word.scale_poly(&f.conj()))
                .expect("same model");
        }
        out
    }
}

/// c_{mask} * c_b as a combination of normal ordered words, by moving c_b
/// left past every larger index with the rewrite c_t c_b = -c_b c_t + 2 g_tb.
fn right_mul_generator(sig: &Model, mask: u64, b: usize) -> Vec<(u64, Scalar)> {
    let bit = 1u64 << (b - 1);
    let higher = mask >> b;
    if higher == 0 {
        return if mask & bit == 0 {
            vec![(mask | bit, Scalar::one())]
        } else {
            vec![(mask & !bit, sig.g(b, b).clone())]
        };
    }
    let top = 64 - mask.leading_zeros() as usize;
    let top_bit = 1u64 << (top - 1);
    let rest = mask & !top_bit;
    let mut out = Vec::new();
    for (m2, s) in right_mul_generator(sig, rest, b) {
        debug_assert_eq!(m2 & top_bit, 0);
        out.push((m2 | top_bit, -s));
    }
    let cross = sig.g(top, b) * &Scalar::from_int(2);
    if !cross.is_zero() {
        out.push((rest, cross));
    }
    out
}

fn merge_like_terms(items: Vec<(u64, Scalar)>) -> Vec<(u64, Scalar)> {
    let mut map: BTreeMap<u64, Scalar> = BTreeMap::new();
    for (mask, s) in items {
        let entry = map.entry(mask).or_insert_with(Scalar::zero);
        *entry += &s;
    }
    map.into_iter().filter(|(_, s)| !s.is_zero()).collect()
}

/// The Chevalley quantization of a momentum free graded function:
/// xi monomials are antisymmetrized generator words,
/// gamma(xi_A) = (1/k!) sum over permutations of sgn * c word.
pub fn chevalley(f: &GradedFunction) -> Result<CliffordElement> {
    if !f.is_p_free() {
        return Err(Error::Domain(
            "chevalley quantization needs a momentum free input".into(),
        ));
    }
    let sig = f.model();
    let mut out = CliffordElement::zero(sig);
    for ((mask, _), coeff) in f.terms() {
        out = out.add(&gamma_monomial(sig, *mask)?.scale_poly(coeff))?;
    }
    Ok(out)
}

fn gamma_monomial(sig: &Model, mask: u64) -> Result<CliffordElement> {
    let indices: Vec<usize> = (1..=sig.fiber_rank())
        .filter(|a| mask & (1u64 << (a - 1)) != 0)
        .collect();
    let k = indices.len();
    if k == 0 {
        return Ok(CliffordElement::one(sig));
    }
    let mut sum = CliffordElement::zero(sig);
    for perm in indices.iter().permutations(k) {
        let mut word = CliffordElement::one(sig);
        for &&a in &perm {
            word = word.product(&CliffordElement::generator(sig, a)?)?;
        }
        if permutation_sign(&perm.iter().map(|&&a| a).collect::<Vec<_>>()) < 0 {
            word = word.neg();
        }
        sum = sum.add(&word)?;
    }
    let mut kfact = Scalar::one();
    for j in 2..=k as i64 {
        kfact *= &Scalar::from_int(j);
    }
    Ok(sum.scale(&kfact.inverse().expect("factorial is nonzero")))
}

fn permutation_sign(perm: &[usize]) -> i64 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The inverse of [`chevalley`]: the top filtration layer of a normal
/// ordered element matches its wedge symbol, so peel it, subtract its
/// quantization and recurse downward.
pub fn cl_symbol(u: &CliffordElement) -> Result<GradedFunction> {
    let sig = u.model().clone();
    let mut out = GradedFunction::zero(&sig);
    let mut work = u.clone();
    while !work.is_zero() {
        let top = work.filtration_degree();
        let mut layer = GradedFunction::zero(&sig);
        for (mask, coeff) in work.terms() {
            if mask.count_ones() == top {
                layer = layer.add(&GradedFunction::monomial(
                    &sig,
                    *mask,
                    vec![0; sig.base_dim()],
                    coeff.clone(),
                ))?;
            }
        }
        out = out.add(&layer)?;
        work = work.sub(&chevalley(&layer)?)?;
        debug_assert!(
            work.is_zero() || work.filtration_degree() < top,
            "peeling must strictly lower the filtration"
        );
    }
    Ok(out)
}

/// An isotropic splitting of the fiber: h = m/2 pairs (e_alpha, f^alpha)
/// with both spans isotropic and the pairing Gram matrix invertible.
///
/// The spinor module is the exterior algebra on w^1..w^h; f^alpha acts by
/// exterior multiplication and e_alpha by contraction scaled with twice
/// the Gram matrix, which enforces the generating relation
/// c(u) c(v) + c(v) c(u) = 2 g(u, v) for any Gram normalization.
#[derive(Debug, Clone)]
pub struct WittFrame {
    sig: Model,
    half: usize,
    /// row r < half: components of e_{r+1}; row half + r: components of f^{r+1}
    basis: Matrix,
    gram: Matrix,
    /// frame_in_witt[a-1][r]: coefficient of witt vector r in xi_a
    frame_in_witt: Matrix,
}

impl WittFrame {
    pub fn new(sig: &Model, e: Vec<Vec<Scalar>>, f: Vec<Vec<Scalar>>) -> Result<Self> {
        let m = sig.fiber_rank();
        if m % 2 != 0 {
            return Err(Error::OddRank { rank: m });
        }
        let half = m / 2;
        if e.len() != half || f.len() != half {
            return Err(Error::DimensionMismatch {
                left: e.len() + f.len(),
                right: m,
            });
        }
        let pair = |u: &[Scalar], v: &[Scalar]| -> Scalar {
            let mut acc = Scalar::zero();
            for a in 1..=m {
                for b in 1..=m {
                    acc += &(&(&u[a - 1] * &v[b - 1]) * sig.g(a, b));
                }
            }
            acc
        };
        for alpha in 0..half {
            for beta in 0..half {
                if !pair(&e[alpha], &e[beta]).is_zero() {
                    return Err(Error::NotIsotropic {
                        a: alpha + 1,
                        b: beta + 1,
                    });
                }
                if !pair(&f[alpha], &f[beta]).is_zero() {
                    return Err(Error::NotIsotropic {
                        a: alpha + 1,
                        b: beta + 1,
                    });
                }
            }
        }
        let mut gram = Matrix::zero(half, half);
        for alpha in 0..half {
            for beta in 0..half {
                gram.set(alpha, beta, pair(&e[alpha], &f[beta]));
            }
        }
        gram.inverse().map_err(|_| Error::SingularMatrix)?;
        let mut basis = Matrix::zero(m, m);
        for (r, v) in e.iter().chain(f.iter()).enumerate() {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    left: v.len(),
                    right: m,
                });
            }
            for (a, comp) in v.iter().enumerate() {
                basis.set(r, a, comp.clone());
            }
        }
        // xi = basis^T-solve: witt row vectors w_r = sum_a basis[r][a] xi_a,
        // so the frame vectors expand as xi_a = sum_r inv[a][r] w_r.
        let frame_in_witt = basis.inverse()?;
        Ok(WittFrame {
            sig: sig.clone(),
            half,
            basis,
            gram,
            frame_in_witt,
        })
    }

    /// Frame for metrics of recognized shape: the split half pairing
    /// g = [[0, I/2], [I/2, 0]], or a diagonal metric whose consecutive
    /// ratios d_{2a-1}/d_{2a} have square roots in Q(sqrt2).
    pub fn standard(sig: &Model) -> Result<Self> {
        let m = sig.fiber_rank();
        if m % 2 != 0 {
            return Err(Error::OddRank { rank: m });
        }
        let half = m / 2;
        let g = sig.g_matrix();
        // split shape: zero diagonal blocks, scalar times identity off them
        let pair = g.at(0, half).clone();
        let mut is_split = !pair.is_zero();
        for a in 0..m {
            for b in 0..m {
                let expect = if a + half == b || b + half == a {
                    pair.clone()
                } else {
                    Scalar::zero()
                };
                if *g.at(a, b) != expect {
                    is_split = false;
                }
            }
        }
        if is_split {
            let unit = |k: usize| -> Vec<Scalar> {
                let mut v = vec![Scalar::zero(); m];
                v[k] = Scalar::one();
                v
            };
            let e: Vec<Vec<Scalar>> = (0..half).map(unit).collect();
            let f: Vec<Vec<Scalar>> = (half..m).map(unit).collect();
            return Self::new(sig, e, f);
        }
        // diagonal shape
        let diagonal = (0..m).all(|a| (0..m).all(|b| a == b || g.at(a, b).is_zero()));
        if diagonal {
            let mut e = Vec::new();
            let mut f = Vec::new();
            for alpha in 0..half {
                let d1 = g.at(2 * alpha, 2 * alpha).clone();
                let d2 = g.at(2 * alpha + 1, 2 * alpha + 1).clone();
                let ratio = &d1 * &d2.inverse()?;
                let t = sqrt_in_field(&ratio).ok_or_else(|| {
                    Error::Domain(format!(
                        "no Witt frame recipe for diagonal ratio {ratio}; supply one explicitly"
                    ))
                })?;
                let it = &Scalar::i() * &t;
                let lam = (&d1 * &Scalar::from_int(2)).inverse()?;
                let mut ev = vec![Scalar::zero(); m];
                ev[2 * alpha] = Scalar::one();
                ev[2 * alpha + 1] = it.clone();
                let mut fv = vec![Scalar::zero(); m];
                fv[2 * alpha] = lam.clone();
                fv[2 * alpha + 1] = -(&it * &lam);
                e.push(ev);
                f.push(fv);
            }
            return Self::new(sig, e, f);
        }
        Err(Error::Domain(
            "no standard Witt frame for this metric; supply one explicitly".into(),
        ))
    }

    pub fn model(&self) -> &Model {
        &self.sig
    }

    pub fn half_rank(&self) -> usize {
        self.half
    }

    /// Spinor space dimension 2^(m/2).
    pub fn dim(&self) -> usize {
        1usize << self.half
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// The matrix of exterior multiplication by w^alpha (1-indexed).
    fn wedge_matrix(&self, alpha: usize) -> Matrix {
        let dim = self.dim();
        let bit = 1usize << (alpha - 1);
        let mut m = Matrix::zero(dim, dim);
        for s in 0..dim {
            if s & bit != 0 {
                continue;
            }
            let smaller = (s & (bit - 1)).count_ones();
            let sign = if smaller % 2 == 0 { 1 } else { -1 };
            m.set(s | bit, s, Scalar::from_int(sign));
        }
        m
    }

    /// The matrix of contraction with w_alpha (1-indexed).
    fn contraction_matrix(&self, alpha: usize) -> Matrix {
        let dim = self.dim();
        let bit = 1usize << (alpha - 1);
        let mut m = Matrix::zero(dim, dim);
        for s in 0..dim {
            if s & bit == 0 {
                continue;
            }
            let smaller = (s & (bit - 1)).count_ones();
            let sign = if smaller % 2 == 0 { 1 } else { -1 };
            m.set(s & !bit, s, Scalar::from_int(sign));
        }
        m
    }

    /// The action matrix of the Witt vector with row index r (0-based:
    /// e vectors first, then f vectors).
    fn witt_vector_matrix(&self, r: usize) -> Matrix {
        let dim = self.dim();
        if r < self.half {
            // c(e_alpha) = 2 sum_beta gram[alpha][beta] iota_beta
            let mut m = Matrix::zero(dim, dim);
            for beta in 1..=self.half {
                let coeff = self.gram.at(r, beta - 1) * &Scalar::from_int(2);
                if coeff.is_zero() {
                    continue;
                }
                m = &m + &self.contraction_matrix(beta).scale(&coeff);
            }
            m
        } else {
            self.wedge_matrix(r - self.half + 1)
        }
    }

    /// The action matrix of the frame generator c_a (1-indexed).
    pub fn generator_matrix(&self, a: usize) -> Result<Matrix> {
        self.sig.check_fiber(a)?;
        let dim = self.dim();
        let mut m = Matrix::zero(dim, dim);
        for r in 0..2 * self.half {
            let coeff = self.frame_in_witt.at(a - 1, r);
            if coeff.is_zero() {
                continue;
            }
            m = &m + &self.witt_vector_matrix(r).scale(coeff);
        }
        Ok(m)
    }

    /// The action matrix of the ordered word c_A for the index set in
    /// `mask`, ascending.
    pub fn word_matrix(&self, mask: u64) -> Result<Matrix> {
        let mut word = Matrix::identity(self.dim());
        for a in 1..=self.sig.fiber_rank() {
            if mask & (1u64 << (a - 1)) != 0 {
                word = &word * &self.generator_matrix(a)?;
            }
        }
        Ok(word)
    }
}

/// Square root of a real scalar within Q(sqrt2), when one exists of the
/// shape r or r*sqrt2 with r rational.
fn sqrt_in_field(x: &Scalar) -> Option<Scalar> {
    if !x.is_real() {
        return None;
    }
    let try_sqrt = |r: &num_rational::BigRational| -> Option<num_rational::BigRational> {
        use num_traits::Signed;
        if r.is_negative() {
            return None;
        }
        let ns = r.numer().sqrt();
        let ds = r.denom().sqrt();
        let cand = num_rational::BigRational::new(ns, ds);
        (&cand * &cand == *r).then_some(cand)
    };
    if x.is_rational() {
        if let Some(r) = try_sqrt(&x.a) {
            return Some(Scalar::from_rat(r));
        }
        // maybe x = 2 r^2, root r*sqrt2
        let half_x = &x.a / num_rational::BigRational::from(num_bigint::BigInt::from(2));
        if let Some(r) = try_sqrt(&half_x) {
            return Some(Scalar::from_rat(r) * Scalar::sqrt2());
        }
        return None;
    }
    None
}

/// The exact spinor representation of a Clifford element in a Witt frame.
pub fn witt_rep(u: &CliffordElement, frame: &WittFrame) -> Result<PolyMatrix> {
    same_model(u.model(), frame.model())?;
    let n_vars = u.model().base_dim();
    let dim = frame.dim();
    let mut out = PolyMatrix::zero(n_vars, dim, dim);
    for (mask, coeff) in u.terms() {
        let word = frame.word_matrix(*mask)?;
        out = out.add(&PolyMatrix::from_scalar_matrix(n_vars, &word).scale_poly(coeff));
    }
    Ok(out)
}

impl fmt::Display for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut sorted: Vec<(&u64, &BasePolynomial)> = self.terms.iter().collect();
        sorted.sort_by_key(|(mask, _)| (mask.count_ones(), **mask));
        let mut out = String::new();
        for (mask, coeff) in sorted {
            let word = (1..=64)
                .filter(|a| mask & (1u64 << (a - 1)) != 0)
                .map(|a| format!("c{a}"))
                .collect::<Vec<_>>()
                .join("*");
            let (neg, body) = if word.is_empty() {
                let s = coeff.to_string();
                if coeff.terms().count() > 1 {
                    (false, s)
                } else if let Some(rest) = s.strip_prefix('-') {
                    (true, rest.to_string())
                } else {
                    (false, s)
                }
            } else if coeff.terms().count() == 1 {
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
                body.push_str(&word);
                (neg, body)
            } else {
                (false, format!("({coeff})*{word}"))
            };
            poly::push_term(&mut out, neg, &body);
        }
        f.write_str(&out)
    }
}
