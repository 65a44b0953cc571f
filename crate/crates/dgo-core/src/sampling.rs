//! Seeded random inputs for axiom suites and randomized audits.
//!
//! Both the test suites and the command line audits draw their random
//! functions and sections from here, always through a caller supplied
//! generator, so a fixed seed reproduces a failing witness exactly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graded::GradedFunction;
use crate::poly::BasePolynomial;
use crate::scalar::Scalar;
use crate::space::Model;

/// The engine wide deterministic generator for a given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small random rational.
pub fn rand_scalar<R: Rng>(rng: &mut R) -> Scalar {
    let num = rng.gen_range(-4i64..=4);
    let den = rng.gen_range(1i64..=2);
    Scalar::rational(num, den)
}

pub fn rand_poly<R: Rng>(rng: &mut R, n: usize, max_deg: u32, terms: usize) -> BasePolynomial {
    let mut p = BasePolynomial::zero(n);
    for _ in 0..terms {
        let exps: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=max_deg)).collect();
        p += &BasePolynomial::monomial(n, exps, rand_scalar(rng));
    }
    p
}

/// A random Euler homogeneous function of the given degree, possibly zero.
pub fn rand_homogeneous<R: Rng>(rng: &mut R, sig: &Model, degree: u32) -> GradedFunction {
    let n = sig.base_dim();
    let m = sig.fiber_rank() as u32;
    let mut out = GradedFunction::zero(sig);
    for _ in 0..3 {
        // pick |A| = k with k = degree mod 2 and 2|beta| = degree - k
        let max_k = degree.min(m);
        let mut k = rng.gen_range(0..=max_k);
        if k % 2 != degree % 2 {
            if k == 0 {
                k = 1.min(max_k);
            } else {
                k -= 1;
            }
        }
        if k % 2 != degree % 2 {
            continue;
        }
        let remaining = (degree - k) / 2;
        if n == 0 && remaining > 0 {
            continue;
        }
        let mut mask = 0u64;
        let mut available: Vec<u32> = (0..m).collect();
        for _ in 0..k {
            let pick = rng.gen_range(0..available.len());
            mask |= 1u64 << available.remove(pick);
        }
        let mut beta = vec![0u32; n];
        for _ in 0..remaining {
            beta[rng.gen_range(0..n)] += 1;
        }
        let coeff = rand_poly(rng, n, 2, 2);
        out = out
            .add(&GradedFunction::monomial(sig, mask, beta, coeff))
            .expect("same model by construction");
    }
    out
}

/// A random degree 1 element, a section of the fiber bundle with
/// polynomial coefficients. Never identically zero for m >= 1.
pub fn rand_section<R: Rng>(rng: &mut R, sig: &Model, coeff_deg: u32) -> GradedFunction {
    let n = sig.base_dim();
    let mut out = GradedFunction::zero(sig);
    loop {
        for a in 1..=sig.fiber_rank() {
            if rng.gen_bool(0.6) {
                continue;
            }
            let coeff = rand_poly(rng, n, coeff_deg, 2);
            let term = GradedFunction::xi(sig, a)
                .expect("fiber index in range")
                .product(&GradedFunction::from_poly(sig, coeff))
                .expect("same model");
            out = out.add(&term).expect("same model");
        }
        if !out.is_zero() || sig.fiber_rank() == 0 {
            return out;
        }
    }
}

/// A sum of pure xi monomials of word length k, momentum free.
pub fn rand_xi_only<R: Rng>(rng: &mut R, sig: &Model, k: u32) -> GradedFunction {
    let m = sig.fiber_rank() as u32;
    let mut out = GradedFunction::zero(sig);
    if k > m {
        return out;
    }
    for _ in 0..2 {
        let mut mask = 0u64;
        let mut available: Vec<u32> = (0..m).collect();
        for _ in 0..k {
            let pick = rng.gen_range(0..available.len());
            mask |= 1u64 << available.remove(pick);
        }
        let coeff = rand_poly(rng, sig.base_dim(), 2, 2);
        out = out
            .add(&GradedFunction::monomial(
                sig,
                mask,
                vec![0; sig.base_dim()],
                coeff,
            ))
            .expect("same model");
    }
    out
}
