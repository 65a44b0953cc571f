//! Weyl quantization: the filtered correspondence between graded symbols
//! and spinor differential operators, together with the star product it
//! induces on symbols.
//!
//! The quantization of f(x) xi_A p^beta is assembled from three pieces:
//! the normal ordering correction exp(1/2 Div) applied to the symbol
//! first, with Div = sum_i d^2/(dx^i dp_i); the Chevalley image of the
//! odd word scaled by 2^(-|A|/2); and the substitution p^beta -> d^beta.
//! On base monomials this reproduces the symmetrized operator average,
//! and on odd monomials the antisymmetrized Clifford word, so the map is
//! the flat graded Weyl correspondence. It is a filtered isomorphism:
//! [`dequantize`] peels an operator layer by layer through the weighted
//! symbol and inverts [`quantize`] exactly.

use std::collections::BTreeMap;

use crate::clifford::{chevalley, CliffordElement};
use crate::error::{Error, Result};
use crate::graded::GradedFunction;
use crate::operator::SpinorOperator;
use crate::scalar::Scalar;

/// Div f = sum_i d^2 f / (dx^i dp_i), the canonical second order
/// contraction pairing each base direction with its momentum.
pub fn divergence(f: &GradedFunction) -> Result<GradedFunction> {
    let mut out = GradedFunction::zero(f.model());
    for i in 1..=f.model().base_dim() {
        out = out.add(&f.partial_p(i)?.partial_x(i)?)?;
    }
    Ok(out)
}

/// exp(1/2 Div) f. The series terminates because every application of
/// Div removes one momentum factor.
fn half_div_exp(f: &GradedFunction) -> Result<GradedFunction> {
    let mut out = f.clone();
    let mut term = f.clone();
    let mut k: i64 = 0;
    loop {
        let next = divergence(&term)?;
        if next.is_zero() {
            return Ok(out);
        }
        k += 1;
        // (1/2)^k / k! builds up stepwise as a factor 1/(2k) per round
        term = next.scale(&Scalar::rational(1, 2 * k));
        out = out.add(&term)?;
    }
}

/// The Weyl quantization of a graded symbol.
pub fn quantize(f: &GradedFunction) -> Result<SpinorOperator> {
    let sig = f.model().clone();
    let corrected = half_div_exp(f)?;
    let mut gamma_cache: BTreeMap<u64, CliffordElement> = BTreeMap::new();
    let mut out = SpinorOperator::zero(&sig);
    for ((mask, beta), coeff) in corrected.terms() {
        let gamma = match gamma_cache.get(mask) {
            Some(g) => g.clone(),
            None => {
                let weight = Scalar::sqrt2_pow(-(mask.count_ones() as i64));
                let g = chevalley(&GradedFunction::xi_monomial(&sig, *mask))?.scale(&weight);
                gamma_cache.insert(*mask, g.clone());
                g
            }
        };
        for (word, factor) in gamma.terms() {
            out.insert_add((*word, beta.clone()), coeff * factor);
        }
    }
    Ok(out)
}

/// The inverse of [`quantize`]: the weighted symbol of the top filtration
/// layer is exact, so peel it, subtract its quantization and recurse.
pub fn dequantize(op: &SpinorOperator) -> Result<GradedFunction> {
    let mut out = GradedFunction::zero(op.model());
    let mut work = op.clone();
    while let Some(top) = work.order() {
        let layer = work.symbol_layer(top);
        out = out.add(&layer)?;
        work = work.sub(&quantize(&layer)?)?;
        debug_assert!(
            work.order().map_or(true, |o| o < top),
            "peeling must strictly lower the order"
        );
    }
    Ok(out)
}

/// Rescales the Euler degree k component by t^k. Used to track how the
/// quantization interacts with the grading, for instance when comparing
/// the adjoint against the odd conjugation of symbols.
pub fn hbar_rescale(f: &GradedFunction, t: &Scalar) -> Result<GradedFunction> {
    let mut out = GradedFunction::zero(f.model());
    for (k, component) in f.euler_decompose() {
        out = out.add(&component.scale(&t.pow(k as i32)?))?;
    }
    Ok(out)
}

/// The full star product of two symbols: the symbol of the composition
/// of their quantizations. Defined for arbitrary symbols.
pub fn star_product(f: &GradedFunction, g: &GradedFunction) -> Result<GradedFunction> {
    dequantize(&quantize(f)?.compose(&quantize(g)?)?)
}

/// The homogeneous layers of the star product: for Euler homogeneous
/// inputs of degrees kf and kg the entry at index k is
/// B_2k(f, g) = 2^k times the degree kf + kg - 2k component of f star g,
/// so B_0 is the pointwise product and B_2 the Poisson bracket. Odd
/// offsets never occur: the composition only drops degree in steps of
/// two.
pub fn star_components(f: &GradedFunction, g: &GradedFunction) -> Result<Vec<GradedFunction>> {
    let (Some(kf), Some(kg)) = (f.homogeneous_degree(), g.homogeneous_degree()) else {
        return Err(Error::Domain(
            "star components need Euler homogeneous nonzero inputs".into(),
        ));
    };
    let total = kf + kg;
    let product = star_product(f, g)?;
    let mut out = Vec::with_capacity((total / 2 + 1) as usize);
    for k in 0..=total / 2 {
        let weight = Scalar::from_int(2).pow(k as i32)?;
        out.push(product.euler_component(total - 2 * k).scale(&weight));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::poly::BasePolynomial;
    use crate::sampling;
    use crate::space::{Model, ModelSignature};
    use rand::Rng as _;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn euclid(n: usize, m: usize) -> Model {
        ModelSignature::euclidean(n, m)
    }

    fn skew_metric() -> Model {
        let g = Matrix::from_rows(vec![
            vec![Scalar::from_int(1), Scalar::from_int(1), Scalar::zero()],
            vec![Scalar::from_int(1), Scalar::from_int(2), Scalar::zero()],
            vec![Scalar::zero(), Scalar::zero(), Scalar::from_int(3)],
        ])
        .unwrap();
        ModelSignature::new(2, 3, g).unwrap()
    }

    fn xfun(sig: &Model, i: usize) -> GradedFunction {
        GradedFunction::x(sig, i).unwrap()
    }

    fn pfun(sig: &Model, i: usize) -> GradedFunction {
        GradedFunction::p(sig, i).unwrap()
    }

    fn xifun(sig: &Model, a: usize) -> GradedFunction {
        GradedFunction::xi(sig, a).unwrap()
    }

    fn dop(sig: &Model, i: usize) -> SpinorOperator {
        SpinorOperator::derivative(sig, i).unwrap()
    }

    fn cop(sig: &Model, a: usize) -> SpinorOperator {
        SpinorOperator::clifford_gen(sig, a).unwrap()
    }

    fn xop(sig: &Model, i: usize) -> SpinorOperator {
        SpinorOperator::from_poly(sig, BasePolynomial::var(sig.base_dim(), i).unwrap())
    }

    /// Mixed degree sample, deterministic in the seed.
    fn rand_symbol<R: rand::Rng>(rng: &mut R, sig: &Model, max_deg: u32) -> GradedFunction {
        let mut f = GradedFunction::zero(sig);
        for k in 0..=max_deg {
            f = f.add(&sampling::rand_homogeneous(rng, sig, k)).unwrap();
        }
        f
    }

    #[test]
    fn quantize_base_examples() {
        let sig = euclid(2, 4);
        // W(x1 p1) = x1 d1 + 1/2
        let xp = xfun(&sig, 1).product(&pfun(&sig, 1)).unwrap();
        let expect = xop(&sig, 1)
            .compose(&dop(&sig, 1))
            .unwrap()
            .add(&SpinorOperator::scalar(&sig, Scalar::half()))
            .unwrap();
        assert_eq!(quantize(&xp).unwrap(), expect);

        // W(x1^2 p1^2) = x1^2 d1^2 + 2 x1 d1 + 1/2
        let x2p2 = xp.product(&xp).unwrap();
        let expect = xop(&sig, 1)
            .compose(&xop(&sig, 1))
            .unwrap()
            .compose(&dop(&sig, 1))
            .unwrap()
            .compose(&dop(&sig, 1))
            .unwrap()
            .add(
                &xop(&sig, 1)
                    .compose(&dop(&sig, 1))
                    .unwrap()
                    .scale(&Scalar::from_int(2)),
            )
            .unwrap()
            .add(&SpinorOperator::scalar(&sig, Scalar::half()))
            .unwrap();
        assert_eq!(quantize(&x2p2).unwrap(), expect);

        // constants and pure base functions pass through untouched
        assert_eq!(
            quantize(&GradedFunction::one(&sig)).unwrap(),
            SpinorOperator::identity(&sig)
        );
        let poly = xfun(&sig, 1).product(&xfun(&sig, 2)).unwrap();
        assert_eq!(
            quantize(&poly).unwrap(),
            xop(&sig, 1).compose(&xop(&sig, 2)).unwrap()
        );
    }

    #[test]
    fn quantize_matches_symmetrization_oracle() {
        // Independent oracle on base monomials: variable by variable, the
        // Weyl image of x^a p^b is the binomial average
        // 2^(-b) sum_k C(b, k) d^k x^a d^(b-k).
        fn mccoy(sig: &Model, gamma: &[u32], beta: &[u32]) -> SpinorOperator {
            let mut out = SpinorOperator::identity(sig);
            for i in 1..=sig.base_dim() {
                let (a, b) = (gamma[i - 1], beta[i - 1]);
                let mut xpow = SpinorOperator::identity(sig);
                for _ in 0..a {
                    xpow = xpow.compose(&xop(sig, i)).unwrap();
                }
                let mut factor = SpinorOperator::zero(sig);
                for k in 0..=b {
                    let mut word = SpinorOperator::identity(sig);
                    for _ in 0..k {
                        word = word.compose(&dop(sig, i)).unwrap();
                    }
                    word = word.compose(&xpow).unwrap();
                    for _ in 0..(b - k) {
                        word = word.compose(&dop(sig, i)).unwrap();
                    }
                    let count = num_integer::binomial(b as u64, k as u64) as i64;
                    factor = factor.add(&word.scale(&Scalar::from_int(count))).unwrap();
                }
                factor = factor.scale(&Scalar::from_int(2).pow(-(b as i32)).unwrap());
                out = out.compose(&factor).unwrap();
            }
            out
        }

        let sig = euclid(2, 2);
        let exps: Vec<Vec<u32>> = (0..3u32)
            .flat_map(|a| (0..3u32).map(move |b| vec![a, b]))
            .collect();
        for gamma in &exps {
            for beta in &exps {
                let coeff = BasePolynomial::monomial(2, gamma.clone(), Scalar::one());
                let symbol = GradedFunction::monomial(&sig, 0, beta.clone(), coeff);
                assert_eq!(
                    quantize(&symbol).unwrap(),
                    mccoy(&sig, gamma, beta),
                    "gamma {gamma:?} beta {beta:?}"
                );
            }
        }
    }

    #[test]
    fn quantize_odd_examples() {
        let sig = skew_metric();
        // single generators carry the 2^(-1/2) normalization
        assert_eq!(
            quantize(&xifun(&sig, 1)).unwrap(),
            cop(&sig, 1).scale(&Scalar::sqrt2_pow(-1))
        );
        // xi1 xi2 maps to (c1 c2 - g12) / 2 even for coupled metrics
        let f = xifun(&sig, 1).product(&xifun(&sig, 2)).unwrap();
        let expect = cop(&sig, 1)
            .compose(&cop(&sig, 2))
            .unwrap()
            .sub(&SpinorOperator::scalar(&sig, sig.g(1, 2).clone()))
            .unwrap()
            .scale(&Scalar::half());
        assert_eq!(quantize(&f).unwrap(), expect);
        // mixed odd and momentum factors quantize independently
        let mixed = f.product(&pfun(&sig, 2)).unwrap();
        assert_eq!(
            quantize(&mixed).unwrap(),
            expect.compose(&dop(&sig, 2)).unwrap()
        );
    }

    #[test]
    fn roundtrip_is_the_identity_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let sig = euclid(2, 4);
        for _ in 0..12 {
            let f = rand_symbol(&mut rng, &sig, 6);
            let op = quantize(&f).unwrap();
            assert_eq!(dequantize(&op).unwrap(), f);
        }
        // and on the operator side, through a composition that leaves
        // the image of any single layer
        for _ in 0..6 {
            let f = rand_symbol(&mut rng, &sig, 3);
            let g = rand_symbol(&mut rng, &sig, 3);
            let product = quantize(&f).unwrap().compose(&quantize(&g).unwrap()).unwrap();
            assert_eq!(quantize(&dequantize(&product).unwrap()).unwrap(), product);
        }
    }

    #[test]
    fn quantize_is_linear_filtered_and_parity_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sig = euclid(2, 4);
        for _ in 0..10 {
            let f = rand_symbol(&mut rng, &sig, 5);
            let g = rand_symbol(&mut rng, &sig, 5);
            let s = sampling::rand_scalar(&mut rng);
            let lhs = quantize(&f.scale(&s).add(&g).unwrap()).unwrap();
            let rhs = quantize(&f).unwrap().scale(&s).add(&quantize(&g).unwrap()).unwrap();
            assert_eq!(lhs, rhs);

            let k = rng.gen_range(0..=6u32);
            let h = sampling::rand_homogeneous(&mut rng, &sig, k);
            if h.is_zero() {
                continue;
            }
            let op = quantize(&h).unwrap();
            assert_eq!(op.order(), Some(k));
            assert_eq!(op.parity(), h.parity());
            assert_eq!(op.principal_symbol().unwrap(), h);
        }
    }

    #[test]
    fn adjoint_alternates_on_real_homogeneous_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sig = euclid(2, 4);
        for k in 0..=6u32 {
            for _ in 0..4 {
                let sample = sampling::rand_homogeneous(&mut rng, &sig, k);
                let real = sample.add(&sample.conj()).unwrap().scale(&Scalar::half());
                assert!(!real.is_zero(), "degenerate sample at degree {k}");
                let op = quantize(&real).unwrap();
                let sign = if (k / 2) % 2 == 1 {
                    Scalar::from_int(-1)
                } else {
                    Scalar::one()
                };
                assert_eq!(op.adjoint().unwrap(), op.scale(&sign), "degree {k}");
            }
        }
    }

    #[test]
    fn tau_matches_the_adjoint_through_the_quarter_turn() {
        // t = (sqrt2 / 2)(1 - i) squares to -i; rescaling by it aligns
        // the symbol involution tau with the operator adjoint.
        let t = &(&Scalar::one() - &Scalar::i()) * &(&Scalar::sqrt2() * &Scalar::half());
        assert_eq!(t.pow(2).unwrap(), &Scalar::zero() - &Scalar::i());

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for sig in [euclid(2, 4), skew_metric()] {
            for _ in 0..8 {
                let f = rand_symbol(&mut rng, &sig, 5);
                let lhs = quantize(&hbar_rescale(&f.tau(), &t).unwrap()).unwrap();
                let rhs = quantize(&hbar_rescale(&f, &t).unwrap())
                    .unwrap()
                    .adjoint()
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn star_frozen_examples() {
        let sig = euclid(2, 4);
        // p1 star x1: product then the bracket {p1, x1} = 1
        let comps = star_components(&pfun(&sig, 1), &xfun(&sig, 1)).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], xfun(&sig, 1).product(&pfun(&sig, 1)).unwrap());
        assert_eq!(comps[1], GradedFunction::one(&sig));

        // xi_a star xi_b sees the metric in degree two
        let skew = skew_metric();
        for a in 1..=3usize {
            for b in 1..=3usize {
                let comps = star_components(&xifun(&skew, a), &xifun(&skew, b)).unwrap();
                assert_eq!(comps.len(), 2);
                assert_eq!(comps[0], xifun(&skew, a).product(&xifun(&skew, b)).unwrap());
                assert_eq!(
                    comps[1],
                    GradedFunction::constant(&skew, skew.g(a, b).clone())
                );
            }
        }

        // x1^2 star p1^2 produces the full three layer tower
        let x2 = xfun(&sig, 1).product(&xfun(&sig, 1)).unwrap();
        let p2 = pfun(&sig, 1).product(&pfun(&sig, 1)).unwrap();
        let comps = star_components(&x2, &p2).unwrap();
        assert_eq!(comps.len(), 3);
        assert_eq!(comps[0], x2.product(&p2).unwrap());
        let xp = xfun(&sig, 1).product(&pfun(&sig, 1)).unwrap();
        assert_eq!(comps[1], xp.scale(&Scalar::from_int(-4)));
        assert_eq!(comps[2], GradedFunction::constant(&sig, Scalar::from_int(2)));
    }

    #[test]
    fn star_leads_with_product_and_poisson() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sig = euclid(2, 4);
        let mut nontrivial = 0usize;
        for _ in 0..20 {
            let kf = rng.gen_range(1..=4u32);
            let kg = rng.gen_range(1..=4u32);
            let f = sampling::rand_homogeneous(&mut rng, &sig, kf);
            let g = sampling::rand_homogeneous(&mut rng, &sig, kg);
            if f.is_zero() || g.is_zero() {
                continue;
            }
            let comps = star_components(&f, &g).unwrap();
            assert_eq!(comps[0], f.product(&g).unwrap());
            if comps.len() > 1 {
                assert_eq!(comps[1], f.poisson(&g).unwrap());
                if !comps[1].is_zero() {
                    nontrivial += 1;
                }
            }
        }
        assert!(nontrivial > 10, "bracket layer degenerate too often");
    }

    #[test]
    fn star_symmetry_and_even_spacing() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sig = euclid(2, 4);
        for _ in 0..12 {
            let kf = rng.gen_range(1..=4u32);
            let kg = rng.gen_range(1..=4u32);
            let f = sampling::rand_homogeneous(&mut rng, &sig, kf);
            let g = sampling::rand_homogeneous(&mut rng, &sig, kg);
            let (Some(pf), Some(pg)) = (f.parity(), g.parity()) else {
                continue;
            };
            // layers of the product symbol sit only at even offsets
            let full = star_product(&f, &g).unwrap();
            for (degree, _) in full.euler_decompose() {
                assert_eq!((kf + kg - degree) % 2, 0);
            }
            // B_2k(f, g) = (-1)^(k + |f||g|) B_2k(g, f)
            let fg = star_components(&f, &g).unwrap();
            let gf = star_components(&g, &f).unwrap();
            assert_eq!(fg.len(), gf.len());
            for (k, layer) in fg.iter().enumerate() {
                let flip = (k as u32 + (pf & pg) as u32) % 2 == 1;
                let expect = if flip { gf[k].neg() } else { gf[k].clone() };
                assert_eq!(layer, &expect, "layer {k}");
            }
        }
    }

    #[test]
    fn hbar_rescale_scales_each_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sig = euclid(2, 4);
        let t = sampling::rand_scalar(&mut rng);
        if t.is_zero() {
            return;
        }
        let f = rand_symbol(&mut rng, &sig, 5);
        let scaled = hbar_rescale(&f, &t).unwrap();
        for (k, component) in f.euler_decompose() {
            assert_eq!(
                scaled.euler_component(k),
                component.scale(&t.pow(k as i32).unwrap())
            );
        }
        let back = hbar_rescale(&scaled, &t.inverse().unwrap()).unwrap();
        assert_eq!(back, f);
        assert_eq!(hbar_rescale(&f, &Scalar::one()).unwrap(), f);
    }
}
