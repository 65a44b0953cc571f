//! End to end acceptance battery. Each test is one numbered criterion,
//! driving the public API and the shipped model files the way a consumer
//! would, with a wall clock bound asserted at the end. The harness output
//! is the scoreboard: one pass/fail line per criterion.

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dgo_cli::expr;
use dgo_cli::model::{parse_model, ModelFile};
use dgo_core::bialgebroid::{
    bialg_invariant, bialg_operator, double_theta, homological_q, lie_q, ASpinorOperator,
    LieAlgebroidData,
};
use dgo_core::clifford::{chevalley, witt_rep, WittFrame};
use dgo_core::courant::{
    derived_commutator, derived_structure, dirac_weyl, master_equation, CourantData,
};
use dgo_core::graded::GradedFunction;
use dgo_core::matrix::{Matrix, PolyMatrix};
use dgo_core::operator::SpinorOperator;
use dgo_core::poly::BasePolynomial;
use dgo_core::sampling;
use dgo_core::scalar::Scalar;
use dgo_core::space::{Model, ModelSignature};
use dgo_core::weyl::{dequantize, hbar_rescale, quantize, star_components};

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn load(name: &str) -> ModelFile {
    let path = models_dir().join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn courant(name: &str) -> CourantData {
    match load(name) {
        ModelFile::Courant { data, .. } => data,
        other => panic!("{name} is {}", other.kind_name()),
    }
}

fn witted(name: &str) -> (CourantData, WittFrame) {
    match load(name) {
        ModelFile::Courant {
            data,
            witt: Some(frame),
        } => (data, frame),
        _ => panic!("{name} should carry a witt_frame"),
    }
}

fn pair(name: &str) -> (LieAlgebroidData, LieAlgebroidData) {
    match load(name) {
        ModelFile::BialgebroidPair(l, lstar) => (l, lstar),
        other => panic!("{name} is {}", other.kind_name()),
    }
}

fn cop(sig: &Model, a: usize) -> SpinorOperator {
    SpinorOperator::clifford_gen(sig, a).unwrap()
}

fn xifun(sig: &Model, a: usize) -> GradedFunction {
    GradedFunction::xi(sig, a).unwrap()
}

/// A coupled fibre metric, so nothing below silently assumes diagonality.
fn nondiagonal_signature() -> Model {
    let one = Scalar::one;
    let zero = Scalar::zero;
    let g = Matrix::from_rows(vec![
        vec![one(), one(), zero()],
        vec![one(), Scalar::from_int(2), zero()],
        vec![zero(), zero(), one()],
    ])
    .unwrap();
    ModelSignature::new(2, 3, g).unwrap()
}

fn mixed_symbol<R: Rng>(rng: &mut R, sig: &Model, max_deg: u32) -> GradedFunction {
    let mut f = GradedFunction::zero(sig);
    for k in 0..=max_deg {
        f = f.add(&sampling::rand_homogeneous(rng, sig, k)).unwrap();
    }
    f
}

#[test]
fn criterion_01_clifford_relations_and_gamma_equivalence() {
    let clock = Instant::now();
    let mut signatures: Vec<Model> = (1..=6).map(|m| ModelSignature::euclidean(1, m)).collect();
    signatures.push(nondiagonal_signature());

    for sig in &signatures {
        let m = sig.fiber_rank();
        for a in 1..=m {
            for b in 1..=m {
                let anti = cop(sig, a)
                    .compose(&cop(sig, b))
                    .unwrap()
                    .add(&cop(sig, b).compose(&cop(sig, a)).unwrap())
                    .unwrap();
                let expect = SpinorOperator::scalar(sig, sig.g(a, b) * &Scalar::from_int(2));
                assert_eq!(anti, expect, "generators {a}, {b}");
            }
        }
        // the quantization of a single generator and of a quadratic
        // monomial against the closed Clifford formulas
        for a in 1..=m {
            assert_eq!(
                quantize(&xifun(sig, a)).unwrap(),
                cop(sig, a).scale(&Scalar::sqrt2_pow(-1)),
                "degree one at {a}"
            );
            for b in 1..=m {
                let f = xifun(sig, a).product(&xifun(sig, b)).unwrap();
                let expect = cop(sig, a)
                    .compose(&cop(sig, b))
                    .unwrap()
                    .sub(&SpinorOperator::scalar(sig, sig.g(a, b).clone()))
                    .unwrap()
                    .scale(&Scalar::half());
                assert_eq!(quantize(&f).unwrap(), expect, "degree two at {a}, {b}");
            }
        }
    }
    assert!(clock.elapsed() < Duration::from_secs(5), "{:?}", clock.elapsed());
}

#[test]
fn criterion_02_graded_poisson_bracket_axioms() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC02);
    let signatures = [ModelSignature::euclidean(3, 6), nondiagonal_signature()];
    let mut nontrivial = 0usize;
    for trial in 0..100 {
        let sig = &signatures[trial % 2];
        let df = rng.gen_range(1..=4u32);
        let dg = rng.gen_range(1..=4u32);
        let dh = rng.gen_range(1..=4u32);
        let f = sampling::rand_homogeneous(&mut rng, sig, df);
        let g = sampling::rand_homogeneous(&mut rng, sig, dg);
        let h = sampling::rand_homogeneous(&mut rng, sig, dh);

        // graded skew symmetry with the weight shifted parity
        let sign = |u: u32, v: u32| -> Scalar {
            if ((u as i64 - 2) * (v as i64 - 2)) % 2 != 0 {
                Scalar::one()
            } else {
                Scalar::from_int(-1)
            }
        };
        let fg = f.poisson(&g).unwrap();
        assert_eq!(fg, g.poisson(&f).unwrap().scale(&sign(df, dg)));
        if !fg.is_zero() {
            nontrivial += 1;
        }

        // Leibniz in the second slot
        let lhs = f.poisson(&g.product(&h).unwrap()).unwrap();
        let flip = if ((df as i64 - 2) * ((dg % 2) as i64)) % 2 != 0 {
            Scalar::from_int(-1)
        } else {
            Scalar::one()
        };
        let rhs = fg
            .product(&h)
            .unwrap()
            .add(&g.product(&f.poisson(&h).unwrap()).unwrap().scale(&flip))
            .unwrap();
        assert_eq!(lhs, rhs);

        // Jacobi in Leibniz form
        let lhs = f.poisson(&g.poisson(&h).unwrap()).unwrap();
        let jflip = if ((df as i64 - 2) * (dg as i64 - 2)) % 2 != 0 {
            Scalar::from_int(-1)
        } else {
            Scalar::one()
        };
        let rhs = fg
            .poisson(&h)
            .unwrap()
            .add(&g.poisson(&f.poisson(&h).unwrap()).unwrap().scale(&jflip))
            .unwrap();
        assert_eq!(lhs, rhs);
    }
    assert!(nontrivial > 40, "only {nontrivial} nonzero brackets");
    assert!(clock.elapsed() < Duration::from_secs(10), "{:?}", clock.elapsed());
}

#[test]
fn criterion_03_quantization_roundtrip_and_symmetries() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC03);
    let sig = ModelSignature::euclidean(2, 4);

    // symbol of the quantization is the identity up to degree six
    for _ in 0..12 {
        let f = mixed_symbol(&mut rng, &sig, 6);
        assert_eq!(dequantize(&quantize(&f).unwrap()).unwrap(), f);
    }

    // order, parity, and the principal symbol on homogeneous inputs
    for k in 0..=6u32 {
        let h = sampling::rand_homogeneous(&mut rng, &sig, k);
        if h.is_zero() {
            continue;
        }
        let op = quantize(&h).unwrap();
        assert_eq!(op.order(), Some(k));
        assert_eq!(op.parity(), h.parity());
        assert_eq!(op.principal_symbol().unwrap(), h);
    }

    // the adjoint alternates with period four on real homogeneous symbols
    for k in 0..=6u32 {
        for _ in 0..3 {
            let sample = sampling::rand_homogeneous(&mut rng, &sig, k);
            let real = sample.add(&sample.conj()).unwrap().scale(&Scalar::half());
            if real.is_zero() {
                continue;
            }
            let op = quantize(&real).unwrap();
            let sign = if (k / 2) % 2 == 1 {
                Scalar::from_int(-1)
            } else {
                Scalar::one()
            };
            assert_eq!(op.adjoint().unwrap(), op.scale(&sign), "degree {k}");
        }
    }

    // the symbol involution matches the adjoint after the quarter turn
    // rescaling by t = (sqrt2/2)(1 - i), whose square is -i
    let t = &(&Scalar::one() - &Scalar::i()) * &(&Scalar::sqrt2() * &Scalar::half());
    assert_eq!(t.pow(2).unwrap(), &Scalar::zero() - &Scalar::i());
    for _ in 0..8 {
        let f = mixed_symbol(&mut rng, &sig, 5);
        let lhs = quantize(&hbar_rescale(&f.tau(), &t).unwrap()).unwrap();
        let rhs = quantize(&hbar_rescale(&f, &t).unwrap())
            .unwrap()
            .adjoint()
            .unwrap();
        assert_eq!(lhs, rhs);
    }
    assert!(clock.elapsed() < Duration::from_secs(10), "{:?}", clock.elapsed());
}

#[test]
fn criterion_04_star_product_layer_structure() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC04);
    let sig = ModelSignature::euclidean(2, 4);
    let mut checked = 0usize;
    while checked < 50 {
        let kf = rng.gen_range(1..=4u32);
        let kg = rng.gen_range(1..=4u32);
        let f = sampling::rand_homogeneous(&mut rng, &sig, kf);
        let g = sampling::rand_homogeneous(&mut rng, &sig, kg);
        if f.is_zero() || g.is_zero() {
            continue;
        }
        checked += 1;

        let fg = star_components(&f, &g).unwrap();
        // leading layer is the supercommutative product, next the bracket
        assert_eq!(fg[0], f.product(&g).unwrap());
        if fg.len() > 1 {
            assert_eq!(fg[1], f.poisson(&g).unwrap());
        }
        // layers live at even offsets below the product degree, so the
        // tower is finite and everything beyond it vanishes
        assert!(fg.len() as u32 <= 1 + (kf + kg) / 2, "{} layers", fg.len());
        for (k, layer) in fg.iter().enumerate() {
            if !layer.is_zero() {
                assert_eq!(layer.homogeneous_degree(), Some(kf + kg - 2 * k as u32));
            }
        }
        // exchange symmetry at every layer, the fourth order one included
        let gf = star_components(&g, &f).unwrap();
        assert_eq!(fg.len(), gf.len());
        let (pf, pg) = (f.parity().unwrap(), g.parity().unwrap());
        for (k, layer) in fg.iter().enumerate() {
            let flip = (k as u32 + (pf & pg) as u32) % 2 == 1;
            let expect = if flip { gf[k].neg() } else { gf[k].clone() };
            assert_eq!(layer, &expect, "layer {k}");
        }
    }
    assert!(clock.elapsed() < Duration::from_secs(30), "{:?}", clock.elapsed());
}

#[test]
fn criterion_05_standard_model_file_end_to_end() {
    let clock = Instant::now();
    let data = courant("standard_r3.dgo");
    assert!(data.axiom_check(5).passed());

    let theta = data.build_theta();
    assert!(master_equation(&theta).is_zero());

    // the cubic determines the data and vice versa
    assert_eq!(derived_structure(&theta).unwrap(), data);

    // the generating operator, its square, and its derived structure
    let d = dirac_weyl(&theta).unwrap();
    assert!(d.compose(&d).unwrap().is_zero());
    assert_eq!(derived_commutator(&d).unwrap(), data);
    assert!(data.invariant_fe().unwrap().is_zero());

    // the section level Dorfman bracket against the double graded bracket
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC05);
    let (n, m) = (data.base_dim(), data.fiber_rank());
    for _ in 0..20 {
        let u: Vec<BasePolynomial> = (0..m)
            .map(|_| sampling::rand_poly(&mut rng, n, 2, 2))
            .collect();
        let v: Vec<BasePolynomial> = (0..m)
            .map(|_| sampling::rand_poly(&mut rng, n, 2, 2))
            .collect();
        let lifted = data.lift_section(&data.dorfman(&u, &v).unwrap()).unwrap();
        let double = theta
            .poisson(&data.lift_section(&u).unwrap())
            .unwrap()
            .poisson(&data.lift_section(&v).unwrap())
            .unwrap();
        assert_eq!(lifted, double);
    }
    assert!(clock.elapsed() < Duration::from_secs(30), "{:?}", clock.elapsed());
}

#[test]
fn criterion_06_twist_discrimination() {
    let clock = Instant::now();
    let closed = courant("twisted_r4_closed.dgo");
    assert!(closed.axiom_check(6).passed());
    let theta = closed.build_theta();
    assert!(master_equation(&theta).is_zero());
    let d = dirac_weyl(&theta).unwrap();
    assert!(d.compose(&d).unwrap().is_zero());
    assert!(closed.invariant_fe().unwrap().is_zero());

    let open = courant("twisted_r4_nonclosed.dgo");
    assert!(!open.axiom_check(6).passed());
    let residual = master_equation(&open.build_theta());
    // the residual is exactly the exterior derivative of the twist, a
    // constant quartic in the tangent directions
    let expect = GradedFunction::monomial(
        open.model(),
        0b1111,
        vec![0; 4],
        BasePolynomial::one(4),
    );
    assert_eq!(residual, expect);
    assert!(clock.elapsed() < Duration::from_secs(30), "{:?}", clock.elapsed());
}

/// The invariant of a point model with zero anchor, computed directly:
/// lower the structure tensor with the file metric, raise it with the
/// inverse, and sum the squares over strictly increasing triples.
fn torsion_norm_oracle(data: &CourantData) -> BasePolynomial {
    let m = data.fiber_rank();
    let n = data.base_dim();
    let inv = data.metric().inverse().unwrap();
    let mut lowered = vec![vec![vec![BasePolynomial::zero(n); m]; m]; m];
    for a in 1..=m {
        for b in 1..=m {
            for c in 1..=m {
                let mut acc = BasePolynomial::zero(n);
                for up in 1..=m {
                    let t = data.structure(a, b, up);
                    if !t.is_zero() {
                        acc += &t.scale(data.pairing(up, c));
                    }
                }
                lowered[a - 1][b - 1][c - 1] = acc;
            }
        }
    }
    let mut out = BasePolynomial::zero(n);
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                let mut raised = BasePolynomial::zero(n);
                for p in 0..m {
                    for q in 0..m {
                        for r in 0..m {
                            let low = &lowered[p][q][r];
                            if low.is_zero() {
                                continue;
                            }
                            let weight = &(inv.at(p, a) * inv.at(q, b)) * inv.at(r, c);
                            if !weight.is_zero() {
                                raised += &low.scale(&weight);
                            }
                        }
                    }
                }
                out += &(&lowered[a][b][c] * &raised);
            }
        }
    }
    out
}

/// Runs the spinor space oracle: represent the cubic on the frame's
/// column space and square the matrix.
fn witt_square(theta: &GradedFunction, frame: &WittFrame) -> PolyMatrix {
    let cl = chevalley(theta).unwrap().scale(&Scalar::sqrt2_pow(-3));
    let rep = witt_rep(&cl, frame).unwrap();
    rep.mul(&rep)
}

fn predicted_square(fe: &BasePolynomial, n_vars: usize, dim: usize) -> PolyMatrix {
    PolyMatrix::identity(n_vars, dim).scale_poly(&fe.scale(&Scalar::rational(-1, 8)))
}

#[test]
fn criterion_07_invariants_and_spinor_oracle() {
    let clock = Instant::now();

    // so(3): the invariant is the raised square norm of the torsion
    let so3 = courant("so3.dgo");
    let fe = so3.invariant_fe().unwrap();
    assert_eq!(fe, BasePolynomial::one(0));
    assert_eq!(fe, torsion_norm_oracle(&so3));

    // and it is blind to orthogonal frame changes
    let zero = Scalar::zero;
    let rotation = Matrix::from_rows(vec![
        vec![zero(), Scalar::one(), zero()],
        vec![Scalar::from_int(-1), zero(), zero()],
        vec![zero(), zero(), Scalar::one()],
    ])
    .unwrap();
    let turned = so3.frame_change(&rotation).unwrap();
    assert!(turned.axiom_check(3).passed());
    assert_eq!(turned.invariant_fe().unwrap(), fe);

    // the even rank split example: constant operator square, factor -8,
    // and the matrix representation on the file's polarization
    let (split, frame) = witted("so3_so3.dgo");
    let fe = split.invariant_fe().unwrap();
    assert_eq!(fe, BasePolynomial::constant(0, Scalar::from_int(2)));
    assert_eq!(fe, torsion_norm_oracle(&split));
    let theta = split.build_theta();
    let d = dirac_weyl(&theta).unwrap();
    let square = d.compose(&d).unwrap();
    assert_eq!(
        square,
        SpinorOperator::scalar(split.model(), Scalar::rational(-1, 4))
    );
    assert_eq!(witt_square(&theta, &frame), predicted_square(&fe, 0, frame.dim()));

    // the double of the sl(2) bialgebra, polarized by its two halves
    let (l, lstar) = pair("sl2_bialgebra.dgo");
    let (double, theta) = double_theta(&l, &lstar).unwrap();
    assert!(double.axiom_check(9).passed());
    let fe = double.invariant_fe().unwrap();
    assert!(fe.is_zero());
    let d = dirac_weyl(&theta).unwrap();
    assert!(d.compose(&d).unwrap().is_zero());
    let r = l.rank();
    let mut e_rows = vec![vec![Scalar::zero(); 2 * r]; r];
    let mut f_rows = vec![vec![Scalar::zero(); 2 * r]; r];
    for a in 0..r {
        e_rows[a][a] = Scalar::one();
        f_rows[a][r + a] = Scalar::half();
    }
    let frame = WittFrame::new(double.model(), e_rows, f_rows).unwrap();
    assert!(witt_square(&theta, &frame).is_zero());

    // the affine bialgebra double has a nonzero constant invariant, so
    // the same oracle is exercised away from zero
    let aff = "kind = bialgebroid_pair\nbase_dim = 0\nrank = 2\n\
               bracket {\n 1 2 2 = 1\n}\ndual_bracket {\n 1 2 2 = 1\n}\n";
    let ModelFile::BialgebroidPair(l, lstar) = parse_model(aff).unwrap() else {
        panic!("pair expected");
    };
    let (double, theta) = double_theta(&l, &lstar).unwrap();
    let fe = double.invariant_fe().unwrap();
    assert!(!fe.is_zero());
    let mut e_rows = vec![vec![Scalar::zero(); 4]; 2];
    let mut f_rows = vec![vec![Scalar::zero(); 4]; 2];
    for a in 0..2 {
        e_rows[a][a] = Scalar::one();
        f_rows[a][2 + a] = Scalar::half();
    }
    let frame = WittFrame::new(double.model(), e_rows, f_rows).unwrap();
    assert_eq!(witt_square(&theta, &frame), predicted_square(&fe, 0, frame.dim()));

    assert!(clock.elapsed() < Duration::from_secs(60), "{:?}", clock.elapsed());
}

#[test]
fn criterion_08_both_dirac_constructions_agree() {
    let clock = Instant::now();
    let shipped = [
        "standard_r3.dgo",
        "twisted_r4_closed.dgo",
        "twisted_r4_nonclosed.dgo",
        "so3_so3.dgo",
        "so3_double.dgo",
    ];
    for name in shipped {
        let data = courant(name);
        assert_eq!(data.fiber_rank() % 2, 0, "{name}");
        let weyl_path = dirac_weyl(&data.build_theta()).unwrap();
        assert_eq!(weyl_path, data.dirac_explicit().unwrap(), "{name}");
    }
    assert!(clock.elapsed() < Duration::from_secs(30), "{:?}", clock.elapsed());
}

fn so3_lie() -> LieAlgebroidData {
    let mut c = vec![vec![vec![BasePolynomial::zero(0); 3]; 3]; 3];
    for (a, b, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
        c[a - 1][b - 1][k - 1] = BasePolynomial::one(0);
        c[b - 1][a - 1][k - 1] = -&BasePolynomial::one(0);
    }
    LieAlgebroidData::new(0, 3, vec![], c).unwrap()
}

fn so3_crossed_lie() -> LieAlgebroidData {
    let mut c = vec![vec![vec![BasePolynomial::zero(0); 3]; 3]; 3];
    for (a, b, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
        c[a - 1][b - 1][k - 1] = BasePolynomial::one(0);
        c[b - 1][a - 1][k - 1] = -&BasePolynomial::one(0);
    }
    // one extra constant spoils the Jacobi identity
    c[0][1][0] = BasePolynomial::one(0);
    c[1][0][0] = -&BasePolynomial::one(0);
    LieAlgebroidData::new(0, 3, vec![], c).unwrap()
}

#[test]
fn criterion_09_bialgebroid_suite() {
    let clock = Instant::now();

    // the homological square detects the Jacobi identity in both directions
    let q = homological_q(&so3_lie());
    assert!(q.compose(&q).unwrap().is_zero());
    let q = homological_q(&so3_crossed_lie());
    assert!(!q.compose(&q).unwrap().is_zero());

    // the modular corrected operator in closed form on the line model
    let ModelFile::LieAlgebroid(rank1) = load("modular_rank1.dgo") else {
        panic!("lie_algebroid expected");
    };
    let x1 = BasePolynomial::var(1, 1).unwrap();
    let expect = ASpinorOperator::monomial(1, 1, 1, 0, vec![0], BasePolynomial::constant(1, Scalar::half()))
        .add(&ASpinorOperator::monomial(1, 1, 1, 0, vec![1], x1))
        .unwrap();
    assert_eq!(lie_q(&rank1).unwrap(), expect);
    // on a unimodular input the correction disappears
    let sl2 = pair("sl2_bialgebra.dgo").0;
    assert_eq!(lie_q(&sl2).unwrap(), homological_q(&sl2));

    // three verdicts, one theorem: the axiom battery of the double, the
    // master equation of its cubic, and the multiplicativity of the
    // squared pair operator always land on the same side
    let ModelFile::LieAlgebroid(tangent2) = load("tangent_r2.dgo") else {
        panic!("lie_algebroid expected");
    };
    let (sl2, sl2_dual) = pair("sl2_bialgebra.dgo");
    let (tan, poisson_dual) = pair("poisson_plane.dgo");
    let perturbed = "kind = bialgebroid_pair\nbase_dim = 0\nrank = 3\n\
                     bracket {\n 1 2 2 = 2\n 1 3 3 = -2\n 2 3 1 = 1\n}\n\
                     dual_bracket {\n 1 2 2 = -2\n 1 3 3 = -1\n}\n";
    let ModelFile::BialgebroidPair(psl2, psl2_dual) = parse_model(perturbed).unwrap() else {
        panic!("pair expected");
    };
    let rows: Vec<(LieAlgebroidData, LieAlgebroidData, bool)> = vec![
        (tangent2.clone(), LieAlgebroidData::abelian(2, 2), true),
        (so3_lie(), LieAlgebroidData::abelian(0, 3), true),
        (sl2.clone(), sl2_dual.clone(), true),
        (tan, poisson_dual.clone(), true),
        (psl2, psl2_dual, false),
        (so3_crossed_lie(), LieAlgebroidData::abelian(0, 3), false),
    ];
    for (idx, (l, lstar, compatible)) in rows.iter().enumerate() {
        let (double, theta) = double_theta(l, lstar).unwrap();
        let battery = double.axiom_check(idx as u64).passed();
        let master = master_equation(&theta).is_zero();
        let b = bialg_operator(l, lstar).unwrap();
        let mult = b.compose(&b).unwrap().is_multiplication();
        assert_eq!(battery, *compatible, "row {idx} battery");
        assert_eq!(master, *compatible, "row {idx} master");
        assert_eq!(mult, *compatible, "row {idx} square");
    }

    // the two computation paths of the invariant agree, at zero and away
    let aff = "kind = bialgebroid_pair\nbase_dim = 0\nrank = 2\n\
               bracket {\n 1 2 2 = 1\n}\ndual_bracket {\n 1 2 2 = 1\n}\n";
    let ModelFile::BialgebroidPair(affl, affd) = parse_model(aff).unwrap() else {
        panic!("pair expected");
    };
    let compatible_rows = [
        (sl2, sl2_dual),
        (tangent2, poisson_dual),
        (affl, affd),
    ];
    for (l, lstar) in &compatible_rows {
        let invariant = bialg_invariant(l, lstar).unwrap();
        let (double, _) = double_theta(l, lstar).unwrap();
        let fe = double.invariant_fe().unwrap();
        assert_eq!(invariant, fe.scale(&Scalar::rational(-1, 8)));
    }
    // the affine double pins the nonzero value
    let (l, lstar) = &compatible_rows[2];
    assert_eq!(
        bialg_invariant(l, lstar).unwrap(),
        BasePolynomial::constant(0, Scalar::rational(-1, 2))
    );

    assert!(clock.elapsed() < Duration::from_secs(60), "{:?}", clock.elapsed());
}

fn dgo(args: &[&str], envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dgo"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().expect("no signal"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn machine_value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .unwrap_or_else(|| panic!("key {key} missing in:\n{text}"))
}

#[test]
fn criterion_10_command_line_contract() {
    let clock = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let std3 = models_dir().join("standard_r3.dgo");
    let std3 = std3.to_str().unwrap();

    // two hundred random polynomials survive a render and reparse
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC10);
    for _ in 0..200 {
        let n = rng.gen_range(1..=4usize);
        let f = sampling::rand_poly(&mut rng, n, 5, 4);
        let back = expr::parse_polynomial(&f.to_string(), n)
            .unwrap_or_else(|e| panic!("{f}: {e}"));
        assert_eq!(back, f);
    }

    // identical invocations produce byte identical reports
    let machine_a = dir.path().join("a.txt");
    let machine_b = dir.path().join("b.txt");
    let (code_a, stdout_a, _) = dgo(
        &["check", std3, "--seed", "11", "--machine-output", machine_a.to_str().unwrap()],
        &[],
    );
    let (code_b, stdout_b, _) = dgo(
        &["check", std3, "--seed", "11", "--machine-output", machine_b.to_str().unwrap()],
        &[],
    );
    assert_eq!((code_a, code_b), (0, 0));
    assert_eq!(stdout_a, stdout_b);
    assert_eq!(
        fs::read(&machine_a).unwrap(),
        fs::read(&machine_b).unwrap()
    );

    // the machine rendering of the cubic parses back to the exact value
    let machine_t = dir.path().join("t.txt");
    let (code, _, _) = dgo(
        &["theta", std3, "--machine-output", machine_t.to_str().unwrap()],
        &[],
    );
    assert_eq!(code, 0);
    let text = fs::read_to_string(&machine_t).unwrap();
    let data = courant("standard_r3.dgo");
    let parsed = expr::parse_graded(machine_value(&text, "theta"), data.model()).unwrap();
    assert_eq!(parsed, data.build_theta());

    // seed precedence: the flag beats the environment
    let (_, stdout, _) = dgo(&["check", std3, "--seed", "4"], &[("DGO_SEED", "9")]);
    assert!(stdout.contains("seed = 4"));
    let (_, stdout, _) = dgo(&["check", std3], &[("DGO_SEED", "9")]);
    assert!(stdout.contains("seed = 9"));

    // exit code 0: a healthy model
    let (code, stdout, _) = dgo(&["check", std3], &[]);
    assert_eq!(code, 0);
    assert!(stdout.ends_with("status: ok\n"));

    // exit code 1: a well formed file whose mathematics fails
    let open = models_dir().join("twisted_r4_nonclosed.dgo");
    let (code, stdout, _) = dgo(&["check", open.to_str().unwrap()], &[]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL master_equation"));
    assert!(stdout.contains("xi1*xi2*xi3*xi4"), "witness should be printed");

    // exit code 1 through the pair commands: an incompatible pair
    let broken = dir.path().join("broken.dgo");
    fs::write(
        &broken,
        "kind = bialgebroid_pair\nbase_dim = 0\nrank = 3\n\
         bracket {\n 1 2 2 = 2\n 1 3 3 = -2\n 2 3 1 = 1\n}\n\
         dual_bracket {\n 1 2 2 = -2\n 1 3 3 = -1\n}\n",
    )
    .unwrap();
    let (code, stdout, _) = dgo(&["bialg-invariant", broken.to_str().unwrap()], &[]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL pair_is_a_bialgebroid"));

    // exit code 2: parse garbage, missing files, wrong kinds, bad flags
    let garbage = dir.path().join("garbage.dgo");
    fs::write(&garbage, "this is not a model\n").unwrap();
    let (code, _, stderr) = dgo(&["check", garbage.to_str().unwrap()], &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("input error (parse)"));

    let degenerate = dir.path().join("degenerate.dgo");
    fs::write(
        &degenerate,
        "kind = courant\nbase_dim = 0\nfiber_rank = 2\nmetric {\n 1, 1\n 1, 1\n}\n",
    )
    .unwrap();
    let (code, _, stderr) = dgo(&["check", degenerate.to_str().unwrap()], &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("input error (metric)"));

    let (code, _, stderr) = dgo(&["check", dir.path().join("missing.dgo").to_str().unwrap()], &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("input error (io)"));

    let tangent = models_dir().join("tangent_r2.dgo");
    let (code, _, stderr) = dgo(&["theta", tangent.to_str().unwrap()], &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("input error (usage)"));

    let (code, _, stderr) = dgo(&["star", std3, "x1^(-1)", "x1"], &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("negative exponents"));

    let (code, _, stderr) = dgo(&["check", std3], &[("DGO_SEED", "pi")]);
    assert_eq!(code, 2);
    assert!(stderr.contains("DGO_SEED"));

    // clap level misuse also lands on 2
    let (code, _, _) = dgo(&["check", std3, "--max-degree", "4"], &[]);
    assert_eq!(code, 2);

    assert!(clock.elapsed() < Duration::from_secs(30), "{:?}", clock.elapsed());
}
