//! The eight commands, each mapping a parsed model file to a [`Report`].
//!
//! A mathematical verdict never raises an error here: failed checks land
//! in the report and drive the exit code to 1. Errors are reserved for
//! input problems, the unsupported command/kind combinations documented
//! in FORMAT.md among them.

use dgo_core::bialgebroid::{
    bialg_invariant, bialg_operator, double_theta, homological_q, lie_q, modular_cocycle,
    ASpinorOperator,
};
use dgo_core::clifford::{chevalley, witt_rep};
use dgo_core::courant::{dirac_weyl, master_equation};
use dgo_core::matrix::PolyMatrix;
use dgo_core::poly::BasePolynomial;
use dgo_core::scalar::Scalar;
use dgo_core::weyl::star_components;
use dgo_core::Error as CoreError;

use crate::error::CliError;
use crate::expr;
use crate::model::ModelFile;
use crate::report::Report;

fn wrong_kind(command: &str, file: &ModelFile, wanted: &str) -> CliError {
    CliError::Usage(format!(
        "'{}' runs on {} models, this file is kind {}",
        command,
        wanted,
        file.kind_name()
    ))
}

/// The axiom battery plus the master equation.
pub fn check(file: &ModelFile, label: &str, seed: u64) -> Result<Report, CliError> {
    match file {
        ModelFile::Courant { data, .. } => {
            let mut report = Report::new("check", label);
            report.value("seed", seed);
            for result in data.axiom_check(seed).checks {
                report.check(&result.name, result.passed, result.witness);
            }
            let master = master_equation(&data.build_theta());
            let witness = (!master.is_zero()).then(|| master.to_string());
            report.check("master_equation", master.is_zero(), witness);
            Ok(report)
        }
        ModelFile::LieAlgebroid(l) => {
            let mut report = Report::new("check", label);
            let q = homological_q(l);
            let square = q.compose(&q).expect("same shape");
            let witness = (!square.is_zero()).then(|| square.to_string());
            report.check("q_squared", square.is_zero(), witness);
            let eta0 = modular_cocycle(l).expect("validated data");
            for (b, f) in eta0.iter().enumerate() {
                report.value(&format!("modular_cocycle.{}", b + 1), f);
            }
            report.value("lie_q", lie_q(l).expect("validated data"));
            Ok(report)
        }
        other => Err(wrong_kind(
            "check (use bialg-check)",
            other,
            "courant or lie_algebroid",
        )),
    }
}

/// Renders the generating cubic.
pub fn theta(file: &ModelFile, label: &str) -> Result<Report, CliError> {
    let ModelFile::Courant { data, .. } = file else {
        return Err(wrong_kind("theta", file, "courant"));
    };
    let mut report = Report::new("theta", label);
    report.value("theta", data.build_theta());
    Ok(report)
}

/// Both constructions of the generating operator, with their agreement.
pub fn dirac(file: &ModelFile, label: &str) -> Result<Report, CliError> {
    let ModelFile::Courant { data, .. } = file else {
        return Err(wrong_kind("dirac", file, "courant"));
    };
    if data.fiber_rank() % 2 != 0 {
        return Err(CliError::Usage(format!(
            "dirac needs an even fiber rank, this model has rank {}",
            data.fiber_rank()
        )));
    }
    let mut report = Report::new("dirac", label);
    let weyl_path = dirac_weyl(&data.build_theta()).expect("even rank");
    let explicit = data.dirac_explicit().expect("even rank");
    report.value("dirac_weyl", &weyl_path);
    report.value("dirac_explicit", &explicit);
    let difference = weyl_path.sub(&explicit).expect("same model");
    let witness = (!difference.is_zero()).then(|| difference.to_string());
    report.check("formulas_agree", difference.is_zero(), witness);
    Ok(report)
}

/// The scalar invariant, its operator square counterpart on even rank, and
/// the matrix oracle when the file supplies a Witt frame.
pub fn invariant(file: &ModelFile, label: &str) -> Result<Report, CliError> {
    let ModelFile::Courant { data, witt } = file else {
        return Err(wrong_kind("invariant", file, "courant"));
    };
    let mut report = Report::new("invariant", label);
    let fe = data.invariant_fe().expect("validated data");
    report.value("f_e", &fe);
    if data.fiber_rank() % 2 == 0 {
        let theta = data.build_theta();
        let d = dirac_weyl(&theta).expect("even rank");
        let square = d.compose(&d).expect("same model");
        let mut scalar = BasePolynomial::zero(data.base_dim());
        for ((mask, beta), f) in square.terms() {
            if *mask == 0 && beta.iter().all(|&e| e == 0) {
                scalar += f;
            }
        }
        let residual = square
            .sub(&dgo_core::operator::SpinorOperator::from_poly(
                data.model(),
                scalar.clone(),
            ))
            .expect("same model");
        let witness = (!residual.is_zero()).then(|| residual.to_string());
        report.check("d_squared_is_a_function", residual.is_zero(), witness);
        if residual.is_zero() {
            let minus8 = scalar.scale(&Scalar::from_int(-8));
            report.value("minus8_d_squared", &minus8);
            let diff = &minus8 - &fe;
            let witness = (!diff.is_zero()).then(|| diff.to_string());
            report.check("invariant_matches_dirac", diff.is_zero(), witness);
        }
        if let Some(frame) = witt {
            if theta.is_p_free() {
                // a p-free cubic quantizes to the Clifford element with the
                // uniform weight 2^(-3/2); the frame represents it on the
                // spinor space and the square must be the predicted scalar
                let cl = chevalley(&theta)
                    .expect("p-free function")
                    .scale(&Scalar::sqrt2_pow(-3));
                let rep = witt_rep(&cl, frame).expect("frame fits the model");
                let square = rep.mul(&rep);
                let predicted = PolyMatrix::identity(data.base_dim(), frame.dim())
                    .scale_poly(&fe.scale(&Scalar::rational(-1, 8)));
                let agree = square == predicted;
                let witness = (!agree).then(|| first_matrix_mismatch(&square, &predicted));
                report.check("witt_matrix_oracle", agree, witness);
            } else {
                report.value("witt_matrix_oracle", "skipped (theta has momentum terms)");
            }
        }
    }
    Ok(report)
}

fn first_matrix_mismatch(got: &PolyMatrix, expected: &PolyMatrix) -> String {
    for i in 0..got.rows() {
        for j in 0..got.cols() {
            if got.at(i, j) != expected.at(i, j) {
                return format!(
                    "entry ({}, {}): got {}, expected {}",
                    i + 1,
                    j + 1,
                    got.at(i, j),
                    expected.at(i, j)
                );
            }
        }
    }
    "matrices agree".into()
}

/// The star expansion components of two graded function arguments.
pub fn star(
    file: &ModelFile,
    label: &str,
    left: &str,
    right: &str,
    max_degree: Option<u32>,
) -> Result<Report, CliError> {
    let ModelFile::Courant { data, .. } = file else {
        return Err(wrong_kind("star", file, "courant"));
    };
    let f = expr::parse_graded(left, data.model()).map_err(|error| CliError::Expr {
        what: "the first star argument",
        error,
    })?;
    let g = expr::parse_graded(right, data.model()).map_err(|error| CliError::Expr {
        what: "the second star argument",
        error,
    })?;
    let mut report = Report::new("star", label);
    report.value("f", &f);
    report.value("g", &g);
    let components =
        star_components(&f, &g).map_err(|e| CliError::Usage(e.to_string()))?;
    for (k, component) in components.iter().enumerate() {
        if let Some(bound) = max_degree {
            if 2 * k as u32 > bound {
                break;
            }
        }
        report.value(&format!("b{}", 2 * k), component);
    }
    Ok(report)
}

/// The principal symbol of an operator expression.
pub fn symbol(file: &ModelFile, label: &str, source: &str) -> Result<Report, CliError> {
    let ModelFile::Courant { data, .. } = file else {
        return Err(wrong_kind("symbol", file, "courant"));
    };
    let op = expr::parse_operator(source, data.model()).map_err(|error| CliError::Expr {
        what: "the operator argument",
        error,
    })?;
    let mut report = Report::new("symbol", label);
    report.value("operator", &op);
    match op.order() {
        None => {
            report.value("order", "none");
            report.value("principal_symbol", "0");
        }
        Some(order) => {
            report.value("order", order);
            report.value(
                "principal_symbol",
                op.principal_symbol().expect("nonzero operator"),
            );
        }
    }
    Ok(report)
}

/// The three equivalent compatibility verdicts for a dual pair, plus the
/// two homological squares.
pub fn bialg_check(file: &ModelFile, label: &str, seed: u64) -> Result<Report, CliError> {
    let ModelFile::BialgebroidPair(l, lstar) = file else {
        return Err(wrong_kind("bialg-check", file, "bialgebroid_pair"));
    };
    let mut report = Report::new("bialg-check", label);
    report.value("seed", seed);
    let q_ok = square_check(&mut report, "q_squared", &homological_q(l));
    let qs_ok = square_check(&mut report, "dual_q_squared", &homological_q(lstar));

    let (data, theta) = double_theta(l, lstar).expect("matching shapes");
    let battery = data.axiom_check(seed);
    let battery_ok = battery.passed();
    for result in battery.checks {
        report.check(&format!("double.{}", result.name), result.passed, result.witness);
    }
    let master = master_equation(&theta);
    let master_ok = master.is_zero();
    let witness = (!master_ok).then(|| master.to_string());
    report.check("double_master_equation", master_ok, witness);

    let operator = bialg_operator(l, lstar).expect("matching shapes");
    let square = operator.compose(&operator).expect("same shape");
    let mult_ok = square.is_multiplication();
    let witness = (!mult_ok).then(|| {
        square
            .sub(&ASpinorOperator::from_poly(
                l.base_dim(),
                l.rank(),
                square.scalar_part(),
            ))
            .expect("same shape")
            .to_string()
    });
    report.check("square_is_multiplication", mult_ok, witness);

    // the theorem under test: the three verdicts always travel together
    // (the homological squares are preconditions, not part of the triple)
    let agree = battery_ok == master_ok && master_ok == mult_ok;
    report.check(
        "three_way_equivalence",
        agree,
        (!agree).then(|| {
            format!(
                "axioms {}, master {}, squared operator {}",
                battery_ok, master_ok, mult_ok
            )
        }),
    );
    let _ = (q_ok, qs_ok);
    Ok(report)
}

fn square_check(report: &mut Report, name: &str, q: &ASpinorOperator) -> bool {
    let square = q.compose(q).expect("same shape");
    let ok = square.is_zero();
    let witness = (!ok).then(|| square.to_string());
    report.check(name, ok, witness);
    ok
}

/// The invariant of a compatible pair through both computation paths.
pub fn bialg_invariant_cmd(file: &ModelFile, label: &str) -> Result<Report, CliError> {
    let ModelFile::BialgebroidPair(l, lstar) = file else {
        return Err(wrong_kind("bialg-invariant", file, "bialgebroid_pair"));
    };
    let mut report = Report::new("bialg-invariant", label);
    match bialg_invariant(l, lstar) {
        Ok(invariant) => {
            report.check("pair_is_a_bialgebroid", true, None);
            report.value("invariant", &invariant);
            let (data, _) = double_theta(l, lstar).expect("matching shapes");
            let fe = data.invariant_fe().expect("validated data");
            report.value("double_f_e", &fe);
            let other = fe.scale(&Scalar::rational(-1, 8));
            let diff = &other - &invariant;
            let witness = (!diff.is_zero()).then(|| diff.to_string());
            report.check("paths_agree", diff.is_zero(), witness);
        }
        Err(CoreError::Domain(message)) => {
            report.check("pair_is_a_bialgebroid", false, Some(message));
        }
        Err(other) => panic!("unexpected engine error: {other}"),
    }
    Ok(report)
}
