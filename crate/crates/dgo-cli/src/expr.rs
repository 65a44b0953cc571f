//! Expression grammar shared by model files, command arguments, and the
//! machine readable reports.
//!
//! The grammar is deliberately small: rational literals, the field
//! constants `sqrt2` and `i`, indexed variables, and the operators
//! `+ - * / ^` with parentheses. Division is scalar division, the right
//! operand must evaluate to a nonzero constant; exponents are nonnegative
//! integers. Whitespace never matters. The same parser runs over three
//! coefficient algebras, selected by the variable set the context admits:
//!
//! * base polynomials: `x1 .. xN`
//! * graded functions: `x`, `xi`, `p`
//! * spinor operators: `x`, `c` (Clifford generators), `d` (derivatives)
//!
//! Every renderer in the engine emits strings this module parses back to
//! an equal value, which is what makes the machine output auditable.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use dgo_core::graded::GradedFunction;
use dgo_core::operator::SpinorOperator;
use dgo_core::poly::BasePolynomial;
use dgo_core::scalar::Scalar;
use dgo_core::space::Model;

/// Exponents above this bound are refused. The cap keeps adversarial
/// inputs from allocating unbounded expansions; every value the engine
/// itself renders stays far below it.
const MAX_EXPONENT: u32 = 512;

/// A parse or evaluation failure, with the 1-based source position of the
/// token that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ExprError {}

fn err<T>(line: u32, col: u32, message: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError {
        line,
        col,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    X,
    Xi,
    P,
    C,
    D,
}

impl VarKind {
    fn name(self) -> &'static str {
        match self {
            VarKind::X => "x",
            VarKind::Xi => "xi",
            VarKind::P => "p",
            VarKind::C => "c",
            VarKind::D => "d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Int(BigInt),
    Sqrt2,
    ImagUnit,
    Var(VarKind, usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(v) => write!(f, "integer {}", v),
            Token::Sqrt2 => f.write_str("sqrt2"),
            Token::ImagUnit => f.write_str("i"),
            Token::Var(kind, idx) => write!(f, "{}{}", kind.name(), idx),
            Token::Plus => f.write_str("'+'"),
            Token::Minus => f.write_str("'-'"),
            Token::Star => f.write_str("'*'"),
            Token::Slash => f.write_str("'/'"),
            Token::Caret => f.write_str("'^'"),
            Token::Open => f.write_str("'('"),
            Token::Close => f.write_str("')'"),
            Token::End => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    /// Next token plus the position where it starts.
    fn next_token(&mut self) -> Result<(Token, u32, u32), ExprError> {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let Some(b) = self.peek() else {
            return Ok((Token::End, line, col));
        };
        let tok = match b {
            b'+' => {
                self.bump();
                Token::Plus
            }
            b'-' => {
                self.bump();
                Token::Minus
            }
            b'*' => {
                self.bump();
                Token::Star
            }
            b'/' => {
                self.bump();
                Token::Slash
            }
            b'^' => {
                self.bump();
                Token::Caret
            }
            b'(' => {
                self.bump();
                Token::Open
            }
            b')' => {
                self.bump();
                Token::Close
            }
            b'0'..=b'9' => {
                let mut digits = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    digits.push(self.bump() as char);
                }
                let value: BigInt = digits.parse().expect("ascii digits");
                Token::Int(value)
            }
            b'a'..=b'z' => {
                let mut word = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_lowercase()) {
                    word.push(self.bump() as char);
                }
                let mut index = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    index.push(self.bump() as char);
                }
                return match (word.as_str(), index.as_str()) {
                    ("sqrt", "2") => Ok((Token::Sqrt2, line, col)),
                    ("sqrt", _) => err(line, col, "the only square root literal is sqrt2"),
                    ("i", "") => Ok((Token::ImagUnit, line, col)),
                    (name, "") => err(line, col, format!("unknown name '{}'", name)),
                    (name, idx) => {
                        let kind = match name {
                            "x" => VarKind::X,
                            "xi" => VarKind::Xi,
                            "p" => VarKind::P,
                            "c" => VarKind::C,
                            "d" => VarKind::D,
                            _ => return err(line, col, format!("unknown variable family '{}'", name)),
                        };
                        let parsed: usize = idx.parse().map_err(|_| ExprError {
                            line,
                            col,
                            message: format!("variable index '{}' is too large", idx),
                        })?;
                        if parsed == 0 {
                            return err(line, col, "variable indices start at 1");
                        }
                        Ok((Token::Var(kind, parsed), line, col))
                    }
                };
            }
            other => {
                return err(
                    line,
                    col,
                    format!("unexpected character '{}'", other as char),
                )
            }
        };
        Ok((tok, line, col))
    }
}

#[derive(Debug, Clone)]
enum Ast {
    Int(BigInt),
    Sqrt2,
    ImagUnit,
    Var(VarKind, usize),
    Neg(Box<Spanned>),
    Add(Box<Spanned>, Box<Spanned>),
    Sub(Box<Spanned>, Box<Spanned>),
    Mul(Box<Spanned>, Box<Spanned>),
    Div(Box<Spanned>, Box<Spanned>),
    Pow(Box<Spanned>, u32),
}

#[derive(Debug, Clone)]
struct Spanned {
    node: Ast,
    line: u32,
    col: u32,
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Token,
    line: u32,
    col: u32,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut lexer = Lexer::new(src);
        let (current, line, col) = lexer.next_token()?;
        Ok(Parser {
            lexer,
            current,
            line,
            col,
        })
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let (tok, line, col) = self.lexer.next_token()?;
        self.current = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    fn parse(src: &'a str) -> Result<Spanned, ExprError> {
        let mut parser = Parser::new(src)?;
        let expr = parser.expr()?;
        if parser.current != Token::End {
            return err(
                parser.line,
                parser.col,
                format!("expected an operator or the end, found {}", parser.current),
            );
        }
        Ok(expr)
    }

    fn expr(&mut self) -> Result<Spanned, ExprError> {
        let mut left = self.term()?;
        loop {
            let op = match self.current {
                Token::Plus => Ast::Add as fn(Box<Spanned>, Box<Spanned>) -> Ast,
                Token::Minus => Ast::Sub,
                _ => return Ok(left),
            };
            let (line, col) = (self.line, self.col);
            self.advance()?;
            let right = self.term()?;
            left = Spanned {
                node: op(Box::new(left), Box::new(right)),
                line,
                col,
            };
        }
    }

    fn term(&mut self) -> Result<Spanned, ExprError> {
        let mut left = self.factor()?;
        loop {
            let op = match self.current {
                Token::Star => Ast::Mul as fn(Box<Spanned>, Box<Spanned>) -> Ast,
                Token::Slash => Ast::Div,
                _ => return Ok(left),
            };
            let (line, col) = (self.line, self.col);
            self.advance()?;
            let right = self.factor()?;
            left = Spanned {
                node: op(Box::new(left), Box::new(right)),
                line,
                col,
            };
        }
    }

    fn factor(&mut self) -> Result<Spanned, ExprError> {
        match self.current {
            Token::Minus => {
                let (line, col) = (self.line, self.col);
                self.advance()?;
                let inner = self.factor()?;
                Ok(Spanned {
                    node: Ast::Neg(Box::new(inner)),
                    line,
                    col,
                })
            }
            Token::Plus => {
                self.advance()?;
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Spanned, ExprError> {
        let base = self.atom()?;
        if self.current != Token::Caret {
            return Ok(base);
        }
        let (line, col) = (self.line, self.col);
        self.advance()?;
        let exponent = self.exponent()?;
        Ok(Spanned {
            node: Ast::Pow(Box::new(base), exponent),
            line,
            col,
        })
    }

    /// A nonnegative integer, optionally parenthesized and signed; a
    /// negative value is reported as such rather than as a syntax error.
    fn exponent(&mut self) -> Result<u32, ExprError> {
        let (line, col) = (self.line, self.col);
        let mut parens = false;
        if self.current == Token::Open {
            parens = true;
            self.advance()?;
        }
        let mut negative = false;
        if parens && self.current == Token::Minus {
            negative = true;
            self.advance()?;
        }
        let value = match &self.current {
            Token::Int(v) => v.clone(),
            other => {
                return err(
                    self.line,
                    self.col,
                    format!("expected an integer exponent, found {}", other),
                )
            }
        };
        self.advance()?;
        if parens {
            if self.current != Token::Close {
                return err(
                    self.line,
                    self.col,
                    format!("expected ')', found {}", self.current),
                );
            }
            self.advance()?;
        }
        if negative {
            return err(line, col, "negative exponents are not allowed");
        }
        match u32::try_from(&value) {
            Ok(k) if k <= MAX_EXPONENT => Ok(k),
            _ => err(
                line,
                col,
                format!("exponent {} exceeds the limit {}", value, MAX_EXPONENT),
            ),
        }
    }

    fn atom(&mut self) -> Result<Spanned, ExprError> {
        let (line, col) = (self.line, self.col);
        let node = match &self.current {
            Token::Int(v) => Ast::Int(v.clone()),
            Token::Sqrt2 => Ast::Sqrt2,
            Token::ImagUnit => Ast::ImagUnit,
            Token::Var(kind, idx) => Ast::Var(*kind, *idx),
            Token::Open => {
                self.advance()?;
                let inner = self.expr()?;
                if self.current != Token::Close {
                    return err(
                        self.line,
                        self.col,
                        format!("expected ')', found {}", self.current),
                    );
                }
                self.advance()?;
                return Ok(inner);
            }
            other => {
                return err(
                    line,
                    col,
                    format!("expected a value, found {}", other),
                )
            }
        };
        self.advance()?;
        Ok(Spanned { node, line, col })
    }
}

/// The coefficient algebras an expression can evaluate into. Addition and
/// multiplication never fail inside one context, so the trait keeps them
/// total; division routes through `as_scalar`.
trait Algebra: Sized + Clone {
    fn from_scalar(&self, s: &Scalar) -> Self;
    fn variable(&self, kind: VarKind, index: usize) -> Option<Self>;
    /// Whether the variable family exists at all in this context, to tell
    /// a wrong family apart from an index outside the model.
    fn admits(kind: VarKind) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// The scalar value when the element is a constant.
    fn as_scalar(&self) -> Option<Scalar>;
    fn context_name() -> &'static str;
}

impl Algebra for BasePolynomial {
    fn from_scalar(&self, s: &Scalar) -> Self {
        BasePolynomial::constant(self.vars(), s.clone())
    }

    fn variable(&self, kind: VarKind, index: usize) -> Option<Self> {
        match kind {
            VarKind::X => BasePolynomial::var(self.vars(), index).ok(),
            _ => None,
        }
    }

    fn admits(kind: VarKind) -> bool {
        kind == VarKind::X
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn as_scalar(&self) -> Option<Scalar> {
        let mut terms = self.terms();
        match terms.next() {
            None => Some(Scalar::zero()),
            Some((exps, coeff)) if exps.iter().all(|&e| e == 0) && terms.next().is_none() => {
                Some(coeff.clone())
            }
            _ => None,
        }
    }

    fn context_name() -> &'static str {
        "a base polynomial"
    }
}

impl Algebra for GradedFunction {
    fn from_scalar(&self, s: &Scalar) -> Self {
        GradedFunction::constant(self.model(), s.clone())
    }

    fn variable(&self, kind: VarKind, index: usize) -> Option<Self> {
        match kind {
            VarKind::X => GradedFunction::x(self.model(), index).ok(),
            VarKind::Xi => GradedFunction::xi(self.model(), index).ok(),
            VarKind::P => GradedFunction::p(self.model(), index).ok(),
            _ => None,
        }
    }

    fn admits(kind: VarKind) -> bool {
        matches!(kind, VarKind::X | VarKind::Xi | VarKind::P)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.add(rhs).expect("both sides share the context model")
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.product(rhs).expect("both sides share the context model")
    }

    fn neg(&self) -> Self {
        GradedFunction::neg(self)
    }

    fn as_scalar(&self) -> Option<Scalar> {
        let mut terms = self.terms();
        match terms.next() {
            None => Some(Scalar::zero()),
            Some(((mask, beta), coeff))
                if *mask == 0 && beta.iter().all(|&e| e == 0) && terms.next().is_none() =>
            {
                Algebra::as_scalar(coeff)
            }
            _ => None,
        }
    }

    fn context_name() -> &'static str {
        "a graded function"
    }
}

impl Algebra for SpinorOperator {
    fn from_scalar(&self, s: &Scalar) -> Self {
        SpinorOperator::scalar(self.model(), s.clone())
    }

    fn variable(&self, kind: VarKind, index: usize) -> Option<Self> {
        match kind {
            VarKind::X => {
                let f = BasePolynomial::var(self.model().base_dim(), index).ok()?;
                Some(SpinorOperator::from_poly(self.model(), f))
            }
            VarKind::C => SpinorOperator::clifford_gen(self.model(), index).ok(),
            VarKind::D => SpinorOperator::derivative(self.model(), index).ok(),
            _ => None,
        }
    }

    fn admits(kind: VarKind) -> bool {
        matches!(kind, VarKind::X | VarKind::C | VarKind::D)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.add(rhs).expect("both sides share the context model")
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.compose(rhs).expect("both sides share the context model")
    }

    fn neg(&self) -> Self {
        SpinorOperator::neg(self)
    }

    fn as_scalar(&self) -> Option<Scalar> {
        let mut terms = self.terms();
        match terms.next() {
            None => Some(Scalar::zero()),
            Some(((mask, beta), coeff))
                if *mask == 0 && beta.iter().all(|&e| e == 0) && terms.next().is_none() =>
            {
                Algebra::as_scalar(coeff)
            }
            _ => None,
        }
    }

    fn context_name() -> &'static str {
        "an operator"
    }
}

fn eval<A: Algebra>(spanned: &Spanned, zero: &A) -> Result<A, ExprError> {
    let (line, col) = (spanned.line, spanned.col);
    match &spanned.node {
        Ast::Int(v) => Ok(zero.from_scalar(&Scalar::from_rat(BigRational::from(v.clone())))),
        Ast::Sqrt2 => Ok(zero.from_scalar(&Scalar::sqrt2())),
        Ast::ImagUnit => Ok(zero.from_scalar(&Scalar::i())),
        Ast::Var(kind, index) => zero.variable(*kind, *index).ok_or_else(|| ExprError {
            line,
            col,
            message: if A::admits(*kind) {
                format!("{}{} is outside the model", kind.name(), index)
            } else {
                format!(
                    "{}{} is not available here (the context is {})",
                    kind.name(),
                    index,
                    A::context_name()
                )
            },
        }),
        Ast::Neg(inner) => Ok(eval(inner, zero)?.neg()),
        Ast::Add(a, b) => Ok(eval(a, zero)?.add(&eval(b, zero)?)),
        Ast::Sub(a, b) => Ok(eval(a, zero)?.add(&eval(b, zero)?.neg())),
        Ast::Mul(a, b) => Ok(eval(a, zero)?.mul(&eval(b, zero)?)),
        Ast::Div(a, b) => {
            let denom = eval(b, zero)?;
            let scalar = denom.as_scalar().ok_or_else(|| ExprError {
                line,
                col,
                message: "division is only by constants".into(),
            })?;
            let inv = scalar.inverse().map_err(|_| ExprError {
                line,
                col,
                message: "division by zero".into(),
            })?;
            Ok(eval(a, zero)?.mul(&zero.from_scalar(&inv)))
        }
        Ast::Pow(base, k) => {
            let mut acc = zero.from_scalar(&Scalar::one());
            let mut square = eval(base, zero)?;
            let mut left = *k;
            while left > 0 {
                if left & 1 == 1 {
                    acc = acc.mul(&square);
                }
                left >>= 1;
                if left > 0 {
                    square = square.mul(&square);
                }
            }
            Ok(acc)
        }
    }
}

/// Parses a base polynomial in the variables `x1 .. xn`.
pub fn parse_polynomial(src: &str, n: usize) -> Result<BasePolynomial, ExprError> {
    let ast = Parser::parse(src)?;
    eval(&ast, &BasePolynomial::zero(n))
}

/// Parses a graded function in `x`, `xi`, `p` over the model.
pub fn parse_graded(src: &str, sig: &Model) -> Result<GradedFunction, ExprError> {
    let ast = Parser::parse(src)?;
    eval(&ast, &GradedFunction::zero(sig))
}

/// Parses a spinor operator word in `x`, `c`, `d` over the model; products
/// compose, so the order of noncommuting factors is respected.
pub fn parse_operator(src: &str, sig: &Model) -> Result<SpinorOperator, ExprError> {
    let ast = Parser::parse(src)?;
    eval(&ast, &SpinorOperator::zero(sig))
}

/// Parses a constant of the coefficient field.
pub fn parse_scalar(src: &str) -> Result<Scalar, ExprError> {
    let value = parse_polynomial(src, 0)?;
    Algebra::as_scalar(&value).ok_or_else(|| ExprError {
        line: 1,
        col: 1,
        message: "expected a constant".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dgo_core::sampling;
    use dgo_core::space::ModelSignature;

    fn model() -> Model {
        ModelSignature::euclidean(2, 3)
    }

    #[test]
    fn polynomial_basics() {
        let p = parse_polynomial("x1^2 + 3/2*x2", 2).unwrap();
        let x1 = BasePolynomial::var(2, 1).unwrap();
        let x2 = BasePolynomial::var(2, 2).unwrap();
        let expected = &(&x1 * &x1) + &x2.scale(&Scalar::rational(3, 2));
        assert_eq!(p, expected);
        // whitespace and parentheses are free
        assert_eq!(parse_polynomial(" x1 ^ 2+3/2 * x2 ", 2).unwrap(), expected);
        assert_eq!(
            parse_polynomial("(x1 + x2)*(x1 - x2)", 2).unwrap(),
            parse_polynomial("x1^2 - x2^2", 2).unwrap()
        );
        // unary minus chains and scalar division
        assert_eq!(
            parse_polynomial("--x1", 2).unwrap(),
            parse_polynomial("x1", 2).unwrap()
        );
        assert_eq!(
            parse_polynomial("x1/2", 2).unwrap(),
            x1.scale(&Scalar::half())
        );
        assert_eq!(parse_polynomial("0", 2).unwrap(), BasePolynomial::zero(2));
    }

    #[test]
    fn rejects_with_positions() {
        // negative exponent, the documented refusal
        let e = parse_polynomial("x1^(-1)", 2).unwrap_err();
        assert!(e.message.contains("negative exponent"), "{}", e);
        let e = parse_polynomial("x3 + 1", 2).unwrap_err();
        assert!(e.message.contains("x3"), "{}", e);
        assert_eq!((e.line, e.col), (1, 1));
        let e = parse_polynomial("x1 +\n* x2", 2).unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_polynomial("2*?", 2).unwrap_err();
        assert!(e.message.contains("unexpected character"), "{}", e);
        let e = parse_polynomial("x1/(x2)", 2).unwrap_err();
        assert!(e.message.contains("only by constants"), "{}", e);
        let e = parse_polynomial("1/0", 2).unwrap_err();
        assert!(e.message.contains("division by zero"), "{}", e);
        let e = parse_polynomial("x1^600", 2).unwrap_err();
        assert!(e.message.contains("limit"), "{}", e);
        let e = parse_polynomial("xi1", 2).unwrap_err();
        assert!(e.message.contains("not available here"), "{}", e);
        assert!(parse_polynomial("", 2).is_err());
        assert!(parse_polynomial("x1 x2", 2).is_err());
    }

    #[test]
    fn graded_and_operator_contexts() {
        let sig = model();
        let f = parse_graded("xi1*xi2*p1 - i*x2", &sig).unwrap();
        let by_hand = GradedFunction::monomial(
            &sig,
            0b11,
            vec![1, 0],
            BasePolynomial::one(2),
        )
        .add(&GradedFunction::x(&sig, 2).unwrap().scale(&Scalar::i()).neg())
        .unwrap();
        assert_eq!(f, by_hand);
        // odd variables square to zero through the algebra itself
        assert!(parse_graded("xi2^2", &sig).unwrap().is_zero());
        // operator words multiply by composition: c1*d1 vs d1*c1 differ
        // by nothing (c is constant), but d1*x1 picks up the Leibniz term
        let a = parse_operator("d1*x1", &sig).unwrap();
        let b = parse_operator("x1*d1 + 1", &sig).unwrap();
        assert_eq!(a, b);
        let e = parse_operator("p1", &sig).unwrap_err();
        assert!(e.message.contains("not available here"), "{}", e);
        let e = parse_graded("d1", &sig).unwrap_err();
        assert!(e.message.contains("not available here"), "{}", e);
    }

    #[test]
    fn scalar_constants() {
        let s = parse_scalar("1/2 + 3*sqrt2 - i*sqrt2").unwrap();
        let expected = &(&Scalar::half() + &(&Scalar::from_int(3) * &Scalar::sqrt2()))
            - &(&Scalar::i() * &Scalar::sqrt2());
        assert_eq!(s, expected);
        assert!(parse_scalar("x1").is_err());
        // 1/sqrt2 lands back in the field
        assert_eq!(
            parse_scalar("1/sqrt2").unwrap(),
            Scalar::sqrt2().inverse().unwrap()
        );
    }

    #[test]
    fn rendered_values_parse_back() {
        let mut rng = sampling::rng_from_seed(0x9e11);
        for _ in 0..60 {
            let p = sampling::rand_poly(&mut rng, 3, 4, 5);
            let back = parse_polynomial(&p.to_string(), 3).unwrap();
            assert_eq!(back, p, "round trip failed on {}", p);
        }
        let sig = model();
        for degree in 0..4u32 {
            for _ in 0..10 {
                let f = sampling::rand_homogeneous(&mut rng, &sig, degree);
                let back = parse_graded(&f.to_string(), &sig).unwrap();
                assert_eq!(back, f, "round trip failed on {}", f);
            }
        }
        for _ in 0..20 {
            let s = sampling::rand_scalar(&mut rng);
            assert_eq!(parse_scalar(&s.to_string()).unwrap(), s);
        }
    }
}
