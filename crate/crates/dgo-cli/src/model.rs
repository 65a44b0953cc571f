//! The model file format: a line oriented key/value + block text format
//! describing a Courant structure, a Lie algebroid, or a dual pair.
//!
//! The full grammar lives in FORMAT.md at the repository root. In short:
//! `#` starts a comment, `key = value` lines set the header fields, and
//! named blocks carry the tensors. Matrix blocks (`metric`, `witt_frame`)
//! hold one row per line with comma separated scalar expressions; sparse
//! blocks (`anchor`, `torsion`, `bracket`, `dual_anchor`, `dual_bracket`)
//! hold `indices = expression` lines, and every omitted entry is zero.
//!
//! Validation failures carry a [`ModelErrorKind`] so the front end can
//! report parse problems, dimension problems, and metric problems as the
//! distinct input error categories the exit code contract documents.

use std::fmt;

use dgo_core::bialgebroid::LieAlgebroidData;
use dgo_core::clifford::WittFrame;
use dgo_core::courant::CourantData;
use dgo_core::matrix::Matrix;
use dgo_core::poly::BasePolynomial;
use dgo_core::scalar::Scalar;
use dgo_core::Error as CoreError;

use crate::expr;

/// What went wrong while reading a model file; all kinds exit with the
/// input error code, the category names the failing stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelErrorKind {
    /// Tokens or syntax, including expression syntax inside entries.
    Parse,
    /// Counts, ranges, duplicates, or missing fields.
    Dimension,
    /// The metric failed to be symmetric, real, or invertible, or the
    /// supplied Witt frame is inconsistent with it.
    Metric,
}

impl ModelErrorKind {
    pub fn category(self) -> &'static str {
        match self {
            ModelErrorKind::Parse => "parse",
            ModelErrorKind::Dimension => "dimension",
            ModelErrorKind::Metric => "metric",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelError {
    pub kind: ModelErrorKind,
    /// 1-based line in the model file; 0 when the problem is global.
    pub line: u32,
    pub message: String,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

impl std::error::Error for ModelError {}

fn fail<T>(kind: ModelErrorKind, line: u32, message: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError {
        kind,
        line,
        message: message.into(),
    })
}

/// A parsed and validated model file.
#[derive(Debug, Clone)]
pub enum ModelFile {
    Courant {
        data: CourantData,
        witt: Option<WittFrame>,
    },
    LieAlgebroid(LieAlgebroidData),
    BialgebroidPair(LieAlgebroidData, LieAlgebroidData),
}

impl ModelFile {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelFile::Courant { .. } => "courant",
            ModelFile::LieAlgebroid(_) => "lie_algebroid",
            ModelFile::BialgebroidPair(..) => "bialgebroid_pair",
        }
    }
}

/// One uncommented, nonblank source line.
struct Line<'a> {
    number: u32,
    text: &'a str,
}

fn logical_lines(src: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let text = match raw.find('#') {
            Some(cut) => &raw[..cut],
            None => raw,
        }
        .trim();
        if !text.is_empty() {
            out.push(Line {
                number: idx as u32 + 1,
                text,
            });
        }
    }
    out
}

/// Sparse block entry: the indices on the left of `=`, the expression
/// source on the right.
struct Entry<'a> {
    line: u32,
    indices: Vec<usize>,
    expr: &'a str,
}

enum Block<'a> {
    Matrix {
        name: &'a str,
        line: u32,
        rows: Vec<(u32, &'a str)>,
    },
    Sparse {
        name: &'a str,
        line: u32,
        entries: Vec<Entry<'a>>,
    },
}

struct RawModel<'a> {
    header: Vec<(u32, &'a str, &'a str)>,
    blocks: Vec<Block<'a>>,
}

const MATRIX_BLOCKS: [&str; 2] = ["metric", "witt_frame"];
const SPARSE_BLOCKS: [&str; 5] = ["anchor", "torsion", "bracket", "dual_anchor", "dual_bracket"];

fn split_raw(src: &str) -> Result<RawModel<'_>, ModelError> {
    let lines = logical_lines(src);
    let mut header = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = &lines[i];
        if let Some(name) = line.text.strip_suffix('{') {
            let name = name.trim();
            let is_matrix = MATRIX_BLOCKS.contains(&name);
            if !is_matrix && !SPARSE_BLOCKS.contains(&name) {
                return fail(
                    ModelErrorKind::Parse,
                    line.number,
                    format!("unknown block '{}'", name),
                );
            }
            if blocks.iter().any(|b| match b {
                Block::Matrix { name: n, .. } | Block::Sparse { name: n, .. } => *n == name,
            }) {
                return fail(
                    ModelErrorKind::Dimension,
                    line.number,
                    format!("block '{}' appears twice", name),
                );
            }
            let open = line.number;
            let mut body = Vec::new();
            i += 1;
            loop {
                let Some(inner) = lines.get(i) else {
                    return fail(
                        ModelErrorKind::Parse,
                        open,
                        format!("block '{}' is never closed", name),
                    );
                };
                if inner.text == "}" {
                    break;
                }
                body.push((inner.number, inner.text));
                i += 1;
            }
            i += 1; // past the closing brace
            if is_matrix {
                blocks.push(Block::Matrix {
                    name,
                    line: open,
                    rows: body,
                });
            } else {
                let mut entries = Vec::new();
                for (number, text) in body {
                    let Some((left, right)) = text.split_once('=') else {
                        return fail(
                            ModelErrorKind::Parse,
                            number,
                            "expected 'indices = expression'",
                        );
                    };
                    let mut indices = Vec::new();
                    for word in left.split_whitespace() {
                        match word.parse::<usize>() {
                            Ok(v) if v >= 1 => indices.push(v),
                            _ => {
                                return fail(
                                    ModelErrorKind::Parse,
                                    number,
                                    format!("'{}' is not a 1-based index", word),
                                )
                            }
                        }
                    }
                    entries.push(Entry {
                        line: number,
                        indices,
                        expr: right.trim(),
                    });
                }
                blocks.push(Block::Sparse {
                    name,
                    line: open,
                    entries,
                });
            }
            continue;
        }
        let Some((key, value)) = line.text.split_once('=') else {
            return fail(
                ModelErrorKind::Parse,
                line.number,
                "expected 'key = value' or a block",
            );
        };
        header.push((line.number, key.trim(), value.trim()));
        i += 1;
    }
    Ok(RawModel { header, blocks })
}

/// Parses and validates a model file. The error distinguishes syntax,
/// dimension, and metric problems; all of them are input errors.
pub fn parse_model(src: &str) -> Result<ModelFile, ModelError> {
    let raw = split_raw(src)?;

    let mut kind: Option<(u32, &str)> = None;
    let mut base_dim: Option<(u32, usize)> = None;
    let mut rank: Option<(u32, usize, &str)> = None;
    for (line, key, value) in &raw.header {
        match *key {
            "kind" => {
                if kind.is_some() {
                    return fail(ModelErrorKind::Dimension, *line, "kind appears twice");
                }
                kind = Some((*line, value));
            }
            "base_dim" => {
                if base_dim.is_some() {
                    return fail(ModelErrorKind::Dimension, *line, "base_dim appears twice");
                }
                let v = value.parse::<usize>().map_err(|_| ModelError {
                    kind: ModelErrorKind::Parse,
                    line: *line,
                    message: format!("base_dim must be a nonnegative integer, got '{}'", value),
                })?;
                base_dim = Some((*line, v));
            }
            "fiber_rank" | "rank" => {
                if rank.is_some() {
                    return fail(ModelErrorKind::Dimension, *line, "the rank appears twice");
                }
                let v = value.parse::<usize>().map_err(|_| ModelError {
                    kind: ModelErrorKind::Parse,
                    line: *line,
                    message: format!("{} must be a positive integer, got '{}'", key, value),
                })?;
                rank = Some((*line, v, key));
            }
            other => {
                return fail(
                    ModelErrorKind::Parse,
                    *line,
                    format!("unknown key '{}'", other),
                )
            }
        }
    }
    let Some((kind_line, kind_name)) = kind else {
        return fail(ModelErrorKind::Dimension, 0, "missing 'kind'");
    };
    let Some((_, n)) = base_dim else {
        return fail(ModelErrorKind::Dimension, 0, "missing 'base_dim'");
    };
    let Some((rank_line, m, rank_key)) = rank else {
        return fail(
            ModelErrorKind::Dimension,
            0,
            "missing 'fiber_rank' (courant) or 'rank'",
        );
    };
    if m == 0 || m > 60 {
        return fail(
            ModelErrorKind::Dimension,
            rank_line,
            format!("the rank must be between 1 and 60, got {}", m),
        );
    }
    if n > 60 {
        return fail(
            ModelErrorKind::Dimension,
            rank_line,
            format!("base_dim must be at most 60, got {}", n),
        );
    }

    match kind_name {
        "courant" => {
            if rank_key != "fiber_rank" {
                return fail(
                    ModelErrorKind::Dimension,
                    rank_line,
                    "courant models name their rank 'fiber_rank'",
                );
            }
            build_courant(&raw, n, m)
        }
        "lie_algebroid" => {
            if rank_key != "rank" {
                return fail(
                    ModelErrorKind::Dimension,
                    rank_line,
                    "lie_algebroid models name their rank 'rank'",
                );
            }
            allow_blocks(&raw, &["anchor", "bracket"])?;
            let data = build_algebroid(&raw, n, m, "anchor", "bracket")?;
            Ok(ModelFile::LieAlgebroid(data))
        }
        "bialgebroid_pair" => {
            if rank_key != "rank" {
                return fail(
                    ModelErrorKind::Dimension,
                    rank_line,
                    "bialgebroid_pair models name their rank 'rank'",
                );
            }
            allow_blocks(&raw, &["anchor", "bracket", "dual_anchor", "dual_bracket"])?;
            let a = build_algebroid(&raw, n, m, "anchor", "bracket")?;
            let b = build_algebroid(&raw, n, m, "dual_anchor", "dual_bracket")?;
            Ok(ModelFile::BialgebroidPair(a, b))
        }
        other => fail(
            ModelErrorKind::Parse,
            kind_line,
            format!(
                "unknown kind '{}' (expected courant, lie_algebroid, or bialgebroid_pair)",
                other
            ),
        ),
    }
}

fn allow_blocks(raw: &RawModel, names: &[&str]) -> Result<(), ModelError> {
    for block in &raw.blocks {
        let (name, line) = match block {
            Block::Matrix { name, line, .. } | Block::Sparse { name, line, .. } => (*name, *line),
        };
        if !names.contains(&name) {
            return fail(
                ModelErrorKind::Dimension,
                line,
                format!("block '{}' does not belong to this kind", name),
            );
        }
    }
    Ok(())
}

fn find_matrix<'a>(raw: &'a RawModel, name: &str) -> Option<(u32, &'a [(u32, &'a str)])> {
    raw.blocks.iter().find_map(|b| match b {
        Block::Matrix {
            name: n,
            line,
            rows,
        } if *n == name => Some((*line, rows.as_slice())),
        _ => None,
    })
}

fn find_sparse<'a>(raw: &'a RawModel, name: &str) -> Option<&'a [Entry<'a>]> {
    raw.blocks.iter().find_map(|b| match b {
        Block::Sparse {
            name: n, entries, ..
        } if *n == name => Some(entries.as_slice()),
        _ => None,
    })
}

fn parse_scalar_matrix(
    rows: &[(u32, &str)],
    open_line: u32,
    m: usize,
    what: &str,
) -> Result<Vec<Vec<Scalar>>, ModelError> {
    if rows.len() != m {
        return fail(
            ModelErrorKind::Dimension,
            open_line,
            format!("{} needs {} rows, found {}", what, m, rows.len()),
        );
    }
    let mut out = Vec::with_capacity(m);
    for (line, text) in rows {
        let cells: Vec<&str> = text.split(',').collect();
        if cells.len() != m {
            return fail(
                ModelErrorKind::Dimension,
                *line,
                format!("{} rows need {} entries, found {}", what, m, cells.len()),
            );
        }
        let mut row = Vec::with_capacity(m);
        for cell in cells {
            let value = expr::parse_scalar(cell).map_err(|e| ModelError {
                kind: ModelErrorKind::Parse,
                line: *line,
                message: format!("in {} entry: {}", what, e),
            })?;
            row.push(value);
        }
        out.push(row);
    }
    Ok(out)
}

fn entry_poly(entry: &Entry, n: usize, what: &str) -> Result<BasePolynomial, ModelError> {
    expr::parse_polynomial(entry.expr, n).map_err(|e| ModelError {
        kind: ModelErrorKind::Parse,
        line: entry.line,
        message: format!("in {} entry: {}", what, e),
    })
}

fn check_range(
    entry: &Entry,
    slot: usize,
    bound: usize,
    what: &str,
) -> Result<usize, ModelError> {
    let v = entry.indices[slot];
    if v > bound {
        return fail(
            ModelErrorKind::Dimension,
            entry.line,
            format!("{} index {} is out of range 1..={}", what, v, bound),
        );
    }
    Ok(v)
}

fn build_courant(raw: &RawModel, n: usize, m: usize) -> Result<ModelFile, ModelError> {
    allow_blocks(raw, &["metric", "anchor", "torsion", "witt_frame"])?;
    let Some((metric_line, metric_rows)) = find_matrix(raw, "metric") else {
        return fail(ModelErrorKind::Dimension, 0, "courant models need a metric block");
    };
    let rows = parse_scalar_matrix(metric_rows, metric_line, m, "metric")?;
    let metric = Matrix::from_rows(rows).map_err(|e| ModelError {
        kind: ModelErrorKind::Metric,
        line: metric_line,
        message: e.to_string(),
    })?;

    let mut rho = vec![vec![BasePolynomial::zero(n); m]; n];
    if let Some(entries) = find_sparse(raw, "anchor") {
        for entry in entries {
            if entry.indices.len() != 2 {
                return fail(
                    ModelErrorKind::Parse,
                    entry.line,
                    "anchor entries look like 'i a = expression'",
                );
            }
            let i = check_range(entry, 0, n, "coordinate")?;
            let a = check_range(entry, 1, m, "fiber")?;
            if !rho[i - 1][a - 1].is_zero() {
                return fail(
                    ModelErrorKind::Dimension,
                    entry.line,
                    format!("anchor entry {} {} appears twice", i, a),
                );
            }
            rho[i - 1][a - 1] = entry_poly(entry, n, "anchor")?;
        }
    }

    // the file gives the fully antisymmetric lowered torsion <[a,b], c>;
    // the engine wants the third index raised back to a frame index
    let inverse = metric.inverse().map_err(|e| ModelError {
        kind: ModelErrorKind::Metric,
        line: metric_line,
        message: e.to_string(),
    })?;
    let mut lowered = vec![vec![vec![BasePolynomial::zero(n); m]; m]; m];
    if let Some(entries) = find_sparse(raw, "torsion") {
        for entry in entries {
            if entry.indices.len() != 3 {
                return fail(
                    ModelErrorKind::Parse,
                    entry.line,
                    "torsion entries look like 'a b c = expression'",
                );
            }
            let a = check_range(entry, 0, m, "fiber")?;
            let b = check_range(entry, 1, m, "fiber")?;
            let c = check_range(entry, 2, m, "fiber")?;
            if !(a < b && b < c) {
                return fail(
                    ModelErrorKind::Dimension,
                    entry.line,
                    "torsion entries are given once, with a < b < c",
                );
            }
            if !lowered[a - 1][b - 1][c - 1].is_zero() {
                return fail(
                    ModelErrorKind::Dimension,
                    entry.line,
                    format!("torsion entry {} {} {} appears twice", a, b, c),
                );
            }
            let f = entry_poly(entry, n, "torsion")?;
            // fill the full antisymmetrization
            let signed: [(usize, usize, usize, bool); 6] = [
                (a, b, c, false),
                (b, c, a, false),
                (c, a, b, false),
                (b, a, c, true),
                (a, c, b, true),
                (c, b, a, true),
            ];
            for (p, q, r, negate) in signed {
                lowered[p - 1][q - 1][r - 1] = if negate { -&f } else { f.clone() };
            }
        }
    }
    let mut t = vec![vec![vec![BasePolynomial::zero(n); m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            for big in 0..m {
                let mut sum = BasePolynomial::zero(n);
                for c in 0..m {
                    if !lowered[a][b][c].is_zero() {
                        sum += &lowered[a][b][c].scale(inverse.at(c, big));
                    }
                }
                t[a][b][big] = sum;
            }
        }
    }

    let data = CourantData::new(n, metric, rho, t).map_err(|e| ModelError {
        kind: match e {
            CoreError::NotSymmetric | CoreError::NotReal | CoreError::SingularMatrix => {
                ModelErrorKind::Metric
            }
            _ => ModelErrorKind::Dimension,
        },
        line: 0,
        message: e.to_string(),
    })?;

    let witt = match find_matrix(raw, "witt_frame") {
        None => None,
        Some((line, rows)) => {
            if m % 2 != 0 {
                return fail(
                    ModelErrorKind::Dimension,
                    line,
                    "a witt_frame needs an even fiber rank",
                );
            }
            let all = parse_scalar_matrix(rows, line, m, "witt_frame")?;
            let half = m / 2;
            let e_rows = all[..half].to_vec();
            let f_rows = all[half..].to_vec();
            let frame = WittFrame::new(data.model(), e_rows, f_rows).map_err(|e| ModelError {
                kind: ModelErrorKind::Metric,
                line,
                message: format!("witt_frame is inconsistent with the metric: {}", e),
            })?;
            Some(frame)
        }
    };

    Ok(ModelFile::Courant { data, witt })
}

fn build_algebroid(
    raw: &RawModel,
    n: usize,
    r: usize,
    anchor_block: &str,
    bracket_block: &str,
) -> Result<LieAlgebroidData, ModelError> {
    let mut rho = vec![vec![BasePolynomial::zero(n); r]; n];
    if let Some(entries) = find_sparse(raw, anchor_block) {
        for entry in entries {
            if entry.indices.len() != 2 {
                return fail(
                    ModelErrorKind::Parse,
                    entry.line,
                    format!("{} entries look like 'i a = expression'", anchor_block),
                );
            }
            let i = check_range(entry, 0, n, "coordinate")?;
            let a = check_range(entry, 1, r, "fiber")?;
            if !rho[i - 1][a - 1].is_zero() {
                return fail(
                    ModelErrorKind::Dimension,
                    entry.line,
                    format!("{} entry {} {} appears twice", anchor_block, i, a),
                );
            }
            rho[i - 1][a - 1] = entry_poly(entry, n, anchor_block)?;
        }
    }

    let mut c = vec![vec![vec![BasePolynomial::zero(n); r]; r]; r];
    if let Some(entries) = find_sparse(raw, bracket_block) {
        for entry in entries {
            if entry.indices.len() != 3 {
                return fail(
                    ModelErrorKind::Parse,
                    entry.line,
                    format!("{} entries look like 'a b k = expression'", bracket_block),
                );
            }
            let a = check_range(entry, 0, r, "fiber")?;
            let b = check_range(entry, 1, r, "fiber")?;
            let k = check_range(entry, 2, r, "fiber")?;
            if a >= b {
                return fail(
                    ModelErrorKind::Dimension,
                    entry.line,
                    format!("{} entries are given once, with a < b", bracket_block),
                );
            }
            if !c[a - 1][b - 1][k - 1].is_zero() {
                return fail(
                    ModelErrorKind::Dimension,
                    entry.line,
                    format!("{} entry {} {} {} appears twice", bracket_block, a, b, k),
                );
            }
            let f = entry_poly(entry, n, bracket_block)?;
            c[b - 1][a - 1][k - 1] = -&f;
            c[a - 1][b - 1][k - 1] = f;
        }
    }

    LieAlgebroidData::new(n, r, rho, c).map_err(|e| ModelError {
        kind: ModelErrorKind::Dimension,
        line: 0,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SO3: &str = "\
# the compact form on three generators
kind = courant
base_dim = 0
fiber_rank = 3

metric {
  1, 0, 0
  0, 1, 0
  0, 0, 1
}

torsion {
  1 2 3 = 1
}
";

    #[test]
    fn parses_a_courant_file() {
        let ModelFile::Courant { data, witt } = parse_model(SO3).unwrap() else {
            panic!("wrong kind");
        };
        assert!(witt.is_none());
        assert_eq!(data.base_dim(), 0);
        assert_eq!(data.fiber_rank(), 3);
        assert_eq!(*data.structure(1, 2, 3), BasePolynomial::one(0));
        assert_eq!(*data.structure(2, 1, 3), -&BasePolynomial::one(0));
        assert_eq!(*data.structure(3, 1, 2), BasePolynomial::one(0));
        assert!(data.axiom_check(7).passed());
    }

    #[test]
    fn parses_an_algebroid_file() {
        let src = "\
kind = lie_algebroid
base_dim = 1
rank = 2
anchor {
  1 1 = x1
  1 2 = 1
}
bracket {
  1 2 2 = -1
}
";
        let ModelFile::LieAlgebroid(data) = parse_model(src).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(data.base_dim(), 1);
        assert_eq!(data.rank(), 2);
        assert_eq!(*data.anchor(1, 1), BasePolynomial::var(1, 1).unwrap());
        assert_eq!(*data.structure(2, 1, 2), BasePolynomial::one(1));
    }

    #[test]
    fn parses_a_pair_file() {
        let src = "\
kind = bialgebroid_pair
base_dim = 0
rank = 3
bracket {
  1 2 2 = 2
  1 3 3 = -2
  2 3 1 = 1
}
dual_bracket {
  1 2 2 = -1
  1 3 3 = -1
}
";
        let ModelFile::BialgebroidPair(l, lstar) = parse_model(src).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(*l.structure(2, 3, 1), BasePolynomial::one(0));
        assert_eq!(*lstar.structure(1, 3, 3), -&BasePolynomial::one(0));
    }

    #[test]
    fn error_categories() {
        // parse: bad syntax in an entry expression
        let bad_expr = SO3.replace("1 2 3 = 1", "1 2 3 = 1 +");
        let e = parse_model(&bad_expr).unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Parse);
        assert!(e.line > 0);
        // parse: negative exponent inside an entry
        let bad_expr = SO3.replace("1 2 3 = 1", "1 2 3 = x1^(-1)");
        let e = parse_model(&bad_expr).unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Parse);
        // dimension: out of range index
        let bad_idx = SO3.replace("1 2 3 = 1", "1 2 4 = 1");
        let e = parse_model(&bad_idx).unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Dimension);
        // dimension: wrong order
        let bad_order = SO3.replace("1 2 3 = 1", "2 1 3 = 1");
        assert_eq!(
            parse_model(&bad_order).unwrap_err().kind,
            ModelErrorKind::Dimension
        );
        // metric: nonsymmetric
        let bad_metric = SO3.replace("1, 0, 0", "1, 2, 0");
        let e = parse_model(&bad_metric).unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Metric);
        // metric: singular
        let singular = SO3.replace("0, 1, 0", "0, 0, 0");
        let e = parse_model(&singular).unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Metric);
        // parse: unknown kind
        let e = parse_model("kind = fancy\nbase_dim = 0\nrank = 1\n").unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Parse);
        // dimension: missing pieces
        let e = parse_model("kind = courant\nbase_dim = 0\nfiber_rank = 2\n").unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Dimension);
        // parse: unclosed block
        let e = parse_model("kind = courant\nbase_dim = 0\nfiber_rank = 1\nmetric {\n 1\n").unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Parse);
        // expressions in the x variables are rejected where constants are
        // demanded, with the metric category untouched
        let poly_metric = SO3.replace("0, 0, 1", "0, 0, x1");
        let e = parse_model(&poly_metric).unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Parse);
    }

    #[test]
    fn witt_frame_round_trip() {
        let src = "\
kind = courant
base_dim = 0
fiber_rank = 2
metric {
  1, 0
  0, 1
}
witt_frame {
  1, i
  1/2, -1/2*i
}
";
        let ModelFile::Courant { witt, .. } = parse_model(src).unwrap() else {
            panic!("wrong kind");
        };
        let frame = witt.expect("frame supplied");
        assert_eq!(frame.dim(), 2);
        // breaking isotropy is a metric category failure
        let bad = src.replace("1, i", "1, 2");
        let e = parse_model(&bad).unwrap_err();
        assert_eq!(e.kind, ModelErrorKind::Metric);
    }
}
