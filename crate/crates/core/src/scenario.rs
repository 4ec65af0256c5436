//! The scenario file format: a line-oriented text schema that pins down a
//! network, a price signal, an initial state, and simulation settings.
//!
//! A document has two top-level keys followed by four sections:
//!
//! ```text
//! schema_version = 1
//! name = two-organization shock study
//!
//! [network]
//! n = 2
//! m = 2
//! names = A, B                     # optional node names
//! c = [0, 0.025; 0.005, 0]         # rows separated by ';'
//! d = constant(2, 2, 0.05)
//! beta = constant(2, 1)
//! v_threshold = constant(2, 1.5)
//!
//! [prices]
//! base = constant(2, 20)
//! override = 4, 5, constant(2, 14.9)   # start, end_exclusive, prices
//!
//! [initial_state]
//! v0 = random_uniform(2, 5, 11)
//!
//! [simulation]
//! horizon = 40
//! conv_tol = 1e-9                  # optional, default 1e-9
//! confirm_window = 5               # optional, default 5
//! ```
//!
//! `#` starts a comment; a line whose brackets stay open continues on the
//! next line, so large matrix literals can be laid out row per line.
//! Matrix fields accept literals or the constructors
//! `constant(rows, cols, value)`, `identity(n)`,
//! `random_uniform(lo, hi, seed)`, and `zero_diag(expr)`; vector fields
//! accept literals, `constant(len, value)`, and
//! `random_uniform(lo, hi, seed)`. `random_uniform` takes its dimensions
//! from the field it appears in (declare `n`/`m` when no literal fixes
//! them), fills matrices row by row, and always carries an explicit seed;
//! the generator is pinned in [`crate::rng`] so regenerating a scenario is
//! bit-reproducible forever. `zero_diag` zeroes the diagonal after the
//! inner expression is fully generated, so the diagonal draws are consumed
//! from the stream.
//!
//! Parsing resolves and validates everything eagerly: a parsed scenario
//! carries both the expression-level document (which serializes back) and
//! the fully validated network, prices, and initial state.

use crate::dynamics::{DynamicsError, PriceSignal, DEFAULT_CONFIRM_WINDOW, DEFAULT_CONV_TOL};
use crate::model::{FinancialNetwork, ValidationFailure};
use crate::numerics::Matrix;
use crate::rng::SplitMix64;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("field `{field}`: {message}")]
    Resolve { field: String, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationFailure),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

fn parse_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

fn resolve_err(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Resolve {
        field: field.to_string(),
        message: message.into(),
    }
}

/// A matrix-valued field: either a literal or a constructor kept in
/// symbolic form so the document serializes back exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixExpr {
    Literal(Matrix),
    Constant {
        rows: usize,
        cols: usize,
        value: f64,
    },
    Identity {
        n: usize,
    },
    RandomUniform {
        lo: f64,
        hi: f64,
        seed: u64,
    },
    ZeroDiag(Box<MatrixExpr>),
}

/// A vector-valued field.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorExpr {
    Literal(Vec<f64>),
    Constant { len: usize, value: f64 },
    RandomUniform { lo: f64, hi: f64, seed: u64 },
}

impl MatrixExpr {
    fn intrinsic_dims(&self) -> Option<(usize, usize)> {
        match self {
            MatrixExpr::Literal(m) => Some((m.rows(), m.cols())),
            MatrixExpr::Constant { rows, cols, .. } => Some((*rows, *cols)),
            MatrixExpr::Identity { n } => Some((*n, *n)),
            MatrixExpr::RandomUniform { .. } => None,
            MatrixExpr::ZeroDiag(inner) => inner.intrinsic_dims(),
        }
    }

    fn seeded(&self) -> bool {
        match self {
            MatrixExpr::RandomUniform { .. } => true,
            MatrixExpr::ZeroDiag(inner) => inner.seeded(),
            _ => false,
        }
    }

    fn with_seed(&self, seed: u64) -> MatrixExpr {
        match self {
            MatrixExpr::RandomUniform { lo, hi, .. } => MatrixExpr::RandomUniform {
                lo: *lo,
                hi: *hi,
                seed,
            },
            MatrixExpr::ZeroDiag(inner) => MatrixExpr::ZeroDiag(Box::new(inner.with_seed(seed))),
            other => other.clone(),
        }
    }

    fn resolve(&self, rows: usize, cols: usize, field: &str) -> Result<Matrix, ScenarioError> {
        match self {
            MatrixExpr::Literal(m) => {
                if m.rows() != rows || m.cols() != cols {
                    return Err(resolve_err(
                        field,
                        format!(
                            "literal is {}x{}, expected {rows}x{cols}",
                            m.rows(),
                            m.cols()
                        ),
                    ));
                }
                Ok(m.clone())
            }
            MatrixExpr::Constant {
                rows: r,
                cols: c,
                value,
            } => {
                if *r != rows || *c != cols {
                    return Err(resolve_err(
                        field,
                        format!("constant is {r}x{c}, expected {rows}x{cols}"),
                    ));
                }
                Matrix::constant(rows, cols, *value).map_err(|e| resolve_err(field, e.to_string()))
            }
            MatrixExpr::Identity { n } => {
                if *n != rows || *n != cols {
                    return Err(resolve_err(
                        field,
                        format!("identity is {n}x{n}, expected {rows}x{cols}"),
                    ));
                }
                Ok(Matrix::identity(*n))
            }
            MatrixExpr::RandomUniform { lo, hi, seed } => {
                let mut g = SplitMix64::new(*seed);
                let entries: Vec<f64> = (0..rows * cols)
                    .map(|_| g.next_in_range(*lo, *hi))
                    .collect();
                Matrix::new(rows, cols, entries).map_err(|e| resolve_err(field, e.to_string()))
            }
            MatrixExpr::ZeroDiag(inner) => {
                if rows != cols {
                    return Err(resolve_err(
                        field,
                        format!("zero_diag requires a square target, got {rows}x{cols}"),
                    ));
                }
                let mut m = inner.resolve(rows, cols, field)?;
                for i in 0..rows {
                    m.set(i, i, 0.0);
                }
                Ok(m)
            }
        }
    }
}

impl VectorExpr {
    fn intrinsic_len(&self) -> Option<usize> {
        match self {
            VectorExpr::Literal(v) => Some(v.len()),
            VectorExpr::Constant { len, .. } => Some(*len),
            VectorExpr::RandomUniform { .. } => None,
        }
    }

    fn seeded(&self) -> bool {
        matches!(self, VectorExpr::RandomUniform { .. })
    }

    fn with_seed(&self, seed: u64) -> VectorExpr {
        match self {
            VectorExpr::RandomUniform { lo, hi, .. } => VectorExpr::RandomUniform {
                lo: *lo,
                hi: *hi,
                seed,
            },
            other => other.clone(),
        }
    }

    fn resolve(&self, len: usize, field: &str) -> Result<Vec<f64>, ScenarioError> {
        match self {
            VectorExpr::Literal(v) => {
                if v.len() != len {
                    return Err(resolve_err(
                        field,
                        format!("literal has length {}, expected {len}", v.len()),
                    ));
                }
                Ok(v.clone())
            }
            VectorExpr::Constant { len: l, value } => {
                if *l != len {
                    return Err(resolve_err(
                        field,
                        format!("constant has length {l}, expected {len}"),
                    ));
                }
                Ok(vec![*value; len])
            }
            VectorExpr::RandomUniform { lo, hi, seed } => {
                let mut g = SplitMix64::new(*seed);
                Ok((0..len).map(|_| g.next_in_range(*lo, *hi)).collect())
            }
        }
    }
}

/// The expression-level document: everything needed to serialize the
/// scenario back out and to regenerate its data deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub schema_version: u32,
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub node_names: Option<Vec<String>>,
    pub c: MatrixExpr,
    pub d: MatrixExpr,
    pub beta: VectorExpr,
    pub v_threshold: VectorExpr,
    pub base_prices: VectorExpr,
    /// (start, end_exclusive, prices), in document order.
    pub overrides: Vec<(usize, usize, VectorExpr)>,
    pub v0: VectorExpr,
    pub horizon: usize,
    pub conv_tol: f64,
    pub confirm_window: usize,
}

impl ScenarioSpec {
    /// Whether any field is generated from a seed.
    pub fn seeded(&self) -> bool {
        self.c.seeded()
            || self.d.seeded()
            || self.beta.seeded()
            || self.v_threshold.seeded()
            || self.base_prices.seeded()
            || self.overrides.iter().any(|(_, _, e)| e.seeded())
            || self.v0.seeded()
    }

    /// A copy with every embedded seed replaced by `seed`.
    pub fn with_seed(&self, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            c: self.c.with_seed(seed),
            d: self.d.with_seed(seed),
            beta: self.beta.with_seed(seed),
            v_threshold: self.v_threshold.with_seed(seed),
            base_prices: self.base_prices.with_seed(seed),
            overrides: self
                .overrides
                .iter()
                .map(|(s, e, expr)| (*s, *e, expr.with_seed(seed)))
                .collect(),
            v0: self.v0.with_seed(seed),
            ..self.clone()
        }
    }
}

/// A parsed, resolved, and validated scenario: the symbolic document plus
/// the concrete data it denotes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub spec: ScenarioSpec,
    pub network: FinancialNetwork,
    pub prices: PriceSignal,
    pub initial_state: Vec<f64>,
    pub horizon: usize,
    pub conv_tol: f64,
    pub confirm_window: usize,
    /// Node names from the document, or "1".."n" when none were given.
    pub node_names: Vec<String>,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Line {
    no: usize,
    text: String,
}

fn bracket_depth(s: &str, line_no: usize) -> Result<i32, ScenarioError> {
    let mut depth = 0i32;
    for ch in s.chars() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(parse_err(line_no, "unbalanced closing bracket"));
        }
    }
    Ok(depth)
}

/// Strips comments and joins physical lines whose brackets stay open.
fn logical_lines(document: &str) -> Result<Vec<Line>, ScenarioError> {
    let mut out = Vec::new();
    let mut pending: Option<Line> = None;
    for (idx, raw) in document.lines().enumerate() {
        let no = idx + 1;
        let stripped = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = stripped.trim();
        let line = match pending.take() {
            Some(mut line) => {
                if !trimmed.is_empty() {
                    line.text.push(' ');
                    line.text.push_str(trimmed);
                }
                line
            }
            None => {
                if trimmed.is_empty() {
                    continue;
                }
                Line {
                    no,
                    text: trimmed.to_string(),
                }
            }
        };
        if bracket_depth(&line.text, line.no)? > 0 {
            pending = Some(line);
        } else {
            out.push(line);
        }
    }
    if let Some(line) = pending {
        return Err(parse_err(line.no, "bracket opened here is never closed"));
    }
    Ok(out)
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64, ScenarioError> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: `{}` is not a number", token.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what}: `{v}` is not finite")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(
    token: &str,
    line: usize,
    what: &str,
) -> Result<T, ScenarioError> {
    token.trim().parse().map_err(|_| {
        parse_err(
            line,
            format!("{what}: `{}` is not a nonnegative integer", token.trim()),
        )
    })
}

/// If `s` is `name(...)`, returns the text between the parentheses.
fn constructor_args<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    let rest = s.strip_prefix(name)?.trim_start();
    rest.strip_prefix('(')?.strip_suffix(')')
}

fn parse_matrix_literal(s: &str, line: usize) -> Result<Matrix, ScenarioError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| parse_err(line, "matrix literal must be enclosed in [ ]"))?;
    let row_texts = split_top_level(inner, ';');
    let mut rows = Vec::with_capacity(row_texts.len());
    for (i, row_text) in row_texts.iter().enumerate() {
        let mut row = Vec::new();
        for token in split_top_level(row_text, ',') {
            row.push(parse_f64(token, line, &format!("matrix row {}", i + 1))?);
        }
        rows.push(row);
    }
    let expected = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expected {
            return Err(parse_err(
                line,
                format!(
                    "matrix row {} has {} entries, expected {expected}",
                    i + 1,
                    row.len()
                ),
            ));
        }
    }
    Matrix::from_rows(&rows).map_err(|e| parse_err(line, e.to_string()))
}

fn parse_matrix_expr(s: &str, line: usize) -> Result<MatrixExpr, ScenarioError> {
    let s = s.trim();
    if s.starts_with('[') {
        return Ok(MatrixExpr::Literal(parse_matrix_literal(s, line)?));
    }
    if let Some(args) = constructor_args(s, "constant") {
        let parts = split_top_level(args, ',');
        if parts.len() != 3 {
            return Err(parse_err(line, "matrix constant takes (rows, cols, value)"));
        }
        return Ok(MatrixExpr::Constant {
            rows: parse_int(parts[0], line, "constant rows")?,
            cols: parse_int(parts[1], line, "constant cols")?,
            value: parse_f64(parts[2], line, "constant value")?,
        });
    }
    if let Some(args) = constructor_args(s, "identity") {
        let parts = split_top_level(args, ',');
        if parts.len() != 1 {
            return Err(parse_err(line, "identity takes (n)"));
        }
        return Ok(MatrixExpr::Identity {
            n: parse_int(parts[0], line, "identity size")?,
        });
    }
    if let Some(args) = constructor_args(s, "random_uniform") {
        let (lo, hi, seed) = parse_random_uniform_args(args, line)?;
        return Ok(MatrixExpr::RandomUniform { lo, hi, seed });
    }
    if let Some(args) = constructor_args(s, "zero_diag") {
        return Ok(MatrixExpr::ZeroDiag(Box::new(parse_matrix_expr(
            args, line,
        )?)));
    }
    Err(parse_err(
        line,
        format!("`{s}` is not a matrix literal or constructor"),
    ))
}

fn parse_random_uniform_args(args: &str, line: usize) -> Result<(f64, f64, u64), ScenarioError> {
    let parts = split_top_level(args, ',');
    if parts.len() != 3 {
        return Err(parse_err(line, "random_uniform takes (lo, hi, seed)"));
    }
    let lo = parse_f64(parts[0], line, "random_uniform lo")?;
    let hi = parse_f64(parts[1], line, "random_uniform hi")?;
    if lo > hi {
        return Err(parse_err(
            line,
            format!("random_uniform range is empty: lo {lo} > hi {hi}"),
        ));
    }
    let seed = parse_int(parts[2], line, "random_uniform seed")?;
    Ok((lo, hi, seed))
}

fn parse_vector_expr(s: &str, line: usize) -> Result<VectorExpr, ScenarioError> {
    let s = s.trim();
    if s.starts_with('[') {
        let inner = s
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| parse_err(line, "vector literal must be enclosed in [ ]"))?;
        if inner.contains(';') {
            return Err(parse_err(
                line,
                "vector literal cannot contain ';' (did you mean a matrix?)",
            ));
        }
        let mut values = Vec::new();
        for token in split_top_level(inner, ',') {
            values.push(parse_f64(token, line, "vector entry")?);
        }
        return Ok(VectorExpr::Literal(values));
    }
    if let Some(args) = constructor_args(s, "constant") {
        let parts = split_top_level(args, ',');
        if parts.len() != 2 {
            return Err(parse_err(line, "vector constant takes (len, value)"));
        }
        return Ok(VectorExpr::Constant {
            len: parse_int(parts[0], line, "constant len")?,
            value: parse_f64(parts[1], line, "constant value")?,
        });
    }
    if let Some(args) = constructor_args(s, "random_uniform") {
        let (lo, hi, seed) = parse_random_uniform_args(args, line)?;
        return Ok(VectorExpr::RandomUniform { lo, hi, seed });
    }
    Err(parse_err(
        line,
        format!("`{s}` is not a vector literal or constructor"),
    ))
}

fn parse_names(s: &str, line: usize) -> Result<Vec<String>, ScenarioError> {
    let mut names = Vec::new();
    for token in s.split(',') {
        let name = token.trim();
        let valid = !name.is_empty()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !name.starts_with(|c: char| c.is_ascii_digit());
        if !valid {
            return Err(parse_err(
                line,
                format!("`{name}` is not a valid node name (letters, digits, '_', not starting with a digit)"),
            ));
        }
        if names.iter().any(|existing| existing == name) {
            return Err(parse_err(line, format!("node name `{name}` repeats")));
        }
        names.push(name.to_string());
    }
    Ok(names)
}

#[derive(Debug, Clone)]
struct RawField {
    line: usize,
    value: String,
}

#[derive(Default)]
struct Collector {
    schema_version: Option<RawField>,
    name: Option<RawField>,
    n: Option<RawField>,
    m: Option<RawField>,
    names: Option<RawField>,
    c: Option<RawField>,
    d: Option<RawField>,
    beta: Option<RawField>,
    v_threshold: Option<RawField>,
    base: Option<RawField>,
    overrides: Vec<RawField>,
    v0: Option<RawField>,
    horizon: Option<RawField>,
    conv_tol: Option<RawField>,
    confirm_window: Option<RawField>,
}

fn store(slot: &mut Option<RawField>, key: &str, field: RawField) -> Result<(), ScenarioError> {
    if slot.is_some() {
        return Err(parse_err(field.line, format!("duplicate key `{key}`")));
    }
    *slot = Some(field);
    Ok(())
}

fn required<'a>(
    slot: &'a Option<RawField>,
    key: &str,
    section: &str,
) -> Result<&'a RawField, ScenarioError> {
    slot.as_ref()
        .ok_or_else(|| parse_err(0, format!("missing required key `{key}` in {section}")))
}

/// Parses a scenario document, resolving constructors and validating the
/// network, prices, and initial state.
pub fn parse_scenario(document: &str) -> Result<ScenarioFile, ScenarioError> {
    let spec = parse_spec(document)?;
    resolve_spec(spec)
}

/// Parses the document into its expression-level form without resolving.
pub fn parse_spec(document: &str) -> Result<ScenarioSpec, ScenarioError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Section {
        Top,
        Network,
        Prices,
        InitialState,
        Simulation,
    }

    let mut collector = Collector::default();
    let mut section = Section::Top;
    for line in logical_lines(document)? {
        let text = line.text.as_str();
        if text.starts_with('[') && text.ends_with(']') && !text.contains('=') {
            section = match &text[1..text.len() - 1] {
                "network" => Section::Network,
                "prices" => Section::Prices,
                "initial_state" => Section::InitialState,
                "simulation" => Section::Simulation,
                other => return Err(parse_err(line.no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| parse_err(line.no, "expected `key = value`"))?;
        let key = key.trim();
        let field = RawField {
            line: line.no,
            value: value.trim().to_string(),
        };
        let slot = match (section, key) {
            (Section::Top, "schema_version") => &mut collector.schema_version,
            (Section::Top, "name") => &mut collector.name,
            (Section::Network, "n") => &mut collector.n,
            (Section::Network, "m") => &mut collector.m,
            (Section::Network, "names") => &mut collector.names,
            (Section::Network, "c") => &mut collector.c,
            (Section::Network, "d") => &mut collector.d,
            (Section::Network, "beta") => &mut collector.beta,
            (Section::Network, "v_threshold") => &mut collector.v_threshold,
            (Section::Prices, "base") => &mut collector.base,
            (Section::Prices, "override") => {
                collector.overrides.push(field);
                continue;
            }
            (Section::InitialState, "v0") => &mut collector.v0,
            (Section::Simulation, "horizon") => &mut collector.horizon,
            (Section::Simulation, "conv_tol") => &mut collector.conv_tol,
            (Section::Simulation, "confirm_window") => &mut collector.confirm_window,
            _ => {
                let where_ = match section {
                    Section::Top => "the top level".to_string(),
                    Section::Network => "[network]".to_string(),
                    Section::Prices => "[prices]".to_string(),
                    Section::InitialState => "[initial_state]".to_string(),
                    Section::Simulation => "[simulation]".to_string(),
                };
                return Err(parse_err(
                    line.no,
                    format!("unknown key `{key}` in {where_}"),
                ));
            }
        };
        store(slot, key, field)?;
    }

    let schema = required(&collector.schema_version, "schema_version", "the top level")?;
    let schema_version: u32 = parse_int(&schema.value, schema.line, "schema_version")?;
    if schema_version != 1 {
        return Err(parse_err(
            schema.line,
            format!("unsupported schema_version {schema_version} (this tool reads version 1)"),
        ));
    }
    let name_field = required(&collector.name, "name", "the top level")?;
    if name_field.value.is_empty() {
        return Err(parse_err(name_field.line, "name must be nonempty"));
    }

    let c_field = required(&collector.c, "c", "[network]")?;
    let c = parse_matrix_expr(&c_field.value, c_field.line)?;
    let d_field = required(&collector.d, "d", "[network]")?;
    let d = parse_matrix_expr(&d_field.value, d_field.line)?;
    let beta_field = required(&collector.beta, "beta", "[network]")?;
    let beta = parse_vector_expr(&beta_field.value, beta_field.line)?;
    let vt_field = required(&collector.v_threshold, "v_threshold", "[network]")?;
    let v_threshold = parse_vector_expr(&vt_field.value, vt_field.line)?;
    let base_field = required(&collector.base, "base", "[prices]")?;
    let base_prices = parse_vector_expr(&base_field.value, base_field.line)?;

    let mut overrides = Vec::new();
    for field in &collector.overrides {
        let parts = split_top_level(&field.value, ',');
        if parts.len() < 3 {
            return Err(parse_err(
                field.line,
                "override takes `start, end_exclusive, prices`",
            ));
        }
        let start: usize = parse_int(parts[0], field.line, "override start")?;
        let end: usize = parse_int(parts[1], field.line, "override end")?;
        let expr_offset = parts[0].len() + 1 + parts[1].len() + 1;
        let expr = parse_vector_expr(&field.value[expr_offset..], field.line)?;
        overrides.push((start, end, expr));
    }

    let v0_field = required(&collector.v0, "v0", "[initial_state]")?;
    let v0 = parse_vector_expr(&v0_field.value, v0_field.line)?;

    // Dimensions come from explicit keys when given, otherwise from the
    // first field whose expression has inherent size.
    let n = match &collector.n {
        Some(f) => parse_int::<usize>(&f.value, f.line, "n")?,
        None => c
            .intrinsic_dims()
            .map(|(r, _)| r)
            .or_else(|| beta.intrinsic_len())
            .or_else(|| v_threshold.intrinsic_len())
            .or_else(|| v0.intrinsic_len())
            .ok_or_else(|| {
                parse_err(
                    c_field.line,
                    "cannot infer n: declare `n = ...` or give some field explicit size",
                )
            })?,
    };
    let m = match &collector.m {
        Some(f) => parse_int::<usize>(&f.value, f.line, "m")?,
        None => d
            .intrinsic_dims()
            .map(|(_, cols)| cols)
            .or_else(|| base_prices.intrinsic_len())
            .or_else(|| overrides.iter().find_map(|(_, _, e)| e.intrinsic_len()))
            .ok_or_else(|| {
                parse_err(
                    d_field.line,
                    "cannot infer m: declare `m = ...` or give some field explicit size",
                )
            })?,
    };
    if n == 0 || m == 0 {
        return Err(parse_err(0, "n and m must be at least 1"));
    }

    let node_names = match &collector.names {
        Some(f) => Some(parse_names(&f.value, f.line)?),
        None => None,
    };
    let horizon_field = required(&collector.horizon, "horizon", "[simulation]")?;
    let horizon: usize = parse_int(&horizon_field.value, horizon_field.line, "horizon")?;
    let conv_tol = match &collector.conv_tol {
        Some(f) => {
            let v = parse_f64(&f.value, f.line, "conv_tol")?;
            if v <= 0.0 {
                return Err(parse_err(f.line, "conv_tol must be positive"));
            }
            v
        }
        None => DEFAULT_CONV_TOL,
    };
    let confirm_window = match &collector.confirm_window {
        Some(f) => parse_int(&f.value, f.line, "confirm_window")?,
        None => DEFAULT_CONFIRM_WINDOW,
    };

    Ok(ScenarioSpec {
        schema_version,
        name: name_field.value.clone(),
        n,
        m,
        node_names,
        c,
        d,
        beta,
        v_threshold,
        base_prices,
        overrides,
        v0,
        horizon,
        conv_tol,
        confirm_window,
    })
}

/// Resolves and validates an expression-level document.
pub fn resolve_spec(spec: ScenarioSpec) -> Result<ScenarioFile, ScenarioError> {
    let n = spec.n;
    let m = spec.m;
    if spec.horizon == 0 {
        return Err(resolve_err("horizon", "must be at least 1"));
    }
    if spec.confirm_window == 0 {
        return Err(resolve_err("confirm_window", "must be at least 1"));
    }
    let c = spec.c.resolve(n, n, "c")?;
    let d = spec.d.resolve(n, m, "d")?;
    let beta = spec.beta.resolve(n, "beta")?;
    let v_threshold = spec.v_threshold.resolve(n, "v_threshold")?;
    let base = spec.base_prices.resolve(m, "base")?;
    let network = FinancialNetwork::new(c, d, base.clone(), beta, v_threshold)?;

    let mut prices = PriceSignal::constant(base)?;
    for (start, end, expr) in &spec.overrides {
        prices = prices.with_override(*start, *end, expr.resolve(m, "override")?)?;
    }
    let initial_state = spec.v0.resolve(n, "v0")?;

    let node_names = match &spec.node_names {
        Some(names) => {
            if names.len() != n {
                return Err(resolve_err(
                    "names",
                    format!("{} names given for {n} organizations", names.len()),
                ));
            }
            names.clone()
        }
        None => (1..=n).map(|i| i.to_string()).collect(),
    };

    Ok(ScenarioFile {
        horizon: spec.horizon,
        conv_tol: spec.conv_tol,
        confirm_window: spec.confirm_window,
        network,
        prices,
        initial_state,
        node_names,
        spec,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn matrix_expr_text(expr: &MatrixExpr) -> String {
    match expr {
        MatrixExpr::Literal(mat) => {
            let rows: Vec<String> = (0..mat.rows())
                .map(|r| {
                    mat.row(r)
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                })
                .collect();
            format!("[{}]", rows.join("; "))
        }
        MatrixExpr::Constant { rows, cols, value } => {
            format!("constant({rows}, {cols}, {value})")
        }
        MatrixExpr::Identity { n } => format!("identity({n})"),
        MatrixExpr::RandomUniform { lo, hi, seed } => {
            format!("random_uniform({lo}, {hi}, {seed})")
        }
        MatrixExpr::ZeroDiag(inner) => format!("zero_diag({})", matrix_expr_text(inner)),
    }
}

fn vector_expr_text(expr: &VectorExpr) -> String {
    match expr {
        VectorExpr::Literal(values) => {
            let entries: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            format!("[{}]", entries.join(", "))
        }
        VectorExpr::Constant { len, value } => format!("constant({len}, {value})"),
        VectorExpr::RandomUniform { lo, hi, seed } => {
            format!("random_uniform({lo}, {hi}, {seed})")
        }
    }
}

/// Renders the document in canonical form. Numbers print with the shortest
/// digits that parse back to the identical value, so serialize-then-parse
/// reproduces the `ScenarioSpec` exactly.
pub fn serialize_scenario(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    writeln!(out, "schema_version = {}", spec.schema_version).unwrap();
    writeln!(out, "name = {}", spec.name).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "[network]").unwrap();
    writeln!(out, "n = {}", spec.n).unwrap();
    writeln!(out, "m = {}", spec.m).unwrap();
    if let Some(names) = &spec.node_names {
        writeln!(out, "names = {}", names.join(", ")).unwrap();
    }
    writeln!(out, "c = {}", matrix_expr_text(&spec.c)).unwrap();
    writeln!(out, "d = {}", matrix_expr_text(&spec.d)).unwrap();
    writeln!(out, "beta = {}", vector_expr_text(&spec.beta)).unwrap();
    writeln!(out, "v_threshold = {}", vector_expr_text(&spec.v_threshold)).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "[prices]").unwrap();
    writeln!(out, "base = {}", vector_expr_text(&spec.base_prices)).unwrap();
    for (start, end, expr) in &spec.overrides {
        writeln!(out, "override = {start}, {end}, {}", vector_expr_text(expr)).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "[initial_state]").unwrap();
    writeln!(out, "v0 = {}", vector_expr_text(&spec.v0)).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "[simulation]").unwrap();
    writeln!(out, "horizon = {}", spec.horizon).unwrap();
    writeln!(out, "conv_tol = {}", spec.conv_tol).unwrap();
    writeln!(out, "confirm_window = {}", spec.confirm_window).unwrap();
    out
}

// ---------------------------------------------------------------------------
// Bundled scenarios
// ---------------------------------------------------------------------------

/// The scenario files shipped with the crate, used by tests and available
/// to the command-line tool by name.
pub mod bundled {
    pub const EXAMPLE1_SHORT: &str = include_str!("../scenarios/example1_short.scenario");
    pub const EXAMPLE1_LONG: &str = include_str!("../scenarios/example1_long.scenario");
    pub const EXAMPLE2: &str = include_str!("../scenarios/example2.scenario");
    pub const EXAMPLE3_SIM1: &str = include_str!("../scenarios/example3_sim1.scenario");
    pub const EXAMPLE3_SIM2: &str = include_str!("../scenarios/example3_sim2.scenario");
    pub const COUNTRIES9: &str = include_str!("../scenarios/countries9.scenario");

    /// All bundled documents as (name, text) pairs.
    pub fn all() -> [(&'static str, &'static str); 6] {
        [
            ("example1_short", EXAMPLE1_SHORT),
            ("example1_long", EXAMPLE1_LONG),
            ("example2", EXAMPLE2),
            ("example3_sim1", EXAMPLE3_SIM1),
            ("example3_sim2", EXAMPLE3_SIM2),
            ("countries9", COUNTRIES9),
        ]
    }

    /// Looks a bundled document up by name.
    pub fn by_name(name: &str) -> Option<&'static str> {
        all()
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| *text)
    }
}
