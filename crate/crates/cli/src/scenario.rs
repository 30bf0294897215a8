//! Scenario file format: a plain-text nested key-value format.
//!
//! ```text
//! # comment
//! kind = orbit-intersect
//!
//! [module]
//! free_rank = 1
//! torsion_orders = []
//! a_ff = [[2]]
//! a_tf = []
//! a_tt = []
//! min_poly = [-2, 1]
//!
//! [orbit]
//! base = ([0], [])
//! term = (([1], []), 1)
//!
//! [subgroup]
//! generator = ([3], [])
//!
//! [solver]
//! n_max = 64
//! sieve = [2, 3, 5]
//! ```
//!
//! Values: decimal integers, bare words, `true`/`false`, lists `[...]`,
//! tuples `(...)`, and rational functions `[num coefficients] / [den
//! coefficients]` (polynomial coefficient lists are low degree first).
//! Repeated keys within a section accumulate. Parsing is strict: unknown
//! sections or keys are rejected by the typed builders with the offending
//! name.

use std::fmt;

use num_bigint::BigInt;

use frobset_core::frobmod::{FgModule, IntPoly};
use frobset_core::matrix::IntMatrix;
use frobset_core::orbit::{OrbitSum, SolverParams};
use frobset_core::recsolve::{Congruence, EquationForm};
use frobset_core::ModElement;

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

pub type PResult<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Word(String),
    Bool(bool),
    List(Vec<Value>),
    Tuple(Vec<Value>),
    /// `num / den`, both coefficient lists.
    Rat(Box<Value>, Box<Value>),
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Word(w) => w.clone(),
            Value::Bool(b) => b.to_string(),
            Value::List(items) => {
                let inner: Vec<String> = items.iter().map(|v| v.render()).collect();
                format!("[{}]", inner.join(", "))
            }
            Value::Tuple(items) => {
                let inner: Vec<String> = items.iter().map(|v| v.render()).collect();
                format!("({})", inner.join(", "))
            }
            Value::Rat(num, den) => format!("{} / {}", num.render(), den.render()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, Value)>,
}

/// Parsed scenario document: the kind line plus sections in file order.
#[derive(Debug, Clone)]
pub struct Document {
    pub kind: String,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Canonical re-serialization: one blank line between blocks, `key =
    /// value` with single spaces. Parsing the output reproduces the same
    /// document.
    pub fn serialize(&self) -> String {
        let mut out = format!("kind = {}\n", self.kind);
        for section in &self.sections {
            out.push('\n');
            out.push_str(&format!("[{}]\n", section.name));
            for (key, value) in &section.entries {
                out.push_str(&format!("{} = {}\n", key, value.render()));
            }
        }
        out
    }
}

struct LineParser<'a> {
    text: &'a [u8],
    line: usize,
    col: usize,
}

impl<'a> LineParser<'a> {
    fn new(text: &'a str, line: usize, start_col: usize) -> Self {
        LineParser { text: text.as_bytes(), line, col: start_col }
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { line: self.line, col: self.col + 1, message: message.into() })
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.col).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.col += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.col += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), None | Some(b'#'))
    }

    fn parse_value(&mut self) -> PResult<Value> {
        let first = self.parse_primary()?;
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.bump();
            self.skip_ws();
            let second = self.parse_primary()?;
            if !matches!(first, Value::List(_)) || !matches!(second, Value::List(_)) {
                return self.error("rational function needs coefficient lists on both sides of '/'");
            }
            return Ok(Value::Rat(Box::new(first), Box::new(second)));
        }
        Ok(first)
    }

    fn parse_primary(&mut self) -> PResult<Value> {
        self.skip_ws();
        match self.peek() {
            Some(b'[') => {
                self.bump();
                let items = self.parse_items(b']')?;
                Ok(Value::List(items))
            }
            Some(b'(') => {
                self.bump();
                let items = self.parse_items(b')')?;
                if items.is_empty() {
                    return self.error("empty tuple");
                }
                Ok(Value::Tuple(items))
            }
            Some(c) if c == b'-' || c.is_ascii_digit() => {
                let start = self.col;
                if c == b'-' {
                    self.bump();
                }
                if !matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    return self.error("expected digits after '-'");
                }
                while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    self.bump();
                }
                let s = std::str::from_utf8(&self.text[start..self.col]).unwrap();
                Ok(Value::Int(s.parse().unwrap()))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.col;
                while matches!(self.peek(), Some(d) if d.is_ascii_alphanumeric() || d == b'_' || d == b'-')
                {
                    self.bump();
                }
                let word = std::str::from_utf8(&self.text[start..self.col]).unwrap().to_string();
                Ok(match word.as_str() {
                    "true" => Value::Bool(true),
                    "false" => Value::Bool(false),
                    _ => Value::Word(word),
                })
            }
            Some(c) => self.error(format!("unexpected character '{}'", c as char)),
            None => self.error("unexpected end of line"),
        }
    }

    fn parse_items(&mut self, close: u8) -> PResult<Vec<Value>> {
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            if self.peek() == Some(close) {
                self.bump();
                return Ok(items);
            }
            if self.peek().is_none() {
                return self.error(format!("missing closing '{}'", close as char));
            }
            items.push(self.parse_value()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.bump();
                }
                Some(c) if c == close => {}
                Some(c) => {
                    return self.error(format!(
                        "expected ',' or '{}', found '{}'",
                        close as char, c as char
                    ))
                }
                None => return self.error(format!("missing closing '{}'", close as char)),
            }
        }
    }
}

fn ident_at(line: &str, lineno: usize) -> PResult<(String, usize)> {
    let bytes = line.as_bytes();
    let mut col = 0;
    while matches!(bytes.get(col), Some(b' ') | Some(b'\t')) {
        col += 1;
    }
    let start = col;
    while matches!(bytes.get(col), Some(c) if c.is_ascii_alphanumeric() || *c == b'_' || *c == b'-')
    {
        col += 1;
    }
    if start == col {
        return Err(ParseError {
            line: lineno,
            col: col + 1,
            message: "expected an identifier".into(),
        });
    }
    Ok((line[start..col].to_string(), col))
}

/// Strict parse of the scenario text into a [`Document`].
pub fn parse_document(text: &str) -> PResult<Document> {
    let mut kind: Option<String> = None;
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with('[') {
            let inner = trimmed.strip_prefix('[').unwrap();
            let Some(name) = inner.strip_suffix(']') else {
                return Err(ParseError {
                    line: lineno,
                    col: line.len(),
                    message: "section header must end with ']'".into(),
                });
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(ParseError {
                    line: lineno,
                    col: 2,
                    message: "empty section name".into(),
                });
            }
            sections.push(Section { name: name.to_string(), entries: vec![] });
            continue;
        }
        let (key, after) = ident_at(line, lineno)?;
        let bytes = line.as_bytes();
        let mut col = after;
        while matches!(bytes.get(col), Some(b' ') | Some(b'\t')) {
            col += 1;
        }
        if bytes.get(col) != Some(&b'=') {
            return Err(ParseError {
                line: lineno,
                col: col + 1,
                message: format!("expected '=' after '{key}'"),
            });
        }
        col += 1;
        let mut p = LineParser::new(line, lineno, col);
        let value = p.parse_value()?;
        if !p.at_end() {
            return p.error("trailing characters after value");
        }
        if key == "kind" {
            if !sections.is_empty() || kind.is_some() {
                return Err(ParseError {
                    line: lineno,
                    col: 1,
                    message: "'kind' must appear once, before any section".into(),
                });
            }
            match value {
                Value::Word(w) => kind = Some(w),
                _ => {
                    return Err(ParseError {
                        line: lineno,
                        col: col + 1,
                        message: "kind must be a bare word".into(),
                    })
                }
            }
            continue;
        }
        let Some(section) = sections.last_mut() else {
            return Err(ParseError {
                line: lineno,
                col: 1,
                message: format!("key '{key}' appears before any [section]"),
            });
        };
        section.entries.push((key, value));
    }
    let Some(kind) = kind else {
        return Err(ParseError { line: 1, col: 1, message: "missing 'kind = ...' line".into() });
    };
    Ok(Document { kind, sections })
}

// ---- typed scenarios ----

#[derive(Debug, Clone)]
pub enum RecMode {
    Congruences(Vec<Congruence>),
    Equations(Vec<EquationForm>),
    Period { modulus: u64 },
}

#[derive(Debug, Clone)]
pub struct OrbitScenario {
    pub module: FgModule,
    pub orbit: OrbitSum,
    pub generators: Vec<ModElement>,
    pub solver: SolverParams,
}

#[derive(Debug, Clone)]
pub struct FsetScenario {
    pub module: FgModule,
    pub base: ModElement,
    pub terms: Vec<(ModElement, u64)>,
    pub subgroup: Vec<ModElement>,
    pub f_invariant: bool,
    pub orbit_bound: u64,
    pub subgroup_box: u64,
}

#[derive(Debug, Clone)]
pub struct RecScenario {
    pub min_poly: IntPoly,
    pub variables: usize,
    pub mode: RecMode,
    pub solver: SolverParams,
}

#[derive(Debug, Clone)]
pub struct SurveyScenario {
    pub q: u64,
    pub coeff_degree: usize,
    pub phi_t: Vec<Vec<u64>>,
    pub deg_bound: usize,
    /// Optional replacement for the tabulated coefficient-field modulus.
    pub field_modulus: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct SharpScenarioSpec {
    pub q: u64,
    pub deg_bound: usize,
}

#[derive(Debug, Clone)]
pub struct GmScenario {
    pub p: u64,
    pub degree: usize,
    pub modulus: Option<Vec<u64>>,
    pub ambient: usize,
    /// Generator tuples: per coordinate, (num coefficients, den coefficients).
    pub generators: Vec<Vec<(Vec<Vec<u64>>, Vec<Vec<u64>>)>>,
    pub relation_coeffs: Vec<(Vec<Vec<u64>>, Vec<Vec<u64>>)>,
    pub relation_target: (Vec<Vec<u64>>, Vec<Vec<u64>>),
    pub box_bound: i64,
}

#[derive(Debug, Clone)]
pub enum Scenario {
    OrbitIntersect(OrbitScenario),
    Fset(FsetScenario),
    RecSolve(RecScenario),
    DrinfeldSurvey(SurveyScenario),
    DrinfeldSharp(SharpScenarioSpec),
    GmIntersect(GmScenario),
}

#[derive(Debug)]
pub struct BuildError(pub String);

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for BuildError {}

type BResult<T> = std::result::Result<T, BuildError>;

fn err<T>(msg: impl Into<String>) -> BResult<T> {
    Err(BuildError(msg.into()))
}

struct SectionView<'a> {
    section: &'a Section,
    allowed: &'a [&'a str],
}

impl<'a> SectionView<'a> {
    fn new(doc: &'a Document, name: &str, allowed: &'a [&'a str]) -> BResult<Self> {
        let Some(section) = doc.section(name) else {
            return err(format!("missing [{name}] section"));
        };
        for (key, _) in &section.entries {
            if !allowed.contains(&key.as_str()) {
                return err(format!("unknown key '{key}' in [{name}]"));
            }
        }
        Ok(SectionView { section, allowed })
    }

    fn one(&self, key: &str) -> BResult<&'a Value> {
        debug_assert!(self.allowed.contains(&key));
        let mut found = None;
        for (k, v) in &self.section.entries {
            if k == key {
                if found.is_some() {
                    return err(format!("key '{key}' given more than once in [{}]", self.section.name));
                }
                found = Some(v);
            }
        }
        match found {
            Some(v) => Ok(v),
            None => err(format!("missing key '{key}' in [{}]", self.section.name)),
        }
    }

    fn optional(&self, key: &str) -> BResult<Option<&'a Value>> {
        match self.one(key) {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.0.starts_with("missing key") => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn many(&self, key: &str) -> Vec<&'a Value> {
        self.section
            .entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v)
            .collect()
    }
}

fn as_u64(v: &Value, what: &str) -> BResult<u64> {
    match v {
        Value::Int(i) => u64::try_from(i).map_err(|_| BuildError(format!("{what} out of range"))),
        _ => err(format!("{what} must be a nonnegative integer")),
    }
}

fn as_i64(v: &Value, what: &str) -> BResult<i64> {
    match v {
        Value::Int(i) => i64::try_from(i).map_err(|_| BuildError(format!("{what} out of range"))),
        _ => err(format!("{what} must be an integer")),
    }
}

fn as_bigint(v: &Value, what: &str) -> BResult<BigInt> {
    match v {
        Value::Int(i) => Ok(i.clone()),
        _ => err(format!("{what} must be an integer")),
    }
}

fn as_int_list(v: &Value, what: &str) -> BResult<Vec<BigInt>> {
    match v {
        Value::List(items) => items.iter().map(|x| as_bigint(x, what)).collect(),
        _ => err(format!("{what} must be a list of integers")),
    }
}

fn as_u64_list(v: &Value, what: &str) -> BResult<Vec<u64>> {
    match v {
        Value::List(items) => items.iter().map(|x| as_u64(x, what)).collect(),
        _ => err(format!("{what} must be a list of nonnegative integers")),
    }
}

fn as_matrix(v: &Value, what: &str) -> BResult<IntMatrix> {
    match v {
        Value::List(rows) => {
            let rows: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| as_int_list(r, what))
                .collect::<BResult<_>>()?;
            if rows.is_empty() {
                return Ok(IntMatrix::zero(0, 0));
            }
            let cols = rows[0].len();
            if rows.iter().any(|r| r.len() != cols) {
                return err(format!("{what} has ragged rows"));
            }
            Ok(IntMatrix::from_big_rows(&rows))
        }
        _ => err(format!("{what} must be a list of rows")),
    }
}

fn as_element(module: &FgModule, v: &Value, what: &str) -> BResult<ModElement> {
    let Value::Tuple(parts) = v else {
        return err(format!("{what} must be an element tuple ([free], [torsion])"));
    };
    if parts.len() != 2 {
        return err(format!("{what} must have exactly (free, torsion) parts"));
    }
    let free = as_int_list(&parts[0], what)?;
    let tor = as_int_list(&parts[1], what)?;
    module
        .element(free, tor)
        .map_err(|e| BuildError(format!("{what}: {e}")))
}

/// One field element inside a rational-function coefficient list: a plain
/// integer for prime fields, or a list of base-field coefficients.
fn as_field_coeff(v: &Value, what: &str) -> BResult<Vec<u64>> {
    match v {
        Value::Int(i) => Ok(vec![u64::try_from(i)
            .map_err(|_| BuildError(format!("{what}: negative field coefficient")))?]),
        Value::List(items) => items.iter().map(|x| as_u64(x, what)).collect(),
        _ => err(format!("{what} must be an integer or coefficient list")),
    }
}

fn as_poly_coeffs(v: &Value, what: &str) -> BResult<Vec<Vec<u64>>> {
    match v {
        Value::List(items) => items.iter().map(|x| as_field_coeff(x, what)).collect(),
        _ => err(format!("{what} must be a coefficient list")),
    }
}

fn as_ratfun(v: &Value, what: &str) -> BResult<(Vec<Vec<u64>>, Vec<Vec<u64>>)> {
    match v {
        Value::Rat(num, den) => {
            Ok((as_poly_coeffs(num, what)?, as_poly_coeffs(den, what)?))
        }
        Value::List(_) => Ok((as_poly_coeffs(v, what)?, vec![vec![1]])),
        _ => err(format!("{what} must be a rational function 'num / den' or a polynomial list")),
    }
}

fn build_module(doc: &Document) -> BResult<FgModule> {
    let sec = SectionView::new(
        doc,
        "module",
        &["free_rank", "torsion_orders", "a_ff", "a_tf", "a_tt", "min_poly"],
    )?;
    let free_rank = as_u64(sec.one("free_rank")?, "free_rank")? as usize;
    let torsion = as_u64_list(sec.one("torsion_orders")?, "torsion_orders")?;
    let s = torsion.len();
    let fix = |m: IntMatrix, rows: usize, cols: usize, what: &str| -> BResult<IntMatrix> {
        if m.rows() == 0 && m.cols() == 0 && (rows == 0 || cols == 0) {
            return Ok(IntMatrix::zero(rows, cols));
        }
        if m.rows() != rows || m.cols() != cols {
            return err(format!(
                "{what} must be {rows}x{cols}, got {}x{}",
                m.rows(),
                m.cols()
            ));
        }
        Ok(m)
    };
    let a_ff = fix(as_matrix(sec.one("a_ff")?, "a_ff")?, free_rank, free_rank, "a_ff")?;
    let a_tf = fix(as_matrix(sec.one("a_tf")?, "a_tf")?, s, free_rank, "a_tf")?;
    let a_tt = fix(as_matrix(sec.one("a_tt")?, "a_tt")?, s, s, "a_tt")?;
    let min_poly = IntPoly::new(as_int_list(sec.one("min_poly")?, "min_poly")?);
    FgModule::new(free_rank, torsion, a_ff, a_tf, a_tt, min_poly)
        .map_err(|e| BuildError(e.to_string()))
}

fn build_solver(doc: &Document, default: SolverParams) -> BResult<SolverParams> {
    let Some(_) = doc.section("solver") else {
        return Ok(default);
    };
    let sec = SectionView::new(doc, "solver", &["n_max", "sieve"])?;
    let n_max = match sec.optional("n_max")? {
        Some(v) => as_u64(v, "n_max")?,
        None => default.n_max,
    };
    let sieve = match sec.optional("sieve")? {
        Some(v) => as_u64_list(v, "sieve")?,
        None => default.sieve_moduli,
    };
    Ok(SolverParams { n_max, sieve_moduli: sieve })
}

fn check_sections(doc: &Document, allowed: &[&str]) -> BResult<()> {
    for s in &doc.sections {
        if !allowed.contains(&s.name.as_str()) {
            return err(format!("unknown section [{}] for kind {}", s.name, doc.kind));
        }
    }
    Ok(())
}

/// Validates and builds the typed scenario from a parsed document.
pub fn build_scenario(doc: &Document) -> BResult<Scenario> {
    match doc.kind.as_str() {
        "orbit-intersect" => {
            check_sections(doc, &["module", "orbit", "subgroup", "solver"])?;
            let module = build_module(doc)?;
            let orbit_sec = SectionView::new(doc, "orbit", &["base", "term"])?;
            let base = as_element(&module, orbit_sec.one("base")?, "orbit base")?;
            let mut terms = Vec::new();
            for t in orbit_sec.many("term") {
                let Value::Tuple(parts) = t else {
                    return err("orbit term must be ((element), delta)");
                };
                if parts.len() != 2 {
                    return err("orbit term must be ((element), delta)");
                }
                let p = as_element(&module, &parts[0], "orbit term point")?;
                let d = as_u64(&parts[1], "orbit term delta")?;
                terms.push((p, d));
            }
            let orbit = OrbitSum::new(base, terms).map_err(|e| BuildError(e.to_string()))?;
            let sub_sec = SectionView::new(doc, "subgroup", &["generator"])?;
            let generators: Vec<ModElement> = sub_sec
                .many("generator")
                .into_iter()
                .map(|v| as_element(&module, v, "subgroup generator"))
                .collect::<BResult<_>>()?;
            if generators.is_empty() {
                return err("subgroup needs at least one generator");
            }
            let solver = build_solver(doc, SolverParams::default())?;
            Ok(Scenario::OrbitIntersect(OrbitScenario { module, orbit, generators, solver }))
        }
        "fset" => {
            check_sections(doc, &["module", "fset", "enumeration"])?;
            let module = build_module(doc)?;
            let fs = SectionView::new(
                doc,
                "fset",
                &["base", "term", "subgroup_generator", "f_invariant"],
            )?;
            let base = as_element(&module, fs.one("base")?, "fset base")?;
            let mut terms = Vec::new();
            for t in fs.many("term") {
                let Value::Tuple(parts) = t else {
                    return err("fset term must be ((element), delta)");
                };
                if parts.len() != 2 {
                    return err("fset term must be ((element), delta)");
                }
                terms.push((
                    as_element(&module, &parts[0], "fset term point")?,
                    as_u64(&parts[1], "fset term delta")?,
                ));
            }
            let subgroup: Vec<ModElement> = fs
                .many("subgroup_generator")
                .into_iter()
                .map(|v| as_element(&module, v, "fset subgroup generator"))
                .collect::<BResult<_>>()?;
            let f_invariant = match fs.optional("f_invariant")? {
                Some(Value::Bool(b)) => *b,
                Some(_) => return err("f_invariant must be true or false"),
                None => false,
            };
            let en = SectionView::new(doc, "enumeration", &["orbit_bound", "subgroup_box"])?;
            let orbit_bound = as_u64(en.one("orbit_bound")?, "orbit_bound")?;
            let subgroup_box = match en.optional("subgroup_box")? {
                Some(v) => as_u64(v, "subgroup_box")?,
                None => {
                    if subgroup.is_empty() {
                        0
                    } else {
                        return err("subgroup_box required when subgroup generators are present");
                    }
                }
            };
            Ok(Scenario::Fset(FsetScenario {
                module,
                base,
                terms,
                subgroup,
                f_invariant,
                orbit_bound,
                subgroup_box,
            }))
        }
        "recsolve" => {
            check_sections(doc, &["problem", "solver"])?;
            let sec = SectionView::new(
                doc,
                "problem",
                &["min_poly", "variables", "mode", "congruence", "equation", "modulus"],
            )?;
            let min_poly = IntPoly::new(as_int_list(sec.one("min_poly")?, "min_poly")?);
            if !min_poly.is_monic() || min_poly.degree() < 1 {
                return err("min_poly must be monic of degree >= 1");
            }
            let variables = as_u64(sec.one("variables")?, "variables")? as usize;
            let g = min_poly.degree();
            let coeff_matrix = |v: &Value, what: &str| -> BResult<Vec<Vec<BigInt>>> {
                let m = as_matrix(v, what)?;
                if m.rows() != g || m.cols() != variables {
                    return err(format!(
                        "{what} must be {g}x{variables} (rows = sequence index, cols = variable)"
                    ));
                }
                Ok((0..g).map(|j| m.row(j)).collect())
            };
            let mode_word = match sec.one("mode")? {
                Value::Word(w) => w.clone(),
                _ => return err("mode must be one of congruences | equations | period"),
            };
            let mode = match mode_word.as_str() {
                "congruences" => {
                    let mut cs = Vec::new();
                    for c in sec.many("congruence") {
                        let Value::Tuple(parts) = c else {
                            return err("congruence must be (coeffs, rhs, modulus)");
                        };
                        if parts.len() != 3 {
                            return err("congruence must be (coeffs, rhs, modulus)");
                        }
                        cs.push(Congruence {
                            coeffs: coeff_matrix(&parts[0], "congruence coeffs")?,
                            rhs: as_bigint(&parts[1], "congruence rhs")?,
                            modulus: as_bigint(&parts[2], "congruence modulus")?,
                        });
                    }
                    if cs.is_empty() {
                        return err("mode congruences needs at least one 'congruence ='");
                    }
                    RecMode::Congruences(cs)
                }
                "equations" => {
                    let mut forms = Vec::new();
                    for e in sec.many("equation") {
                        let Value::Tuple(parts) = e else {
                            return err("equation must be (coeffs, target)");
                        };
                        if parts.len() != 2 {
                            return err("equation must be (coeffs, target)");
                        }
                        forms.push(EquationForm {
                            coeffs: coeff_matrix(&parts[0], "equation coeffs")?,
                            target: as_bigint(&parts[1], "equation target")?,
                        });
                    }
                    if forms.is_empty() {
                        return err("mode equations needs at least one 'equation ='");
                    }
                    RecMode::Equations(forms)
                }
                "period" => {
                    let modulus = as_u64(sec.one("modulus")?, "modulus")?;
                    RecMode::Period { modulus }
                }
                other => return err(format!("unknown mode '{other}'")),
            };
            let solver = build_solver(doc, SolverParams { n_max: 200, ..Default::default() })?;
            Ok(Scenario::RecSolve(RecScenario { min_poly, variables, mode, solver }))
        }
        "drinfeld-survey" => {
            check_sections(doc, &["drinfeld"])?;
            let sec = SectionView::new(
                doc,
                "drinfeld",
                &["q", "coeff_degree", "phi_t", "deg_bound", "field_modulus"],
            )?;
            let q = as_u64(sec.one("q")?, "q")?;
            let coeff_degree = match sec.optional("coeff_degree")? {
                Some(v) => as_u64(v, "coeff_degree")? as usize,
                None => 1,
            };
            let phi_t = as_poly_coeffs(sec.one("phi_t")?, "phi_t")?;
            let deg_bound = as_u64(sec.one("deg_bound")?, "deg_bound")? as usize;
            let field_modulus = match sec.optional("field_modulus")? {
                Some(v) => Some(as_u64_list(v, "field_modulus")?),
                None => None,
            };
            Ok(Scenario::DrinfeldSurvey(SurveyScenario {
                q,
                coeff_degree,
                phi_t,
                deg_bound,
                field_modulus,
            }))
        }
        "drinfeld-sharp" => {
            check_sections(doc, &["sharp"])?;
            let sec = SectionView::new(doc, "sharp", &["q", "deg_bound"])?;
            Ok(Scenario::DrinfeldSharp(SharpScenarioSpec {
                q: as_u64(sec.one("q")?, "q")?,
                deg_bound: as_u64(sec.one("deg_bound")?, "deg_bound")? as usize,
            }))
        }
        "gm-intersect" => {
            check_sections(doc, &["field", "group", "relation", "search"])?;
            let fsec = SectionView::new(doc, "field", &["p", "degree", "modulus"])?;
            let p = as_u64(fsec.one("p")?, "p")?;
            let degree = as_u64(fsec.one("degree")?, "degree")? as usize;
            let modulus = match fsec.optional("modulus")? {
                Some(v) => Some(as_u64_list(v, "modulus")?),
                None => None,
            };
            let gsec = SectionView::new(doc, "group", &["ambient", "generator"])?;
            let ambient = as_u64(gsec.one("ambient")?, "ambient")? as usize;
            let mut generators = Vec::new();
            for g in gsec.many("generator") {
                let Value::Tuple(parts) = g else {
                    return err("generator must be a tuple of rational functions");
                };
                let tuple: Vec<(Vec<Vec<u64>>, Vec<Vec<u64>>)> = parts
                    .iter()
                    .map(|v| as_ratfun(v, "generator coordinate"))
                    .collect::<BResult<_>>()?;
                generators.push(tuple);
            }
            if generators.is_empty() {
                return err("group needs at least one generator");
            }
            let rsec = SectionView::new(doc, "relation", &["coeffs", "target"])?;
            let coeffs = match rsec.one("coeffs")? {
                Value::Tuple(parts) => parts
                    .iter()
                    .map(|v| as_ratfun(v, "relation coefficient"))
                    .collect::<BResult<Vec<_>>>()?,
                _ => return err("relation coeffs must be a tuple of rational functions"),
            };
            let target = as_ratfun(rsec.one("target")?, "relation target")?;
            let ssec = SectionView::new(doc, "search", &["box"])?;
            let box_bound = as_i64(ssec.one("box")?, "box")?;
            Ok(Scenario::GmIntersect(GmScenario {
                p,
                degree,
                modulus,
                ambient,
                generators,
                relation_coeffs: coeffs,
                relation_target: target,
                box_bound,
            }))
        }
        other => err(format!(
            "unknown kind '{other}' (expected orbit-intersect | fset | recsolve | \
             drinfeld-survey | drinfeld-sharp | gm-intersect)"
        )),
    }
}
