//! Parsing and compilation of scalar expressions over bound functions.
//!
//! The grammar is
//!
//! ```text
//! expr   := term ('+' term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' posint)*
//! atom   := number | ident '(' ident ')' | '(' expr ')'
//! ```
//!
//! so an expression combines named single-variable functions, e.g.
//! `(f(x) + g(y))^2 * h(x)`. Compilation turns the syntax tree into a tensor
//! network: every function reference becomes a sampled function tensor, every
//! variable's occurrences are joined by a COPY chain ending in one open grid
//! leg named after the variable, and additions are wired through control
//! legs. Control legs are only materialized where an enclosing addition
//! needs them - a pure product compiles to a plain union of components whose
//! values multiply on contraction.

use std::collections::BTreeMap;
use std::fmt;

use crate::circuit::{add_tensor, copy_tensor, function_tensor, mul_tensor, QuadratureRule};
use crate::network::TensorNetwork;
use crate::tensor::{Leg, Tensor};
use crate::{Error, Result};

/// Syntax tree of an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprAst {
    Constant(f64),
    /// A named function applied to a named variable, like `f(x)`.
    FunctionRef { function: String, variable: String },
    Add(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
}

impl ExprAst {
    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Add(..) => 1,
            ExprAst::Mul(..) => 2,
            ExprAst::Pow(..) => 3,
            ExprAst::Constant(_) | ExprAst::FunctionRef { .. } => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let needs_parens = self.precedence() < min;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            ExprAst::Constant(c) => write!(f, "{c}")?,
            ExprAst::FunctionRef { function, variable } => write!(f, "{function}({variable})")?,
            ExprAst::Add(l, r) => {
                // The grammar is left-associative, so a right child at the
                // same precedence needs parentheses to round-trip.
                l.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                r.fmt_prec(f, 2)?;
            }
            ExprAst::Mul(l, r) => {
                l.fmt_prec(f, 2)?;
                write!(f, " * ")?;
                r.fmt_prec(f, 3)?;
            }
            ExprAst::Pow(b, n) => {
                b.fmt_prec(f, 4)?;
                write!(f, "^{n}")?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(v) => write!(f, "number `{v}`"),
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Plus => write!(f, "`+`"),
            Token::Star => write!(f, "`*`"),
            Token::Caret => write!(f, "`^`"),
            Token::LParen => write!(f, "`(`"),
            Token::RParen => write!(f, "`)`"),
        }
    }
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset, message: message.into() }
}

fn tokenize(input: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                tokens.push((Token::Plus, i));
                i += 1;
            }
            b'*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            b'^' => {
                tokens.push((Token::Caret, i));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Optional exponent part.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &input[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| parse_error(start, format!("invalid number `{text}`")))?;
                tokens.push((Token::Number(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(input[start..i].to_string()), start));
            }
            _ => {
                return Err(parse_error(
                    i,
                    format!("unexpected character `{}`", &input[i..i + 1]),
                ));
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    pos: usize,
    input_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.input_len)
    }

    fn advance(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(parse_error(self.offset(), format!("expected {want}, found {t}"))),
            None => Err(parse_error(self.offset(), format!("expected {want}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut node = self.term()?;
        while self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            let rhs = self.term()?;
            node = ExprAst::Add(Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut node = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            let rhs = self.factor()?;
            node = ExprAst::Mul(Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<ExprAst> {
        let mut node = self.atom()?;
        while self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let off = self.offset();
            match self.advance().cloned() {
                Some(Token::Number(v)) => {
                    if v.fract() != 0.0 || v < 1.0 || v > 1_000.0 {
                        return Err(parse_error(
                            off,
                            format!("exponent must be a positive integer (at most 1000), got `{v}`"),
                        ));
                    }
                    node = ExprAst::Pow(Box::new(node), v as u32);
                }
                Some(t) => {
                    return Err(parse_error(off, format!("expected integer exponent, found {t}")))
                }
                None => {
                    return Err(parse_error(off, "expected integer exponent, found end of input"))
                }
            }
        }
        Ok(node)
    }

    fn atom(&mut self) -> Result<ExprAst> {
        let off = self.offset();
        match self.advance().cloned() {
            Some(Token::Number(v)) => Ok(ExprAst::Constant(v)),
            Some(Token::Ident(name)) => {
                self.expect(Token::LParen).map_err(|_| {
                    parse_error(
                        off + name.len(),
                        format!("expected `(` after function name `{name}`"),
                    )
                })?;
                let var_off = self.offset();
                let variable = match self.advance().cloned() {
                    Some(Token::Ident(v)) => v,
                    Some(t) => {
                        return Err(parse_error(var_off, format!("expected variable name, found {t}")))
                    }
                    None => {
                        return Err(parse_error(var_off, "expected variable name, found end of input"))
                    }
                };
                self.expect(Token::RParen)?;
                Ok(ExprAst::FunctionRef { function: name, variable })
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(parse_error(off, format!("expected a value, found {t}"))),
            None => Err(parse_error(off, "expected a value, found end of input")),
        }
    }
}

/// Parses an expression, reporting errors with byte offsets into the input.
pub fn parse(input: &str) -> Result<ExprAst> {
    let tokens = tokenize(input)?;
    let mut p = Parser { tokens: &tokens, pos: 0, input_len: input.len() };
    let ast = p.expr()?;
    if p.pos != tokens.len() {
        return Err(parse_error(
            p.offset(),
            format!("unexpected trailing {}", tokens[p.pos].0),
        ));
    }
    Ok(ast)
}

/// A function bound to a name for use in expressions.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundFunction {
    Constant(f64),
    /// offset + sin(frequency * x + phase)
    Sinusoid { frequency: f64, phase: f64, offset: f64 },
    /// Coefficients in ascending degree: c0 + c1 x + c2 x^2 + ...
    Polynomial(Vec<f64>),
    /// Raw per-grid-point values; length must match the variable's rule.
    Samples(Vec<f64>),
}

impl BoundFunction {
    /// Values of the function at the rule's nodes.
    pub fn sample_on(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        match self {
            BoundFunction::Constant(c) => Ok(vec![*c; rule.len()]),
            BoundFunction::Sinusoid { frequency, phase, offset } => {
                Ok(rule.sample(|x| offset + (frequency * x + phase).sin()))
            }
            BoundFunction::Polynomial(coeffs) => Ok(rule.sample(|x| {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
            })),
            BoundFunction::Samples(v) => {
                if v.len() != rule.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} samples for a {}-node rule",
                        v.len(),
                        rule.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Bindings of function names and variable quadrature rules.
#[derive(Clone, Debug, Default)]
pub struct CompilationEnv {
    functions: BTreeMap<String, BoundFunction>,
    rules: BTreeMap<String, QuadratureRule>,
}

/// An expression compiled to a tensor network. Each variable appears as one
/// open grid leg named after it; all controls are internal.
#[derive(Clone, Debug)]
pub struct CompiledExpression {
    network: TensorNetwork,
    variables: Vec<String>,
}

impl CompilationEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind_function(&mut self, name: impl Into<String>, f: BoundFunction) {
        self.functions.insert(name.into(), f);
    }

    pub fn bind_variable(&mut self, name: impl Into<String>, rule: QuadratureRule) {
        self.rules.insert(name.into(), rule);
    }

    pub fn rule_for(&self, variable: &str) -> Option<&QuadratureRule> {
        self.rules.get(variable)
    }

    /// Compiles the syntax tree into a tensor network with one open grid leg
    /// per variable.
    pub fn compile(&self, ast: &ExprAst) -> Result<CompiledExpression> {
        let mut c = Compiler {
            env: self,
            tn: TensorNetwork::new(),
            fresh: 0,
            grid_uses: BTreeMap::new(),
        };
        let root = c.node(ast, false)?;
        debug_assert!(root.is_none(), "root control must close itself");
        for (var, uses) in std::mem::take(&mut c.grid_uses) {
            let g = self.rules[&var].len();
            if uses.len() == 1 {
                c.tn.rename_leg(&uses[0], &var)?;
            } else {
                let mut legs = vec![var.clone()];
                legs.extend(uses);
                c.add_copy_chain(g, &legs)?;
            }
        }
        if c.tn.is_empty() {
            c.tn.add_tensor(Tensor::scalar(1.0))?;
        }
        let variables = c
            .tn
            .open_legs()
            .into_iter()
            .filter(|l| !l.starts_with('#'))
            .collect();
        Ok(CompiledExpression { network: c.tn, variables })
    }

    /// Compiles and closes every grid leg with its quadrature weights: the
    /// contraction of the result is the integral of the expression.
    pub fn integral_network(&self, ast: &ExprAst) -> Result<TensorNetwork> {
        let compiled = self.compile(ast)?;
        let mut tn = compiled.network;
        for var in &compiled.variables {
            let rule = &self.rules[var];
            tn.add_tensor(Tensor::new(
                vec![Leg::new(var.clone(), rule.len())],
                rule.weights().to_vec(),
            )?)?;
        }
        Ok(tn)
    }

    /// Reference interpreter: evaluates the syntax tree directly at grid
    /// indices (parallel to `variables`). Used to cross-check compilation.
    pub fn interpret_at(
        &self,
        ast: &ExprAst,
        variables: &[String],
        indices: &[usize],
    ) -> Result<f64> {
        if variables.len() != indices.len() {
            return Err(Error::InvalidArgument(format!(
                "{} variables but {} indices",
                variables.len(),
                indices.len()
            )));
        }
        match ast {
            ExprAst::Constant(c) => Ok(*c),
            ExprAst::FunctionRef { function, variable } => {
                let rule = self.rules.get(variable).ok_or_else(|| {
                    Error::Config(format!("variable `{variable}` has no quadrature rule"))
                })?;
                let f = self.functions.get(function).ok_or_else(|| {
                    Error::Config(format!("function `{function}` is not bound"))
                })?;
                let pos = variables.iter().position(|v| v == variable).ok_or_else(|| {
                    Error::InvalidArgument(format!("no index given for variable `{variable}`"))
                })?;
                let samples = f.sample_on(rule)?;
                samples.get(indices[pos]).copied().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "index {} out of range for variable `{variable}`",
                        indices[pos]
                    ))
                })
            }
            ExprAst::Add(l, r) => Ok(self.interpret_at(l, variables, indices)?
                + self.interpret_at(r, variables, indices)?),
            ExprAst::Mul(l, r) => Ok(self.interpret_at(l, variables, indices)?
                * self.interpret_at(r, variables, indices)?),
            ExprAst::Pow(b, n) => {
                Ok(self.interpret_at(b, variables, indices)?.powi(*n as i32))
            }
        }
    }
}

impl CompiledExpression {
    pub fn network(&self) -> &TensorNetwork {
        &self.network
    }

    /// Variables of the expression, sorted; parallel to `evaluate_at` input.
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// Evaluates the compiled network at one grid point per variable by
    /// slicing the open legs and contracting what remains.
    pub fn evaluate_at(&self, indices: &[usize]) -> Result<f64> {
        if indices.len() != self.variables.len() {
            return Err(Error::InvalidArgument(format!(
                "{} indices for {} variables",
                indices.len(),
                self.variables.len()
            )));
        }
        let mut tn = TensorNetwork::new();
        tn.scale_by(self.network.sign() as f64);
        for t in self.network.tensors() {
            let mut cur = t.clone();
            for (var, &idx) in self.variables.iter().zip(indices) {
                if cur.has_leg(var) {
                    cur = cur.slice(var, idx)?;
                }
            }
            tn.add_tensor(cur)?;
        }
        let report = tn.contract_exact()?;
        Ok(report.value_sign as f64
            * (report.value_log + self.network.log_scale()).exp())
    }
}

struct Compiler<'a> {
    env: &'a CompilationEnv,
    tn: TensorNetwork,
    fresh: usize,
    /// Variable name -> grid legs of the function tensors sampling it.
    grid_uses: BTreeMap<String, Vec<String>>,
}

impl Compiler<'_> {
    fn fresh_leg(&mut self, tag: &str) -> String {
        let n = self.fresh;
        self.fresh += 1;
        format!("#{tag}{n}")
    }

    /// Compiles one node. Returns the node's control leg when an enclosing
    /// addition needs the node's value on a control channel, `None` when the
    /// node contributes as a plain multiplicative component.
    fn node(&mut self, ast: &ExprAst, under_add: bool) -> Result<Option<String>> {
        match ast {
            ExprAst::Constant(c) => {
                if under_add {
                    let leg = self.fresh_leg("c");
                    self.tn.add_tensor(Tensor::new(
                        vec![Leg::new(leg.clone(), 2)],
                        vec![1.0, *c],
                    )?)?;
                    Ok(Some(leg))
                } else {
                    self.tn.scale_by(*c);
                    Ok(None)
                }
            }
            ExprAst::FunctionRef { function, variable } => {
                let rule = self.env.rules.get(variable).ok_or_else(|| {
                    Error::Config(format!("variable `{variable}` has no quadrature rule"))
                })?;
                let f = self.env.functions.get(function).ok_or_else(|| {
                    Error::Config(format!("function `{function}` is not bound"))
                })?;
                let samples = f.sample_on(rule)?;
                let grid = self.fresh_leg("g");
                self.grid_uses
                    .entry(variable.clone())
                    .or_default()
                    .push(grid.clone());
                if under_add {
                    let ctrl = self.fresh_leg("c");
                    self.tn
                        .add_tensor(function_tensor(&samples, &grid, Some(&ctrl))?)?;
                    Ok(Some(ctrl))
                } else {
                    self.tn.add_tensor(function_tensor(&samples, &grid, None)?)?;
                    Ok(None)
                }
            }
            ExprAst::Add(l, r) => {
                let lc = self.node(l, true)?.expect("children under add keep controls");
                let rc = self.node(r, true)?.expect("children under add keep controls");
                let out = self.fresh_leg("c");
                self.tn.add_tensor(add_tensor(&lc, &rc, &out))?;
                if under_add {
                    Ok(Some(out))
                } else {
                    // Select the value slice of the sum and fold it in as a
                    // multiplicative component.
                    self.tn.add_tensor(Tensor::new(
                        vec![Leg::new(out, 2)],
                        vec![0.0, 1.0],
                    )?)?;
                    Ok(None)
                }
            }
            ExprAst::Mul(l, r) => {
                if under_add {
                    let lc = self.node(l, true)?.expect("children under add keep controls");
                    let rc = self.node(r, true)?.expect("children under add keep controls");
                    let out = self.fresh_leg("c");
                    self.tn.add_tensor(mul_tensor(&lc, &rc, &out))?;
                    Ok(Some(out))
                } else {
                    self.node(l, false)?;
                    self.node(r, false)?;
                    Ok(None)
                }
            }
            ExprAst::Pow(b, n) => {
                let n = *n as usize;
                if under_add {
                    let mut ctrls = Vec::with_capacity(n);
                    for _ in 0..n {
                        ctrls.push(
                            self.node(b, true)?.expect("children under add keep controls"),
                        );
                    }
                    if n == 1 {
                        return Ok(Some(ctrls.pop().unwrap()));
                    }
                    // Join the n copies multiplicatively: the product of
                    // control channels is a COPY of dimension 2.
                    let out = self.fresh_leg("c");
                    ctrls.push(out.clone());
                    self.add_copy_chain(2, &ctrls)?;
                    Ok(Some(out))
                } else {
                    for _ in 0..n {
                        self.node(b, false)?;
                    }
                    Ok(None)
                }
            }
        }
    }

    /// Adds a COPY joining all `legs`, decomposed into arity-3 pieces when
    /// there are more than three.
    fn add_copy_chain(&mut self, dim: usize, legs: &[String]) -> Result<()> {
        if legs.len() <= 3 {
            let names: Vec<&str> = legs.iter().map(|s| s.as_str()).collect();
            self.tn.add_tensor(copy_tensor(dim, &names)?)?;
            return Ok(());
        }
        let mut carried = legs[0].clone();
        for i in 1..legs.len() - 1 {
            if i == legs.len() - 2 {
                self.tn
                    .add_tensor(copy_tensor(dim, &[&carried, &legs[i], &legs[i + 1]])?)?;
            } else {
                let bond = self.fresh_leg("b");
                self.tn
                    .add_tensor(copy_tensor(dim, &[&carried, &legs[i], &bond])?)?;
                carried = bond;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gauss_legendre;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fref(f: &str, v: &str) -> ExprAst {
        ExprAst::FunctionRef { function: f.to_string(), variable: v.to_string() }
    }

    #[test]
    fn parses_precedence_and_associativity() {
        let ast = parse("f(x) + g(y) * h(x)^2").unwrap();
        let want = ExprAst::Add(
            Box::new(fref("f", "x")),
            Box::new(ExprAst::Mul(
                Box::new(fref("g", "y")),
                Box::new(ExprAst::Pow(Box::new(fref("h", "x")), 2)),
            )),
        );
        assert_eq!(ast, want);
    }

    #[test]
    fn parses_parenthesized_power() {
        let ast = parse("(f(x) + 1)^3").unwrap();
        let want = ExprAst::Pow(
            Box::new(ExprAst::Add(
                Box::new(fref("f", "x")),
                Box::new(ExprAst::Constant(1.0)),
            )),
            3,
        );
        assert_eq!(ast, want);
    }

    #[test]
    fn parse_errors_carry_byte_offsets() {
        match parse("f(x) + ") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("f(x").map_err(|e| e) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("f(x) ) ") {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, 5);
                assert!(message.contains("trailing"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("f(x)^y") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("f(x)^0") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("f + g") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    fn test_env() -> CompilationEnv {
        let mut env = CompilationEnv::new();
        env.bind_function("f", BoundFunction::Polynomial(vec![0.5, 1.0]));
        env.bind_function(
            "g",
            BoundFunction::Sinusoid { frequency: 2.0, phase: 0.3, offset: 0.25 },
        );
        env.bind_function("h", BoundFunction::Constant(2.0));
        env.bind_variable("x", gauss_legendre(3, (0.0, 1.0)).unwrap());
        env.bind_variable("y", gauss_legendre(2, (-1.0, 1.0)).unwrap());
        env
    }

    fn check_against_interpreter(env: &CompilationEnv, src: &str) {
        let ast = parse(src).unwrap();
        let compiled = env.compile(&ast).unwrap();
        let vars = compiled.variables().to_vec();
        let dims: Vec<usize> = vars.iter().map(|v| env.rule_for(v).unwrap().len()).collect();
        let total: usize = dims.iter().product();
        for flat in 0..total.max(1) {
            let mut rem = flat;
            let mut idx = vec![0usize; vars.len()];
            for j in (0..vars.len()).rev() {
                idx[j] = rem % dims[j];
                rem /= dims[j];
            }
            let got = compiled.evaluate_at(&idx).unwrap();
            let want = env.interpret_at(&ast, &vars, &idx).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-11 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn compiled_networks_match_interpreter() {
        let env = test_env();
        for src in [
            "f(x)",
            "3.5",
            "f(x) + g(y)",
            "f(x) * g(y)",
            "f(x) * f(x)",
            "f(x)^2",
            "(f(x) + g(y))^2",
            "(f(x) + g(x))^3",
            "f(x) * (g(y) + 2) + h(x)",
            "(f(x) + g(y)) * (f(x) + h(y))",
            "((f(x) + 1)^2 + g(y))^2",
            "2 * f(x) + 3",
            "f(x)^2 * g(y)^3 + 0.5",
        ] {
            check_against_interpreter(&env, src);
        }
    }

    #[test]
    fn product_expressions_elide_all_controls() {
        // A pure product compiles without any control legs: only function
        // tensors and grid COPYs appear.
        let env = test_env();
        let compiled = env.compile(&parse("f(x) * g(y) * f(x)").unwrap()).unwrap();
        for t in compiled.network().tensors() {
            for leg in t.legs() {
                assert!(
                    !leg.name.starts_with("#c"),
                    "unexpected control leg {}",
                    leg.name
                );
            }
        }
        // f twice on x -> arity-3 COPY; g once on y -> renamed leg, no COPY.
        assert_eq!(compiled.network().len(), 4);
    }

    #[test]
    fn sum_expressions_keep_controls() {
        let env = test_env();
        let compiled = env.compile(&parse("f(x) + g(y)").unwrap()).unwrap();
        let has_add_controls = compiled
            .network()
            .tensors()
            .iter()
            .any(|t| t.legs().iter().any(|l| l.name.starts_with("#c")));
        assert!(has_add_controls);
    }

    #[test]
    fn power_duplicates_subnetworks() {
        // No subexpression sharing: f(x)^3 produces three function tensors.
        let env = test_env();
        let compiled = env.compile(&parse("f(x)^3").unwrap()).unwrap();
        let function_tensors = compiled
            .network()
            .tensors()
            .iter()
            .filter(|t| t.legs().iter().any(|l| l.name.starts_with("#g") || l.name == "x"))
            .filter(|t| !t.data().iter().all(|&v| v == 0.0 || v == 1.0))
            .count();
        assert_eq!(function_tensors, 3);
    }

    #[test]
    fn constant_expression_compiles_to_scalar() {
        let env = test_env();
        let compiled = env.compile(&parse("2 * 3.5").unwrap()).unwrap();
        assert!(compiled.variables().is_empty());
        assert_abs_diff_eq!(compiled.evaluate_at(&[]).unwrap(), 7.0, epsilon = 1e-13);
    }

    #[test]
    fn integral_network_integrates_polynomial() {
        // integral of (x + 0.5)^2 over [0,1] = [ (x+0.5)^3 / 3 ] = (3.375 - 0.125)/3.
        let env = test_env();
        let tn = env.integral_network(&parse("f(x)^2").unwrap()).unwrap();
        let r = tn.contract_exact().unwrap();
        let want = (1.5f64.powi(3) - 0.5f64.powi(3)) / 3.0;
        assert_abs_diff_eq!(r.value(), want, epsilon = 1e-12);
    }

    #[test]
    fn unbound_names_are_reported() {
        let env = test_env();
        assert!(matches!(
            env.compile(&parse("q(x)").unwrap()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            env.compile(&parse("f(z)").unwrap()),
            Err(Error::Config(_))
        ));
    }

    fn ast_strategy() -> impl Strategy<Value = ExprAst> {
        let leaf = prop_oneof![
            (1u32..200).prop_map(|n| ExprAst::Constant(n as f64 / 8.0)),
            (prop_oneof![Just("f"), Just("g"), Just("h")], prop_oneof![Just("x"), Just("y")])
                .prop_map(|(f, v)| fref(f, v)),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ExprAst::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ExprAst::Mul(Box::new(a), Box::new(b))),
                (inner, 1u32..4).prop_map(|(a, n)| ExprAst::Pow(Box::new(a), n)),
            ]
        })
    }

    proptest! {
        #[test]
        fn printing_round_trips(ast in ast_strategy()) {
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(reparsed, ast);
        }

        #[test]
        fn compilation_matches_interpreter_on_random_trees(ast in ast_strategy()) {
            let env = test_env();
            let compiled = env.compile(&ast).unwrap();
            let vars = compiled.variables().to_vec();
            let dims: Vec<usize> =
                vars.iter().map(|v| env.rule_for(v).unwrap().len()).collect();
            // Spot-check the all-zeros and all-max corners plus a mixed point.
            let mut probes = vec![vec![0usize; vars.len()]];
            probes.push(dims.iter().map(|d| d - 1).collect());
            probes.push(dims.iter().enumerate().map(|(i, d)| (i + 1) % d).collect());
            for idx in probes {
                let got = compiled.evaluate_at(&idx).unwrap();
                let want = env.interpret_at(&ast, &vars, &idx).unwrap();
                let tol = 1e-8 * (1.0 + want.abs());
                prop_assert!((got - want).abs() <= tol, "got {got}, want {want}");
            }
        }
    }
}
