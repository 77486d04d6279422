//! One-off expression integration: parse, bind, compile, contract.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::Context;
use tensorquad::circuit::{gauss_legendre, uniform_rule};
use tensorquad::contract_exact;
use tensorquad::expr::{parse, BoundFunction, CompilationEnv, ExprAst};
use tensorquad::QuadratureRule;

use crate::config::UsageError;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// `gauss:<G>` or `uniform:<G>` on a shared interval.
pub fn parse_rule(spec: &str, interval: (f64, f64)) -> anyhow::Result<QuadratureRule> {
    let (kind, count) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("--rule `{spec}`: expected gauss:<G> or uniform:<G>")))?;
    let g: usize = count
        .trim()
        .parse()
        .map_err(|_| usage(format!("--rule `{spec}`: `{count}` is not a grid size")))?;
    let rule = match kind.trim() {
        "gauss" => gauss_legendre(g, interval),
        "uniform" => uniform_rule(g, interval),
        other => return Err(usage(format!("--rule `{spec}`: unknown kind `{other}`"))),
    };
    rule.map_err(|e| usage(e.to_string()))
}

pub fn parse_interval(spec: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(usage(format!("--interval `{spec}`: expected `lo,hi`")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("--interval `{spec}`: `{}` is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("--interval `{spec}`: `{}` is not a number", parts[1])))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(usage(format!("--interval `{spec}`: need finite lo < hi")));
    }
    Ok((lo, hi))
}

fn parse_floats(raw: &str, line_no: usize) -> anyhow::Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|piece| !piece.is_empty())
        .map(|piece| {
            piece.parse().map_err(|_| {
                usage(format!("bindings line {line_no}: `{piece}` is not a number"))
            })
        })
        .collect()
}

/// Lines of `name = const v | sin freq phase offset | poly c0,c1,.. | samples v0,..`.
pub fn parse_bindings(text: &str) -> anyhow::Result<Vec<(String, BoundFunction)>> {
    let mut bindings = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, body) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("bindings line {line_no}: expected `name = kind ...`")))?;
        let name = name.trim().to_string();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(usage(format!("bindings line {line_no}: bad function name `{name}`")));
        }
        if !seen.insert(name.clone()) {
            return Err(usage(format!("bindings line {line_no}: `{name}` bound twice")));
        }
        let body = body.trim();
        let (kind, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let function = match kind {
            "const" => {
                let v: f64 = rest.trim().parse().map_err(|_| {
                    usage(format!("bindings line {line_no}: const needs one number"))
                })?;
                BoundFunction::Constant(v)
            }
            "sin" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(usage(format!(
                        "bindings line {line_no}: sin needs `frequency phase offset`"
                    )));
                }
                let nums: Vec<f64> = parts
                    .iter()
                    .map(|p| {
                        p.parse().map_err(|_| {
                            usage(format!("bindings line {line_no}: `{p}` is not a number"))
                        })
                    })
                    .collect::<anyhow::Result<_>>()?;
                BoundFunction::Sinusoid { frequency: nums[0], phase: nums[1], offset: nums[2] }
            }
            "poly" => BoundFunction::Polynomial(parse_floats(rest, line_no)?),
            "samples" => BoundFunction::Samples(parse_floats(rest, line_no)?),
            other => {
                return Err(usage(format!(
                    "bindings line {line_no}: unknown kind `{other}` \
                     (expected const, sin, poly, or samples)"
                )))
            }
        };
        bindings.push((name, function));
    }
    Ok(bindings)
}

fn collect_refs(ast: &ExprAst, functions: &mut BTreeSet<String>, variables: &mut BTreeSet<String>) {
    match ast {
        ExprAst::Constant(_) => {}
        ExprAst::FunctionRef { function, variable } => {
            functions.insert(function.clone());
            variables.insert(variable.clone());
        }
        ExprAst::Add(a, b) | ExprAst::Mul(a, b) => {
            collect_refs(a, functions, variables);
            collect_refs(b, functions, variables);
        }
        ExprAst::Pow(a, _) => collect_refs(a, functions, variables),
    }
}

/// Integrates `text` with every variable on the same rule; returns the value.
pub fn integrate_expression(
    text: &str,
    bindings_path: Option<&Path>,
    rule_spec: &str,
    interval_spec: &str,
) -> anyhow::Result<f64> {
    let interval = parse_interval(interval_spec)?;
    let rule = parse_rule(rule_spec, interval)?;
    let ast = parse(text).map_err(|e| usage(format!("expression: {e}")))?;

    let mut functions = BTreeSet::new();
    let mut variables = BTreeSet::new();
    collect_refs(&ast, &mut functions, &mut variables);

    let bindings = match bindings_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read bindings `{}`: {e}", path.display())))?;
            parse_bindings(&text)?
        }
        None => Vec::new(),
    };
    let bound: BTreeSet<&String> = bindings.iter().map(|(name, _)| name).collect();
    let missing: Vec<&str> = functions
        .iter()
        .filter(|name| !bound.contains(name))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(usage(format!(
            "unbound function(s) {}; define them in a --bindings file",
            missing.join(", ")
        )));
    }

    let mut env = CompilationEnv::new();
    for (name, function) in bindings {
        env.bind_function(name, function);
    }
    for variable in &variables {
        env.bind_variable(variable.clone(), rule.clone());
    }

    let network = env.integral_network(&ast).context("compiling the expression")?;
    let report = contract_exact(&network).context("contracting the expression network")?;
    Ok(report.value())
}
