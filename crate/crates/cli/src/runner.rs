//! Executes a configured sweep: reference values first, then every
//! (seed, grid, bond) measurement cell, in a deterministic record order
//! that does not depend on the worker count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::Instant;

use anyhow::{anyhow, bail};
use tensorquad::integrands::{
    brute_force_gaussian, brute_force_mera, brute_force_polynomial, build_gaussian_tn,
    build_mera_integrand, build_polynomial_tn, make_sin_polynomial_with_phases,
    recursion_integral, sin_term,
};
use tensorquad::{
    boundary_contract_banded, boundary_contract_rows, qmc_integrate, qmc_integrate_log,
    ContractionReport, FamilyInstance, FamilySpec, TruncationSpec,
};

use crate::config::{ReferenceMode, RunConfig};
use crate::record::ConvergenceRecord;

/// Largest variable count the full-grid reference sum will attempt.
const BRUTE_FORCE_MAX_VARS: usize = 6;
/// Reference contractions discarding more weight than this are flagged.
const REFERENCE_DISCARD_ALERT: f64 = 1e-12;

/// A computed value in (ln |v|, sign) form plus contraction metadata.
#[derive(Clone, Copy, Debug)]
struct Estimate {
    log: f64,
    sign: i8,
    max_bond: Option<usize>,
    discarded: Option<f64>,
}

fn sign_of(v: f64) -> i8 {
    if v == 0.0 {
        0
    } else if v < 0.0 {
        -1
    } else {
        1
    }
}

fn scalar_estimate(v: f64) -> Estimate {
    Estimate { log: v.abs().ln(), sign: sign_of(v), max_bond: None, discarded: None }
}

fn as_report(e: &Estimate) -> ContractionReport {
    ContractionReport {
        value_log: e.log,
        value_sign: e.sign,
        max_bond_reached: e.max_bond.unwrap_or(0),
        cumulative_discarded_weight: e.discarded.unwrap_or(0.0),
    }
}

/// Methods measured inside the sweep (references are handled separately).
#[derive(Clone, Copy, Debug)]
enum Method {
    Tn { g: usize, chi: Option<usize> },
    Recursion { g: usize },
    Qmc { n_samples: u64 },
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    seed: u64,
    method: Method,
}

/// Row slots in emission order; measurements refer into the cell list.
enum Row {
    Reference { seed: u64, g: Option<usize> },
    Measure(usize),
}

pub fn run_sweep(cfg: &RunConfig, oracle_only: bool) -> anyhow::Result<Vec<ConvergenceRecord>> {
    let started = Instant::now();
    let family = &cfg.family;
    let is_mera = matches!(family, FamilySpec::Mera { .. });
    let is_power = matches!(family, FamilySpec::PolynomialPower { .. });
    let mode = if oracle_only { ReferenceMode::BruteForce } else { cfg.reference };
    let max_g = *cfg.grids.iter().max().expect("validated non-empty");
    let max_chi = cfg.chis.iter().max().copied();

    let mut cells: Vec<Cell> = Vec::new();
    let mut plan: Vec<Row> = Vec::new();
    for &seed in &cfg.seeds {
        if !oracle_only && mode == ReferenceMode::ConvergedTn {
            plan.push(Row::Reference { seed, g: None });
        }
        for &g in &cfg.grids {
            if mode == ReferenceMode::BruteForce {
                plan.push(Row::Reference { seed, g: Some(g) });
            }
            if oracle_only {
                continue;
            }
            for &chi in &cfg.chis {
                cells.push(Cell { seed, method: Method::Tn { g, chi: Some(chi) } });
                plan.push(Row::Measure(cells.len() - 1));
            }
            if is_mera {
                cells.push(Cell { seed, method: Method::Tn { g, chi: None } });
                plan.push(Row::Measure(cells.len() - 1));
            }
            if is_power {
                cells.push(Cell { seed, method: Method::Recursion { g } });
                plan.push(Row::Measure(cells.len() - 1));
            }
        }
        if !oracle_only {
            for &n_samples in &cfg.n_samples {
                cells.push(Cell { seed, method: Method::Qmc { n_samples } });
                plan.push(Row::Measure(cells.len() - 1));
            }
        }
    }

    // Phase 1: every reference value the plan needs, keyed (seed, grid).
    let mut ref_keys: Vec<(u64, Option<usize>)> = Vec::new();
    for row in &plan {
        if let Row::Reference { seed, g } = row {
            ref_keys.push((*seed, *g));
        }
    }
    eprintln!(
        "[bench] family {}: {} reference value(s), {} sweep cell(s), {} thread(s)",
        family.family_name(),
        if mode == ReferenceMode::Analytic { cfg.seeds.len() } else { ref_keys.len() },
        cells.len(),
        cfg.threads
    );

    let ref_results = parallel_map(&ref_keys, cfg.threads, |&(seed, g)| {
        let t0 = Instant::now();
        let est = match mode {
            ReferenceMode::BruteForce => brute_estimate(family, seed, g.expect("brute per grid")),
            ReferenceMode::ConvergedTn => {
                let est = tn_estimate(family, seed, max_g, max_chi, cfg.cutoff)?;
                if est.discarded.unwrap_or(0.0) > REFERENCE_DISCARD_ALERT {
                    eprintln!(
                        "[bench] warning: reference for seed {seed} discarded {:.3e} of its \
                         weight at chi={:?}; relative errors may be floor-limited",
                        est.discarded.unwrap_or(0.0),
                        max_chi
                    );
                }
                Ok(est)
            }
            ReferenceMode::Analytic => unreachable!("analytic mode makes no reference tasks"),
        }?;
        Ok((est, t0.elapsed().as_secs_f64()))
    })?;
    let mut references: BTreeMap<(u64, Option<usize>), (Estimate, f64)> = BTreeMap::new();
    for (key, value) in ref_keys.iter().zip(ref_results) {
        references.insert(*key, value);
    }
    if mode == ReferenceMode::Analytic {
        for &seed in &cfg.seeds {
            let exact = analytic_estimate(family)?;
            references.insert((seed, None), (exact, 0.0));
        }
    }

    let reference_for = |seed: u64, g: Option<usize>| -> anyhow::Result<(Estimate, f64)> {
        let key = match mode {
            ReferenceMode::BruteForce => (seed, Some(g.unwrap_or(max_g))),
            _ => (seed, None),
        };
        references
            .get(&key)
            .copied()
            .ok_or_else(|| anyhow!("missing reference for seed {seed}, grid {g:?}"))
    };

    // Phase 2: the measurement cells.
    let cell_results = parallel_map(&cells, cfg.threads, |cell| {
        let t0 = Instant::now();
        let est = match cell.method {
            Method::Tn { g, chi } => tn_estimate(family, cell.seed, g, chi, cfg.cutoff)?,
            Method::Recursion { g } => recursion_estimate(family, cell.seed, g)?,
            Method::Qmc { n_samples } => qmc_estimate(family, cell.seed, n_samples, cfg.batch)?,
        };
        Ok((est, t0.elapsed().as_secs_f64()))
    })?;

    let mut records = Vec::with_capacity(plan.len());
    for row in &plan {
        let record = match *row {
            Row::Reference { seed, g } => {
                let (est, elapsed) = *references
                    .get(&(seed, g))
                    .ok_or_else(|| anyhow!("missing reference for seed {seed}, grid {g:?}"))?;
                let method = if mode == ReferenceMode::BruteForce { "brute" } else { "tn" };
                let (chi, grid) = if mode == ReferenceMode::BruteForce {
                    (None, g)
                } else {
                    (max_chi, Some(max_g))
                };
                make_record(family, seed, method, chi, grid, None, &est, &est, elapsed)
            }
            Row::Measure(idx) => {
                let cell = cells[idx];
                let (est, elapsed) = cell_results[idx];
                let (method, chi, grid, n_samples) = match cell.method {
                    Method::Tn { g, chi } => ("tn", chi, Some(g), None),
                    Method::Recursion { g } => ("recursion", None, Some(g), None),
                    Method::Qmc { n_samples } => ("qmc", None, None, Some(n_samples)),
                };
                let (reference, _) = reference_for(cell.seed, grid)?;
                make_record(
                    family, cell.seed, method, chi, grid, n_samples, &est, &reference, elapsed,
                )
            }
        };
        records.push(record);
    }
    eprintln!("[bench] {} record(s) in {:.2}s", records.len(), started.elapsed().as_secs_f64());
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn make_record(
    family: &FamilySpec,
    seed: u64,
    method: &str,
    chi: Option<usize>,
    g: Option<usize>,
    n_samples: Option<u64>,
    est: &Estimate,
    reference: &Estimate,
    elapsed: f64,
) -> ConvergenceRecord {
    ConvergenceRecord {
        family: family.family_name().to_string(),
        seed,
        method: method.to_string(),
        chi,
        g,
        n_samples,
        estimate_log: est.log,
        estimate_sign: est.sign,
        reference_log: reference.log,
        reference_sign: reference.sign,
        relative_error: as_report(est).relative_error_to(&as_report(reference)),
        elapsed_seconds: elapsed,
        max_bond_reached: est.max_bond,
        discarded_weight: est.discarded,
    }
}

fn instantiate(family: &FamilySpec, seed: u64, g: usize) -> anyhow::Result<FamilyInstance> {
    Ok(family.with_grid(g).instantiate(seed)?)
}

fn tn_estimate(
    family: &FamilySpec,
    seed: u64,
    g: usize,
    chi: Option<usize>,
    cutoff: f64,
) -> anyhow::Result<Estimate> {
    match instantiate(family, seed, g)? {
        FamilyInstance::Polynomial(spec) => {
            let chi = chi.ok_or_else(|| anyhow!("polynomial contraction needs a bond limit"))?;
            let structure = build_polynomial_tn(&spec)?;
            let report = boundary_contract_rows(&structure, &TruncationSpec::new(chi, cutoff)?)?;
            Ok(from_report(&report))
        }
        FamilyInstance::Gaussian(spec) => {
            let chi = chi.ok_or_else(|| anyhow!("coupled contraction needs a bond limit"))?;
            let tn = build_gaussian_tn(&spec)?;
            let report = boundary_contract_banded(&tn, &TruncationSpec::new(chi, cutoff)?)?;
            Ok(from_report(&report))
        }
        FamilyInstance::Mera(spec) => Ok(scalar_estimate(build_mera_integrand(&spec)?)),
    }
}

fn from_report(report: &ContractionReport) -> Estimate {
    Estimate {
        log: report.value_log,
        sign: report.value_sign,
        max_bond: Some(report.max_bond_reached),
        discarded: Some(report.cumulative_discarded_weight),
    }
}

fn recursion_estimate(family: &FamilySpec, seed: u64, g: usize) -> anyhow::Result<Estimate> {
    match instantiate(family, seed, g)? {
        FamilyInstance::Polynomial(spec) => Ok(scalar_estimate(recursion_integral(&spec)?)),
        _ => bail!("the recursion route only applies to replicated-factor polynomials"),
    }
}

fn brute_estimate(family: &FamilySpec, seed: u64, g: usize) -> anyhow::Result<Estimate> {
    let n = family.n_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        bail!(
            "refusing the full-grid reference sum for n={n} variables (limit {BRUTE_FORCE_MAX_VARS}); \
             use reference = converged-tn instead"
        );
    }
    let value = match instantiate(family, seed, g)? {
        FamilyInstance::Polynomial(spec) => brute_force_polynomial(&spec)?,
        FamilyInstance::Gaussian(spec) => brute_force_gaussian(&spec)?,
        FamilyInstance::Mera(spec) => brute_force_mera(&spec)?,
    };
    Ok(scalar_estimate(value))
}

fn analytic_estimate(family: &FamilySpec) -> anyhow::Result<Estimate> {
    match family {
        FamilySpec::Mera { n_leaves, .. } => Ok(Estimate {
            log: *n_leaves as f64 * std::f64::consts::LN_2,
            sign: 1,
            max_bond: None,
            discarded: None,
        }),
        other => bail!("family `{}` has no closed-form value", other.family_name()),
    }
}

fn qmc_estimate(
    family: &FamilySpec,
    seed: u64,
    n_samples: u64,
    batch: usize,
) -> anyhow::Result<Estimate> {
    match *family {
        FamilySpec::PolynomialSin { n_vars, n_factors, grid, c } => {
            let (_, phases) =
                make_sin_polynomial_with_phases(n_vars, n_factors, grid, c, seed)?;
            let domain = vec![(0.0, 1.0); n_vars];
            let est = qmc_integrate(
                |x| {
                    let mut product = 1.0;
                    for row in &phases {
                        let mut sum = 0.0;
                        for (j, &a) in row.iter().enumerate() {
                            sum += sin_term(x[j], a, c);
                        }
                        product *= sum;
                    }
                    product
                },
                &domain,
                n_samples,
                batch,
            )?;
            Ok(Estimate { log: est.log_value(), sign: est.sign, max_bond: None, discarded: None })
        }
        FamilySpec::Gaussian { n_vars, .. } => {
            let FamilyInstance::Gaussian(spec) = instantiate(family, seed, family.grid())? else {
                bail!("gaussian family produced a non-gaussian instance");
            };
            let a = spec.matrix().to_vec();
            let domain = vec![(-1.0, 1.0); n_vars];
            let est = qmc_integrate_log(
                |x| {
                    let mut form = 0.0;
                    for i in 0..n_vars {
                        for j in 0..n_vars {
                            form += a[i * n_vars + j] * x[i] * x[j];
                        }
                    }
                    -form
                },
                &domain,
                n_samples,
                batch,
            )?;
            Ok(Estimate { log: est.log_value(), sign: est.sign, max_bond: None, discarded: None })
        }
        _ => bail!(
            "family `{}` is a discrete grid sum; no continuum baseline exists",
            family.family_name()
        ),
    }
}

/// Runs `f` over `items` on up to `threads` workers, preserving order.
fn parallel_map<T: Sync, R: Send + Sync>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> anyhow::Result<R> + Sync,
) -> anyhow::Result<Vec<R>> {
    let slots: Vec<OnceLock<anyhow::Result<R>>> = items.iter().map(|_| OnceLock::new()).collect();
    let workers = threads.min(items.len()).max(1);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let result = f(&items[i]);
                let stored = slots[i].set(result);
                debug_assert!(stored.is_ok(), "each slot is written once");
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("every index was visited"))
        .collect()
}
