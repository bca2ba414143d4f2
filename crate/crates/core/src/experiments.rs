//! The canonical experiments: scalar inversion error versus `N`, and the
//! spherical-cap heat problem with spatial convergence rates.

use std::time::{Duration, Instant};

use log::info;

use crate::assembly::GalerkinSystem;
use crate::contour::{ContourParams, ContourPlan};
use crate::error::{Error, Result};
use crate::geometry::generate_equal_area;
use crate::kernel::{WendlandProfile, ZonalKernel};
use crate::legendre::{cap_coefficients, scalar_exact, scalar_transform, MAX_SERIES_DEGREE};
use crate::quadrature::SphereQuadrature;
use crate::solver::{cap_exact_on_nodes, error_stats, solve_parabolic, ErrorStats};

/// Default cap parameter.
pub const DEFAULT_CAP_A: f64 = 0.9;

/// One row of the scalar table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRow {
    pub n: usize,
    pub t: f64,
    pub value: f64,
    pub error: f64,
}

/// `|U_N(t) - u(t)|` for each `N`, all other contour parameters from `params`.
pub fn run_scalar(params: &ContourParams, ns: &[usize], t: f64) -> Result<Vec<ScalarRow>> {
    let exact = scalar_exact(t)?;
    ns.iter()
        .map(|&n| {
            let plan = ContourPlan::new(params.with_n(n))?;
            let inv = plan.invert(|z| Ok(vec![scalar_transform(z)?]), t)?;
            let value = inv.values[0];
            Ok(ScalarRow {
                n,
                t,
                value,
                error: (value - exact).abs(),
            })
        })
        .collect()
}

/// Experimental order of convergence between two (h, e) pairs.
pub fn eoc(h_prev: f64, e_prev: f64, h: f64, e: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

/// Configuration of the cap experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CapExperiment {
    pub kernel: WendlandProfile,
    /// `(K, R)` pairs, in increasing `K`.
    pub sizes: Vec<(usize, usize)>,
    pub ns: Vec<usize>,
    pub contour: ContourParams,
    pub a: f64,
    /// Evaluation times; one set of node solves serves all of them.
    pub times: Vec<f64>,
}

impl CapExperiment {
    /// Desk-scale default: K = 200, 400 with R = 200 and N = 20.
    pub fn desk(kernel: WendlandProfile) -> Self {
        CapExperiment {
            kernel,
            sizes: vec![(200, 200), (400, 200)],
            ns: vec![20],
            contour: ContourParams::default(),
            a: DEFAULT_CAP_A,
            times: vec![1.0],
        }
    }

    /// The full grid, K up to 1001 with R = 500 for the two largest sets.
    pub fn full(kernel: WendlandProfile) -> Self {
        CapExperiment {
            sizes: vec![(200, 200), (400, 200), (600, 200), (801, 500), (1001, 500)],
            ns: vec![10, 20, 30, 35],
            ..Self::desk(kernel)
        }
    }
}

/// One (K, N) result of the cap experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub kernel: WendlandProfile,
    pub k: usize,
    pub h: f64,
    pub r: usize,
    pub n: usize,
    pub t: f64,
    pub e_max: f64,
    pub e2: f64,
    /// `None` for the first successful row of each `N`.
    pub eoc: Option<f64>,
    pub max_residual: f64,
    pub max_pivot_ratio: f64,
    /// Shared assembly time for this `K` plus the solve time for this `N`.
    pub wall_time: Duration,
    pub assembly_time: Duration,
    pub solve_time: Duration,
}

/// A (K, N) combination that failed; the run continues with the others.
#[derive(Debug)]
pub struct RowFailure {
    pub k: usize,
    pub n: Option<usize>,
    pub error: Error,
}

pub type CapOutcome = std::result::Result<ConvergenceRow, RowFailure>;

/// Runs every (K, N) combination. Rows come out grouped by K, then N, then
/// t; EOC is taken between consecutive successful K for the same (N, t).
pub fn run_cap(exp: &CapExperiment) -> Result<Vec<CapOutcome>> {
    let cap = cap_coefficients(exp.a, MAX_SERIES_DEGREE)?;
    // validate every contour before any assembly
    let plans: Vec<ContourPlan> = exp
        .ns
        .iter()
        .map(|&n| ContourPlan::new(exp.contour.with_n(n)))
        .collect::<Result<_>>()?;
    let kernel = ZonalKernel::new(exp.kernel);
    let mut out = Vec::new();
    for &(k, r) in &exp.sizes {
        let start = Instant::now();
        let system = generate_equal_area(k)
            .and_then(|centers| Ok((centers, SphereQuadrature::new(r)?)))
            .and_then(|(centers, quad)| GalerkinSystem::assemble(centers, kernel, quad));
        let assembly_time = start.elapsed();
        let system = match system {
            Ok(s) => s,
            Err(error) => {
                out.push(Err(RowFailure { k, n: None, error }));
                continue;
            }
        };
        info!(
            "{}: K = {k}, h = {:.4}, R = {r}: assembled in {:.2?}",
            exp.kernel,
            system.centers().h(),
            assembly_time
        );
        let exact: Vec<Vec<f64>> = exp
            .times
            .iter()
            .map(|&t| cap_exact_on_nodes(system.quadrature(), &cap, t))
            .collect::<Result<_>>()?;
        for plan in &plans {
            let start = Instant::now();
            let solved = solve_parabolic(&system, plan, &cap, None, &exp.times).and_then(|sol| {
                let stats = sol
                    .fields
                    .iter()
                    .zip(&exact)
                    .map(|(field, exact)| error_stats(&system, &field.coefficients, exact))
                    .collect::<Result<Vec<ErrorStats>>>()?;
                Ok((stats, sol))
            });
            let solve_time = start.elapsed();
            let (stats, sol) = match solved {
                Ok(v) => v,
                Err(error) => {
                    out.push(Err(RowFailure {
                        k,
                        n: Some(plan.n()),
                        error,
                    }));
                    continue;
                }
            };
            info!(
                "  N = {}: load {:.2?}, solves {:.2?}, inversion {:.2?}, max pivot ratio {:.1e}",
                plan.n(),
                sol.timings.load,
                sol.timings.solves,
                sol.timings.inversion,
                sol.max_pivot_ratio()
            );
            for (&t, ErrorStats { e_max, e2 }) in exp.times.iter().zip(stats) {
                info!("    t = {t}: e_max = {e_max:.3e}, e2 = {e2:.3e}");
                out.push(Ok(ConvergenceRow {
                    kernel: exp.kernel,
                    k,
                    h: system.centers().h(),
                    r,
                    n: plan.n(),
                    t,
                    e_max,
                    e2,
                    eoc: None,
                    max_residual: sol.max_residual(),
                    max_pivot_ratio: sol.max_pivot_ratio(),
                    wall_time: assembly_time + solve_time,
                    assembly_time,
                    solve_time,
                }));
            }
        }
    }
    fill_eoc(&mut out);
    Ok(out)
}

fn fill_eoc(rows: &mut [CapOutcome]) {
    let mut last: Vec<((usize, u64), f64, f64)> = Vec::new();
    for row in rows.iter_mut().flatten() {
        let key = (row.n, row.t.to_bits());
        if let Some(prev) = last.iter_mut().find(|p| p.0 == key) {
            row.eoc = Some(eoc(prev.1, prev.2, row.h, row.e2));
            *prev = (key, row.h, row.e2);
        } else {
            last.push((key, row.h, row.e2));
        }
    }
}
