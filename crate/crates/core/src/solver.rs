//! Fully discrete solver: one complex solve `(z_j B + S) Û(z_j) = G(z_j)`
//! per contour node, then the contour sum for every requested time.
//!
//! Also provides the semidiscrete reference solution
//! `U(t) = V e^{-Λt} Vᵀ G₀` from the generalized eigenproblem `S V = B V Λ`,
//! which is exact in time and isolates the contour quadrature error.

use std::sync::Arc;
use std::time::{Duration, Instant};

use log::debug;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::assembly::{GalerkinSystem, LoadVector};
use crate::contour::{ContourPlan, ContourSamples};
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::kernel::ZonalKernel;
use crate::legendre::{exact_cap_profile, CapData};
use crate::quadrature::SphereQuadrature;

/// Initial data `u₀` with a way to build its Galerkin load `⟨u₀, Φ_p⟩`.
pub trait InitialData: Sync {
    fn value(&self, x: &SpherePoint) -> f64;

    /// Defaults to the system's own quadrature.
    fn load(&self, system: &GalerkinSystem) -> LoadVector {
        system.load(|x| self.value(x))
    }
}

/// Wraps a closure as [`InitialData`].
pub struct FnData<F>(pub F);

impl<F> InitialData for FnData<F>
where
    F: Fn(&SpherePoint) -> f64 + Sync,
{
    fn value(&self, x: &SpherePoint) -> f64 {
        (self.0)(x)
    }
}

impl InitialData for CapData {
    fn value(&self, x: &SpherePoint) -> f64 {
        self.indicator(x)
    }

    /// Integrates over the cap `a ≤ x3 ≤ 1` with a band rule of the system's
    /// order, so the jump of the indicator sits on the band edge.
    fn load(&self, system: &GalerkinSystem) -> LoadVector {
        let band = SphereQuadrature::band(system.quadrature().order(), self.a(), 1.0)
            .expect("cap parameter validated at construction");
        system.load_with(&band, |_| 1.0)
    }
}

/// Source transform `f̂(z)(x)`, analytic in the sector and satisfying
/// `f̂(conj z) = conj f̂(z)` (real data).
pub type SourceTransform<'a> = &'a (dyn Fn(Complex64, &SpherePoint) -> Complex64 + Sync);

/// Solution of one node system.
#[derive(Debug, Clone)]
pub struct NodeSolve {
    pub z: Complex64,
    pub coefficients: DVector<Complex64>,
    /// `|(zB + S)Û - G| / |G|` (absolute when `G = 0`).
    pub residual_norm: f64,
    /// `max |u_ii| / min |u_ii|` over the LU factor; a cheap conditioning proxy.
    pub pivot_ratio: f64,
}

/// Dense LU with partial pivoting on `zB + S`.
pub fn solve_node(system: &GalerkinSystem, z: Complex64, load: &LoadVector) -> Result<NodeSolve> {
    if load.len() != system.len() {
        return Err(Error::DimensionMismatch {
            expected: system.len(),
            got: load.len(),
        });
    }
    let matrix: DMatrix<Complex64> = system
        .mass()
        .zip_map(system.stiffness(), |b, s| z * b + Complex64::new(s, 0.0));
    let lu = matrix.clone().lu();
    let diag = lu.u().diagonal();
    let (lo, hi) = diag
        .iter()
        .map(|d| d.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
    let pivot_ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let breakdown = || Error::Factorization {
        re: z.re,
        im: z.im,
        pivot_ratio,
    };
    if !pivot_ratio.is_finite() {
        return Err(breakdown());
    }
    let coefficients = lu.solve(&load.values).ok_or_else(breakdown)?;
    let residual = (&matrix * &coefficients - &load.values).norm();
    let scale = load.values.norm();
    let residual_norm = if scale > 0.0 {
        residual / scale
    } else {
        residual
    };
    debug!("node z = {z:.4}: residual {residual_norm:.2e}, pivot ratio {pivot_ratio:.2e}");
    Ok(NodeSolve {
        z,
        coefficients,
        residual_norm,
        pivot_ratio,
    })
}

/// Per-node diagnostics kept after the solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeReport {
    pub j: i64,
    pub z: Complex64,
    pub residual_norm: f64,
    pub pivot_ratio: f64,
}

/// SRBF coefficients of `U_{N,h}(·, t)` at one time.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub t: f64,
    pub coefficients: Vec<f64>,
    /// Largest imaginary part left in the unreduced contour sum.
    pub imag_residual: f64,
    centers: Arc<[SpherePoint]>,
    kernel: ZonalKernel,
}

impl FieldSolution {
    pub fn new(
        t: f64,
        coefficients: Vec<f64>,
        centers: Arc<[SpherePoint]>,
        kernel: ZonalKernel,
    ) -> Self {
        FieldSolution {
            t,
            coefficients,
            imag_residual: 0.0,
            centers,
            kernel,
        }
    }

    /// `Σ_p c_p Φ(x_p, x)`.
    pub fn evaluate(&self, x: &SpherePoint) -> f64 {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(p, &c)| c * self.kernel.eval(p, x))
            .sum()
    }
}

/// Free-function form of [`FieldSolution::evaluate`].
pub fn evaluate_field(sol: &FieldSolution, x: &SpherePoint) -> f64 {
    sol.evaluate(x)
}

/// Wall-clock split of a [`solve_parabolic`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub load: Duration,
    pub solves: Duration,
    pub inversion: Duration,
}

#[derive(Debug, Clone)]
pub struct ParabolicSolution {
    pub fields: Vec<FieldSolution>,
    pub nodes: Vec<NodeReport>,
    pub timings: PhaseTimes,
    samples: ContourSamples,
}

impl ParabolicSolution {
    /// Worst relative residual over all node solves.
    pub fn max_residual(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, n| m.max(n.residual_norm))
    }

    pub fn max_pivot_ratio(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, n| m.max(n.pivot_ratio))
    }

    /// The node solutions, reusable for further times.
    pub fn samples(&self) -> &ContourSamples {
        &self.samples
    }
}

/// Solves at nodes `j = 0..=N` and sums with the conjugate reduction.
pub fn solve_parabolic(
    system: &GalerkinSystem,
    plan: &ContourPlan,
    initial: &dyn InitialData,
    source: Option<SourceTransform<'_>>,
    times: &[f64],
) -> Result<ParabolicSolution> {
    run_parabolic(system, plan, initial, source, times, false)
}

/// Same as [`solve_parabolic`] but solves all `2N + 1` nodes and uses the
/// unreduced sum.
pub fn solve_parabolic_full(
    system: &GalerkinSystem,
    plan: &ContourPlan,
    initial: &dyn InitialData,
    source: Option<SourceTransform<'_>>,
    times: &[f64],
) -> Result<ParabolicSolution> {
    run_parabolic(system, plan, initial, source, times, true)
}

fn run_parabolic(
    system: &GalerkinSystem,
    plan: &ContourPlan,
    initial: &dyn InitialData,
    source: Option<SourceTransform<'_>>,
    times: &[f64],
    full: bool,
) -> Result<ParabolicSolution> {
    let start = Instant::now();
    let static_load = initial.load(system);
    let load_time = start.elapsed();

    let start = Instant::now();
    let reports = std::sync::Mutex::new(Vec::new());
    let solve = |z: Complex64| -> Result<Vec<Complex64>> {
        let load = match source {
            Some(f) => {
                let extra = system.load(|x| f(z, x));
                LoadVector {
                    z: Some(z),
                    values: &static_load.values + extra.values,
                }
            }
            None => static_load.clone().at(z),
        };
        let node = solve_node(system, z, &load)?;
        reports
            .lock()
            .expect("no panics while holding the lock")
            .push((z, node.residual_norm, node.pivot_ratio));
        Ok(node.coefficients.iter().copied().collect())
    };
    let samples = if full {
        plan.sample_full(solve)?
    } else {
        plan.sample(solve)?
    };
    let solve_time = start.elapsed();

    // gather diagnostics deterministically by node index
    let reports = reports.into_inner().expect("lock not poisoned");
    let nodes = samples
        .nodes()
        .iter()
        .map(|node| {
            let (_, residual_norm, pivot_ratio) = *reports
                .iter()
                .find(|r| r.0 == node.z)
                .expect("every node was solved");
            NodeReport {
                j: node.j,
                z: node.z,
                residual_norm,
                pivot_ratio,
            }
        })
        .collect();

    let start = Instant::now();
    let centers: Arc<[SpherePoint]> = system.centers().points().into();
    let mut fields = Vec::with_capacity(times.len());
    for &t in times {
        let (coefficients, imag_residual) = if full {
            let (re, im) = samples.full_sum(t)?;
            (re, im.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        } else {
            let inv = samples.invert(t)?;
            (inv.values, inv.imag_residual)
        };
        let mut field = FieldSolution::new(t, coefficients, centers.clone(), *system.kernel());
        field.imag_residual = imag_residual;
        fields.push(field);
    }
    let inversion = start.elapsed();

    Ok(ParabolicSolution {
        fields,
        nodes,
        timings: PhaseTimes {
            load: load_time,
            solves: solve_time,
            inversion,
        },
        samples,
    })
}

/// Exact-in-time solution of `B U' + S U = 0`, `U(0) = B⁻¹ G₀`.
#[derive(Debug, Clone)]
pub struct SemidiscreteOracle {
    /// B-orthonormal eigenvectors, one per column.
    vectors: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl SemidiscreteOracle {
    /// Reduces `S V = B V Λ` to a standard symmetric problem with the
    /// Cholesky factor of `B`.
    pub fn new(system: &GalerkinSystem) -> Result<Self> {
        let chol = system
            .mass()
            .clone()
            .cholesky()
            .ok_or(Error::MassNotPositiveDefinite)?;
        let l = chol.l();
        let left = l
            .solve_lower_triangular(system.stiffness())
            .ok_or(Error::Eigen("singular Cholesky factor"))?;
        let reduced = l
            .solve_lower_triangular(&left.transpose())
            .ok_or(Error::Eigen("singular Cholesky factor"))?;
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::try_new(reduced, f64::EPSILON, 0)
            .ok_or(Error::Eigen("symmetric eigensolver did not converge"))?;
        let vectors = l
            .transpose()
            .solve_upper_triangular(&eig.eigenvectors)
            .ok_or(Error::Eigen("singular Cholesky factor"))?;
        Ok(SemidiscreteOracle {
            vectors,
            eigenvalues: eig.eigenvalues,
        })
    }

    /// Generalized eigenvalues `Λ` (unsorted).
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `V e^{-Λt} Vᵀ G₀`.
    pub fn evolve(&self, load0: &LoadVector, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return Err(Error::OutOfRange {
                name: "t",
                value: t,
                reason: "semidiscrete evolution needs t >= 0",
            });
        }
        if load0.len() != self.vectors.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.vectors.nrows(),
                got: load0.len(),
            });
        }
        if !load0.is_real() {
            return Err(Error::OutOfRange {
                name: "G0",
                value: f64::NAN,
                reason: "the semidiscrete oracle handles real initial loads only",
            });
        }
        let modal = self.vectors.tr_mul(&load0.real_part());
        let decayed = modal.zip_map(&self.eigenvalues, |c, lam| c * (-lam * t).exp());
        Ok((&self.vectors * decayed).iter().copied().collect())
    }
}

/// One-shot form of [`SemidiscreteOracle::evolve`].
pub fn semidiscrete_oracle(
    system: &GalerkinSystem,
    load0: &LoadVector,
    t: f64,
) -> Result<Vec<f64>> {
    SemidiscreteOracle::new(system)?.evolve(load0, t)
}

/// `e_max` and the weighted `e_2` over the nodes of a quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub e_max: f64,
    pub e2: f64,
}

/// Errors of the field with coefficients `coeffs` against `exact` values
/// given at the nodes of the system's quadrature.
pub fn error_stats(system: &GalerkinSystem, coeffs: &[f64], exact: &[f64]) -> Result<ErrorStats> {
    let approx = system.evaluate_on_nodes(coeffs)?;
    if exact.len() != approx.len() {
        return Err(Error::DimensionMismatch {
            expected: approx.len(),
            got: exact.len(),
        });
    }
    let weights = system.quadrature().weights();
    let mut e_max = 0.0f64;
    let mut sq = 0.0;
    for ((a, e), w) in approx.iter().zip(exact).zip(weights) {
        let d = a - e;
        e_max = e_max.max(d.abs());
        sq += w * d * d;
    }
    Ok(ErrorStats {
        e_max,
        e2: sq.sqrt(),
    })
}

/// Exact cap solution at every node of `quad` (evaluated once per ring).
pub fn cap_exact_on_nodes(quad: &SphereQuadrature, cap: &CapData, t: f64) -> Result<Vec<f64>> {
    let per_ring = quad.order();
    let mut out = Vec::with_capacity(quad.len());
    for &x3 in quad.rings() {
        let v = exact_cap_profile(x3, t, cap)?.value;
        out.extend(std::iter::repeat_n(v, per_ring));
    }
    Ok(out)
}
