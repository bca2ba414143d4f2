//! Inverse Laplace transform by the equal-weight rule on a hyperbolic contour.
//!
//! The contour is the left branch of a hyperbola,
//!
//! ```text
//! z(ξ) = ω + λ (1 - sin(δ - iξ)),     ξ ∈ R,
//! ```
//!
//! sampled at `ξ_j = jk`, `|j| ≤ N`. With `cosh b = 4/(θ sin δ)`, `k = b/N`
//! and `λ = π r θ N / (b T)` the error decays like `e^{-μN}`,
//! `μ = 2πr(1-θ)/b`, uniformly for `T/2 ≤ t ≤ 2T`.

use std::f64::consts::{LN_2, PI};
use std::sync::atomic::{AtomicBool, Ordering};

use log::{debug, warn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;

/// Default sector half-angle `β`. The resolvent of `-Δ*` (and the scalar
/// transform) is analytic off `(-∞, 0]`, i.e. in every sector `β < π`.
pub const DEFAULT_BETA: f64 = PI;

/// Factor applied to `r` when it is not strictly inside its admissible range.
pub const R_SHRINK: f64 = 0.999;

/// User-facing contour parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourParams {
    /// Time scale `T`; the accuracy window is `[T/2, 2T]`.
    pub t_scale: f64,
    /// Half the number of nodes minus one: nodes `j = -N..=N`.
    pub n: usize,
    pub theta: f64,
    pub delta: f64,
    pub r: f64,
    pub omega: f64,
    pub beta: f64,
}

impl Default for ContourParams {
    /// `T = 1, N = 20, θ = 1/2, δ = π/4, r = π/4, ω = 1`.
    fn default() -> Self {
        ContourParams {
            t_scale: 1.0,
            n: 20,
            theta: 0.5,
            delta: PI / 4.0,
            r: PI / 4.0,
            omega: 1.0,
            beta: DEFAULT_BETA,
        }
    }
}

impl ContourParams {
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }
}

/// A quadrature node `z_j` with its weight `z'_j = dz/dξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub j: i64,
    pub z: Complex64,
    pub weight: Complex64,
}

/// Fully resolved contour and step.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPlan {
    params: ContourParams,
    r: f64,
    r_shrunk: bool,
    b: f64,
    k: f64,
    lambda: f64,
    mu: f64,
    rho_r: f64,
}

fn violated(msg: String) -> Error {
    Error::Contour(msg)
}

impl ContourPlan {
    /// Validates the parameter chain and derives `b`, `k`, `λ`, `μ`, `ρ_r`.
    ///
    /// A value of `r` on or beyond `min(δ, β - π/2 - δ)` is replaced by
    /// [`R_SHRINK`] times that bound, with a warning.
    pub fn new(params: ContourParams) -> Result<Self> {
        let ContourParams {
            t_scale,
            n,
            theta,
            delta,
            r,
            omega,
            beta,
        } = params;
        if n == 0 {
            return Err(violated("N >= 1".into()));
        }
        if !(t_scale > 0.0) {
            return Err(violated(format!("T > 0 (T = {t_scale})")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(violated(format!("0 < theta < 1 (theta = {theta})")));
        }
        if !(omega > 0.0) {
            return Err(violated(format!("omega > 0 (omega = {omega})")));
        }
        if !(beta > PI / 2.0 && beta <= PI) {
            return Err(violated(format!("pi/2 < beta <= pi (beta = {beta})")));
        }
        if !(delta > 0.0 && delta < beta - PI / 2.0) {
            return Err(violated(format!(
                "0 < delta < beta - pi/2 (delta = {delta}, beta - pi/2 = {})",
                beta - PI / 2.0
            )));
        }
        if !(r > 0.0) {
            return Err(violated(format!("r > 0 (r = {r})")));
        }
        let r_max = delta.min(beta - PI / 2.0 - delta);
        let (r, r_shrunk) = if r < r_max {
            (r, false)
        } else {
            let shrunk = R_SHRINK * r_max;
            // plans are rebuilt per N; one warning per process is enough
            static WARNED: AtomicBool = AtomicBool::new(false);
            let msg = format!("r = {r} violates r < min(delta, beta - pi/2 - delta) = {r_max}; using r = {shrunk}");
            if WARNED.swap(true, Ordering::Relaxed) {
                debug!("{msg}");
            } else {
                warn!("{msg}");
            }
            (shrunk, true)
        };
        let b = (4.0 / (theta * delta.sin())).acosh();
        let nf = n as f64;
        let k = b / nf;
        if k > 2.0 * PI * r * LN_2 {
            return Err(violated(format!(
                "k = b/N <= 2 pi r log 2 (k = {k}, bound = {})",
                2.0 * PI * r * LN_2
            )));
        }
        let lambda = PI * r * theta * nf / (b * t_scale);
        let mu = 2.0 * PI * r * (1.0 - theta) / b;
        let rho_r = PI * r * theta * (delta - r).sin() / (2.0 * b);
        Ok(ContourPlan {
            params: ContourParams { r, ..params },
            r,
            r_shrunk,
            b,
            k,
            lambda,
            mu,
            rho_r,
        })
    }

    /// Parameters actually used (`r` possibly shrunk).
    pub fn params(&self) -> &ContourParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r_was_shrunk(&self) -> bool {
        self.r_shrunk
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Step `k = b/N`.
    pub fn step(&self) -> f64 {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Exponential rate `μ` in the `e^{-μN}` error model.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho_r(&self) -> f64 {
        self.rho_r
    }

    /// `lg(ρ_r N) e^{-μN}` with `lg(s) = max(1, log(1/s))`; the error bound
    /// up to the constant `C e^{ωt}`.
    pub fn error_model(&self) -> f64 {
        let s = self.rho_r * self.n() as f64;
        (1.0f64).max((1.0 / s).ln()) * (-self.mu * self.n() as f64).exp()
    }

    pub fn in_window(&self, t: f64) -> bool {
        let tt = self.params.t_scale;
        (0.5 * tt..=2.0 * tt).contains(&t)
    }

    /// `z_j` and `z'_j`, built from real sin/cos/sinh/cosh so that
    /// `z_{-j} = conj(z_j)` and `z'_{-j} = -conj(z'_j)` hold bit for bit.
    pub fn node(&self, j: i64) -> ContourNode {
        let xi = j.unsigned_abs() as f64 * self.k;
        let (sd, cd) = self.params.delta.sin_cos();
        let (sh, ch) = (xi.sinh(), xi.cosh());
        let sign = if j < 0 { -1.0 } else { 1.0 };
        let lam = self.lambda;
        let z = Complex64::new(
            self.params.omega + lam * (1.0 - sd * ch),
            sign * lam * cd * sh,
        );
        let weight = Complex64::new(-sign * lam * sd * sh, lam * cd * ch);
        ContourNode { j, z, weight }
    }

    /// All `2N + 1` nodes, `j = -N..=N`.
    pub fn nodes_and_weights(&self) -> Vec<ContourNode> {
        let n = self.n() as i64;
        (-n..=n).map(|j| self.node(j)).collect()
    }

    /// Left side of `((x-ω-λ)/(λ sin δ))² - (y/(λ cos δ))² = 1`.
    pub fn hyperbola_lhs(&self, z: Complex64) -> f64 {
        let (sd, cd) = self.params.delta.sin_cos();
        let u = (z.re - self.params.omega - self.lambda) / (self.lambda * sd);
        let v = z.im / (self.lambda * cd);
        u * u - v * v
    }

    /// Evaluates `uhat` at `j = 0..=N`. Valid for transforms of real data,
    /// `uhat(conj z) = conj(uhat(z))`. Nodes are evaluated concurrently.
    pub fn sample<F>(&self, uhat: F) -> Result<ContourSamples>
    where
        F: Fn(Complex64) -> Result<Vec<Complex64>> + Sync + Send,
    {
        let nodes: Vec<ContourNode> = (0..=self.n() as i64).map(|j| self.node(j)).collect();
        self.collect_samples(nodes, uhat, false)
    }

    /// Evaluates `uhat` at all `2N + 1` nodes, without assuming symmetry.
    pub fn sample_full<F>(&self, uhat: F) -> Result<ContourSamples>
    where
        F: Fn(Complex64) -> Result<Vec<Complex64>> + Sync + Send,
    {
        self.collect_samples(self.nodes_and_weights(), uhat, true)
    }

    fn collect_samples<F>(
        &self,
        nodes: Vec<ContourNode>,
        uhat: F,
        full: bool,
    ) -> Result<ContourSamples>
    where
        F: Fn(Complex64) -> Result<Vec<Complex64>> + Sync + Send,
    {
        let values = par::map_slice(&nodes, |node| uhat(node.z));
        let values: Vec<Vec<Complex64>> = values.into_iter().collect::<Result<_>>()?;
        let dim = values[0].len();
        if let Some(bad) = values.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(ContourSamples {
            plan: self.clone(),
            nodes,
            values,
            full,
        })
    }

    /// `U_N(t)` for a real-data transform, using the conjugate reduction.
    pub fn invert<F>(&self, uhat: F, t: f64) -> Result<Inversion>
    where
        F: Fn(Complex64) -> Result<Vec<Complex64>> + Sync + Send,
    {
        self.sample(uhat)?.invert(t)
    }
}

/// Result of an inversion at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub t: f64,
    pub values: Vec<f64>,
    /// Largest `|Im U_N(t)|` of the unreduced sum; roundoff-sized for real data.
    pub imag_residual: f64,
}

/// Transform values at the contour nodes; reusable for any `t`.
#[derive(Debug, Clone)]
pub struct ContourSamples {
    plan: ContourPlan,
    nodes: Vec<ContourNode>,
    values: Vec<Vec<Complex64>>,
    full: bool,
}

impl ContourSamples {
    pub fn plan(&self) -> &ContourPlan {
        &self.plan
    }

    /// Whether all `2N + 1` nodes were evaluated.
    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn nodes(&self) -> &[ContourNode] {
        &self.nodes
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::OutOfRange {
                name: "t",
                value: t,
                reason: "inversion needs t > 0",
            });
        }
        if !self.plan.in_window(t) {
            let tt = self.plan.params.t_scale;
            warn!(
                "t = {t} outside the accuracy window [{}, {}]",
                0.5 * tt,
                2.0 * tt
            );
        }
        Ok(())
    }

    /// Position of node `j ≥ 0` in `nodes`/`values`.
    fn index_of(&self, j: usize) -> usize {
        if self.full {
            self.plan.n() + j
        } else {
            j
        }
    }

    /// `(k/π) [½ Im(e^{z_0 t} û_0 z'_0) + Σ_{j≥1} Im(e^{z_j t} û_j z'_j)]`.
    pub fn reduced_sum(&self, t: f64) -> Result<Vec<f64>> {
        self.check_t(t)?;
        let dim = self.dim();
        let mut acc = vec![0.0; dim];
        for j in 0..=self.plan.n() {
            let i = self.index_of(j);
            let node = &self.nodes[i];
            let factor = (node.z * t).exp() * node.weight;
            let half = if j == 0 { 0.5 } else { 1.0 };
            for (a, v) in acc.iter_mut().zip(&self.values[i]) {
                *a += half * (factor * v).im;
            }
        }
        let scale = self.plan.k / PI;
        Ok(acc.into_iter().map(|a| a * scale).collect())
    }

    /// `(k / 2πi) Σ_{|j|≤N} e^{z_j t} û_j z'_j` as `(real, imaginary)` parts.
    /// Reduced samples are mirrored by conjugation.
    pub fn full_sum(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_t(t)?;
        let dim = self.dim();
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        let n = self.plan.n() as i64;
        for j in -n..=n {
            let node = self.plan.node(j);
            let factor = (node.z * t).exp() * node.weight;
            if self.full {
                let vals = &self.values[(j + n) as usize];
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += factor * v;
                }
            } else {
                let vals = &self.values[j.unsigned_abs() as usize];
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += factor * if j < 0 { v.conj() } else { *v };
                }
            }
        }
        // divide by 2πi: (a + ib)/(i) = b - ia
        let scale = self.plan.k / (2.0 * PI);
        let re = acc.iter().map(|a| a.im * scale).collect();
        let im = acc.iter().map(|a| -a.re * scale).collect();
        Ok((re, im))
    }

    /// Inversion at `t` via the conjugate reduction, with the imaginary
    /// residual of the unreduced sum as a diagnostic.
    pub fn invert(&self, t: f64) -> Result<Inversion> {
        let values = self.reduced_sum(t)?;
        let (_, im) = self.full_sum(t)?;
        let imag_residual = im.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Inversion {
            t,
            values,
            imag_residual,
        })
    }
}
