//! Tensor-product quadrature on S²: Gauss–Legendre in `x3 = cos θ` times
//! the equispaced trapezoid rule in longitude.
//!
//! The full-sphere rule of order `R` uses `R/2` Gauss points and `R`
//! longitudes and is exact for polynomials of total degree `≤ R - 1`.
//! [`SphereQuadrature::band`] builds the same rule restricted to a zonal
//! band `lo ≤ x3 ≤ hi`, which integrates functions with a jump along a
//! circle of latitude (such as a cap indicator) without the `O(1/R)`
//! error a full-sphere rule would make.

use std::f64::consts::PI;
use std::iter::Sum;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::par;

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence, started from the
/// Tricomi approximation; stops when the update drops below `1e-15`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                dp = legendre_with_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` for `|x| < 1`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for l in 1..n {
        let lf = l as f64;
        let p2 = ((2.0 * lf + 1.0) * x * p1 - lf * p0) / (lf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and positive weights of a tensor-product surface rule.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    order: usize,
    lo: f64,
    hi: f64,
    /// `x3` of each ring, ascending.
    rings: Vec<f64>,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    /// Full-sphere rule of even order `R ≥ 2`: `R/2` rings, `R` longitudes.
    pub fn new(order: usize) -> Result<Self> {
        Self::band(order, -1.0, 1.0)
    }

    /// Rule of order `R` on the band `lo ≤ x3 ≤ hi`; `R/2` Gauss rings
    /// mapped onto `[lo, hi]`, `R` longitudes each.
    pub fn band(order: usize, lo: f64, hi: f64) -> Result<Self> {
        if order == 0 || order % 2 == 1 {
            return Err(Error::BadQuadratureOrder(order));
        }
        if !(-1.0..=1.0).contains(&lo) || !(-1.0..=1.0).contains(&hi) || lo >= hi {
            return Err(Error::OutOfRange {
                name: "band",
                value: lo,
                reason: "need -1 <= lo < hi <= 1",
            });
        }
        let (gx, gw) = gauss_legendre(order / 2);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let dphi = 2.0 * PI / order as f64;
        let mut rings = Vec::with_capacity(gx.len());
        let mut nodes = Vec::with_capacity(gx.len() * order);
        let mut weights = Vec::with_capacity(gx.len() * order);
        for (&x, &w) in gx.iter().zip(&gw) {
            let x3 = mid + half * x;
            let s = (1.0 - x3 * x3).max(0.0).sqrt();
            rings.push(x3);
            for q in 1..=order {
                let (sp, cp) = (dphi * q as f64).sin_cos();
                nodes.push(SpherePoint::new_unchecked(s * cp, s * sp, x3));
                weights.push(w * half * dphi);
            }
        }
        Ok(SphereQuadrature {
            order,
            lo,
            hi,
            rings,
            nodes,
            weights,
        })
    }

    /// The order `R`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `x3` of every ring, ascending. Node `i` lies on ring `i / R`.
    pub fn rings(&self) -> &[f64] {
        &self.rings
    }

    /// `(lo, hi)` range of `x3` covered by the rule.
    pub fn x3_range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Upper bound on the geodesic distance from any point of the covered
    /// band to the nearest node: half the widest colatitude gap (or the
    /// gap to the band edge) plus half the longitude spacing.
    pub fn covering_radius(&self) -> f64 {
        let theta: Vec<f64> = self
            .rings
            .iter()
            .map(|x| x.clamp(-1.0, 1.0).acos())
            .collect();
        // rings ascend in x3, so colatitudes descend
        let top = self.hi.acos();
        let bottom = self.lo.acos();
        let mut gap = (theta[theta.len() - 1] - top).max(bottom - theta[0]);
        for w in theta.windows(2) {
            gap = gap.max(0.5 * (w[0] - w[1]));
        }
        gap + PI / self.order as f64
    }

    /// `Σ w_i f(x_i)`. `f` may be called concurrently from several workers;
    /// the sum is accumulated in node order.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: Copy + Send + Sum + Mul<f64, Output = T> + Add<Output = T>,
        F: Fn(&SpherePoint) -> T + Sync + Send,
    {
        let values = par::map_slice(&self.nodes, f);
        values
            .into_iter()
            .zip(&self.weights)
            .map(|(v, &w)| v * w)
            .sum()
    }

    /// Fallible version of [`integrate`](Self::integrate); the first error
    /// in node order is returned.
    pub fn try_integrate<T, E, F>(&self, f: F) -> std::result::Result<T, E>
    where
        T: Copy + Send + Sum + Mul<f64, Output = T> + Add<Output = T>,
        E: Send,
        F: Fn(&SpherePoint) -> std::result::Result<T, E> + Sync + Send,
    {
        let values = par::map_slice(&self.nodes, f);
        let mut terms = Vec::with_capacity(values.len());
        for (v, &w) in values.into_iter().zip(&self.weights) {
            terms.push(v? * w);
        }
        Ok(terms.into_iter().sum())
    }
}
