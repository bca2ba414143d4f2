//! Legendre polynomials on `[-1, 1]`, the spectrum of `-Δ*` on S², and the
//! closed-form reference solutions: the spherical-cap heat problem and the
//! scalar test equation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;

/// Hard cap on the number of series terms in [`exact_cap_solution`].
pub const MAX_SERIES_DEGREE: usize = 500;

/// Tail tolerance for the cap series.
pub const SERIES_TOLERANCE: f64 = 1e-14;

/// `P_0(t) … P_L(t)` and their derivatives at a single `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreTable {
    t: f64,
    values: Vec<f64>,
    derivatives: Vec<f64>,
}

impl LegendreTable {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn degree_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, l: usize) -> f64 {
        self.values[l]
    }

    pub fn derivative(&self, l: usize) -> f64 {
        self.derivatives[l]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.derivatives
    }
}

/// Three-term recurrence for the values; `P'_{l+1} = P'_{l-1} + (2l+1) P_l`
/// for the derivatives, which stays exact at `t = ±1`.
pub fn legendre_eval(t: f64, degree_max: usize) -> Result<LegendreTable> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            reason: "Legendre argument must lie in [-1, 1]",
        });
    }
    let n = degree_max + 1;
    let mut values = vec![0.0; n];
    let mut derivatives = vec![0.0; n];
    values[0] = 1.0;
    if n > 1 {
        values[1] = t;
        derivatives[1] = 1.0;
    }
    for l in 1..degree_max {
        let lf = l as f64;
        values[l + 1] = ((2.0 * lf + 1.0) * t * values[l] - lf * values[l - 1]) / (lf + 1.0);
        derivatives[l + 1] = derivatives[l - 1] + (2.0 * lf + 1.0) * values[l];
    }
    Ok(LegendreTable {
        t,
        values,
        derivatives,
    })
}

/// Spectrum of `-Δ*` on S²: eigenvalue `l(l+1)` with multiplicity `2l+1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HarmonicSpectrum;

impl HarmonicSpectrum {
    pub fn eigenvalue(&self, l: usize) -> f64 {
        (l * (l + 1)) as f64
    }

    /// Dimension of the space of degree-`l` spherical harmonics.
    pub fn dimension(&self, l: usize) -> usize {
        2 * l + 1
    }
}

/// Fourier–Legendre coefficients of the cap indicator `1{a ≤ x3 ≤ 1}`
/// in the expansion `Σ c_l P_l(x3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapData {
    a: f64,
    coeffs: Vec<f64>,
}

impl CapData {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Indicator value at `x`.
    pub fn indicator(&self, x: &SpherePoint) -> f64 {
        if x.x3() >= self.a {
            1.0
        } else {
            0.0
        }
    }

    /// Surface integral of the indicator, `2π(1 - a)`.
    pub fn area(&self) -> f64 {
        2.0 * PI * (1.0 - self.a)
    }

    /// Coefficients of the heat-flow solution at time `t`: `e^{-l(l+1)t} c_l`.
    pub fn evolved(&self, t: f64) -> Vec<f64> {
        let spec = HarmonicSpectrum;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| (-spec.eigenvalue(l) * t).exp() * c)
            .collect()
    }
}

/// `c_0 = (1-a)/2`, `c_l = (1-a²)/2 · (2l+1)/(l(l+1)) · P_l'(a)` for `l ≥ 1`.
pub fn cap_coefficients(a: f64, degree_max: usize) -> Result<CapData> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::OutOfRange {
            name: "a",
            value: a,
            reason: "cap parameter must lie in (0, 1)",
        });
    }
    let table = legendre_eval(a, degree_max)?;
    let mut coeffs = Vec::with_capacity(degree_max + 1);
    coeffs.push(0.5 * (1.0 - a));
    for l in 1..=degree_max {
        let lf = l as f64;
        coeffs
            .push(0.5 * (1.0 - a * a) * (2.0 * lf + 1.0) / (lf * (lf + 1.0)) * table.derivative(l));
    }
    Ok(CapData { a, coeffs })
}

/// `u(x, t) = Σ_l e^{-l(l+1)t} c_l P_l(x3)`.
///
/// Terms are added until the bound `(l+1) e^{-l(l+1)t}` on the next term
/// (valid because `|c_l| ≤ (2l+1)(1-a)/2` and `|P_l| ≤ 1`) falls below
/// [`SERIES_TOLERANCE`], or the cap data runs out of coefficients.
pub fn exact_cap_solution(x: &SpherePoint, t: f64, cap: &CapData) -> Result<f64> {
    Ok(exact_cap_profile(x.x3(), t, cap)?.value)
}

/// Value of the cap series at `x3` with the number of terms used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
}

pub fn exact_cap_profile(x3: f64, t: f64, cap: &CapData) -> Result<SeriesValue> {
    if !(t > 0.0) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            reason: "the cap series is only evaluated for t > 0",
        });
    }
    let x3 = x3.clamp(-1.0, 1.0);
    let spec = HarmonicSpectrum;
    let mut p_prev = 1.0;
    let mut p = x3;
    let mut sum = cap.coeffs[0];
    let mut terms = 1;
    for l in 1..=cap.degree_max().min(MAX_SERIES_DEGREE) {
        let decay = (-spec.eigenvalue(l) * t).exp();
        if (l as f64 + 1.0) * decay < SERIES_TOLERANCE {
            break;
        }
        if l > 1 {
            let lf = (l - 1) as f64;
            let next = ((2.0 * lf + 1.0) * x3 * p - lf * p_prev) / (lf + 1.0);
            p_prev = p;
            p = next;
        }
        sum += decay * cap.coeffs[l] * p;
        terms += 1;
    }
    Ok(SeriesValue { value: sum, terms })
}

/// `u(t) = 1 + 4 t^{3/2} / (3 √π)`, the solution of the scalar test problem.
pub fn scalar_exact(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            reason: "t must be positive",
        });
    }
    Ok(1.0 + 4.0 * t.powf(1.5) / (3.0 * PI.sqrt()))
}

/// `û(z) = z^{-1} + z^{-5/2}` on the principal branch.
pub fn scalar_transform(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::BranchCut { re: z.re, im: z.im });
    }
    Ok(z.inv() + z.powf(-2.5))
}
