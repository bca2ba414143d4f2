//! Wendland compactly supported kernels restricted to the sphere.
//!
//! A profile `ρ(r)` on `r ≥ 0` induces the zonal function
//! `φ(t) = ρ(√(2 - 2t))`, `t = x·y`, so the SRBF centered at `p` is
//! `Φ_p(x) = φ(x·p)`. The support `r < 1` is the open cap `x·p > 1/2`
//! of geodesic radius `π/3`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::geometry::SpherePoint;

/// Wendland profiles `ρ_2` (C⁴) and `ρ_3` (C⁶).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WendlandProfile {
    /// `(1-r)⁶₊ (3 + 18r + 35r²)`
    Wendland2,
    /// `(1-r)⁸₊ (1 + 8r + 25r² + 32r³)`
    Wendland3,
}

impl WendlandProfile {
    pub fn m(&self) -> u32 {
        match self {
            WendlandProfile::Wendland2 => 2,
            WendlandProfile::Wendland3 => 3,
        }
    }

    /// Sobolev exponent `τ` of the native space.
    pub fn tau(&self) -> f64 {
        match self {
            WendlandProfile::Wendland2 => 3.5,
            WendlandProfile::Wendland3 => 4.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WendlandProfile::Wendland2 => "wendland2",
            WendlandProfile::Wendland3 => "wendland3",
        }
    }

    /// `ρ(r)`, zero for `r ≥ 1`.
    pub fn eval(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - r;
        match self {
            WendlandProfile::Wendland2 => {
                let s3 = s * s * s;
                s3 * s3 * (3.0 + r * (18.0 + 35.0 * r))
            }
            WendlandProfile::Wendland3 => {
                let s2 = s * s;
                let s4 = s2 * s2;
                s4 * s4 * (1.0 + r * (8.0 + r * (25.0 + 32.0 * r)))
            }
        }
    }

    /// `ρ'(r) = -r · g(r)` with `g` from [`neg_derivative_over_r`](Self::neg_derivative_over_r).
    pub fn derivative(&self, r: f64) -> f64 {
        -r * self.neg_derivative_over_r(r)
    }

    /// `-ρ'(r)/r` in factored form, finite at `r = 0`:
    /// `56 (1+5r)(1-r)⁵` for `ρ_2`, `22 (1+7r+16r²)(1-r)⁷` for `ρ_3`.
    pub fn neg_derivative_over_r(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - r;
        match self {
            WendlandProfile::Wendland2 => {
                let s2 = s * s;
                56.0 * (1.0 + 5.0 * r) * s2 * s2 * s
            }
            WendlandProfile::Wendland3 => {
                let s2 = s * s;
                let s4 = s2 * s2;
                22.0 * (1.0 + r * (7.0 + 16.0 * r)) * s4 * s2 * s
            }
        }
    }
}

impl fmt::Display for WendlandProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WendlandProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wendland2" | "2" => Ok(WendlandProfile::Wendland2),
            "wendland3" | "3" => Ok(WendlandProfile::Wendland3),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }
}

/// Chord length `√(2 - 2t)` between unit vectors with inner product `t`.
#[inline]
fn chord(t: f64) -> f64 {
    (2.0 - 2.0 * t.clamp(-1.0, 1.0)).sqrt()
}

/// Zonal kernel `Φ(x, y) = φ(x·y)` built from a Wendland profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZonalKernel {
    profile: WendlandProfile,
}

impl ZonalKernel {
    /// Inner products at or below this value are outside the support.
    pub const SUPPORT_DOT: f64 = 0.5;

    pub fn new(profile: WendlandProfile) -> Self {
        ZonalKernel { profile }
    }

    pub fn profile(&self) -> WendlandProfile {
        self.profile
    }

    /// `φ(t) = ρ(√(2 - 2t))`.
    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        if t <= Self::SUPPORT_DOT {
            return 0.0;
        }
        self.profile.eval(chord(t))
    }

    /// `φ'(t) = -ρ'(r)/r`, `r = √(2 - 2t)`.
    #[inline]
    pub fn phi_prime(&self, t: f64) -> f64 {
        if t <= Self::SUPPORT_DOT {
            return 0.0;
        }
        self.profile.neg_derivative_over_r(chord(t))
    }

    pub fn eval(&self, x: &SpherePoint, y: &SpherePoint) -> f64 {
        self.phi(x.dot(y))
    }

    /// `grad Φ_p(x) · grad Φ_q(x)` where grad is the surface gradient in `x`:
    /// `φ'(x·p) φ'(x·q) [p·q - (x·p)(x·q)]`.
    pub fn surface_gradient_inner(&self, x: &SpherePoint, p: &SpherePoint, q: &SpherePoint) -> f64 {
        let tp = x.dot(p);
        let tq = x.dot(q);
        let dp = self.phi_prime(tp);
        if dp == 0.0 {
            return 0.0;
        }
        let dq = self.phi_prime(tq);
        dp * dq * (p.dot(q) - tp * tq)
    }
}

impl From<WendlandProfile> for ZonalKernel {
    fn from(profile: WendlandProfile) -> Self {
        ZonalKernel::new(profile)
    }
}

/// Free-function form of [`ZonalKernel::eval`].
pub fn kernel_eval(kernel: &ZonalKernel, x: &SpherePoint, y: &SpherePoint) -> f64 {
    kernel.eval(x, y)
}

/// Free-function form of [`ZonalKernel::phi_prime`].
pub fn zonal_derivative(kernel: &ZonalKernel, t: f64) -> f64 {
    kernel.phi_prime(t)
}

/// Free-function form of [`ZonalKernel::surface_gradient_inner`].
pub fn surface_gradient_inner(
    kernel: &ZonalKernel,
    x: &SpherePoint,
    p: &SpherePoint,
    q: &SpherePoint,
) -> f64 {
    kernel.surface_gradient_inner(x, p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const BOTH: [WendlandProfile; 2] = [WendlandProfile::Wendland2, WendlandProfile::Wendland3];

    #[test]
    fn values_at_origin_and_support_edge() {
        assert_eq!(WendlandProfile::Wendland2.eval(0.0), 3.0);
        assert_eq!(WendlandProfile::Wendland3.eval(0.0), 1.0);
        for p in BOTH {
            assert_eq!(p.eval(1.0), 0.0);
            assert_eq!(p.eval(1.7), 0.0);
            assert_eq!(p.derivative(0.0), 0.0);
            assert!(p.eval(0.999) > 0.0);
        }
    }

    #[test]
    fn zonal_derivative_at_pole() {
        let k2 = ZonalKernel::new(WendlandProfile::Wendland2);
        let k3 = ZonalKernel::new(WendlandProfile::Wendland3);
        assert_eq!(zonal_derivative(&k2, 1.0), 56.0);
        assert_eq!(zonal_derivative(&k3, 1.0), 22.0);
        for t in [-1.0, 0.0, 0.5] {
            assert_eq!(k2.phi_prime(t), 0.0);
            assert_eq!(k3.phi(t), 0.0);
        }
    }

    #[test]
    fn kernel_eval_cases() {
        let k2 = ZonalKernel::new(WendlandProfile::Wendland2);
        let k3 = ZonalKernel::new(WendlandProfile::Wendland3);
        let x = SpherePoint::from_angles(0.4, 1.3);
        assert!((kernel_eval(&k2, &x, &x) - 3.0).abs() < 1e-12);
        assert!((kernel_eval(&k3, &x, &x) - 1.0).abs() < 1e-12);
        let y = SpherePoint::from_angles(0.4 + PI / 2.0, 1.3);
        assert_eq!(kernel_eval(&k2, &x, &y), 0.0);
        // exactly at geodesic angle π/3 the chord is 1
        let edge = SpherePoint::from_angles(0.4 + PI / 3.0 + 1e-12, 1.3);
        assert_eq!(k2.eval(&x, &edge), 0.0);
    }

    #[test]
    fn gradient_inner_vanishes_at_pole_and_outside_support() {
        let k = ZonalKernel::new(WendlandProfile::Wendland2);
        let x = SpherePoint::from_angles(1.0, 2.0);
        assert_eq!(k.surface_gradient_inner(&x, &x, &x), 0.0);
        let far = SpherePoint::from_angles(1.0 + 1.2, 2.0);
        let q = SpherePoint::from_angles(1.1, 2.0);
        assert_eq!(k.surface_gradient_inner(&x, &far, &q), 0.0);
    }

    #[test]
    fn names_parse() {
        assert_eq!(
            "wendland2".parse::<WendlandProfile>().unwrap(),
            WendlandProfile::Wendland2
        );
        assert_eq!(
            "Wendland3".parse::<WendlandProfile>().unwrap(),
            WendlandProfile::Wendland3
        );
        assert!(matches!(
            "gauss".parse::<WendlandProfile>(),
            Err(Error::UnknownKernel(_))
        ));
        assert_eq!(WendlandProfile::Wendland3.to_string(), "wendland3");
        assert_eq!(WendlandProfile::Wendland2.tau(), 3.5);
    }
}
