//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's own numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use sphere_lt::geometry::SpherePoint;

/// `P_l(t)` by Bonnet's recurrence.
pub fn legendre(l: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 40)
}

/// The Wendland profiles in their tabulated (unfactored) form.
pub fn wendland_table(m: u32, r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    match m {
        2 => (1.0 - r).powi(6) * (35.0 * r * r + 18.0 * r + 3.0),
        3 => (1.0 - r).powi(8) * (32.0 * r * r * r + 25.0 * r * r + 8.0 * r + 1.0),
        _ => unreachable!(),
    }
}

/// `φ(t) = ρ(√(2 - 2t))` from the tabulated profile.
pub fn zonal_table(m: u32, t: f64) -> f64 {
    wendland_table(m, (2.0 - 2.0 * t).max(0.0).sqrt())
}

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// `∫_{S²} x^a y^b z^c dS`: zero unless all exponents are even, else
/// `4π (a-1)!! (b-1)!! (c-1)!! / (a+b+c+1)!!`.
pub fn sphere_monomial(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    let (a, b, c) = (a as i64, b as i64, c as i64);
    4.0 * PI * double_factorial(a - 1) * double_factorial(b - 1) * double_factorial(c - 1)
        / double_factorial(a + b + c + 1)
}

pub fn random_point<R: Rng>(rng: &mut R) -> SpherePoint {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    SpherePoint::from_angles(z.acos(), phi)
}

/// A random point `q` with `q·x > min_dot`.
pub fn random_point_near<R: Rng>(rng: &mut R, x: &SpherePoint, min_dot: f64) -> SpherePoint {
    loop {
        let q = random_point(rng);
        if q.dot(x) > min_dot {
            return q;
        }
    }
}

pub fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Orthonormal tangent basis at `x`.
pub fn tangent_basis(x: &SpherePoint) -> [[f64; 3]; 2] {
    let c = x.coords();
    let helper = if c[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let d = helper[0] * c[0] + helper[1] * c[1] + helper[2] * c[2];
    let e1 = normalize([
        helper[0] - d * c[0],
        helper[1] - d * c[1],
        helper[2] - d * c[2],
    ]);
    let e2 = [
        c[1] * e1[2] - c[2] * e1[1],
        c[2] * e1[0] - c[0] * e1[2],
        c[0] * e1[1] - c[1] * e1[0],
    ];
    [e1, e2]
}

/// Point reached from `x` along the great circle with unit tangent `e`.
pub fn geodesic_step(x: &SpherePoint, e: [f64; 3], s: f64) -> SpherePoint {
    let c = x.coords();
    let (sn, cs) = s.sin_cos();
    let p = normalize([
        cs * c[0] + sn * e[0],
        cs * c[1] + sn * e[1],
        cs * c[2] + sn * e[2],
    ]);
    SpherePoint::from_cartesian(p[0], p[1], p[2]).unwrap()
}

/// Surface gradient of `f` at `x` in the basis of [`tangent_basis`], by
/// central differences along geodesics.
pub fn tangential_gradient(f: &dyn Fn(&SpherePoint) -> f64, x: &SpherePoint, s: f64) -> [f64; 2] {
    let basis = tangent_basis(x);
    let d = |e: [f64; 3]| (f(&geodesic_step(x, e, s)) - f(&geodesic_step(x, e, -s))) / (2.0 * s);
    [d(basis[0]), d(basis[1])]
}
