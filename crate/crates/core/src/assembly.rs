//! Mass matrix `B_pq = ⟨Φ_p, Φ_q⟩`, stiffness matrix
//! `S_pq = ⟨grad Φ_p, grad Φ_q⟩` and load vectors `G_p = ⟨g, Φ_p⟩`.
//!
//! All integrals use a [`SphereQuadrature`]. For each center the nodes
//! inside its support cap are tabulated once, together with `x·p`, `φ` and
//! `φ'`; a matrix entry is then a merge over the nodes shared by two
//! supports. Rows are distributed over workers and each entry is summed
//! sequentially in node order, so results do not depend on the number of
//! workers.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{SpherePoint, SpherePointSet};
use crate::kernel::ZonalKernel;
use crate::par;
use crate::quadrature::SphereQuadrature;

/// Centers farther apart than `2π/3` have disjoint supports.
const DISJOINT_DOT: f64 = -0.5;

#[derive(Debug, Clone, Copy)]
struct SupportSample {
    node: u32,
    dot: f64,
    phi: f64,
    dphi: f64,
}

/// Indices of the rings of `quad` that can intersect the support cap of `p`.
fn rings_touching<'a>(
    quad: &'a SphereQuadrature,
    p: &SpherePoint,
) -> impl Iterator<Item = usize> + 'a {
    let p3 = p.x3().clamp(-1.0, 1.0);
    let sp = (1.0 - p3 * p3).max(0.0).sqrt();
    quad.rings().iter().enumerate().filter_map(move |(i, &x3)| {
        // max over the ring of x·p
        let best = p3 * x3 + sp * (1.0 - x3 * x3).max(0.0).sqrt();
        (best > ZonalKernel::SUPPORT_DOT).then_some(i)
    })
}

fn support_samples(
    kernel: &ZonalKernel,
    quad: &SphereQuadrature,
    p: &SpherePoint,
) -> Vec<SupportSample> {
    let per_ring = quad.order();
    let nodes = quad.nodes();
    let mut out = Vec::new();
    for ring in rings_touching(quad, p) {
        let first = ring * per_ring;
        for (i, x) in nodes.iter().enumerate().skip(first).take(per_ring) {
            let dot = x.dot(p);
            if dot > ZonalKernel::SUPPORT_DOT {
                out.push(SupportSample {
                    node: i as u32,
                    dot,
                    phi: kernel.phi(dot),
                    dphi: kernel.phi_prime(dot),
                });
            }
        }
    }
    out
}

fn support_table(
    centers: &[SpherePoint],
    kernel: &ZonalKernel,
    quad: &SphereQuadrature,
) -> Vec<Vec<SupportSample>> {
    par::map_slice(centers, |p| support_samples(kernel, quad, p))
}

#[derive(Clone, Copy)]
enum Which {
    Mass,
    Stiffness,
    Both,
}

/// Upper-triangle entries of B and/or S, mirrored into full matrices.
fn assemble_pairs(
    centers: &[SpherePoint],
    table: &[Vec<SupportSample>],
    weights: &[f64],
    which: Which,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = centers.len();
    let rows = par::map_range(k, |p| {
        let mut row = Vec::with_capacity(k - p);
        for q in p..k {
            let pq = centers[p].dot(&centers[q]);
            if pq <= DISJOINT_DOT {
                row.push((0.0, 0.0));
                continue;
            }
            let (a, b) = (&table[p], &table[q]);
            let (mut i, mut j) = (0, 0);
            let (mut mass, mut stiff) = (0.0, 0.0);
            while i < a.len() && j < b.len() {
                let (sa, sb) = (&a[i], &b[j]);
                match sa.node.cmp(&sb.node) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let w = weights[sa.node as usize];
                        if !matches!(which, Which::Stiffness) {
                            mass += w * sa.phi * sb.phi;
                        }
                        if !matches!(which, Which::Mass) {
                            stiff += w * sa.dphi * sb.dphi * (pq - sa.dot * sb.dot);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
            row.push((mass, stiff));
        }
        row
    });
    let mut mass = DMatrix::zeros(k, k);
    let mut stiff = DMatrix::zeros(k, k);
    for (p, row) in rows.into_iter().enumerate() {
        for (offset, (m, s)) in row.into_iter().enumerate() {
            let q = p + offset;
            mass[(p, q)] = m;
            mass[(q, p)] = m;
            stiff[(p, q)] = s;
            stiff[(q, p)] = s;
        }
    }
    (mass, stiff)
}

/// `B_pq = Σ_x w_x φ(x·p) φ(x·q)`.
pub fn assemble_mass(
    centers: &SpherePointSet,
    kernel: &ZonalKernel,
    quad: &SphereQuadrature,
) -> DMatrix<f64> {
    let table = support_table(centers.points(), kernel, quad);
    assemble_pairs(centers.points(), &table, quad.weights(), Which::Mass).0
}

/// `S_pq = Σ_x w_x φ'(x·p) φ'(x·q) [p·q - (x·p)(x·q)]`.
pub fn assemble_stiffness(
    centers: &SpherePointSet,
    kernel: &ZonalKernel,
    quad: &SphereQuadrature,
) -> DMatrix<f64> {
    let table = support_table(centers.points(), kernel, quad);
    assemble_pairs(centers.points(), &table, quad.weights(), Which::Stiffness).1
}

/// `G_p = Σ_x w_x g(x) φ(x·p)`, with `g` evaluated once per node.
pub fn assemble_load<T, G>(
    centers: &SpherePointSet,
    kernel: &ZonalKernel,
    quad: &SphereQuadrature,
    g: G,
) -> LoadVector
where
    T: Into<Complex64> + Send,
    G: Fn(&SpherePoint) -> T + Sync + Send,
{
    let values: Vec<Complex64> = par::map_slice(quad.nodes(), |x| g(x).into());
    let weights = quad.weights();
    let per_ring = quad.order();
    let nodes = quad.nodes();
    let entries = par::map_slice(centers.points(), |p| {
        let mut acc = Complex64::new(0.0, 0.0);
        for ring in rings_touching(quad, p) {
            for i in ring * per_ring..(ring + 1) * per_ring {
                let phi = kernel.phi(nodes[i].dot(p));
                if phi != 0.0 {
                    acc += values[i] * (weights[i] * phi);
                }
            }
        }
        acc
    });
    LoadVector {
        z: None,
        values: DVector::from_vec(entries),
    }
}

/// Right-hand side `G(z)` of a node system, or a `z`-independent load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    /// `None` for static (initial-data) loads.
    pub z: Option<Complex64>,
    pub values: DVector<Complex64>,
}

impl LoadVector {
    pub fn zeros(len: usize) -> Self {
        LoadVector {
            z: None,
            values: DVector::zeros(len),
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        LoadVector {
            z: None,
            values: DVector::from_iterator(
                values.len(),
                values.iter().map(|&v| Complex64::new(v, 0.0)),
            ),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn real_part(&self) -> DVector<f64> {
        self.values.map(|v| v.re)
    }

    pub fn at(mut self, z: Complex64) -> Self {
        self.z = Some(z);
        self
    }
}

/// Assembled SRBF Galerkin system for `-Δ*` on S².
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    centers: SpherePointSet,
    kernel: ZonalKernel,
    quad: SphereQuadrature,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    support: Vec<Vec<SupportSample>>,
}

impl GalerkinSystem {
    /// Assembles `B` and `S` and checks that `B` is positive definite.
    pub fn assemble(
        centers: SpherePointSet,
        kernel: ZonalKernel,
        quad: SphereQuadrature,
    ) -> Result<Self> {
        let support = support_table(centers.points(), &kernel, &quad);
        let (mass, stiffness) =
            assemble_pairs(centers.points(), &support, quad.weights(), Which::Both);
        if mass.clone().cholesky().is_none() {
            return Err(Error::MassNotPositiveDefinite);
        }
        Ok(GalerkinSystem {
            centers,
            kernel,
            quad,
            mass,
            stiffness,
            support,
        })
    }

    pub fn centers(&self) -> &SpherePointSet {
        &self.centers
    }

    pub fn kernel(&self) -> &ZonalKernel {
        &self.kernel
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.quad
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Load vector of `g` with the system's own quadrature.
    pub fn load<T, G>(&self, g: G) -> LoadVector
    where
        T: Into<Complex64> + Send,
        G: Fn(&SpherePoint) -> T + Sync + Send,
    {
        assemble_load(&self.centers, &self.kernel, &self.quad, g)
    }

    /// Load vector of `g` with an arbitrary quadrature (e.g. a band rule).
    pub fn load_with<T, G>(&self, quad: &SphereQuadrature, g: G) -> LoadVector
    where
        T: Into<Complex64> + Send,
        G: Fn(&SpherePoint) -> T + Sync + Send,
    {
        assemble_load(&self.centers, &self.kernel, quad, g)
    }

    /// `Σ_p c_p Φ_p(x)` at every node of the system's quadrature.
    pub fn evaluate_on_nodes(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        let mut out = vec![0.0; self.quad.len()];
        for (samples, &c) in self.support.iter().zip(coeffs) {
            for s in samples {
                out[s.node as usize] += c * s.phi;
            }
        }
        Ok(out)
    }

    /// `Σ_p c_p Φ_p(x)` at one point.
    pub fn evaluate(&self, coeffs: &[f64], x: &SpherePoint) -> f64 {
        self.centers
            .points()
            .iter()
            .zip(coeffs)
            .map(|(p, &c)| c * self.kernel.eval(p, x))
            .sum()
    }
}

/// Row-major text dump, one row per line, space separated.
pub fn write_matrix<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_equal_area;
    use crate::kernel::WendlandProfile;

    fn small_system(k: usize, r: usize) -> GalerkinSystem {
        GalerkinSystem::assemble(
            generate_equal_area(k).unwrap(),
            WendlandProfile::Wendland2.into(),
            SphereQuadrature::new(r).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn matrices_are_exactly_symmetric() {
        let sys = small_system(40, 60);
        assert_eq!(sys.mass(), &sys.mass().transpose());
        assert_eq!(sys.stiffness(), &sys.stiffness().transpose());
        for i in 0..sys.len() {
            assert!(sys.mass()[(i, i)] > 0.0);
            assert!(sys.stiffness()[(i, i)] >= 0.0);
        }
    }

    #[test]
    fn standalone_assemblers_agree_with_system() {
        let sys = small_system(30, 40);
        let b = assemble_mass(sys.centers(), sys.kernel(), sys.quadrature());
        let s = assemble_stiffness(sys.centers(), sys.kernel(), sys.quadrature());
        assert_eq!(&b, sys.mass());
        assert_eq!(&s, sys.stiffness());
    }

    #[test]
    fn mass_entry_matches_direct_quadrature() {
        let sys = small_system(20, 40);
        let pts = sys.centers().points();
        let k = sys.kernel();
        for (p, q) in [(0, 0), (3, 7), (5, 6)] {
            let direct = sys
                .quadrature()
                .integrate(|x| k.eval(&pts[p], x) * k.eval(&pts[q], x));
            assert!((direct - sys.mass()[(p, q)]).abs() < 1e-12 * (1.0 + direct.abs()));
            let grad = sys
                .quadrature()
                .integrate(|x| k.surface_gradient_inner(x, &pts[p], &pts[q]));
            assert!((grad - sys.stiffness()[(p, q)]).abs() < 1e-10 * (1.0 + grad.abs()));
        }
    }

    #[test]
    fn zero_load_gives_zero_vector() {
        let sys = small_system(12, 20);
        let g = sys.load(|_| 0.0);
        assert!(g.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert!(g.is_real());
    }

    #[test]
    fn evaluation_paths_agree() {
        let sys = small_system(25, 30);
        let coeffs: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin()).collect();
        let on_nodes = sys.evaluate_on_nodes(&coeffs).unwrap();
        for (i, x) in sys.quadrature().nodes().iter().enumerate().step_by(37) {
            assert!((on_nodes[i] - sys.evaluate(&coeffs, x)).abs() < 1e-13);
        }
        assert!(sys.evaluate_on_nodes(&coeffs[1..]).is_err());
    }

    #[test]
    fn duplicate_centers_are_rejected_upstream() {
        let p = SpherePoint::from_angles(1.0, 1.0);
        assert!(SpherePointSet::new(vec![p, p]).is_err());
    }

    #[test]
    fn matrix_dump_format() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1e0 5e-1\n5e-1 2e0\n");
    }
}
