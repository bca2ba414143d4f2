//! Point sets on S²: the generalized-spiral equal-area construction and the
//! mesh-quality metrics (mesh norm `h_X`, separation radius `q_X`).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::SphereQuadrature;

/// Probe grid order used for `h_X` unless the caller asks otherwise.
pub const DEFAULT_PROBE_DENSITY: usize = 400;

/// A unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint([f64; 3]);

impl SpherePoint {
    /// Projects a nonzero vector onto the sphere.
    pub fn from_cartesian(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let norm = (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::OutOfRange {
                name: "|x|",
                value: norm,
                reason: "cannot project the zero vector onto the sphere",
            });
        }
        Ok(SpherePoint([x1 / norm, x2 / norm, x3 / norm]))
    }

    /// Point at colatitude `theta` (from the north pole) and longitude `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        SpherePoint([st * cp, st * sp, ct])
    }

    /// Caller guarantees `|x| = 1`.
    pub(crate) const fn new_unchecked(x1: f64, x2: f64, x3: f64) -> Self {
        SpherePoint([x1, x2, x3])
    }

    pub const NORTH_POLE: SpherePoint = SpherePoint([0.0, 0.0, 1.0]);
    pub const SOUTH_POLE: SpherePoint = SpherePoint([0.0, 0.0, -1.0]);

    pub fn x1(&self) -> f64 {
        self.0[0]
    }

    pub fn x2(&self) -> f64 {
        self.0[1]
    }

    pub fn x3(&self) -> f64 {
        self.0[2]
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Great-circle distance in `[0, π]`.
    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

/// Mesh norm estimate together with the probe-grid resolution that bounds
/// how far it can sit below the true supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshNorm {
    pub value: f64,
    pub resolution: f64,
}

/// An ordered set of distinct centers with its mesh norm and separation radius.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePointSet {
    points: Vec<SpherePoint>,
    mesh_norm: MeshNorm,
    separation: f64,
}

impl SpherePointSet {
    /// Wraps user-supplied points, computing `h` on the default probe grid.
    pub fn new(points: Vec<SpherePoint>) -> Result<Self> {
        Self::with_probe_density(points, DEFAULT_PROBE_DENSITY)
    }

    pub fn with_probe_density(points: Vec<SpherePoint>, probe_density: usize) -> Result<Self> {
        let separation = separation_radius(&points)?;
        let mesh_norm = mesh_norm(&points, probe_density)?;
        Ok(SpherePointSet {
            points,
            mesh_norm,
            separation,
        })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mesh norm `h_X` (radians).
    pub fn h(&self) -> f64 {
        self.mesh_norm.value
    }

    pub fn mesh_norm(&self) -> MeshNorm {
        self.mesh_norm
    }

    /// Separation radius `q_X` (radians).
    pub fn q(&self) -> f64 {
        self.separation
    }

    /// Mesh ratio `h / q`.
    pub fn mesh_ratio(&self) -> f64 {
        self.h() / self.q()
    }

    /// Plain text: `#` comment lines for K, h, q, then one `x1 x2 x3` line
    /// per point.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        let _ = writeln!(buf, "# K {}", self.len());
        let _ = writeln!(buf, "# h {:e}", self.h());
        let _ = writeln!(buf, "# q {:e}", self.q());
        for p in &self.points {
            let [a, b, c] = p.coords();
            let _ = writeln!(buf, "{a:e} {b:e} {c:e}");
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Reads the format written by [`write_text`](Self::write_text). Comment
    /// lines are ignored; `h` and `q` are recomputed.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 3 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let norm2 = fields[0] * fields[0] + fields[1] * fields[1] + fields[2] * fields[2];
            let point = if (norm2 - 1.0).abs() < 1e-14 {
                SpherePoint::new_unchecked(fields[0], fields[1], fields[2])
            } else {
                SpherePoint::from_cartesian(fields[0], fields[1], fields[2])?
            };
            points.push(point);
        }
        Self::new(points)
    }
}

/// Generalized spiral points: `x3` equally spaced in `[-1, 1]` (equal-area
/// bands), longitude advanced by `3.6 / sqrt(K (1 - x3²))` per step. Both
/// poles are included.
pub fn spiral_points(count: usize) -> Result<Vec<SpherePoint>> {
    if count < 2 {
        return Err(Error::TooFewPoints { min: 2, got: count });
    }
    let k = count as f64;
    let step = 3.6 / k.sqrt();
    let mut points = Vec::with_capacity(count);
    let mut phi = 0.0_f64;
    for i in 0..count {
        let x3 = -1.0 + 2.0 * i as f64 / (k - 1.0);
        if i == 0 || i == count - 1 {
            phi = 0.0;
            points.push(if i == 0 {
                SpherePoint::SOUTH_POLE
            } else {
                SpherePoint::NORTH_POLE
            });
            continue;
        }
        phi = (phi + step / (1.0 - x3 * x3).sqrt()).rem_euclid(2.0 * PI);
        points.push(SpherePoint::from_angles(x3.acos(), phi));
    }
    Ok(points)
}

/// Equal-area point set of `count` points with `h` and `q` attached.
pub fn generate_equal_area(count: usize) -> Result<SpherePointSet> {
    SpherePointSet::new(spiral_points(count)?)
}

/// `sup_y min_x dist(x, y)`, with the supremum taken over the tensor
/// quadrature grid of order `probe_density` (rounded up to even).
pub fn mesh_norm(points: &[SpherePoint], probe_density: usize) -> Result<MeshNorm> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let order = probe_density.max(2);
    let order = order + order % 2;
    let grid = SphereQuadrature::new(order)?;
    let nearest = par::map_slice(grid.nodes(), |y| {
        points
            .iter()
            .map(|x| x.dot(y))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let max_dist = nearest
        .into_iter()
        .map(|d| d.clamp(-1.0, 1.0).acos())
        .fold(0.0, f64::max);
    Ok(MeshNorm {
        value: max_dist,
        resolution: grid.covering_radius(),
    })
}

/// Half the smallest pairwise geodesic distance.
pub fn separation_radius(points: &[SpherePoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            min: 2,
            got: points.len(),
        });
    }
    // largest dot product = smallest angle
    let best = par::map_range(points.len(), |i| {
        let mut best = (f64::NEG_INFINITY, i, i);
        for j in i + 1..points.len() {
            let d = points[i].dot(&points[j]);
            if d > best.0 {
                best = (d, i, j);
            }
        }
        best
    });
    let (dot, i, j) =
        best.into_iter().fold(
            (f64::NEG_INFINITY, 0, 0),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    let dist = dot.clamp(-1.0, 1.0).acos();
    if dist == 0.0 {
        return Err(Error::DuplicatePoints {
            first: i,
            second: j,
        });
    }
    Ok(0.5 * dist)
}
