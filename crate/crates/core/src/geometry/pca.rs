//! Two-component PCA of 3D point clouds.

use super::{Point2, Point3};
use crate::error::{invalid, Result};

/// Projection onto the two leading principal directions of a point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaModel {
    pub mean: Point3,
    pub basis: [Point3; 2],
    /// Fraction of total variance along each basis vector.
    pub explained: [f64; 2],
}

impl PcaModel {
    pub fn project(&self, p: Point3) -> Point2 {
        let d = p - self.mean;
        Point2::new(d.dot(self.basis[0]), d.dot(self.basis[1]))
    }
}

/// Population covariance (divides by n) of the points.
pub fn covariance(points: &[Point3]) -> (Point3, [[f64; 3]; 3]) {
    let mean = Point3::centroid(points).unwrap_or(Point3::ZERO);
    let mut c = [[0.0; 3]; 3];
    for p in points {
        let d = (*p - mean).to_array();
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += d[i] * d[j];
            }
        }
    }
    let n = points.len().max(1) as f64;
    for row in &mut c {
        for v in row {
            *v /= n;
        }
    }
    (mean, c)
}

/// Cyclic Jacobi eigen-solve of a symmetric 3×3 matrix. Returns eigenvalues
/// in descending order with eigenvectors as matching entries.
pub fn symmetric_eigen3(a: [[f64; 3]; 3]) -> ([f64; 3], [Point3; 3]) {
    let mut a = a;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let scale = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // A ← Jᵀ A J with J the (p,q) Givens rotation.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.map(|i| a[i][i]);
    let vectors = order.map(|i| Point3::new(v[0][i], v[1][i], v[2][i]));
    (values, vectors)
}

/// Flip so the largest-magnitude component is positive (first one wins ties).
fn canonical_sign(v: Point3) -> Point3 {
    let a = v.to_array();
    let mut k = 0;
    for i in 1..3 {
        if a[i].abs() > a[k].abs() {
            k = i;
        }
    }
    if a[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Unit vector orthogonal to `u`, built from the world axis least aligned with it.
fn orthogonal_to(u: Point3) -> Point3 {
    let a = u.to_array();
    let mut k = 0;
    for i in 1..3 {
        if a[i].abs() < a[k].abs() {
            k = i;
        }
    }
    let axis = [Point3::X, Point3::Y, Point3::Z][k];
    let w = axis - u * axis.dot(u);
    w / w.norm()
}

pub fn pca_fit(points: &[Point3]) -> Result<PcaModel> {
    if points.len() < 2 {
        return invalid(format!("PCA needs at least 2 points, got {}", points.len()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return invalid("PCA input contains non-finite coordinates");
    }
    if points.iter().all(|&p| p == points[0]) {
        return invalid("PCA input points are all identical");
    }
    let (mean, cov) = covariance(points);
    let (values, vectors) = symmetric_eigen3(cov);
    let values = values.map(|v| v.max(0.0));
    let total: f64 = values.iter().sum();
    let first = canonical_sign(vectors[0] / vectors[0].norm());
    let second = if values[1] <= 1e-12 * values[0] {
        // Rank-1 cloud: any orthogonal direction works; pick it deterministically.
        canonical_sign(orthogonal_to(first))
    } else {
        let w = vectors[1] - first * vectors[1].dot(first);
        canonical_sign(w / w.norm())
    };
    let explained = if total > 0.0 {
        [values[0] / total, values[1] / total]
    } else {
        [1.0, 0.0]
    };
    Ok(PcaModel {
        mean,
        basis: [first, second],
        explained,
    })
}
