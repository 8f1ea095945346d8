//! Partitions of the unit sphere into cells (arcs for n = 2,
//! latitude-longitude patches for n = 3).

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{domain, Result};

pub const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub enum SphereCells {
    /// Arcs `[edges[i], edges[i + 1])` of the circle, with `edges[0] = 0`
    /// and the last edge equal to 2π.
    Circle { edges: Vec<f64> },
    /// Polar angle measured from the third axis, azimuth in the first two
    /// coordinates.
    LatLong { n_polar: usize, n_azimuth: usize },
}

/// Angle of a planar vector in [0, 2π).
pub fn angle_of(x: f64, y: f64) -> f64 {
    let a = y.atan2(x);
    if a < 0.0 {
        let b = a + TAU;
        if b >= TAU {
            0.0
        } else {
            b
        }
    } else {
        a
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl SphereCells {
    pub fn uniform_circle(n: usize) -> Self {
        let edges = (0..=n)
            .map(|i| if i == n { TAU } else { TAU * i as f64 / n as f64 })
            .collect();
        SphereCells::Circle { edges }
    }

    pub fn lat_long(n_polar: usize, n_azimuth: usize) -> Self {
        SphereCells::LatLong { n_polar, n_azimuth }
    }

    pub fn dim(&self) -> usize {
        match self {
            SphereCells::Circle { .. } => 2,
            SphereCells::LatLong { .. } => 3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SphereCells::Circle { edges } => edges.len() - 1,
            SphereCells::LatLong { n_polar, n_azimuth } => n_polar * n_azimuth,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_measure(&self) -> f64 {
        match self {
            SphereCells::Circle { .. } => TAU,
            SphereCells::LatLong { .. } => 4.0 * PI,
        }
    }

    /// Arc `[from, to)` of a circle cell.
    pub fn arc(&self, i: usize) -> (f64, f64) {
        match self {
            SphereCells::Circle { edges } => (edges[i], edges[i + 1]),
            SphereCells::LatLong { .. } => panic!("arc() on a spherical partition"),
        }
    }

    /// Polar and azimuthal bounds of a latitude-longitude cell.
    pub fn patch(&self, i: usize) -> ((f64, f64), (f64, f64)) {
        match self {
            SphereCells::LatLong { n_polar, n_azimuth } => {
                let (a, b) = (i / n_azimuth, i % n_azimuth);
                let dt = PI / *n_polar as f64;
                let dp = TAU / *n_azimuth as f64;
                ((a as f64 * dt, (a + 1) as f64 * dt), (b as f64 * dp, (b + 1) as f64 * dp))
            }
            SphereCells::Circle { .. } => panic!("patch() on a circle partition"),
        }
    }

    pub fn measure(&self, i: usize) -> f64 {
        match self {
            SphereCells::Circle { edges } => edges[i + 1] - edges[i],
            SphereCells::LatLong { .. } => {
                let ((t0, t1), (p0, p1)) = self.patch(i);
                (t0.cos() - t1.cos()) * (p1 - p0)
            }
        }
    }

    /// Representative unit vector of a cell.
    pub fn center(&self, i: usize) -> Vec<f64> {
        match self {
            SphereCells::Circle { .. } => {
                let (a, b) = self.arc(i);
                let t = 0.5 * (a + b);
                vec![t.cos(), t.sin()]
            }
            SphereCells::LatLong { .. } => {
                let ((t0, t1), (p0, p1)) = self.patch(i);
                let z = 0.5 * (t0.cos() + t1.cos());
                let s = (1.0 - z * z).max(0.0).sqrt();
                let p = 0.5 * (p0 + p1);
                vec![s * p.cos(), s * p.sin(), z]
            }
        }
    }

    /// Index of the cell containing the direction of `x` (x ≠ 0).
    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return domain(format!("point has {} coordinates, expected {}", x.len(), self.dim()));
        }
        let r = norm(x);
        if r == 0.0 || !r.is_finite() {
            return domain("direction of the origin or a non-finite point is undefined");
        }
        Ok(match self {
            SphereCells::Circle { edges } => {
                let t = angle_of(x[0], x[1]);
                let k = edges.partition_point(|e| *e <= t);
                k.clamp(1, edges.len() - 1) - 1
            }
            SphereCells::LatLong { n_polar, n_azimuth } => {
                let z = (x[2] / r).clamp(-1.0, 1.0);
                let t = z.acos();
                let p = angle_of(x[0], x[1]);
                let a = ((t / PI * *n_polar as f64) as usize).min(n_polar - 1);
                let b = ((p / TAU * *n_azimuth as f64) as usize).min(n_azimuth - 1);
                a * n_azimuth + b
            }
        })
    }

    /// Direction drawn uniformly (w.r.t. surface measure) from a cell.
    pub fn sample_direction<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Vec<f64> {
        match self {
            SphereCells::Circle { .. } => {
                let (a, b) = self.arc(i);
                let t = a + (b - a) * rng.gen::<f64>();
                vec![t.cos(), t.sin()]
            }
            SphereCells::LatLong { .. } => {
                let ((t0, t1), (p0, p1)) = self.patch(i);
                let (z0, z1) = (t1.cos(), t0.cos());
                let z = z0 + (z1 - z0) * rng.gen::<f64>();
                let p = p0 + (p1 - p0) * rng.gen::<f64>();
                let s = (1.0 - z * z).max(0.0).sqrt();
                vec![s * p.cos(), s * p.sin(), z]
            }
        }
    }

    /// Index of the antipodal cell, when the partition is symmetric.
    pub fn antipode(&self, i: usize) -> Option<usize> {
        match self {
            SphereCells::Circle { .. } => {
                let c = self.center(i);
                let j = self.locate(&[-c[0], -c[1]]).ok()?;
                let (a, b) = self.arc(i);
                let (c0, c1) = self.arc(j);
                let shift = |x: f64| if x >= PI { x - PI } else { x + PI };
                ((shift(a) - c0).abs() < 1e-12 && ((b - a) - (c1 - c0)).abs() < 1e-12).then_some(j)
            }
            SphereCells::LatLong { n_polar, n_azimuth } => {
                if n_azimuth % 2 != 0 {
                    return None;
                }
                let (a, b) = (i / n_azimuth, i % n_azimuth);
                Some((n_polar - 1 - a) * n_azimuth + (b + n_azimuth / 2) % n_azimuth)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_sum_to_sphere() {
        let c = SphereCells::uniform_circle(37);
        let s: f64 = (0..c.len()).map(|i| c.measure(i)).sum();
        assert!((s - TAU).abs() < 1e-12);
        let l = SphereCells::lat_long(16, 32);
        let s: f64 = (0..l.len()).map(|i| l.measure(i)).sum();
        assert!((s - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn locate_round_trips_centers() {
        let c = SphereCells::uniform_circle(64);
        for i in 0..c.len() {
            assert_eq!(c.locate(&c.center(i)).unwrap(), i);
        }
        let l = SphereCells::lat_long(8, 16);
        for i in 0..l.len() {
            assert_eq!(l.locate(&l.center(i)).unwrap(), i);
            let j = l.antipode(i).unwrap();
            let (a, b) = (l.center(i), l.center(j));
            assert!((a[0] + b[0]).abs() + (a[1] + b[1]).abs() + (a[2] + b[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_rejects_origin() {
        assert!(SphereCells::uniform_circle(4).locate(&[0.0, 0.0]).is_err());
    }
}
