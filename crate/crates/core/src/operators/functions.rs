//! Test functions f ∈ C_c^1 and Lipschitz fields a.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::maximal::GridFunction;

/// A function on the plane with a known support disk and sup bound.
pub trait PlaneFunction: Sync {
    fn value(&self, x: [f64; 2]) -> Complex64;
    /// (center, radius) of a closed disk outside which the function vanishes.
    fn support(&self) -> ([f64; 2], f64);
    fn sup_norm(&self) -> f64;
}

/// Smooth compactly supported test functions with declared bounds.
///
/// The Gaussian is truncated at the radius where it drops below 1e-16 of
/// its peak; its support disk is that radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunction {
    /// A exp(-|x - c|²/(2w²)).
    Gaussian { center: [f64; 2], width: f64, amplitude: f64 },
    /// A (1 - |x - c|²/R²)² inside the disk, C¹ across its boundary.
    Bump { center: [f64; 2], radius: f64, amplitude: f64 },
    /// (1 + s·(x - c)/R) times the bump.
    PolyBump { center: [f64; 2], radius: f64, amplitude: f64, slope: [f64; 2] },
}

/// (2 ln 10^16)^{1/2}.
const GAUSS_CUTOFF: f64 = 8.582_839_5;

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl TestFunction {
    pub fn gaussian(center: [f64; 2], width: f64, amplitude: f64) -> Result<Self> {
        let f = TestFunction::Gaussian { center, width, amplitude };
        f.validate()?;
        Ok(f)
    }

    pub fn bump(center: [f64; 2], radius: f64, amplitude: f64) -> Result<Self> {
        let f = TestFunction::Bump { center, radius, amplitude };
        f.validate()?;
        Ok(f)
    }

    pub fn poly_bump(center: [f64; 2], radius: f64, amplitude: f64, slope: [f64; 2]) -> Result<Self> {
        let f = TestFunction::PolyBump { center, radius, amplitude, slope };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let (c, s, a) = match self {
            TestFunction::Gaussian { center, width, amplitude } => (center, *width, *amplitude),
            TestFunction::Bump { center, radius, amplitude } => (center, *radius, *amplitude),
            TestFunction::PolyBump { center, radius, amplitude, slope } => {
                if !(slope[0].is_finite() && slope[1].is_finite()) {
                    return domain("poly_bump slope must be finite");
                }
                (center, *radius, *amplitude)
            }
        };
        if !(s > 0.0 && s.is_finite()) {
            return domain(format!("test function scale must be positive, got {s}"));
        }
        if !(c[0].is_finite() && c[1].is_finite() && a.is_finite()) {
            return domain("test function center and amplitude must be finite");
        }
        Ok(())
    }

    pub fn family(&self) -> &'static str {
        match self {
            TestFunction::Gaussian { .. } => "gaussian",
            TestFunction::Bump { .. } => "bump",
            TestFunction::PolyBump { .. } => "poly_bump",
        }
    }

    pub fn center(&self) -> [f64; 2] {
        match self {
            TestFunction::Gaussian { center, .. }
            | TestFunction::Bump { center, .. }
            | TestFunction::PolyBump { center, .. } => *center,
        }
    }

    pub fn real_value(&self, x: [f64; 2]) -> f64 {
        let c = self.center();
        let d = [x[0] - c[0], x[1] - c[1]];
        let d2 = dot(d, d);
        match self {
            TestFunction::Gaussian { width, amplitude, .. } => {
                let s2 = d2 / (width * width);
                if s2 > GAUSS_CUTOFF * GAUSS_CUTOFF {
                    0.0
                } else {
                    amplitude * (-0.5 * s2).exp()
                }
            }
            TestFunction::Bump { radius, amplitude, .. } => {
                let s2 = d2 / (radius * radius);
                if s2 >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - s2) * (1.0 - s2)
                }
            }
            TestFunction::PolyBump { radius, amplitude, slope, .. } => {
                let s2 = d2 / (radius * radius);
                if s2 >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 + dot(*slope, d) / radius) * (1.0 - s2) * (1.0 - s2)
                }
            }
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let c = self.center();
        let d = [x[0] - c[0], x[1] - c[1]];
        let d2 = dot(d, d);
        match self {
            TestFunction::Gaussian { width, .. } => {
                let v = self.real_value(x);
                let k = -v / (width * width);
                [k * d[0], k * d[1]]
            }
            TestFunction::Bump { radius, amplitude, .. } => {
                let s2 = d2 / (radius * radius);
                if s2 >= 1.0 {
                    return [0.0, 0.0];
                }
                let k = -4.0 * amplitude * (1.0 - s2) / (radius * radius);
                [k * d[0], k * d[1]]
            }
            TestFunction::PolyBump { radius, amplitude, slope, .. } => {
                let s2 = d2 / (radius * radius);
                if s2 >= 1.0 {
                    return [0.0, 0.0];
                }
                let p = 1.0 + dot(*slope, d) / radius;
                let b = (1.0 - s2) * (1.0 - s2);
                let k = -4.0 * (1.0 - s2) / (radius * radius);
                [
                    amplitude * (slope[0] / radius * b + p * k * d[0]),
                    amplitude * (slope[1] / radius * b + p * k * d[1]),
                ]
            }
        }
    }

    /// Declared bound on |∇f|.
    pub fn grad_bound(&self) -> f64 {
        // max of 4 s (1 - s²) on [0, 1] is 8/(3√3)
        let bump_peak = 8.0 / (3.0 * 3f64.sqrt());
        match self {
            TestFunction::Gaussian { width, amplitude, .. } => amplitude.abs() / width * (-0.5f64).exp(),
            TestFunction::Bump { radius, amplitude, .. } => amplitude.abs() * bump_peak / radius,
            TestFunction::PolyBump { radius, amplitude, slope, .. } => {
                let s = dot(*slope, *slope).sqrt();
                amplitude.abs() * (s + (1.0 + s) * bump_peak) / radius
            }
        }
    }

    /// Declared bound on |f|.
    pub fn sup_bound(&self) -> f64 {
        match self {
            TestFunction::Gaussian { amplitude, .. } | TestFunction::Bump { amplitude, .. } => amplitude.abs(),
            TestFunction::PolyBump { amplitude, slope, .. } => amplitude.abs() * (1.0 + dot(*slope, *slope).sqrt()),
        }
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            TestFunction::Gaussian { width, .. } => GAUSS_CUTOFF * width,
            TestFunction::Bump { radius, .. } | TestFunction::PolyBump { radius, .. } => *radius,
        }
    }

    /// f(·/λ): center and scale multiplied by λ.
    pub fn dilated(&self, lambda: f64) -> Self {
        let c = self.center();
        let c = [c[0] * lambda, c[1] * lambda];
        match self.clone() {
            TestFunction::Gaussian { width, amplitude, .. } => {
                TestFunction::Gaussian { center: c, width: width * lambda, amplitude }
            }
            TestFunction::Bump { radius, amplitude, .. } => {
                TestFunction::Bump { center: c, radius: radius * lambda, amplitude }
            }
            TestFunction::PolyBump { radius, amplitude, slope, .. } => {
                TestFunction::PolyBump { center: c, radius: radius * lambda, amplitude, slope }
            }
        }
    }

    /// Spot-check the analytic gradient against central differences at
    /// `count` random points of the support, and the declared bound against
    /// the analytic gradient. Returns the worst relative discrepancy.
    pub fn check_gradient<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<f64> {
        let c = self.center();
        let rad = self.support_radius();
        let bound = self.grad_bound();
        let scale = bound.max(1e-300);
        let mut worst: f64 = 0.0;
        for _ in 0..count {
            let r = rad * rng.gen::<f64>().sqrt() * 0.999;
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = [c[0] + r * t.cos(), c[1] + r * t.sin()];
            let g = self.gradient(x);
            let h = 1e-6 * rad;
            let fd = [
                (self.real_value([x[0] + h, x[1]]) - self.real_value([x[0] - h, x[1]])) / (2.0 * h),
                (self.real_value([x[0], x[1] + h]) - self.real_value([x[0], x[1] - h])) / (2.0 * h),
            ];
            let err = ((g[0] - fd[0]).powi(2) + (g[1] - fd[1]).powi(2)).sqrt() / scale;
            worst = worst.max(err);
            let norm = dot(g, g).sqrt();
            if norm > bound * (1.0 + 1e-9) {
                return domain(format!("|∇f| = {norm} exceeds the declared bound {bound} at {x:?}"));
            }
        }
        if worst > 0.01 {
            return domain(format!("gradient disagrees with finite differences by {worst:.3e}"));
        }
        Ok(worst)
    }
}

impl PlaneFunction for TestFunction {
    fn value(&self, x: [f64; 2]) -> Complex64 {
        Complex64::new(self.real_value(x), 0.0)
    }
    fn support(&self) -> ([f64; 2], f64) {
        (self.center(), self.support_radius())
    }
    fn sup_norm(&self) -> f64 {
        self.sup_bound()
    }
}

/// Bilinear interpolation, zero outside the box.
impl PlaneFunction for GridFunction {
    fn value(&self, x: [f64; 2]) -> Complex64 {
        let u = (x[0] - self.corner[0]) / self.spacing[0];
        let v = (x[1] - self.corner[1]) / self.spacing[1];
        let (nx, ny) = ((self.shape[0] - 1) as f64, (self.shape[1] - 1) as f64);
        if !(u >= 0.0 && v >= 0.0 && u <= nx && v <= ny) {
            return Complex64::new(0.0, 0.0);
        }
        let i = (u.floor() as usize).min(self.shape[0] - 2);
        let j = (v.floor() as usize).min(self.shape[1] - 2);
        let (a, b) = (u - i as f64, v - j as f64);
        let g = |i: usize, j: usize| self.values[self.index(i, j)];
        g(i, j) * ((1.0 - a) * (1.0 - b)) + g(i + 1, j) * (a * (1.0 - b)) + g(i, j + 1) * ((1.0 - a) * b)
            + g(i + 1, j + 1) * (a * b)
    }
    fn support(&self) -> ([f64; 2], f64) {
        let half = [
            0.5 * self.spacing[0] * (self.shape[0] - 1) as f64,
            0.5 * self.spacing[1] * (self.shape[1] - 1) as f64,
        ];
        ([self.corner[0] + half[0], self.corner[1] + half[1]], dot(half, half).sqrt())
    }
    fn sup_norm(&self) -> f64 {
        self.max_abs()
    }
}

/// Lipschitz symbols a for commutators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LipschitzField {
    /// v·x + c.
    Linear { slope: [f64; 2], offset: f64 },
    /// A sin(w·x).
    Sine { wave: [f64; 2], amplitude: f64 },
}

impl LipschitzField {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            LipschitzField::Linear { slope, offset } => dot(*slope, x) + offset,
            LipschitzField::Sine { wave, amplitude } => amplitude * dot(*wave, x).sin(),
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            LipschitzField::Linear { slope, .. } => *slope,
            LipschitzField::Sine { wave, amplitude } => {
                let c = amplitude * dot(*wave, x).cos();
                [c * wave[0], c * wave[1]]
            }
        }
    }

    /// Declared ‖∇a‖_∞.
    pub fn lipschitz(&self) -> f64 {
        match self {
            LipschitzField::Linear { slope, .. } => dot(*slope, *slope).sqrt(),
            LipschitzField::Sine { wave, amplitude } => amplitude.abs() * dot(*wave, *wave).sqrt(),
        }
    }

    /// Largest |a(x) - a(y)|/|x - y| over the pairs; errors above the declared constant.
    pub fn check_lipschitz(&self, pairs: &[([f64; 2], [f64; 2])]) -> Result<f64> {
        let l = self.lipschitz();
        let mut worst: f64 = 0.0;
        for (x, y) in pairs {
            let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            if d == 0.0 {
                continue;
            }
            let q = (self.value(*x) - self.value(*y)).abs() / d;
            if q > l * (1.0 + 1e-9) + 1e-12 {
                return domain(format!("Lipschitz quotient {q} exceeds the declared {l}"));
            }
            worst = worst.max(q);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradients_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in [
            TestFunction::gaussian([0.3, -0.2], 0.7, 1.5).unwrap(),
            TestFunction::bump([1.0, 0.0], 2.0, -1.0).unwrap(),
            TestFunction::poly_bump([0.0, 1.0], 1.5, 1.0, [0.4, -0.3]).unwrap(),
        ] {
            assert!(f.check_gradient(100, &mut rng).unwrap() < 1e-3, "{f:?}");
        }
    }

    #[test]
    fn bump_gradient_bound_is_attained() {
        let f = TestFunction::bump([0.0, 0.0], 1.0, 1.0).unwrap();
        let g = f.gradient([1.0 / 3f64.sqrt(), 0.0]);
        assert!((g[0].abs() - f.grad_bound()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(TestFunction::gaussian([0.0, 0.0], 0.0, 1.0).is_err());
        assert!(TestFunction::bump([0.0, f64::NAN], 1.0, 1.0).is_err());
    }

    #[test]
    fn grid_interpolation_reproduces_bilinear() {
        let g = GridFunction::from_fn([0.0, 0.0], [2.0, 2.0], [5, 5], |x| Complex64::new(x[0] + 2.0 * x[1], 0.0))
            .unwrap();
        let v = PlaneFunction::value(&g, [0.7, 1.3]);
        assert!((v.re - 3.3).abs() < 1e-12);
        assert_eq!(PlaneFunction::value(&g, [3.0, 0.0]).re, 0.0);
    }

    #[test]
    fn sine_field_is_lipschitz() {
        let a = LipschitzField::Sine { wave: [1.0, 2.0], amplitude: 0.5 };
        let pairs: Vec<_> = (0..50).map(|i| ([i as f64 * 0.1, 0.0], [0.0, i as f64 * 0.07])).collect();
        assert!(a.check_lipschitz(&pairs).unwrap() <= a.lipschitz());
    }
}
