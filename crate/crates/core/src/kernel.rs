//! Angular kernels Ω on the unit sphere, radial factors h, and the
//! combined kernel specification.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::quad::Adaptive;
use crate::sphere::{norm, SphereCells, TAU};

pub type SphereFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn([f64; 2], [f64; 2]) -> Complex64 + Send + Sync>;

/// Resolution used when a callable kernel is resampled onto cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub circle: usize,
    pub polar: usize,
    pub azimuth: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { circle: 4096, polar: 128, azimuth: 256 }
    }
}

impl Resolution {
    pub fn circle(n: usize) -> Self {
        Resolution { circle: n, ..Default::default() }
    }
}

/// Ω on the unit sphere: complex values on a cell partition, optionally
/// backed by the callable they were resampled from.
#[derive(Clone)]
pub struct AngularKernel {
    label: String,
    cells: SphereCells,
    values: Vec<Complex64>,
    source: Option<SphereFn>,
    resolution: Resolution,
}

impl fmt::Debug for AngularKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularKernel")
            .field("label", &self.label)
            .field("dim", &self.dim())
            .field("cells", &self.values.len())
            .field("callable", &self.source.is_some())
            .finish()
    }
}

fn cell_tolerance() -> Adaptive {
    Adaptive { abs_tol: 1e-15, rel_tol: 1e-11, max_segments: 200 }
}

impl AngularKernel {
    /// Piecewise-constant kernel on arcs `[from, to)` of the circle.
    /// Uncovered angles get the value 0.
    pub fn from_arcs(label: &str, arcs: &[(f64, f64, Complex64)]) -> Result<Self> {
        let mut sorted: Vec<(f64, f64, Complex64)> = arcs.to_vec();
        for (i, (a, b, v)) in sorted.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) || *a < 0.0 || *b > TAU + 1e-12 || a >= b {
                return config(format!(
                    "cells[{i}]: need 0 <= angle_from < angle_to <= 2π, got [{a}, {b})"
                ));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return config(format!("cells[{i}].value is not finite"));
            }
        }
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut edges = vec![0.0];
        let mut values = Vec::new();
        for (i, &(a, b, v)) in sorted.iter().enumerate() {
            let last = *edges.last().unwrap();
            if a < last - 1e-12 {
                return config(format!("cells overlap near angle {a} (cell {i} after sorting)"));
            }
            if a > last + 1e-15 {
                edges.push(a);
                values.push(Complex64::new(0.0, 0.0));
            }
            edges.push(b.min(TAU));
            values.push(v);
        }
        if *edges.last().unwrap() < TAU - 1e-15 {
            edges.push(TAU);
            values.push(Complex64::new(0.0, 0.0));
        } else {
            *edges.last_mut().unwrap() = TAU;
        }
        Ok(AngularKernel {
            label: label.to_string(),
            cells: SphereCells::Circle { edges },
            values,
            source: None,
            resolution: Resolution::default(),
        })
    }

    /// Constant kernel. For n = 2 it is a single exact cell.
    pub fn constant(dim: usize, value: Complex64) -> Result<Self> {
        match dim {
            2 => Self::from_arcs("constant", &[(0.0, TAU, value)]),
            3 => {
                let res = Resolution { polar: 16, azimuth: 32, ..Default::default() };
                let cells = SphereCells::lat_long(res.polar, res.azimuth);
                let n = cells.len();
                Ok(AngularKernel {
                    label: "constant".into(),
                    cells,
                    values: vec![value; n],
                    source: Some(Arc::new(move |_: &[f64]| value)),
                    resolution: res,
                })
            }
            _ => domain(format!("dimension {dim} is not supported")),
        }
    }

    /// Resample a callable onto cells by exact cell averages
    /// (adaptive quadrature per cell).
    pub fn from_fn(dim: usize, label: &str, f: SphereFn, resolution: Resolution) -> Result<Self> {
        let (cells, values) = match dim {
            2 => {
                let cells = SphereCells::uniform_circle(resolution.circle);
                let values = resample_circle(&cells, &f)?;
                (cells, values)
            }
            3 => {
                let cells = SphereCells::lat_long(resolution.polar, resolution.azimuth);
                let values = resample_sphere(&cells, &f)?;
                (cells, values)
            }
            _ => return domain(format!("dimension {dim} is not supported")),
        };
        Ok(AngularKernel { label: label.to_string(), cells, values, source: Some(f), resolution })
    }

    /// Same kernel at another resolution. Cell kernels are returned unchanged.
    pub fn resampled(&self, resolution: Resolution) -> Result<Self> {
        match &self.source {
            Some(f) if self.cells.len() > 1 => {
                Self::from_fn(self.dim(), &self.label, f.clone(), resolution)
            }
            _ => Ok(self.clone()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn dim(&self) -> usize {
        self.cells.dim()
    }
    pub fn cells(&self) -> &SphereCells {
        &self.cells
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn resolution(&self) -> Resolution {
        self.resolution
    }
    pub fn is_callable(&self) -> bool {
        self.source.is_some()
    }
    pub fn cell_value(&self, i: usize) -> Complex64 {
        self.values[i]
    }
    /// |Ω|^{1/n} on a cell.
    pub fn cell_rho(&self, i: usize) -> f64 {
        self.values[i].norm().powf(1.0 / self.dim() as f64)
    }

    /// Ω(x/|x|). Callable kernels are evaluated exactly, cell kernels by lookup.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        let r = norm(x);
        if x.len() != self.dim() {
            return domain(format!("point has {} coordinates, expected {}", x.len(), self.dim()));
        }
        if r == 0.0 || !r.is_finite() {
            return domain("Ω is undefined at the origin");
        }
        match &self.source {
            Some(f) => {
                let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                Ok(f(&u))
            }
            None => Ok(self.values[self.cells.locate(x)?]),
        }
    }

    /// ρ(x) = |Ω(x)|^{1/n}.
    pub fn rho(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.norm().powf(1.0 / self.dim() as f64))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ∫_{S^{n-1}} g(Ω(θ)) dθ. Exact cell sums for cell kernels and n = 3;
    /// adaptive per-cell quadrature of the callable for n = 2.
    pub fn sphere_integral(&self, g: impl Fn(Complex64) -> Complex64 + Sync) -> Result<Complex64> {
        match (&self.source, &self.cells) {
            (Some(f), SphereCells::Circle { .. }) if self.cells.len() > 1 => {
                let q = cell_tolerance();
                let parts = crate::par::map_range(self.cells.len(), |i| {
                    let (a, b) = self.cells.arc(i);
                    q.integrate(|t: f64| g(f(&[t.cos(), t.sin()])), a, b)
                });
                let mut value = Complex64::new(0.0, 0.0);
                let mut error = 0.0;
                let mut scale = 0.0;
                for p in &parts {
                    value += p.value;
                    error += p.error;
                    scale += p.value.norm();
                }
                if !(value.re.is_finite() && value.im.is_finite()) || error > 1e-3 * scale.max(1e-300) {
                    return Err(Error::NonConvergence(format!(
                        "sphere integral of kernel '{}' has error estimate {error:.3e} against magnitude {scale:.3e}",
                        self.label
                    )));
                }
                Ok(value)
            }
            _ => Ok(self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| g(*v) * self.cells.measure(i))
                .sum()),
        }
    }

    /// ∫|Ω|.
    pub fn l1_norm(&self) -> Result<f64> {
        Ok(self.sphere_integral(|v| Complex64::new(v.norm(), 0.0))?.re)
    }

    /// ∫ |Ω| (1 + log⁺|Ω|).
    pub fn llogl_norm(&self) -> Result<f64> {
        Ok(self
            .sphere_integral(|v| {
                let a = v.norm();
                Complex64::new(a * (1.0 + a.ln().max(0.0)), 0.0)
            })?
            .re)
    }

    /// ∫ Ω.
    pub fn cancellation(&self) -> Result<Complex64> {
        self.sphere_integral(|v| v)
    }

    /// c_Ω = (1/n) ∫ Ω log|Ω|, with Ω = 0 contributing 0.
    pub fn c_omega(&self) -> Result<Complex64> {
        let n = self.dim() as f64;
        Ok(self.sphere_integral(|v| {
            let a = v.norm();
            if a == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                v * a.ln()
            }
        })? / n)
    }

    /// Error unless |∫Ω| ≤ tol · max(1, ‖Ω‖₁).
    pub fn check_cancellation(&self, tol: f64) -> Result<()> {
        let c = self.cancellation()?;
        let scale = self.l1_norm()?.max(1.0);
        if c.norm() > tol * scale {
            return Err(Error::UnsupportedHypothesis(format!(
                "kernel '{}' has ∫Ω = {:.3e} (tolerance {tol:.1e})",
                self.label,
                c.norm()
            )));
        }
        Ok(())
    }

    /// ∫ θ^α Ω(θ) dθ for a multi-index α (n = 2).
    pub fn moment(&self, alpha: &[u32]) -> Result<Complex64> {
        if self.dim() != 2 || alpha.len() != 2 {
            return domain("moments are implemented for n = 2");
        }
        let (p, q) = (alpha[0] as i32, alpha[1] as i32);
        let mono = move |t: f64| t.cos().powi(p) * t.sin().powi(q);
        match &self.source {
            Some(f) if self.cells.len() > 1 => {
                let a = cell_tolerance();
                let parts = crate::par::map_range(self.cells.len(), |i| {
                    let (x, y) = self.cells.arc(i);
                    a.integrate(|t: f64| f(&[t.cos(), t.sin()]) * mono(t), x, y).value
                });
                Ok(parts.iter().sum())
            }
            _ => {
                let rule = crate::quad::gauss_legendre(16);
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, v) in self.values.iter().enumerate() {
                    let (x, y) = self.cells.arc(i);
                    let panels = ((y - x) / 0.2).ceil().max(1.0) as usize;
                    let w = (y - x) / panels as f64;
                    for k in 0..panels {
                        let a = x + k as f64 * w;
                        acc += *v * rule.integrate(a, a + w, mono);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Error unless all moments of order k vanish to `tol · max(1, ‖Ω‖₁)`.
    pub fn check_moments(&self, k: u32, tol: f64) -> Result<()> {
        let scale = self.l1_norm()?.max(1.0);
        for i in 0..=k {
            let m = self.moment(&[i, k - i])?;
            if m.norm() > tol * scale {
                return Err(Error::UnsupportedHypothesis(format!(
                    "kernel '{}' has moment ∫θ^({i},{}) Ω = {:.3e}",
                    self.label,
                    k - i,
                    m.norm()
                )));
            }
        }
        Ok(())
    }
}

fn resample_circle(cells: &SphereCells, f: &SphereFn) -> Result<Vec<Complex64>> {
    let q = cell_tolerance();
    let parts = crate::par::map_range(cells.len(), |i| {
        let (a, b) = cells.arc(i);
        let r = q.integrate(|t: f64| f(&[t.cos(), t.sin()]), a, b);
        (r, b - a)
    });
    parts
        .into_iter()
        .enumerate()
        .map(|(i, (r, w))| {
            let avg = r.value / w;
            if !(avg.re.is_finite() && avg.im.is_finite()) {
                return Err(Error::Domain(format!("kernel is not finite on cell {i}")));
            }
            if r.error > 1e-2 * r.value.norm().max(1e-12 * w) {
                return Err(Error::NonConvergence(format!(
                    "cell {i} average does not converge (error {:.2e}); |Ω| may not be integrable",
                    r.error
                )));
            }
            Ok(avg)
        })
        .collect()
}

fn resample_sphere(cells: &SphereCells, f: &SphereFn) -> Result<Vec<Complex64>> {
    let q = Adaptive { abs_tol: 1e-14, rel_tol: 1e-9, max_segments: 100 };
    let gl = crate::quad::gauss_legendre(4);
    let parts = crate::par::map_range(cells.len(), |i| {
        let ((t0, t1), (p0, p1)) = cells.patch(i);
        let (z0, z1) = (t1.cos(), t0.cos());
        let r = q.integrate(
            |z: f64| {
                let s = (1.0 - z * z).max(0.0).sqrt();
                gl.integrate(p0, p1, |p: f64| f(&[s * p.cos(), s * p.sin(), z]))
            },
            z0,
            z1,
        );
        (r, cells.measure(i))
    });
    parts
        .into_iter()
        .enumerate()
        .map(|(i, (r, m))| {
            let avg = r.value / m;
            if !(avg.re.is_finite() && avg.im.is_finite()) {
                return Err(Error::Domain(format!("kernel is not finite on cell {i}")));
            }
            if r.error > 1e-2 * r.value.norm().max(1e-12 * m) {
                return Err(Error::NonConvergence(format!("cell {i} average does not converge")));
            }
            Ok(avg)
        })
        .collect()
}

/// Built-in angular kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum CatalogueKernel {
    /// Ω ≡ value.
    Constant { value: f64 },
    /// cos(kθ) in the plane; for n = 3 the first coordinate.
    Cos { frequency: u32 },
    /// |sin θ|^{-α} in the plane; |u₃|^{-α} for n = 3.
    SinPower { alpha: f64 },
    /// sgn(cos θ) |sin θ|^{-α}.
    SignSplit { alpha: f64 },
    /// 2 on [0, π/2), -2/3 elsewhere.
    SplitArcs,
    /// Σ_{k=1}^{levels} 4^k on [2^{-3k} - 2^{-5k}, 2^{-3k}).
    LacunaryArcs { levels: u32 },
}

impl CatalogueKernel {
    pub fn name(&self) -> String {
        match self {
            CatalogueKernel::Constant { value } => format!("constant({value})"),
            CatalogueKernel::Cos { frequency } => format!("cos({frequency}θ)"),
            CatalogueKernel::SinPower { alpha } => format!("|sin θ|^-{alpha}"),
            CatalogueKernel::SignSplit { alpha } => format!("sgn(cos θ)|sin θ|^-{alpha}"),
            CatalogueKernel::SplitArcs => "split-arcs".into(),
            CatalogueKernel::LacunaryArcs { levels } => format!("lacunary-arcs({levels})"),
        }
    }

    pub fn build(&self, dim: usize, resolution: Resolution) -> Result<AngularKernel> {
        let name = self.name();
        let c = |v: f64| Complex64::new(v, 0.0);
        match *self {
            CatalogueKernel::Constant { value } => {
                let mut k = AngularKernel::constant(dim, c(value))?;
                k.label = name;
                Ok(k)
            }
            CatalogueKernel::Cos { frequency } => {
                let m = frequency as f64;
                let f: SphereFn = if dim == 2 {
                    Arc::new(move |u: &[f64]| c((m * u[1].atan2(u[0])).cos()))
                } else {
                    Arc::new(move |u: &[f64]| c(u[0]))
                };
                AngularKernel::from_fn(dim, &name, f, resolution)
            }
            CatalogueKernel::SinPower { alpha } => {
                if !(0.0..1.0).contains(&alpha) {
                    return domain(format!("sin_power needs 0 <= alpha < 1, got {alpha}"));
                }
                let f: SphereFn = Arc::new(move |u: &[f64]| c(u[u.len() - 1].abs().powf(-alpha)));
                AngularKernel::from_fn(dim, &name, f, resolution)
            }
            CatalogueKernel::SignSplit { alpha } => {
                if !(0.0..1.0).contains(&alpha) || dim != 2 {
                    return domain("sign_split needs n = 2 and 0 <= alpha < 1");
                }
                let f: SphereFn = Arc::new(move |u: &[f64]| {
                    let s = if u[0] >= 0.0 { 1.0 } else { -1.0 };
                    c(s * u[1].abs().powf(-alpha))
                });
                AngularKernel::from_fn(dim, &name, f, resolution)
            }
            CatalogueKernel::SplitArcs => {
                if dim != 2 {
                    return domain("split_arcs is a planar kernel");
                }
                let mut k = AngularKernel::from_arcs(
                    &name,
                    &[(0.0, PI / 2.0, c(2.0)), (PI / 2.0, TAU, c(-2.0 / 3.0))],
                )?;
                k.label = name;
                Ok(k)
            }
            CatalogueKernel::LacunaryArcs { levels } => {
                if dim != 2 || levels == 0 || levels > 60 {
                    return domain("lacunary_arcs needs n = 2 and 1 <= levels <= 60");
                }
                let mut arcs: Vec<(f64, f64, Complex64)> = (1..=levels as i32)
                    .map(|k| {
                        let b = 2f64.powi(-3 * k);
                        (b - 2f64.powi(-5 * k), b, c(4f64.powi(k)))
                    })
                    .collect();
                arcs.reverse();
                AngularKernel::from_arcs(&name, &arcs)
            }
        }
    }
}

/// Profiles of built-in radial factors.
#[derive(Clone)]
pub enum RadialProfile {
    Constant(f64),
    /// r^p.
    Power(f64),
    /// 1 + a r^p.
    OnePlusPower { coef: f64, exponent: f64 },
    /// offset + sin(log r).
    LogOscillation { offset: f64 },
    /// |log r|^p.
    AbsLogPower(f64),
    /// 2 - exp(-√r).
    SaturatingRoot,
    Custom { label: String, f: RadialFn },
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> Complex64 {
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            RadialProfile::Constant(c) => re(*c),
            RadialProfile::Power(p) => re(r.powf(*p)),
            RadialProfile::OnePlusPower { coef, exponent } => re(1.0 + coef * r.powf(*exponent)),
            RadialProfile::LogOscillation { offset } => re(offset + r.ln().sin()),
            RadialProfile::AbsLogPower(p) => re(r.ln().abs().powf(*p)),
            RadialProfile::SaturatingRoot => re(2.0 - (-r.sqrt()).exp()),
            RadialProfile::Custom { f, .. } => f(r),
        }
    }

    /// lim_{r→0} h(r) where it exists.
    pub fn natural_h0(&self) -> Option<Complex64> {
        let re = |x: f64| Some(Complex64::new(x, 0.0));
        match self {
            RadialProfile::Constant(c) => re(*c),
            RadialProfile::Power(p) if *p == 0.0 => re(1.0),
            RadialProfile::OnePlusPower { exponent, .. } if *exponent > 0.0 => re(1.0),
            RadialProfile::SaturatingRoot => re(1.0),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            RadialProfile::Constant(c) => format!("constant({c})"),
            RadialProfile::Power(p) => format!("r^{p}"),
            RadialProfile::OnePlusPower { coef, exponent } => format!("1+{coef}r^{exponent}"),
            RadialProfile::LogOscillation { offset } => format!("{offset}+sin(log r)"),
            RadialProfile::AbsLogPower(p) => format!("|log r|^{p}"),
            RadialProfile::SaturatingRoot => "2-exp(-sqrt r)".into(),
            RadialProfile::Custom { label, .. } => label.clone(),
        }
    }
}

/// h on (0, ∞) with class exponent σ, optional truncation ε and h(0).
#[derive(Debug, Clone)]
pub struct RadialFactor {
    pub profile: RadialProfile,
    pub sigma: f64,
    pub epsilon: f64,
    pub h0: Option<Complex64>,
}

impl RadialFactor {
    pub fn new(profile: RadialProfile) -> Self {
        let h0 = profile.natural_h0();
        RadialFactor { profile, sigma: 1.0, epsilon: 0.0, h0 }
    }

    pub fn unit() -> Self {
        Self::new(RadialProfile::Constant(1.0))
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// The factor forced to 0 on (0, ε].
    pub fn truncated(&self, epsilon: f64) -> Self {
        RadialFactor { epsilon, ..self.clone() }
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        if r <= self.epsilon {
            Complex64::new(0.0, 0.0)
        } else {
            self.profile.eval(r)
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.profile, RadialProfile::Constant(c) if c == 1.0) && self.epsilon == 0.0
    }

    pub fn label(&self) -> String {
        self.profile.label()
    }

    /// ∫_0^ε |h(r)| dr.
    pub fn abs_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let q = Adaptive::new(1e-15, 1e-10);
        let lo = a.max(self.epsilon);
        if b <= lo {
            return 0.0;
        }
        let mut breaks = vec![lo];
        let mut x = lo.max(b * 2f64.powi(-60));
        if lo == 0.0 {
            breaks.push(x);
        }
        while x * 2.0 < b {
            x *= 2.0;
            breaks.push(x);
        }
        breaks.push(b);
        q.integrate_with_breaks(|r: f64| self.eval(r).norm(), &breaks).value
    }

    /// Estimate of the class constant over the default dyadic range.
    pub fn class_constant(&self) -> Result<HClassEstimate> {
        let p = self.clone();
        hclass_constant(&move |r| p.eval(r), self.sigma, -30, 30, 4)
    }
}

/// Estimates of the three equivalent class-constant forms over a dyadic
/// probe range. These are estimates on the probed range only.
#[derive(Debug, Clone, Serialize)]
pub struct HClassEstimate {
    pub sigma: f64,
    /// sup R^{-1} ∫_R^{2R} |h|^σ dr.
    pub dyadic: f64,
    /// sup R^{-1} ∫_0^R |h|^σ dr (probed once per octave).
    pub initial: f64,
    /// sup ∫_R^{2R} |h|^σ dr/r.
    pub logarithmic: f64,
    pub growth_low: f64,
    pub growth_high: f64,
    pub accepted: bool,
    pub probes: Vec<(f64, f64)>,
}

const GROWTH_LIMIT: f64 = 0.05;

/// Probe the class condition ∫_R^{2R}|h|^σ ≤ C R on R = 2^j, j ∈ [j_min, j_max],
/// at `per_octave` probes per octave. Rejects when the dyadic averages grow
/// toward either end of the range.
pub fn hclass_constant(
    h: &(dyn Fn(f64) -> Complex64 + Sync),
    sigma: f64,
    j_min: i32,
    j_max: i32,
    per_octave: usize,
) -> Result<HClassEstimate> {
    if sigma < 1.0 || j_min >= j_max || per_octave == 0 {
        return domain("hclass_constant needs sigma >= 1 and j_min < j_max");
    }
    let q = Adaptive::new(1e-14, 1e-10);
    let g = |r: f64| h(r).norm().powf(sigma);
    let count = (j_max - j_min) as usize * per_octave + 1;
    let rows = crate::par::map_range(count, |i| {
        let lr = j_min as f64 + i as f64 / per_octave as f64;
        let rr = lr.exp2();
        let a = q.integrate(|s: f64| g(rr * s.exp()) * s.exp(), 0.0, LN_2).value;
        let c = q.integrate(|s: f64| g(rr * s.exp()), 0.0, LN_2).value;
        (lr, a, c)
    });
    let mut probes = Vec::with_capacity(count);
    let mut dyadic: f64 = 0.0;
    let mut logarithmic: f64 = 0.0;
    for &(lr, a, c) in &rows {
        if !a.is_finite() || !c.is_finite() {
            return domain(format!("h is not evaluable near r = 2^{lr}"));
        }
        dyadic = dyadic.max(a);
        logarithmic = logarithmic.max(c);
        probes.push((lr, a));
    }
    let initial = (j_min..=j_max)
        .map(|j| {
            let breaks: Vec<f64> = (0..=80).rev().map(|k| -(k as f64) * LN_2).collect();
            let rr = (j as f64).exp2();
            q.integrate_with_breaks(|s: f64| g(rr * s.exp()) * s.exp(), &breaks).value
        })
        .fold(0.0, f64::max);
    let block = 10 * per_octave;
    let growth_low = end_growth(&probes, block, true);
    let growth_high = end_growth(&probes, block, false);
    Ok(HClassEstimate {
        sigma,
        dyadic,
        initial,
        logarithmic,
        growth_low,
        growth_high,
        accepted: growth_low <= GROWTH_LIMIT && growth_high <= GROWTH_LIMIT && dyadic.is_finite(),
        probes,
    })
}

/// Growth exponent toward one end: log2 of the outermost block maximum over
/// the adjacent block maximum, per octave of separation.
fn end_growth(probes: &[(f64, f64)], block: usize, low: bool) -> f64 {
    if probes.len() < 2 * block || block == 0 {
        return 0.0;
    }
    let (outer, inner) = if low {
        (&probes[..block], &probes[block..2 * block])
    } else {
        let n = probes.len();
        (&probes[n - block..], &probes[n - 2 * block..n - block])
    };
    let max = |s: &[(f64, f64)]| s.iter().map(|p| p.1).fold(0.0, f64::max);
    let (a, b) = (max(outer), max(inner));
    if b <= 0.0 {
        return if a > 0.0 { f64::INFINITY } else { 0.0 };
    }
    let sep = (block as f64) * (probes[1].0 - probes[0].0);
    (a / b).log2() / sep
}

/// ∫_0^1 |h(t) - h(0)| dt/t on dyadic blocks with a geometric tail estimate.
/// Returns +∞ when the dyadic contributions show no decay toward 0.
pub fn dini_check(h: &RadialFactor) -> Result<f64> {
    let h0 = match h.h0 {
        Some(v) => v,
        None => return config("dini_check needs h(0) to be declared (radial.h0)"),
    };
    let q = Adaptive::new(1e-16, 1e-10);
    let levels = 60;
    let blocks: Vec<f64> = (0..levels)
        .map(|k| {
            let b = 2f64.powi(-k);
            q.integrate(|s: f64| (h.eval(b * s.exp()) - h0).norm(), -LN_2, 0.0).value
        })
        .collect();
    let total: f64 = blocks.iter().sum();
    let last = blocks[levels as usize - 1];
    let earlier = blocks[levels as usize - 11];
    if last == 0.0 {
        return Ok(total);
    }
    if earlier == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ratio = (last / earlier).powf(0.1);
    if ratio > 0.97 {
        return Ok(f64::INFINITY);
    }
    Ok(total + last * ratio / (1.0 - ratio))
}

/// Bounded non-convolution factor k(x, y) with its declared sup bound.
#[derive(Clone)]
pub struct BoundedFactor {
    pub label: String,
    pub f: PairFn,
    pub sup_bound: f64,
}

impl fmt::Debug for BoundedFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundedFactor({}, ≤ {})", self.label, self.sup_bound)
    }
}

impl BoundedFactor {
    pub fn cos_dot() -> Self {
        BoundedFactor {
            label: "cos(x·y)".into(),
            f: Arc::new(|x, y| Complex64::new((x[0] * y[0] + x[1] * y[1]).cos(), 0.0)),
            sup_bound: 1.0,
        }
    }

    pub fn unit() -> Self {
        BoundedFactor { label: "1".into(), f: Arc::new(|_, _| Complex64::new(1.0, 0.0)), sup_bound: 1.0 }
    }

    /// Largest |k| found on the probe pairs, erroring above the declared bound.
    pub fn check_bound(&self, pairs: &[([f64; 2], [f64; 2])]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (x, y) in pairs {
            let v = (self.f)(*x, *y).norm();
            if v > self.sup_bound * (1.0 + 1e-12) {
                return domain(format!("|k| = {v} exceeds the declared bound {}", self.sup_bound));
            }
            worst = worst.max(v);
        }
        Ok(worst)
    }
}

/// Ω, h and an optional non-convolution factor.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub omega: Arc<AngularKernel>,
    pub radial: RadialFactor,
    pub nonconv: Option<BoundedFactor>,
}

impl KernelSpec {
    pub fn new(omega: AngularKernel, radial: RadialFactor) -> Self {
        KernelSpec { omega: Arc::new(omega), radial, nonconv: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn eval_examples() {
        let one = AngularKernel::constant(2, c(1.0)).unwrap();
        assert_eq!(one.eval(&[3.0, 4.0]).unwrap(), c(1.0));
        let cos = CatalogueKernel::Cos { frequency: 1 }.build(2, Resolution::circle(256)).unwrap();
        assert!((cos.eval(&[2.0, 0.0]).unwrap() - c(1.0)).norm() < 1e-15);
        let s = CatalogueKernel::SinPower { alpha: 0.5 }.build(2, Resolution::circle(256)).unwrap();
        assert_eq!(s.eval(&[0.0, 5.0]).unwrap(), s.eval(&[0.0, 1.0]).unwrap());
        assert!(one.eval(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn rho_examples() {
        let k = AngularKernel::from_arcs("k", &[(0.0, 1.0, c(16.0))]).unwrap();
        assert!((k.rho(&[1.0, 0.5]).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(k.rho(&[-1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn norms_of_constants() {
        let one = AngularKernel::constant(2, c(1.0)).unwrap();
        assert!((one.llogl_norm().unwrap() - TAU).abs() < 1e-13);
        let e = AngularKernel::constant(2, c(std::f64::consts::E)).unwrap();
        assert!((e.llogl_norm().unwrap() - 4.0 * PI * std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn cancellation_examples() {
        let cos = CatalogueKernel::Cos { frequency: 1 }.build(2, Resolution::circle(512)).unwrap();
        assert!(cos.cancellation().unwrap().norm() < 1e-10);
        let split = CatalogueKernel::SplitArcs.build(2, Resolution::default()).unwrap();
        assert!(split.cancellation().unwrap().norm() < 1e-14);
        let one = AngularKernel::constant(2, c(1.0)).unwrap();
        assert!((one.cancellation().unwrap() - c(TAU)).norm() < 1e-14);
        assert!(one.check_cancellation(1e-10).is_err());
    }

    #[test]
    fn c_omega_split_example() {
        let split = CatalogueKernel::SplitArcs.build(2, Resolution::default()).unwrap();
        let v = split.c_omega().unwrap();
        assert!((v.re - PI / 2.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn singular_kernel_llogl_is_stable_across_resolutions() {
        let a = CatalogueKernel::SinPower { alpha: 0.5 }.build(2, Resolution::circle(1024)).unwrap();
        let b = CatalogueKernel::SinPower { alpha: 0.5 }.build(2, Resolution::circle(4096)).unwrap();
        let (x, y) = (a.llogl_norm().unwrap(), b.llogl_norm().unwrap());
        assert!((x - y).abs() < 1e-6 * y, "{x} vs {y}");
        let l1 = b.l1_norm().unwrap();
        // ∫|sin θ|^{-1/2} dθ = 2 B(1/4, 1/2).
        let beta = 5.244_115_108_584_24;
        assert!((l1 - 2.0 * beta).abs() < 1e-8 * l1, "{l1}");
    }

    #[test]
    fn non_integrable_kernel_is_rejected() {
        let f: SphereFn = Arc::new(|u: &[f64]| Complex64::new(1.0 / u[1].abs(), 0.0));
        assert!(AngularKernel::from_fn(2, "bad", f, Resolution::circle(64)).is_err());
    }

    #[test]
    fn hclass_examples() {
        let e = hclass_constant(&|_| c(3.0), 2.0, -10, 10, 2).unwrap();
        assert!((e.dyadic - 9.0).abs() < 1e-10 && e.accepted);
        let r = hclass_constant(&|r: f64| c(r.powf(-0.5)), 1.0, -30, 30, 4).unwrap();
        assert!(!r.accepted);
        let o = hclass_constant(&|r: f64| c(2.0 + r.ln().sin()), 2.0, -30, 30, 4).unwrap();
        assert!(o.accepted, "{o:?}");
        assert!(o.dyadic >= 1.0 && o.dyadic <= 9.0);
    }

    #[test]
    fn hclass_forms_are_comparable() {
        let h = |r: f64| c(2.0 + r.ln().sin());
        let e = hclass_constant(&h, 1.0, -20, 20, 4).unwrap();
        assert!(e.logarithmic <= e.dyadic * (1.0 + 1e-9) && e.dyadic <= 2.0 * e.logarithmic);
        assert!(e.initial <= e.dyadic * (1.0 + 1e-6) && e.dyadic <= 2.0 * e.initial);
    }

    #[test]
    fn dini_examples() {
        assert_eq!(dini_check(&RadialFactor::unit()).unwrap(), 0.0);
        let lin = RadialFactor::new(RadialProfile::OnePlusPower { coef: 1.0, exponent: 1.0 });
        assert!((dini_check(&lin).unwrap() - 1.0).abs() < 1e-9);
        let root = RadialFactor::new(RadialProfile::OnePlusPower { coef: 1.0, exponent: 0.5 });
        assert!((dini_check(&root).unwrap() - 2.0).abs() < 1e-7);
        let no_h0 = RadialFactor::new(RadialProfile::LogOscillation { offset: 2.0 });
        assert!(matches!(dini_check(&no_h0), Err(Error::Config(_))));
        let slow = RadialFactor {
            profile: RadialProfile::Custom {
                label: "1+1/|log r|".into(),
                f: Arc::new(|r: f64| c(1.0 + 1.0 / r.ln().abs().max(1.0))),
            },
            sigma: 1.0,
            epsilon: 0.0,
            h0: Some(c(1.0)),
        };
        assert!(dini_check(&slow).unwrap().is_infinite());
    }

    #[test]
    fn truncation_zeroes_factor() {
        let h = RadialFactor::new(RadialProfile::Power(-0.25)).truncated(0.5);
        assert_eq!(h.eval(0.5), c(0.0));
        assert_eq!(h.eval(0.1), c(0.0));
        assert!(h.eval(0.6).norm() > 0.0);
    }

    #[test]
    fn lacunary_arcs_layout() {
        let k = CatalogueKernel::LacunaryArcs { levels: 3 }.build(2, Resolution::default()).unwrap();
        let t = 2f64.powi(-3) - 0.5 * 2f64.powi(-5);
        assert_eq!(k.eval(&[t.cos(), t.sin()]).unwrap(), c(4.0));
        let t = 2f64.powi(-6) - 0.5 * 2f64.powi(-10);
        assert_eq!(k.eval(&[t.cos(), t.sin()]).unwrap(), c(16.0));
        assert_eq!(k.eval(&[0.0, 1.0]).unwrap(), c(0.0));
    }
}
