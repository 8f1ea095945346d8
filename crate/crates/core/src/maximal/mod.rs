//! Maximal operators on planar grids: Hardy-Littlewood, M_H, the starlike
//! M_{S,H}, fractional variants, and empirical norm probes.
//!
//! Suprema over r > 0 or t > 0 are taken over a finite probe set, so every
//! output is a lower bound of the continuous maximal function. Integrals use
//! node classification: the node x - y counts when its offset y lies in the
//! probed set.

pub mod grid;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use grid::{random_bumps, GridFunction};

use crate::cover::Rectangle;
use crate::error::{domain, Result};
use crate::kernel::{AngularKernel, RadialFactor};
use crate::quad::Adaptive;
use crate::starset::StarSet;
use crate::trend;
use crate::weights::Weight;

pub type PairFn = Arc<dyn Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync>;

/// Nonnegative factor H(x, y).
#[derive(Clone)]
pub enum Factor {
    Unit,
    Constant(f64),
    /// |h(|y|)|.
    Radial(RadialFactor),
    /// |Φ(y/|y|)|.
    Angular(Arc<AngularKernel>),
    /// |y|^a.
    DistancePower(f64),
    General { label: String, f: PairFn },
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Factor {
    pub fn label(&self) -> String {
        match self {
            Factor::Unit => "1".into(),
            Factor::Constant(c) => format!("{c}"),
            Factor::Radial(h) => format!("|h(|y|)|, h = {}", h.label()),
            Factor::Angular(k) => format!("|Φ(y)|, Φ = {}", k.label()),
            Factor::DistancePower(a) => format!("|y|^{a}"),
            Factor::General { label, .. } => label.clone(),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        matches!(self, Factor::General { .. })
    }

    pub fn eval(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
        match self {
            Factor::Unit => 1.0,
            Factor::Constant(c) => *c,
            Factor::Radial(h) if r == 0.0 && h.epsilon == 0.0 => h.profile.eval(0.0).norm(),
            Factor::Radial(h) => h.eval(r).norm(),
            Factor::Angular(k) => k.eval(&y).map(|v| v.norm()).unwrap_or(f64::NAN),
            Factor::DistancePower(a) => r.powf(*a),
            Factor::General { f, .. } => f(x, y),
        }
    }

    /// Average of H(x, ·)^σ over the cell [-h_x/2, h_x/2] × [-h_y/2, h_y/2],
    /// used at y = 0 when H is singular there.
    pub fn cell_average(&self, x: [f64; 2], spacing: [f64; 2], sigma: f64) -> f64 {
        let (a, b) = (0.5 * spacing[0], 0.5 * spacing[1]);
        let cell = Rectangle::axis_aligned(&[a, b]);
        let corner = (b / a).atan();
        let mut breaks = vec![0.0, corner, 0.5 * PI, PI - corner, PI, PI + corner, 1.5 * PI, 2.0 * PI - corner, 2.0 * PI];
        breaks.sort_by(f64::total_cmp);
        let q = Adaptive { abs_tol: 0.0, rel_tol: 1e-8, max_segments: 2000 };
        let outer = |theta: f64| {
            let u = [theta.cos(), theta.sin()];
            let ext = cell.radial_extent(&u);
            q.integrate(|r: f64| self.eval(x, [r * u[0], r * u[1]]).powf(sigma) * r, 0.0, ext).value
        };
        q.integrate_with_breaks(outer, &breaks).value / (4.0 * a * b)
    }

    fn value_pow(&self, x: [f64; 2], y: [f64; 2], spacing: [f64; 2], sigma: f64) -> f64 {
        let v = self.eval(x, y);
        if v.is_finite() {
            if sigma == 1.0 {
                v
            } else {
                v.powf(sigma)
            }
        } else if y == [0.0, 0.0] {
            self.cell_average(x, spacing, sigma)
        } else {
            0.0
        }
    }
}

/// Probe set for the suprema and the fractional order.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalConfig {
    /// Radii r (for M, M_H) or dilations t (for M_{S,H}), ascending.
    pub radii: Vec<f64>,
    pub mu: f64,
}

impl MaximalConfig {
    pub fn dyadic(j_min: i32, j_max: i32) -> Self {
        MaximalConfig { radii: (j_min..=j_max).map(|j| 2f64.powi(j)).collect(), mu: 0.0 }
    }

    /// Dyadic radii from about four grid spacings up to the grid diameter.
    pub fn for_grid(g: &GridFunction) -> Self {
        let h = g.spacing[0].max(g.spacing[1]);
        let diam = ((g.spacing[0] * (g.shape[0] - 1) as f64).powi(2)
            + (g.spacing[1] * (g.shape[1] - 1) as f64).powi(2))
        .sqrt();
        Self::dyadic((4.0 * h).log2().ceil() as i32, diam.log2().ceil() as i32)
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0)) {
            return domain("probe radii must be positive and nonempty");
        }
        if !(self.mu >= 0.0 && self.mu < 2.0) {
            return domain(format!("fractional order must lie in [0, 2), got {}", self.mu));
        }
        Ok(())
    }
}

/// Which set the offsets y are measured against.
#[derive(Clone, Copy)]
enum Shape<'a> {
    /// |y| < r.
    Ball,
    /// y ∈ tS, closed.
    Star(&'a StarSet),
    /// y ∈ tR, closed.
    Rect(&'a Rectangle),
}

struct Offsets {
    di: Vec<i64>,
    dj: Vec<i64>,
    /// Values H(·, y)^σ when H does not depend on x.
    table: Option<Vec<f64>>,
    /// Number of offsets inside each probe set.
    cuts: Vec<usize>,
    norms: Vec<f64>,
}

impl Offsets {
    fn build(g: &GridFunction, shape: Shape, cfg: &MaximalConfig, factor: Option<&Factor>, sigma: f64) -> Result<Self> {
        cfg.validate()?;
        let mut radii = cfg.radii.clone();
        radii.sort_by(f64::total_cmp);
        let r_max = *radii.last().unwrap();
        let (nx, ny) = (g.shape[0] as i64, g.shape[1] as i64);
        let mut items: Vec<(f64, i64, i64)> = Vec::new();
        for di in -(nx - 1)..nx {
            for dj in -(ny - 1)..ny {
                let y = [di as f64 * g.spacing[0], dj as f64 * g.spacing[1]];
                let key = match shape {
                    Shape::Ball => (y[0] * y[0] + y[1] * y[1]).sqrt(),
                    Shape::Star(s) => s.gauge(&y)?,
                    Shape::Rect(r) => r.gauge(&y),
                };
                if key <= r_max {
                    items.push((key, di, dj));
                }
            }
        }
        items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let cuts = radii
            .iter()
            .map(|&r| match shape {
                Shape::Ball => items.partition_point(|it| it.0 < r),
                _ => items.partition_point(|it| it.0 <= r),
            })
            .collect();
        let norms = radii.iter().map(|r| r.powf(-(2.0 - cfg.mu))).collect();
        let table = match factor {
            Some(f) if !f.depends_on_x() => Some(
                items
                    .iter()
                    .map(|it| f.value_pow([0.0, 0.0], [it.1 as f64 * g.spacing[0], it.2 as f64 * g.spacing[1]], g.spacing, sigma))
                    .collect(),
            ),
            _ => None,
        };
        Ok(Offsets {
            di: items.iter().map(|it| it.1).collect(),
            dj: items.iter().map(|it| it.2).collect(),
            table,
            cuts,
            norms,
        })
    }
}

/// sup over probes of norm · Σ_{y in probe set} H(x, y) a(x - y) h_x h_y at every node.
fn apply(g: &GridFunction, a: &[f64], off: &Offsets, factor: Option<&Factor>) -> Vec<f64> {
    let (nx, ny) = (g.shape[0] as i64, g.shape[1] as i64);
    let area = g.cell_area();
    crate::par::map_range(g.len(), |k| {
        let (i, j) = ((k / g.shape[1]) as i64, (k % g.shape[1]) as i64);
        let x = g.node(i as usize, j as usize);
        let mut acc = 0.0;
        let mut best = 0.0f64;
        let mut start = 0;
        for (s, &cut) in off.cuts.iter().enumerate() {
            for q in start..cut {
                let (si, sj) = (i - off.di[q], j - off.dj[q]);
                if si < 0 || sj < 0 || si >= nx || sj >= ny {
                    continue;
                }
                let v = a[(si * ny + sj) as usize];
                if v == 0.0 {
                    continue;
                }
                acc += match (factor, &off.table) {
                    (None, _) => v,
                    (Some(_), Some(t)) => t[q] * v,
                    (Some(f), None) => {
                        let y = [off.di[q] as f64 * g.spacing[0], off.dj[q] as f64 * g.spacing[1]];
                        f.value_pow(x, y, g.spacing, 1.0) * v
                    }
                };
            }
            start = cut.max(start);
            best = best.max(off.norms[s] * acc * area);
        }
        best
    })
}

/// Mf(x) = sup_r r^{-n} ∫_{|y|<r} |f(x - y)| dy over the probe radii.
pub fn hl_max(f: &GridFunction, cfg: &MaximalConfig) -> Result<GridFunction> {
    let cfg = MaximalConfig { mu: 0.0, ..cfg.clone() };
    let off = Offsets::build(f, Shape::Ball, &cfg, None, 1.0)?;
    Ok(f.from_real(apply(f, &f.abs(), &off, None)))
}

/// M_H f(x) = sup_r r^{-n} ∫_{|y|<r} H(x, y)|f(x - y)| dy.
pub fn m_h(f: &GridFunction, h: &Factor, cfg: &MaximalConfig) -> Result<GridFunction> {
    m_fractional(f, h, &MaximalConfig { mu: 0.0, ..cfg.clone() }, None)
}

/// M_{S,H} f(x) = sup_t t^{-n} ∫_{tS} H(x, y)|f(x - y)| dy.
pub fn m_sh(f: &GridFunction, star: &StarSet, h: &Factor, cfg: &MaximalConfig) -> Result<GridFunction> {
    m_fractional(f, h, &MaximalConfig { mu: 0.0, ..cfg.clone() }, Some(star))
}

/// sup_t t^{-n} ∫_{tR} H(x, y)|f(x - y)| dy for an origin-centered rectangle.
pub fn m_rect(f: &GridFunction, rect: &Rectangle, h: &Factor, cfg: &MaximalConfig) -> Result<GridFunction> {
    let off = Offsets::build(f, Shape::Rect(rect), cfg, Some(h), 1.0)?;
    Ok(f.from_real(apply(f, &f.abs(), &off, Some(h))))
}

/// Fractional variants with normalization r^{-(n-μ)}; starlike when a star set is given.
pub fn m_fractional(f: &GridFunction, h: &Factor, cfg: &MaximalConfig, star: Option<&StarSet>) -> Result<GridFunction> {
    if star.is_some_and(|s| s.dim() != 2) {
        return domain("grid maximal operators need a planar star set");
    }
    let shape = star.map(Shape::Star).unwrap_or(Shape::Ball);
    let off = Offsets::build(f, shape, cfg, Some(h), 1.0)?;
    Ok(f.from_real(apply(f, &f.abs(), &off, Some(h))))
}

/// sup over nodes and probe radii of r^{-n} Σ_{|y|<r} H(x, y)^σ h_x h_y, over
/// the same offsets the grid operators use.
pub fn discrete_hcube(g: &GridFunction, h: &Factor, sigma: f64, cfg: &MaximalConfig) -> Result<f64> {
    let cfg = MaximalConfig { mu: 0.0, ..cfg.clone() };
    let off = Offsets::build(g, Shape::Ball, &cfg, Some(h), sigma)?;
    let area = g.cell_area();
    let nodes: Vec<usize> = if h.depends_on_x() { (0..g.len()).collect() } else { vec![0] };
    let vals = crate::par::map(&nodes, |&k| {
        let x = g.node_at(k);
        let mut acc = 0.0;
        let mut best = 0.0f64;
        let mut start = 0;
        for (s, &cut) in off.cuts.iter().enumerate() {
            for q in start..cut {
                acc += match &off.table {
                    Some(t) => t[q],
                    None => h.value_pow(x, [off.di[q] as f64 * g.spacing[0], off.dj[q] as f64 * g.spacing[1]], g.spacing, sigma),
                };
            }
            start = cut.max(start);
            best = best.max(off.norms[s] * acc * area);
        }
        best
    });
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct HcubeReport {
    pub sigma: f64,
    pub estimate: f64,
    pub growth_low: f64,
    pub growth_high: f64,
    pub rejected: bool,
    /// (r, sup over centers of r^{-n} ∫_{|y|<r} H^σ).
    pub probes: Vec<(f64, f64)>,
}

/// Continuum probe of sup r^{-n} ∫_{|y|<r} H(x, y)^σ dy by polar quadrature.
pub fn hcube_check(h: &Factor, sigma: f64, radii: &[f64], centers: &[[f64; 2]]) -> Result<HcubeReport> {
    if !(sigma > 1.0) {
        return domain(format!("the cube condition needs σ > 1, got {sigma}"));
    }
    if radii.is_empty() {
        return domain("no probe radii");
    }
    let centers: Vec<[f64; 2]> = if h.depends_on_x() { centers.to_vec() } else { vec![[0.0, 0.0]] };
    let q = Adaptive { abs_tol: 0.0, rel_tol: 1e-9, max_segments: 1000 };
    let ball_integral = |x: [f64; 2], r: f64| -> f64 {
        match h {
            Factor::Unit => PI * r * r,
            Factor::Constant(c) => c.powf(sigma) * PI * r * r,
            Factor::Radial(hr) => {
                let mut breaks = vec![0.0];
                let mut s = r * 2f64.powi(-60);
                while s < r {
                    breaks.push(s);
                    s *= 2.0;
                }
                breaks.push(r);
                2.0 * PI * q.integrate_with_breaks(|s: f64| hr.eval(s).norm().powf(sigma) * s, &breaks).value
            }
            Factor::Angular(k) => {
                let norm = k.sphere_integral(|v| num_complex::Complex64::new(v.norm().powf(sigma), 0.0));
                0.5 * r * r * norm.map(|v| v.re).unwrap_or(f64::INFINITY)
            }
            Factor::DistancePower(a) => {
                let e = a * sigma + 2.0;
                if e <= 0.0 {
                    f64::INFINITY
                } else {
                    2.0 * PI * r.powf(e) / e
                }
            }
            Factor::General { .. } => {
                let outer = |theta: f64| {
                    let u = [theta.cos(), theta.sin()];
                    q.integrate(|s: f64| h.eval(x, [s * u[0], s * u[1]]).powf(sigma) * s, 0.0, r).value
                };
                q.integrate(outer, 0.0, 2.0 * PI).value
            }
        }
    };
    let mut probes = Vec::with_capacity(radii.len());
    for &r in radii {
        let v = centers.iter().map(|&x| ball_integral(x, r) / (r * r)).fold(0.0, f64::max);
        probes.push((r, v));
    }
    probes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let samples: Vec<(f64, f64)> = probes.iter().map(|(r, v)| (r.log2(), *v)).collect();
    let third = (samples.len() / 3).max(2).min(samples.len());
    let growth_low = -trend::block_growth(&samples[..third], 1);
    let growth_high = trend::block_growth(&samples[samples.len() - third..], 1);
    let estimate = probes.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(HcubeReport {
        sigma,
        estimate,
        growth_low,
        growth_high,
        rejected: !estimate.is_finite() || growth_low > 0.05 || growth_high > 0.05,
        probes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub sigma: f64,
    /// Discrete cube constant on the grid's offsets.
    pub c_h: f64,
    /// max over nodes of lhs / rhs (≤ 1 when the inequality holds).
    pub worst_ratio: f64,
    pub violations: usize,
    pub nodes: usize,
}

/// M_H f ≤ C_H^{1/σ} (M(|f|^{σ'}))^{1/σ'} at every node, with C_H the
/// discrete cube constant so that both sides use the same sums.
pub fn pointwise_domination(f: &GridFunction, h: &Factor, sigma: f64, cfg: &MaximalConfig) -> Result<DominationReport> {
    if !(sigma > 1.0) {
        return domain(format!("domination needs σ > 1, got {sigma}"));
    }
    let s_conj = sigma / (sigma - 1.0);
    let lhs = m_h(f, h, cfg)?;
    let c_h = discrete_hcube(f, h, sigma, cfg)?;
    let powered = f.from_real(f.abs().iter().map(|v| v.powf(s_conj)).collect());
    let m = hl_max(&powered, cfg)?;
    let mut worst = 0.0f64;
    let mut violations = 0;
    for k in 0..f.len() {
        let l = lhs.values[k].re;
        let r = c_h.powf(1.0 / sigma) * m.values[k].re.powf(1.0 / s_conj);
        if l > r * (1.0 + 1e-12) + 1e-300 {
            violations += 1;
        }
        if r > 0.0 {
            worst = worst.max(l / r);
        }
    }
    Ok(DominationReport { sigma, c_h, worst_ratio: worst, violations, nodes: f.len() })
}

pub type GridOperator<'a> = dyn Fn(&GridFunction) -> Result<GridFunction> + Sync + 'a;

#[derive(Debug, Clone, Serialize)]
pub struct NormProbe {
    pub p: f64,
    pub weight: String,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub skipped: usize,
}

/// max over the test set of ‖op f‖_{p,w} / ‖f‖_{p,w}; a lower bound of the
/// operator norm. Zero-norm inputs are skipped and counted.
pub fn empirical_norm(op: &GridOperator, p: f64, w: &Weight, tests: &[GridFunction]) -> Result<NormProbe> {
    if tests.is_empty() {
        return domain("empty test set");
    }
    let mut ratios = Vec::new();
    let mut skipped = 0;
    for f in tests {
        let d = f.weighted_norm(p, w);
        if d == 0.0 {
            skipped += 1;
            continue;
        }
        ratios.push(op(f)?.weighted_norm(p, w) / d);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(NormProbe { p, weight: w.label(), ratios, max_ratio, skipped })
}

#[derive(Debug, Clone, Serialize)]
pub struct VectorProbe {
    pub p: f64,
    pub q: f64,
    pub families: usize,
    pub family_size: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub spread: f64,
}

/// ‖(Σ|op f_j|^q)^{1/q}‖_{p,w} / ‖(Σ|f_j|^q)^{1/q}‖_{p,w} over random families.
pub fn vector_valued_probe(
    op: &GridOperator,
    p: f64,
    q: f64,
    w: &Weight,
    families: &[Vec<GridFunction>],
) -> Result<VectorProbe> {
    if families.is_empty() || families[0].is_empty() {
        return domain("vector-valued probe needs nonempty families");
    }
    let combine = |fs: &[GridFunction]| -> GridFunction {
        let g = &fs[0];
        let vals = (0..g.len()).map(|k| fs.iter().map(|f| f.values[k].norm().powf(q)).sum::<f64>().powf(1.0 / q)).collect();
        g.from_real(vals)
    };
    let mut ratios = Vec::with_capacity(families.len());
    for fam in families {
        let images: Vec<GridFunction> = fam.iter().map(op).collect::<Result<_>>()?;
        let num = combine(&images).weighted_norm(p, w);
        let den = combine(fam).weighted_norm(p, w);
        if den > 0.0 {
            ratios.push(num / den);
        }
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let median_ratio = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let max_ratio = sorted.last().copied().unwrap_or(0.0);
    Ok(VectorProbe {
        p,
        q,
        families: families.len(),
        family_size: families[0].len(),
        ratios,
        max_ratio,
        median_ratio,
        spread: if median_ratio > 0.0 { max_ratio / median_ratio } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{CatalogueKernel, RadialProfile, Resolution};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(nodes: usize) -> GridFunction {
        GridFunction::centered(10.0, nodes).unwrap()
    }

    fn bumps(seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_bumps(&grid(33), 4, &mut rng)
    }

    #[test]
    fn unit_factor_matches_hardy_littlewood() {
        let f = bumps(1);
        let cfg = MaximalConfig::for_grid(&f);
        let a = hl_max(&f, &cfg).unwrap();
        let b = m_h(&f, &Factor::Unit, &cfg).unwrap();
        assert_eq!(a.values, b.values);
        let c = m_h(&f, &Factor::Radial(RadialFactor::new(RadialProfile::Constant(2.0))), &cfg).unwrap();
        for k in 0..f.len() {
            assert_eq!(c.values[k].re, 2.0 * a.values[k].re);
        }
        let d = m_fractional(&f, &Factor::Unit, &cfg.clone().with_mu(0.0), None).unwrap();
        assert_eq!(d.values, b.values);
    }

    #[test]
    fn constant_function_gives_ball_volume() {
        let f = GridFunction::centered(40.0, 161).unwrap().with_fn(|_| Complex64::new(1.0, 0.0));
        let cfg = MaximalConfig::dyadic(2, 3);
        let m = hl_max(&f, &cfg).unwrap();
        let center = m.values[f.index(80, 80)].re;
        assert!((center - PI).abs() < 0.05 * PI, "{center}");
    }

    #[test]
    fn unit_ball_star_matches_balls() {
        let star = StarSet::new(Arc::new(AngularKernel::constant(2, Complex64::new(1.0, 0.0)).unwrap()));
        let f = bumps(2);
        let cfg = MaximalConfig::for_grid(&f);
        let a = hl_max(&f, &cfg).unwrap();
        let b = m_sh(&f, &star, &Factor::Unit, &cfg).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn domination_holds() {
        let f = bumps(3);
        let cfg = MaximalConfig::for_grid(&f);
        let k = Arc::new(CatalogueKernel::SinPower { alpha: 0.25 }.build(2, Resolution::default()).unwrap());
        for h in [
            Factor::DistancePower(-0.25),
            Factor::Angular(k),
            Factor::Radial(RadialFactor::new(RadialProfile::LogOscillation { offset: 2.0 })),
        ] {
            let rep = pointwise_domination(&f, &h, 2.0, &cfg).unwrap();
            assert_eq!(rep.violations, 0, "{h:?} {rep:?}");
            assert!(rep.worst_ratio <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn hcube_closed_forms() {
        let r = hcube_check(&Factor::Constant(2.0), 2.0, &[0.5, 1.0, 4.0], &[]).unwrap();
        assert!((r.estimate - 4.0 * PI).abs() < 1e-12);
        let k = Arc::new(CatalogueKernel::Cos { frequency: 1 }.build(2, Resolution::default()).unwrap());
        let r = hcube_check(&Factor::Angular(k), 2.0, &[1.0, 2.0], &[]).unwrap();
        // (1/n) ∫ cos² = π/2
        assert!((r.estimate - 0.5 * PI).abs() < 1e-3);
        let r = hcube_check(&Factor::DistancePower(-0.5), 2.0, &[0.01, 0.1, 1.0, 10.0], &[]).unwrap();
        assert!(r.rejected);
    }

    #[test]
    fn sublinear_and_monotone() {
        let (f, g) = (bumps(4), bumps(5));
        let cfg = MaximalConfig::for_grid(&f);
        let mf = hl_max(&f, &cfg).unwrap();
        let mg = hl_max(&g, &cfg).unwrap();
        let msum = hl_max(&f.add(&g).unwrap(), &cfg).unwrap();
        for k in 0..f.len() {
            assert!(msum.values[k].re <= mf.values[k].re + mg.values[k].re + 1e-12);
        }
        let big = f.with_fn(|_| Complex64::new(10.0, 0.0));
        let mb = hl_max(&big, &cfg).unwrap();
        for k in 0..f.len() {
            assert!(mf.values[k].re <= mb.values[k].re);
        }
    }

    #[test]
    fn fractional_order_is_checked() {
        let f = bumps(6);
        let cfg = MaximalConfig::for_grid(&f).with_mu(2.0);
        assert!(m_fractional(&f, &Factor::Unit, &cfg, None).is_err());
    }

    #[test]
    fn identity_norm_ratio_is_one() {
        let tests = vec![bumps(7), bumps(8)];
        let id = |f: &GridFunction| Ok(f.clone());
        let probe = empirical_norm(&id, 2.0, &Weight::unit(), &tests).unwrap();
        assert!((probe.max_ratio - 1.0).abs() < 1e-14);
    }
}
