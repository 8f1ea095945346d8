//! Origin-centered rectangles, stratified covers of S_Ω and the
//! rectangle-average condition for kernel factors.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernel::{AngularKernel, RadialFactor};
use crate::quad::Adaptive;
use crate::sphere::SphereCells;
use crate::starset::StarSet;
use crate::trend;

/// Origin-centered box with orthonormal axes (rows of `axes`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub axes: Vec<Vec<f64>>,
    pub half_extents: Vec<f64>,
}

impl Rectangle {
    /// Planar rectangle whose first axis points at `angle`.
    pub fn planar(angle: f64, a: f64, b: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rectangle { axes: vec![vec![c, s], vec![-s, c]], half_extents: vec![a, b] }
    }

    pub fn axis_aligned(half: &[f64]) -> Self {
        let n = half.len();
        let axes = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Rectangle { axes, half_extents: half.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.half_extents.len()
    }

    /// |R| = 2^n ∏ half-extents.
    pub fn measure(&self) -> f64 {
        self.half_extents.iter().map(|h| 2.0 * h).product()
    }

    /// max_i |y·e_i| / a_i; y ∈ R iff the gauge is at most 1.
    pub fn gauge(&self, y: &[f64]) -> f64 {
        self.axes
            .iter()
            .zip(&self.half_extents)
            .map(|(e, h)| e.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs() / h)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.gauge(y) <= 1.0
    }

    pub fn dilate(&self, lambda: f64) -> Self {
        Rectangle {
            axes: self.axes.clone(),
            half_extents: self.half_extents.iter().map(|h| h * lambda).collect(),
        }
    }

    pub fn longest_half(&self) -> f64 {
        self.half_extents.iter().copied().fold(0.0, f64::max)
    }

    /// Angle of the first axis in [0, π) (n = 2).
    pub fn angle(&self) -> f64 {
        let a = self.axes[0][1].atan2(self.axes[0][0]).rem_euclid(PI);
        if a >= PI {
            0.0
        } else {
            a
        }
    }

    /// Angle of the longest axis measured from the first coordinate axis, in [0, π/2].
    pub fn major_axis_deviation(&self) -> f64 {
        let i = if self.half_extents[0] >= self.half_extents[1] { 0 } else { 1 };
        let a = self.axes[i][1].atan2(self.axes[i][0]).rem_euclid(PI);
        a.min(PI - a)
    }

    /// Closed corner polyline (n = 2).
    pub fn corners(&self) -> Vec<[f64; 2]> {
        let (u, v) = (&self.axes[0], &self.axes[1]);
        let (a, b) = (self.half_extents[0], self.half_extents[1]);
        let p = |s: f64, t: f64| [s * a * u[0] + t * b * v[0], s * a * u[1] + t * b * v[1]];
        vec![p(1.0, 1.0), p(-1.0, 1.0), p(-1.0, -1.0), p(1.0, -1.0), p(1.0, 1.0)]
    }

    /// Distance from the origin to the boundary along the unit direction u
    /// (the radial function of the rectangle).
    pub fn radial_extent(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }

    /// ∫_{arc} r_R(θ)² dθ for a planar rectangle, in closed form.
    pub fn radial_sq_integral(&self, from: f64, to: f64) -> f64 {
        let (a, b) = (self.half_extents[0], self.half_extents[1]);
        let phi = self.axes[0][1].atan2(self.axes[0][0]);
        let (p0, p1) = (from - phi, to - phi);
        let corner = (b / a).atan();
        let mut breaks = vec![p0, p1];
        let k0 = ((p0 - corner) / PI).floor() as i64 - 1;
        let k1 = ((p1 + corner) / PI).ceil() as i64 + 1;
        for k in k0..=k1 {
            for c in [k as f64 * PI - corner, k as f64 * PI + corner] {
                if c > p0 && c < p1 {
                    breaks.push(c);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            let (x, y) = (w[0], w[1]);
            if y <= x {
                continue;
            }
            let mid = 0.5 * (x + y);
            if a * mid.sin().abs() <= b * mid.cos().abs() {
                acc += a * a * (y.tan() - x.tan());
            } else {
                acc += b * b * (1.0 / x.tan() - 1.0 / y.tan());
            }
        }
        acc
    }
}

/// Rectangle of a stratified cover with its stratum index and the cap it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverRect {
    pub m: usize,
    pub k: usize,
    pub rect: Rectangle,
    /// Cap center direction and half-angle, for built covers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StratifiedCover {
    pub dim: usize,
    pub rects: Vec<CoverRect>,
    /// Per stratum: total cap surface measure (both antipodal caps) over |Θ_m|.
    #[serde(default)]
    pub beta_cover: BTreeMap<usize, f64>,
}

/// Arc merge rule: two arcs merge when their gap is below this fraction
/// of the narrower arc.
pub const MERGE_FRACTION: f64 = 0.05;
/// Enlargement of each arc, as a fraction of its width, on each side.
pub const ENLARGE: f64 = 0.1;
const MAX_CAPS: usize = 1_000_000;

impl StratifiedCover {
    pub fn from_rectangles(dim: usize, rects: Vec<(usize, Rectangle)>) -> Self {
        let mut counters: BTreeMap<usize, usize> = BTreeMap::new();
        let rects = rects
            .into_iter()
            .map(|(m, rect)| {
                let k = counters.entry(m).or_insert(0);
                *k += 1;
                CoverRect { m, k: *k - 1, rect, cap: None }
            })
            .collect();
        StratifiedCover { dim, rects, beta_cover: BTreeMap::new() }
    }

    pub fn in_stratum(&self, m: usize) -> impl Iterator<Item = &CoverRect> {
        self.rects.iter().filter(move |r| r.m == m)
    }

    pub fn strata(&self) -> Vec<usize> {
        let mut ms: Vec<usize> = self.rects.iter().map(|r| r.m).collect();
        ms.dedup();
        ms.sort_unstable();
        ms.dedup();
        ms
    }

    /// max over rectangles of (longest half-extent) / 2^m.
    pub fn gamma(&self) -> f64 {
        self.rects
            .iter()
            .map(|r| r.rect.longest_half() / 2f64.powi(r.m as i32))
            .fold(0.0, f64::max)
    }

    pub fn without(&self, index: usize) -> Self {
        let mut c = self.clone();
        c.rects.remove(index);
        c
    }
}

/// Cover each stratum Θ_m by caps and each cap's double cone by the
/// smallest origin-centered rectangle.
pub fn build_cover(star: &StarSet, m_max: Option<usize>) -> Result<StratifiedCover> {
    match star.dim() {
        2 => build_planar(star, m_max),
        3 => build_spatial(star, m_max),
        d => domain(format!("covers are built for n = 2 or 3, not {d}")),
    }
}

fn stratum_cells(star: &StarSet, m: usize) -> Vec<usize> {
    star.stratum(m)
        .map(|s| s.cells.iter().copied().filter(|&i| star.cell_rho(i) > 0.0).collect())
        .unwrap_or_default()
}

/// Arcs of the projective circle [0, π) covered by the given cells,
/// merged when touching or separated by a small gap.
fn projective_arcs(cells: &SphereCells, ids: &[usize]) -> Vec<(f64, f64)> {
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for &i in ids {
        let (a, b) = cells.arc(i);
        let (a, b) = if a >= PI { (a - PI, b - PI) } else { (a, b) };
        if b > PI {
            arcs.push((a, PI));
            arcs.push((0.0, b - PI));
        } else {
            arcs.push((a, b));
        }
    }
    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in arcs {
        if let Some(last) = merged.last_mut() {
            let gap = a - last.1;
            let narrow = (last.1 - last.0).min(b - a);
            if gap <= 1e-12 || gap < MERGE_FRACTION * narrow {
                last.1 = last.1.max(b);
                continue;
            }
        }
        merged.push((a, b));
    }
    if merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        let gap = first.0 + PI - last.1;
        let narrow = (first.1 - first.0).min(last.1 - last.0);
        if gap <= 1e-12 || gap < MERGE_FRACTION * narrow {
            merged.pop();
            merged[0] = (last.0 - PI, first.1);
        }
    }
    merged
}

fn build_planar(star: &StarSet, m_max: Option<usize>) -> Result<StratifiedCover> {
    let cells = star.cells();
    let mut rects = Vec::new();
    let mut beta_cover = BTreeMap::new();
    for s in star.strata() {
        if m_max.is_some_and(|mm| s.m > mm) {
            continue;
        }
        let ids = stratum_cells(star, s.m);
        if ids.is_empty() {
            continue;
        }
        let theta_measure: f64 = ids.iter().map(|&i| cells.measure(i)).sum();
        let side = 2f64.powi(s.m as i32);
        let arcs = projective_arcs(cells, &ids);
        let full = arcs.len() == 1 && arcs[0].1 - arcs[0].0 >= PI - 1e-12;
        let mut caps: Vec<(f64, f64)> = Vec::new();
        if full {
            caps.push((0.0, FRAC_PI_2));
        } else {
            for (a, b) in arcs {
                let w = b - a;
                let pieces = (w / FRAC_PI_2 - 1e-12).ceil().max(1.0) as usize;
                let pw = w / pieces as f64;
                for p in 0..pieces {
                    let c = a + (p as f64 + 0.5) * pw;
                    caps.push((c, (0.5 + ENLARGE) * pw));
                }
            }
        }
        if caps.len() > MAX_CAPS {
            return Err(Error::Resolution(format!("stratum {} needs {} caps", s.m, caps.len())));
        }
        let mut cap_measure = 0.0;
        for (k, &(c, beta)) in caps.iter().enumerate() {
            let beta = beta.min(FRAC_PI_2);
            cap_measure += 4.0 * beta;
            let rect = if beta >= FRAC_PI_2 {
                Rectangle::planar(0.0, side, side)
            } else {
                Rectangle::planar(c.rem_euclid(PI), side, side * beta.sin())
            };
            rects.push(CoverRect { m: s.m, k, rect, cap: Some((vec![c.cos(), c.sin()], beta)) });
        }
        beta_cover.insert(s.m, cap_measure.min(2.0 * PI) / theta_measure);
    }
    Ok(StratifiedCover { dim: 2, rects, beta_cover })
}

fn build_spatial(star: &StarSet, m_max: Option<usize>) -> Result<StratifiedCover> {
    let cells = star.cells();
    let (n_polar, n_azimuth) = match cells {
        SphereCells::LatLong { n_polar, n_azimuth } => (*n_polar, *n_azimuth),
        _ => return domain("spatial covers need a latitude-longitude partition"),
    };
    let upper = n_polar.div_ceil(2);
    let dt = PI / n_polar as f64;
    let dp = 2.0 * PI / n_azimuth as f64;
    let mut rects = Vec::new();
    let mut beta_cover = BTreeMap::new();
    for s in star.strata() {
        if m_max.is_some_and(|mm| s.m > mm) {
            continue;
        }
        let ids = stratum_cells(star, s.m);
        if ids.is_empty() {
            continue;
        }
        let theta_measure: f64 = ids.iter().map(|&i| cells.measure(i)).sum();
        let mut mark = vec![false; upper * n_azimuth];
        for &i in &ids {
            let j = if i / n_azimuth >= upper { cells.antipode(i).unwrap_or(i) } else { i };
            if j / n_azimuth < upper {
                mark[j] = true;
            }
        }
        let side = 2f64.powi(s.m as i32);
        let mut caps: Vec<(Vec<f64>, f64)> = Vec::new();
        if mark.iter().all(|x| *x) {
            caps.push((vec![0.0, 0.0, 1.0], FRAC_PI_2));
        } else {
            for a in 0..upper {
                let (t0, t1) = (a as f64 * dt, (a + 1) as f64 * dt);
                let tm = 0.5 * (t0 + t1);
                let max_run = ((2.0 * dt) / (dp * tm.sin().max(1e-12))).floor().max(1.0) as usize;
                let row = &mark[a * n_azimuth..(a + 1) * n_azimuth];
                let mut b = 0;
                while b < n_azimuth {
                    if !row[b] {
                        b += 1;
                        continue;
                    }
                    let start = b;
                    while b < n_azimuth && row[b] && b - start < max_run {
                        b += 1;
                    }
                    let (p0, p1) = (start as f64 * dp, b as f64 * dp);
                    caps.push(spherical_cap(t0, t1, p0, p1));
                }
            }
        }
        if caps.len() > MAX_CAPS {
            return Err(Error::Resolution(format!("stratum {} needs {} caps", s.m, caps.len())));
        }
        let mut cap_measure = 0.0;
        for (k, (c, beta)) in caps.into_iter().enumerate() {
            let beta = beta.min(FRAC_PI_2);
            cap_measure += 2.0 * 2.0 * PI * (1.0 - beta.cos());
            let rect = if beta >= FRAC_PI_2 {
                Rectangle::axis_aligned(&[side, side, side])
            } else {
                let frame = frame_about(&c);
                let r = side * beta.sin();
                Rectangle { axes: frame.to_vec(), half_extents: vec![r, r, side] }
            };
            rects.push(CoverRect { m: s.m, k, rect, cap: Some((c, beta)) });
        }
        beta_cover.insert(s.m, cap_measure.min(4.0 * PI) / theta_measure);
    }
    Ok(StratifiedCover { dim: 3, rects, beta_cover })
}

fn direction(t: f64, p: f64) -> [f64; 3] {
    [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
}

/// Cap around a latitude-longitude block, enlarged by 10%.
fn spherical_cap(t0: f64, t1: f64, p0: f64, p1: f64) -> (Vec<f64>, f64) {
    let c = direction(0.5 * (t0 + t1), 0.5 * (p0 + p1));
    let mut beta: f64 = 0.0;
    for &t in &[t0, 0.5 * (t0 + t1), t1] {
        for &p in &[p0, 0.5 * (p0 + p1), p1] {
            let d = direction(t, p);
            let dot = (c[0] * d[0] + c[1] * d[1] + c[2] * d[2]).clamp(-1.0, 1.0);
            beta = beta.max(dot.acos());
        }
    }
    (c.to_vec(), beta * (1.0 + 2.0 * ENLARGE))
}

/// Orthonormal frame whose third axis is `c`.
fn frame_about(c: &[f64]) -> [Vec<f64>; 3] {
    let helper = if c[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let cross = |a: &[f64], b: &[f64]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let e1 = cross(c, &helper);
    let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let e1 = [e1[0] / l, e1[1] / l, e1[2] / l];
    let e2 = cross(c, &e1);
    [e1.to_vec(), e2.to_vec(), c.to_vec()]
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumCoverage {
    pub m: usize,
    pub stratum_measure: f64,
    pub rect_measure: f64,
    pub ratio: f64,
    pub rect_count: usize,
    pub samples: usize,
    pub misses: usize,
    pub union_misses: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub gamma: f64,
    pub c_n: f64,
    /// Largest per-stratum miss rate (samples of S_m outside ∪_k R_{m,k}).
    pub coverage_miss_rate: f64,
    /// Miss rate against the union of all rectangles.
    pub union_miss_rate: f64,
    pub strata: Vec<StratumCoverage>,
}

/// Guard on the rectangle gauge when classifying samples.
pub const COVER_GUARD: f64 = 1e-9;

/// Measure both cover clauses by sampling each stratum of the star set.
pub fn verify_cover(cover: &StratifiedCover, star: &StarSet, samples: usize, seed: u64) -> CoverReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut strata = Vec::new();
    for s in star.strata() {
        if s.measure <= 0.0 {
            continue;
        }
        let own: Vec<&Rectangle> = cover.in_stratum(s.m).map(|r| &r.rect).collect();
        let pts = star.sample(&mut rng, samples, Some(s.m));
        let flags = crate::par::map(&pts, |y| {
            let inside = |r: &&Rectangle| r.gauge(y) <= 1.0 + COVER_GUARD;
            (own.iter().any(inside), cover.rects.iter().map(|r| &r.rect).any(|r| inside(&r)))
        });
        let misses = flags.iter().filter(|f| !f.0).count();
        let union_misses = flags.iter().filter(|f| !f.1).count();
        let rect_measure: f64 = own.iter().map(|r| r.measure()).sum();
        strata.push(StratumCoverage {
            m: s.m,
            stratum_measure: s.measure,
            rect_measure,
            ratio: rect_measure / s.measure,
            rect_count: own.len(),
            samples: pts.len(),
            misses,
            union_misses,
        });
    }
    let rate = |f: fn(&StratumCoverage) -> usize| {
        strata
            .iter()
            .map(|s| if s.samples == 0 { 0.0 } else { f(s) as f64 / s.samples as f64 })
            .fold(0.0, f64::max)
    };
    CoverReport {
        gamma: cover.gamma(),
        c_n: strata.iter().map(|s| s.ratio).fold(0.0, f64::max),
        coverage_miss_rate: rate(|s| s.misses),
        union_miss_rate: rate(|s| s.union_misses),
        strata,
    }
}

/// Translates and isotropic dilates of a planar rectangle. Offsets are in
/// units of the half-extents, along the rectangle's own axes.
#[derive(Debug, Clone, Serialize)]
pub struct RectangleFamily {
    pub base: Rectangle,
    pub offsets: Vec<[f64; 2]>,
    pub scales: Vec<f64>,
}

/// A translated rectangle {c + y : y ∈ R}.
#[derive(Debug, Clone, Serialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub rect: Rectangle,
}

impl Region {
    pub fn cube(center: [f64; 2], half: f64) -> Self {
        Region { center: center.to_vec(), rect: Rectangle::axis_aligned(&[half, half]) }
    }

    pub fn contains_origin(&self) -> bool {
        let y: Vec<f64> = self.center.iter().map(|c| -c).collect();
        self.rect.gauge(&y) <= 1.0
    }

    pub fn dilate_about_origin(&self, lambda: f64) -> Self {
        Region { center: self.center.iter().map(|c| c * lambda).collect(), rect: self.rect.dilate(lambda) }
    }

    pub fn describe(&self) -> String {
        format!(
            "region centered at {:?} with half-extents {:?} at angle {:.4}",
            self.center,
            self.rect.half_extents,
            if self.rect.dim() == 2 { self.rect.angle() } else { 0.0 }
        )
    }
}

impl RectangleFamily {
    /// 5×5 offsets up to ±4 half-extents and dilates 2^j, j ∈ [-8, 8].
    pub fn standard(base: Rectangle) -> Self {
        let steps = [-4.0, -2.0, 0.0, 2.0, 4.0];
        let offsets = steps.iter().flat_map(|&a| steps.iter().map(move |&b| [a, b])).collect();
        let scales = (-8..=8).map(|j| 2f64.powi(j)).collect();
        RectangleFamily { base, offsets, scales }
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        self.scales = scales;
        self
    }

    /// Undilated translates.
    pub fn translates(&self) -> Vec<Region> {
        let (u, v) = (&self.base.axes[0], &self.base.axes[1]);
        let (a, b) = (self.base.half_extents[0], self.base.half_extents[1]);
        self.offsets
            .iter()
            .map(|o| Region {
                center: vec![o[0] * a * u[0] + o[1] * b * v[0], o[0] * a * u[1] + o[1] * b * v[1]],
                rect: self.base.clone(),
            })
            .collect()
    }

    pub fn regions(&self) -> Vec<Region> {
        let t = self.translates();
        self.scales.iter().flat_map(|&s| t.iter().map(move |r| r.dilate_about_origin(s))).collect()
    }
}

/// Factor whose σ-th power is averaged over dilated rectangles.
#[derive(Debug, Clone)]
pub enum RectFactor {
    /// |h(|y|)|.
    Radial(RadialFactor),
    /// |Φ(y/|y|)|.
    Angular(Arc<AngularKernel>),
}

#[derive(Debug, Clone, Serialize)]
pub struct HrectEntry {
    pub m: usize,
    pub k: usize,
    pub t: f64,
    pub average: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HrectReport {
    pub sigma: f64,
    pub constant: f64,
    /// Slope of log2(max average in stratum m) against m.
    pub growth: f64,
    pub passed: bool,
    pub entries: Vec<HrectEntry>,
}

/// |tR|^{-1} ∫_{tR} H^σ (planar rectangles).
pub fn rect_average(factor: &RectFactor, rect: &Rectangle, t: f64, sigma: f64) -> Result<f64> {
    if rect.dim() != 2 {
        return domain("rectangle averages are implemented for n = 2");
    }
    let r = rect.dilate(t);
    let total = match factor {
        RectFactor::Angular(k) => {
            let cells = k.cells();
            let mut acc = 0.0;
            for i in 0..cells.len() {
                let v = k.cell_value(i).norm();
                if v == 0.0 {
                    continue;
                }
                let (a, b) = cells.arc(i);
                acc += v.powf(sigma) * 0.5 * r.radial_sq_integral(a, b);
            }
            acc
        }
        RectFactor::Radial(h) => {
            let phi = r.axes[0][1].atan2(r.axes[0][0]);
            let corner = (r.half_extents[1] / r.half_extents[0]).atan();
            let mut breaks: Vec<f64> = [-corner, corner, PI - corner, PI + corner, 2.0 * PI - corner]
                .iter()
                .map(|c| c + phi)
                .collect();
            breaks.push(phi + 2.0 * PI - corner);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let q = Adaptive::new(1e-14, 1e-9);
            let inner = |theta: f64| {
                let u = [theta.cos(), theta.sin()];
                let ext = r.radial_extent(&u);
                radial_power_integral(h, sigma, ext, &q)
            };
            Adaptive::new(0.0, 1e-10).integrate_with_breaks(inner, &breaks).value
        }
    };
    Ok(total / r.measure())
}

/// ∫_0^R |h(r)|^σ r dr.
fn radial_power_integral(h: &RadialFactor, sigma: f64, big_r: f64, q: &Adaptive) -> f64 {
    let mut breaks = vec![0.0];
    let mut x = big_r * 2f64.powi(-50);
    while x < big_r {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(big_r);
    if h.epsilon > 0.0 && h.epsilon < big_r {
        breaks.push(h.epsilon);
        breaks.sort_by(f64::total_cmp);
    }
    q.integrate_with_breaks(|r: f64| h.eval(r).norm().powf(sigma) * r, &breaks).value
}

/// Sup over rectangles and dilates t of |tR|^{-1}∫_{tR} H^σ, with a growth
/// test across strata.
pub fn hrect_check(
    factor: &RectFactor,
    rects: &[CoverRect],
    sigma: f64,
    t_exponents: std::ops::RangeInclusive<i32>,
) -> Result<HrectReport> {
    let ts: Vec<f64> = match factor {
        RectFactor::Angular(_) => vec![1.0],
        RectFactor::Radial(_) => t_exponents.map(|j| 2f64.powi(j)).collect(),
    };
    let jobs: Vec<(usize, f64)> = (0..rects.len()).flat_map(|i| ts.iter().map(move |&t| (i, t))).collect();
    let values = crate::par::map(&jobs, |&(i, t)| rect_average(factor, &rects[i].rect, t, sigma));
    let mut entries = Vec::with_capacity(jobs.len());
    let mut per_m: BTreeMap<usize, f64> = BTreeMap::new();
    for ((i, t), v) in jobs.into_iter().zip(values) {
        let v = v?;
        let r = &rects[i];
        let e = per_m.entry(r.m).or_insert(0.0);
        *e = e.max(v);
        entries.push(HrectEntry { m: r.m, k: r.k, t, average: v });
    }
    let constant = entries.iter().map(|e| e.average).fold(0.0, f64::max);
    let samples: Vec<(f64, f64)> = per_m.iter().map(|(m, v)| (*m as f64, *v)).collect();
    let growth = if samples.len() >= 3 { trend::block_growth(&samples, 1) } else { 0.0 };
    Ok(HrectReport {
        sigma,
        constant,
        growth,
        passed: constant.is_finite() && growth <= 0.05,
        entries,
    })
}

/// Constant c_n in ∫_E |h(t|y|)|^σ dy ≤ c_n C_h |E| for sets E star-shaped
/// about the origin, with C_h the dyadic class constant: n 2^n / (2^n - 1).
pub fn star_average_constant(n: usize) -> f64 {
    let p = 2f64.powi(n as i32);
    n as f64 * p / (p - 1.0)
}

/// The family R_j = [-2^j, 2^j] × [-2^{-2j}, 2^{-2j}], labeled by j.
pub fn lacunary_rectangles(levels: std::ops::RangeInclusive<i32>) -> StratifiedCover {
    let rects = levels
        .map(|j| (j.max(0) as usize, Rectangle::planar(0.0, 2f64.powi(j), 2f64.powi(-2 * j))))
        .collect();
    StratifiedCover::from_rectangles(2, rects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{CatalogueKernel, Resolution};
    use num_complex::Complex64;

    fn star(k: AngularKernel) -> StarSet {
        StarSet::new(Arc::new(k))
    }

    #[test]
    fn rectangle_basics() {
        let r = Rectangle::planar(0.3, 2.0, 0.5);
        assert!((r.measure() - 4.0).abs() < 1e-14);
        assert!(r.contains(&[1.9 * 0.3f64.cos(), 1.9 * 0.3f64.sin()]));
        assert!(!r.contains(&[0.0, 1.0]));
        assert!((r.dilate(3.0).measure() - 36.0).abs() < 1e-12);
    }

    #[test]
    fn radial_sq_integral_gives_area() {
        for angle in [0.0, 0.4, 1.3, 2.9] {
            let r = Rectangle::planar(angle, 3.0, 0.25);
            let area = 0.5 * r.radial_sq_integral(0.0, 2.0 * PI);
            assert!((area - r.measure()).abs() < 1e-10 * r.measure(), "{area}");
            let half = 0.5 * r.radial_sq_integral(0.1, 0.1 + PI);
            assert!((half - 0.5 * r.measure()).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_kernel_cover_is_square() {
        let s = star(AngularKernel::constant(2, Complex64::new(1.0, 0.0)).unwrap());
        let c = build_cover(&s, None).unwrap();
        assert_eq!(c.rects.len(), 1);
        assert!((c.rects[0].rect.measure() - 4.0).abs() < 1e-14);
        let rep = verify_cover(&c, &s, 10_000, 1);
        assert_eq!(rep.coverage_miss_rate, 0.0);
        assert!((rep.c_n - 4.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn singular_kernel_cover_has_two_arms() {
        let k = CatalogueKernel::SinPower { alpha: 0.5 }.build(2, Resolution::default()).unwrap();
        let s = star(k);
        let c = build_cover(&s, None).unwrap();
        let rep = verify_cover(&c, &s, 10_000, 2);
        assert!(rep.coverage_miss_rate <= 1e-3, "{rep:?}");
        let two: Vec<usize> = c.strata().into_iter().filter(|&m| c.in_stratum(m).count() == 2).collect();
        assert!(two.len() >= 2, "{:?}", c.strata());
        let dev = |m: usize| c.in_stratum(m).map(|r| r.rect.major_axis_deviation()).fold(0.0, f64::max);
        assert!(dev(two[1]) < dev(two[0]));
    }

    #[test]
    fn deleting_a_rectangle_leaves_misses() {
        let k = CatalogueKernel::SplitArcs.build(2, Resolution::default()).unwrap();
        let s = star(k);
        let c = build_cover(&s, None).unwrap();
        assert_eq!(verify_cover(&c, &s, 5_000, 3).coverage_miss_rate, 0.0);
        let rep = verify_cover(&c.without(0), &s, 5_000, 3);
        assert!(rep.coverage_miss_rate > 0.0);
    }

    #[test]
    fn spatial_cover_covers() {
        let k = CatalogueKernel::SinPower { alpha: 0.5 }
            .build(3, Resolution { circle: 0, polar: 32, azimuth: 64 })
            .unwrap();
        let s = star(k);
        let c = build_cover(&s, None).unwrap();
        let rep = verify_cover(&c, &s, 4_000, 4);
        assert!(rep.coverage_miss_rate <= 1e-3, "{rep:?}");
        assert!(rep.c_n.is_finite());
    }

    #[test]
    fn family_has_expected_size() {
        let f = RectangleFamily::standard(Rectangle::planar(0.0, 1.0, 1.0));
        assert_eq!(f.regions().len(), 25 * 17);
    }

    #[test]
    fn constant_factor_rect_average() {
        let h = RadialFactor::new(crate::kernel::RadialProfile::Constant(3.0));
        let r = Rectangle::planar(0.7, 2.0, 0.1);
        let v = rect_average(&RectFactor::Radial(h), &r, 1.5, 2.0).unwrap();
        assert!((v - 9.0).abs() < 1e-7, "{v}");
        let k = Arc::new(AngularKernel::constant(2, Complex64::new(2.0, 0.0)).unwrap());
        let v = rect_average(&RectFactor::Angular(k), &r, 1.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }
}
