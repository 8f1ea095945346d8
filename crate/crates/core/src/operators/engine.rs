//! Angular nodes and the per-direction radial machinery shared by the
//! direct and star-average evaluations.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::kernel::{AngularKernel, BoundedFactor, RadialFactor};
use crate::quad::{gauss_legendre, Adaptive};
use crate::sphere::SphereCells;

use super::functions::{LipschitzField, PlaneFunction};

/// Cells narrower than this get a single midpoint node.
const NARROW_CELL: f64 = TAU / 1024.0;
/// Wider cells are cut into panels of at most this width with 2-point rules.
const PANEL: f64 = TAU / 256.0;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Quadrature nodes on the circle with the kernel values carried along.
/// Directions where Ω vanishes are dropped.
#[derive(Debug, Clone)]
pub struct ThetaNodes {
    pub u: Vec<[f64; 2]>,
    pub weight: Vec<f64>,
    pub omega: Vec<Complex64>,
    pub rho: Vec<f64>,
    pub sgn: Vec<Complex64>,
}

impl ThetaNodes {
    pub fn new(kernel: &AngularKernel) -> Result<Self> {
        let SphereCells::Circle { .. } = kernel.cells() else {
            return domain("operators are implemented for n = 2");
        };
        let cells = kernel.cells();
        let gl2 = gauss_legendre(2);
        let mut nodes = ThetaNodes { u: vec![], weight: vec![], omega: vec![], rho: vec![], sgn: vec![] };
        for i in 0..cells.len() {
            let v = kernel.cell_value(i);
            if v.norm() == 0.0 {
                continue;
            }
            let (a, b) = cells.arc(i);
            let width = b - a;
            if width <= NARROW_CELL {
                nodes.push(0.5 * (a + b), width, v);
            } else {
                let panels = (width / PANEL).ceil() as usize;
                let step = width / panels as f64;
                for p in 0..panels {
                    let lo = a + p as f64 * step;
                    for (t, w) in gl2.mapped(lo, lo + step) {
                        nodes.push(t, w, v);
                    }
                }
            }
        }
        Ok(nodes)
    }

    fn push(&mut self, theta: f64, weight: f64, v: Complex64) {
        let a = v.norm();
        self.u.push([theta.cos(), theta.sin()]);
        self.weight.push(weight);
        self.omega.push(v);
        self.rho.push(a.sqrt());
        self.sgn.push(v / a);
    }

    /// Same nodes with Ω replaced by g(θ, Ω(θ)); zeros are dropped.
    pub fn map_omega(&self, g: impl Fn([f64; 2], Complex64) -> Complex64) -> Self {
        let mut out = ThetaNodes { u: vec![], weight: vec![], omega: vec![], rho: vec![], sgn: vec![] };
        for j in 0..self.len() {
            let v = g(self.u[j], self.omega[j]);
            if v.norm() > 0.0 {
                out.u.push(self.u[j]);
                out.weight.push(self.weight[j]);
                out.omega.push(v);
                out.rho.push(v.norm().sqrt());
                out.sgn.push(v / v.norm());
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().cloned().fold(0.0, f64::max)
    }

    /// Σ w |Ω|.
    pub fn l1(&self) -> f64 {
        self.weight.iter().zip(&self.omega).map(|(w, v)| w * v.norm()).sum()
    }

    /// Σ w Ω.
    pub fn cancellation(&self) -> Complex64 {
        self.weight.iter().zip(&self.omega).map(|(w, v)| v * *w).sum()
    }

    /// (1/2) Σ w Ω log|Ω|.
    pub fn c_omega(&self) -> Complex64 {
        self.weight.iter().zip(&self.omega).map(|(w, v)| v * (w * v.norm().ln())).sum::<Complex64>() * 0.5
    }
}

/// The factor m(θ, r) multiplying Ω(θ) r^{-n} f(x - rθ) in the kernel.
pub trait RayFactor: Sync {
    fn value(&self, u: [f64; 2], r: f64) -> Complex64;
    /// A term c(θ, r) with Σ_θ w Ω c = 0 for every r, subtracted against f(x)
    /// near the singularity.
    fn cancelling(&self, u: [f64; 2], r: f64) -> Complex64;
}

/// m = h(r).
pub struct Convolution<'a>(pub &'a RadialFactor);

impl RayFactor for Convolution<'_> {
    fn value(&self, _u: [f64; 2], r: f64) -> Complex64 {
        self.0.eval(r)
    }
    fn cancelling(&self, _u: [f64; 2], r: f64) -> Complex64 {
        self.0.eval(r)
    }
}

/// m = h(r) k(x, x - rθ).
pub struct NonConvolution<'a> {
    pub h: &'a RadialFactor,
    pub k: &'a BoundedFactor,
    pub x: [f64; 2],
}

impl RayFactor for NonConvolution<'_> {
    fn value(&self, u: [f64; 2], r: f64) -> Complex64 {
        self.h.eval(r) * (self.k.f)(self.x, [self.x[0] - r * u[0], self.x[1] - r * u[1]])
    }
    fn cancelling(&self, _u: [f64; 2], _r: f64) -> Complex64 {
        zero()
    }
}

/// m = ((a(x) - a(x - rθ))/r)^k with the r → 0 limit (∇a(x)·θ)^k cancelling
/// against vanishing moments of order k.
pub struct CommutatorFactor<'a> {
    pub a: &'a LipschitzField,
    pub x: [f64; 2],
    pub k: u32,
    pub grad: [f64; 2],
    pub ax: f64,
}

impl<'a> CommutatorFactor<'a> {
    pub fn new(a: &'a LipschitzField, x: [f64; 2], k: u32) -> Self {
        CommutatorFactor { a, x, k, grad: a.gradient(x), ax: a.value(x) }
    }

    pub fn limit(&self, u: [f64; 2]) -> f64 {
        (self.grad[0] * u[0] + self.grad[1] * u[1]).powi(self.k as i32)
    }
}

impl RayFactor for CommutatorFactor<'_> {
    fn value(&self, u: [f64; 2], r: f64) -> Complex64 {
        let q = (self.ax - self.a.value([self.x[0] - r * u[0], self.x[1] - r * u[1]])) / r;
        Complex64::new(q.powi(self.k as i32), 0.0)
    }
    fn cancelling(&self, u: [f64; 2], _r: f64) -> Complex64 {
        Complex64::new(self.limit(u), 0.0)
    }
}

/// Parameter interval {r ≥ 0 : x - r u ∈ disk}.
pub fn ray_interval(center: [f64; 2], radius: f64, x: [f64; 2], u: [f64; 2]) -> Option<(f64, f64)> {
    let d = [x[0] - center[0], x[1] - center[1]];
    let b = d[0] * u[0] + d[1] * u[1];
    let disc = b * b - (d[0] * d[0] + d[1] * d[1]) + radius * radius;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let hi = b + s;
    if hi <= 0.0 {
        return None;
    }
    Some(((b - s).max(0.0), hi))
}

fn radial_rule() -> Adaptive {
    Adaptive { abs_tol: 1e-15, rel_tol: 1e-11, max_segments: 2000 }
}

/// Doubling breaks from a to b (a > 0), or a single interval.
fn geometric_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut v = vec![a];
    if a > 0.0 {
        let mut x = a;
        while x * 2.0 < b && v.len() < 200 {
            x *= 2.0;
            v.push(x);
        }
    }
    v.push(b);
    v
}

/// Direct polar sum Σ_θ w Ω(θ) ∫_ε^∞ m(θ, r) f(x - rθ) dr/r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSum {
    pub value: Complex64,
    pub error: f64,
}

pub fn direct_sum(
    nodes: &ThetaNodes,
    f: &dyn PlaneFunction,
    x: [f64; 2],
    m: &dyn RayFactor,
    eps: f64,
) -> DirectSum {
    let (c, rad) = f.support();
    let q = radial_rule();
    let parts = crate::par::map_range(nodes.len(), |j| {
        let u = nodes.u[j];
        let Some((lo, hi)) = ray_interval(c, rad, x, u) else {
            return (zero(), 0.0);
        };
        let a0 = lo.max(eps);
        if hi <= a0 {
            return (zero(), 0.0);
        }
        let res = q.integrate_with_breaks(
            |r: f64| m.value(u, r) * f.value([x[0] - r * u[0], x[1] - r * u[1]]) / r,
            &geometric_breaks(a0, hi),
        );
        let coef = nodes.omega[j] * nodes.weight[j];
        (coef * res.value, coef.norm() * res.error)
    });
    let mut value = zero();
    let mut error = 0.0;
    for (v, e) in parts {
        value += v;
        error += e;
    }
    DirectSum { value, error }
}

/// Geometric grid t_i = t0 2^{i/per_octave}, i < count.
#[derive(Debug, Clone, Copy)]
pub struct TGrid {
    pub t0: f64,
    pub per_octave: usize,
    pub count: usize,
}

impl TGrid {
    /// Grid from t0 over a whole number of octaves reaching at least t1.
    pub fn spanning(t0: f64, t1: f64, per_octave: usize) -> Self {
        let octaves = ((t1 / t0).log2().ceil() as usize).max(1);
        TGrid { t0, per_octave, count: octaves * per_octave + 1 }
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 * (i as f64 / self.per_octave as f64).exp2()
    }

    pub fn last(&self) -> f64 {
        self.t(self.count - 1)
    }

    /// Smallest i with t_i ρ > a.
    fn first_above(&self, a: f64, rho: f64) -> usize {
        if a <= 0.0 {
            return 0;
        }
        let guess = (self.per_octave as f64 * (a / (self.t0 * rho)).log2()).floor();
        let mut i = if guess < 0.0 { 0 } else { (guess as usize).min(self.count) };
        while i > 0 && self.t(i - 1) * rho > a {
            i -= 1;
        }
        while i < self.count && self.t(i) * rho <= a {
            i += 1;
        }
        i
    }
}

/// What the radial integrand is measured against.
#[derive(Debug, Clone, Copy)]
pub enum Inner {
    /// m f(x - rθ).
    Plain,
    /// m f(x - rθ) - c(θ, r) f(x).
    Subtracted(Complex64),
}

/// n ∫ A_t dt/t over the grid plus, in plain mode, the exact remainder
/// beyond its last point. A_t = t^{-2} Σ_θ w sgnΩ ∫_{lower}^{tρ} g r dr.
#[derive(Debug, Clone)]
pub struct RepPass {
    pub averages: Vec<Complex64>,
    pub grid_integral: Complex64,
    pub quad_error: f64,
    /// Contribution of t beyond the last grid point (plain mode).
    pub tail: Complex64,
    /// Same, from the first refinement level `coarse_count` on.
    pub coarse_tail: Complex64,
}

impl RepPass {
    pub fn total(&self) -> Complex64 {
        self.grid_integral + self.tail
    }
}

struct Chunk {
    acc: Vec<Complex64>,
    sat: Vec<Complex64>,
    tail: Complex64,
    coarse_tail: Complex64,
}

const N: f64 = 2.0;

/// One sweep of the cumulative radial integrals through the t-grid.
/// `coarse_count` marks a shorter grid whose tail is also reported.
#[allow(clippy::too_many_arguments)]
pub fn rep_pass(
    nodes: &ThetaNodes,
    f: &dyn PlaneFunction,
    x: [f64; 2],
    m: &dyn RayFactor,
    lower: f64,
    grid: &TGrid,
    inner: Inner,
    coarse_count: usize,
) -> RepPass {
    let count = grid.count;
    let (c, rad) = f.support();
    let gl = gauss_legendre(4);
    let q = radial_rule();
    let ranges = crate::par::chunk_ranges(nodes.len(), 64);
    let chunks = crate::par::map(&ranges, |range| {
        let mut ch = Chunk { acc: vec![zero(); count], sat: vec![zero(); count + 1], tail: zero(), coarse_tail: zero() };
        for j in range.clone() {
            let u = nodes.u[j];
            let rho = nodes.rho[j];
            let coef = nodes.sgn[j] * nodes.weight[j];
            let g = |r: f64| {
                let y = [x[0] - r * u[0], x[1] - r * u[1]];
                let v = match inner {
                    Inner::Plain => m.value(u, r) * f.value(y),
                    Inner::Subtracted(fx) => m.value(u, r) * f.value(y) - m.cancelling(u, r) * fx,
                };
                v * r
            };
            let (a0, b0) = match inner {
                Inner::Plain => match ray_interval(c, rad, x, u) {
                    Some((lo, hi)) => (lo.max(lower), hi),
                    None => continue,
                },
                Inner::Subtracted(_) => (lower, f64::INFINITY),
            };
            if b0 <= a0 {
                continue;
            }
            let start = grid.first_above(a0, rho);
            let mut acc = zero();
            let mut prev = a0;
            let mut saturated_at = None;
            let mut g_at = [None; 2];
            for i in start..count {
                let s = grid.t(i) * rho;
                let hi = s.min(b0);
                if prev < hi {
                    acc += if i == start {
                        q.integrate_with_breaks(g, &geometric_breaks(prev, hi)).value
                    } else {
                        gl.integrate(prev, hi, g)
                    };
                }
                prev = hi;
                if i + 1 == coarse_count {
                    g_at[0] = Some(acc);
                }
                if i + 1 == count {
                    g_at[1] = Some(acc);
                }
                if s >= b0 {
                    ch.sat[i] += coef * acc;
                    saturated_at = Some(i);
                    break;
                }
                ch.acc[i] += coef * acc;
            }
            if let Inner::Plain = inner {
                // ρ² ∫ g(r) max(r, Tρ)^{-2} dr over the part of the ray beyond t = T
                let remainder = |t_end: usize, g_end: Option<Complex64>| -> Complex64 {
                    let tt = grid.t(t_end - 1);
                    let s_end = tt * rho;
                    match saturated_at {
                        Some(i) if i < t_end => coef * acc * tt.powf(-N),
                        _ => {
                            let inside = g_end.unwrap_or(zero()) * s_end.powf(-N);
                            let from = a0.max(s_end);
                            let outside = if b0 > from {
                                q.integrate_with_breaks(|r: f64| g(r) * r.powf(-N), &geometric_breaks(from, b0))
                                    .value
                            } else {
                                zero()
                            };
                            coef * (inside + outside) * rho.powf(N)
                        }
                    }
                };
                ch.tail += remainder(count, g_at[1]);
                if coarse_count > 0 && coarse_count < count {
                    ch.coarse_tail += remainder(coarse_count, g_at[0]);
                }
            }
        }
        ch
    });
    let mut acc = vec![zero(); count];
    let mut sat = vec![zero(); count];
    let mut tail = zero();
    let mut coarse_tail = zero();
    for ch in &chunks {
        for i in 0..count {
            acc[i] += ch.acc[i];
            sat[i] += ch.sat[i];
        }
        tail += ch.tail;
        coarse_tail += ch.coarse_tail;
    }
    let mut running = zero();
    let averages: Vec<Complex64> = (0..count)
        .map(|i| {
            running += sat[i];
            (acc[i] + running) * grid.t(i).powf(-N)
        })
        .collect();
    let du = LN_2 / grid.per_octave as f64;
    let fine = crate::quad::simpson(&averages, du) * N;
    let quad_error = if count >= 5 && (count - 1).is_multiple_of(2) {
        let every_other: Vec<Complex64> = averages.iter().step_by(2).cloned().collect();
        let coarse = crate::quad::simpson(&every_other, 2.0 * du) * N;
        (fine - coarse).norm() / 15.0
    } else {
        0.0
    };
    RepPass { averages, grid_integral: fine, quad_error, tail, coarse_tail }
}

/// A_{ε,t} f(x) for a single t by adaptive radial integration per direction.
pub fn star_average(
    nodes: &ThetaNodes,
    f: &dyn PlaneFunction,
    x: [f64; 2],
    m: &dyn RayFactor,
    eps: f64,
    t: f64,
) -> Complex64 {
    let (c, rad) = f.support();
    let q = radial_rule();
    let parts = crate::par::map_range(nodes.len(), |j| {
        let u = nodes.u[j];
        let Some((lo, hi)) = ray_interval(c, rad, x, u) else {
            return zero();
        };
        let a0 = lo.max(eps.min(t * nodes.rho[j]));
        let b0 = hi.min(t * nodes.rho[j]);
        if b0 <= a0 {
            return zero();
        }
        let v = q
            .integrate_with_breaks(
                |r: f64| m.value(u, r) * f.value([x[0] - r * u[0], x[1] - r * u[1]]) * r,
                &geometric_breaks(a0, b0),
            )
            .value;
        nodes.sgn[j] * nodes.weight[j] * v
    });
    parts.into_iter().sum::<Complex64>() * t.powf(-N)
}
