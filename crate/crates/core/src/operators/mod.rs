//! Rough singular integrals in the plane,
//!
//! T_ε f(x) = ∫_{|y|>ε} Ω(y) |y|^{-2} h(|y|) f(x - y) dy,
//!
//! evaluated directly in polar coordinates and through the star averages
//! A_{ε,t} f(x) = t^{-2} ∫_{tS∖B(0,ε)} h(|y|) f(x - y) sgnΩ(y) dy with
//! T_ε = 2 ∫_0^∞ A_{ε,t} dt/t. Both evaluations share the angular nodes,
//! so their difference measures radial and t-quadrature error only.

mod commutator;
mod engine;
mod functions;
mod pv;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernel::{KernelSpec, RadialFactor};
use crate::quad::Adaptive;

pub use commutator::{commutator, commutator_pv, CommutatorPv, CommutatorValue};
pub use engine::{
    direct_sum, ray_interval, rep_pass, star_average, CommutatorFactor, Convolution, DirectSum, Inner,
    NonConvolution, RayFactor, RepPass, TGrid, ThetaNodes,
};
pub use functions::{LipschitzField, PlaneFunction, TestFunction};
pub use pv::{PvLevel, PvLimit, PvRep, CANCELLATION_TOL};

/// Grid densities for the representation formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorOptions {
    /// t-grid points per octave.
    pub per_octave: usize,
    /// The truncated limit runs over ε = 2^{-j}, j ≤ pv_levels.
    pub pv_levels: usize,
    /// The subtracted small-t integral starts at t = 2^{-small_octaves}.
    pub small_octaves: usize,
    /// t_max = 2^{tail_octaves} R_x / max ρ.
    pub tail_octaves: i32,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        OperatorOptions { per_octave: 64, pv_levels: 30, small_octaves: 16, tail_octaves: 8 }
    }
}

/// T_ε f(x) by direct polar quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectValue {
    pub value: Complex64,
    pub error: f64,
}

/// T_ε f(x) through 2∫A_{ε,t} dt/t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepValue {
    pub value: Complex64,
    /// The same integral with t_max halved.
    pub coarse_value: Complex64,
    /// Richardson estimate of the t-quadrature error.
    pub quad_error: f64,
    /// Decay bound t_max^{-2} ‖f‖∞ ∫_{B(0,R_x)} |h| on the part beyond t_max.
    pub tail_bound: f64,
    /// The decay bound after doubling t_max.
    pub refined_tail_bound: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl RepValue {
    /// The tail bound at least halves under one doubling of t_max.
    pub fn tail_halves(&self) -> bool {
        self.refined_tail_bound <= 0.5 * self.tail_bound
    }
}

/// A kernel prepared for evaluation: Ω on angular nodes plus the radial and
/// non-convolution factors.
#[derive(Debug, Clone)]
pub struct Operator {
    spec: KernelSpec,
    nodes: ThetaNodes,
    pub options: OperatorOptions,
    beta: std::sync::OnceLock<Complex64>,
}

fn check_point(x: [f64; 2]) -> Result<()> {
    if !(x[0].is_finite() && x[1].is_finite()) {
        return domain(format!("evaluation point {x:?} is not finite"));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return domain(format!("truncation ε must be positive and finite, got {eps}"));
    }
    Ok(())
}

/// ∫_0^R |h(r)| r dr.
fn radial_mass(h: &RadialFactor, big_r: f64) -> f64 {
    let mut breaks = vec![0.0, big_r * 2f64.powi(-40)];
    let mut b = breaks[1];
    while b * 2.0 < big_r {
        b *= 2.0;
        breaks.push(b);
    }
    breaks.push(big_r);
    Adaptive::new(1e-15, 1e-9).integrate_with_breaks(|r: f64| h.eval(r).norm() * r, &breaks).value
}

impl Operator {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        if spec.omega.dim() != 2 {
            return domain("operators are implemented for n = 2");
        }
        let nodes = ThetaNodes::new(&spec.omega)?;
        Ok(Operator { spec: spec.clone(), nodes, options: OperatorOptions::default(), beta: Default::default() })
    }

    pub fn with_options(mut self, options: OperatorOptions) -> Self {
        self.options = options;
        self
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &ThetaNodes {
        &self.nodes
    }

    /// c_Ω of the kernel as evaluated (on the angular nodes).
    pub fn c_omega(&self) -> Complex64 {
        self.nodes.c_omega()
    }

    fn with_factor<R>(&self, x: [f64; 2], run: impl FnOnce(&dyn RayFactor) -> R) -> R {
        match &self.spec.nonconv {
            Some(k) => run(&NonConvolution { h: &self.spec.radial, k, x }),
            None => run(&Convolution(&self.spec.radial)),
        }
    }

    pub fn direct(&self, f: &dyn PlaneFunction, eps: f64, x: [f64; 2]) -> Result<DirectValue> {
        check_eps(eps)?;
        check_point(x)?;
        let s = self.with_factor(x, |m| direct_sum(&self.nodes, f, x, m, eps));
        finite(s.value, "direct evaluation")?;
        Ok(DirectValue { value: s.value, error: s.error })
    }

    /// A_{ε,t} f(x).
    pub fn star_average(&self, f: &dyn PlaneFunction, eps: f64, t: f64, x: [f64; 2]) -> Result<Complex64> {
        check_eps(eps)?;
        check_point(x)?;
        if !(t > 0.0 && t.is_finite()) {
            return domain(format!("t must be positive and finite, got {t}"));
        }
        Ok(self.with_factor(x, |m| star_average(&self.nodes, f, x, m, eps, t)))
    }

    fn reach(&self, f: &dyn PlaneFunction, x: [f64; 2]) -> f64 {
        reach(f, x)
    }

    /// T_ε f(x) from the star-average representation on a geometric t-grid
    /// from ε/max ρ to 2^{tail_octaves+1} R_x/max ρ.
    pub fn rep(&self, f: &dyn PlaneFunction, eps: f64, x: [f64; 2]) -> Result<RepValue> {
        check_eps(eps)?;
        check_point(x)?;
        let k = self.spec.nonconv.as_ref().map_or(1.0, |k| k.sup_bound);
        let mass = std::f64::consts::TAU * radial_mass(&self.spec.radial, self.reach(f, x)) * k;
        self.with_factor(x, |m| rep_eval(&self.nodes, f, x, m, eps, &self.options, mass))
    }

    /// Both evaluations of the non-convolution operator T^{(k)}_ε.
    pub fn t_eps_nonconv(&self, f: &dyn PlaneFunction, eps: f64, x: [f64; 2]) -> Result<(DirectValue, RepValue)> {
        if self.spec.nonconv.is_none() {
            return Err(Error::Config("t_eps_nonconv needs a non-convolution factor k(x, y)".into()));
        }
        Ok((self.direct(f, eps, x)?, self.rep(f, eps, x)?))
    }
}

/// Distance from x to the far side of the support of f.
fn reach(f: &dyn PlaneFunction, x: [f64; 2]) -> f64 {
    let (c, r) = f.support();
    ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt() + r
}

/// Representation evaluation for any ray factor. `mass` bounds ∫_{B(0,R_x)} |m|
/// and enters the reported decay bound.
pub(crate) fn rep_eval(
    nodes: &ThetaNodes,
    f: &dyn PlaneFunction,
    x: [f64; 2],
    m: &dyn RayFactor,
    eps: f64,
    options: &OperatorOptions,
    mass: f64,
) -> Result<RepValue> {
    let rho_max = nodes.rho_max();
    if rho_max == 0.0 {
        let z = Complex64::new(0.0, 0.0);
        return Ok(RepValue {
            value: z,
            coarse_value: z,
            quad_error: 0.0,
            tail_bound: 0.0,
            refined_tail_bound: 0.0,
            t_min: 0.0,
            t_max: 0.0,
        });
    }
    let po = options.per_octave;
    let t0 = eps / rho_max;
    let t_coarse = (2f64.powi(options.tail_octaves) * reach(f, x) / rho_max).max(2.0 * t0);
    let coarse = TGrid::spanning(t0, t_coarse, po);
    let grid = TGrid { count: coarse.count + po, ..coarse };
    let pass = rep_pass(nodes, f, x, m, eps, &grid, Inner::Plain, coarse.count);
    let du = std::f64::consts::LN_2 / po as f64;
    let coarse_integral = crate::quad::simpson(&pass.averages[..coarse.count], du) * 2.0;
    finite(pass.total(), "representation evaluation")?;
    let bound = |t: f64| t.powi(-2) * f.sup_norm() * mass;
    Ok(RepValue {
        value: pass.total(),
        coarse_value: coarse_integral + pass.coarse_tail,
        quad_error: pass.quad_error,
        tail_bound: bound(coarse.last()),
        refined_tail_bound: bound(grid.last()),
        t_min: t0,
        t_max: grid.last(),
    })
}

fn finite(v: Complex64, what: &str) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonConvergence(format!("{what} produced a non-finite value")))
    }
}

/// Convenience wrapper: direct T_ε f(x).
pub fn t_eps_direct(f: &dyn PlaneFunction, spec: &KernelSpec, eps: f64, x: [f64; 2]) -> Result<DirectValue> {
    Operator::new(spec)?.direct(f, eps, x)
}

/// Convenience wrapper: T_ε f(x) from the representation.
pub fn t_eps_rep(f: &dyn PlaneFunction, spec: &KernelSpec, eps: f64, x: [f64; 2]) -> Result<RepValue> {
    Operator::new(spec)?.rep(f, eps, x)
}

/// Convenience wrapper: A_{ε,t} f(x).
pub fn a_eps_t(f: &dyn PlaneFunction, spec: &KernelSpec, eps: f64, t: f64, x: [f64; 2]) -> Result<Complex64> {
    Operator::new(spec)?.star_average(f, eps, t, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{AngularKernel, CatalogueKernel, RadialProfile, Resolution};
    use std::f64::consts::TAU;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn spec(k: CatalogueKernel, h: RadialFactor) -> KernelSpec {
        KernelSpec::new(k.build(2, Resolution::default()).unwrap(), h)
    }

    #[test]
    fn odd_kernel_kills_radial_functions() {
        let op = Operator::new(&spec(CatalogueKernel::Cos { frequency: 1 }, RadialFactor::unit())).unwrap();
        let f = TestFunction::gaussian([0.0, 0.0], 1.0, 1.0).unwrap();
        let v = op.direct(&f, 0.1, [0.0, 0.0]).unwrap();
        assert!(v.value.norm() < 1e-12, "{v:?}");
    }

    #[test]
    fn constant_kernel_matches_radial_integral() {
        let k = AngularKernel::constant(2, c(1.0)).unwrap();
        let op = Operator::new(&KernelSpec::new(k, RadialFactor::unit())).unwrap();
        let f = TestFunction::gaussian([0.0, 0.0], 1.0, 1.0).unwrap();
        let eps = 0.25;
        let oracle = TAU
            * Adaptive::new(1e-16, 1e-13)
                .integrate(|r: f64| (-0.5 * r * r).exp() / r, eps, 8.582_839_5)
                .value;
        let d = op.direct(&f, eps, [0.0, 0.0]).unwrap().value.re;
        assert!((d - oracle).abs() < 1e-6 * oracle, "{d} vs {oracle}");
        let r = op.rep(&f, eps, [0.0, 0.0]).unwrap();
        assert!((r.value.re - oracle).abs() < 1e-6 * oracle, "{r:?} vs {oracle}");
    }

    #[test]
    fn representation_matches_direct() {
        let f = TestFunction::gaussian([0.3, -0.2], 0.8, 1.0).unwrap();
        for k in [CatalogueKernel::SplitArcs, CatalogueKernel::SinPower { alpha: 0.5 }] {
            for h in [RadialFactor::unit(), RadialFactor::new(RadialProfile::SaturatingRoot)] {
                let op = Operator::new(&spec(k.clone(), h)).unwrap();
                for x in [[0.0, 0.0], [1.0, 0.5]] {
                    let d = op.direct(&f, 0.125, x).unwrap();
                    let r = op.rep(&f, 0.125, x).unwrap();
                    let scale = d.value.norm() + 1.0;
                    assert!((d.value - r.value).norm() < 1e-5 * scale, "{k:?} {x:?}: {d:?} vs {r:?}");
                    assert!(r.tail_halves());
                    assert!((r.value - r.coarse_value).norm() < 1e-6 * scale);
                }
            }
        }
    }

    #[test]
    fn single_average_is_consistent_with_grid() {
        let op = Operator::new(&spec(CatalogueKernel::SplitArcs, RadialFactor::unit())).unwrap();
        let f = TestFunction::bump([0.5, 0.0], 1.5, 1.0).unwrap();
        let x = [0.2, 0.1];
        let eps = 0.1;
        let grid = TGrid::spanning(0.05, 4.0, 64);
        let pass = rep_pass(op.nodes(), &f, x, &Convolution(&op.spec.radial), eps, &grid, Inner::Plain, 0);
        for i in [0usize, 100, 300, grid.count - 1] {
            let a = op.star_average(&f, eps, grid.t(i), x).unwrap();
            assert!((a - pass.averages[i]).norm() < 1e-8 * (1.0 + a.norm()), "{i}: {a} vs {}", pass.averages[i]);
        }
    }

    #[test]
    fn c_omega_split_arcs() {
        let op = Operator::new(&spec(CatalogueKernel::SplitArcs, RadialFactor::unit())).unwrap();
        let expected = std::f64::consts::FRAC_PI_2 * 3f64.ln();
        assert!((op.c_omega().re - expected).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_arguments() {
        let op = Operator::new(&spec(CatalogueKernel::SplitArcs, RadialFactor::unit())).unwrap();
        let f = TestFunction::gaussian([0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(op.direct(&f, 0.0, [0.0, 0.0]).is_err());
        assert!(op.rep(&f, 0.1, [f64::NAN, 0.0]).is_err());
        assert!(op.t_eps_nonconv(&f, 0.1, [0.0, 0.0]).is_err());
    }
}
