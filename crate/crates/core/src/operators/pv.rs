//! Principal values: the limit of T_ε over dyadic ε, and the star-average
//! representation T f = 2∫_0^∞ A_t f dt/t + h(0) c_Ω f(x).

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{dini_check, RadialFactor, RadialProfile};
use crate::quad::{gauss_legendre, Adaptive};

use super::engine::{direct_sum, rep_pass, Convolution, Inner, RayFactor, TGrid, ThetaNodes};
use super::{check_point, finite, Operator, OperatorOptions, PlaneFunction};

/// Tolerance on Σ w Ω over the angular nodes, relative to ‖Ω‖₁. Cell
/// averages of callable kernels carry quadrature error near 1e-9.
pub const CANCELLATION_TOL: f64 = 1e-8;

/// T_ε f(x) at ε = 2^{-j}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvLevel {
    pub eps: f64,
    pub value: Complex64,
    /// |T_ε - T_{2ε}|.
    pub difference: f64,
    /// ‖Ω‖₁ ‖∇f‖∞ ∫_ε^{2ε} |h| when ∇f is bounded and the factor is radial.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvLimit {
    pub value: Complex64,
    pub levels: Vec<PvLevel>,
    /// Geometric-tail correction added to the last level.
    pub extrapolation: Complex64,
    /// Slope of log₂|T_ε - T_{2ε}| against log₂ ε over the finer half of the levels.
    pub decay_slope: f64,
    /// max |T_η - T_ε| / bound over all probed pairs η < ε.
    pub bound_ratio: Option<f64>,
    /// False when the differences do not decrease (no limit detected).
    pub converged: bool,
}

/// Pieces of the principal value from the representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvRep {
    pub value: Complex64,
    /// 2∫_{t_lo}^1 of the subtracted averages.
    pub small_scale: Complex64,
    /// Extrapolated 2∫_0^{t_lo}.
    pub remainder: Complex64,
    /// f(x) Σ w Ω ∫_0^ρ (h - h(0))(1/r - r/ρ²) dr.
    pub beta_term: Complex64,
    /// 2∫_1^∞ A_t dt/t including the closed-form tail.
    pub large_scale: Complex64,
    /// h(0) c_Ω f(x), or its commutator analogue.
    pub correction: Complex64,
    pub quad_error: f64,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Dyadic truncations T_1, T_{1/2}, ... and their extrapolated limit.
pub(crate) fn limit_with(
    nodes: &ThetaNodes,
    f: &dyn PlaneFunction,
    x: [f64; 2],
    m: &dyn RayFactor,
    levels: usize,
    bound: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<PvLimit> {
    let fx = f.value(x);
    let top = direct_sum(nodes, f, x, m, 1.0).value;
    let gl = gauss_legendre(10);
    // D_j = Σ w Ω ∫_{2^{-j-1}}^{2^{-j}} (m f(x - rθ) - c f(x)) dr/r
    let per_node = crate::par::map_range(nodes.len(), |j| {
        let u = nodes.u[j];
        let coef = nodes.omega[j] * nodes.weight[j];
        (0..levels)
            .map(|l| {
                let b = 2f64.powi(-(l as i32));
                let v = gl.integrate(0.5 * b, b, |r: f64| {
                    (m.value(u, r) * f.value([x[0] - r * u[0], x[1] - r * u[1]]) - m.cancelling(u, r) * fx) / r
                });
                coef * v
            })
            .collect::<Vec<_>>()
    });
    let mut diffs = vec![zero(); levels];
    for row in &per_node {
        for (d, v) in diffs.iter_mut().zip(row) {
            *d += *v;
        }
    }
    let mut out = Vec::with_capacity(levels + 1);
    let mut value = top;
    out.push(PvLevel { eps: 1.0, value, difference: f64::NAN, bound: None });
    for (l, d) in diffs.iter().enumerate() {
        value += *d;
        let eps = 2f64.powi(-(l as i32) - 1);
        out.push(PvLevel { eps, value, difference: d.norm(), bound: bound.map(|b| b(eps, 2.0 * eps)) });
    }
    finite(value, "truncated limit")?;
    let extrapolation = if levels >= 2 {
        let (a, b) = (diffs[levels - 2], diffs[levels - 1]);
        let q = b.norm() / a.norm();
        if a.norm() > 0.0 && q < 0.9 {
            b * (q / (1.0 - q))
        } else {
            zero()
        }
    } else {
        zero()
    };
    let half = levels / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = out[1 + half..]
        .iter()
        .filter(|l| l.difference > 0.0)
        .map(|l| (l.eps.log2(), l.difference.log2()))
        .unzip();
    let decay_slope = if xs.len() >= 2 { crate::trend::slope(&xs, &ys) } else { f64::NAN };
    let bound_ratio = bound.map(|b| {
        let mut worst: f64 = 0.0;
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                let (hi, lo) = (out[i].eps, out[j].eps);
                let bd = b(lo, hi);
                let d = (out[j].value - out[i].value).norm();
                if bd > 0.0 {
                    worst = worst.max(d / bd);
                } else if d > 1e-12 {
                    worst = f64::INFINITY;
                }
            }
        }
        worst
    });
    let tail_max = out[1 + half..].iter().map(|l| l.difference).fold(0.0, f64::max);
    let converged = decay_slope > 0.1 || tail_max <= 1e-12 * (1.0 + value.norm());
    Ok(PvLimit { value: value + extrapolation, levels: out, extrapolation, decay_slope, bound_ratio, converged })
}

/// Subtracted small-t integral, its extrapolated remainder and the plain
/// large-t integral with tail.
pub(crate) fn rep_parts(
    nodes: &ThetaNodes,
    f: &dyn PlaneFunction,
    x: [f64; 2],
    m: &dyn RayFactor,
    reach: f64,
    options: &OperatorOptions,
) -> (Complex64, Complex64, Complex64, f64) {
    let po = options.per_octave;
    let fx = f.value(x);
    let small_grid = TGrid::spanning(2f64.powi(-(options.small_octaves as i32)), 1.0, po);
    let small = rep_pass(nodes, f, x, m, 0.0, &small_grid, Inner::Subtracted(fx), 0);
    let a0 = small.averages[0];
    let a1 = small.averages[po];
    let remainder = if a0.norm() > 0.0 {
        let p = (a1.norm() / a0.norm()).log2().clamp(0.25, 2.0);
        a0 * (2.0 / p)
    } else {
        zero()
    };
    let t_max = (2f64.powi(options.tail_octaves) * reach / nodes.rho_max()).max(2.0);
    let large_grid = TGrid::spanning(1.0, t_max, po);
    let large = rep_pass(nodes, f, x, m, 0.0, &large_grid, Inner::Plain, 0);
    (small.grid_integral, remainder, large.total(), small.quad_error + large.quad_error)
}

/// β = Σ w Ω ∫_0^ρ (h(r) - h(0))(1/r - r/ρ²) dr.
fn beta(nodes: &ThetaNodes, h: &RadialFactor, h0: Complex64) -> Complex64 {
    if let RadialProfile::Constant(_) = h.profile {
        return zero();
    }
    let mut distinct: Vec<f64> = nodes.rho.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let q = Adaptive::new(1e-16, 1e-11);
    let values = crate::par::map(&distinct, |&rho| {
        let mut breaks = vec![0.0];
        let mut b = rho * 2f64.powi(-60);
        while b < rho {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(rho);
        q.integrate_with_breaks(|r: f64| (h.eval(r) - h0) * (1.0 / r - r / (rho * rho)), &breaks).value
    });
    let table: HashMap<u64, Complex64> = distinct.iter().map(|r| r.to_bits()).zip(values).collect();
    (0..nodes.len())
        .map(|j| nodes.omega[j] * nodes.weight[j] * table[&nodes.rho[j].to_bits()])
        .sum()
}

impl Operator {
    fn limit_hypotheses(&self) -> Result<()> {
        if self.spec.nonconv.is_some() {
            return Err(Error::UnsupportedHypothesis(
                "principal values are implemented for convolution kernels".into(),
            ));
        }
        let h = &self.spec.radial;
        if h.epsilon > 0.0 {
            return Err(Error::Config("radial.epsilon must be 0 for a principal value".into()));
        }
        let canc = self.nodes.cancellation().norm();
        if canc > CANCELLATION_TOL * self.nodes.l1().max(1.0) {
            return Err(Error::UnsupportedHypothesis(format!(
                "kernel '{}' has ∫Ω = {canc:.3e}; principal values need ∫Ω = 0",
                self.spec.omega.label()
            )));
        }
        Ok(())
    }

    fn pv_hypotheses(&self) -> Result<Complex64> {
        self.limit_hypotheses()?;
        let h = &self.spec.radial;
        let Some(h0) = h.h0 else {
            return Err(Error::Config("principal values need radial.h0 = lim_{r→0} h(r)".into()));
        };
        let dini = dini_check(h)?;
        if !dini.is_finite() {
            return Err(Error::UnsupportedHypothesis(format!(
                "h = {} fails the Dini condition ∫_0^1 |h(t) - h(0)| dt/t < ∞",
                h.label()
            )));
        }
        Ok(h0)
    }

    /// lim_{ε→0} T_ε f(x) over ε = 2^{-j}, with the difference bound
    /// |T_η f - T_ε f| ≤ ‖Ω‖₁ ‖∇f‖∞ ∫_η^ε |h| checked when ∇f is declared.
    pub fn pv_limit(&self, f: &dyn PlaneFunction, x: [f64; 2], grad_bound: Option<f64>) -> Result<PvLimit> {
        check_point(x)?;
        self.limit_hypotheses()?;
        let h = &self.spec.radial;
        let l1 = self.nodes.l1();
        let bound = grad_bound.map(|g| move |a: f64, b: f64| l1 * g * h.abs_integral(a, b));
        let bound_ref = bound.as_ref().map(|b| b as &dyn Fn(f64, f64) -> f64);
        limit_with(&self.nodes, f, x, &Convolution(h), self.options.pv_levels, bound_ref)
    }

    /// The principal value from the representation. The small-t averages
    /// use h(r)(f(x - y) - f(x)); the h - h(0) part against f(x) is the
    /// closed one-dimensional constant β.
    pub fn pv_rep(&self, f: &dyn PlaneFunction, x: [f64; 2]) -> Result<PvRep> {
        check_point(x)?;
        let h0 = self.pv_hypotheses()?;
        let fx = f.value(x);
        let b = *self.beta.get_or_init(|| beta(&self.nodes, &self.spec.radial, h0));
        let (small, remainder, large, quad_error) =
            rep_parts(&self.nodes, f, x, &Convolution(&self.spec.radial), self.reach(f, x), &self.options);
        let beta_term = fx * b;
        let correction = h0 * self.c_omega() * fx;
        let value = small + remainder + beta_term + large + correction;
        finite(value, "principal value")?;
        Ok(PvRep { value, small_scale: small, remainder, beta_term, large_scale: large, correction, quad_error })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{CatalogueKernel, KernelSpec, Resolution};
    use crate::operators::TestFunction;

    fn op(k: CatalogueKernel, h: RadialFactor) -> Operator {
        Operator::new(&KernelSpec::new(k.build(2, Resolution::default()).unwrap(), h)).unwrap()
    }

    #[test]
    fn representation_matches_limit() {
        let f = TestFunction::gaussian([0.4, -0.1], 0.7, 1.0).unwrap();
        for k in [CatalogueKernel::SplitArcs, CatalogueKernel::Cos { frequency: 1 }] {
            for h in [RadialFactor::unit(), RadialFactor::new(RadialProfile::SaturatingRoot)] {
                let o = op(k.clone(), h);
                let x = [0.2, 0.3];
                let lim = o.pv_limit(&f, x, Some(f.grad_bound())).unwrap();
                let rep = o.pv_rep(&f, x).unwrap();
                let scale = lim.value.norm() + f.sup_bound();
                assert!((lim.value - rep.value).norm() < 1e-4 * scale, "{k:?}: {lim:?} vs {rep:?}");
                assert!(lim.bound_ratio.unwrap() <= 1.0);
                assert!((lim.decay_slope - 1.0).abs() < 0.1, "slope {}", lim.decay_slope);
            }
        }
    }

    #[test]
    fn non_dini_factor_is_rejected() {
        let mut h = RadialFactor::new(RadialProfile::LogOscillation { offset: 2.0 });
        h.h0 = Some(Complex64::new(2.0, 0.0));
        let o = op(CatalogueKernel::SplitArcs, h);
        let f = TestFunction::gaussian([0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(matches!(o.pv_rep(&f, [0.0, 0.0]), Err(Error::UnsupportedHypothesis(_))));
    }

    #[test]
    fn non_cancelling_kernel_is_rejected() {
        let o = op(CatalogueKernel::SinPower { alpha: 0.5 }, RadialFactor::unit());
        let f = TestFunction::gaussian([0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(matches!(o.pv_limit(&f, [0.0, 0.0], None), Err(Error::UnsupportedHypothesis(_))));
    }
}
