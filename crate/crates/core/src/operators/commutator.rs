//! Commutators with kernel Ω(x - y)|x - y|^{-2} ((a(x) - a(y))/|x - y|)^k.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernel::AngularKernel;

use super::engine::{direct_sum, CommutatorFactor, ThetaNodes};
use super::pv::{limit_with, rep_parts, PvLimit, PvRep};
use super::{check_eps, check_point, finite, reach, rep_eval, DirectValue, LipschitzField, OperatorOptions};
use super::{PlaneFunction, RepValue};

/// Truncated commutator at one point, both ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorValue {
    pub direct: DirectValue,
    pub rep: RepValue,
}

/// Principal-value commutator: dyadic limit and representation, whose
/// correction is f(x) ∫ (∇a(x)·θ)^k Ω(θ) log ρ(θ) dθ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorPv {
    pub limit: PvLimit,
    pub rep: PvRep,
}

/// Tolerance on the vanishing moments ∫ θ^α Ω for |α| = k, relative to ‖Ω‖₁.
pub const MOMENT_TOL: f64 = 1e-8;

fn mass(a: &LipschitzField, k: u32, reach: f64) -> f64 {
    // |m| ≤ L^k on the disk of radius R_x
    a.lipschitz().powi(k as i32) * std::f64::consts::PI * reach * reach
}

/// C_{k,ε} f(x) by direct quadrature and through the star averages.
pub fn commutator(
    kernel: &AngularKernel,
    f: &dyn PlaneFunction,
    a: &LipschitzField,
    k: u32,
    eps: f64,
    x: [f64; 2],
) -> Result<CommutatorValue> {
    check_eps(eps)?;
    check_point(x)?;
    if kernel.dim() != 2 {
        return domain("commutators are implemented for n = 2");
    }
    let nodes = ThetaNodes::new(kernel)?;
    let m = CommutatorFactor::new(a, x, k);
    let d = direct_sum(&nodes, f, x, &m, eps);
    finite(d.value, "commutator")?;
    let rep = rep_eval(&nodes, f, x, &m, eps, &OperatorOptions::default(), mass(a, k, reach(f, x)))?;
    Ok(CommutatorValue { direct: DirectValue { value: d.value, error: d.error }, rep })
}

/// Error unless Σ w Ω θ^α vanishes for every |α| = k.
fn check_moments(nodes: &ThetaNodes, k: u32, label: &str) -> Result<()> {
    let scale = nodes.l1().max(1.0);
    for i in 0..=k as i32 {
        let m: Complex64 = (0..nodes.len())
            .map(|j| {
                let u = nodes.u[j];
                nodes.omega[j] * (nodes.weight[j] * u[0].powi(k as i32 - i) * u[1].powi(i))
            })
            .sum();
        if m.norm() > MOMENT_TOL * scale {
            return Err(Error::UnsupportedHypothesis(format!(
                "kernel '{label}' has moment θ1^{} θ2^{i} = {:.3e}; the principal-value commutator of order {k} needs it to vanish",
                k as i32 - i,
                m.norm()
            )));
        }
    }
    Ok(())
}

/// Principal-value commutator C_k f(x).
pub fn commutator_pv(
    kernel: &AngularKernel,
    f: &dyn PlaneFunction,
    a: &LipschitzField,
    k: u32,
    x: [f64; 2],
) -> Result<CommutatorPv> {
    check_point(x)?;
    if kernel.dim() != 2 {
        return domain("commutators are implemented for n = 2");
    }
    let nodes = ThetaNodes::new(kernel)?;
    check_moments(&nodes, k, kernel.label())?;
    let options = OperatorOptions::default();
    let m = CommutatorFactor::new(a, x, k);
    let limit = limit_with(&nodes, f, x, &m, options.pv_levels, None)?;
    let fx = f.value(x);
    let multiplier: Complex64 = (0..nodes.len())
        .map(|j| nodes.omega[j] * (nodes.weight[j] * m.limit(nodes.u[j]) * nodes.rho[j].ln()))
        .sum();
    let correction = multiplier * fx;
    let (small, remainder, large, quad_error) = rep_parts(&nodes, f, x, &m, reach(f, x), &options);
    let value = small + remainder + large + correction;
    finite(value, "principal-value commutator")?;
    let rep = PvRep {
        value,
        small_scale: small,
        remainder,
        beta_term: Complex64::new(0.0, 0.0),
        large_scale: large,
        correction,
        quad_error,
    };
    Ok(CommutatorPv { limit, rep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{CatalogueKernel, KernelSpec, RadialFactor, Resolution};
    use crate::operators::{Operator, TestFunction};

    #[test]
    fn linear_symbol_reduces_to_convolution() {
        // a = v·x makes the factor (v·θ)^k, a convolution with Ω(θ)(v·θ)^k
        let kernel = CatalogueKernel::SplitArcs.build(2, Resolution::default()).unwrap();
        let v = [0.6, -0.3];
        let a = LipschitzField::Linear { slope: v, offset: 0.2 };
        let f = TestFunction::bump([0.2, 0.1], 1.5, 1.0).unwrap();
        let x = [0.1, -0.3];
        let c = commutator(&kernel, &f, &a, 1, 0.1, x).unwrap();
        let op = Operator::new(&KernelSpec::new(kernel, RadialFactor::unit())).unwrap();
        let nodes = op.nodes().map_omega(|u, w| w * (v[0] * u[0] + v[1] * u[1]));
        let m = super::super::Convolution(&op.spec().radial);
        let expected = direct_sum(&nodes, &f, x, &m, 0.1).value;
        assert!((c.direct.value - expected).norm() < 1e-10, "{c:?} vs {expected}");
        assert!((c.rep.value - c.direct.value).norm() < 1e-5 * (1.0 + expected.norm()));
    }

    #[test]
    fn principal_value_matches_limit() {
        let kernel = CatalogueKernel::Cos { frequency: 2 }.build(2, Resolution::default()).unwrap();
        let a = LipschitzField::Sine { wave: [1.0, 0.5], amplitude: 0.8 };
        let f = TestFunction::gaussian([0.2, 0.0], 0.8, 1.0).unwrap();
        let x = [0.3, 0.2];
        let pv = commutator_pv(&kernel, &f, &a, 1, x).unwrap();
        let scale = pv.limit.value.norm() + f.sup_bound();
        assert!((pv.limit.value - pv.rep.value).norm() < 1e-4 * scale, "{pv:?}");
    }

    #[test]
    fn moments_are_required() {
        let kernel = CatalogueKernel::Cos { frequency: 1 }.build(2, Resolution::default()).unwrap();
        let a = LipschitzField::Linear { slope: [1.0, 0.0], offset: 0.0 };
        let f = TestFunction::gaussian([0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(matches!(commutator_pv(&kernel, &f, &a, 1, [0.0, 0.0]), Err(Error::UnsupportedHypothesis(_))));
    }
}
