//! Invariants over random inputs.

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rough_sio::cover::{lacunary_rectangles, Rectangle, Region};
use rough_sio::kernel::{AngularKernel, CatalogueKernel, KernelSpec, RadialFactor, RadialProfile, Resolution};
use rough_sio::maximal::{m_h, m_sh, random_bumps, Factor, GridFunction, MaximalConfig};
use rough_sio::operators::{Operator, PlaneFunction, TestFunction};
use rough_sio::starset::StarSet;
use rough_sio::weights::{conjugate, dual_weight, rect_condition, ProductExponents, RectMode, Weight};
use rough_sio::Complex64;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn split_arcs(scale: f64) -> AngularKernel {
    AngularKernel::from_arcs("split", &[(0.0, PI / 2.0, c(2.0 * scale)), (PI / 2.0, 2.0 * PI, c(-2.0 / 3.0 * scale))])
        .unwrap()
}

fn operator(k: CatalogueKernel, h: RadialFactor) -> Operator {
    Operator::new(&KernelSpec::new(k.build(2, Resolution::circle(512)).unwrap(), h)).unwrap()
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    prop::array::uniform2(-1.5..1.5f64)
}

/// f + 2g on the disk holding both supports.
struct Combo<'a>(&'a TestFunction, &'a TestFunction);

impl PlaneFunction for Combo<'_> {
    fn value(&self, x: [f64; 2]) -> Complex64 {
        self.0.value(x) + self.1.value(x) * 2.0
    }
    fn support(&self) -> ([f64; 2], f64) {
        let (a, ra) = self.0.support();
        let (b, rb) = self.1.support();
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        (a, ra.max(d + rb))
    }
    fn sup_norm(&self) -> f64 {
        self.0.sup_norm() + 2.0 * self.1.sup_norm()
    }
}

fn close(a: Complex64, b: Complex64, scale: f64, tol: f64) -> bool {
    (a - b).norm() <= tol * (scale + a.norm())
}

fn grid(seed: u64) -> GridFunction {
    let g = GridFunction::centered(6.0, 17).unwrap();
    random_bumps(&g, 3, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_homogeneous(x in point(), lambda in 1e-3..1e3f64) {
        prop_assume!(x[0].hypot(x[1]) > 1e-6);
        let k = CatalogueKernel::SinPower { alpha: 0.5 }.build(2, Resolution::circle(512)).unwrap();
        let (a, b) = (k.eval(&x).unwrap(), k.eval(&[lambda * x[0], lambda * x[1]]).unwrap());
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn llogl_dominates_l1(a in -5.0..5.0f64, b in -5.0..5.0f64, cut in 0.2..6.0f64) {
        let k = AngularKernel::from_arcs("two", &[(0.0, cut, c(a)), (cut, 2.0 * PI, c(b))]).unwrap();
        prop_assert!(k.llogl_norm().unwrap() >= k.l1_norm().unwrap());
    }

    #[test]
    fn class_constant_is_monotone_in_the_factor(lo in 1.0..3.0f64, gap in 0.0..2.0f64) {
        let small = RadialFactor::new(RadialProfile::LogOscillation { offset: lo }).class_constant().unwrap();
        let big = RadialFactor::new(RadialProfile::LogOscillation { offset: lo + gap }).class_constant().unwrap();
        prop_assert!(small.dyadic <= big.dyadic * (1.0 + 1e-12));
    }

    #[test]
    fn truncation_does_not_raise_the_class_constant(eps in 1e-3..10.0f64) {
        let h = RadialFactor::new(RadialProfile::SaturatingRoot);
        let full = h.class_constant().unwrap();
        let cut = h.truncated(eps).class_constant().unwrap();
        prop_assert!(cut.dyadic <= full.dyadic * (1.0 + 1e-12));
    }

    #[test]
    fn star_sets_are_star_shaped(y in point(), t in 0.01..4.0f64, grow in 1.0..3.0f64) {
        let star = StarSet::new(Arc::new(split_arcs(1.0)));
        if star.membership(&y, t, 0.0).unwrap() {
            prop_assert!(star.membership(&y, t * grow, 0.0).unwrap());
        }
    }

    #[test]
    fn gauge_is_homogeneous(y in point(), k in -4i32..4) {
        prop_assume!(y[0].hypot(y[1]) > 1e-6);
        let star = StarSet::new(Arc::new(split_arcs(1.0)));
        let lambda = 2f64.powi(k);
        let g = star.gauge(&y).unwrap();
        prop_assert!((star.gauge(&[lambda * y[0], lambda * y[1]]).unwrap() - lambda * g).abs() <= 1e-12 * lambda * g);
    }

    #[test]
    fn rectangle_dilation_scales_measure(angle in 0.0..PI, a in 0.01..10.0f64, b in 0.01..10.0f64, lambda in 0.1..10.0f64) {
        let r = Rectangle::planar(angle, a, b);
        let d = r.dilate(lambda);
        prop_assert!((d.measure() - lambda * lambda * r.measure()).abs() <= 1e-12 * d.measure());
        prop_assert!(d.contains(&[lambda * 0.4 * a * angle.cos(), lambda * 0.4 * a * angle.sin()]));
    }

    #[test]
    fn two_average_products_are_at_least_one(alpha in -0.8..0.8f64, center in point(), half in 0.05..5.0f64) {
        let w = Weight::power(alpha);
        let v = ProductExponents::bumped(2.0, 1.0).product(&w, &Region::cube(center, half)).unwrap();
        prop_assert!(v >= 1.0 - 1e-9, "product {v}");
    }

    #[test]
    fn sublinear_and_monotone(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (f, g) = (grid(s1), grid(s2));
        let cfg = MaximalConfig::for_grid(&f);
        let star = StarSet::new(Arc::new(split_arcs(1.0)));
        let sum = f.add(&g).unwrap();
        let both = f.from_real(f.abs().iter().zip(g.abs()).map(|(a, b)| a + b).collect());
        for h in [Factor::Unit, Factor::DistancePower(-0.25)] {
            let (mf, mg, ms, mb) = (m_h(&f, &h, &cfg).unwrap(), m_h(&g, &h, &cfg).unwrap(), m_h(&sum, &h, &cfg).unwrap(), m_h(&both, &h, &cfg).unwrap());
            for k in 0..f.len() {
                prop_assert!(ms.values[k].re <= (mf.values[k].re + mg.values[k].re) * (1.0 + 1e-12) + 1e-300);
                prop_assert!(mf.values[k].re <= mb.values[k].re * (1.0 + 1e-12) + 1e-300);
            }
        }
        let (sf, sg, ss) = (m_sh(&f, &star, &Factor::Unit, &cfg).unwrap(), m_sh(&g, &star, &Factor::Unit, &cfg).unwrap(), m_sh(&sum, &star, &Factor::Unit, &cfg).unwrap());
        for k in 0..f.len() {
            prop_assert!(ss.values[k].re <= (sf.values[k].re + sg.values[k].re) * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn starlike_maximal_is_dilation_covariant(seed in any::<u64>(), k in -2i32..=2) {
        let f = grid(seed);
        let lambda = 2f64.powi(k);
        let cfg = MaximalConfig::for_grid(&f);
        let scaled = MaximalConfig { radii: cfg.radii.iter().map(|r| r / lambda).collect(), mu: cfg.mu };
        let star = StarSet::new(Arc::new(split_arcs(1.0)));
        let big = StarSet::new(Arc::new(split_arcs(lambda * lambda)));
        let a = m_sh(&f, &star, &Factor::Unit, &cfg).unwrap();
        let b = m_sh(&f, &big, &Factor::Unit, &scaled).unwrap();
        // same sets, normalization t^{-2} picks up λ²
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!((u.re * lambda * lambda - v.re).abs() <= 1e-12 * v.re, "{u} vs {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn dual_weight_swaps_the_rectangle_modes(alpha in -0.5..0.5f64, p in 2.0..3.0f64) {
        let w = Weight::power(alpha);
        let cover = lacunary_rectangles(1..=5);
        let b = rect_condition(&w, p, 1.05, &cover, RectMode::Cb).unwrap();
        let a = rect_condition(&dual_weight(&w, p).unwrap(), conjugate(p), 1.05, &cover, RectMode::Ca).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            prop_assert!((x.constant - y.constant).abs() <= 1e-6 * y.constant, "{} vs {}", x.constant, y.constant);
        }
    }

    #[test]
    fn truncated_operator_is_translation_covariant(x in point(), v in point(), eps in 0.05..1.0f64) {
        let op = operator(CatalogueKernel::SplitArcs, RadialFactor::new(RadialProfile::SaturatingRoot));
        let f = TestFunction::gaussian([0.2, -0.1], 0.8, 1.0).unwrap();
        let g = TestFunction::gaussian([0.2 + v[0], -0.1 + v[1]], 0.8, 1.0).unwrap();
        let a = op.direct(&f, eps, x).unwrap().value;
        let b = op.direct(&g, eps, [x[0] + v[0], x[1] + v[1]]).unwrap().value;
        prop_assert!(close(a, b, 1.0, 1e-8), "{a} vs {b}");
    }

    #[test]
    fn truncated_operator_is_dilation_covariant(x in point(), eps in 0.05..1.0f64) {
        let op = operator(CatalogueKernel::Cos { frequency: 1 }, RadialFactor::unit());
        let f = TestFunction::bump([0.3, 0.2], 1.5, 1.0).unwrap();
        let a = op.direct(&f, eps, x).unwrap().value;
        for lambda in [0.5, 2.0, 3.0] {
            let b = op.direct(&f.dilated(lambda), eps * lambda, [lambda * x[0], lambda * x[1]]).unwrap().value;
            prop_assert!(close(a, b, 1.0, 1e-8), "λ = {lambda}: {a} vs {b}");
        }
    }

    #[test]
    fn truncated_operator_is_linear(x in point(), eps in 0.05..1.0f64, shift in point()) {
        let op = operator(CatalogueKernel::SplitArcs, RadialFactor::unit());
        let f = TestFunction::gaussian([0.0, 0.0], 0.7, 1.0).unwrap();
        let g = TestFunction::bump(shift, 1.2, 1.0).unwrap();
        let sum = op.direct(&Combo(&f, &g), eps, x).unwrap().value;
        let parts = op.direct(&f, eps, x).unwrap().value + op.direct(&g, eps, x).unwrap().value * 2.0;
        prop_assert!(close(sum, parts, 3.0, 1e-6), "{sum} vs {parts}");
    }

    #[test]
    fn representation_agrees_and_tails_halve(x in point(), eps in 0.05..1.0f64) {
        let op = operator(CatalogueKernel::SignSplit { alpha: 0.5 }, RadialFactor::new(RadialProfile::SaturatingRoot));
        let f = TestFunction::gaussian([0.2, -0.1], 0.8, 1.0).unwrap();
        let d = op.direct(&f, eps, x).unwrap();
        let r = op.rep(&f, eps, x).unwrap();
        prop_assert!(close(d.value, r.value, f.sup_bound(), 1e-3));
        prop_assert!(r.tail_halves());
    }
}
