//! Checks of the cover, weight, maximal and operator modules.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cover::{build_cover, hrect_check, lacunary_rectangles, verify_cover, RectFactor, StratifiedCover};
use crate::error::Result;
use crate::kernel::{AngularKernel, BoundedFactor, CatalogueKernel, KernelSpec, RadialFactor, RadialProfile, Resolution};
use crate::maximal::{hl_max, m_h, m_rect, m_sh, pointwise_domination, random_bumps, Factor, GridFunction, MaximalConfig};
use crate::operators::{commutator, commutator_pv, direct_sum, Convolution, LipschitzField, Operator, TestFunction};
use crate::quad::Adaptive;
use crate::starset::StarSet;
use crate::weights::{rect_condition, summability, RectMode, Verdict, Weight};

use super::identities::{build_kernels, clone_err};
use super::{slug, CheckKind, CheckRecord, SuiteConfig};

const COVERAGE: &str = "S_m ⊂ ∪_k R_{m,k} up to measure zero (sampled miss rate)";
const COMPARABLE: &str = "longest half-side of R_{m,k} lies in [2^m/2, 4·2^m]";
const GLOBAL: &str = "Σ_k |R_{m,k}| ≤ c_n |S_m| with one c_n for every kernel and stratum";
const ARMS: &str = "Ω = |sin θ|^{-1/2}: two rectangles per stratum, turning toward the x₁-axis as m grows";
const DELETED: &str = "removing a rectangle from a cover leaves part of S_m uncovered";
const DILATE: &str = "|λR| = λ^n |R|";
const LAC_MEMBER: &str = "R_j = [-2^j, 2^j] × [-2^{-2j}, 2^{-2j}] covers S_Ω for Ω = Σ_k 2^{2k} χ_{I_k}";
const LAC_HRECT: &str = "Ω = Σ_k 2^{2k} χ_{I_k}: |R_j|^{-1} ∫_{R_j} |Ω| ≤ C for all j";
const LAC_SUM: &str = "Σ_j |R_j| < ∞ (partial sums Cauchy)";
const RECT_WEIGHT: &str = "Σ_j K_j < ∞ with (avg_{R} w)^{1/p}(avg_{R} w^{-rp'/p})^{1/rp'} ≤ K_j/|R_j| on translates and dilates of R_j";
const SIN_HRECT: &str = "the canonical cover of |sin θ|^{-1/2} violates |R|^{-1}∫_R |Ω| ≤ C (averages grow with m)";
const EXP_WEIGHT: &str = "w = e^{x₁} fails the rectangle condition on long rectangles";
const HL: &str = "M_H f = M f when H ≡ 1";
const DOMINATION: &str = "M_H f ≤ C_H^{1/σ} (M(|f|^{σ'}))^{1/σ'} with C_H = sup_r r^{-n} ∫_{|y|<r} H^σ";
const STAR_BY_RECT: &str = "M_{S} f ≤ Σ_{m,k} M_{R_{m,k}} f when S ⊂ ∪ R_{m,k}";
const REP: &str = "T_ε f(x) = n ∫_0^∞ A_{ε,t} f(x) dt/t";
const TAIL: &str = "|A_{ε,t} f(x)| ≤ t^{-n} ‖f‖∞ ∫_{tS ∩ B(0,R_x)} |h|: the tail bound halves when t_max doubles";
const PV: &str = "lim_{ε→0} T_ε f(x) = n ∫_0^∞ A_t f(x) dt/t + h(0) c_Ω f(x)";
const C_OMEGA: &str = "c_Ω = (1/n) ∫_{S^{n-1}} Ω log|Ω| dθ; Ω = 2 on an arc of length π/2 and -2/3 elsewhere gives (π/2) log 3";
const C_OMEGA_ZERO: &str = "c_Ω = 0 for Ω = cos θ and for |Ω| ≡ 1";
const ODD: &str = "Ω odd and f radial about x ⇒ T_ε f(x) = 0";
const GAUSS: &str = "Ω ≡ 1, h ≡ 1, f = e^{-|y|²/2}: T_ε f(0) = 2π ∫_ε^∞ e^{-r²/2} dr/r";
const NONCONV_UNIT: &str = "k ≡ 1 reduces T^{(k)}_ε to T_ε";
const NONCONV: &str = "T^{(k)}_ε f(x) = ∫_{|x-y|>ε} Ω(x-y)|x-y|^{-n} k(x,y) f(y) dy by both formulas, and |T^{(k)}_ε f| ≤ sup|k| · ∫ |Ω||h||f|";
const COMM_LINEAR: &str = "a(x) = v·x: the commutator kernel is Ω(θ)(v·θ)^k |y|^{-n}";
const COMM_CONST: &str = "a constant ⇒ C_k f = 0";
const COMM_PV: &str = "principal-value commutator: dyadic limit = representation + f(x) ∫ (∇a(x)·θ)^k Ω(θ) log ρ(θ) dθ";

pub fn cover_checks(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let tol = cfg.tolerances.cover_miss;
    let mut out = Vec::new();
    let mut global: Vec<(String, f64)> = Vec::new();
    for (i, (name, kernel)) in build_kernels(cfg).into_iter().enumerate() {
        let cov = CheckRecord::new(format!("cover.{name}.coverage"), COVERAGE, CheckKind::Bound, tol);
        let built = kernel.map_err(|e| clone_err(&e)).and_then(|k| {
            let star = StarSet::new(k);
            build_cover(&star, None).map(|c| (star, c))
        });
        let (star, cover) = match built {
            Ok(v) => v,
            Err(e) => {
                out.push(cov.failed(&e));
                continue;
            }
        };
        let rep = verify_cover(&cover, &star, cfg.cover_samples, cfg.seed.wrapping_add(i as u64));
        out.push(
            cov.value("miss_rate", rep.coverage_miss_rate)
                .value("union_miss_rate", rep.union_miss_rate)
                .value("rectangles", cover.rects.len() as f64)
                .value("c_n", rep.c_n)
                .pass(rep.coverage_miss_rate <= tol),
        );
        let sides: Vec<f64> = cover.rects.iter().map(|r| r.rect.longest_half() / 2f64.powi(r.m as i32)).collect();
        let (lo, hi) = sides.iter().fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(*s), b.max(*s)));
        out.push(
            CheckRecord::new(format!("cover.{name}.comparability"), COMPARABLE, CheckKind::Bound, 0.0)
                .value("min_side_ratio", lo)
                .value("max_side_ratio", hi)
                .value("gamma", rep.gamma)
                .pass(lo >= 0.5 && hi <= 4.0),
        );
        global.push((name.clone(), rep.c_n));
        if name.starts_with("sin_t") {
            out.push(arms(&cover));
        }
        if name == "split_arcs" {
            let rep = verify_cover(&cover.without(0), &star, cfg.cover_samples, cfg.seed);
            out.push(
                CheckRecord::new("cover.deleted_rectangle", DELETED, CheckKind::NegativeControl, 0.0)
                    .value("miss_rate", rep.coverage_miss_rate)
                    .pass(rep.coverage_miss_rate > 0.0),
            );
            let worst = cover
                .rects
                .iter()
                .map(|r| (r.rect.dilate(3.0).measure() / r.rect.measure() / 9.0 - 1.0).abs())
                .fold(0.0, f64::max);
            out.push(
                CheckRecord::new("cover.dilation_scaling", DILATE, CheckKind::Identity, 1e-12)
                    .value("max_relative_error", worst)
                    .pass(worst <= 1e-12),
            );
        }
    }
    let c_n = global.iter().map(|g| g.1).fold(0.0, f64::max);
    let mut rec = CheckRecord::new("cover.global_constant", GLOBAL, CheckKind::Bound, 0.0).bound(c_n);
    for (name, c) in &global {
        rec = rec.value(&format!("c_n.{name}"), *c);
    }
    out.push(
        rec.value("c_n", c_n)
            .detail("the achieved constant is reported; no value is fixed in advance")
            .pass(c_n.is_finite() && c_n > 0.0),
    );
    out.push(lacunary_membership(cfg));
    out
}

fn arms(cover: &StratifiedCover) -> CheckRecord {
    let two: Vec<usize> = cover.strata().into_iter().filter(|&m| cover.in_stratum(m).count() == 2).collect();
    let dev: Vec<f64> = two
        .iter()
        .map(|&m| cover.in_stratum(m).map(|r| r.rect.major_axis_deviation()).fold(0.0, f64::max))
        .collect();
    let decreasing = dev.windows(2).all(|w| w[1] < w[0]);
    let mut rec = CheckRecord::new("cover.sin_power_arms", ARMS, CheckKind::Identity, 0.0)
        .value("two_rectangle_strata", two.len() as f64);
    for (m, d) in two.iter().zip(&dev) {
        rec = rec.value(&format!("axis_deviation.m{m}"), *d);
    }
    rec.pass(two.len() >= 2 && decreasing)
}

fn lacunary_kernel(levels: u32) -> Result<AngularKernel> {
    CatalogueKernel::LacunaryArcs { levels }.build(2, Resolution::default())
}

fn lacunary_membership(cfg: &SuiteConfig) -> CheckRecord {
    let rec = CheckRecord::new("cover.lacunary_example.membership", LAC_MEMBER, CheckKind::Bound, cfg.tolerances.cover_miss);
    rec.clone().finish((|| {
        let star = StarSet::new(Arc::new(lacunary_kernel(12)?));
        let cover = lacunary_rectangles(1..=12);
        let rep = verify_cover(&cover, &star, cfg.cover_samples, cfg.seed);
        Ok(rec
            .value("miss_rate", rep.coverage_miss_rate)
            .value("union_miss_rate", rep.union_miss_rate)
            .pass(rep.union_miss_rate <= cfg.tolerances.cover_miss))
    })())
}

pub fn weight_checks(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let rects = lacunary_rectangles(1..=24);
    let hrect = CheckRecord::new("weights.lacunary_example.hrect", LAC_HRECT, CheckKind::Bound, 0.05);
    out.push(hrect.clone().finish((|| {
        let k = Arc::new(lacunary_kernel(16)?);
        let rep = hrect_check(&RectFactor::Angular(k), &lacunary_rectangles(1..=16).rects, 1.0, 0..=0)?;
        Ok(hrect.value("constant", rep.constant).value("growth", rep.growth).pass(rep.passed && rep.constant.is_finite()))
    })()));
    let per_j: Vec<(usize, f64)> = rects.rects.iter().map(|r| (r.m, r.rect.measure())).collect();
    let s = summability(&per_j, false);
    out.push(
        CheckRecord::new("weights.lacunary_example.measure_sum", LAC_SUM, CheckKind::Bound, crate::weights::CAUCHY_FRACTION)
            .value("total", s.total)
            .value("last_block_fraction", s.last_block_fraction)
            .value("decay_rate", s.decay_rate)
            .pass(s.verdict == Verdict::CertifiedAtProbeScale),
    );
    for doc in &cfg.weights {
        let w = match doc.weight() {
            Ok(w) => w,
            Err(e) => {
                out.push(CheckRecord::new("weights.invalid", RECT_WEIGHT, CheckKind::Bound, 0.0).failed(&e));
                continue;
            }
        };
        let rec = CheckRecord::new(
            format!("weights.lacunary_example.{}", slug(&w.label())),
            RECT_WEIGHT,
            CheckKind::Bound,
            crate::weights::CAUCHY_FRACTION,
        );
        out.push(rec.clone().finish(rect_condition(&w, cfg.p, cfg.r, &rects, RectMode::Ca).map(|rep| {
            rec.value("total", rep.summability.total)
                .value("last_block_fraction", rep.summability.last_block_fraction)
                .value("decay_rate", rep.summability.decay_rate)
                .value("p", rep.p)
                .value("r", rep.r)
                .detail(rep.semantics)
                .pass(rep.verdict == Verdict::CertifiedAtProbeScale)
        })));
    }
    let neg = CheckRecord::new("weights.sin_power_canonical.hrect", SIN_HRECT, CheckKind::NegativeControl, 0.05);
    out.push(neg.clone().finish((|| {
        let k = Arc::new(cfg.build(&CatalogueKernel::SinPower { alpha: 0.5 })?);
        let cover = build_cover(&StarSet::new(k.clone()), None)?;
        let rep = hrect_check(&RectFactor::Angular(k), &cover.rects, 1.0, 0..=0)?;
        Ok(neg
            .value("constant", rep.constant)
            .value("growth", rep.growth)
            .pass(!rep.passed && rep.growth > 0.0))
    })()));
    let exp = CheckRecord::new("weights.exponential_long_rectangles", EXP_WEIGHT, CheckKind::NegativeControl, 0.0);
    out.push(exp.clone().finish(
        rect_condition(&Weight::exponential([1.0, 0.0]), 2.0, 1.0, &lacunary_rectangles(1..=8), RectMode::B2)
            .map(|rep| exp.value("decay_rate", rep.summability.decay_rate).pass(rep.verdict == Verdict::Fails)),
    ));
    out
}

pub fn maximal_checks(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let grid = match GridFunction::centered(10.0, cfg.grid_nodes) {
        Ok(g) => g,
        Err(e) => return vec![CheckRecord::new("maximal.grid", HL, CheckKind::Identity, 0.0).failed(&e)],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = random_bumps(&grid, 4, &mut rng);
    let mcfg = MaximalConfig::for_grid(&f);
    let hl = CheckRecord::new("maximal.unit_factor_is_hardy_littlewood", HL, CheckKind::Identity, 0.0);
    out.push(hl.clone().finish((|| {
        let a = hl_max(&f, &mcfg)?;
        let b = m_h(&f, &Factor::Unit, &mcfg)?;
        let differing = a.values.iter().zip(&b.values).filter(|(x, y)| x != y).count();
        Ok(hl.value("nodes", f.len() as f64).value("differing_nodes", differing as f64).pass(differing == 0))
    })()));
    let angular = cfg.build(&CatalogueKernel::SinPower { alpha: 0.25 }).map(Arc::new);
    let mut factors = vec![
        ("distance_power", Ok(Factor::DistancePower(-0.25))),
        ("log_oscillation", Ok(Factor::Radial(RadialFactor::new(RadialProfile::LogOscillation { offset: 2.0 })))),
    ];
    factors.insert(1, ("angular_sin_power", angular.map(Factor::Angular)));
    for (name, h) in factors {
        let rec = CheckRecord::new(format!("maximal.domination.{name}"), DOMINATION, CheckKind::Bound, 1e-12);
        out.push(rec.clone().finish(h.and_then(|h| pointwise_domination(&f, &h, 2.0, &mcfg)).map(|rep| {
            rec.value("c_h", rep.c_h)
                .value("worst_ratio", rep.worst_ratio)
                .value("violations", rep.violations as f64)
                .value("nodes", rep.nodes as f64)
                .pass(rep.violations == 0)
        })));
    }
    for k in [CatalogueKernel::SplitArcs, CatalogueKernel::SinPower { alpha: 0.5 }] {
        let rec = CheckRecord::new(
            format!("maximal.starlike_by_rectangles.{}", slug(&k.name())),
            STAR_BY_RECT,
            CheckKind::Bound,
            1e-12,
        );
        out.push(rec.clone().finish((|| {
            let star = StarSet::new(Arc::new(cfg.build(&k)?));
            let cover = build_cover(&star, None)?;
            let lhs = m_sh(&f, &star, &Factor::Unit, &mcfg)?;
            let mut rhs = vec![0.0; f.len()];
            for r in &cover.rects {
                let m = m_rect(&f, &r.rect, &Factor::Unit, &mcfg)?;
                for (acc, v) in rhs.iter_mut().zip(&m.values) {
                    *acc += v.re;
                }
            }
            let mut violations = 0;
            let mut worst = 0.0f64;
            for (l, r) in lhs.values.iter().zip(&rhs) {
                if l.re > r * (1.0 + 1e-12) + 1e-300 {
                    violations += 1;
                }
                if *r > 0.0 {
                    worst = worst.max(l.re / r);
                }
            }
            Ok(rec
                .value("violations", violations as f64)
                .value("worst_ratio", worst)
                .value("rectangles", cover.rects.len() as f64)
                .pass(violations == 0))
        })()));
    }
    out
}

struct Case {
    kernel: CatalogueKernel,
    radial: RadialFactor,
}

fn matrix() -> Vec<Case> {
    let mut out = Vec::new();
    for kernel in
        [CatalogueKernel::SplitArcs, CatalogueKernel::Cos { frequency: 1 }, CatalogueKernel::SignSplit { alpha: 0.5 }]
    {
        for radial in [RadialFactor::unit(), RadialFactor::new(RadialProfile::SaturatingRoot)] {
            out.push(Case { kernel: kernel.clone(), radial });
        }
    }
    out
}

/// The probe function of the operator matrix.
pub(crate) fn matrix_function() -> TestFunction {
    TestFunction::Gaussian { center: [0.2, -0.1], width: 0.8, amplitude: 1.0 }
}

pub const MATRIX_EPS: [f64; 3] = [1.0, 0.25, 0.0625];

pub fn operator_checks(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let tol = cfg.tolerances.cross_method;
    let f = matrix_function();
    let scale_f = f.sup_bound();
    let mut out = Vec::new();
    for case in matrix() {
        let name = format!("{}.{}", slug(&case.kernel.name()), slug(&case.radial.label()));
        let rep_rec = CheckRecord::new(format!("operators.rep_vs_direct.{name}"), REP, CheckKind::CrossMethod, tol);
        let tail_rec = CheckRecord::new(format!("operators.tail_halving.{name}"), TAIL, CheckKind::Bound, 0.0);
        let pv_rec = CheckRecord::new(format!("operators.pv.{name}"), PV, CheckKind::CrossMethod, tol);
        let op = match cfg.build(&case.kernel).and_then(|k| Operator::new(&KernelSpec::new(k, case.radial.clone()))) {
            Ok(op) => op,
            Err(e) => {
                out.extend([rep_rec.failed(&e), tail_rec.failed(&e), pv_rec.failed(&e)]);
                continue;
            }
        };
        let jobs: Vec<([f64; 2], f64)> =
            cfg.points.iter().flat_map(|&x| MATRIX_EPS.iter().map(move |&e| (x, e))).collect();
        let rows: Result<Vec<(f64, bool, f64)>> = jobs
            .iter()
            .map(|&(x, eps)| {
                let d = op.direct(&f, eps, x)?;
                let r = op.rep(&f, eps, x)?;
                let err = (d.value - r.value).norm() / (d.value.norm() + scale_f);
                Ok((err, r.tail_halves(), r.tail_bound))
            })
            .collect();
        match rows {
            Ok(rows) => {
                let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
                let halving = rows.iter().filter(|r| r.1).count();
                let max_tail = rows.iter().map(|r| r.2).fold(0.0, f64::max);
                out.push(rep_rec.value("max_scaled_difference", worst).value("cases", rows.len() as f64).pass(worst <= tol));
                out.push(
                    tail_rec
                        .value("halving_cases", halving as f64)
                        .value("cases", rows.len() as f64)
                        .value("max_tail_bound", max_tail)
                        .pass(halving == rows.len()),
                );
            }
            Err(e) => out.extend([rep_rec.failed(&e), tail_rec.failed(&e)]),
        }
        let pv: Result<Vec<(f64, bool)>> = cfg
            .points
            .iter()
            .map(|&x| {
                let lim = op.pv_limit(&f, x, Some(f.grad_bound()))?;
                let rep = op.pv_rep(&f, x)?;
                Ok(((lim.value - rep.value).norm() / (lim.value.norm() + scale_f), lim.converged))
            })
            .collect();
        out.push(match pv {
            Ok(rows) => {
                let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
                let converged = rows.iter().all(|r| r.1);
                pv_rec
                    .value("max_scaled_difference", worst)
                    .value("points", rows.len() as f64)
                    .value("all_converged", if converged { 1.0 } else { 0.0 })
                    .pass(worst <= tol && converged)
            }
            Err(e) => pv_rec.failed(&e),
        });
    }
    out.extend(c_omega_checks(cfg));
    out.extend(small_operator_checks(cfg));
    out
}

fn c_omega_checks(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let expected = 0.5 * PI * 3f64.ln();
    let rec = CheckRecord::new("operators.c_omega.split_arcs", C_OMEGA, CheckKind::Identity, 1e-8);
    out.push(rec.clone().finish((|| {
        let k = cfg.build(&CatalogueKernel::SplitArcs)?;
        let from_kernel = k.c_omega()?;
        let op = Operator::new(&KernelSpec::new(k, RadialFactor::unit()))?;
        let from_nodes = op.c_omega();
        let err = (from_kernel - expected).norm().max((from_nodes - expected).norm());
        Ok(rec
            .value("kernel", from_kernel.re)
            .value("nodes", from_nodes.re)
            .value("expected", expected)
            .pass(err <= 1e-8 * expected))
    })()));
    for (name, k) in [("cos", CatalogueKernel::Cos { frequency: 1 }), ("unit_modulus", CatalogueKernel::SignSplit { alpha: 0.0 })] {
        let rec = CheckRecord::new(format!("operators.c_omega.{name}"), C_OMEGA_ZERO, CheckKind::Identity, 1e-10);
        out.push(rec.clone().finish((|| {
            let k = cfg.build(&k)?;
            let a = k.c_omega()?.norm();
            let b = Operator::new(&KernelSpec::new(k, RadialFactor::unit()))?.c_omega().norm();
            Ok(rec.value("kernel", a).value("nodes", b).pass(a.max(b) < 1e-10))
        })()));
    }
    out
}

fn small_operator_checks(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let tol = cfg.tolerances.cross_method;
    let mut out = Vec::new();

    let rec = CheckRecord::new("operators.odd_kernel_radial_function", ODD, CheckKind::Identity, 1e-8);
    out.push(rec.clone().finish((|| {
        let op = Operator::new(&KernelSpec::new(cfg.build(&CatalogueKernel::Cos { frequency: 1 })?, RadialFactor::unit()))?;
        let x = [0.4, -0.3];
        let f = TestFunction::bump(x, 1.5, 1.0)?;
        let worst = MATRIX_EPS.iter().map(|&e| op.direct(&f, e, x).map(|d| d.value.norm())).try_fold(0.0f64, |a, v| v.map(|v| a.max(v)))?;
        Ok(rec.value("max_abs_value", worst).pass(worst <= 1e-8))
    })()));

    let rec = CheckRecord::new("operators.gaussian_oracle", GAUSS, CheckKind::Identity, 1e-6);
    out.push(rec.clone().finish((|| {
        let op = Operator::new(&KernelSpec::new(cfg.build(&CatalogueKernel::Constant { value: 1.0 })?, RadialFactor::unit()))?;
        let f = TestFunction::gaussian([0.0, 0.0], 1.0, 1.0)?;
        let cutoff = f.support_radius();
        let q = Adaptive::new(1e-14, 1e-12);
        let mut worst = 0.0f64;
        for eps in MATRIX_EPS {
            let oracle = 2.0 * PI * q.integrate(|r: f64| (-0.5 * r * r).exp() / r, eps, cutoff).value;
            let d = op.direct(&f, eps, [0.0, 0.0])?.value;
            let r = op.rep(&f, eps, [0.0, 0.0])?.value;
            worst = worst.max((d.re - oracle).abs().max((r.re - oracle).abs()) / oracle);
        }
        Ok(rec.value("max_relative_error", worst).pass(worst <= 1e-6))
    })()));

    let f = matrix_function();
    let rec = CheckRecord::new("operators.nonconv.unit_factor", NONCONV_UNIT, CheckKind::Identity, 0.0);
    out.push(rec.clone().finish((|| {
        let k = cfg.build(&CatalogueKernel::SplitArcs)?;
        let plain = Operator::new(&KernelSpec::new(k.clone(), RadialFactor::unit()))?;
        let mut spec = KernelSpec::new(k, RadialFactor::unit());
        spec.nonconv = Some(BoundedFactor::unit());
        let nc = Operator::new(&spec)?;
        let mut equal = true;
        for &x in &cfg.points {
            let (d, r) = nc.t_eps_nonconv(&f, 0.25, x)?;
            equal &= d.value == plain.direct(&f, 0.25, x)?.value && r.value == plain.rep(&f, 0.25, x)?.value;
        }
        Ok(rec.pass(equal).detail("bitwise equality on the same nodes and grids"))
    })()));

    let rec = CheckRecord::new("operators.nonconv.cos_dot", NONCONV, CheckKind::CrossMethod, tol);
    out.push(rec.clone().finish((|| {
        let k = cfg.build(&CatalogueKernel::SplitArcs)?;
        let mut spec = KernelSpec::new(k, RadialFactor::unit());
        spec.nonconv = Some(BoundedFactor::cos_dot());
        let sup = spec.nonconv.as_ref().map_or(1.0, |k| k.sup_bound);
        let nc = Operator::new(&spec)?;
        let abs_kernel = AngularKernel::from_arcs(
            "|split-arcs|",
            &[(0.0, PI / 2.0, Complex64::new(2.0, 0.0)), (PI / 2.0, 2.0 * PI, Complex64::new(2.0 / 3.0, 0.0))],
        )?;
        let abs_op = Operator::new(&KernelSpec::new(abs_kernel, RadialFactor::unit()))?;
        let (mut worst, mut ratio) = (0.0f64, 0.0f64);
        for &x in &cfg.points {
            for eps in MATRIX_EPS {
                let (d, r) = nc.t_eps_nonconv(&f, eps, x)?;
                worst = worst.max((d.value - r.value).norm() / (d.value.norm() + f.sup_bound()));
                // f ≥ 0, so the majorant is the |Ω| operator applied to f
                let major = sup * abs_op.direct(&f, eps, x)?.value.re;
                ratio = ratio.max(d.value.norm() / major);
            }
        }
        Ok(rec
            .value("max_scaled_difference", worst)
            .value("max_majorant_ratio", ratio)
            .pass(worst <= tol && ratio <= 1.0 + 1e-9))
    })()));

    let rec = CheckRecord::new("operators.commutator.linear_symbol", COMM_LINEAR, CheckKind::CrossMethod, tol);
    out.push(rec.clone().finish((|| {
        let kernel = cfg.build(&CatalogueKernel::SplitArcs)?;
        let v = [0.6, -0.3];
        let a = LipschitzField::Linear { slope: v, offset: 0.2 };
        let op = Operator::new(&KernelSpec::new(kernel.clone(), RadialFactor::unit()))?;
        let effective = op.nodes().map_omega(|u, w| w * (v[0] * u[0] + v[1] * u[1]));
        let mut worst_reduction = 0.0f64;
        let mut worst_rep = 0.0f64;
        for &x in &cfg.points {
            for eps in MATRIX_EPS {
                let c = commutator(&kernel, &f, &a, 1, eps, x)?;
                let expected = direct_sum(&effective, &f, x, &Convolution(&op.spec().radial), eps).value;
                let scale = expected.norm() + f.sup_bound();
                worst_reduction = worst_reduction.max((c.direct.value - expected).norm() / scale);
                worst_rep = worst_rep.max((c.rep.value - c.direct.value).norm() / scale);
            }
        }
        Ok(rec
            .value("max_reduction_difference", worst_reduction)
            .value("max_scaled_difference", worst_rep)
            .pass(worst_reduction <= 1e-10 && worst_rep <= tol))
    })()));

    let rec = CheckRecord::new("operators.commutator.constant_symbol", COMM_CONST, CheckKind::Identity, 0.0);
    out.push(rec.clone().finish((|| {
        let kernel = cfg.build(&CatalogueKernel::SplitArcs)?;
        let a = LipschitzField::Linear { slope: [0.0, 0.0], offset: 1.5 };
        let c = commutator(&kernel, &f, &a, 2, 0.25, [0.3, 0.1])?;
        Ok(rec
            .value("direct", c.direct.value.norm())
            .value("rep", c.rep.value.norm())
            .pass(c.direct.value.norm() == 0.0 && c.rep.value.norm() == 0.0))
    })()));

    let rec = CheckRecord::new("operators.commutator.principal_value", COMM_PV, CheckKind::CrossMethod, tol);
    out.push(rec.clone().finish((|| {
        let kernel = cfg.build(&CatalogueKernel::Cos { frequency: 2 })?;
        let a = LipschitzField::Sine { wave: [1.0, 0.5], amplitude: 0.8 };
        let mut worst = 0.0f64;
        for &x in cfg.points.iter().take(3) {
            let pv = commutator_pv(&kernel, &f, &a, 1, x)?;
            worst = worst.max((pv.limit.value - pv.rep.value).norm() / (pv.limit.value.norm() + f.sup_bound()));
        }
        Ok(rec.value("max_scaled_difference", worst).pass(worst <= tol))
    })()));
    out
}
