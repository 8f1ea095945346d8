//! Identities and inequalities for the star set and the radial class.

use std::f64::consts::{LN_2, PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::{star_average_constant, Rectangle};
use crate::error::Result;
use crate::kernel::{hclass_constant, AngularKernel, HClassEstimate, RadialFactor, RadialProfile};
use crate::quad::{gauss_legendre, Adaptive};
use crate::sphere::norm;
use crate::starset::StarSet;

use super::{rel, slug, CheckKind, CheckRecord, SuiteConfig};

const DILATION: &str = "∫_0^∞ t^{-n} χ_{tS∖B(0,ε)}(y) dt/t = (1/n) χ_{|y|>ε} |Ω(y)| / |y|^n";
const MEASURE: &str = "|S_Ω| = (1/n) ∫_{S^{n-1}} |Ω(θ)| dθ";
const SIGN: &str = "∫_{S_Ω} sgn Ω(y) dy = (1/n) ∫_{S^{n-1}} Ω(θ) dθ";
const LOG_PLUS: &str = "∫_{S_Ω} log⁺|y| dy ≤ (1/n²) ‖Ω‖_{L log L}";
const LOG_ABS: &str = "∫_{S_Ω} |log|y|| dy ≤ (1/n²)(‖Ω‖_{L log L} + |S^{n-1}|/e)";
const STRATA: &str = "Σ_m (m+1)|S_m| ≤ c_n ‖Ω‖_{L log L}, c_n = (1/n) max(3, 1/(n log 2))";
const STABILITY: &str = "the least c with Σ_m (m+1)|S_m| ≤ c ‖Ω‖_{L log L} agrees across kernels within the spread";
const CLASS: &str = "sup_R R^{-1} ∫_R^{2R} |h|^σ dr < ∞ on the probed range (no growth at either end)";
const FORMS: &str = "R^{-1}∫_0^R |h|^σ ≤ sup_ρ ρ^{-1}∫_ρ^{2ρ} |h|^σ;  R^{-1}∫_R^{2R} |h|^σ ≤ 2 (2R)^{-1}∫_0^{2R} |h|^σ;  \
                     ∫_R^{2R} |h|^σ dr/r ∈ [1/2, 1] · R^{-1}∫_R^{2R} |h|^σ";
const LOG_BLOCK: &str = "∫_a^b |h(r)|^σ dr/r ≤ C_h ⌈log₂(b/a)⌉";
const VANISH_LINE: &str = "h = 0 on (0, ε]: ∫_0^R |h| dr/r ≤ C_h(log₂(1/ε) + 1) + (C_h / log 2) log⁺R";
const VANISH_SET: &str =
    "h = 0 on (0, ε]: ∫_0^1 ∫_{S_Ω} |h(t|y|)| dy dt/t ≤ (C₁/n + C₂/n²) ‖Ω‖_{L log L}";
const STAR_AVERAGE: &str = "∫_E |h(t|y|)|^σ dy ≤ c_n C_h |E| for E star-shaped about 0, c_n = n 2^n/(2^n - 1)";
const NEGATIVE: &str = "h(r) = r^{-1/2} has no class constant for σ = 1, so the star-average bound has no constant";
const KERNEL_L1: &str = "‖Ω‖₁ and ∫Ω of the arc kernels in closed form";

pub fn identity_suite(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let kernels = build_kernels(cfg);
    let mut out = kernel_examples(cfg);
    out.extend(dilation_checks(cfg, &kernels));
    out.extend(set_integral_checks(cfg, &kernels));
    out.extend(radial_checks(cfg, &kernels));
    out
}

pub(crate) type Named = (String, Result<Arc<AngularKernel>>);

/// t ↦ |tE| / t² for a set E, with its exact measure.
type Profile<'a> = Box<dyn Fn(f64) -> f64 + Sync + 'a>;

pub(crate) fn build_kernels(cfg: &SuiteConfig) -> Vec<Named> {
    cfg.kernels.iter().map(|k| (slug(&k.name()), cfg.build(k).map(Arc::new))).collect()
}

fn kernel_examples(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    use crate::kernel::CatalogueKernel;
    let split = CheckRecord::new("identity.kernel.split_arcs", KERNEL_L1, CheckKind::Identity, cfg.tolerances.equality);
    let split = split.clone().finish((|| {
        let k = cfg.build(&CatalogueKernel::SplitArcs)?;
        let l1 = k.l1_norm()?;
        let canc = k.cancellation()?.norm();
        let ok = rel(l1, TAU, 1.0) <= cfg.tolerances.equality && canc <= cfg.tolerances.equality;
        Ok(split.value("l1", l1).value("expected_l1", TAU).value("integral", canc).pass(ok))
    })());
    let levels = 6;
    let lac = CheckRecord::new("identity.kernel.lacunary_arcs", KERNEL_L1, CheckKind::Identity, cfg.tolerances.equality);
    let lac = lac.clone().finish((|| {
        let k = cfg.build(&CatalogueKernel::LacunaryArcs { levels })?;
        let l1 = k.l1_norm()?;
        // Σ 4^k 2^{-5k}
        let expected: f64 = (1..=levels as i32).map(|j| 2f64.powi(-3 * j)).sum();
        Ok(lac.value("l1", l1).value("expected_l1", expected).pass(rel(l1, expected, 1e-300) <= cfg.tolerances.equality))
    })());
    vec![split, lac]
}

/// Numeric and closed sides of the dilation identity at random points,
/// half of them aimed at cells where Ω ≠ 0.
pub fn dilation_checks(cfg: &SuiteConfig, kernels: &[Named]) -> Vec<CheckRecord> {
    let tol = cfg.tolerances.identity;
    kernels
        .iter()
        .enumerate()
        .map(|(idx, (name, kernel))| {
            let rec = CheckRecord::new(format!("identity.dilation.{name}"), DILATION, CheckKind::Identity, tol);
            rec.clone().finish((|| {
                let kernel = kernel.as_ref().map_err(clone_err)?;
                let star = StarSet::new(kernel.clone());
                let cells = kernel.cells();
                let nonzero: Vec<usize> = (0..cells.len()).filter(|&i| kernel.cell_value(i).norm() > 0.0).collect();
                let rho_max = star.rho_max();
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9));
                let pts: Vec<([f64; 2], f64)> = (0..cfg.identity_points)
                    .map(|i| {
                        let (theta, rho) = if i % 2 == 0 || nonzero.is_empty() {
                            (rng.gen_range(0.0..TAU), rho_max)
                        } else {
                            let c = nonzero[rng.gen_range(0..nonzero.len())];
                            let (a, b) = cells.arc(c);
                            (rng.gen_range(a..b), star.cell_rho(c))
                        };
                        let r = rho * rng.gen_range(0.02..1.3);
                        let eps = [0.0, 0.05, 0.3][rng.gen_range(0..3)] * rho_max;
                        ([r * theta.cos(), r * theta.sin()], eps)
                    })
                    .collect();
                let rows = crate::par::map(&pts, |(y, eps)| star.dilation_identity(y, *eps));
                let (mut worst, mut guarded, mut nonzero_sides) = (0.0f64, 0, 0);
                for ((y, eps), row) in pts.iter().zip(rows) {
                    let (numeric, closed) = row?;
                    let r = norm(y);
                    if (r - eps).abs() <= 1e-9 * r {
                        guarded += 1;
                        continue;
                    }
                    let err = if closed == 0.0 { numeric.abs() } else { (numeric - closed).abs() / closed };
                    if closed > 0.0 {
                        nonzero_sides += 1;
                    }
                    worst = worst.max(err);
                }
                Ok(rec
                    .value("max_relative_error", worst)
                    .value("points", pts.len() as f64)
                    .value("nonzero_points", nonzero_sides as f64)
                    .value("guarded", guarded as f64)
                    .pass(worst <= tol))
            })())
        })
        .collect()
}

pub(crate) fn clone_err(e: &crate::Error) -> crate::Error {
    crate::Error::Domain(e.to_string())
}

/// Equalities and inequalities for the integrals over S_Ω, and the
/// stability of the strata constant across kernels.
pub fn set_integral_checks(cfg: &SuiteConfig, kernels: &[Named]) -> Vec<CheckRecord> {
    let eq = cfg.tolerances.equality;
    let mut out = Vec::new();
    let mut constants = Vec::new();
    for (name, kernel) in kernels {
        let id = |s: &str| format!("identity.set.{name}.{s}");
        let ints = kernel.as_ref().map_err(clone_err).and_then(|k| StarSet::new(k.clone()).set_integrals());
        let s = match ints {
            Ok(s) => s,
            Err(e) => {
                out.push(CheckRecord::new(id("measure"), MEASURE, CheckKind::Identity, eq).failed(&e));
                continue;
            }
        };
        out.push(
            CheckRecord::new(id("measure"), MEASURE, CheckKind::Identity, eq)
                .value("set", s.measure)
                .value("kernel", s.measure_from_kernel)
                .pass(rel(s.measure, s.measure_from_kernel, 1e-300) <= eq),
        );
        let d = (s.sgn_integral[0] - s.sgn_from_kernel[0]).hypot(s.sgn_integral[1] - s.sgn_from_kernel[1]);
        out.push(
            CheckRecord::new(id("sign"), SIGN, CheckKind::Identity, eq)
                .value("set_re", s.sgn_integral[0])
                .value("set_im", s.sgn_integral[1])
                .value("kernel_re", s.sgn_from_kernel[0])
                .value("kernel_im", s.sgn_from_kernel[1])
                .value("relative_difference", d / s.measure.max(1.0))
                .pass(d <= eq * s.measure.max(1.0)),
        );
        let le = |a: f64, b: f64| a <= b * (1.0 + 1e-12) + 1e-15;
        out.push(
            CheckRecord::new(id("log_plus"), LOG_PLUS, CheckKind::Bound, 1e-12)
                .value("integral", s.logp_integral)
                .bound(s.logp_bound)
                .pass(le(s.logp_integral, s.logp_bound)),
        );
        out.push(
            CheckRecord::new(id("log_abs"), LOG_ABS, CheckKind::Bound, 1e-12)
                .value("integral", s.log_integral)
                .value("unit_constant_form", s.log_bound_unit)
                .bound(s.log_bound)
                .pass(le(s.log_integral, s.log_bound)),
        );
        let strata_bound = s.c_n_dimension * s.llogl_norm;
        out.push(
            CheckRecord::new(id("strata"), STRATA, CheckKind::Bound, 1e-12)
                .value("weighted_sum", s.weighted_strata_sum)
                .value("llogl_norm", s.llogl_norm)
                .value("least_constant", s.c_n_min)
                .value("residual_mass", s.residual_mass)
                .bound(strata_bound)
                .pass(le(s.weighted_strata_sum, strata_bound)),
        );
        if s.llogl_norm > 0.0 {
            constants.push((name.clone(), s.c_n_min));
        }
    }
    let spread = cfg.tolerances.constant_spread;
    let mut rec = CheckRecord::new("identity.set.strata_constant_stability", STABILITY, CheckKind::Stability, spread);
    let mut sorted: Vec<f64> = constants.iter().map(|c| c.1).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        out.push(rec.detail("no kernel with positive L log L norm"));
        return out;
    }
    let median = sorted[sorted.len() / 2];
    let worst = sorted.iter().map(|c| (c / median - 1.0).abs()).fold(0.0, f64::max);
    for (name, c) in &constants {
        rec = rec.value(&format!("least_constant.{name}"), *c);
    }
    let dim = crate::starset::dimension_constant(2);
    out.push(
        rec.value("median", median)
            .value("max_relative_deviation", worst)
            .value("dimension_constant", dim)
            .bound(dim)
            .detail("the least constant depends on how Ω distributes over strata; only the dimension constant is uniform")
            .pass(worst <= spread),
    );
    out
}

/// g(r) = |h(r)|^σ.
fn power_of(h: &RadialFactor, sigma: f64) -> impl Fn(f64) -> f64 + Sync + '_ {
    move |r: f64| {
        let v = h.eval(r).norm();
        if sigma == 1.0 {
            v
        } else {
            v.powf(sigma)
        }
    }
}

/// ∫_a^b g(r) w(r) dr in the variable s = log r with a break per octave.
fn log_integral(g: &(dyn Fn(f64) -> f64 + Sync), a: f64, b: f64, times_r: bool) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (la, lb) = (a.ln(), b.ln());
    let mut breaks = vec![la];
    let mut s = la + LN_2;
    while s < lb {
        breaks.push(s);
        s += LN_2;
    }
    breaks.push(lb);
    let q = Adaptive::new(1e-300, 1e-11);
    q.integrate_with_breaks(
        |s: f64| {
            let r = s.exp();
            if times_r {
                g(r) * r
            } else {
                g(r)
            }
        },
        &breaks,
    )
    .value
}

pub fn radial_checks(cfg: &SuiteConfig, kernels: &[Named]) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for (i, doc) in cfg.radial.iter().enumerate() {
        let h = match doc.factor() {
            Ok(h) => h,
            Err(e) => {
                out.push(CheckRecord::new(format!("identity.class.radial_{i}"), CLASS, CheckKind::Bound, 0.05).failed(&e));
                continue;
            }
        };
        let name = slug(&h.label());
        let class = CheckRecord::new(format!("identity.class.{name}.membership"), CLASS, CheckKind::Bound, 0.05);
        let est = match h.class_constant() {
            Ok(e) => e,
            Err(e) => {
                out.push(class.failed(&e));
                continue;
            }
        };
        out.push(
            class
                .value("sigma", est.sigma)
                .value("dyadic", est.dyadic)
                .value("initial", est.initial)
                .value("logarithmic", est.logarithmic)
                .value("growth_low", est.growth_low)
                .value("growth_high", est.growth_high)
                .pass(est.accepted),
        );
        if !est.accepted {
            continue;
        }
        out.push(class_forms(cfg, &name, &h));
        out.push(log_blocks(&name, &h, &est));
        out.extend(vanishing(&name, &h, &est, kernels));
        out.push(star_average(cfg, &name, &h, &est));
    }
    out.push(log_block_closed_form());
    let neg = CheckRecord::new("identity.star_average.negative_control", NEGATIVE, CheckKind::NegativeControl, 0.05);
    let h = RadialFactor::new(RadialProfile::Power(-0.5));
    out.push(neg.clone().finish(h.class_constant().map(|e| {
        neg.value("growth_low", e.growth_low)
            .value("dyadic", e.dyadic)
            .detail("passes when the class probe rejects h")
            .pass(!e.accepted)
    })));
    out
}

/// The three class forms compared pointwise on R = 2^j.
fn class_forms(cfg: &SuiteConfig, name: &str, h: &RadialFactor) -> CheckRecord {
    let tol = cfg.tolerances.identity;
    let sigma = h.sigma;
    let g = power_of(h, sigma);
    let dyadic_js: Vec<i32> = (-100..=21).collect();
    let rows = crate::par::map(&dyadic_js, |&j| {
        let r = 2f64.powi(j);
        (log_integral(&g, r, 2.0 * r, true) / r, log_integral(&g, r, 2.0 * r, false))
    });
    let a = |j: i32| rows[(j + 100) as usize].0;
    let c = |j: i32| rows[(j + 100) as usize].1;
    let sup_a = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let js: Vec<i32> = (-20..=21).collect();
    let initial = crate::par::map(&js, |&j| {
        let r = 2f64.powi(j);
        let tiny = r * 2f64.powi(-80);
        (log_integral(&g, tiny, r, true) + gauss_legendre(8).integrate(0.0, tiny, &g)) / r
    });
    let b = |j: i32| initial[(j + 20) as usize];
    let (mut w1, mut w2, mut w3) = (0.0f64, 0.0f64, 0.0f64);
    for j in -20..=20 {
        w1 = w1.max(b(j) / sup_a);
        w2 = w2.max(a(j) / (2.0 * b(j + 1)));
        w3 = w3.max((0.5 * a(j) / c(j)).max(c(j) / a(j)));
    }
    let worst = w1.max(w2).max(w3);
    CheckRecord::new(format!("identity.class.{name}.forms"), FORMS, CheckKind::Bound, tol)
        .value("initial_over_dyadic", w1)
        .value("dyadic_over_twice_initial", w2)
        .value("logarithmic_bracket", w3)
        .value("dyadic_sup", sup_a)
        .pass(worst <= 1.0 + tol)
}

fn log_blocks(name: &str, h: &RadialFactor, est: &HClassEstimate) -> CheckRecord {
    let g = power_of(h, h.sigma);
    let pairs = [(1.0, 8.0), (0.01, 3.0), (2f64.powi(-10), 2f64.powi(10)), (0.3, 0.31), (5.0, 1e4), (1e-6, 1e-5)];
    let mut worst = 0.0f64;
    for (a, b) in pairs {
        let lhs = log_integral(&g, a, b, false);
        let bound = est.dyadic * (b / a).log2().ceil();
        worst = worst.max(lhs / bound);
    }
    CheckRecord::new(format!("identity.log_block.{name}"), LOG_BLOCK, CheckKind::Bound, 1e-9)
        .value("max_ratio", worst)
        .value("c_h", est.dyadic)
        .pass(worst <= 1.0 + 1e-9)
}

fn log_block_closed_form() -> CheckRecord {
    let rec = CheckRecord::new("identity.log_block.unit_closed_form", LOG_BLOCK, CheckKind::Identity, 1e-12);
    let h = RadialFactor::unit();
    let g = power_of(&h, 1.0);
    let lhs = log_integral(&g, 1.0, 8.0, false);
    rec.clone().finish(h.class_constant().map(|est| {
        let bound = est.dyadic * 3.0;
        rec.value("integral", lhs)
            .value("log_8", 8f64.ln())
            .value("c_h", est.dyadic)
            .bound(bound)
            .pass((lhs - 8f64.ln()).abs() <= 1e-12 && lhs <= bound && (est.dyadic - 1.0).abs() <= 1e-9)
    }))
}

fn unit_sigma_constant(h: &RadialFactor, est: &HClassEstimate) -> Result<f64> {
    if h.sigma == 1.0 {
        return Ok(est.dyadic);
    }
    let p = h.clone();
    Ok(hclass_constant(&move |r| p.eval(r), 1.0, -30, 30, 4)?.dyadic)
}

fn vanishing(
    name: &str,
    h: &RadialFactor,
    est: &HClassEstimate,
    kernels: &[Named],
) -> Vec<CheckRecord> {
    let line = CheckRecord::new(format!("identity.vanishing.{name}.line"), VANISH_LINE, CheckKind::Bound, 1e-9);
    let set = CheckRecord::new(format!("identity.vanishing.{name}.set"), VANISH_SET, CheckKind::Bound, 1e-9);
    let c_h = match unit_sigma_constant(h, est) {
        Ok(c) => c,
        Err(e) => return vec![line.failed(&e), set.failed(&e)],
    };
    let g = power_of(h, 1.0);
    let constants = |eps: f64| (c_h * ((1.0 / eps).log2() + 1.0), c_h / LN_2);
    let mut worst_line = 0.0f64;
    for eps in [0.5, 1.0 / 16.0, 1.0 / 1024.0] {
        let (c1, c2) = constants(eps);
        for j in -3..=30 {
            let r = 2f64.powi(j);
            let lhs = log_integral(&g, eps, r, false);
            worst_line = worst_line.max(lhs / (c1 + c2 * r.ln().max(0.0)));
        }
    }
    let line = line.value("max_ratio", worst_line).value("c_h", c_h).pass(worst_line <= 1.0 + 1e-9);

    // ∫_0^1∫_S |h(t|y|)| dy dt/t = Σ w ∫_0^ρ r I(r) dr, I(r) = ∫_ε^r |h| ds/s,
    // which is ρ²I(ρ)/2 - (1/2)∫_ε^ρ s|h(s)| ds.
    let mut worst_set = 0.0f64;
    let mut failure = None;
    for (kname, kernel) in kernels {
        let kernel = match kernel {
            Ok(k) if k.dim() == 2 => k,
            _ => continue,
        };
        let llogl = match kernel.llogl_norm() {
            Ok(v) => v,
            Err(e) => {
                failure = Some(format!("{kname}: {e}"));
                continue;
            }
        };
        let cells = kernel.cells();
        let mut rhos: Vec<(f64, f64)> = (0..cells.len()).map(|i| (kernel.cell_rho(i), cells.measure(i))).collect();
        rhos.sort_by(|a, b| a.0.total_cmp(&b.0));
        for eps in [0.5, 1.0 / 16.0] {
            let (c1, c2) = constants(eps);
            let (mut at, mut i_acc, mut j_acc, mut lhs) = (eps, 0.0, 0.0, 0.0);
            for &(rho, w) in &rhos {
                if rho <= eps {
                    continue;
                }
                if rho > at {
                    i_acc += log_integral(&g, at, rho, false);
                    j_acc += log_integral(&|s: f64| g(s) * s, at, rho, true);
                    at = rho;
                }
                lhs += w * (0.5 * rho * rho * i_acc - 0.5 * j_acc);
            }
            let bound = (c1 / 2.0 + c2 / 4.0) * llogl;
            if bound > 0.0 {
                worst_set = worst_set.max(lhs / bound);
            } else if lhs > 0.0 {
                worst_set = f64::INFINITY;
            }
        }
    }
    let mut set = set.value("max_ratio", worst_set).value("c_h", c_h).pass(worst_set <= 1.0 + 1e-9);
    if let Some(f) = failure {
        set = set.detail(f).pass(false);
    }
    vec![line, set]
}

/// F(R) = ∫_0^R s g(s) ds from a cumulative table on a geometric grid.
struct Moment<'a> {
    g: &'a (dyn Fn(f64) -> f64 + Sync),
    lo: f64,
    per_octave: usize,
    cum: Vec<f64>,
}

impl<'a> Moment<'a> {
    fn new(g: &'a (dyn Fn(f64) -> f64 + Sync), lo_exp: i32, hi_exp: i32, per_octave: usize) -> Self {
        let lo = 2f64.powi(lo_exp);
        let count = (hi_exp - lo_exp) as usize * per_octave;
        let gl = gauss_legendre(8);
        let node = |k: usize| lo * (k as f64 / per_octave as f64).exp2();
        let pieces = crate::par::map_range(count, |k| gl.integrate(node(k), node(k + 1), |s: f64| s * g(s)));
        let mut cum = Vec::with_capacity(count + 1);
        cum.push(gl.integrate(0.0, lo, |s: f64| s * g(s)));
        for p in pieces {
            cum.push(cum.last().unwrap() + p);
        }
        Moment { g, lo, per_octave, cum }
    }

    fn eval(&self, r: f64) -> f64 {
        let gl = gauss_legendre(8);
        let f = |s: f64| s * (self.g)(s);
        if r <= self.lo {
            return gl.integrate(0.0, r, f);
        }
        let k = (((r / self.lo).log2() * self.per_octave as f64).floor() as usize).min(self.cum.len() - 1);
        let start = self.lo * (k as f64 / self.per_octave as f64).exp2();
        self.cum[k] + gl.integrate(start, r, f)
    }
}

fn star_average(cfg: &SuiteConfig, name: &str, h: &RadialFactor, est: &HClassEstimate) -> CheckRecord {
    use crate::kernel::CatalogueKernel;
    let rec = CheckRecord::new(format!("identity.star_average.{name}"), STAR_AVERAGE, CheckKind::Bound, 1e-9);
    rec.clone().finish((|| {
        let sigma = h.sigma;
        let g = power_of(h, sigma);
        let table = &Moment::new(&g, -48, 24, 32);
        let c_n = star_average_constant(2);
        let bound = c_n * est.dyadic;
        let ts: Vec<f64> = (-8..=8).map(|j| 2f64.powi(j)).collect();
        let q = Adaptive::new(1e-300, 1e-10);
        let rect_integral = |rect: &Rectangle, t: f64| {
            let mut breaks: Vec<f64> =
                rect.corners().iter().map(|c| c[1].atan2(c[0]).rem_euclid(TAU)).collect();
            breaks.extend([0.0, TAU]);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            q.integrate_with_breaks(
                |th: f64| table.eval(t * rect.radial_extent(&[th.cos(), th.sin()])),
                &breaks,
            )
            .value
                / (t * t)
        };
        let mut sets: Vec<(String, Profile<'_>, f64)> = Vec::new();
        let radius = 1.5;
        sets.push(("disk".into(), Box::new(move |t| TAU * table.eval(t * radius) / (t * t)), PI * radius * radius));
        for (label, rect) in
            [("rectangle_a", Rectangle::planar(0.4, 2.0, 0.3)), ("rectangle_b", Rectangle::planar(1.2, 5.0, 0.05))]
        {
            let m = rect.measure();
            sets.push((label.into(), Box::new(move |t| rect_integral(&rect, t)), m));
        }
        for k in [CatalogueKernel::SplitArcs, CatalogueKernel::SinPower { alpha: 0.5 }] {
            let star = StarSet::new(Arc::new(cfg.build(&k)?));
            let m = star.measure();
            let label = format!("star_set_{}", slug(&k.name()));
            sets.push((
                label,
                Box::new(move |t| {
                    let cells = star.cells();
                    (0..cells.len()).map(|i| cells.measure(i) * table.eval(t * star.cell_rho(i))).sum::<f64>() / (t * t)
                }),
                m,
            ));
        }
        let mut rec = rec.value("c_n", c_n).value("c_h", est.dyadic).bound(bound);
        let mut worst = 0.0f64;
        for (label, integral, measure) in &sets {
            let w = ts.iter().map(|&t| integral(t) / measure / bound).fold(0.0, f64::max);
            rec = rec.value(&format!("max_ratio.{label}"), w);
            worst = worst.max(w);
        }
        Ok(rec.value("max_ratio", worst).pass(worst <= 1.0 + 1e-9))
    })())
}
