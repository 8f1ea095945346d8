//! Empirical probes: ε-convergence, uniform boundedness in ε and the
//! vector-valued maximal inequality.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cover::{build_cover, lacunary_rectangles, StratifiedCover};
use crate::error::{Error, Result};
use crate::kernel::{AngularKernel, CatalogueKernel, KernelSpec, RadialFactor, RadialProfile, Resolution};
use crate::maximal::{m_sh, random_bumps, vector_valued_probe, Factor, GridFunction, MaximalConfig};
use crate::operators::{Operator, OperatorOptions, TestFunction};
use crate::starset::StarSet;
use crate::trend;
use crate::weights::{rect_condition, RectMode, Verdict, Weight};

use super::{slug, CheckKind, CheckRecord, SuiteConfig};

const UNIFORM: &str = "|T_η f(x) - T_ε f(x)| ≤ ‖Ω‖₁ ‖∇f‖∞ ∫_η^ε |h(r)| dr for 0 < η < ε";
const ODD_ZERO: &str = "Ω odd and f radial about x ⇒ T_η f(x) - T_ε f(x) = 0";
const FLAT: &str = "sup_ε ‖T_ε f‖_{p,w} / ‖f‖_{p,w} < ∞: the ratio has no trend in log ε";
const DIVERGENT: &str = "Ω ≡ 1 (∫Ω ≠ 0): T_ε f(x) ≈ 2π f(x) log(1/ε), so the ratio grows as ε → 0";
const REFUSE: &str = "boundedness is only probed for weights certified on the cover";
const VECTOR: &str =
    "‖(Σ_j |M_S f_j|^q)^{1/q}‖_{p,w} ≤ C ‖(Σ_j |f_j|^q)^{1/q}‖_{p,w} with C independent of the family";

/// Dyadic levels of the convergence probe.
const PROBE_LEVELS: usize = 12;

pub fn convergence_probe(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let tol = cfg.tolerances.identity;
    let options = OperatorOptions { pv_levels: PROBE_LEVELS, ..Default::default() };
    let radials = [
        RadialFactor::unit(),
        RadialFactor::new(RadialProfile::SaturatingRoot),
        RadialFactor::new(RadialProfile::AbsLogPower(0.5)),
    ];
    let functions: Vec<(&str, Result<TestFunction>)> = vec![
        ("gaussian", TestFunction::gaussian([0.2, -0.1], 0.8, 1.0)),
        ("bump", TestFunction::bump([-0.3, 0.4], 1.2, 1.0)),
    ];
    let points: Vec<[f64; 2]> =
        (0..9).map(|i| [-1.0 + (i % 3) as f64, -1.0 + (i / 3) as f64]).collect();
    let mut out = Vec::new();
    for kernel in [CatalogueKernel::SplitArcs, CatalogueKernel::Cos { frequency: 1 }] {
        for h in &radials {
            let id = format!("convergence.{}.{}", slug(&kernel.name()), slug(&h.label()));
            let rec = CheckRecord::new(id, UNIFORM, CheckKind::Bound, tol);
            out.push(rec.clone().finish((|| {
                let op =
                    Operator::new(&KernelSpec::new(cfg.build(&kernel)?, h.clone()))?.with_options(options);
                let mut worst = 0.0f64;
                let mut pairs = 0usize;
                for (_, f) in &functions {
                    let f = f.as_ref().map_err(clone_err)?;
                    for &x in &points {
                        let lim = op.pv_limit(f, x, Some(f.grad_bound()))?;
                        worst = worst.max(lim.bound_ratio.unwrap_or(f64::INFINITY));
                        pairs += lim.levels.len() * (lim.levels.len() - 1) / 2;
                    }
                }
                Ok(rec
                    .value("max_ratio_to_bound", worst)
                    .value("pairs", pairs as f64)
                    .value("levels", PROBE_LEVELS as f64)
                    .pass(worst <= 1.0 + tol))
            })()));
        }
    }
    let rec = CheckRecord::new("convergence.odd_kernel_radial_function", ODD_ZERO, CheckKind::Identity, 1e-12);
    out.push(rec.clone().finish((|| {
        let op = Operator::new(&KernelSpec::new(cfg.build(&CatalogueKernel::Cos { frequency: 1 })?, RadialFactor::unit()))?
            .with_options(options);
        let mut worst = 0.0f64;
        for &x in points.iter().take(3) {
            let f = TestFunction::bump(x, 1.0, 1.0)?;
            let lim = op.pv_limit(&f, x, None)?;
            let top = lim.levels[0].value.norm();
            worst = worst.max(lim.levels.iter().skip(1).map(|l| l.difference).fold(top, f64::max));
        }
        Ok(rec.value("max_difference", worst).pass(worst <= 1e-12))
    })()));
    out
}

fn clone_err(e: &Error) -> Error {
    super::identities::clone_err(e)
}

/// ±4^k on I_k = [2^{-3k} - 2^{-5k}, 2^{-3k}) and on I_k + π, k = 1..=levels.
fn odd_lacunary(levels: u32) -> Result<AngularKernel> {
    let mut arcs = Vec::new();
    for k in 1..=levels as i32 {
        let (a, b) = (2f64.powi(-3 * k) - 2f64.powi(-5 * k), 2f64.powi(-3 * k));
        let v = 4f64.powi(k);
        arcs.push((a, b, Complex64::new(v, 0.0)));
        arcs.push((a + PI, b + PI, Complex64::new(-v, 0.0)));
    }
    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
    AngularKernel::from_arcs("odd-lacunary", &arcs)
}

struct Pair {
    name: &'static str,
    kernel: Result<AngularKernel>,
    weight: Weight,
    cover: Result<StratifiedCover>,
    control: bool,
}

/// ‖T_ε f‖_{p,w} / ‖f‖_{p,w} on the probe grid for each ε.
fn ratios(op: &Operator, grid: &GridFunction, f: &TestFunction, eps: &[f64], p: f64, w: &Weight) -> Result<Vec<f64>> {
    let base = grid.with_fn(|x| Complex64::new(f.real_value(x), 0.0));
    let den = base.weighted_norm(p, w);
    eps.iter()
        .map(|&e| {
            let vals = (0..grid.len()).map(|k| op.direct(f, e, grid.node_at(k)).map(|d| d.value)).collect::<Result<Vec<_>>>()?;
            let mut g = grid.clone();
            g.values = vals;
            Ok(g.weighted_norm(p, w) / den)
        })
        .collect()
}

pub fn boundedness_probe(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let tol = cfg.tolerances.trend_slope;
    let p = cfg.p;
    let grid = GridFunction::centered(12.0, cfg.probe_nodes);
    let functions = [TestFunction::bump([0.3, 0.2], 3.0, 1.0), TestFunction::bump([-1.0, 0.5], 2.0, 1.0)];
    let cos = CatalogueKernel::Cos { frequency: 1 }.build(2, Resolution::circle(256));
    let cos_cover = cos.as_ref().map_err(clone_err).and_then(|k| build_cover(&StarSet::new(Arc::new(k.clone())), None));
    let pairs = vec![
        Pair { name: "cos_t.unit_weight", kernel: cos, weight: Weight::unit(), cover: cos_cover, control: false },
        Pair {
            name: "odd_lacunary.power_0.5",
            kernel: odd_lacunary(3),
            weight: Weight::power(0.5),
            cover: Ok(lacunary_rectangles(1..=24)),
            control: false,
        },
        Pair {
            name: "no_cancellation",
            kernel: AngularKernel::constant(2, Complex64::new(1.0, 0.0)),
            weight: Weight::unit(),
            cover: Ok(lacunary_rectangles(0..=0)),
            control: true,
        },
    ];
    let mut out = Vec::new();
    for pair in pairs {
        let (anchor, kind) = if pair.control { (DIVERGENT, CheckKind::NegativeControl) } else { (FLAT, CheckKind::Probe) };
        let rec = CheckRecord::new(format!("boundedness.{}", pair.name), anchor, kind, tol);
        out.push(rec.clone().finish((|| {
            let grid = grid.as_ref().map_err(clone_err)?;
            if !pair.control {
                let cover = pair.cover.as_ref().map_err(clone_err)?;
                let cert = rect_condition(&pair.weight, p, cfg.r, cover, RectMode::Ca)?;
                if cert.verdict != Verdict::CertifiedAtProbeScale {
                    return Ok(rec.detail("weight not certified; run weight-check").pass(false));
                }
            }
            let op = Operator::new(&KernelSpec::new(pair.kernel.map_err(|e| clone_err(&e))?, RadialFactor::unit()))?;
            let logs: Vec<f64> = cfg.eps.iter().map(|e| e.ln()).collect();
            let mut rec = rec.clone();
            let (mut worst_slope, mut sup_ratio) = (0.0f64, 0.0f64);
            let mut min_slope = f64::INFINITY;
            for (i, f) in functions.iter().enumerate() {
                let f = f.as_ref().map_err(clone_err)?;
                let r = ratios(&op, grid, f, &cfg.eps, p, &pair.weight)?;
                let ys: Vec<f64> = r.iter().map(|v| v.ln()).collect();
                let s = trend::slope(&logs, &ys);
                rec = rec.value(&format!("slope.f{i}"), s);
                worst_slope = worst_slope.max(s.abs());
                min_slope = min_slope.min(s);
                sup_ratio = r.iter().copied().fold(sup_ratio, f64::max);
            }
            let rec = rec.value("max_abs_slope", worst_slope).value("sup_ratio", sup_ratio);
            Ok(if pair.control { rec.pass(min_slope < -tol) } else { rec.pass(worst_slope <= tol) })
        })()));
    }
    let rec = CheckRecord::new("boundedness.refuses_uncertified_weight", REFUSE, CheckKind::NegativeControl, 0.0);
    out.push(rec.clone().finish(
        rect_condition(&Weight::exponential([1.0, 0.0]), p, cfg.r, &lacunary_rectangles(1..=8), RectMode::Ca)
            .map(|cert| rec.detail("probe refused; see weight-check").pass(cert.verdict != Verdict::CertifiedAtProbeScale)),
    ));
    out
}

pub fn vector_probe(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let rec = CheckRecord::new("vector.starlike_maximal", VECTOR, CheckKind::Probe, cfg.tolerances.vector_spread);
    vec![rec.clone().finish((|| {
        let grid = GridFunction::centered(10.0, cfg.grid_nodes)?;
        let star = StarSet::new(Arc::new(cfg.build(&CatalogueKernel::SplitArcs)?));
        let mcfg = MaximalConfig::for_grid(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        let families: Vec<Vec<GridFunction>> = (0..cfg.vector_families)
            .map(|_| (0..cfg.family_size).map(|_| random_bumps(&grid, 3, &mut rng)).collect())
            .collect();
        let op = |f: &GridFunction| m_sh(f, &star, &Factor::Unit, &mcfg);
        let rep = vector_valued_probe(&op, cfg.p, 2.0, &Weight::unit(), &families)?;
        Ok(rec
            .value("max_ratio", rep.max_ratio)
            .value("median_ratio", rep.median_ratio)
            .value("spread", rep.spread)
            .value("families", rep.families as f64)
            .value("family_size", rep.family_size as f64)
            .pass(rep.spread <= cfg.tolerances.vector_spread))
    })())]
}
