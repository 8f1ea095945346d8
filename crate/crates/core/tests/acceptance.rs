//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach stdout:
//! `cargo test -p rough-sio --test acceptance`.

use std::time::{Duration, Instant};

use rough_sio::harness::{CheckKind, CheckRecord, Group, SuiteConfig, Tolerances};

const IDENTITY_REL: f64 = 1e-6;
const EQUALITY_REL: f64 = 1e-8;
const CROSS_METHOD: f64 = 1e-3;
const TREND_SLOPE: f64 = 0.05;
const COVER_MISS: f64 = 1e-3;
const CONSTANT_SPREAD: f64 = 0.1;
const VECTOR_SPREAD: f64 = 3.0;

/// Criteria that cannot hold as stated. Criterion 2 asks the least
/// constant in Σ(m+1)|S_m| ≤ c_n ‖Ω‖_{L log L} to agree within ±10% across
/// kernels; that constant depends on how Ω spreads over the strata (0.41
/// for the lacunary arcs, 0.63 for |sin θ|^{-1/2}). Only the dimension
/// constant is uniform, and it is what the inequality checks use.
const EXPECTED_FAILURES: &[u32] = &[2];

fn config() -> SuiteConfig {
    SuiteConfig {
        tolerances: Tolerances {
            identity: IDENTITY_REL,
            equality: EQUALITY_REL,
            cross_method: CROSS_METHOD,
            trend_slope: TREND_SLOPE,
            cover_miss: COVER_MISS,
            constant_spread: CONSTANT_SPREAD,
            vector_spread: VECTOR_SPREAD,
        },
        ..SuiteConfig::default()
    }
}

struct Outcome {
    id: u32,
    passed: bool,
}

fn timed(cfg: &SuiteConfig, g: Group) -> (Vec<CheckRecord>, Duration) {
    let t = Instant::now();
    let recs = g.run(cfg);
    (recs, t.elapsed())
}

fn select<'a>(recs: &'a [CheckRecord], prefixes: &[&str]) -> Vec<&'a CheckRecord> {
    recs.iter().filter(|r| prefixes.iter().any(|p| r.id.starts_with(p))).collect()
}

fn max_value(recs: &[&CheckRecord], key: &str) -> f64 {
    recs.iter().filter_map(|r| r.values.get(key)).copied().fold(0.0, f64::max)
}

fn failing(recs: &[&CheckRecord]) -> String {
    let ids: Vec<&str> = recs.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
    if ids.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", ids.join(", "))
    }
}

fn line(out: &mut Vec<Outcome>, id: u32, passed: bool, what: &str, detail: String) {
    println!("{} criterion {id}: {what} ({detail})", if passed { "PASS" } else { "FAIL" });
    out.push(Outcome { id, passed });
}

fn main() {
    let cfg = config();
    let mut out = Vec::new();

    let (ids, t_id) = timed(&cfg, Group::Identity);
    let dil = select(&ids, &["identity.dilation."]);
    let pts = dil.iter().filter_map(|r| r.values.get("points")).all(|&p| p >= 100.0);
    line(
        &mut out,
        1,
        dil.len() == cfg.kernels.len() && pts && dil.iter().all(|r| r.passed) && t_id.as_secs_f64() < 5.0,
        "dilation identity at 100 points per kernel, relative 1e-6, under 5 s",
        format!(
            "{} kernels, max rel err {:.2e}, identity suite {:.2} s{}",
            dil.len(),
            max_value(&dil, "max_relative_error"),
            t_id.as_secs_f64(),
            failing(&dil)
        ),
    );

    let set = select(&ids, &["identity.set."]);
    let eq: Vec<&CheckRecord> = set.iter().copied().filter(|r| r.kind == CheckKind::Identity).collect();
    let eq_ok = eq.iter().all(|r| r.passed && r.tolerance <= EQUALITY_REL);
    let stab = ids.iter().find(|r| r.id == "identity.set.strata_constant_stability");
    let dev = stab.and_then(|r| r.values.get("max_relative_deviation")).copied().unwrap_or(f64::NAN);
    line(
        &mut out,
        2,
        set.iter().all(|r| r.passed) && eq_ok && t_id.as_secs_f64() < 10.0,
        "set equalities to 1e-8, inequalities for every kernel, c_n stable within ±10%",
        format!(
            "{} equalities, {} inequalities, c_n spread {:.1}% against {:.0}%{}",
            eq.len(),
            set.len() - eq.len() - 1,
            100.0 * dev,
            100.0 * CONSTANT_SPREAD,
            failing(&set)
        ),
    );

    let (ops, t_ops) = timed(&cfg, Group::Operators);
    let rep = select(&ops, &["operators.rep_vs_direct.", "operators.tail_halving."]);
    let cases: f64 = rep.iter().filter(|r| r.id.contains("rep_vs_direct")).filter_map(|r| r.values.get("cases")).sum();
    line(
        &mut out,
        3,
        rep.len() == 12 && cases == 90.0 && rep.iter().all(|r| r.passed) && t_ops.as_secs_f64() < 120.0,
        "representation vs direct on 3 kernels × 2 radial factors × 5 points × 3 ε, tails halve, under 2 min",
        format!(
            "{cases} cases, max scaled diff {:.2e}, operator group {:.1} s{}",
            max_value(&rep, "max_scaled_difference"),
            t_ops.as_secs_f64(),
            failing(&rep)
        ),
    );

    let pv = select(&ops, &["operators.pv.", "operators.c_omega."]);
    line(
        &mut out,
        4,
        pv.len() == 9 && pv.iter().all(|r| r.passed),
        "principal value by representation vs dyadic limit, c_Ω closed form and zero cases",
        format!("max scaled diff {:.2e}{}", max_value(&pv, "max_scaled_difference"), failing(&pv)),
    );

    let (cover, _) = timed(&cfg, Group::Cover);
    let cov = select(&cover, &["cover."]);
    let c_n = cover.iter().find(|r| r.id == "cover.global_constant").and_then(|r| r.bound).unwrap_or(f64::NAN);
    let arms = cover.iter().find(|r| r.id == "cover.sin_power_arms");
    let covered: Vec<&CheckRecord> = cov.iter().copied().filter(|r| r.id.ends_with(".coverage")).collect();
    line(
        &mut out,
        5,
        arms.is_some_and(|r| r.passed) && cov.iter().all(|r| r.passed),
        "cover miss rate ≤ 1e-3, one global c_n, |sin θ|^{-α} arms with 2 rectangles turning toward the axis",
        format!("max miss {:.1e}, global c_n {c_n:.3}{}", max_value(&covered, "miss_rate"), failing(&cov)),
    );

    let (weights, _) = timed(&cfg, Group::Weights);
    let w = select(&weights, &["weights."]);
    let alphas = w.iter().filter(|r| r.id.starts_with("weights.lacunary_example.x_")).count();
    line(
        &mut out,
        6,
        alphas == 4 && w.iter().all(|r| r.passed),
        "lacunary example: hrect finite, Σ|R_j| Cauchy, |x|^α certified for 4 α; |sin θ|^{-1/2} cover fails hrect",
        format!("{} checks, {alphas} power weights{}", w.len(), failing(&w)),
    );

    let (maximal, _) = timed(&cfg, Group::Maximal);
    let m = select(&maximal, &["maximal."]);
    let dominated = m.iter().filter(|r| r.id.starts_with("maximal.domination.")).count();
    line(
        &mut out,
        7,
        dominated == 3 && m.iter().all(|r| r.passed),
        "M_1 = M node for node, domination for 3 factors, M_S ≤ Σ M_R",
        format!("worst domination ratio {:.3}{}", max_value(&m, "worst_ratio"), failing(&m)),
    );

    let (conv, _) = timed(&cfg, Group::Convergence);
    let (bnd, _) = timed(&cfg, Group::Boundedness);
    let c8: Vec<&CheckRecord> = conv.iter().chain(&bnd).collect();
    line(
        &mut out,
        8,
        c8.iter().all(|r| r.passed),
        "ε-differences below the uniform bound, flat ε-trend for certified pairs, no-cancellation control flagged",
        format!(
            "max ratio to bound {:.3}, max |slope| certified {:.3}{}",
            max_value(&select(&conv, &["convergence."]), "max_ratio_to_bound"),
            max_value(&select(&bnd, &["boundedness.cos_t", "boundedness.odd_lacunary"]), "max_abs_slope"),
            failing(&c8)
        ),
    );

    let (vec, _) = timed(&cfg, Group::Vector);
    let v = select(&vec, &["vector."]);
    let fam = v.first().and_then(|r| r.values.get("families")).copied().unwrap_or(0.0);
    let size = v.first().and_then(|r| r.values.get("family_size")).copied().unwrap_or(0.0);
    line(
        &mut out,
        9,
        fam == 50.0 && size == 8.0 && v.iter().all(|r| r.passed),
        "vector-valued ratio max/median ≤ 3 over 50 families of 8",
        format!("spread {:.3}{}", max_value(&v, "spread"), failing(&v)),
    );

    let unexpected: Vec<u32> =
        out.iter().filter(|o| o.passed == EXPECTED_FAILURES.contains(&o.id)).map(|o| o.id).collect();
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcome: {unexpected:?}");
        std::process::exit(1);
    }
    println!("acceptance: all outcomes as expected (expected failures: {EXPECTED_FAILURES:?})");
}
