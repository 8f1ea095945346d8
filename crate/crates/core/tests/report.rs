use std::collections::BTreeSet;

use rough_sio::harness::{run_groups, CheckKind, Group, SuiteConfig};

const CHEAP: &[Group] = &[Group::Identity, Group::Cover, Group::Weights, Group::Maximal];

#[test]
fn records_are_well_formed() {
    let report = run_groups(&SuiteConfig::default(), CHEAP).unwrap();
    assert!(report.checks.len() >= 40, "{} checks", report.checks.len());
    let ids: BTreeSet<&str> = report.checks.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids.len(), report.checks.len(), "duplicate check ids");
    for r in &report.checks {
        assert!(!r.anchor.is_empty(), "{} has no anchor", r.id);
        assert!(r.tolerance.is_finite() && r.tolerance >= 0.0, "{}: tolerance {}", r.id, r.tolerance);
        assert!(r.values.values().all(|v| !v.is_nan()), "{} has NaN values", r.id);
    }
    assert_eq!(report.summary.total, report.checks.len());
    assert_eq!(report.summary.passed + report.summary.failed, report.summary.total);
    assert!(report.ok(), "gating failures: {:?}", report.summary.gating_failures);
}

#[test]
fn stability_failures_gate_only_in_strict_mode() {
    let cfg = SuiteConfig { strict: true, ..SuiteConfig::default() };
    let report = run_groups(&cfg, &[Group::Identity]).unwrap();
    let stab = report.get("identity.set.strata_constant_stability").unwrap();
    assert_eq!(stab.kind, CheckKind::Stability);
    assert!(!stab.passed);
    assert!(!report.ok());
    assert!(report.summary.gating_failures.iter().any(|id| id == &stab.id));
}

#[test]
fn reruns_are_identical() {
    let cfg = SuiteConfig::default();
    let a = run_groups(&cfg, &[Group::Identity, Group::Cover]).unwrap().to_json().unwrap();
    let b = run_groups(&cfg, &[Group::Identity, Group::Cover]).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn verdicts_do_not_depend_on_the_seed() {
    let run = |seed| {
        let report = run_groups(&SuiteConfig { seed, ..SuiteConfig::default() }, &[Group::Identity, Group::Cover]).unwrap();
        report.checks.iter().map(|r| (r.id.clone(), r.passed)).collect::<Vec<_>>()
    };
    assert_eq!(run(1), run(0xdead_beef));
}

#[test]
fn bad_configs_are_rejected() {
    let msg = |cfg: SuiteConfig| cfg.validate().unwrap_err().to_string();
    assert!(msg(SuiteConfig { eps: vec![0.5, 0.25], ..SuiteConfig::default() }).contains("eps"));
    assert!(msg(SuiteConfig { p: 0.5, ..SuiteConfig::default() }).contains("p:"));
    assert!(msg(SuiteConfig { kernels: vec![], ..SuiteConfig::default() }).contains("kernels"));
}
