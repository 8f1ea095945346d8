//! Verification suite: identity and bound checks, cross-method operator
//! comparisons, and empirical probes, collected into one report.
//!
//! Every record carries the mathematical statement it tests and the
//! tolerance it was judged with. Probes and stability observations are
//! evidence rather than theorems and only gate the verdict in strict mode.

mod identities;
mod modules;
mod probes;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{RadialDoc, WeightDoc};
use crate::kernel::{AngularKernel, CatalogueKernel, Resolution};

pub use identities::identity_suite;
pub use modules::{cover_checks, maximal_checks, operator_checks, weight_checks};
pub use probes::{boundedness_probe, convergence_probe, vector_probe};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of numeric identities.
    pub identity: f64,
    /// Relative tolerance of the set-integral equalities.
    pub equality: f64,
    /// Cross-method operator agreement, relative to |value| + ‖f‖∞.
    pub cross_method: f64,
    /// Allowed |slope| of a flat trend.
    pub trend_slope: f64,
    pub cover_miss: f64,
    /// Allowed relative spread of the strata constant across kernels.
    pub constant_spread: f64,
    /// Allowed max/median of the vector-valued ratios.
    pub vector_spread: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-6,
            equality: 1e-8,
            cross_method: 1e-3,
            trend_slope: 0.05,
            cover_miss: 1e-3,
            constant_spread: 0.1,
            vector_spread: 3.0,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            ("tolerances.identity", self.identity),
            ("tolerances.equality", self.equality),
            ("tolerances.cross_method", self.cross_method),
            ("tolerances.trend_slope", self.trend_slope),
            ("tolerances.cover_miss", self.cover_miss),
            ("tolerances.constant_spread", self.constant_spread),
            ("tolerances.vector_spread", self.vector_spread),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name}: must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Kernels for the identity suite and the cover checks.
    pub kernels: Vec<CatalogueKernel>,
    /// Cells per circle for callable kernels.
    pub resolution: usize,
    /// Radial factors for the class-constant checks.
    pub radial: Vec<RadialDoc>,
    /// Random points per kernel for the dilation identity.
    pub identity_points: usize,
    pub cover_samples: usize,
    /// Weights for the rectangle condition on the lacunary family.
    pub weights: Vec<WeightDoc>,
    pub p: f64,
    pub r: f64,
    /// Truncation levels of the boundedness probe.
    pub eps: Vec<f64>,
    /// Probe points of the operator matrix.
    pub points: Vec<[f64; 2]>,
    /// Nodes per side of the maximal-operator grid.
    pub grid_nodes: usize,
    /// Nodes per side of the boundedness-probe grid.
    pub probe_nodes: usize,
    pub vector_families: usize,
    pub family_size: usize,
    pub strict: bool,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20_240_601,
            kernels: vec![
                CatalogueKernel::Constant { value: 1.0 },
                CatalogueKernel::Cos { frequency: 1 },
                CatalogueKernel::Cos { frequency: 2 },
                CatalogueKernel::SinPower { alpha: 0.5 },
                CatalogueKernel::SignSplit { alpha: 0.5 },
                CatalogueKernel::SplitArcs,
                CatalogueKernel::LacunaryArcs { levels: 6 },
            ],
            resolution: 4096,
            radial: vec![
                RadialDoc::new("constant", &[("value", 1.0)]),
                RadialDoc::new("saturating_root", &[]),
                RadialDoc::new("log_oscillation", &[("offset", 0.5)]),
            ],
            identity_points: 100,
            cover_samples: 10_000,
            weights: [-0.5, 0.0, 0.5, 1.0].iter().map(|&alpha| WeightDoc::Power { alpha }).collect(),
            p: 2.0,
            r: 1.05,
            eps: (3..=7).map(|j| 2f64.powi(-j)).collect(),
            points: vec![[0.0, 0.0], [0.3, 0.1], [-0.5, 0.4], [1.1, -0.7], [2.0, 1.5]],
            grid_nodes: 33,
            probe_nodes: 11,
            vector_families: 50,
            family_size: 8,
            strict: false,
            tolerances: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: SuiteConfig = crate::io::load(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if self.kernels.is_empty() {
            return bad("kernels", "must not be empty".into());
        }
        if self.resolution < 16 {
            return bad("resolution", format!("must be at least 16, got {}", self.resolution));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad("eps", format!("levels must lie in (0, 1), got {e}"));
        }
        if self.eps.len() < 3 {
            return bad("eps", "a trend needs at least 3 levels".into());
        }
        if self.points.is_empty() || self.points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return bad("points", "need at least one finite point".into());
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad("p", format!("must be in (1, ∞), got {}", self.p));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return bad("r", format!("must be ≥ 1, got {}", self.r));
        }
        if self.grid_nodes < 5 || self.probe_nodes < 3 {
            return bad("grid_nodes", "grids need at least 5 (probe: 3) nodes per side".into());
        }
        if self.vector_families == 0 || self.family_size == 0 {
            return bad("vector_families", "must be positive".into());
        }
        for (i, r) in self.radial.iter().enumerate() {
            r.factor().map_err(|e| Error::Config(format!("radial[{i}]: {e}")))?;
        }
        for (i, w) in self.weights.iter().enumerate() {
            w.weight().map_err(|e| Error::Config(format!("weights[{i}]: {e}")))?;
        }
        Ok(())
    }

    pub(crate) fn build(&self, k: &CatalogueKernel) -> Result<AngularKernel> {
        k.build(2, Resolution::circle(self.resolution))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Two evaluations of the same quantity.
    Identity,
    /// An inequality with an explicit constant.
    Bound,
    /// Two independent numerical methods for one value.
    CrossMethod,
    /// A case the theory excludes; passes when the violation is detected.
    NegativeControl,
    /// A reported constant expected to be stable across inputs.
    Stability,
    /// Empirical evidence (norm ratios, trends).
    Probe,
}

impl CheckKind {
    pub fn gates(self, strict: bool) -> bool {
        match self {
            CheckKind::Stability | CheckKind::Probe => strict,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    /// The statement being checked.
    pub anchor: String,
    pub kind: CheckKind,
    pub values: BTreeMap<String, f64>,
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, anchor: &str, kind: CheckKind, tolerance: f64) -> Self {
        CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            kind,
            values: BTreeMap::new(),
            bound: None,
            tolerance,
            passed: false,
            detail: String::new(),
        }
    }

    pub fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.into(), v);
        self
    }

    pub fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn pass(mut self, ok: bool) -> Self {
        self.passed = ok;
        self
    }

    /// A failed record carrying the error of the evaluation.
    pub fn failed(mut self, e: &Error) -> Self {
        self.passed = false;
        self.detail = format!("{}: {e}", self.id);
        self
    }

    /// Finish with `ok` from a fallible evaluation.
    pub fn finish(self, r: Result<Self>) -> Self {
        let base = self.clone();
        match r {
            Ok(rec) => rec,
            Err(e) => base.failed(&e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Failed checks that gate the verdict.
    pub gating_failures: Vec<String>,
    /// Failed probes and stability checks (non-gating unless strict).
    pub advisory_failures: Vec<String>,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub strict: bool,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(seed: u64, strict: bool, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let failed: Vec<&CheckRecord> = checks.iter().filter(|c| !c.passed).collect();
        let (gating, advisory): (Vec<&CheckRecord>, Vec<&CheckRecord>) =
            failed.iter().partition(|c| c.kind.gates(strict));
        let summary = Summary {
            total: checks.len(),
            passed: checks.len() - failed.len(),
            failed: failed.len(),
            gating_failures: gating.iter().map(|c| c.id.clone()).collect(),
            advisory_failures: advisory.iter().map(|c| c.id.clone()).collect(),
            verdict: if gating.is_empty() { "pass" } else { "fail" }.into(),
        };
        Report { seed, strict, checks, summary }
    }

    pub fn ok(&self) -> bool {
        self.summary.gating_failures.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Records whose id starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.checks.iter().filter(move |c| c.id.starts_with(prefix))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Check groups in run order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Identity,
    Cover,
    Weights,
    Maximal,
    Operators,
    Convergence,
    Boundedness,
    Vector,
}

impl Group {
    pub const ALL: [Group; 8] = [
        Group::Identity,
        Group::Cover,
        Group::Weights,
        Group::Maximal,
        Group::Operators,
        Group::Convergence,
        Group::Boundedness,
        Group::Vector,
    ];

    pub fn run(self, cfg: &SuiteConfig) -> Vec<CheckRecord> {
        match self {
            Group::Identity => identity_suite(cfg),
            Group::Cover => cover_checks(cfg),
            Group::Weights => weight_checks(cfg),
            Group::Maximal => maximal_checks(cfg),
            Group::Operators => operator_checks(cfg),
            Group::Convergence => convergence_probe(cfg),
            Group::Boundedness => boundedness_probe(cfg),
            Group::Vector => vector_probe(cfg),
        }
    }
}

/// Run the given groups into one report.
pub fn run_groups(cfg: &SuiteConfig, groups: &[Group]) -> Result<Report> {
    cfg.validate()?;
    let checks = groups.iter().flat_map(|g| g.run(cfg)).collect();
    Ok(Report::new(cfg.seed, cfg.strict, checks))
}

pub fn run_all(cfg: &SuiteConfig) -> Result<Report> {
    run_groups(cfg, &Group::ALL)
}

/// Relative difference with a floor on the scale.
pub(crate) fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Short identifier fragment for a kernel or factor label.
pub(crate) fn slug(label: &str) -> String {
    let mut out = String::new();
    let chars: Vec<char> = label.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        // a negative exponent keeps its sign
        if c == '-' && i > 0 && chars[i - 1] == '^' {
            if !out.ends_with('_') {
                out.push('_');
            }
            out.push_str("neg");
            continue;
        }
        let c = match c {
            'θ' => 't',
            'a'..='z' | 'A'..='Z' | '0'..='9' | '.' => c.to_ascii_lowercase(),
            _ => '_',
        };
        if !(c == '_' && (out.is_empty() || out.ends_with('_'))) {
            out.push(c);
        }
    }
    out.trim_end_matches('_').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_plain() {
        assert_eq!(slug("|sin θ|^-0.5"), "sin_t_neg0.5");
        assert_eq!(slug("|x|^0.5"), "x_0.5");
        assert_eq!(slug("cos(2θ)"), "cos_2t");
        assert_eq!(slug("2-exp(-sqrt r)"), "2_exp_sqrt_r");
    }

    #[test]
    fn verdict_ignores_probes_unless_strict() {
        let probe = CheckRecord::new("b", "x", CheckKind::Probe, 1.0).pass(false);
        let ok = CheckRecord::new("a", "x", CheckKind::Identity, 1.0).pass(true);
        let r = Report::new(1, false, vec![probe.clone(), ok.clone()]);
        assert!(r.ok());
        assert_eq!(r.checks[0].id, "a");
        assert!(!Report::new(1, true, vec![probe, ok]).ok());
    }

    #[test]
    fn config_errors_name_the_field() {
        let e = crate::io::parse::<SuiteConfig>(r#"{"sead": 3}"#, "suite").unwrap_err().to_string();
        assert!(e.contains("sead"), "{e}");
        let mut cfg = SuiteConfig::default();
        cfg.tolerances.identity = -1.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("tolerances.identity"));
        cfg = SuiteConfig::default();
        cfg.radial[0].kind = "nope".into();
        assert!(cfg.validate().unwrap_err().to_string().contains("radial[0]"));
    }
}
