use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rough_sio::cover::{build_cover, verify_cover};
use rough_sio::harness::{run_all, SuiteConfig};
use rough_sio::io;
use rough_sio::maximal::{hl_max, m_fractional, m_h, m_sh, Factor, GridFunction, MaximalConfig};
use rough_sio::operators::{commutator, commutator_pv, Operator};
use rough_sio::starset::StarSet;
use rough_sio::weights::{rect_condition, RectMode, Verdict};
use rough_sio::Complex64;

mod output;

use output::{write_csv, Emit};

#[derive(Parser, Debug)]
#[command(name = "rough-sio", version)]
#[command(about = "Star sets, covers, weights and representation formulas for rough singular integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrals and strata of the star set S_Ω
    SetInfo {
        kernel: PathBuf,
        /// Directory for strata.csv and outline.csv
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build and verify the stratified rectangle cover
    Cover {
        kernel: PathBuf,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rectangle corner polylines
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Rectangle weight condition on the kernel's cover
    WeightCheck {
        kernel: PathBuf,
        weight: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.05)]
        r: f64,
        #[arg(long, default_value = "ca")]
        mode: RectMode,
        /// Use this cover instead of building one from the kernel
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// (m, k, K) rows
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Maximal functions on a grid
    Maximal {
        kernel: PathBuf,
        /// Grid function, or {side, nodes, function} to sample a test function
        f: PathBuf,
        #[arg(long, value_enum, default_value_t = MaximalOp::Mh)]
        op: MaximalOp,
        /// Factor H: the kernel's |Ω|, its |h(|y|)|, or 1
        #[arg(long, value_enum, default_value_t = FactorKind::Omega)]
        factor: FactorKind,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Values along the middle grid row
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Truncated operator T_ε f at points
    Apply {
        kernel: PathBuf,
        f: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Principal value by dyadic limit and by representation
    Pv {
        kernel: PathBuf,
        f: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Commutator with a Lipschitz field, truncated or principal value
    Commutator {
        kernel: PathBuf,
        a: PathBuf,
        f: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: u32,
        /// Truncation radius; omit for the principal value
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the verification suite
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Let probes gate the exit status
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MaximalOp {
    Hl,
    Mh,
    Msh,
    Frac,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FactorKind {
    Omega,
    Radial,
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Mode {
    Direct,
    Rep,
    Both,
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("ROUGH_SIO_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("ROUGH_SIO_THREADS: not a count: {v:?}"))?;
    if n == 0 {
        bail!("ROUGH_SIO_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli.command)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[derive(Serialize)]
struct StrataRow {
    m: usize,
    measure: f64,
    sphere_measure: f64,
    cells: usize,
}

#[derive(Serialize)]
struct SetInfo {
    measure: f64,
    residual_mass: f64,
    integrals: rough_sio::starset::SetIntegrals,
    strata: Vec<StrataRow>,
}

#[derive(Serialize)]
struct PointValue {
    point: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    value_direct: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value_rep: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_bound: Option<f64>,
}

#[derive(Serialize)]
struct PvValue {
    point: [f64; 2],
    value_limit: Complex64,
    value_rep: Complex64,
    correction: Complex64,
    decay_slope: f64,
    converged: bool,
}

fn star_of(kernel: &Path) -> Result<StarSet> {
    let spec = io::load_kernel(kernel)?;
    Ok(StarSet::new(spec.omega))
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::SetInfo { kernel, csv } => {
            let star = star_of(&kernel)?;
            let integrals = star.set_integrals()?;
            let strata: Vec<StrataRow> = star
                .strata()
                .iter()
                .map(|s| StrataRow { m: s.m, measure: s.measure, sphere_measure: s.sphere_measure, cells: s.cells.len() })
                .collect();
            if let Some(dir) = csv {
                std::fs::create_dir_all(&dir).with_context(|| format!("{}", dir.display()))?;
                write_csv(&dir.join("strata.csv"), strata.iter().map(|s| (s.m, s.measure)), &["m", "measure"])?;
                if star.dim() == 2 {
                    write_csv(&dir.join("outline.csv"), star.outline().into_iter().map(|p| (p[0], p[1])), &["x", "y"])?;
                }
            }
            let info = SetInfo { measure: star.measure(), residual_mass: star.residual_mass(), integrals, strata };
            info.emit(None)?;
        }
        Command::Cover { kernel, m_max, out, csv, samples, seed } => {
            let star = star_of(&kernel)?;
            let cover = build_cover(&star, m_max)?;
            if let Some(path) = out {
                io::write_json(&path, &io::cover_doc(&cover))?;
            }
            if let Some(path) = csv {
                if cover.dim != 2 {
                    bail!("--csv corner polylines need a planar kernel");
                }
                let rows = cover.rects.iter().flat_map(|r| {
                    let mut c = r.rect.corners();
                    c.push(c[0]);
                    c.into_iter().map(move |p| (r.m, r.k, p[0], p[1]))
                });
                write_csv(&path, rows, &["m", "k", "x", "y"])?;
            }
            verify_cover(&cover, &star, samples, seed).emit(None)?;
        }
        Command::WeightCheck { kernel, weight, p, r, mode, cover, out, csv } => {
            let w = io::load_weight(&weight)?;
            let cover = match cover {
                Some(path) => io::load_cover(&path)?,
                None => build_cover(&star_of(&kernel)?, None)?,
            };
            let report = rect_condition(&w, p, r, &cover, mode)?;
            if let Some(path) = csv {
                write_csv(&path, report.entries.iter().map(|e| (e.m, e.k, e.constant)), &["m", "k", "constant"])?;
            }
            report.emit(out.as_deref())?;
            if report.verdict != Verdict::CertifiedAtProbeScale {
                eprintln!("weight not certified: {:?}", report.verdict);
                return Ok(false);
            }
        }
        Command::Maximal { kernel, f, op, factor, mu, weight, p, out, csv } => {
            let spec = io::load_kernel(&kernel)?;
            let g = io::load_grid_function(&f)?;
            let h = match factor {
                FactorKind::Omega => Factor::Angular(spec.omega.clone()),
                FactorKind::Radial => Factor::Radial(spec.radial.clone()),
                FactorKind::Unit => Factor::Unit,
            };
            let cfg = MaximalConfig::for_grid(&g).with_mu(mu);
            let star = StarSet::new(spec.omega.clone());
            let result = match op {
                MaximalOp::Hl => hl_max(&g, &cfg)?,
                MaximalOp::Mh => m_h(&g, &h, &cfg)?,
                MaximalOp::Msh => m_sh(&g, &star, &h, &cfg)?,
                MaximalOp::Frac => m_fractional(&g, &h, &cfg, Some(&star))?,
            };
            if let Some(path) = weight {
                let w = io::load_weight(&path)?;
                let (num, den) = (result.weighted_norm(p, &w), g.weighted_norm(p, &w));
                eprintln!("‖Mf‖_{{{p},w}} / ‖f‖_{{{p},w}} = {}", num / den);
            }
            if let Some(path) = csv {
                write_csv(&path, middle_row(&g, &result), &["x", "y", "f", "max"])?;
            }
            match out {
                Some(path) => io::write_json(&path, &result)?,
                None => result.emit(None)?,
            }
        }
        Command::Apply { kernel, f, mode, eps, points, out, csv } => {
            let op = Operator::new(&io::load_kernel(&kernel)?)?;
            let f = io::load_test_function(&f)?;
            let mut rows = Vec::new();
            for x in io::load_points(&points)? {
                let (direct, rep) = if op.spec().nonconv.is_some() {
                    let (d, r) = op.t_eps_nonconv(&f, eps, x)?;
                    (Some(d), Some(r))
                } else {
                    let d = if mode == Mode::Rep { None } else { Some(op.direct(&f, eps, x)?) };
                    let r = if mode == Mode::Direct { None } else { Some(op.rep(&f, eps, x)?) };
                    (d, r)
                };
                rows.push(PointValue {
                    point: x,
                    value_direct: direct.map(|d| d.value),
                    value_rep: rep.map(|r| r.value),
                    tail_bound: rep.map(|r| r.tail_bound),
                });
            }
            point_csv(csv.as_deref(), &rows)?;
            rows.emit(out.as_deref())?;
        }
        Command::Pv { kernel, f, points, out, csv } => {
            let op = Operator::new(&io::load_kernel(&kernel)?)?;
            let f = io::load_test_function(&f)?;
            let mut rows = Vec::new();
            for x in io::load_points(&points)? {
                let lim = op.pv_limit(&f, x, Some(f.grad_bound()))?;
                let rep = op.pv_rep(&f, x)?;
                rows.push(PvValue {
                    point: x,
                    value_limit: lim.value,
                    value_rep: rep.value,
                    correction: rep.correction,
                    decay_slope: lim.decay_slope,
                    converged: lim.converged,
                });
            }
            if let Some(path) = csv {
                let it = rows.iter().map(|r| {
                    (r.point[0], r.point[1], r.value_limit.re, r.value_limit.im, r.value_rep.re, r.value_rep.im)
                });
                write_csv(&path, it, &["x", "y", "limit_re", "limit_im", "rep_re", "rep_im"])?;
            }
            rows.emit(out.as_deref())?;
        }
        Command::Commutator { kernel, a, f, order, eps, points, out, csv } => {
            let omega = io::load_kernel(&kernel)?.omega;
            let a = io::load_field(&a)?;
            let f = io::load_test_function(&f)?;
            let mut rows = Vec::new();
            for x in io::load_points(&points)? {
                rows.push(match eps {
                    Some(e) => {
                        let c = commutator(&omega, &f, &a, order, e, x)?;
                        PointValue {
                            point: x,
                            value_direct: Some(c.direct.value),
                            value_rep: Some(c.rep.value),
                            tail_bound: Some(c.rep.tail_bound),
                        }
                    }
                    None => {
                        let c = commutator_pv(&omega, &f, &a, order, x)?;
                        PointValue {
                            point: x,
                            value_direct: Some(c.limit.value),
                            value_rep: Some(c.rep.value),
                            tail_bound: None,
                        }
                    }
                });
            }
            point_csv(csv.as_deref(), &rows)?;
            rows.emit(out.as_deref())?;
        }
        Command::Verify { config, strict, out, csv_dir } => {
            let mut cfg = match config {
                Some(path) => SuiteConfig::load(&path)?,
                None => SuiteConfig::default(),
            };
            cfg.strict |= strict;
            let report = run_all(&cfg)?;
            if let Some(dir) = csv_dir {
                output::report_csv(&dir, &report)?;
            }
            report.emit(out.as_deref())?;
            let s = &report.summary;
            eprintln!("{} checks, {} passed, {} failed: {}", s.total, s.passed, s.failed, s.verdict);
            for id in &s.gating_failures {
                eprintln!("  gating failure: {id}");
            }
            for id in &s.advisory_failures {
                eprintln!("  advisory failure: {id}");
            }
            return Ok(report.ok());
        }
    }
    Ok(true)
}

fn middle_row(f: &GridFunction, m: &GridFunction) -> Vec<(f64, f64, f64, f64)> {
    let j = f.shape[1] / 2;
    (0..f.shape[0])
        .map(|i| {
            let k = f.index(i, j);
            let x = f.node(i, j);
            (x[0], x[1], f.values[k].re, m.values[k].re)
        })
        .collect()
}

fn point_csv(path: Option<&Path>, rows: &[PointValue]) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let it = rows.iter().map(|r| {
        let (d, p) = (r.value_direct.unwrap_or(nan), r.value_rep.unwrap_or(nan));
        (r.point[0], r.point[1], d.re, d.im, p.re, p.im, r.tail_bound.unwrap_or(f64::NAN))
    });
    write_csv(path, it, &["x", "y", "direct_re", "direct_im", "rep_re", "rep_im", "tail_bound"])
}
