//! Experiment drivers. Each command reads its parameters from a [`Config`],
//! runs the solvers and returns an [`ExperimentReport`]; solver failures become
//! failed checks, while bad input is an error.

mod algebra;
mod solve;
mod sublinear;
mod superlinear;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use thiserror::Error;
use trunclap_core::domain::CRDomain;
use trunclap_core::solver::{Discretization, FitWindow, PerronOptions, StencilScheme};

use crate::config::{Config, ConfigError};
use crate::output::CsvError;
use crate::report::ExperimentReport;

pub use algebra::{matrix_check, oracle_check};
pub use solve::solve;
pub use sublinear::{anti_hopf, critical_exponent, ordering, rescaling, sandwich};
pub use superlinear::superlinear_pplus;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] trunclap_core::Error),
    #[error("writing {}: {source}", path.display())]
    Csv { path: PathBuf, source: CsvError },
    #[error("creating {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Rejected(String),
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

/// Run-wide settings that come from flags rather than the config file.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub seed: u64,
    /// Artifact root; nothing is written when `None`.
    pub out: Option<PathBuf>,
    /// Independent sub-runs (parameter sweeps) executed concurrently.
    pub jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    MatrixCheck,
    Solve,
    OracleCheck,
    CriticalExponent,
    AntiHopf,
    Rescaling,
    Ordering,
    SuperlinearPplus,
    Sandwich,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::MatrixCheck,
        Command::Solve,
        Command::OracleCheck,
        Command::CriticalExponent,
        Command::AntiHopf,
        Command::Rescaling,
        Command::Ordering,
        Command::SuperlinearPplus,
        Command::Sandwich,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Command::MatrixCheck => "matrix-check",
            Command::Solve => "solve",
            Command::OracleCheck => "oracle-check",
            Command::CriticalExponent => "critical-exponent",
            Command::AntiHopf => "anti-hopf",
            Command::Rescaling => "rescaling",
            Command::Ordering => "ordering",
            Command::SuperlinearPplus => "superlinear-pplus",
            Command::Sandwich => "sandwich",
        }
    }

    pub fn run(self, cfg: &Config, ctx: &Context) -> Result<ExperimentReport> {
        let start = Instant::now();
        let mut report = ExperimentReport::new(self.id());
        report.param("seed", ctx.seed);
        for (k, v) in cfg.pairs() {
            report.param(k, v);
        }
        match self {
            Command::MatrixCheck => matrix_check(cfg, ctx, &mut report)?,
            Command::Solve => solve(cfg, ctx, &mut report)?,
            Command::OracleCheck => oracle_check(cfg, ctx, &mut report)?,
            Command::CriticalExponent => critical_exponent(cfg, ctx, &mut report)?,
            Command::AntiHopf => anti_hopf(cfg, ctx, &mut report)?,
            Command::Rescaling => rescaling(cfg, ctx, &mut report)?,
            Command::Ordering => ordering(cfg, ctx, &mut report)?,
            Command::SuperlinearPplus => superlinear_pplus(cfg, ctx, &mut report)?,
            Command::Sandwich => sandwich(cfg, ctx, &mut report)?,
        }
        report.wall_clock = start.elapsed();
        if let Some(dir) = artifact_dir(ctx, self.id())? {
            let path = dir.join("report.csv");
            report.write_csv(&path).map_err(|source| ExperimentError::Csv { path: path.clone(), source })?;
            report.artifacts.push(path);
        }
        Ok(report)
    }
}

impl std::str::FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.id() == s).ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

fn artifact_dir(ctx: &Context, id: &str) -> Result<Option<PathBuf>> {
    let Some(root) = &ctx.out else { return Ok(None) };
    let dir = root.join(id);
    std::fs::create_dir_all(&dir).map_err(|source| ExperimentError::Io { path: dir.clone(), source })?;
    Ok(Some(dir))
}

/// Writes `out/<id>/<name>` through `write` and records the path.
fn artifact(
    ctx: &Context,
    report: &mut ExperimentReport,
    name: &str,
    write: impl FnOnce(&Path) -> Result<(), CsvError>,
) -> Result<()> {
    if let Some(dir) = artifact_dir(ctx, &report.id)? {
        let path = dir.join(name);
        write(&path).map_err(|source| ExperimentError::Csv { path: path.clone(), source })?;
        report.artifacts.push(path);
    }
    Ok(())
}

/// Maps `f` over `items` on up to `jobs` scoped threads; results keep input order.
pub fn par_map<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.min(items.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot is filled")).collect()
}

/// `domain = disk | lens | custom` with `radius`, `dim`, `offset` (lens) and
/// `centers` (custom, `x,y; x,y`).
pub fn domain_from(cfg: &Config) -> Result<CRDomain> {
    let dim: usize = cfg.get_or("dim", 2)?;
    let radius = cfg.number_or("radius", 1.0)?;
    let kind: String = cfg.get_or("domain", "disk".to_string())?;
    let dom = match kind.as_str() {
        "disk" | "ball" => CRDomain::ball(radius, &vec![0.0; dim])?,
        "lens" => {
            let s = cfg.number_or("offset", 0.3)?;
            let mut a = vec![0.0; dim];
            let mut b = vec![0.0; dim];
            a[0] = s;
            b[0] = -s;
            CRDomain::new(radius, &[a, b])?
        }
        "custom" => match cfg.points("centers")? {
            Some(c) => CRDomain::new(radius, &c)?,
            None => return Err(ConfigError::Missing { key: "centers".into() }.into()),
        },
        other => return Err(cfg.invalid("domain", format!("unknown domain kind `{other}`")).into()),
    };
    Ok(dom)
}

pub fn is_ball(domain: &CRDomain) -> bool {
    domain.centers().len() == 1
}

/// Grid spacing `h` and stencil `order` (default order depends on `k` and the dimension).
pub fn discretization(cfg: &Config, domain: &CRDomain, k: usize, default_h: f64) -> Result<Discretization> {
    let h = cfg.number_or("h", default_h)?;
    let scheme = match cfg.get::<usize>("order")? {
        Some(order) => StencilScheme::new(domain.dim(), order, k)?,
        None => StencilScheme::default_for(domain.dim(), k)?,
    };
    Ok(Discretization::build(domain, h, scheme)?)
}

pub fn perron_options(cfg: &Config) -> Result<PerronOptions> {
    let d = PerronOptions::default();
    Ok(PerronOptions {
        tol: cfg.number_or("tol", d.tol)?,
        gap_tol: cfg.number_or("gap_tol", d.gap_tol)?,
        max_iter: cfg.get_or("max_iter", d.max_iter)?,
        ..d
    })
}

/// Boundary fit window; the defaults carry a drift term over `[4h, 0.3]`.
pub fn fit_window(cfg: &Config) -> Result<FitWindow> {
    Ok(FitWindow {
        min_h: cfg.number_or("fit_min_h", 4.0)?,
        max: cfg.number_or("fit_max", 0.3)?,
        samples: cfg.get_or("fit_samples", 16)?,
        drift: cfg.get_or("fit_drift", true)?,
    })
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::INFINITY, f64::min)
}
