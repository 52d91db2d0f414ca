//! The four subcommands. Each writes its artifacts under the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use mhd_core::dynamics::{
    load_checkpoint, run, run_from, Problem, RunOptions, RunOutput, Truncation,
};
use mhd_core::estimates::CalibrationStore;
use mhd_core::io::write_atomic;
use mhd_core::lifting::BoundaryTrace;
use mhd_core::spectral::{
    build_laplacian_basis, build_stokes_basis, load_basis, save_basis, BasisKind, SpectralBasis,
};
use mhd_core::MhdError;
use mhd_verify::report::write_summary;
use mhd_verify::scenarios::scenario;
use mhd_verify::{calibrate, run_experiment, ExperimentReport};

use crate::config::{BoundaryConfig, InitialConfig, RunConfig};
use crate::error::{CliError, Result};

/// Experiments that read calibrated constants.
const NEEDS_CALIBRATION: [&str; 3] = ["gronwall", "absorbing", "determinism"];

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";
pub const SUMMARY: &str = "summary.csv";

#[derive(Debug, Clone)]
pub struct Context {
    pub output_dir: PathBuf,
    pub threads: usize,
    pub verbose: bool,
}

impl Context {
    fn prepare(&self) -> Result<()> {
        fs::create_dir_all(&self.output_dir).map_err(MhdError::from)?;
        Ok(())
    }

    fn place(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.output_dir.join(p)
        }
    }

    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn write_resolved(cfg: &RunConfig, ctx: &Context) -> Result<()> {
    write_atomic(
        &ctx.output_dir.join(RESOLVED_CONFIG),
        cfg.to_toml_string().as_bytes(),
    )?;
    Ok(())
}

fn cached_basis(
    ctx: &Context,
    kind: BasisKind,
    cfg: &RunConfig,
    n: usize,
) -> Result<(SpectralBasis, PathBuf)> {
    let g = cfg.grid()?;
    let tag = match kind {
        BasisKind::Stokes => "stokes",
        BasisKind::DirichletLaplacian => "laplacian",
    };
    let dir = ctx.output_dir.join("basis");
    fs::create_dir_all(&dir).map_err(MhdError::from)?;
    let path = dir.join(format!("{tag}_{}x{}_{n}.bin", g.nx, g.ny));
    if path.exists() {
        ctx.note(format!("loading {}", path.display()));
        return Ok((load_basis(&path, Some((kind, g, n)))?, path));
    }
    ctx.note(format!(
        "building {tag} basis with {n} modes on {}x{}",
        g.nx, g.ny
    ));
    let basis = match kind {
        BasisKind::Stokes => build_stokes_basis(g, n)?,
        BasisKind::DirichletLaplacian => build_laplacian_basis(g, n)?,
    };
    save_basis(&basis, &path)?;
    Ok((basis, path))
}

/// Integrates the configured problem and writes the ledger (and checkpoints).
pub fn run_command(cfg: &RunConfig, ctx: &Context) -> Result<RunOutput> {
    ctx.prepare()?;
    write_resolved(cfg, ctx)?;
    let solver = cfg.solver_config();
    let grid = cfg.grid()?;
    let basis = match cfg.galerkin {
        Truncation::Modes(n) => Some(cached_basis(ctx, BasisKind::Stokes, cfg, n)?.0),
        Truncation::Full => None,
    };
    let (mut problem, start) = match &cfg.initial {
        InitialConfig::Preset(id) => {
            let sc = scenario(id, cfg.nx, cfg.dt, cfg.t_final)?;
            (sc.problem, Err((sc.u0, sc.b0)))
        }
        InitialConfig::Checkpoint(p) => {
            let key = (cfg.nx, cfg.ny, cfg.dt, solver.truncation_count());
            let (_, state) = load_checkpoint(p, Some(key))?;
            (Problem::unforced(BoundaryTrace::zero(grid)?), Ok(state))
        }
    };
    match &cfg.boundary {
        BoundaryConfig::Inherit => {}
        BoundaryConfig::Modes(ms) => problem.trace = BoundaryTrace::from_modes(grid, ms.clone())?,
        BoundaryConfig::Csv(p) => problem.trace = BoundaryTrace::from_csv(grid, p)?,
    }
    let opts = RunOptions {
        keep_every: None,
        checkpoint: (cfg.outputs.checkpoint_every > 0).then(|| {
            (
                ctx.place(&cfg.outputs.checkpoint),
                cfg.outputs.checkpoint_every,
            )
        }),
    };
    let out = match start {
        Ok(state) => run_from(&solver, &problem, state, basis.as_ref(), &opts)?,
        Err((u0, b0)) => run(&solver, &problem, &u0, &b0, basis.as_ref(), &opts)?,
    };
    out.ledger.write_csv(&ctx.place(&cfg.outputs.ledger))?;
    Ok(out)
}

/// Recomputes the checker constants and persists them.
pub fn calibrate_command(cfg: &RunConfig, ctx: &Context) -> Result<(CalibrationStore, PathBuf)> {
    ctx.prepare()?;
    let store = calibrate(&cfg.params.calibrate)?;
    let path = ctx.place(&cfg.outputs.calibration);
    store.save(&path)?;
    Ok((store, path))
}

/// Precomputes the Stokes basis (and the Laplacian basis when `galerkin.m` is set).
pub fn basis_command(cfg: &RunConfig, ctx: &Context) -> Result<Vec<PathBuf>> {
    ctx.prepare()?;
    let Truncation::Modes(n) = cfg.galerkin else {
        return Err(CliError::config(
            "galerkin.n",
            "the basis command needs a mode count",
        ));
    };
    let mut paths = vec![cached_basis(ctx, BasisKind::Stokes, cfg, n)?.1];
    if let Some(m) = cfg.laplacian_modes {
        paths.push(cached_basis(ctx, BasisKind::DirichletLaplacian, cfg, m)?.1);
    }
    Ok(paths)
}

fn calibration_store(cfg: &RunConfig, ctx: &Context) -> Result<CalibrationStore> {
    if !cfg
        .experiments
        .iter()
        .any(|id| NEEDS_CALIBRATION.contains(&id.as_str()))
    {
        return Ok(CalibrationStore::default());
    }
    let path = ctx.place(&cfg.outputs.calibration);
    if path.exists() {
        ctx.note(format!("using calibration {}", path.display()));
        return Ok(CalibrationStore::load(&path)?);
    }
    ctx.note("no calibration store found; calibrating");
    Ok(calibrate_command(cfg, ctx)?.0)
}

/// Runs the selected experiments, on up to `ctx.threads` workers, and writes one CSV per
/// experiment plus the summary. Fails with the names of any violated assertions.
pub fn experiment_command(cfg: &RunConfig, ctx: &Context) -> Result<Vec<ExperimentReport>> {
    if cfg.experiments.is_empty() {
        return Err(CliError::config("experiment.id", "missing required key"));
    }
    ctx.prepare()?;
    write_resolved(cfg, ctx)?;
    let store = calibration_store(cfg, ctx)?;
    let ids = &cfg.experiments;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<mhd_verify::Result<ExperimentReport>>>> =
        Mutex::new((0..ids.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..ctx.threads.clamp(1, ids.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(id) = ids.get(k) else { break };
                ctx.note(format!("running {id}"));
                let r = run_experiment(id, &cfg.params, &store);
                if let Ok(rep) = &r {
                    ctx.note(format!("{id} finished in {:.2?}", rep.runtime));
                }
                slots.lock().expect("result slots")[k] = Some(r);
            });
        }
    });
    let mut reports = Vec::new();
    for r in slots.into_inner().expect("result slots") {
        reports.push(r.expect("every experiment ran")?);
    }
    for r in &reports {
        r.write(&ctx.output_dir)?;
    }
    write_summary(&reports, &ctx.output_dir.join(SUMMARY))?;
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures().map(move |a| format!("{}/{}", r.id, a.id)))
        .collect();
    for r in &reports {
        for line in r.summary_lines() {
            println!("{line}");
        }
    }
    if failed.is_empty() {
        Ok(reports)
    } else {
        Err(CliError::Assertion(failed))
    }
}
