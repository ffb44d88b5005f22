//! Execute a [`RunConfig`]: time loop, VTK snapshots, step series and the
//! error against the exact solution when there is one.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::harness::cases::Problem;
use crate::harness::config::RunConfig;
use crate::harness::errors::{compute_delta_q, ErrorReport};
use crate::harness::output::{time_series_csv, write_atomic, write_vtk};
use crate::mesh::MeshTopology;
use crate::splitting::StrangSolver;

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dim: usize,
    pub n_dofs: usize,
    pub steps: usize,
    pub final_time: f64,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Error at the final time, when the exact solution is known.
    pub error: Option<ErrorReport>,
}

pub fn execute(cfg: &RunConfig) -> Result<RunSummary> {
    match cfg.dimension()? {
        1 => execute_on(cfg, cfg.mesh_1d()?),
        2 => execute_on(cfg, cfg.mesh_2d()?),
        d => Err(Error::Config(format!("unsupported dimension {d}"))),
    }
}

pub fn execute_on<const D: usize>(cfg: &RunConfig, mesh: MeshTopology<D>) -> Result<RunSummary> {
    let problem: Problem<D> = cfg.problem(mesh)?;
    let disc = &problem.disc;
    let dir = cfg.output_dir();
    let solver = StrangSolver::new(
        disc,
        cfg.hyperbolic_config(),
        cfg.parabolic_config(),
        cfg.time_controls(),
    );
    let mut files = Vec::new();
    let mut k = 0;
    let out = solver.run(problem.initial.clone(), &cfg.output.snapshots, |field| {
        if cfg.output.vtk {
            let path = dir.join(format!("snapshot_{k:03}.vtk"));
            write_vtk(&path, &disc.mesh, &disc.ops, field, disc.gas())?;
            log::info!("t = {:.6}: wrote {}", field.time, path.display());
            files.push(path);
        }
        k += 1;
        Ok(())
    })?;
    if cfg.output.series {
        let path = dir.join("series.csv");
        write_atomic(&path, time_series_csv(&out.reports)?.as_bytes())?;
        files.push(path);
    }
    let error = match problem.sample_exact(out.field.time) {
        Some(exact) => Some(compute_delta_q(&out.field, &exact, &disc.ops.lumped)?),
        None => None,
    };
    Ok(RunSummary {
        dim: D,
        n_dofs: disc.n_dofs(),
        steps: out.reports.len(),
        final_time: out.field.time,
        output_dir: dir,
        files,
        error,
    })
}
