//! Grid convergence studies against the traveling viscous shock.

use std::fmt::Write as _;

use crate::becker::{shock_params, BeckerParams};
use crate::error::{Error, Result};
use crate::harness::cases::{becker_1d, becker_2d, Problem};
use crate::harness::errors::{
    compute_delta_q, compute_delta_q_cellwise, observed_rate, ErrorReport, Norm,
};
use crate::hyperbolic::HyperbolicConfig;
use crate::mesh::MeshTopology;
use crate::parabolic::ParabolicConfig;
use crate::splitting::{StrangSolver, TimeControls};

/// Physical and numerical parameters of a shock convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShockStudy {
    pub gamma: f64,
    pub mach: f64,
    pub mu: f64,
    pub v_inf: f64,
    /// 1D domain; 2D runs use the extent of the supplied meshes.
    pub domain: (f64, f64),
    pub t_final: f64,
    pub cfl: f64,
    pub hyperbolic: HyperbolicConfig,
    pub parabolic: ParabolicConfig,
    pub quadrature: Quadrature,
}

/// How error norms are integrated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Quadrature {
    /// Lumped-mass nodal quadrature.
    #[default]
    Nodal,
    /// Cellwise Gauss quadrature of the P1 field against the exact solution.
    Cellwise,
}

impl Default for ShockStudy {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            mach: 3.0,
            mu: 0.01,
            v_inf: 0.2,
            domain: (-1.0, 1.5),
            t_final: 3.0,
            cfl: 0.4,
            hyperbolic: HyperbolicConfig::default(),
            parabolic: ParabolicConfig::default(),
            quadrature: Quadrature::Nodal,
        }
    }
}

impl ShockStudy {
    pub fn params(&self) -> Result<BeckerParams> {
        Ok(shock_params(self.gamma, self.mach, 1.0, 1.0)?
            .with_viscosity(self.mu)
            .with_translation(self.v_inf))
    }

    fn controls(&self) -> TimeControls {
        TimeControls {
            cfl: self.cfl,
            t_final: self.t_final,
            ..TimeControls::default()
        }
    }

    /// Run one problem to `t_final` and measure it.
    pub fn run_problem<const D: usize>(&self, problem: &Problem<D>) -> Result<ErrorReport> {
        let solver = StrangSolver::new(
            &problem.disc,
            self.hyperbolic,
            self.parabolic,
            self.controls(),
        );
        let out = solver.run(problem.initial.clone(), &[], |_| Ok(()))?;
        let exact = problem
            .exact
            .as_ref()
            .ok_or_else(|| Error::Config("problem has no exact solution".into()))?;
        let t = out.field.time;
        match self.quadrature {
            Quadrature::Nodal => {
                let samples = problem.sample_exact(t).expect("exact solution present");
                compute_delta_q(&out.field, &samples, &problem.disc.ops.lumped)
            }
            Quadrature::Cellwise => {
                compute_delta_q_cellwise(&out.field, &problem.disc.mesh, |x| exact(x, t))
            }
        }
    }

    pub fn run_1d(&self, n: usize) -> Result<ErrorReport> {
        let p = becker_1d(self.params()?, self.domain.0, self.domain.1, n)?;
        self.run_problem(&p)
    }

    pub fn run_2d(&self, mesh: MeshTopology<2>) -> Result<ErrorReport> {
        let p = becker_2d(self.params()?, mesh)?;
        self.run_problem(&p)
    }
}

/// One grid of a study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    /// Number of degrees of freedom.
    pub n: usize,
    /// Mesh size `(|Omega| / N)^(1/d)`.
    pub h: f64,
    pub report: ErrorReport,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Rate between row `k - 1` and row `k`.
    pub fn rate(&self, k: usize, q: Norm) -> Option<f64> {
        if k == 0 || k >= self.rows.len() {
            return None;
        }
        let (c, f) = (&self.rows[k - 1], &self.rows[k]);
        let rate = observed_rate(c.report.delta(q), f.report.delta(q), c.h, f.h);
        rate.is_finite().then_some(rate)
    }

    /// CSV with columns `N,delta1,rate1,delta2,rate2,deltainf,rateinf`;
    /// undefined rates are written as `--`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,delta1,rate1,delta2,rate2,deltainf,rateinf\n");
        for (k, row) in self.rows.iter().enumerate() {
            write!(s, "{}", row.n).unwrap();
            for q in [Norm::L1, Norm::L2, Norm::Linf] {
                write!(s, ",{:.6e}", row.report.delta(q)).unwrap();
                match self.rate(k, q) {
                    Some(r) => write!(s, ",{r:.6}").unwrap(),
                    None => s.push_str(",--"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Outcome of a study; `error` holds the failure that stopped it early.
#[derive(Debug)]
pub struct StudyOutcome {
    pub table: ConvergenceTable,
    pub error: Option<Error>,
}

/// Run `case` on each grid in order, stopping at the first failure.
/// `measure(grid)` returns the mesh size and error report of one grid.
pub fn convergence_study<G>(
    grids: impl IntoIterator<Item = G>,
    mut measure: impl FnMut(G) -> Result<(f64, ErrorReport)>,
) -> StudyOutcome {
    let mut table = ConvergenceTable::default();
    for g in grids {
        match measure(g) {
            Ok((h, report)) => table.rows.push(ConvergenceRow {
                n: report.n_dofs,
                h,
                report,
            }),
            Err(e) => {
                return StudyOutcome {
                    table,
                    error: Some(e),
                }
            }
        }
    }
    StudyOutcome { table, error: None }
}

/// Mesh size of `n` dofs filling a domain of measure `measure` in `d` dimensions.
pub fn mesh_size(measure: f64, n: usize, d: usize) -> f64 {
    (measure / n as f64).powf(1.0 / d as f64)
}

/// The 1D study on uniform grids with `grids` nodes.
pub fn shock_study_1d(study: &ShockStudy, grids: &[usize]) -> StudyOutcome {
    let len = study.domain.1 - study.domain.0;
    convergence_study(grids.iter().copied(), |n| {
        log::info!("1D shock study: N = {n}");
        Ok((mesh_size(len, n, 1), study.run_1d(n)?))
    })
}

/// The 2D study on the given meshes, ordered coarse to fine.
pub fn shock_study_2d(study: &ShockStudy, meshes: Vec<MeshTopology<2>>) -> StudyOutcome {
    convergence_study(meshes, |mesh| {
        let (lo, hi) = mesh.bounding_box();
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let n = mesh.n_dofs();
        log::info!("2D shock study: N = {n}");
        Ok((mesh_size(area, n, 2), study.run_2d(mesh)?))
    })
}
