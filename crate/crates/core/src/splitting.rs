//! Strang composition of the hyperbolic and parabolic substeps and the
//! time loop.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Discretization, SolutionField};
use crate::hyperbolic::{HyperbolicConfig, HyperbolicSolver, StageStats};
use crate::parabolic::{ParabolicConfig, ParabolicReport, ParabolicSolver};

/// Body force density `f(x, t)`.
pub type ForceFn<const D: usize> = Arc<dyn Fn(&[f64; D], f64) -> [f64; D] + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeControls {
    pub cfl: f64,
    pub t_final: f64,
    pub max_steps: usize,
    /// Check the invariants every this many steps; 0 disables the audit.
    pub audit_every: usize,
}

impl Default for TimeControls {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            t_final: 1.0,
            max_steps: usize::MAX,
            audit_every: 1,
        }
    }
}

impl TimeControls {
    pub fn validate(&self, t0: f64) -> Result<()> {
        if !(self.cfl > 0.0) {
            return Err(Error::Config(format!(
                "cfl must be positive, got {}",
                self.cfl
            )));
        }
        if !(self.t_final >= t0) {
            return Err(Error::Config(format!(
                "t_final = {} precedes the start time {t0}",
                self.t_final
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubstepKind {
    Hyperbolic,
    Parabolic,
}

/// Minima before and after one substep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubstepAudit {
    pub kind: SubstepKind,
    pub min_e_before: f64,
    pub min_e_after: f64,
    pub min_s_before: f64,
    pub min_s_after: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// Time at the end of the step.
    pub time: f64,
    pub dt: f64,
    /// `dt0` of the state at the beginning of the step.
    pub dt0: f64,
    pub retried: bool,
    pub min_rho: f64,
    pub min_e: f64,
    pub min_s: f64,
    /// Lumped-mass totals of density, momentum and total energy.
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
    pub substeps: Vec<SubstepAudit>,
    pub hyperbolic: Vec<StageStats>,
    pub parabolic: ParabolicReport,
}

/// Solver for the full system on one discretization.
pub struct StrangSolver<'a, const D: usize> {
    pub hyperbolic: HyperbolicSolver<'a, D>,
    pub parabolic: ParabolicSolver<'a, D>,
    pub force: Option<ForceFn<D>>,
    pub controls: TimeControls,
}

impl<'a, const D: usize> StrangSolver<'a, D> {
    pub fn new(
        disc: &'a Discretization<D>,
        hyperbolic: HyperbolicConfig,
        parabolic: ParabolicConfig,
        controls: TimeControls,
    ) -> Self {
        Self {
            hyperbolic: HyperbolicSolver::new(disc, hyperbolic),
            parabolic: ParabolicSolver::new(disc, parabolic),
            force: None,
            controls,
        }
    }

    pub fn with_force(mut self, force: ForceFn<D>) -> Self {
        self.force = Some(force);
        self
    }

    fn disc(&self) -> &Discretization<D> {
        self.hyperbolic.disc
    }

    fn audit(
        kind: SubstepKind,
        before: &SolutionField<D>,
        after: &SolutionField<D>,
        disc: &Discretization<D>,
    ) -> SubstepAudit {
        let gas = disc.gas();
        SubstepAudit {
            kind,
            min_e_before: before.min_internal_energy(),
            min_e_after: after.min_internal_energy(),
            min_s_before: before.min_specific_entropy(gas),
            min_s_after: after.min_specific_entropy(gas),
        }
    }

    fn compose(
        &self,
        field: &SolutionField<D>,
        dt: f64,
    ) -> Result<(
        SolutionField<D>,
        Vec<SubstepAudit>,
        Vec<StageStats>,
        ParabolicReport,
    )> {
        let disc = self.disc();
        let (w1, h1) = self.hyperbolic.step(field, 0.5 * dt)?;
        let force_half = self.force.as_ref().map(|f| {
            let t = field.time + 0.5 * dt;
            (0..disc.n_dofs())
                .map(|i| f(&disc.mesh.dof_coord(i), t))
                .collect::<Vec<_>>()
        });
        let (mut w2, prep) = self.parabolic.step(&w1, force_half.as_deref(), dt)?;
        w2.time = w1.time;
        let (w3, h2) = self.hyperbolic.step(&w2, 0.5 * dt)?;
        let audits = vec![
            Self::audit(SubstepKind::Hyperbolic, field, &w1, disc),
            Self::audit(SubstepKind::Parabolic, &w1, &w2, disc),
            Self::audit(SubstepKind::Hyperbolic, &w2, &w3, disc),
        ];
        let stages = h1.into_iter().chain(h2).collect();
        Ok((w3, audits, stages, prep))
    }

    /// One step `S1(dt/2) S2(dt) S1(dt/2)` with `dt = cfl dt0(u^n)`, capped
    /// by `dt_cap`. A CFL violation inside the composition triggers one retry
    /// with half the step.
    pub fn step(
        &self,
        field: &SolutionField<D>,
        step: usize,
        dt_cap: f64,
    ) -> Result<(SolutionField<D>, StepReport)> {
        let disc = self.disc();
        let dt0 = self.hyperbolic.dt_max(&field.states)?;
        let mut dt = (self.controls.cfl * dt0).min(dt_cap);
        let mut retried = false;
        let (mut out, substeps, hyperbolic, parabolic) = match self.compose(field, dt) {
            Ok(r) => r,
            Err(Error::Cfl { .. }) => {
                dt *= 0.5;
                retried = true;
                log::debug!("step {step}: CFL violation, retrying with dt = {dt:e}");
                self.compose(field, dt)?
            }
            Err(e) => return Err(e),
        };
        out.time = field.time + dt;
        let gas = disc.gas();
        let t = out.totals(&disc.ops.lumped);
        let report = StepReport {
            step,
            time: out.time,
            dt,
            dt0,
            retried,
            min_rho: out.min_density(),
            min_e: out.min_internal_energy(),
            min_s: out.min_specific_entropy(gas),
            mass: t.mass,
            momentum: t.momentum.to_vec(),
            energy: t.energy,
            substeps,
            hyperbolic,
            parabolic,
        };
        Ok((out, report))
    }

    /// Advance to `t_final`. Steps are clipped to land exactly on every
    /// time in `snapshots` and on `t_final`; `on_snapshot` is called with the
    /// field at each of them.
    pub fn run(
        &self,
        initial: SolutionField<D>,
        snapshots: &[f64],
        mut on_snapshot: impl FnMut(&SolutionField<D>) -> Result<()>,
    ) -> Result<RunOutcome<D>> {
        let c = &self.controls;
        c.validate(initial.time)?;
        let gas = *self.disc().gas();
        initial.check_admissible(&gas)?;
        let mut marks: Vec<f64> = snapshots
            .iter()
            .copied()
            .filter(|&s| s >= initial.time && s <= c.t_final)
            .collect();
        marks.sort_by(f64::total_cmp);
        marks.dedup();
        let eps = 1e-12 * c.t_final.abs().max(1.0);
        let mut next_mark = 0;
        let mut field = initial;
        let mut reports = Vec::new();
        while next_mark < marks.len() && marks[next_mark] <= field.time + eps {
            on_snapshot(&field)?;
            next_mark += 1;
        }
        let mut step = 0;
        while field.time < c.t_final - eps {
            if step >= c.max_steps {
                return Err(Error::Config(format!(
                    "max_steps = {} reached at t = {}",
                    c.max_steps, field.time
                )));
            }
            let target = marks
                .get(next_mark)
                .copied()
                .unwrap_or(c.t_final)
                .min(c.t_final);
            let cap = target - field.time;
            let (mut next, report) = self.step(&field, step, cap).map_err(|e| Error::Step {
                step,
                time: field.time,
                source: Box::new(e),
            })?;
            if (next.time - target).abs() <= eps {
                next.time = target;
            }
            if c.audit_every > 0 && step % c.audit_every == 0 {
                audit_step(&report, &next, &gas).map_err(|e| Error::Step {
                    step,
                    time: field.time,
                    source: Box::new(e),
                })?;
            }
            field = next;
            reports.push(report);
            step += 1;
            while next_mark < marks.len() && marks[next_mark] <= field.time + eps {
                on_snapshot(&field)?;
                next_mark += 1;
            }
        }
        Ok(RunOutcome { field, reports })
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome<const D: usize> {
    pub field: SolutionField<D>,
    pub reports: Vec<StepReport>,
}

fn audit_step<const D: usize>(
    report: &StepReport,
    field: &SolutionField<D>,
    gas: &crate::eos::GasModel,
) -> Result<()> {
    field.check_admissible(gas)?;
    if !report.parabolic.fct_bound_ok {
        return Err(Error::Invariant(
            "energy limiter bound l P >= Q failed".into(),
        ));
    }
    Ok(())
}
