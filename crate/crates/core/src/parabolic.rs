//! Implicit viscous substep.
//!
//! Density is frozen. The velocity is advanced with Crank-Nicolson, the
//! viscous dissipation it produces is handed to the internal energy, which
//! is advanced with a backward-Euler scheme satisfying a minimum principle
//! and a Crank-Nicolson scheme that does not. Both are blended with FCT.
//! Total energy is rebuilt from the new velocity and internal energy.

use crate::eos::ConservedState;
use crate::error::Result;
use crate::field::{Discretization, SolutionField};
use crate::linalg::{cg_solve, CgOptions, Constraint, CsrMatrix, Preconditioner};
use crate::mesh::BoundaryKind;
use crate::operators::DiscreteOperators;

/// Lower bound used by the energy limiter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnergyBound {
    /// `min_j e^n_j` over the whole mesh.
    #[default]
    Global,
    /// `min_j e^n_j` over the stencil of each node.
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParabolicConfig {
    pub cg: CgOptions,
    pub bound: EnergyBound,
    /// Use the FCT-limited Crank-Nicolson energy; otherwise backward Euler.
    pub high_order: bool,
}

impl Default for ParabolicConfig {
    fn default() -> Self {
        Self {
            cg: CgOptions::default(),
            bound: EnergyBound::Global,
            high_order: true,
        }
    }
}

/// Half-step and end-of-step nodal velocities.
#[derive(Clone, Debug)]
pub struct VelocityUpdate<const D: usize> {
    pub v_half: Vec<[f64; D]>,
    pub v_new: Vec<[f64; D]>,
    pub iterations: usize,
}

/// Nodal dissipation `K_i = (1/m_i) int s(v):e(v) phi_i`. The integrand is
/// constant on each cell, so each vertex receives `|K| / (d + 1)` of it.
pub fn viscous_dissipation<const D: usize>(ops: &DiscreteOperators<D>, v: &[[f64; D]]) -> Vec<f64> {
    let gas = &ops.gas;
    let nv = D + 1;
    let mut k_nodal = vec![0.0; ops.n_dofs()];
    for (c, &vol) in ops.cell_measure.iter().enumerate() {
        let dofs = &ops.cell_dofs[c * nv..(c + 1) * nv];
        let grads = &ops.cell_grads[c * nv..(c + 1) * nv];
        let mut g = [[0.0; D]; D];
        for a in 0..nv {
            for k in 0..D {
                for l in 0..D {
                    g[k][l] += v[dofs[a]][k] * grads[a][l];
                }
            }
        }
        let mut strain2 = 0.0;
        let mut div = 0.0;
        for k in 0..D {
            div += g[k][k];
            for l in 0..D {
                let e = 0.5 * (g[k][l] + g[l][k]);
                strain2 += e * e;
            }
        }
        let sigma = 2.0 * gas.mu * strain2 + (gas.lambda - 2.0 / 3.0 * gas.mu) * div * div;
        for &i in dofs {
            k_nodal[i] += sigma * vol / nv as f64;
        }
    }
    for (k, m) in k_nodal.iter_mut().zip(&ops.lumped) {
        *k /= m;
    }
    k_nodal
}

/// Outcome of the FCT energy limiter.
#[derive(Clone, Debug)]
pub struct FctOutcome {
    pub e_new: Vec<f64>,
    /// `l_i^-` per node.
    pub node_factor: Vec<f64>,
    /// Whether `l_i^- P_i^- >= Q_i^-` held at every node.
    pub bound_ok: bool,
}

/// Blend `e_L` with `e_H` so that `e_new >= e_min` nodewise.
///
/// `weight[i] = m_i rho_i`; `fixed[i]` marks Dirichlet rows that are never
/// limited or modified.
#[allow(clippy::too_many_arguments)]
pub fn fct_limit_energy<const D: usize>(
    ops: &DiscreteOperators<D>,
    weight: &[f64],
    e_n: &[f64],
    e_l: &[f64],
    e_h: &[f64],
    dt: f64,
    e_min: &[f64],
    fixed: &[bool],
) -> FctOutcome {
    let g = &ops.graph;
    let n = g.n_rows();
    let flux = |k: usize, i: usize, j: usize| {
        -0.5 * dt * ops.beta[k] * (e_h[j] - e_h[i] + e_n[j] - e_n[i] - 2.0 * e_l[j] + 2.0 * e_l[i])
    };
    let mut node_factor = vec![1.0; n];
    let mut bound_ok = true;
    for i in 0..n {
        let mut p_minus = 0.0;
        for k in g.row(i) {
            let j = g.cols[k];
            if j != i {
                p_minus += flux(k, i, j).min(0.0);
            }
        }
        let q_minus = weight[i] * (e_min[i] - e_l[i]);
        if p_minus < 0.0 {
            let mut l = (q_minus / p_minus).clamp(0.0, 1.0);
            // Restore l P >= Q if the division rounded up.
            while l > 0.0 && l * p_minus < q_minus {
                l = f64::from_bits(l.to_bits() - 1);
            }
            node_factor[i] = l;
            bound_ok &= l * p_minus >= q_minus.min(0.0);
        }
    }
    let e_new = (0..n)
        .map(|i| {
            if fixed[i] {
                return e_l[i];
            }
            let mut acc = 0.0;
            for k in g.row(i) {
                let j = g.cols[k];
                if j == i {
                    continue;
                }
                let a = flux(k, i, j);
                let l = if a >= 0.0 {
                    node_factor[j]
                } else {
                    node_factor[i]
                };
                acc += l * a;
            }
            e_l[i] + acc / weight[i]
        })
        .collect();
    FctOutcome {
        e_new,
        node_factor,
        bound_ok,
    }
}

/// `E_i = rho_i e_i + rho_i |V_i|^2 / 2` with the density of `field`.
pub fn total_energy_update<const D: usize>(
    field: &SolutionField<D>,
    v_new: &[[f64; D]],
    e_new: &[f64],
) -> SolutionField<D> {
    let states = field
        .states
        .iter()
        .zip(v_new.iter().zip(e_new))
        .map(|(u, (v, &e))| {
            let mut out = ConservedState::from_primitive(u.rho, *v, e);
            out.rho = u.rho;
            out
        })
        .collect();
    SolutionField::new(states, field.time)
}

/// Diagnostics of one parabolic substep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParabolicReport {
    /// CG iterations of the velocity, low-order and high-order energy solves.
    pub iterations: [usize; 3],
    /// `|sum m E^{n+1} - sum m E^n - dt sum m F.V_half|` relative to `sum m E^n`.
    pub energy_balance: f64,
    pub min_fct_factor: f64,
    pub fct_bound_ok: bool,
    pub skipped: bool,
}

/// The parabolic substep on a fixed discretization.
pub struct ParabolicSolver<'a, const D: usize> {
    pub disc: &'a Discretization<D>,
    pub config: ParabolicConfig,
    /// `B` expanded to `nD x nD`, unscaled.
    vel: CsrMatrix,
    vel_diag: Vec<usize>,
    vel_constraint: Constraint,
    /// `beta` as an `n x n` matrix.
    heat: CsrMatrix,
    heat_diag: Vec<usize>,
    heat_constraint: Constraint,
    fixed_energy: Vec<bool>,
}

impl<'a, const D: usize> ParabolicSolver<'a, D> {
    pub fn new(disc: &'a Discretization<D>, config: ParabolicConfig) -> Self {
        let ops = &disc.ops;
        let g = &ops.graph;
        let n = g.n_rows();

        let mut row_ptr = vec![0];
        let mut cols = Vec::with_capacity(g.nnz() * D * D);
        let mut vals = Vec::with_capacity(g.nnz() * D * D);
        let mut vel_diag = vec![0; n * D];
        for i in 0..n {
            for k in 0..D {
                for pos in g.row(i) {
                    let j = g.cols[pos];
                    for l in 0..D {
                        if i == j && k == l {
                            vel_diag[i * D + k] = cols.len();
                        }
                        cols.push(j * D + l);
                        vals.push(ops.visc[pos][k][l]);
                    }
                }
                row_ptr.push(cols.len());
            }
        }
        let vel = CsrMatrix {
            n: n * D,
            row_ptr,
            cols,
            vals,
        };
        let heat = CsrMatrix {
            n,
            row_ptr: g.row_ptr.clone(),
            cols: g.cols.clone(),
            vals: ops.beta.clone(),
        };

        let mut vel_constraint = Constraint::none(n, D);
        let mut heat_constraint = Constraint::none(n, 1);
        let mut fixed_energy = vec![false; n];
        for i in 0..n {
            match disc.kinds[i] {
                None => {}
                Some(BoundaryKind::Slip) if D == 2 => {
                    let nrm = disc.unit_normals[i];
                    let t = [-nrm[1], nrm[0]];
                    vel_constraint.projectors[i] =
                        Some(vec![t[0] * t[0], t[0] * t[1], t[1] * t[0], t[1] * t[1]]);
                }
                Some(kind) => {
                    vel_constraint.projectors[i] = Some(vec![0.0; D * D]);
                    if kind == BoundaryKind::Dirichlet {
                        heat_constraint.projectors[i] = Some(vec![0.0]);
                        fixed_energy[i] = true;
                    }
                }
            }
        }
        Self {
            disc,
            config,
            vel,
            vel_diag,
            vel_constraint,
            heat_diag: g.diag.clone(),
            heat,
            heat_constraint,
            fixed_energy,
        }
    }

    fn opts(&self) -> CgOptions {
        self.config.cg
    }

    /// Crank-Nicolson velocity update with nodal forces sampled at mid-step.
    pub fn velocity_update(
        &self,
        field: &SolutionField<D>,
        force: Option<&[[f64; D]]>,
        dt: f64,
    ) -> Result<VelocityUpdate<D>> {
        let ops = &self.disc.ops;
        let n = ops.n_dofs();
        let mut a = self.vel.clone();
        for v in a.vals.iter_mut() {
            *v *= 0.5 * dt;
        }
        let mut b = vec![0.0; n * D];
        let mut x = vec![0.0; n * D];
        let v_old: Vec<[f64; D]> = field.states.iter().map(|u| u.velocity()).collect();
        for i in 0..n {
            let w = ops.lumped[i] * field.states[i].rho;
            for k in 0..D {
                a.vals[self.vel_diag[i * D + k]] += w;
                b[i * D + k] = ops.lumped[i] * field.states[i].mom[k];
                if let Some(f) = force {
                    b[i * D + k] += 0.5 * dt * ops.lumped[i] * f[i][k];
                }
                x[i * D + k] = v_old[i][k];
            }
            match self.disc.kinds[i] {
                Some(BoundaryKind::NoSlip) => x[i * D..(i + 1) * D].fill(0.0),
                Some(BoundaryKind::Slip) => {
                    let nrm = self.disc.unit_normals[i];
                    let vn: f64 = (0..D).map(|k| x[i * D + k] * nrm[k]).sum();
                    for k in 0..D {
                        x[i * D + k] -= vn * nrm[k];
                    }
                }
                _ => {}
            }
        }
        let pre = Preconditioner::block_jacobi(&a, D);
        let out = cg_solve(
            &a,
            &b,
            &mut x,
            &pre,
            Some(&self.vel_constraint),
            self.opts(),
        )?;
        let mut v_half = vec![[0.0; D]; n];
        let mut v_new = vec![[0.0; D]; n];
        for i in 0..n {
            for k in 0..D {
                v_half[i][k] = x[i * D + k];
                v_new[i][k] = 2.0 * x[i * D + k] - v_old[i][k];
            }
        }
        Ok(VelocityUpdate {
            v_half,
            v_new,
            iterations: out.iterations,
        })
    }

    /// Solve `m_i rho_i (x_i - e_i) + theta dt sum_j beta_ij x_j = s dt m_i K_i`.
    fn energy_solve(
        &self,
        rho: &[f64],
        e_n: &[f64],
        k_nodal: &[f64],
        theta: f64,
        source: f64,
        dt: f64,
    ) -> Result<(Vec<f64>, usize)> {
        let ops = &self.disc.ops;
        let n = ops.n_dofs();
        let mut a = self.heat.clone();
        for v in a.vals.iter_mut() {
            *v *= theta * dt;
        }
        let mut b = vec![0.0; n];
        for i in 0..n {
            let w = ops.lumped[i] * rho[i];
            a.vals[self.heat_diag[i]] += w;
            b[i] = w * e_n[i] + source * dt * ops.lumped[i] * k_nodal[i];
        }
        let mut x = e_n.to_vec();
        let pre = Preconditioner::jacobi(&a);
        let out = cg_solve(
            &a,
            &b,
            &mut x,
            &pre,
            Some(&self.heat_constraint),
            self.opts(),
        )?;
        Ok((x, out.iterations))
    }

    /// Backward-Euler internal energy. Values below `min e^n` can only come
    /// from solver inexactness and are clipped to it.
    pub fn energy_low_order(
        &self,
        rho: &[f64],
        e_n: &[f64],
        k_nodal: &[f64],
        dt: f64,
    ) -> Result<(Vec<f64>, usize)> {
        let (mut e, it) = self.energy_solve(rho, e_n, k_nodal, 1.0, 1.0, dt)?;
        let e_min = e_n.iter().copied().fold(f64::INFINITY, f64::min);
        for v in e.iter_mut() {
            *v = v.max(e_min);
        }
        Ok((e, it))
    }

    /// Crank-Nicolson internal energy `e^H = 2 e^{H,1/2} - e^n`.
    pub fn energy_high_order(
        &self,
        rho: &[f64],
        e_n: &[f64],
        k_nodal: &[f64],
        dt: f64,
    ) -> Result<(Vec<f64>, usize)> {
        let (half, it) = self.energy_solve(rho, e_n, k_nodal, 0.5, 0.5, dt)?;
        let e = half.iter().zip(e_n).map(|(h, e)| 2.0 * h - e).collect();
        Ok((e, it))
    }

    fn energy_floor(&self, e_n: &[f64]) -> Vec<f64> {
        let g = &self.disc.ops.graph;
        match self.config.bound {
            EnergyBound::Global => {
                let m = e_n.iter().copied().fold(f64::INFINITY, f64::min);
                vec![m; e_n.len()]
            }
            EnergyBound::Local => (0..e_n.len())
                .map(|i| {
                    g.stencil(i)
                        .iter()
                        .map(|&j| e_n[j])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect(),
        }
    }

    /// The complete substep over `dt`; `force` holds nodal force densities
    /// (per unit volume) at mid-step.
    pub fn step(
        &self,
        field: &SolutionField<D>,
        force: Option<&[[f64; D]]>,
        dt: f64,
    ) -> Result<(SolutionField<D>, ParabolicReport)> {
        let ops = &self.disc.ops;
        let gas = &ops.gas;
        field.check_admissible(gas)?;
        if gas.mu == 0.0 && gas.lambda == 0.0 && force.is_none() {
            // Nothing diffuses and nothing forces: the substep is the identity.
            let mut out = field.clone();
            out.time += dt;
            return Ok((
                out,
                ParabolicReport {
                    iterations: [0; 3],
                    energy_balance: 0.0,
                    min_fct_factor: 1.0,
                    fct_bound_ok: true,
                    skipped: true,
                },
            ));
        }
        let rho: Vec<f64> = field.states.iter().map(|u| u.rho).collect();
        let e_n: Vec<f64> = field.states.iter().map(|u| u.internal_energy()).collect();
        let vel = self.velocity_update(field, force, dt)?;
        let k_nodal = viscous_dissipation(ops, &vel.v_half);
        let (e_l, it_l) = self.energy_low_order(&rho, &e_n, &k_nodal, dt)?;
        let (e_new, it_h, min_fct_factor, fct_bound_ok) = if self.config.high_order {
            let (e_h, it_h) = self.energy_high_order(&rho, &e_n, &k_nodal, dt)?;
            let weight: Vec<f64> = rho.iter().zip(&ops.lumped).map(|(r, m)| r * m).collect();
            let floor = self.energy_floor(&e_n);
            let fct = fct_limit_energy(
                ops,
                &weight,
                &e_n,
                &e_l,
                &e_h,
                dt,
                &floor,
                &self.fixed_energy,
            );
            let lmin = fct.node_factor.iter().copied().fold(1.0, f64::min);
            (fct.e_new, it_h, lmin, fct.bound_ok)
        } else {
            (e_l, 0, 0.0, true)
        };
        let mut out = total_energy_update(field, &vel.v_new, &e_new);
        out.time = field.time + dt;

        let before = field.totals(&ops.lumped).energy;
        let after = out.totals(&ops.lumped).energy;
        let work: f64 = match force {
            Some(f) => (0..ops.n_dofs())
                .map(|i| {
                    let fv: f64 = (0..D).map(|k| f[i][k] * vel.v_half[i][k]).sum();
                    ops.lumped[i] * fv
                })
                .sum(),
            None => 0.0,
        };
        let energy_balance =
            (after - before - dt * work).abs() / before.abs().max(f64::MIN_POSITIVE);
        Ok((
            out,
            ParabolicReport {
                iterations: [vel.iterations, it_l, it_h],
                energy_balance,
                min_fct_factor,
                fct_bound_ok,
                skipped: false,
            },
        ))
    }
}
