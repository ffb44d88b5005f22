//! Nodal solution vectors and the problem context shared by all substeps.

use std::sync::Arc;

use crate::eos::{norm, ConservedState, GasModel};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryKind, MeshTopology};
use crate::operators::{assemble_operators, AssemblyOptions, DiscreteOperators};

/// Conserved states at every degree of freedom at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField<const D: usize> {
    pub states: Vec<ConservedState<D>>,
    pub time: f64,
}

/// Lumped-mass integrals of the conserved variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Totals<const D: usize> {
    pub mass: f64,
    pub momentum: [f64; D],
    pub energy: f64,
}

impl<const D: usize> SolutionField<D> {
    pub fn new(states: Vec<ConservedState<D>>, time: f64) -> Self {
        Self { states, time }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn totals(&self, lumped: &[f64]) -> Totals<D> {
        let mut t = Totals {
            mass: 0.0,
            momentum: [0.0; D],
            energy: 0.0,
        };
        for (u, &m) in self.states.iter().zip(lumped) {
            t.mass += m * u.rho;
            for k in 0..D {
                t.momentum[k] += m * u.mom[k];
            }
            t.energy += m * u.ener;
        }
        t
    }

    /// Error on the first inadmissible state.
    pub fn check_admissible(&self, gas: &GasModel) -> Result<()> {
        for (i, u) in self.states.iter().enumerate() {
            u.thermodynamics(gas).map_err(|e| e.at_node(i))?;
        }
        Ok(())
    }

    pub fn min_density(&self) -> f64 {
        self.states
            .iter()
            .map(|u| u.rho)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_internal_energy(&self) -> f64 {
        self.states
            .iter()
            .map(|u| u.internal_energy())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_specific_entropy(&self, gas: &GasModel) -> f64 {
        self.states
            .iter()
            .map(|u| u.specific_entropy(gas))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Prescribed state of a Dirichlet dof: `(dof, position, time) -> state`.
pub type DirichletFn<const D: usize> =
    Arc<dyn Fn(usize, &[f64; D], f64) -> ConservedState<D> + Send + Sync>;

/// Mesh, operators, gas model and boundary data of one problem.
#[derive(Clone)]
pub struct Discretization<const D: usize> {
    pub mesh: MeshTopology<D>,
    pub ops: DiscreteOperators<D>,
    /// Boundary condition of every dof, `None` in the interior.
    pub kinds: Vec<Option<BoundaryKind>>,
    /// Unit outward normals at boundary dofs, zero elsewhere.
    pub unit_normals: Vec<[f64; D]>,
    pub dirichlet: Option<DirichletFn<D>>,
}

impl<const D: usize> std::fmt::Debug for Discretization<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("n_dofs", &self.mesh.n_dofs())
            .field("n_cells", &self.mesh.n_cells())
            .field("dirichlet", &self.dirichlet.is_some())
            .finish()
    }
}

impl<const D: usize> Discretization<D> {
    pub fn new(mesh: MeshTopology<D>, gas: GasModel, opts: AssemblyOptions) -> Result<Self> {
        let ops = assemble_operators(&mesh, &gas, opts)?;
        let n = mesh.n_dofs();
        let kinds: Vec<_> = (0..n).map(|i| mesh.boundary_kind(i)).collect();
        let mut unit_normals = vec![[0.0; D]; n];
        for i in 0..n {
            if kinds[i].is_some() {
                let nb = ops.boundary_normal[i];
                let len = norm(&nb);
                if len > 0.0 {
                    for k in 0..D {
                        unit_normals[i][k] = nb[k] / len;
                    }
                }
            }
        }
        Ok(Self {
            mesh,
            ops,
            kinds,
            unit_normals,
            dirichlet: None,
        })
    }

    pub fn with_dirichlet(mut self, f: DirichletFn<D>) -> Self {
        self.dirichlet = Some(f);
        self
    }

    /// Keep Dirichlet dofs at their values in `field` for the whole run.
    pub fn freeze_dirichlet(&mut self, field: &SolutionField<D>) {
        let frozen = field.states.clone();
        self.dirichlet = Some(Arc::new(move |i, _x: &[f64; D], _t| frozen[i]));
    }

    pub fn gas(&self) -> &GasModel {
        &self.ops.gas
    }

    pub fn n_dofs(&self) -> usize {
        self.ops.n_dofs()
    }

    pub fn has_dirichlet_dofs(&self) -> bool {
        self.kinds.contains(&Some(BoundaryKind::Dirichlet))
    }

    pub fn is_dirichlet(&self, i: usize) -> bool {
        self.kinds[i] == Some(BoundaryKind::Dirichlet)
    }

    /// Prescribed state of Dirichlet dof `i` at time `t`.
    pub fn dirichlet_state(&self, i: usize, t: f64) -> Result<ConservedState<D>> {
        let f = self.dirichlet.as_ref().ok_or_else(|| {
            Error::Config("Dirichlet boundary present but no boundary data supplied".into())
        })?;
        Ok(f(i, &self.mesh.dof_coord(i), t))
    }

    /// Remove the normal momentum on slip dofs and all momentum on no-slip
    /// dofs. Total energy is left untouched, so removed kinetic energy
    /// becomes internal energy.
    pub fn project_walls(&self, states: &mut [ConservedState<D>]) {
        for (i, u) in states.iter_mut().enumerate() {
            match self.kinds[i] {
                Some(BoundaryKind::Slip) => {
                    let n = &self.unit_normals[i];
                    let mn: f64 = (0..D).map(|k| u.mom[k] * n[k]).sum();
                    for k in 0..D {
                        u.mom[k] -= mn * n[k];
                    }
                }
                Some(BoundaryKind::NoSlip) => u.mom = [0.0; D],
                _ => {}
            }
        }
    }

    /// Boundary fix-up applied after every hyperbolic stage: wall
    /// projection and Dirichlet overwrite at time `t`.
    pub fn apply_hyperbolic_bc(&self, states: &mut [ConservedState<D>], t: f64) -> Result<()> {
        self.project_walls(states);
        for i in 0..states.len() {
            if self.is_dirichlet(i) {
                states[i] = self.dirichlet_state(i, t)?;
            }
        }
        Ok(())
    }
}
