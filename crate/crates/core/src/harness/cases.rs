//! Ready-made problems: traveling viscous shock in 1D and 2D, a viscous Sod
//! tube, and the shock/boundary-layer shocktube.

use std::sync::Arc;

use crate::becker::BeckerParams;
use crate::eos::{ConservedState, GasModel};
use crate::error::Result;
use crate::field::{Discretization, SolutionField};
use crate::mesh::{uniform_1d, BoundaryKind, MeshTopology, Side};
use crate::operators::AssemblyOptions;

/// Exact solution `(x, t) -> state`.
pub type ExactFn<const D: usize> = Arc<dyn Fn(&[f64; D], f64) -> ConservedState<D> + Send + Sync>;

/// A discretized problem with its initial field and, when known, the exact
/// solution.
pub struct Problem<const D: usize> {
    pub disc: Discretization<D>,
    pub initial: SolutionField<D>,
    pub exact: Option<ExactFn<D>>,
}

impl<const D: usize> Problem<D> {
    /// Exact solution sampled at every dof.
    pub fn sample_exact(&self, t: f64) -> Option<Vec<ConservedState<D>>> {
        let f = self.exact.as_ref()?;
        Some(
            (0..self.disc.n_dofs())
                .map(|i| f(&self.disc.mesh.dof_coord(i), t))
                .collect(),
        )
    }

    /// Problem whose initial field samples `init` and whose Dirichlet dofs
    /// follow `dirichlet`, or stay frozen if it is `None`.
    pub fn from_closures(
        mesh: MeshTopology<D>,
        gas: GasModel,
        init: impl Fn(&[f64; D]) -> ConservedState<D>,
        dirichlet: Option<ExactFn<D>>,
        opts: AssemblyOptions,
    ) -> Result<Self> {
        let mut disc = Discretization::new(mesh, gas, opts)?;
        let states = (0..disc.n_dofs())
            .map(|i| init(&disc.mesh.dof_coord(i)))
            .collect();
        let mut initial = SolutionField::new(states, 0.0);
        disc.project_walls(&mut initial.states);
        match &dirichlet {
            Some(f) => {
                let f = f.clone();
                disc = disc.with_dirichlet(Arc::new(move |_, x: &[f64; D], t| f(x, t)));
            }
            None => disc.freeze_dirichlet(&initial),
        }
        Ok(Self {
            disc,
            initial,
            exact: None,
        })
    }
}

/// Translating viscous shock on `n` uniform nodes over `[a, b]` with exact
/// Dirichlet data at both ends.
pub fn becker_1d(params: BeckerParams, a: f64, b: f64, n: usize) -> Result<Problem<1>> {
    let mut mesh = uniform_1d(a, b, n)?;
    mesh.assign_side(Side::Left, BoundaryKind::Dirichlet);
    mesh.assign_side(Side::Right, BoundaryKind::Dirichlet);
    let exact: ExactFn<1> = Arc::new(move |x: &[f64; 1], t| params.state(x[0], t));
    let mut p = Problem::from_closures(
        mesh,
        params.gas()?,
        |x| params.state(x[0], 0.0),
        Some(exact.clone()),
        AssemblyOptions::default(),
    )?;
    p.exact = Some(exact);
    Ok(p)
}

/// The same shock on a 2D mesh, traveling in `x`. Left and right sides get
/// exact Dirichlet data; the mesh is expected to be periodic in `y`.
pub fn becker_2d(params: BeckerParams, mut mesh: MeshTopology<2>) -> Result<Problem<2>> {
    mesh.assign_side(Side::Left, BoundaryKind::Dirichlet);
    mesh.assign_side(Side::Right, BoundaryKind::Dirichlet);
    let state = move |x: &[f64; 2], t: f64| {
        let u = params.state(x[0], t);
        ConservedState::new(u.rho, [u.mom[0], 0.0], u.ener)
    };
    let exact: ExactFn<2> = Arc::new(state);
    let mut p = Problem::from_closures(
        mesh,
        params.gas()?,
        |x| state(x, 0.0),
        Some(exact.clone()),
        AssemblyOptions::default(),
    )?;
    p.exact = Some(exact);
    Ok(p)
}

/// Sod data `(1, 0, 1) | (0.125, 0, 0.1)` on `[0, 1]` with a diaphragm at
/// 1/2, viscosity `mu`, Prandtl 0.73 and no-slip adiabatic ends.
pub fn viscous_sod_1d(n: usize, mu: f64) -> Result<Problem<1>> {
    let gas = GasModel::new(1.4, mu, 0.73)?;
    let mut mesh = uniform_1d(0.0, 1.0, n)?;
    mesh.assign_side(Side::Left, BoundaryKind::NoSlip);
    mesh.assign_side(Side::Right, BoundaryKind::NoSlip);
    Problem::from_closures(
        mesh,
        gas,
        |x| {
            if x[0] < 0.5 {
                ConservedState::from_pressure(1.0, [0.0], 1.0, &gas)
            } else {
                ConservedState::from_pressure(0.125, [0.0], 0.1, &gas)
            }
        },
        None,
        AssemblyOptions::default(),
    )
}

/// Shocktube in the half cavity `(0, 1) x (0, 1/2)`: `rho = 120 | 1.2` at
/// rest with `p = rho / gamma`, diaphragm at `x = 1/2`, no-slip adiabatic
/// walls and a slip symmetry line on top.
pub fn shocktube_2d(mut mesh: MeshTopology<2>, mu: f64) -> Result<Problem<2>> {
    let gas = GasModel::new(1.4, mu, 0.73)?;
    mesh.assign_side(Side::Top, BoundaryKind::Slip);
    for side in [Side::Left, Side::Right, Side::Bottom] {
        mesh.assign_side(side, BoundaryKind::NoSlip);
    }
    Problem::from_closures(
        mesh,
        gas,
        |x| {
            let rho = if x[0] < 0.5 { 120.0 } else { 1.2 };
            ConservedState::from_pressure(rho, [0.0, 0.0], rho / gas.gamma, &gas)
        },
        None,
        AssemblyOptions::default(),
    )
}
