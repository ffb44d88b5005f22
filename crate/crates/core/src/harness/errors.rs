//! Relative error indicators against an exact solution.

use crate::eos::ConservedState;
use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::mesh::MeshTopology;
use crate::operators::simplex_gradients;

/// Which norm an indicator is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

/// `delta_q = |rho_h - rho| / |rho| + |m_h - m| / |m| + |E_h - E| / |E|` in
/// the three norms. Integrals use the lumped-mass nodal quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub n_dofs: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub delta_inf: f64,
    /// Relative errors of density, momentum and energy, indexed like `delta*`.
    pub components: [[f64; 3]; 3],
}

impl ErrorReport {
    pub fn delta(&self, q: Norm) -> f64 {
        match q {
            Norm::L1 => self.delta1,
            Norm::L2 => self.delta2,
            Norm::Linf => self.delta_inf,
        }
    }
}

/// Error of `numerical` against `exact`, which is sampled at every dof.
pub fn compute_delta_q<const D: usize>(
    numerical: &SolutionField<D>,
    exact: &[ConservedState<D>],
    lumped: &[f64],
) -> Result<ErrorReport> {
    let n = numerical.len();
    if exact.len() != n || lumped.len() != n {
        return Err(Error::Config(format!(
            "error indicator needs {n} exact samples and masses, got {} and {}",
            exact.len(),
            lumped.len()
        )));
    }
    let samples = (0..n).map(|i| (lumped[i], numerical.states[i], exact[i]));
    accumulate(n, samples)
}

/// Same indicator with the error integrated cell by cell: Gauss-Legendre
/// with 3 points on intervals, the 3-point interior rule on triangles. This
/// includes the interpolation error of the P1 field.
pub fn compute_delta_q_cellwise<const D: usize>(
    numerical: &SolutionField<D>,
    mesh: &MeshTopology<D>,
    exact: impl Fn(&[f64; D]) -> ConservedState<D>,
) -> Result<ErrorReport> {
    let rule: Vec<(f64, Vec<f64>)> = match D {
        1 => {
            let a = 0.5 * (0.6f64).sqrt();
            vec![
                (5.0 / 18.0, vec![0.5 + a, 0.5 - a]),
                (8.0 / 18.0, vec![0.5, 0.5]),
                (5.0 / 18.0, vec![0.5 - a, 0.5 + a]),
            ]
        }
        _ => {
            let (p, q) = (2.0 / 3.0, 1.0 / 6.0);
            vec![
                (1.0 / 3.0, vec![p, q, q]),
                (1.0 / 3.0, vec![q, p, q]),
                (1.0 / 3.0, vec![q, q, p]),
            ]
        }
    };
    let mut samples = Vec::with_capacity(mesh.n_cells() * rule.len());
    for cell in mesh.cells() {
        let verts: Vec<[f64; D]> = cell.iter().map(|&v| mesh.coords()[v]).collect();
        let Some((vol, _)) = simplex_gradients(&verts) else {
            continue;
        };
        let dofs: Vec<usize> = cell.iter().map(|&v| mesh.node_to_dof()[v]).collect();
        for (w, bary) in &rule {
            let mut x = [0.0; D];
            let mut uh = ConservedState::zero();
            for (a, &lam) in bary.iter().enumerate() {
                for k in 0..D {
                    x[k] += lam * verts[a][k];
                }
                uh += lam * numerical.states[dofs[a]];
            }
            samples.push((w * vol, uh, exact(&x)));
        }
    }
    accumulate(numerical.len(), samples.into_iter())
}

fn accumulate<const D: usize>(
    n_dofs: usize,
    samples: impl Iterator<Item = (f64, ConservedState<D>, ConservedState<D>)>,
) -> Result<ErrorReport> {
    // acc[q][component] = (error, reference), q in {1, 2, inf}.
    let mut acc = [[(0.0f64, 0.0f64); 3]; 3];
    for (w, uh, u) in samples {
        let dm: f64 = (0..D)
            .map(|k| (uh.mom[k] - u.mom[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        let pairs = [
            ((uh.rho - u.rho).abs(), u.rho.abs()),
            (dm, u.momentum_norm()),
            ((uh.ener - u.ener).abs(), u.ener.abs()),
        ];
        for (c, &(err, reference)) in pairs.iter().enumerate() {
            acc[0][c].0 += w * err;
            acc[0][c].1 += w * reference;
            acc[1][c].0 += w * err * err;
            acc[1][c].1 += w * reference * reference;
            acc[2][c].0 = acc[2][c].0.max(err);
            acc[2][c].1 = acc[2][c].1.max(reference);
        }
    }
    let names = ["density", "momentum", "total energy"];
    let mut components = [[0.0; 3]; 3];
    for q in 0..3 {
        for c in 0..3 {
            let (mut err, mut reference) = acc[q][c];
            if q == 1 {
                err = err.sqrt();
                reference = reference.sqrt();
            }
            if !(reference > 0.0) {
                return Err(Error::Config(format!(
                    "exact {} has zero norm; relative error undefined",
                    names[c]
                )));
            }
            components[q][c] = err / reference;
        }
    }
    let sum = |q: usize| components[q].iter().sum();
    Ok(ErrorReport {
        n_dofs,
        delta1: sum(0),
        delta2: sum(1),
        delta_inf: sum(2),
        components,
    })
}

/// Observed order between two grids.
pub fn observed_rate(delta_coarse: f64, delta_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (delta_coarse / delta_fine).ln() / (h_coarse / h_fine).ln()
}
