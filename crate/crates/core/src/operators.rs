//! P1 Lagrange operators assembled on the shared stencil graph.
//!
//! For basis functions `phi_i`:
//!
//! * `m_ij = int phi_i phi_j`, lumped `m_i = int phi_i`,
//! * `c_ij = int phi_i grad phi_j`,
//! * `beta_ij = (kappa / c_v) int grad phi_j . grad phi_i`,
//! * `(B_ij)_kl = int s(phi_j e_l) : e(phi_i e_k)` with the Newtonian stress
//!   `s(v) = 2 mu e(v) + (lambda - 2 mu / 3) div(v) I`.
//!
//! P1 gradients are cellwise constant, so all integrals are evaluated in
//! closed form per cell.

use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::mesh::{MeshTopology, SparsityGraph};

/// Gradients of the barycentric basis functions and the measure of a simplex.
pub fn simplex_gradients<const D: usize>(verts: &[[f64; D]]) -> Option<(f64, Vec<[f64; D]>)> {
    debug_assert_eq!(verts.len(), D + 1);
    let mut jac = [[0.0; D]; D];
    for k in 0..D {
        for r in 0..D {
            // Column k holds x_{k+1} - x_0.
            jac[r][k] = verts[k + 1][r] - verts[0][r];
        }
    }
    let (inv, det) = match D {
        1 => {
            let det = jac[0][0];
            let mut inv = [[0.0; D]; D];
            inv[0][0] = 1.0 / det;
            (inv, det)
        }
        2 => {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let mut inv = [[0.0; D]; D];
            inv[0][0] = jac[1][1] / det;
            inv[0][1] = -jac[0][1] / det;
            inv[1][0] = -jac[1][0] / det;
            inv[1][1] = jac[0][0] / det;
            (inv, det)
        }
        _ => unimplemented!("simplices of dimension {D}"),
    };
    let scale: f64 = (0..D)
        .map(|k| (0..D).map(|r| jac[r][k] * jac[r][k]).sum::<f64>().sqrt())
        .product();
    if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
        return None;
    }
    let mut grads = vec![[0.0; D]; D + 1];
    for k in 0..D {
        // grad phi_{k+1} is row k of the inverse Jacobian.
        grads[k + 1] = inv[k];
        for r in 0..D {
            grads[0][r] -= inv[k][r];
        }
    }
    let factorial: f64 = (1..=D).map(|k| k as f64).product();
    Some((det.abs() / factorial, grads))
}

/// Integral `int s(phi_b e_l) : e(phi_a e_k)` over a cell of measure `vol`.
#[inline]
pub(crate) fn viscous_block<const D: usize>(
    ga: &[f64; D],
    gb: &[f64; D],
    vol: f64,
    mu: f64,
    lambda: f64,
) -> [[f64; D]; D] {
    let dot: f64 = (0..D).map(|r| ga[r] * gb[r]).sum();
    let mut blk = [[0.0; D]; D];
    for k in 0..D {
        for l in 0..D {
            let delta = if k == l { dot } else { 0.0 };
            blk[k][l] =
                vol * (mu * (delta + gb[k] * ga[l]) + (lambda - 2.0 / 3.0 * mu) * ga[k] * gb[l]);
        }
    }
    blk
}

/// Options of [`assemble_operators`].
#[derive(Clone, Copy, Debug, Default)]
pub struct AssemblyOptions {
    /// Fail instead of warning when an off-diagonal `beta_ij` is positive.
    pub strict_acute: bool,
}

/// Every discrete operator shared by the hyperbolic and parabolic substeps.
#[derive(Clone, Debug)]
pub struct DiscreteOperators<const D: usize> {
    pub graph: SparsityGraph,
    /// Lumped mass `m_i`.
    pub lumped: Vec<f64>,
    /// Consistent mass `m_ij` on the graph.
    pub mass: Vec<f64>,
    pub c: Vec<[f64; D]>,
    /// `|c_ij|`.
    pub c_norm: Vec<f64>,
    /// `c_ij / |c_ij|`, zero where `c_ij` vanishes.
    pub n: Vec<[f64; D]>,
    /// Thermal stiffness, already scaled by `kappa / c_v`.
    pub beta: Vec<f64>,
    /// Viscous blocks `B_ij`.
    pub visc: Vec<[[f64; D]; D]>,
    /// `int_boundary phi_i n`, the unnormalized lumped outward normal.
    pub boundary_normal: Vec<[f64; D]>,
    /// Degrees of freedom of each cell, `D + 1` per cell.
    pub cell_dofs: Vec<usize>,
    /// Basis gradients of each cell, `D + 1` per cell.
    pub cell_grads: Vec<[f64; D]>,
    pub cell_measure: Vec<f64>,
    pub domain_measure: f64,
    pub gas: GasModel,
    /// Largest off-diagonal entry of `int grad phi_j . grad phi_i`
    /// (non-positive on acute meshes).
    pub max_offdiag_stiffness: f64,
}

/// Assemble all operators for `mesh` with the transport coefficients of `gas`.
pub fn assemble_operators<const D: usize>(
    mesh: &MeshTopology<D>,
    gas: &GasModel,
    opts: AssemblyOptions,
) -> Result<DiscreteOperators<D>> {
    let graph = mesh.graph().clone();
    let n = mesh.n_dofs();
    let nnz = graph.nnz();
    let mut lumped = vec![0.0; n];
    let mut mass = vec![0.0; nnz];
    let mut c = vec![[0.0; D]; nnz];
    let mut stiff = vec![0.0; nnz];
    let mut visc = vec![[[0.0; D]; D]; nnz];
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells() * (D + 1));
    let mut cell_grads = Vec::with_capacity(mesh.n_cells() * (D + 1));
    let mut cell_measure = Vec::with_capacity(mesh.n_cells());
    let nv = D + 1;
    let mass_factor = 1.0 / ((nv * (nv + 1)) as f64);

    for (k, cell) in mesh.cells().enumerate() {
        let verts: Vec<[f64; D]> = cell.iter().map(|&i| mesh.coords()[i]).collect();
        let (vol, grads) = simplex_gradients(&verts).ok_or_else(|| Error::Assembly {
            cell: k,
            reason: "zero measure".into(),
        })?;
        let dofs: Vec<usize> = cell.iter().map(|&i| mesh.node_to_dof()[i]).collect();
        for a in 0..nv {
            let i = dofs[a];
            lumped[i] += vol / nv as f64;
            for b in 0..nv {
                let j = dofs[b];
                let pos = graph.find(i, j).expect("cell pair missing from stencil");
                mass[pos] += vol * mass_factor * if a == b { 2.0 } else { 1.0 };
                for r in 0..D {
                    c[pos][r] += vol / nv as f64 * grads[b][r];
                }
                stiff[pos] += vol * (0..D).map(|r| grads[a][r] * grads[b][r]).sum::<f64>();
                let blk = viscous_block(&grads[a], &grads[b], vol, gas.mu, gas.lambda);
                for (dst, src) in visc[pos].iter_mut().zip(blk.iter()) {
                    for (d, s) in dst.iter_mut().zip(src.iter()) {
                        *d += s;
                    }
                }
            }
        }
        cell_dofs.extend_from_slice(&dofs);
        cell_grads.extend_from_slice(&grads);
        cell_measure.push(vol);
    }

    let kappa = gas.kappa_over_cv();
    let beta: Vec<f64> = stiff.iter().map(|s| kappa * s).collect();

    let mut c_norm = vec![0.0; nnz];
    let mut unit = vec![[0.0; D]; nnz];
    let mut boundary_normal = vec![[0.0; D]; n];
    for i in 0..n {
        for pos in graph.row(i) {
            let j = graph.cols[pos];
            let nrm = crate::eos::norm(&c[pos]);
            c_norm[pos] = nrm;
            if nrm > 0.0 {
                for r in 0..D {
                    unit[pos][r] = c[pos][r] / nrm;
                }
            }
            // Column sums of c give the boundary integral of phi_j n.
            for r in 0..D {
                boundary_normal[j][r] += c[pos][r];
            }
        }
    }
    for i in mesh.interior_dofs() {
        boundary_normal[i] = [0.0; D];
    }

    // Off-diagonal stiffness sign audit. Tiny positive values from
    // right angles are rounding noise.
    let mut max_offdiag = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for i in 0..n {
        let scale = stiff[graph.diag[i]].abs();
        for pos in graph.row(i) {
            if graph.cols[pos] == i {
                continue;
            }
            max_offdiag = max_offdiag.max(stiff[pos]);
            if stiff[pos] > 1e-12 * scale {
                violations += 1;
            }
        }
    }
    if violations > 0 {
        let msg = format!(
            "{violations} off-diagonal stiffness entries are positive (max {max_offdiag:e}); \
             the mesh violates the acute angle condition"
        );
        if opts.strict_acute {
            return Err(Error::Mesh(msg));
        }
        log::warn!("{msg}");
    }

    Ok(DiscreteOperators {
        graph,
        lumped: lumped.clone(),
        mass,
        c,
        c_norm,
        n: unit,
        beta,
        visc,
        boundary_normal,
        cell_dofs,
        cell_grads,
        cell_measure: cell_measure.clone(),
        domain_measure: cell_measure.iter().sum(),
        gas: *gas,
        max_offdiag_stiffness: max_offdiag,
    })
}

impl<const D: usize> DiscreteOperators<D> {
    pub fn n_dofs(&self) -> usize {
        self.lumped.len()
    }

    /// `a(v, v) = sum_ij v_i^T B_ij v_j` for nodal velocities `v`.
    pub fn viscous_energy(&self, v: &[[f64; D]]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_dofs() {
            for pos in self.graph.row(i) {
                let j = self.graph.cols[pos];
                let b = &self.visc[pos];
                for k in 0..D {
                    for l in 0..D {
                        total += v[i][k] * b[k][l] * v[j][l];
                    }
                }
            }
        }
        total
    }
}
