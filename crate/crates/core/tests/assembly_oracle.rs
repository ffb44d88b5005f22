mod common;

use common::triangle_rule;
use idpns::mesh::{structured_tri_2d, DiagonalPattern, MeshTopology};
use idpns::operators::{assemble_operators, AssemblyOptions};
use idpns::GasModel;
use nalgebra::{Matrix3, Vector3};

/// Barycentric coordinates of `x` in the triangle `v`, by a direct solve.
fn barycentric(v: &[[f64; 2]; 3], x: [f64; 2]) -> Vector3<f64> {
    let a = Matrix3::new(
        v[0][0], v[1][0], v[2][0], //
        v[0][1], v[1][1], v[2][1], //
        1.0, 1.0, 1.0,
    );
    a.lu().solve(&Vector3::new(x[0], x[1], 1.0)).unwrap()
}

#[test]
fn viscous_blocks_match_dense_quadrature() {
    let v = [[0.1, -0.2], [1.3, 0.1], [0.4, 0.9]];
    let mesh = MeshTopology::from_parts(v.to_vec(), vec![0, 1, 2], &[]).unwrap();
    let gas = GasModel::with_bulk_viscosity(1.4, 0.7, 0.3, 0.72).unwrap();
    let ops = assemble_operators(&mesh, &gas, AssemblyOptions::default()).unwrap();

    // Map the reference rule onto the triangle.
    let jac = ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
        .abs();
    let fd = 1e-6;
    let mut dense = [[[[0.0; 2]; 2]; 3]; 3];
    for (xi, eta, w) in triangle_rule(8) {
        let x = [
            v[0][0] + xi * (v[1][0] - v[0][0]) + eta * (v[2][0] - v[0][0]),
            v[0][1] + xi * (v[1][1] - v[0][1]) + eta * (v[2][1] - v[0][1]),
        ];
        // Gradients of the basis by central differences of the barycentrics.
        let mut grad = [[0.0; 2]; 3];
        for d in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[d] += fd;
            xm[d] -= fd;
            let (bp, bm) = (barycentric(&v, xp), barycentric(&v, xm));
            for a in 0..3 {
                grad[a][d] = (bp[a] - bm[a]) / (2.0 * fd);
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                for k in 0..2 {
                    for l in 0..2 {
                        // s(phi_b e_l) : e(phi_a e_k)
                        let gu = |r: usize, s: usize| if r == l { grad[b][s] } else { 0.0 };
                        let gw = |r: usize, s: usize| if r == k { grad[a][s] } else { 0.0 };
                        let div = grad[b][l];
                        let mut val = 0.0;
                        for r in 0..2 {
                            for s in 0..2 {
                                let eu = 0.5 * (gu(r, s) + gu(s, r));
                                let ew = 0.5 * (gw(r, s) + gw(s, r));
                                let sig = 2.0 * gas.mu * eu
                                    + if r == s {
                                        (gas.lambda - 2.0 / 3.0 * gas.mu) * div
                                    } else {
                                        0.0
                                    };
                                val += sig * ew;
                            }
                        }
                        dense[a][b][k][l] += w * jac * val;
                    }
                }
            }
        }
    }
    let g = &ops.graph;
    for a in 0..3 {
        for b in 0..3 {
            let blk = ops.visc[g.find(a, b).unwrap()];
            for k in 0..2 {
                for l in 0..2 {
                    let err = (blk[k][l] - dense[a][b][k][l]).abs();
                    // Finite-difference gradients of linear functions are
                    // exact up to rounding of the solve.
                    assert!(
                        err < 1e-9,
                        "B[{a}{b}][{k}{l}]: {} vs {}",
                        blk[k][l],
                        dense[a][b][k][l]
                    );
                }
            }
        }
    }
}

#[test]
fn viscous_blocks_match_closed_form_on_reference_triangle() {
    let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mesh = MeshTopology::from_parts(v.to_vec(), vec![0, 1, 2], &[]).unwrap();
    let gas = GasModel::new(1.4, 1.0, 0.72).unwrap();
    let ops = assemble_operators(&mesh, &gas, AssemblyOptions::default()).unwrap();
    let grad = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let g = &ops.graph;
    for a in 0..3 {
        for b in 0..3 {
            let blk = ops.visc[g.find(a, b).unwrap()];
            let dot = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1];
            for k in 0..2 {
                for l in 0..2 {
                    let delta = if k == l { dot } else { 0.0 };
                    let expect = 0.5
                        * (delta + grad[b][k] * grad[a][l] - 2.0 / 3.0 * grad[a][k] * grad[b][l]);
                    assert!((blk[k][l] - expect).abs() < 1e-14, "B[{a}{b}][{k}{l}]");
                }
            }
        }
    }
}

#[test]
fn row_sums_on_a_periodic_mesh() {
    let mesh = structured_tri_2d(
        (0.0, 2.0),
        (0.0, 1.0),
        9,
        6,
        DiagonalPattern::Alternating,
        true,
    )
    .unwrap();
    let gas = GasModel::new(1.4, 0.3, 0.7).unwrap();
    let ops = assemble_operators(&mesh, &gas, AssemblyOptions::default()).unwrap();
    let g = &ops.graph;
    for i in 0..mesh.n_dofs() {
        let m: f64 = g.row(i).map(|k| ops.mass[k]).sum();
        assert!((m - ops.lumped[i]).abs() < 1e-13);
        let b: f64 = g.row(i).map(|k| ops.beta[k]).sum();
        assert!(b.abs() < 1e-13);
        if !mesh.is_boundary(i) {
            for d in 0..2 {
                let c: f64 = g.row(i).map(|k| ops.c[k][d]).sum();
                assert!(c.abs() < 1e-13);
            }
        }
    }
}
