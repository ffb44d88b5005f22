//! File outputs: legacy ASCII VTK snapshots, CSV time series and
//! convergence tables, and the schlieren contrast map.
//!
//! Every file is written to a sibling temporary and renamed into place, so a
//! reader never sees a half-written file.

use std::fmt::Write as _;
use std::path::Path;

use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::mesh::MeshTopology;
use crate::operators::DiscreteOperators;
use crate::splitting::StepReport;

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Nodal `|grad rho_h|` by lumped L2 projection of the cellwise gradient.
pub fn density_gradient_magnitude<const D: usize>(
    ops: &DiscreteOperators<D>,
    field: &SolutionField<D>,
) -> Vec<f64> {
    let nv = D + 1;
    let mut grad = vec![[0.0; D]; ops.n_dofs()];
    for (k, &vol) in ops.cell_measure.iter().enumerate() {
        let dofs = &ops.cell_dofs[k * nv..(k + 1) * nv];
        let grads = &ops.cell_grads[k * nv..(k + 1) * nv];
        let mut g = [0.0; D];
        for (a, &i) in dofs.iter().enumerate() {
            for d in 0..D {
                g[d] += field.states[i].rho * grads[a][d];
            }
        }
        let w = vol / nv as f64;
        for &i in dofs {
            for d in 0..D {
                grad[i][d] += w * g[d];
            }
        }
    }
    grad.iter()
        .zip(&ops.lumped)
        .map(|(g, m)| g.iter().map(|x| x * x).sum::<f64>().sqrt() / m)
        .collect()
}

/// Contrast map `exp(-10 (g - g_min) / (g_max - g_min))`; a constant `g`
/// maps to 1.
pub fn schlieren(g: &[f64]) -> Vec<f64> {
    let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    g.iter()
        .map(|&x| {
            if span > 0.0 {
                (-10.0 * (x - lo) / span).exp()
            } else {
                1.0
            }
        })
        .collect()
}

/// Legacy ASCII VTK unstructured grid with point data at every mesh node.
/// Periodic nodes repeat the value of their dof.
pub fn vtk_string<const D: usize>(
    mesh: &MeshTopology<D>,
    ops: &DiscreteOperators<D>,
    field: &SolutionField<D>,
    gas: &GasModel,
) -> String {
    let n = mesh.n_nodes();
    let dof = mesh.node_to_dof();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "idpns t = {:e}", field.time).unwrap();
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {n} double").unwrap();
    for x in mesh.coords() {
        let y = if D > 1 { x[1] } else { 0.0 };
        writeln!(s, "{:e} {:e} 0", x[0], y).unwrap();
    }
    let nv = D + 1;
    writeln!(s, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (nv + 1)).unwrap();
    for cell in mesh.cells() {
        write!(s, "{nv}").unwrap();
        for v in cell {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "CELL_TYPES {}", mesh.n_cells()).unwrap();
    let cell_type = if D == 1 { 3 } else { 5 };
    for _ in 0..mesh.n_cells() {
        writeln!(s, "{cell_type}").unwrap();
    }

    let g = density_gradient_magnitude(ops, field);
    let contrast = schlieren(&g);
    writeln!(s, "POINT_DATA {n}").unwrap();
    let mut scalar = |name: &str, f: &dyn Fn(usize) -> f64| {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for node in 0..n {
            writeln!(s, "{:e}", f(dof[node])).unwrap();
        }
    };
    scalar("density", &|i| field.states[i].rho);
    scalar("pressure", &|i| field.states[i].pressure(gas));
    scalar("internal_energy", &|i| field.states[i].internal_energy());
    scalar("grad_density", &|i| g[i]);
    scalar("schlieren", &|i| contrast[i]);
    writeln!(s, "VECTORS velocity double").unwrap();
    for node in 0..n {
        let v = field.states[dof[node]].velocity();
        let c = |k: usize| if k < D { v[k] } else { 0.0 };
        writeln!(s, "{:e} {:e} {:e}", c(0), c(1), c(2)).unwrap();
    }
    s
}

pub fn write_vtk<const D: usize>(
    path: &Path,
    mesh: &MeshTopology<D>,
    ops: &DiscreteOperators<D>,
    field: &SolutionField<D>,
    gas: &GasModel,
) -> Result<()> {
    write_atomic(path, vtk_string(mesh, ops, field, gas).as_bytes())
}

/// One CSV row per step: time, step sizes, minima and lumped totals.
pub fn time_series_csv(reports: &[StepReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record([
        "step",
        "time",
        "dt",
        "dt0",
        "retried",
        "min_rho",
        "min_e",
        "min_s",
        "mass",
        "energy",
        "cg_iterations",
    ])
    .map_err(to_err)?;
    for r in reports {
        let iters: usize = r.parabolic.iterations.iter().sum();
        w.write_record([
            r.step.to_string(),
            format!("{:e}", r.time),
            format!("{:e}", r.dt),
            format!("{:e}", r.dt0),
            (r.retried as u8).to_string(),
            format!("{:e}", r.min_rho),
            format!("{:e}", r.min_e),
            format!("{:e}", r.min_s),
            format!("{:e}", r.mass),
            format!("{:e}", r.energy),
            iters.to_string(),
        ])
        .map_err(to_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}
