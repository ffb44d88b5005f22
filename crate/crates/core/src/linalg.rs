//! Sparse symmetric matrices and a preconditioned conjugate gradient solver.

use crate::error::{Error, Result};

/// Scalar CSR matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Build from a dense row-major matrix, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, di) in d.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    *di += self.vals[k];
                }
            }
        }
        d
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .filter(|&k| self.cols[k] == j)
            .map(|k| self.vals[k])
            .sum()
    }
}

/// Preconditioners for [`cg_solve`].
#[derive(Clone, Debug)]
pub enum Preconditioner {
    Identity,
    /// Inverse diagonal.
    Jacobi(Vec<f64>),
    /// Inverses of the `b x b` diagonal blocks, row-major, one per block row.
    BlockJacobi {
        block: usize,
        inv: Vec<f64>,
    },
}

impl Preconditioner {
    pub fn jacobi(a: &CsrMatrix) -> Self {
        Preconditioner::Jacobi(
            a.diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        )
    }

    /// Block Jacobi for `block` = 1 or 2; falls back to Jacobi otherwise.
    pub fn block_jacobi(a: &CsrMatrix, block: usize) -> Self {
        if block == 1 || !a.n.is_multiple_of(block) {
            return Self::jacobi(a);
        }
        if block != 2 {
            return Self::jacobi(a);
        }
        let nb = a.n / 2;
        let mut inv = Vec::with_capacity(4 * nb);
        for b in 0..nb {
            let i = 2 * b;
            let (a00, a01, a10, a11) = (
                a.get(i, i),
                a.get(i, i + 1),
                a.get(i + 1, i),
                a.get(i + 1, i + 1),
            );
            let det = a00 * a11 - a01 * a10;
            if det.abs() > 0.0 {
                inv.extend([a11 / det, -a01 / det, -a10 / det, a00 / det]);
            } else {
                inv.extend([1.0, 0.0, 0.0, 1.0]);
            }
        }
        Preconditioner::BlockJacobi { block: 2, inv }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Identity => z.copy_from_slice(r),
            Preconditioner::Jacobi(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = ri * di;
                }
            }
            Preconditioner::BlockJacobi { inv, .. } => {
                for b in 0..r.len() / 2 {
                    let m = &inv[4 * b..4 * b + 4];
                    let (r0, r1) = (r[2 * b], r[2 * b + 1]);
                    z[2 * b] = m[0] * r0 + m[1] * r1;
                    z[2 * b + 1] = m[2] * r0 + m[3] * r1;
                }
            }
        }
    }
}

/// Orthogonal projection onto the unconstrained subspace, applied blockwise.
///
/// Each block of size `block` carries a symmetric projector; `None` entries
/// are free (identity).
#[derive(Clone, Debug)]
pub struct Constraint {
    pub block: usize,
    pub projectors: Vec<Option<Vec<f64>>>,
}

impl Constraint {
    pub fn none(n_blocks: usize, block: usize) -> Self {
        Self {
            block,
            projectors: vec![None; n_blocks],
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.projectors.iter().all(Option::is_none)
    }

    pub fn apply(&self, x: &mut [f64]) {
        let b = self.block;
        let mut tmp = vec![0.0; b];
        for (k, p) in self.projectors.iter().enumerate() {
            if let Some(p) = p {
                let xs = &mut x[k * b..(k + 1) * b];
                for r in 0..b {
                    tmp[r] = (0..b).map(|c| p[r * b + c] * xs[c]).sum();
                }
                xs.copy_from_slice(&tmp);
            }
        }
    }
}

/// Solver controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `|b - Ax| <= tol |b|`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for a symmetric positive definite
/// operator, restricted to the range of `constraint`.
///
/// On entry `x` holds the initial guess, whose constrained components are
/// kept fixed. The residual of constrained rows is ignored. Reductions run
/// in a fixed order, so results are bitwise reproducible.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    precond: &Preconditioner,
    constraint: Option<&Constraint>,
    opts: CgOptions,
) -> Result<CgOutcome> {
    let n = a.n;
    let project = |v: &mut [f64]| {
        if let Some(c) = constraint {
            c.apply(v);
        }
    };
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    project(&mut r);
    let mut bp = b.to_vec();
    project(&mut bp);
    let b_norm = dot(&bp, &bp).sqrt();
    let mut res = dot(&r, &r).sqrt();
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let mut history = vec![res / scale];
    if res <= opts.tol * scale {
        return Ok(CgOutcome {
            iterations: 0,
            residual: res / scale,
        });
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        project(&mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                iterations: it,
                residual: res / scale,
                history,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        history.push(res / scale);
        if res <= opts.tol * scale {
            return Ok(CgOutcome {
                iterations: it,
                residual: res / scale,
            });
        }
        precond.apply(&r, &mut z);
        project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver {
        iterations: max_iter,
        residual: res / scale,
        history,
    })
}
