//! Simplicial meshes, their degree-of-freedom graph and the plain-text mesh
//! file format.
//!
//! File layout (ASCII, whitespace separated):
//!
//! ```text
//! idpmesh <dim> <n_nodes> <n_cells>
//! <x> [<y>]                      # n_nodes lines
//! <i> <j> [<k>]                  # n_cells lines, 0-based node indices
//! boundary                       # optional section
//! <node_id> <tag> [<partner>]    # tag: dirichlet | slip | noslip | periodic
//! ```
//!
//! Periodic partners are identified into a single degree of freedom when the
//! topology is built; every discrete operator lives on degrees of freedom.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Boundary condition carried by a boundary degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// All conserved quantities prescribed.
    Dirichlet,
    /// Zero normal velocity.
    Slip,
    /// Zero velocity.
    NoSlip,
}

impl BoundaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryKind::Dirichlet => "dirichlet",
            BoundaryKind::Slip => "slip",
            BoundaryKind::NoSlip => "noslip",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dirichlet" => Some(BoundaryKind::Dirichlet),
            "slip" => Some(BoundaryKind::Slip),
            "noslip" | "no-slip" | "wall" => Some(BoundaryKind::NoSlip),
            _ => None,
        }
    }
}

/// Side of an axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Diagonal orientation of structured triangulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalPattern {
    /// Every quad split along the same diagonal.
    Uniform,
    /// Diagonal direction alternates in a checkerboard.
    Alternating,
}

/// Parameters of the built-in mesh generators.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Uniform1d {
        a: f64,
        b: f64,
        n: usize,
    },
    StructuredTri2d {
        x: (f64, f64),
        y: (f64, f64),
        nx: usize,
        ny: usize,
        pattern: DiagonalPattern,
        periodic_y: bool,
    },
}

/// Compressed row storage of the stencil graph. Every row contains its
/// diagonal and columns are sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsityGraph {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    /// Position of the mirrored entry `(j, i)` for each stored `(i, j)`.
    pub transpose: Vec<usize>,
    /// Position of the diagonal entry of each row.
    pub diag: Vec<usize>,
}

impl SparsityGraph {
    fn from_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let n = adj.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut row in adj {
            row.sort_unstable();
            row.dedup();
            cols.extend(row);
            row_ptr.push(cols.len());
        }
        let mut g = SparsityGraph {
            row_ptr,
            cols,
            transpose: Vec::new(),
            diag: vec![0; n],
        };
        let mut transpose = vec![usize::MAX; g.cols.len()];
        for i in 0..n {
            for k in g.row(i) {
                let j = g.cols[k];
                if j == i {
                    g.diag[i] = k;
                }
                transpose[k] = g.find(j, i).expect("stencil adjacency must be symmetric");
            }
        }
        g.transpose = transpose;
        g
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Storage position of `(i, j)`, if `j` is in the stencil of `i`.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row(i);
        self.cols[r.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| r.start + k)
    }

    /// The stencil `I(i)` including `i` itself.
    pub fn stencil(&self, i: usize) -> &[usize] {
        &self.cols[self.row(i)]
    }
}

/// Nodes, simplicial cells, degrees of freedom and boundary information.
#[derive(Clone, Debug)]
pub struct MeshTopology<const D: usize> {
    coords: Vec<[f64; D]>,
    /// Flat cell connectivity, `D + 1` node indices per cell.
    cells: Vec<usize>,
    node_to_dof: Vec<usize>,
    /// Representative node of each degree of freedom.
    dof_to_node: Vec<usize>,
    periodic_partner: Vec<Option<usize>>,
    graph: SparsityGraph,
    on_boundary: Vec<bool>,
    boundary_kind: Vec<Option<BoundaryKind>>,
}

impl<const D: usize> MeshTopology<D> {
    /// Build a topology from raw nodes and cells.
    ///
    /// `periodic` lists node pairs to identify; it must be an involution.
    pub fn from_parts(
        coords: Vec<[f64; D]>,
        cells: Vec<usize>,
        periodic: &[(usize, usize)],
    ) -> Result<Self> {
        assert!(D == 1 || D == 2, "only 1D and 2D meshes are supported");
        let nv = D + 1;
        let n = coords.len();
        if n == 0 || cells.is_empty() || !cells.len().is_multiple_of(nv) {
            return Err(Error::Mesh("mesh has no cells".into()));
        }
        for (k, cell) in cells.chunks(nv).enumerate() {
            for (a, &i) in cell.iter().enumerate() {
                if i >= n {
                    return Err(Error::Mesh(format!("cell {k} references missing node {i}")));
                }
                if cell[..a].contains(&i) {
                    return Err(Error::Mesh(format!("cell {k} repeats node {i}")));
                }
            }
        }
        let mut used = vec![false; n];
        for &i in &cells {
            used[i] = true;
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!("node {i} referenced by no cell")));
        }

        let mut partner = vec![None; n];
        for &(a, b) in periodic {
            if a >= n || b >= n || a == b {
                return Err(Error::Mesh(format!("invalid periodic pair ({a}, {b})")));
            }
            for (x, y) in [(a, b), (b, a)] {
                match partner[x] {
                    None => partner[x] = Some(y),
                    Some(p) if p == y => {}
                    Some(p) => {
                        return Err(Error::Mesh(format!(
                            "node {x} has two periodic partners ({p} and {y})"
                        )))
                    }
                }
            }
        }

        // Identify periodic partners; chains (corners) collapse transitively.
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], mut i: usize) -> usize {
            while root[i] != i {
                root[i] = root[root[i]];
                i = root[i];
            }
            i
        }
        for (a, p) in partner.iter().enumerate() {
            if let Some(b) = *p {
                let (ra, rb) = (find(&mut root, a), find(&mut root, b));
                if ra != rb {
                    root[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut node_to_dof = vec![usize::MAX; n];
        let mut dof_to_node = Vec::new();
        for i in 0..n {
            let r = find(&mut root, i);
            if node_to_dof[r] == usize::MAX {
                node_to_dof[r] = dof_to_node.len();
                dof_to_node.push(r);
            }
            node_to_dof[i] = node_to_dof[r];
        }
        let ndof = dof_to_node.len();

        let mut adj: Vec<Vec<usize>> = (0..ndof).map(|i| vec![i]).collect();
        let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
        for (k, cell) in cells.chunks(nv).enumerate() {
            let dofs: Vec<usize> = cell.iter().map(|&i| node_to_dof[i]).collect();
            for (a, &da) in dofs.iter().enumerate() {
                if dofs[..a].contains(&da) {
                    return Err(Error::Mesh(format!(
                        "cell {k} collapses under periodic identification"
                    )));
                }
                for &db in &dofs {
                    adj[da].push(db);
                }
            }
            for skip in 0..nv {
                let mut f: Vec<usize> = (0..nv).filter(|&a| a != skip).map(|a| dofs[a]).collect();
                f.sort_unstable();
                *facets.entry(f).or_insert(0) += 1;
            }
        }
        let mut on_boundary = vec![false; ndof];
        for (f, count) in &facets {
            if *count > 2 {
                return Err(Error::Mesh(format!(
                    "non-conforming mesh: facet {f:?} shared by {count} cells"
                )));
            }
            if *count == 1 {
                for &d in f {
                    on_boundary[d] = true;
                }
            }
        }

        let mesh = MeshTopology {
            coords,
            cells,
            node_to_dof,
            dof_to_node,
            periodic_partner: partner,
            graph: SparsityGraph::from_adjacency(adj),
            on_boundary,
            boundary_kind: vec![None; ndof],
        };
        mesh.check_geometry()?;
        Ok(mesh)
    }

    /// Duplicate nodes and hanging nodes on boundary facets.
    fn check_geometry(&self) -> Result<()> {
        let (lo, hi) = self.bounding_box();
        let diam = (0..D).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt();
        if !(diam > 0.0) {
            return Err(Error::Mesh("degenerate bounding box".into()));
        }
        let tol = 1e-12 * diam;
        let h = (diam / (self.coords.len() as f64).powf(1.0 / D as f64)).max(tol);
        let key = |x: &[f64; D]| -> [i64; D] {
            let mut k = [0i64; D];
            for a in 0..D {
                k[a] = ((x[a] - lo[a]) / h).floor() as i64;
            }
            k
        };
        let mut buckets: HashMap<[i64; D], Vec<usize>> = HashMap::new();
        for (i, x) in self.coords.iter().enumerate() {
            buckets.entry(key(x)).or_default().push(i);
        }
        let neighbors = |k: [i64; D]| {
            let mut out = Vec::new();
            let span = 3usize.pow(D as u32);
            for code in 0..span {
                let mut kk = k;
                let mut c = code;
                for a in 0..D {
                    kk[a] += (c % 3) as i64 - 1;
                    c /= 3;
                }
                out.push(kk);
            }
            out
        };
        for (i, x) in self.coords.iter().enumerate() {
            for kk in neighbors(key(x)) {
                if let Some(list) = buckets.get(&kk) {
                    for &j in list {
                        if j > i && dist(x, &self.coords[j]) <= tol {
                            return Err(Error::Mesh(format!(
                                "duplicate nodes {i} and {j} within {tol:e}"
                            )));
                        }
                    }
                }
            }
        }
        if D == 2 {
            // A node lying strictly inside a boundary edge is a hanging node.
            let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
            for cell in self.cells.chunks(3) {
                for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                    let e = (cell[a].min(cell[b]), cell[a].max(cell[b]));
                    *edges.entry(e).or_insert(0) += 1;
                }
            }
            for (&(a, b), &count) in &edges {
                if count != 1 {
                    continue;
                }
                let (pa, pb) = (self.coords[a], self.coords[b]);
                let len = dist(&pa, &pb);
                let steps = (len / h).ceil() as usize + 1;
                let mut seen = Vec::new();
                for s in 0..=steps {
                    let t = s as f64 / steps as f64;
                    let mut p = [0.0; D];
                    for k in 0..D {
                        p[k] = pa[k] + t * (pb[k] - pa[k]);
                    }
                    for kk in neighbors(key(&p)) {
                        if let Some(list) = buckets.get(&kk) {
                            for &c in list {
                                if c == a || c == b || seen.contains(&c) {
                                    continue;
                                }
                                seen.push(c);
                                let pc = self.coords[c];
                                let cross = (pb[0] - pa[0]) * (pc[1] - pa[1])
                                    - (pb[1 % D] - pa[1 % D]) * (pc[0] - pa[0]);
                                let along = ((pc[0] - pa[0]) * (pb[0] - pa[0])
                                    + (pc[1 % D] - pa[1 % D]) * (pb[1 % D] - pa[1 % D]))
                                    / (len * len);
                                if cross.abs() <= tol * len && along > 1e-9 && along < 1.0 - 1e-9 {
                                    return Err(Error::Mesh(format!(
                                        "non-conforming mesh: node {c} hangs on edge ({a}, {b})"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        D
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (D + 1)
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_to_node.len()
    }

    pub fn coords(&self) -> &[[f64; D]] {
        &self.coords
    }

    /// Node indices of cell `k`.
    pub fn cell(&self, k: usize) -> &[usize] {
        &self.cells[k * (D + 1)..(k + 1) * (D + 1)]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(D + 1)
    }

    pub fn node_to_dof(&self) -> &[usize] {
        &self.node_to_dof
    }

    /// Coordinates of the representative node of a degree of freedom.
    pub fn dof_coord(&self, i: usize) -> [f64; D] {
        self.coords[self.dof_to_node[i]]
    }

    pub fn graph(&self) -> &SparsityGraph {
        &self.graph
    }

    /// Stencil `I(i)`: the dof itself and every dof sharing a cell with it.
    pub fn stencil(&self, i: usize) -> &[usize] {
        self.graph.stencil(i)
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.on_boundary[i]
    }

    pub fn boundary_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dofs()).filter(|&i| self.on_boundary[i])
    }

    pub fn interior_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dofs()).filter(|&i| !self.on_boundary[i])
    }

    /// Boundary condition of a boundary dof; untagged boundary dofs are walls.
    pub fn boundary_kind(&self, i: usize) -> Option<BoundaryKind> {
        if !self.on_boundary[i] {
            return None;
        }
        Some(self.boundary_kind[i].unwrap_or(BoundaryKind::NoSlip))
    }

    pub fn periodic_partner(&self, node: usize) -> Option<usize> {
        self.periodic_partner[node]
    }

    /// Tag every boundary dof for which `rule` returns a kind.
    pub fn assign_boundary(&mut self, rule: impl Fn(&[f64; D]) -> Option<BoundaryKind>) {
        for i in 0..self.n_dofs() {
            if !self.on_boundary[i] {
                continue;
            }
            // A merged periodic dof is tagged if any of its nodes matches.
            let kind = self
                .node_to_dof
                .iter()
                .enumerate()
                .filter(|&(_, &d)| d == i)
                .find_map(|(node, _)| rule(&self.coords[node]));
            if kind.is_some() {
                self.boundary_kind[i] = kind;
            }
        }
    }

    /// Tag the boundary dofs lying on one side of the bounding box.
    pub fn assign_side(&mut self, side: Side, kind: BoundaryKind) {
        let (lo, hi) = self.bounding_box();
        let diam = (0..D).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        let tol = 1e-10 * diam;
        let axis_val = match side {
            Side::Left => (0, lo[0]),
            Side::Right => (0, hi[0]),
            Side::Bottom => (1.min(D - 1), lo[1.min(D - 1)]),
            Side::Top => (1.min(D - 1), hi[1.min(D - 1)]),
        };
        if D == 1 && matches!(side, Side::Bottom | Side::Top) {
            return;
        }
        self.assign_boundary(|x| ((x[axis_val.0] - axis_val.1).abs() <= tol).then_some(kind));
    }

    pub fn bounding_box(&self) -> ([f64; D], [f64; D]) {
        let mut lo = [f64::INFINITY; D];
        let mut hi = [f64::NEG_INFINITY; D];
        for x in &self.coords {
            for k in 0..D {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
        (lo, hi)
    }

    /// Plain-text serialization in the `idpmesh` format.
    pub fn to_idpmesh(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "idpmesh {} {} {}", D, self.n_nodes(), self.n_cells());
        for x in &self.coords {
            let parts: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", parts.join(" "));
        }
        for cell in self.cells() {
            let parts: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", parts.join(" "));
        }
        let mut lines = Vec::new();
        for node in 0..self.n_nodes() {
            let dof = self.node_to_dof[node];
            if let Some(kind) = self.boundary_kind[dof] {
                if self.on_boundary[dof] {
                    lines.push(format!("{node} {}", kind.as_str()));
                }
            }
            if let Some(p) = self.periodic_partner[node] {
                if node < p {
                    lines.push(format!("{node} periodic {p}"));
                }
            }
        }
        if !lines.is_empty() {
            out.push_str("boundary\n");
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_idpmesh()).map_err(|e| Error::io(path, e))
    }

    /// Parse the `idpmesh` format. The header dimension must equal `D`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, msg: &str| Error::Mesh(format!("line {line}: {msg}"));
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::Mesh("empty mesh file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "idpmesh" {
            return Err(bad(
                ln,
                "expected header `idpmesh <dim> <n_nodes> <n_cells>`",
            ));
        }
        let parse_usize = |line: usize, s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(line, &format!("expected a non-negative integer, got `{s}`")))
        };
        let dim = parse_usize(ln, h[1])?;
        if dim != D {
            return Err(bad(
                ln,
                &format!("mesh dimension {dim} does not match expected {D}"),
            ));
        }
        let n_nodes = parse_usize(ln, h[2])?;
        let n_cells = parse_usize(ln, h[3])?;
        let mut coords = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| Error::Mesh("truncated node list".into()))?;
            let vals: Vec<&str> = l.split_whitespace().collect();
            if vals.len() != D {
                return Err(bad(ln, &format!("expected {D} coordinates")));
            }
            let mut x = [0.0; D];
            for k in 0..D {
                x[k] = vals[k]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(ln, &format!("bad coordinate `{}`", vals[k])))?;
            }
            coords.push(x);
        }
        let mut cells = Vec::with_capacity(n_cells * (D + 1));
        for _ in 0..n_cells {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| Error::Mesh("truncated cell list".into()))?;
            let vals: Vec<&str> = l.split_whitespace().collect();
            if vals.len() != D + 1 {
                return Err(bad(ln, &format!("expected {} node indices", D + 1)));
            }
            for v in vals {
                cells.push(parse_usize(ln, v)?);
            }
        }
        let mut tags = Vec::new();
        let mut periodic = Vec::new();
        if let Some((ln, l)) = lines.next() {
            if l != "boundary" {
                return Err(bad(ln, "expected `boundary` section or end of file"));
            }
            for (ln, l) in lines {
                let vals: Vec<&str> = l.split_whitespace().collect();
                if vals.len() < 2 {
                    return Err(bad(ln, "expected `<node_id> <tag>`"));
                }
                let node = parse_usize(ln, vals[0])?;
                if node >= n_nodes {
                    return Err(bad(ln, &format!("unknown node {node}")));
                }
                if vals[1] == "periodic" {
                    let p = vals
                        .get(2)
                        .ok_or_else(|| bad(ln, "periodic tag needs a partner node"))?;
                    periodic.push((node, parse_usize(ln, p)?));
                } else {
                    let kind = BoundaryKind::parse(vals[1])
                        .ok_or_else(|| bad(ln, &format!("unknown boundary tag `{}`", vals[1])))?;
                    tags.push((node, kind));
                }
            }
        }
        let mut mesh = Self::from_parts(coords, cells, &periodic)?;
        for (node, kind) in tags {
            let dof = mesh.node_to_dof[node];
            if !mesh.on_boundary[dof] {
                return Err(Error::Mesh(format!("boundary tag on interior node {node}")));
            }
            mesh.boundary_kind[dof] = Some(kind);
        }
        Ok(mesh)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    (0..D).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

/// Header dimension of a mesh file, for dispatching on `D`.
pub fn peek_dimension(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .ok_or_else(|| Error::Mesh("empty mesh file".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    match (h.first(), h.get(1).and_then(|d| d.parse::<usize>().ok())) {
        (Some(&"idpmesh"), Some(d)) if d == 1 || d == 2 => Ok(d),
        _ => Err(Error::Mesh(format!("{}: bad header", path.display()))),
    }
}

/// `n` equispaced nodes on `[a, b]`.
pub fn uniform_1d(a: f64, b: f64, n: usize) -> Result<MeshTopology<1>> {
    if n < 2 || !(b > a) {
        return Err(Error::Config(format!(
            "uniform_1d needs n >= 2 and a < b, got n = {n}, [{a}, {b}]"
        )));
    }
    let h = (b - a) / (n - 1) as f64;
    let coords = (0..n)
        .map(|i| [if i == n - 1 { b } else { a + h * i as f64 }])
        .collect();
    let cells = (0..n - 1).flat_map(|i| [i, i + 1]).collect();
    MeshTopology::from_parts(coords, cells, &[])
}

/// Structured triangulation of a box with `nx * ny` quads, two triangles each.
pub fn structured_tri_2d(
    x: (f64, f64),
    y: (f64, f64),
    nx: usize,
    ny: usize,
    pattern: DiagonalPattern,
    periodic_y: bool,
) -> Result<MeshTopology<2>> {
    if nx == 0 || ny == 0 || !(x.1 > x.0) || !(y.1 > y.0) {
        return Err(Error::Config(format!(
            "structured_tri_2d needs nx, ny >= 1 and a non-degenerate box, got {nx} x {ny}"
        )));
    }
    if periodic_y && ny < 2 {
        return Err(Error::Config(
            "periodic structured mesh needs ny >= 2".into(),
        ));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let px = if i == nx {
                x.1
            } else {
                x.0 + (x.1 - x.0) * i as f64 / nx as f64
            };
            let py = if j == ny {
                y.1
            } else {
                y.0 + (y.1 - y.0) * j as f64 / ny as f64
            };
            coords.push([px, py]);
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let flip = pattern == DiagonalPattern::Alternating && (i + j) % 2 == 1;
            if flip {
                cells.extend([a, b, d, b, c, d]);
            } else {
                cells.extend([a, b, c, a, c, d]);
            }
        }
    }
    let periodic: Vec<(usize, usize)> = if periodic_y {
        (0..=nx).map(|i| (id(i, 0), id(i, ny))).collect()
    } else {
        Vec::new()
    };
    MeshTopology::from_parts(coords, cells, &periodic)
}

/// Dispatch a 1D mesh spec.
pub fn generate_1d(spec: &MeshSpec) -> Result<MeshTopology<1>> {
    match *spec {
        MeshSpec::Uniform1d { a, b, n } => uniform_1d(a, b, n),
        _ => Err(Error::Config("mesh spec is not one-dimensional".into())),
    }
}

/// Dispatch a 2D mesh spec.
pub fn generate_2d(spec: &MeshSpec) -> Result<MeshTopology<2>> {
    match *spec {
        MeshSpec::StructuredTri2d {
            x,
            y,
            nx,
            ny,
            pattern,
            periodic_y,
        } => structured_tri_2d(x, y, nx, ny, pattern, periodic_y),
        _ => Err(Error::Config("mesh spec is not two-dimensional".into())),
    }
}
