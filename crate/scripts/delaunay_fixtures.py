"""Nonuniform Delaunay meshes of (-0.5, 1) x (0, 1), periodic in y.

Nodes form a jittered hexagonal lattice. The bottom and top rows share x
coordinates so they can be identified; the left and right columns are
straight and
uniformly spaced, which keeps the angles opposite boundary edges acute.
Output is the idpmesh text format.

    python3 scripts/delaunay_fixtures.py crates/core/tests/fixtures
"""

import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

X0, X1, Y0, Y1 = -0.5, 1.0, 0.0, 1.0


def build(nx, ny, seed, jitter=0.12):
    rng = np.random.default_rng(seed)
    hx = (X1 - X0) / (nx - 1)
    hy = (Y1 - Y0) / (ny - 1)
    pts, bottom, top = [], [], []
    for j in range(ny):
        y = Y0 + j * hy
        edge_row = j in (0, ny - 1)
        shift = 0.0 if edge_row or j % 2 == 0 else 0.5 * hx
        xs = [X0 + i * hx + shift for i in range(nx)]
        if shift:
            xs = [X0] + xs[:-1] + [X1]
        for i, x in enumerate(xs):
            on_side = i == 0 or i == len(xs) - 1
            px, py = x, y
            if not (on_side or edge_row):
                px += jitter * hx * rng.uniform(-1, 1)
                py += jitter * hy * rng.uniform(-1, 1)
            if j == 0:
                bottom.append(len(pts))
            if j == ny - 1:
                top.append(len(pts))
            pts.append((px, py))
    pts = np.array(pts)
    tri = Delaunay(pts)
    cells = []
    for s in tri.simplices:
        a, b, c = pts[s]
        area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        if abs(area) < 1e-14:
            continue
        cells.append(s if area > 0 else s[[0, 2, 1]])
    return pts, cells, list(zip(bottom, top))


def write(path, pts, cells, pairs):
    with open(path, "w") as f:
        f.write(f"idpmesh 2 {len(pts)} {len(cells)}\n")
        for x, y in pts:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        for c in cells:
            f.write(f"{c[0]} {c[1]} {c[2]}\n")
        f.write("boundary\n")
        for a, b in pairs:
            f.write(f"{a} periodic {b}\n")


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    out.mkdir(parents=True, exist_ok=True)
    for name, nx, ny, seed in [("shock_coarse", 81, 56, 1), ("shock_fine", 162, 109, 2)]:
        pts, cells, pairs = build(nx, ny, seed)
        write(out / f"{name}.msh", pts, cells, pairs)
        print(f"{name}: {len(pts)} nodes, {len(pts) - len(pairs)} dofs, {len(cells)} cells")


if __name__ == "__main__":
    main()
