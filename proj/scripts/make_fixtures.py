#!/usr/bin/env python3
"""Generate the polygonal mesh fixtures shipped under fixtures/.

Two families on the unit square:
  * voronoi_NNNN.txt    -- centroidal-ish Voronoi tessellations (mirror-clipped,
                           a few Lloyd iterations to avoid sliver edges)
  * nonconvex_NNNN.txt  -- each grid square split by a zigzag polyline into two
                           non-convex octagons (8 distinct edge lines per cell)

File format ("polymesh 1"):
  line 1: polymesh 1
  line 2: <nv> <nc>
  nv lines: x y
  nc lines: <m> i0 i1 ... i(m-1)    (0-based, counter-clockwise)
"""

import numpy as np
from scipy.spatial import Voronoi

VOR_SIZES = [64, 256, 1024, 4096]
NC_SIZES = [4, 8, 16, 32]  # n, giving 2*n^2 cells
SEED = 20240901


def mirrored_voronoi(points):
    """Voronoi diagram of points in [0,1]^2 clipped to the square exactly,
    via reflection of the generators across the four sides."""
    left = points.copy()
    left[:, 0] = -left[:, 0]
    right = points.copy()
    right[:, 0] = 2.0 - right[:, 0]
    down = points.copy()
    down[:, 1] = -down[:, 1]
    up = points.copy()
    up[:, 1] = 2.0 - up[:, 1]
    allpts = np.vstack([points, left, right, down, up])
    vor = Voronoi(allpts)
    cells = []
    for i in range(len(points)):
        region = vor.regions[vor.point_region[i]]
        assert -1 not in region, "unbounded region survived mirroring"
        poly = vor.vertices[region]
        # enforce CCW
        area = 0.5 * np.sum(poly[:, 0] * np.roll(poly[:, 1], -1)
                            - np.roll(poly[:, 0], -1) * poly[:, 1])
        if area < 0:
            region = region[::-1]
        cells.append(list(region))
    return vor.vertices, cells


def polygon_centroid(poly):
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def lloyd(points, iters):
    for _ in range(iters):
        verts, cells = mirrored_voronoi(points)
        points = np.array([polygon_centroid(verts[c]) for c in cells])
    return points


def compact_mesh(verts, cells):
    """Deduplicate vertices (coordinates snapped to 1e-12) and drop unused ones."""
    key_of = {}
    remap = {}
    out_verts = []
    for ci, cell in enumerate(cells):
        for vi in cell:
            if vi in remap:
                continue
            key = (round(verts[vi][0], 12), round(verts[vi][1], 12))
            if key in key_of:
                remap[vi] = key_of[key]
            else:
                key_of[key] = len(out_verts)
                remap[vi] = len(out_verts)
                out_verts.append(verts[vi])
    out_cells = []
    for cell in cells:
        cc = [remap[v] for v in cell]
        # remove repeated consecutive indices (degenerate edges after snapping)
        dedup = [v for j, v in enumerate(cc) if v != cc[(j + 1) % len(cc)]]
        assert len(dedup) >= 3
        out_cells.append(dedup)
    return np.array(out_verts), out_cells


def write_mesh(path, verts, cells):
    with open(path, "w") as fh:
        fh.write("polymesh 1\n")
        fh.write(f"{len(verts)} {len(cells)}\n")
        for v in verts:
            fh.write(f"{v[0]:.17g} {v[1]:.17g}\n")
        for c in cells:
            fh.write(str(len(c)) + " " + " ".join(str(i) for i in c) + "\n")


def check_mesh(verts, cells):
    total = 0.0
    min_edge = 1e30
    for c in cells:
        poly = verts[np.array(c)]
        x, y = poly[:, 0], poly[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        a = 0.5 * np.sum(x * yn - xn * y)
        assert a > 0, "CW or degenerate cell"
        total += a
        el = np.hypot(xn - x, yn - y)
        min_edge = min(min_edge, el.min())
    assert abs(total - 1.0) < 1e-10, f"area {total}"
    return total, min_edge


def on_boundary(p, axis_val, axis):
    return abs(p[axis] - axis_val) < 1e-9


def boundary_sides(p):
    sides = []
    for axis in (0, 1):
        for val in (0.0, 1.0):
            if on_boundary(p, val, axis):
                sides.append((axis, val))
    return sides


def collapse_short_edges(verts, cells, tol):
    """Merge vertex pairs closer than tol. Conformity is preserved because the
    merge is global; boundary vertices stay on their boundary lines."""
    verts = [np.array(v, dtype=float) for v in verts]
    cells = [list(c) for c in cells]
    changed = True
    while changed:
        changed = False
        for c in cells:
            m = len(c)
            for j in range(m):
                a, b = c[j], c[(j + 1) % m]
                if a == b:
                    continue
                pa, pb = verts[a], verts[b]
                if np.hypot(*(pa - pb)) >= tol:
                    continue
                sa, sb = boundary_sides(pa), boundary_sides(pb)
                if len(sa) == 2 and len(sb) == 2:
                    continue  # two distinct corners, never merge
                if len(sa) < len(sb):
                    a, b, pa, pb, sa, sb = b, a, pb, pa, sb, sa
                if len(sa) == len(sb):
                    target = 0.5 * (pa + pb)
                    for axis, val in sa:
                        if (axis, val) in sb:
                            target[axis] = val
                else:
                    target = pa.copy()  # keep the more-constrained vertex
                verts[a] = target
                for cc in cells:
                    for jj, v in enumerate(cc):
                        if v == b:
                            cc[jj] = a
                changed = True
                break
            if changed:
                break
        if changed:
            for ci, cc in enumerate(cells):
                cells[ci] = [v for j, v in enumerate(cc)
                             if v != cc[(j + 1) % len(cc)]]
                assert len(cells[ci]) >= 3
    return np.array(verts), cells


def make_voronoi(nc, seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((nc, 2))
    pts = lloyd(pts, 6)
    verts, cells = mirrored_voronoi(pts)
    verts, cells = compact_mesh(verts, cells)
    # clamp boundary coordinates that mirroring put at +-1e-17 off the square
    verts = np.clip(verts, 0.0, 1.0)
    spacing = 1.0 / np.sqrt(nc)
    verts, cells = collapse_short_edges(verts, cells, 0.12 * spacing)
    verts, cells = compact_mesh(verts, cells)
    return verts, cells


# zigzag polyline through the unit square, from (0,0) to (1,1); both halves
# are simple non-convex octagons whose 8 edges lie on 8 distinct lines
ZIG = [(0.35, 0.15), (0.25, 0.45), (0.60, 0.50), (0.50, 0.80), (0.85, 0.85)]


def make_nonconvex(n):
    verts = []
    index = {}

    def vid(x, y):
        key = (round(x, 12), round(y, 12))
        if key not in index:
            index[key] = len(verts)
            verts.append((x, y))
        return index[key]

    cells = []
    for j in range(n):
        for i in range(n):
            x0, y0 = i / n, j / n
            s = 1.0 / n
            A = vid(x0, y0)
            B = vid(x0 + s, y0)
            C = vid(x0 + s, y0 + s)
            D = vid(x0, y0 + s)
            Z = [vid(x0 + s * zx, y0 + s * zy) for zx, zy in ZIG]
            cells.append([A, B, C] + Z[::-1])          # lower octagon
            cells.append([A] + Z + [C, D])             # upper octagon
    return np.array(verts), cells


def main():
    import os
    out = os.path.join(os.path.dirname(__file__), "..", "fixtures")
    os.makedirs(out, exist_ok=True)
    for idx, nc in enumerate(VOR_SIZES):
        verts, cells = make_voronoi(nc, SEED + idx)
        area, min_edge = check_mesh(verts, cells)
        path = os.path.join(out, f"voronoi_{nc:04d}.txt")
        write_mesh(path, verts, cells)
        print(f"{path}: {len(verts)} verts, {len(cells)} cells, "
              f"area={area:.15f}, min_edge={min_edge:.3e}")
    for n in NC_SIZES:
        verts, cells = make_nonconvex(n)
        area, min_edge = check_mesh(verts, cells)
        path = os.path.join(out, f"nonconvex_{2 * n * n:04d}.txt")
        write_mesh(path, verts, cells)
        print(f"{path}: {len(verts)} verts, {len(cells)} cells, "
              f"area={area:.15f}, min_edge={min_edge:.3e}")


if __name__ == "__main__":
    main()
