"""Finite-difference meshes, the discrete Laplacian, and the linear solver.

Cartesian meshes cover graph epigraphs and disks with boundary-conforming cut
arms: each interior node keeps its four axis arms, and an arm that leaves the
domain is shortened to the boundary crossing (located by bisection on the
membership predicate to ~1e-15 h).  The -Delta stencil folds the boundary
value in by linear extrapolation along each cut arm, which keeps the matrix
exactly symmetric with nonpositive off-diagonals (an M-matrix), so the
discrete comparison principle holds and conjugate gradients applies.  Nodes
whose nearest crossing is closer than fold*h are reclassified as boundary
nodes to keep the arm weights bounded.

Polar meshes are tensor grids on (r_min, radius) x (0, theta) with optional
geometric radial grading (finest at the vertex); the vertex is excised at
r_min = radius (rho-1)/(rho^Nr - 1) and the ring carries Dirichlet data.  The
operator -(1/r)(r u_r)_r - (1/r^2) u_ww is assembled in integrated (control
volume) form with radial coupling r_{i+1/2} dw / dr and angular coupling
ln(r_{i+1/2}/r_{i-1/2}) / dw, which is symmetric by construction; the mass
vector converts between integrated rows and pointwise residuals.

The linear solver is preconditioned conjugate gradients with a
relative-residual stop and a 10n iteration cap, serial and deterministic
(fixed-order numpy reductions).  Jacobi preconditioning is the default;
large systems can attach a Ruge-Stuben AMG hierarchy (pyamg) built once per
operator and reused across Newton systems that share the Laplacian part.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError

__all__ = [
    "Mesh",
    "Field",
    "LinearOperator",
    "build_interval_mesh",
    "build_cartesian_mesh",
    "build_polar_mesh",
    "assemble_laplacian",
    "solve_linear",
    "make_preconditioner",
    "harmonic_solve",
]

FOLD_DEFAULT = 0.05  # nodes closer than fold*h to the boundary are folded


@dataclass
class LinearOperator:
    """-Delta in compressed sparse row form over the interior unknowns, plus
    the coupling B to boundary values: (-Delta_h u)_i ~ (A u + B u_b)_i / m_i.

    Invariants (checked at assembly): A symmetric to 1e-12, positive
    diagonal, nonpositive off-diagonals."""

    A: sp.csr_matrix
    B: sp.csr_matrix
    mass: np.ndarray
    _precond: object = field(default=None, repr=False)
    _precond_kind: str = field(default=None, repr=False)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def indptr(self):
        return self.A.indptr

    @property
    def indices(self):
        return self.A.indices

    @property
    def data(self):
        return self.A.data

    def apply(self, u, u_boundary):
        """Integrated-form action A u + B u_b."""
        return self.A @ u + self.B @ u_boundary

    def pointwise_residual(self, u, u_boundary, rhs_pointwise):
        """(-Delta_h u) - rhs at interior nodes, in pointwise scaling."""
        return self.apply(u, u_boundary) / self.mass - rhs_pointwise

    def preconditioner(self, kind="auto"):
        if self._precond is None or self._precond_kind != kind:
            self._precond = make_preconditioner(self.A, kind=kind)
            self._precond_kind = kind
        return self._precond


def _check_mmatrix(A):
    n = A.shape[0]
    gap = abs(A - A.T).max()
    scale = abs(A).max()
    if gap > 1e-12 * scale:
        raise ValueError(f"operator not symmetric: |A - A^T| = {gap:.3e}")
    d = A.diagonal()
    if np.any(d <= 0):
        raise ValueError("operator has nonpositive diagonal entries")
    off = A - sp.diags(d)
    if off.nnz and off.data.max() > 1e-14 * scale:
        raise ValueError("operator has positive off-diagonal entries "
                         "(M-matrix property violated)")


@dataclass
class Field:
    """Grid function: values at interior nodes and at boundary points."""

    mesh: "Mesh"
    interior: np.ndarray
    boundary: np.ndarray

    @staticmethod
    def zeros(mesh):
        return Field(mesh, np.zeros(mesh.n_interior),
                     np.zeros(mesh.n_boundary))

    @staticmethod
    def from_boundary(mesh, data):
        """Boundary Field from a constant, a callable over xy coordinates, or
        a tag -> (constant | callable) dict; interior values start at 0."""
        vals = mesh.evaluate_on_boundary(data)
        return Field(mesh, np.zeros(mesh.n_interior), vals)

    @staticmethod
    def from_function(mesh, fn):
        """Evaluate fn on interior and boundary coordinates (xy embedding)."""
        return Field(mesh, np.asarray(fn(mesh.xy_interior), float),
                     np.asarray(fn(mesh.xy_boundary), float))

    def copy(self):
        return Field(self.mesh, self.interior.copy(), self.boundary.copy())

    def min(self):
        return min(self.interior.min(initial=np.inf),
                   self.boundary.min(initial=np.inf))

    def max(self):
        return max(self.interior.max(initial=-np.inf),
                   self.boundary.max(initial=-np.inf))

    def to_csv(self, path):
        self.mesh.write_csv(path, self)


class Mesh:
    """Shared container for the three mesh kinds; geometry-specific state is
    attached by the builders.  Immutable after construction (the assembled
    operator is cached)."""

    def __init__(self, kind, dimension, coords, boundary_coords,
                 boundary_tags, nbr, bix, frac, arm_h, mass, meta):
        self.kind = kind
        self.dimension = dimension
        self.coords = coords                  # natural coordinates per node
        self.boundary_coords = boundary_coords
        self.boundary_tags = boundary_tags
        self.nbr = nbr                        # (Ni, arms) interior neighbor
        self.bix = bix                        # (Ni, arms) boundary point
        self.frac = frac                      # (Ni, arms) arm fractions
        self.arm_h = arm_h                    # (Ni, arms) full arm lengths
        self.mass = mass
        self.meta = dict(meta)
        self._op = None

    @property
    def n_interior(self):
        return self.coords.shape[0]

    @property
    def n_boundary(self):
        return self.boundary_coords.shape[0]

    @property
    def interior_index(self):
        return self.meta.get("interior_index")

    @property
    def xy_interior(self):
        if self.kind == "polar":
            r, w = self.coords[:, 0], self.coords[:, 1]
            return np.column_stack([r * np.cos(w), r * np.sin(w)])
        return self.coords

    @property
    def xy_boundary(self):
        if self.kind == "polar":
            r, w = self.boundary_coords[:, 0], self.boundary_coords[:, 1]
            return np.column_stack([r * np.cos(w), r * np.sin(w)])
        return self.boundary_coords

    @property
    def min_spacing(self):
        return self.meta["min_spacing"]

    def operator(self):
        if self._op is None:
            self._op = assemble_laplacian(self)
        return self._op

    def evaluate_on_boundary(self, data):
        xy = self.xy_boundary
        if callable(data):
            return np.asarray(data(xy), float) * np.ones(self.n_boundary)
        if isinstance(data, dict):
            vals = np.zeros(self.n_boundary)
            seen = np.zeros(self.n_boundary, dtype=bool)
            for tag, spec in data.items():
                m = self.boundary_tags == tag
                seen |= m
                if callable(spec):
                    if np.any(m):
                        vals[m] = np.asarray(spec(xy[m]), float)
                else:
                    vals[m] = float(spec)
            missing = sorted(set(self.boundary_tags[~seen]))
            if missing:
                raise ValueError(f"no boundary data for tags {missing}")
            return vals
        return float(data) * np.ones(self.n_boundary)

    # -- sampling -----------------------------------------------------------

    def sample(self, fld, points):
        """Field values at arbitrary interior points (bilinear on Cartesian
        grids, radial-linear on matching polar rays, linear on intervals)."""
        pts = np.atleast_2d(np.asarray(points, float))
        if self.kind == "interval":
            xs = self.coords[:, 0]
            full_x = np.concatenate([self.boundary_coords[:1, 0], xs,
                                     self.boundary_coords[1:, 0]])
            full_v = np.concatenate([fld.boundary[:1], fld.interior,
                                     fld.boundary[1:]])
            order = np.argsort(full_x)
            return np.interp(pts[:, 0], full_x[order], full_v[order])
        if self.kind == "cartesian":
            return self._sample_cartesian(fld, pts)
        return self._sample_polar(fld, pts)

    def _grid_value_table(self, fld):
        key = "_vg_cache"
        cached = self.meta.get(key)
        if cached is not None and cached[0] is fld:
            return cached[1]
        idx = self.meta["interior_index"]
        vg = np.full(idx.shape, np.nan)
        vg[idx >= 0] = fld.interior[idx[idx >= 0]]
        self.meta[key] = (fld, vg)
        return vg

    def _sample_cartesian(self, fld, pts):
        x0, y0, h = self.meta["x_origin"], self.meta["y_origin"], \
            self.meta["h"]
        vg = self._grid_value_table(fld)
        nx, ny = vg.shape
        fx = (pts[:, 0] - x0) / h
        fy = (pts[:, 1] - y0) / h
        ix = np.clip(np.floor(fx).astype(int), 0, nx - 2)
        iy = np.clip(np.floor(fy).astype(int), 0, ny - 2)
        tx = fx - ix
        ty = fy - iy
        corners = np.stack([vg[ix, iy], vg[ix + 1, iy],
                            vg[ix, iy + 1], vg[ix + 1, iy + 1]])
        weights = np.stack([(1 - tx) * (1 - ty), tx * (1 - ty),
                            (1 - tx) * ty, tx * ty])
        ok = np.isfinite(corners)
        weights = np.where(ok, weights, 0.0)
        wsum = weights.sum(axis=0)
        if np.any(wsum == 0):
            raise ValueError("sample point has no interior neighbors")
        return (np.where(ok, corners, 0.0) * weights).sum(axis=0) / wsum

    def _sample_polar(self, fld, pts):
        rr, ww = self.meta["radii"], self.meta["omegas"]
        idx = self.meta["interior_index"]
        out = np.empty(pts.shape[0])
        for k, (r, w) in enumerate(pts):
            j = int(np.argmin(np.abs(ww - w)))
            if abs(ww[j] - w) > 1e-9 * max(1.0, abs(w)):
                raise ValueError("polar sampling requires points on an "
                                 "angular grid line")
            col = idx[:, j]
            good = col >= 0
            rs = rr[good]
            vs = fld.interior[col[good]]
            out[k] = np.interp(r, rs, vs)
        return out

    def sample_ray(self, fld, omega, radii):
        """Values along the angular grid line nearest to omega."""
        pts = np.column_stack([np.asarray(radii, float),
                               np.full(len(radii), omega)])
        return self.sample(fld, pts)

    def sample_column(self, fld, x, ys):
        """Values along the vertical grid column nearest to x (Cartesian)."""
        x0, h = self.meta["x_origin"], self.meta["h"]
        ix = int(round((x - x0) / h))
        vg = self._grid_value_table(fld)
        col = vg[ix]
        y0 = self.meta["y_origin"]
        ygrid = y0 + h * np.arange(col.size)
        good = np.isfinite(col)
        return np.interp(np.asarray(ys, float), ygrid[good], col[good])

    # -- output --------------------------------------------------------------

    def write_csv(self, path, fld):
        if self.kind == "polar":
            header = "r,omega,value"
        elif self.kind == "cartesian":
            header = "x,y,value"
        else:
            header = "x,value"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row, v in zip(self.coords, fld.interior):
                cols = [f"{c:.17g}" for c in row] + [f"{v:.17g}"]
                fh.write(",".join(cols) + "\n")
            for row, v in zip(self.boundary_coords, fld.boundary):
                cols = [f"{c:.17g}" for c in row] + [f"{v:.17g}"]
                fh.write(",".join(cols) + "\n")


# ---------------------------------------------------------------------------
# builders


def grading_for_span(n, span):
    """Step ratio rho such that an n-cell geometric mesh has
    (first cell)/(total length) = 1/span, i.e. (rho^n - 1)/(rho - 1) = span.
    Bisection on the monotone left side; capped at the admissible 1.2."""
    if span <= n:
        return 1.0

    def total(rho):
        if n * np.log(rho) > 690.0:
            return np.inf
        return (rho ** n - 1.0) / (rho - 1.0)

    lo, hi = 1.0 + 1e-12, 1.2
    if total(hi) < span:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) < span:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_interval_mesh(a, b, n, grading=1.0):
    """1D mesh on [a, b] with n cells and Dirichlet ends.

    grading in [1, 1.2] is the ratio of consecutive steps, finest at the left
    endpoint (the zero-data side of the 1D reductions); the assembly is in
    flux form, so the operator stays symmetric on graded grids and boundary
    layers of t^(2/(1+gamma)) profiles can be resolved below any target."""
    if n < 4:
        raise ValueError("need at least 4 cells")
    if not (1.0 <= grading <= 1.2):
        raise ValueError("grading must lie in [1, 1.2]")
    L = b - a
    if grading == 1.0:
        xs_all = a + L * np.arange(n + 1) / n
    else:
        d1 = L * (grading - 1.0) / (grading ** n - 1.0)
        xs_all = a + np.concatenate(
            [[0.0], d1 * np.cumsum(grading ** np.arange(n))])
        xs_all[-1] = b
    xs = xs_all[1:-1]
    ni = n - 1
    coords = xs[:, None]
    boundary_coords = np.array([[a], [b]])
    tags = np.array(["left", "right"], dtype=object)
    nbr = np.full((ni, 2), -1, dtype=np.int64)
    bix = np.full((ni, 2), -1, dtype=np.int64)
    nbr[1:, 0] = np.arange(ni - 1)
    nbr[:-1, 1] = np.arange(1, ni)
    bix[0, 0] = 0
    bix[-1, 1] = 1
    frac = np.ones((ni, 2))
    steps = np.diff(xs_all)                      # step j: x_j -> x_{j+1}
    arm_h = np.column_stack([steps[:-1], steps[1:]])
    mass = 0.5 * (steps[:-1] + steps[1:])
    return Mesh("interval", 1, coords, boundary_coords, tags,
                nbr, bix, frac, arm_h, mass,
                {"h": float(np.max(steps)),
                 "min_spacing": float(np.min(steps)), "x_origin": a,
                 "steps": steps, "interior_index": None})


def _classify_wall(points, meta, default_tag):
    x0, x1 = meta["x_lo"], meta["x_hi"]
    top = meta.get("top")
    tol = 1e-9 * meta["h"]
    tags = np.full(points.shape[0], default_tag, dtype=object)
    tags[np.abs(points[:, 0] - x0) <= tol] = "left"
    tags[np.abs(points[:, 0] - x1) <= tol] = "right"
    if top is not None:
        tags[np.abs(points[:, 1] - top) <= tol] = "top"
    return tags


def build_cartesian_mesh(dom, h, fold=FOLD_DEFAULT):
    """Cut-cell Cartesian mesh over a domain exposing inside(x, y) and
    bbox(); nodes strictly inside become unknowns, boundary crossings are
    located by bisection along grid lines, and nodes with a crossing closer
    than fold*h are folded into the boundary."""
    x_lo, y_lo_raw, x_hi, y_hi = dom.bbox()
    if h >= (y_hi - y_lo_raw) / 16.0:
        raise ValueError("h must resolve the box: h < height/16")
    extent = x_hi - x_lo
    if abs(extent / h - round(extent / h)) > 1e-9:
        raise ValueError("h must divide the bounding box extents")
    # anchor the vertical grid at integer multiples of h so the reference
    # level y = 0 of graph domains is a grid line
    j_lo = int(np.floor(y_lo_raw / h)) - 1
    j_hi = int(np.ceil(y_hi / h + 1e-9)) + 1
    nxg = int(round((x_hi - x_lo) / h)) + 1
    xs = x_lo + h * np.arange(nxg)
    ys = h * np.arange(j_lo, j_hi + 1)
    nyg = ys.size
    Xg, Yg = np.meshgrid(xs, ys, indexing="ij")
    inside = np.asarray(dom.inside(Xg.ravel(), Yg.ravel())).reshape(nxg, nyg)
    if not inside.any():
        raise ValueError("degenerate domain: no interior nodes at this h")

    default_tag = "circle" if hasattr(dom, "radius") else "graph"
    meta_walls = {"x_lo": x_lo, "x_hi": x_hi, "h": h,
                  "top": None if default_tag == "circle" else y_hi}

    # pass 1: provisional fractions on all arms leaving the inside set
    dirs = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
    ii, jj = np.nonzero(inside)

    def arm_fraction(pts, dvec):
        lo = np.zeros(pts.shape[0])
        hi = np.ones(pts.shape[0])
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            q = pts + (mid * h)[:, None] * dvec
            ins = np.asarray(dom.inside(q[:, 0], q[:, 1]))
            lo = np.where(ins, mid, lo)
            hi = np.where(ins, hi, mid)
        return 0.5 * (lo + hi)

    cut_frac = [None] * 4
    cut_sel = [None] * 4
    for a, d in enumerate(dirs):
        ni_, nj_ = ii + d[0], jj + d[1]
        ok = (ni_ >= 0) & (ni_ < nxg) & (nj_ >= 0) & (nj_ < nyg)
        nb_inside = np.zeros(ii.size, dtype=bool)
        nb_inside[ok] = inside[ni_[ok], nj_[ok]]
        sel = ~nb_inside
        pts = np.column_stack([xs[ii[sel]], ys[jj[sel]]])
        f = arm_fraction(pts, d.astype(float))
        f = np.where(f > 1.0 - 1e-12, 1.0, f)
        cut_frac[a] = f
        cut_sel[a] = sel

    min_frac = np.ones(ii.size)
    for a in range(4):
        tmp = np.ones(ii.size)
        tmp[cut_sel[a]] = cut_frac[a]
        min_frac = np.minimum(min_frac, tmp)
    folded = min_frac < fold

    interior = inside.copy()
    interior[ii[folded], jj[folded]] = False
    idx = np.full((nxg, nyg), -1, dtype=np.int64)
    ii2, jj2 = np.nonzero(interior)
    ni = ii2.size
    if ni == 0:
        raise ValueError("degenerate domain: all nodes folded")
    idx[ii2, jj2] = np.arange(ni)
    coords = np.column_stack([xs[ii2], ys[jj2]])

    bp_coords = []
    bp_tags = []
    # folded nodes become boundary points at their own grid position
    fold_map = np.full((nxg, nyg), -1, dtype=np.int64)
    fii, fjj = ii[folded], jj[folded]
    for fi, fj in zip(fii, fjj):
        fold_map[fi, fj] = len(bp_coords)
        bp_coords.append((xs[fi], ys[fj]))
    if bp_coords:
        tags = _classify_wall(np.asarray(bp_coords), meta_walls, default_tag)
        bp_tags.extend(tags.tolist())

    nbr = np.full((ni, 4), -1, dtype=np.int64)
    bix = np.full((ni, 4), -1, dtype=np.int64)
    frac = np.ones((ni, 4))
    for a, d in enumerate(dirs):
        ni_, nj_ = ii2 + d[0], jj2 + d[1]
        ok = (ni_ >= 0) & (ni_ < nxg) & (nj_ >= 0) & (nj_ < nyg)
        nb_idx = np.full(ii2.size, -1, dtype=np.int64)
        nb_idx[ok] = idx[ni_[ok], nj_[ok]]
        nbr[:, a] = nb_idx
        fm = np.full(ii2.size, -1, dtype=np.int64)
        fm[ok] = fold_map[ni_[ok], nj_[ok]]
        to_fold = fm >= 0
        bix[to_fold, a] = fm[to_fold]  # full arm toward a folded node
        need = (nb_idx < 0) & ~to_fold
        if np.any(need):
            pts = np.column_stack([xs[ii2[need]], ys[jj2[need]]])
            f = arm_fraction(pts, d.astype(float))
            f = np.where(f > 1.0 - 1e-12, 1.0, f)
            f = np.maximum(f, fold)  # folding guarantees this; guard anyway
            crossings = pts + (f * h)[:, None] * d.astype(float)
            start = len(bp_coords)
            bp_coords.extend(map(tuple, crossings))
            bp_tags.extend(_classify_wall(crossings, meta_walls,
                                          default_tag).tolist())
            bix[need, a] = start + np.arange(np.count_nonzero(need))
            frac[need, a] = f

    bp_coords = np.asarray(bp_coords, dtype=float).reshape(-1, 2)
    meta = {"h": h, "min_spacing": h, "x_origin": xs[0], "y_origin": ys[0],
            "interior_index": idx, "x_lo": x_lo, "x_hi": x_hi, "top": y_hi,
            "domain": dom}
    return Mesh("cartesian", 2, coords, bp_coords,
                np.asarray(bp_tags, dtype=object), nbr, bix, frac,
                np.full((ni, 4), h), np.ones(ni), meta)


def build_polar_mesh(sec, Nr, Nw, grading=1.0):
    """Tensor-product polar mesh on a sector: radii geometric with the given
    step ratio (finest at the vertex, which is excised at the first node),
    uniform angles.  Dirichlet rows on both rays, the outer arc and the
    vertex ring."""
    if Nr < 8 or Nw < 8:
        raise ValueError("need Nr, Nw >= 8")
    if not (1.0 <= grading <= 1.2):
        raise ValueError("grading must lie in [1, 1.2]")
    theta, radius = sec.theta, sec.radius
    if grading == 1.0:
        rr = radius * np.arange(1, Nr + 1) / Nr
    else:
        d1 = radius * (grading - 1.0) / (grading ** Nr - 1.0)
        rr = d1 * (grading ** np.arange(1, Nr + 1) - 1.0) / (grading - 1.0)
        rr[-1] = radius
    ww = theta * np.arange(Nw + 1) / Nw
    dw = theta / Nw

    idx = np.full((Nr, Nw + 1), -1, dtype=np.int64)
    int_i, int_j = np.meshgrid(np.arange(1, Nr - 1), np.arange(1, Nw),
                               indexing="ij")
    int_i = int_i.ravel()
    int_j = int_j.ravel()
    ni = int_i.size
    idx[int_i, int_j] = np.arange(ni)
    coords = np.column_stack([rr[int_i], ww[int_j]])

    bp_coords = []
    bp_tags = []
    bmap = {}

    def bp_of(i, j):
        key = (i, j)
        if key not in bmap:
            bmap[key] = len(bp_coords)
            bp_coords.append((rr[i], ww[j]))
            if j == 0:
                bp_tags.append("side0")
            elif j == Nw:
                bp_tags.append("side1")
            elif i == 0:
                bp_tags.append("vertex")
            else:
                bp_tags.append("outer")
        return bmap[key]

    nbr = np.full((ni, 4), -1, dtype=np.int64)
    bix = np.full((ni, 4), -1, dtype=np.int64)
    # arm order: r+, r-, w+, w-
    for k in range(ni):
        i, j = int_i[k], int_j[k]
        for a, (di, dj) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
            i2, j2 = i + di, j + dj
            t = idx[i2, j2]
            if t >= 0:
                nbr[k, a] = t
            else:
                bix[k, a] = bp_of(i2, j2)

    r_half_up = 0.5 * (rr[int_i] + rr[int_i + 1])
    r_half_dn = 0.5 * (rr[int_i] + rr[int_i - 1])
    dr_up = rr[int_i + 1] - rr[int_i]
    dr_dn = rr[int_i] - rr[int_i - 1]
    mass = 0.5 * (r_half_up ** 2 - r_half_dn ** 2) * dw
    c_rp = r_half_up * dw / dr_up
    c_rm = r_half_dn * dw / dr_dn
    c_w = np.log(r_half_up / r_half_dn) / dw
    arm_c = np.column_stack([c_rp, c_rm, c_w, c_w])

    meta = {"radii": rr, "omegas": ww, "interior_index": idx,
            "min_spacing": float(np.min(np.diff(np.concatenate([[0.0], rr])))),
            "arm_coeff": arm_c, "sector": sec, "dw": dw}
    bp_coords = np.asarray(bp_coords, dtype=float).reshape(-1, 2)
    return Mesh("polar", 2, coords, bp_coords,
                np.asarray(bp_tags, dtype=object), nbr, bix,
                np.ones((ni, 4)), None, mass, meta)


# ---------------------------------------------------------------------------
# assembly


def assemble_laplacian(mesh) -> LinearOperator:
    """Assemble -Delta (integrated form for polar meshes, pointwise for
    Cartesian and interval meshes) and verify the M-matrix invariants."""
    ni = mesh.n_interior
    arms = mesh.nbr.shape[1]
    if mesh.kind == "polar":
        coeff = mesh.meta["arm_coeff"]
    elif mesh.kind == "interval":
        coeff = 1.0 / mesh.arm_h  # flux form; mass = averaged cell sizes
    else:
        h2 = mesh.meta["h"] ** 2
        coeff = 1.0 / (mesh.frac * h2)
    rows_a, cols_a, vals_a = [], [], []
    rows_b, cols_b, vals_b = [], [], []
    diag = np.zeros(ni)
    all_i = np.arange(ni)
    for a in range(arms):
        c = coeff[:, a]
        diag += c
        m_int = mesh.nbr[:, a] >= 0
        rows_a.append(all_i[m_int])
        cols_a.append(mesh.nbr[m_int, a])
        vals_a.append(-c[m_int])
        m_b = mesh.bix[:, a] >= 0
        rows_b.append(all_i[m_b])
        cols_b.append(mesh.bix[m_b, a])
        vals_b.append(-c[m_b])
    rows_a.append(all_i)
    cols_a.append(all_i)
    vals_a.append(diag)
    A = sp.coo_matrix((np.concatenate(vals_a),
                       (np.concatenate(rows_a), np.concatenate(cols_a))),
                      shape=(ni, ni)).tocsr()
    A = (0.5 * (A + A.T)).tocsr()  # symmetrization flush (kills roundoff)
    B = sp.coo_matrix((np.concatenate(vals_b),
                       (np.concatenate(rows_b), np.concatenate(cols_b))),
                      shape=(ni, mesh.n_boundary)).tocsr()
    _check_mmatrix(A)
    return LinearOperator(A=A, B=B, mass=np.asarray(mesh.mass, float))


# ---------------------------------------------------------------------------
# linear solve


def make_preconditioner(A, kind="auto", amg_threshold=4000):
    """Jacobi for small systems, Ruge-Stuben AMG (pyamg) for large ones."""
    n = A.shape[0]
    if kind == "auto":
        kind = "jacobi" if n <= amg_threshold else "amg"
    if kind == "amg":
        try:
            import pyamg
            ml = pyamg.ruge_stuben_solver(sp.csr_matrix(A), max_coarse=64)
            M = ml.aspreconditioner(cycle="V")
            return lambda r: M.matvec(r)
        except ImportError:
            kind = "jacobi"
    if kind == "jacobi":
        dinv = 1.0 / A.diagonal()
        return lambda r: dinv * r
    if kind == "none" or kind is None:
        return lambda r: r
    raise ValueError(f"unknown preconditioner kind {kind!r}")


def solve_linear(A, rhs, tol=1e-12, M=None, x0=None, max_iter=None):
    """Preconditioned conjugate gradients with relative-residual stop.

    Serial and deterministic: fixed iteration order, numpy dot-product
    reductions.  Raises ConvergenceError past the 10n iteration cap."""
    if isinstance(A, LinearOperator):
        A = A.A
    if not (0.0 < tol <= 1e-6):
        raise ValueError("tol must lie in (0, 1e-6]")
    n = A.shape[0]
    if M is None:
        M = make_preconditioner(A, kind="jacobi")
    b = np.asarray(rhs, float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n)
    x = np.zeros(n) if x0 is None else np.array(x0, float)
    r = b - A @ x
    z = M(r)
    p = z.copy()
    rz = float(r @ z)
    cap = max_iter if max_iter is not None else 10 * n
    for _ in range(cap):
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        z = M(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    if np.linalg.norm(r) <= tol * bnorm:
        return x
    raise ConvergenceError(
        f"CG exceeded {cap} iterations; relative residual "
        f"{np.linalg.norm(r) / bnorm:.3e} > {tol:.1e}")


def harmonic_solve(mesh, boundary, tol=1e-12, precond_kind="auto"):
    """Discrete harmonic replacement: -Delta_h u = 0 with the given boundary
    Field.  The M-matrix structure gives the discrete maximum principle:
    min(data) <= u <= max(data)."""
    op = mesh.operator()
    rhs = -op.B @ boundary.boundary
    u = solve_linear(op.A, rhs, tol=tol,
                     M=op.preconditioner(precond_kind))
    return Field(mesh, u, boundary.boundary.copy())
