"""Planar domains for the singular Lane-Emden-Fowler experiments.

Every domain here is a Lipschitz epigraph {x2 > g(x1)} clipped to a box, a
circular sector, or a disk.  The bumpy curve hangs a family of circular-arc
wedges below the flat line at x1 = 1/i, producing 90-degree interior corners
at the wedge apexes; it drives the boundary-Harnack discontinuity experiment.

All objects are immutable after construction and safe to share across tasks.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "GraphDomain",
    "CylinderSpec",
    "SectorDomain",
    "BumpCurve",
    "DiskDomain",
    "bump_height",
    "bump_overlap_free",
    "circle_signed_distance",
    "cylinder_contains",
]


def bump_half_width(R, i):
    """Half-width of bump i: R - sqrt(R^2 - 1/i^2)."""
    return R - np.sqrt(R * R - 1.0 / (i * i))


def bump_overlap_free(R: float, i_max: int) -> bool:
    """True iff the bump intervals {|x1 - 1/i| <= R - sqrt(R^2 - 1/i^2)} are
    pairwise disjoint over i in {+-1, ..., +-i_max}.

    Brute-force interval check: sort all 2*i_max intervals and require each to
    end before the next begins (touching endpoints allowed, the curve is 0
    there on both sides).
    """
    if R <= 1.0 or i_max < 1:
        raise ValueError("need R > 1 and i_max >= 1")
    ivals = []
    for i in range(1, i_max + 1):
        w = bump_half_width(R, i)
        for c in (1.0 / i, -1.0 / i):
            ivals.append((c - w, c + w))
    ivals.sort()
    for (lo0, hi0), (lo1, _) in zip(ivals, ivals[1:]):
        if hi0 > lo1 + 1e-15:
            return False
    return True


@dataclass(frozen=True)
class BumpCurve:
    """The counterexample boundary curve: flat at height 0 except for circular
    wedges of slope +-1 hanging below, centered at x1 = +-1/i, 1 <= i <= i_max.

    The apex (1/i, g(1/i)) of each bump lies on the circle
    x1^2 + (x2 + R)^2 = R^2; R must be large enough that the bump intervals
    are disjoint (checked at construction).
    """

    R: float
    i_max: int

    def __post_init__(self):
        if not bump_overlap_free(self.R, self.i_max):
            raise ValueError(
                f"bump intervals overlap for R={self.R}, i_max={self.i_max}"
            )

    def height(self, x1):
        return bump_height(self, x1)

    def apexes(self):
        """All apex points (1/i, g(1/i)), i = +-1..+-i_max, sorted by x1."""
        pts = []
        for i in range(1, self.i_max + 1):
            depth = -bump_half_width(self.R, i)
            pts.append((1.0 / i, depth))
            pts.append((-1.0 / i, depth))
        return sorted(pts)


def bump_height(curve: BumpCurve, x1):
    """Piecewise boundary height of the bumpy curve (vectorized).

    Inside bump i the value is |x1 - 1/i| - (R - sqrt(R^2 - 1/i^2)), zero
    outside every bump.  Total on the real line, <= 0 everywhere, Lipschitz
    with constant 1.
    """
    x = np.asarray(x1, dtype=float)
    out = np.zeros_like(x)
    for i in range(1, curve.i_max + 1):
        w = bump_half_width(curve.R, i)
        for c in (1.0 / i, -1.0 / i):
            d = np.abs(x - c)
            mask = d <= w
            if np.any(mask):
                out = np.where(mask, d - w, out)
    if np.isscalar(x1):
        return float(out)
    return out


def circle_signed_distance(X, R: float):
    """Signed distance to the circle x1^2 + (x2 + R)^2 = R^2.

    Positive above the circle (inside the domain), zero on it.  Accepts a
    single point (x1, x2) or an (N, 2) array.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    P = np.asarray(X, dtype=float)
    if P.ndim == 1:
        return float(np.hypot(P[0], P[1] + R) - R)
    return np.hypot(P[:, 0], P[:, 1] + R) - R


@dataclass(frozen=True)
class GraphDomain:
    """Epigraph domain {(x1, x2): x2 > g(x1)} clipped to
    x1 in x_range, x2 < top.

    g must be Lipschitz with the declared constant L; this is verified on a
    dense sample grid at construction (L enters tolerance heuristics and
    reports, so it is supplied, not inferred).
    """

    g: Callable = field(compare=False)
    L: float
    x_range: tuple
    top: float
    _samples: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        x0, x1 = self.x_range
        if not (x1 > x0) or self.L < 0:
            raise ValueError("invalid x_range or Lipschitz bound")
        xs = np.linspace(x0, x1, 4097)
        gs = np.asarray(self.g(xs), dtype=float)
        if gs.shape != xs.shape or not np.all(np.isfinite(gs)):
            raise ValueError("g must be defined and finite on all of x_range")
        dg = np.abs(np.diff(gs))
        dx = np.diff(xs)
        if np.any(dg > self.L * dx * (1.0 + 1e-9) + 1e-14):
            raise ValueError("g violates the declared Lipschitz bound L")
        if np.max(gs) >= self.top:
            raise ValueError("graph reaches the top of the box")
        object.__setattr__(self, "_samples", (xs, gs))

    @staticmethod
    def flat(x_range=(-1.0, 1.0), top=1.0):
        return GraphDomain(g=lambda x: np.zeros_like(np.asarray(x, float)),
                           L=0.0, x_range=x_range, top=top)

    @staticmethod
    def tilted(slope, x_range=(-1.0, 1.0), top=1.0):
        return GraphDomain(g=lambda x: slope * np.asarray(x, float),
                           L=abs(slope), x_range=x_range, top=top)

    @staticmethod
    def from_bump_curve(curve, x_range=(-1.0, 1.0), top=1.0):
        return GraphDomain(g=curve.height, L=1.0, x_range=x_range, top=top)

    @property
    def y_min(self):
        return float(np.min(self._samples[1]))

    def bbox(self):
        return (self.x_range[0], self.y_min, self.x_range[1], self.top)

    def inside(self, x, y):
        """Strict membership (vectorized)."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        gx = np.asarray(self.g(x), float)
        return (y > gx) & (y < self.top) & \
               (x > self.x_range[0]) & (x < self.x_range[1])

    def boundary_distance(self, X):
        """Distance from an interior point to the full boundary (graph sampled
        as a dense polyline plus the three box walls)."""
        px, py = float(X[0]), float(X[1])
        xs, gs = self._samples
        d_walls = min(px - self.x_range[0], self.x_range[1] - px,
                      self.top - py)
        ax, ay = xs[:-1], gs[:-1]
        bx, by = xs[1:], gs[1:]
        ex, ey = bx - ax, by - ay
        t = ((px - ax) * ex + (py - ay) * ey) / (ex * ex + ey * ey)
        t = np.clip(t, 0.0, 1.0)
        d_graph = np.min(np.hypot(px - (ax + t * ex), py - (ay + t * ey)))
        return float(min(d_walls, d_graph))


@dataclass(frozen=True)
class CylinderSpec:
    """Boundary-fitted probe region over a graph: grounded 0<=s<=r,
    doubled |s|<=r, suspended delta*r<=s<=r, with s = x2 - g(x1) and
    |x1 - center| <= r."""

    center_xprime: float
    r: float
    kind: str
    delta: float = 0.1

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("cylinder radius must be positive")
        if not (0.0 < self.delta <= 0.1):
            raise ValueError("delta must lie in (0, 1/10]")
        if self.kind not in ("grounded", "doubled", "suspended"):
            raise ValueError(f"unknown cylinder kind {self.kind!r}")


def cylinder_contains(cyl: CylinderSpec, dom: GraphDomain, X) -> bool:
    """Membership test for a grounded/doubled/suspended cylinder over dom."""
    x, y = float(X[0]), float(X[1])
    if abs(x - cyl.center_xprime) > cyl.r:
        return False
    s = y - float(np.asarray(dom.g(x), float))
    if cyl.kind == "grounded":
        return 0.0 <= s <= cyl.r
    if cyl.kind == "doubled":
        return abs(s) <= cyl.r
    return cyl.delta * cyl.r <= s <= cyl.r


@dataclass(frozen=True)
class SectorDomain:
    """Plane sector {0 < omega < theta, 0 < r < radius}, vertex at the origin."""

    theta: float
    radius: float
    dimension: int = 2

    def __post_init__(self):
        if not (0.0 < self.theta < 2.0 * np.pi):
            raise ValueError("theta must lie in (0, 2*pi)")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dimension != 2:
            raise ValueError("only planar sectors are meshed")


@dataclass(frozen=True)
class DiskDomain:
    """Disk of given radius centered at the origin (Cartesian cut-cell mesh
    target for the ball-based barrier and interior-improvement runs)."""

    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def bbox(self):
        r = self.radius
        return (-r, -r, r, r)

    def inside(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return x * x + y * y < self.radius * self.radius

    def boundary_distance(self, X):
        return float(self.radius - np.hypot(X[0], X[1]))
