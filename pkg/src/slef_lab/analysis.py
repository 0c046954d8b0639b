"""Boundary growth fits, proof-sequence recursions, Harnack-ratio probes,
harmonic-coefficient extraction, and the ratio-discontinuity experiment.

Growth fitting works on ray samples u(t) near a vertex: a pure power
log u = log c + alpha log t, or, with the frequency fixed, a logarithmic
correction log u - phi log t = log c + p log ln(2/t).

Two sequence recursions from the critical-exponent arguments are iterated
verbatim: A_{k+1} = A_k + A_k^-gamma + k^(-gamma phi/2) with phi = 2/(1+gamma)
(its scaled tail A_k k^(-phi/2) stays bounded; for gamma = 1 the continuum
balance c/2 = 1/c + 1 gives the limit c = 1 + sqrt(3)), and the contraction
sequences sigma_{k+1} = (1-q) sigma_k (geometric) or (1 - q/(k+1)) sigma_k,
whose product telescopes to Gamma(k+1-q)/(Gamma(k+1) Gamma(1-q)) ~
k^-q / Gamma(1-q).

The counterexample experiment builds the bumpy-curve domain, solves the pair
(u, v) with the flat/annulus profile boundary data, and records the ratio
u/v along the midline (stays near the slope ratio 2) versus above an interior
bump apex (tends to 1, the 90-degree wedge being subcritical for every
gamma > 0): the separation of the two traces is the discontinuity signal.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError
from .geometry import (
    BumpCurve,
    CylinderSpec,
    GraphDomain,
    SectorDomain,
    bump_half_width,
    circle_signed_distance,
    cylinder_contains,
)
from .mesh import Field, build_cartesian_mesh, build_polar_mesh, solve_linear
from .ode_lab import annulus_min_slope, annulus_profile, flat_profile
from .slef_solver import SleConfig, solve_singular
from .spectral import CRITICAL_BAND_TOL, h_sigma_eval

__all__ = [
    "GrowthFit",
    "RecursionTrace",
    "RatioProbe",
    "CounterexampleReport",
    "fit_growth",
    "ak_recursion",
    "sigma_recursion",
    "interior_improvement",
    "harmonic_coefficient",
    "ratio_probe",
    "counterexample_experiment",
    "critical_source_probe",
]


@dataclass(frozen=True)
class GrowthFit:
    model: str              # "pure" or "log_augmented"
    alpha: float            # power exponent (the fixed phi in log model)
    log_power: float        # p (0 for the pure model)
    coefficient: float
    window: tuple
    rms: float
    n_samples: int


def fit_growth(t, u, model="pure", phi_fixed=None):
    """Least squares on noiseless logs along a ray toward the vertex."""
    t = np.asarray(t, float)
    u = np.asarray(u, float)
    if t.size < 12:
        raise ValueError("need at least 12 samples")
    if np.any(np.diff(t) >= 0):
        raise ValueError("samples must have strictly decreasing t")
    if np.any(u <= 0):
        raise ValueError("growth fits need positive samples")
    if np.log10(t[0] / t[-1]) < 1.5 - 1e-9:
        raise ValueError("fit window must span at least 1.5 decades")
    window = (float(t[-1]), float(t[0]))
    if model == "pure":
        Amat = np.column_stack([np.ones_like(t), np.log(t)])
        coef, *_ = np.linalg.lstsq(Amat, np.log(u), rcond=None)
        resid = np.log(u) - Amat @ coef
        return GrowthFit(model="pure", alpha=float(coef[1]), log_power=0.0,
                         coefficient=float(np.exp(coef[0])), window=window,
                         rms=float(np.sqrt(np.mean(resid**2))),
                         n_samples=t.size)
    if model == "log_augmented":
        if phi_fixed is None:
            raise ValueError("log_augmented model needs phi_fixed")
        y = np.log(u) - phi_fixed * np.log(t)
        x = np.log(np.log(2.0 / t))
        Amat = np.column_stack([np.ones_like(t), x])
        coef, *_ = np.linalg.lstsq(Amat, y, rcond=None)
        resid = y - Amat @ coef
        return GrowthFit(model="log_augmented", alpha=float(phi_fixed),
                         log_power=float(coef[1]),
                         coefficient=float(np.exp(coef[0])), window=window,
                         rms=float(np.sqrt(np.mean(resid**2))),
                         n_samples=t.size)
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True)
class RecursionTrace:
    kind: str
    params: dict
    k: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    scaled: np.ndarray = field(repr=False)
    k_max: int
    sup_scaled: float
    last_scaled: float


def _checkpoints(k_max, n=400):
    ks = np.unique(np.geomspace(1, k_max, n).astype(np.int64))
    return ks


def ak_recursion(gamma, a1, k_max):
    """Iterate A_{k+1} = A_k + A_k^-gamma + k^(-gamma phi/2), phi=2/(1+gamma),
    recording A_k k^(-phi/2): boundedness of this scaled tail is the
    sequence-level content of the critical growth bound."""
    if a1 <= 0 or gamma <= 0:
        raise ValueError("need a1 > 0 and gamma > 0")
    if not (1 <= k_max <= 10**8):
        raise ValueError("k_max out of range")
    phi = 2.0 / (1.0 + gamma)
    expo = -gamma * phi / 2.0
    ks = _checkpoints(k_max)
    vals = np.empty(ks.size)
    A = float(a1)
    nxt = 0
    for k in range(1, k_max + 1):
        if nxt < ks.size and k == ks[nxt]:
            vals[nxt] = A
            nxt += 1
        if k == k_max:
            break
        A += A ** (-gamma) + float(k) ** expo
        if A > 1e300:
            raise OverflowError(f"A_k overflow at k={k}")
    scaled = vals * ks.astype(float) ** (-phi / 2.0)
    return RecursionTrace(kind="ak", params={"gamma": gamma, "a1": a1},
                          k=ks, values=vals, scaled=scaled, k_max=k_max,
                          sup_scaled=float(np.max(scaled)),
                          last_scaled=float(scaled[-1]))


def sigma_recursion(Q, q, mode, k_max):
    """Contraction traces: geometric sigma_{k+1} = (1-q) sigma_k (checked
    against the closed form Q(1-q)^k within a per-step-scaled 1e-14 relative
    tolerance) and harmonic sigma_{k+1} = (1 - q/(k+1)) sigma_k with scaled
    tail sigma_k k^q / Q -> 1/Gamma(1-q)."""
    if not (0.0 < Q <= 1.0):
        raise ValueError("need 0 < Q <= 1")
    if not (0.0 < q < 1.0):
        raise ValueError("need 0 < q < 1")
    if not (1 <= k_max <= 10**8):
        raise ValueError("k_max out of range")
    ks = _checkpoints(k_max)
    if mode == "geometric":
        factors = np.full(k_max, 1.0 - q)
    elif mode == "harmonic":
        factors = 1.0 - q / (np.arange(1, k_max + 1))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    sig = Q * np.cumprod(factors)
    vals = sig[ks - 1]
    if mode == "geometric":
        closed = Q * (1.0 - q) ** ks.astype(float)
        gap = np.abs(vals - closed)
        tol = 1e-14 * ks.astype(float) * np.abs(closed)
        if np.any(gap > np.maximum(tol, 1e-300)):
            raise AssertionError("geometric recursion drifted from the "
                                 "closed form beyond rounding accumulation")
        scaled = vals / closed
    else:
        scaled = vals * ks.astype(float) ** q / Q
    return RecursionTrace(kind=f"sigma_{mode}", params={"Q": Q, "q": q},
                          k=ks, values=vals, scaled=scaled, k_max=k_max,
                          sup_scaled=float(np.max(scaled)),
                          last_scaled=float(scaled[-1]))


def interior_improvement(t, mesh):
    """Interior bend-down of the negative-eigenvalue equation: solve
    -Delta u = -t u with u = 1 on the boundary of the unit disk, in the
    deviation form (A + t M) w = t M 1 with w = 1 - u (avoids cancellation
    as t -> 0), and report (1-u(0))/t plus c_est = min over B_1/2 of w/t."""
    if not (0.0 <= t < 0.5):
        raise ValueError("t must lie in [0, 1/2)")
    op = mesh.operator()
    if t == 0.0:
        w = np.zeros(mesh.n_interior)
    else:
        A = (op.A + sp.diags(t * op.mass)).tocsr()
        w = solve_linear(A, t * op.mass, tol=1e-12,
                         M=op.preconditioner("auto"))
    center = float(mesh.sample(Field(mesh, w, np.zeros(mesh.n_boundary)),
                               np.array([[0.0, 0.0]]))[0])
    r = np.linalg.norm(mesh.xy_interior, axis=1)
    ball = r <= 0.5
    if t == 0.0:
        return {"t": t, "center_improvement": 0.0, "c_est": 0.0}
    return {"t": t, "center_improvement": center / t,
            "c_est": float(np.min(w[ball])) / t}


def harmonic_coefficient(u, mesh, cone, radii, cauchy_tol=1e-3):
    """Harmonic-approximation coefficients of a field near the vertex of a
    polar mesh: for each radius r_k (snapped to the radial grid), replace u
    harmonically inside r < r_k and project onto H = r^phi E(omega) over the
    half-annulus [r_k/2, r_k] in the mesh inner product.

    Returns (A_sequence, A_limit); the limit extrapolates the Cauchy tail
    geometrically when the increments contract, else takes the last value."""
    if mesh.kind != "polar":
        raise ValueError("harmonic_coefficient expects a polar mesh")
    op = mesh.operator()
    rr = mesh.meta["radii"]
    idx = mesh.meta["interior_index"]
    H_int = h_sigma_eval(cone, mesh.xy_interior)
    A_seq = []
    for r_target in radii:
        k_r = int(np.argmin(np.abs(rr - r_target)))
        if k_r < 4:
            raise ValueError(f"radius {r_target} too close to the vertex")
        inner = mesh.coords[:, 0] < rr[k_r] * (1.0 - 1e-12)
        ring = np.abs(mesh.coords[:, 0] - rr[k_r]) <= rr[k_r] * 1e-12
        S = np.nonzero(inner)[0]
        if S.size == 0:
            raise ValueError(f"no interior nodes below radius {r_target}")
        A_SS = op.A[S][:, S]
        rhs = -(op.A[S][:, np.nonzero(ring)[0]]
                @ u.interior[ring]) - op.B[S] @ u.boundary
        h = solve_linear(A_SS.tocsr(), rhs, tol=1e-12)
        band = inner & (mesh.coords[:, 0] >= 0.5 * rr[k_r])
        w = op.mass[band]
        H_band = H_int[band]
        denom = float(np.sum(w * H_band * H_band))
        if denom <= 1e-30 * max(1.0, float(np.max(np.abs(H_band)) ** 2)):
            raise ValueError("projection ill-conditioned: H nearly zero on "
                             "the sample band")
        h_full = np.zeros(mesh.n_interior)
        h_full[S] = h
        A_seq.append(float(np.sum(w * h_full[band] * H_band) / denom))
    A_seq = np.asarray(A_seq)
    gaps = np.diff(A_seq)
    limit = float(A_seq[-1])
    cauchy_ok = bool(A_seq.size >= 2
                     and abs(gaps[-1]) <= cauchy_tol * abs(limit))
    if gaps.size >= 2 and abs(gaps[-2]) > 0:
        rho = gaps[-1] / gaps[-2]
        if 0.0 < abs(rho) < 0.9:
            limit = float(A_seq[-1] + gaps[-1] * rho / (1.0 - rho))
    return A_seq, {"limit": limit, "cauchy_ok": cauchy_ok,
                   "gaps": gaps.tolist()}


@dataclass(frozen=True)
class RatioProbe:
    path_param: np.ndarray = field(repr=False)
    u_vals: np.ndarray = field(repr=False)
    v_vals: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    sup: float
    inf: float
    trend_max_rise: float     # largest relative uptick of |u/v - 1| along
    trend_monotone: bool      # the path toward the boundary
    c_sup: float = np.nan
    c_inf: float = np.nan


def ratio_probe(u, v, path, param=None, region=None, domain=None,
                R=None, gamma=None):
    """Sample u/v along a path and bound it over a region.

    region is a CylinderSpec over `domain` (defaults to all interior nodes);
    when R and gamma are given, the empirical constants of the two-sided
    bound C^-1 R^b/||v|| <= u/v <= C ||u||/R^b (b = 2/(1+gamma)) are reported
    (never asserted)."""
    mesh = u.mesh
    if mesh is not v.mesh:
        raise ValueError("fields live on different meshes")
    path = np.atleast_2d(np.asarray(path, float))
    uu = mesh.sample(u, path)
    vv = mesh.sample(v, path)
    if np.any(vv <= 0):
        raise ValueError("v must be positive along the path")
    if region is not None:
        if domain is None:
            raise ValueError("a cylinder region needs its graph domain")
        sel = np.array([cylinder_contains(region, domain, p)
                        for p in mesh.xy_interior])
    else:
        sel = np.ones(mesh.n_interior, dtype=bool)
    if np.any(v.interior[sel] <= 0):
        raise ValueError("v must be positive on the probed region")
    ratios_region = u.interior[sel] / v.interior[sel]
    sup, inf = float(np.max(ratios_region)), float(np.min(ratios_region))
    ratio = uu / vv
    dev = np.abs(ratio - 1.0)
    rises = np.diff(dev)  # path ordered from deep to shallow (t decreasing)
    max_rise = float(np.max(rises / np.maximum(dev[:-1], 1e-300),
                            initial=0.0))
    c_sup = c_inf = np.nan
    if R is not None and gamma is not None:
        b = 2.0 / (1.0 + gamma)
        c_sup = sup * R ** b / float(np.max(u.interior[sel]))
        c_inf = R ** b / (float(np.max(v.interior[sel])) * inf)
    return RatioProbe(
        path_param=np.asarray(param if param is not None
                              else np.arange(len(path)), float),
        u_vals=uu, v_vals=vv, ratio=ratio, sup=sup, inf=inf,
        trend_max_rise=max_rise,
        trend_monotone=bool(np.all(rises <= 1e-12)),
        c_sup=float(c_sup), c_inf=float(c_inf))


@dataclass
class CounterexampleReport:
    params: dict
    margin_u: float           # min over nodes of u - phi  (want >= -1e-10)
    margin_v: float           # min over nodes of psi - v  (want >= -1e-10)
    mid_depths: np.ndarray
    mid_ratio: np.ndarray
    apex_depths: np.ndarray
    apex_ratio: np.ndarray
    separation: float         # midline ratio at 2^-6 minus apex ratio at
    mid_ref: float            # the reference depths below
    apex_ref: float
    solver_info: dict

    def summary_lines(self):
        return [
            f"margin_u: {self.margin_u:.6e}",
            f"margin_v: {self.margin_v:.6e}",
            f"mid_ratio_ref: {self.mid_ref:.6f}",
            f"apex_ratio_ref: {self.apex_ref:.6f}",
            f"separation: {self.separation:.6f}",
        ]


def counterexample_experiment(R=2.0, i_max=8, gamma=0.5, k=2.0, h=2.0**-9,
                              apex_index=2, eps_min=None, check_slope=False,
                              newton_tol=1e-10):
    """Ratio-discontinuity experiment over the bumpy curve.

    u carries the flat-profile data phi(x2) (slope 2k, zero below the flat
    level) on the whole boundary; v carries 0 on the curve and the annulus
    profile psi(signed circle distance, slope k) on the walls.  Then u >= phi
    and v <= psi nodewise by comparison, the midline ratio u/v at depth t
    stays near phi/psi -> 2, and above an interior bump apex (default
    x1 = 1/2) the 90-degree wedge is subcritical so u/v -> 1.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("the construction needs gamma in (0, 1)")
    curve = BumpCurve(R=R, i_max=i_max)
    if apex_index < 2 or apex_index > i_max:
        raise ValueError("apex_index must name an interior bump (>= 2)")
    w_min = bump_half_width(R, i_max)
    resolved = h <= 0.5 * w_min
    dom = GraphDomain.from_bump_curve(curve)
    d_max = float(np.hypot(1.0, 1.0 + R) - R)
    if check_slope:
        k_min = annulus_min_slope(gamma, R, 1.02 * d_max)
        if k < 1.02 * k_min:
            raise ValueError(f"slope k={k} too small; need > {1.02 * k_min}")
    psi = annulus_profile(gamma, R, k, t_max=1.02 * d_max)  # raises if dead
    phi = flat_profile(gamma, 2.0 * k, t_max=1.0)           # raises if dead

    def phi_data(p):
        return phi.eval(np.clip(p[:, 1], 0.0, 1.0))

    def psi_data(p):
        return psi.eval(np.clip(circle_signed_distance(p, R), 0.0, None))

    mesh = build_cartesian_mesh(dom, h)
    cfg = SleConfig(gamma=gamma, f=1.0, eps0=0.25, eps_factor=0.25,
                    eps_min=eps_min, polish_to_zero=True,
                    newton_tol=newton_tol)
    u, rep_u = solve_singular(mesh, cfg, Field.from_boundary(mesh, phi_data))
    v_data = {"graph": 0.0, "left": psi_data, "right": psi_data,
              "top": psi_data}
    v, rep_v = solve_singular(mesh, cfg, Field.from_boundary(mesh, v_data))

    phi_nodes = phi.eval(np.clip(mesh.coords[:, 1], 0.0, 1.0))
    psi_nodes = psi.eval(np.clip(
        circle_signed_distance(mesh.coords, R), 0.0, None))
    margin_u = float(np.min(u.interior - phi_nodes))
    margin_v = float(np.min(psi_nodes - v.interior))

    mid_depths = 2.0 ** -np.arange(3, int(round(-np.log2(h))))
    mid_u = mesh.sample_column(u, 0.0, mid_depths)
    mid_v = mesh.sample_column(v, 0.0, mid_depths)
    mid_ratio = mid_u / mid_v

    xa = 1.0 / apex_index
    ya = float(curve.height(xa))
    apex_depths = mid_depths[mid_depths <= 0.25 * bump_half_width(
        R, apex_index) * 2.0]
    if apex_depths.size == 0:
        apex_depths = np.array([2.0 ** -8])
    av_u = mesh.sample_column(u, xa, ya + apex_depths)
    av_v = mesh.sample_column(v, xa, ya + apex_depths)
    apex_ratio = av_u / av_v

    mid_ref = float(np.interp(2.0 ** -6, mid_depths[::-1], mid_ratio[::-1]))
    apex_ref = float(np.interp(2.0 ** -8, apex_depths[::-1],
                               apex_ratio[::-1]))
    return CounterexampleReport(
        params={"R": R, "i_max": i_max, "gamma": gamma, "k": k, "h": h,
                "apex_index": apex_index, "resolved": resolved,
                "d_max": d_max},
        margin_u=margin_u, margin_v=margin_v,
        mid_depths=mid_depths, mid_ratio=mid_ratio,
        apex_depths=apex_depths, apex_ratio=apex_ratio,
        separation=mid_ref - apex_ref, mid_ref=mid_ref, apex_ref=apex_ref,
        solver_info={"u_levels": len(rep_u.eps_schedule),
                     "v_levels": len(rep_v.eps_schedule),
                     "u_monotone": rep_u.monotone_in_eps,
                     "v_monotone": rep_v.monotone_in_eps,
                     "u_subsolution": rep_u.subsolution_ok,
                     "v_subsolution": rep_v.subsolution_ok})


def critical_source_probe(theta, gamma, caps, Nr=160, Nw=96, grading=1.06,
                          radius=1.0):
    """Solvability probe for -Delta w = min(H^-gamma, M), zero data, on the
    sector of opening theta: reports sup w_M per cap M.  A flattening trend
    is evidence the uncapped problem is solvable, a divergent trend evidence
    it is not.  Exploratory: nothing asserted.  gamma = 0 degenerates to the
    torsion problem.  Slit-like sectors (theta near 2 pi, gamma beyond ~2.2)
    mesh poorly; results there carry a documented quality caveat."""
    from .spectral import classify, sector_frequency
    caps = sorted(float(M) for M in caps)
    if any(M <= 0 for M in caps):
        raise ValueError("caps must be positive")
    sec = SectorDomain(theta=theta, radius=radius)
    mesh = build_polar_mesh(sec, Nr, Nw, grading)
    op = mesh.operator()
    cone = sector_frequency(theta)
    if gamma > 0:
        label = classify(cone, gamma, tol=1e-6).label
        if label != "critical":
            raise ValueError(f"({theta}, {gamma}) is {label}, not critical")
        H = h_sigma_eval(cone, mesh.xy_interior)
        source_full = H ** (-gamma)
    else:
        source_full = np.ones(mesh.n_interior)
    sups = []
    M_pre = op.preconditioner("auto")
    for M in caps:
        rhs = op.mass * np.minimum(source_full, M)
        w = solve_linear(op.A, rhs, tol=1e-10, M=M_pre)
        sups.append(float(np.max(w)))
    sups = np.asarray(sups)
    growth = sups[1:] / sups[:-1] - 1.0
    return {"theta": theta, "gamma": gamma, "caps": np.asarray(caps),
            "sup_w": sups, "rel_growth": growth,
            "saturating": bool(growth.size and growth[-1] < 0.01),
            "quality_caveat": bool(gamma > 2.2 or theta > 1.9 * np.pi)}
