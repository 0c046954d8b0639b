"""One-dimensional reductions of -Delta u = u^-gamma: closed-form and
shooting oracles.

Flat boundary: u(0) = 0, u'' = -u^-gamma.  Multiplying by u' gives a first
integral; with v(s) = |u'| as a function of the height s,

    gamma < 1:  v(s)^2 = K^2 - 2 s^(1-gamma)/(1-gamma),   u'(0) = K > 0
    gamma = 1:  v(s)^2 = C - 2 ln s
    gamma > 1:  v(s)^2 = C + 2 s^(1-gamma)/(gamma-1)

so t = F(u) = int_0^u ds/v(s), inverted by monotone interpolation.  When the
radicand vanishes at a peak height the profile lives on [0, 2T*] with the
reflection u(t) = u(2T* - t); for gamma > 1, C >= 0 it is global.  Near the
origin for gamma > 1, u = A t^(2/(1+gamma)) + o(...) with
A = ((1+gamma)^2 / (2(gamma-1)))^(1/(1+gamma)) (positive-root form).

Annulus: u(X) = u(|X|-r) above an inner circle of radius r satisfies
u'' + (n-1)/(r+t) u' = -u^-gamma; with u(0)=0, u'(0)=k this is integrated by
RK4 after a series start over the singular first step (gamma < 1 only, since
the stated initial slope is infinite otherwise).

Sector: inserting u = r^beta w(omega) with beta = 2/(1+gamma) into the PDE in
polar 2D gives Delta(r^beta w) = r^(beta-2) (w'' + beta^2 w), so the angular
profile solves w'' + beta^2 w = -w^-gamma, w(0) = w(theta) = 0.  Shooting on
s = w'(0) and recording the first stationary angle omega_peak(s) (the profile
is even about its peak) decides existence: omega_peak increases from 0 toward
the linear-limit value pi(1+gamma)/4, so a positive symmetric profile exists
iff theta < (1+gamma) pi / 2.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "ODEProfile",
    "ProfileLifeError",
    "AngularResult",
    "flat_profile",
    "flat_peak_value",
    "annulus_profile",
    "annulus_min_slope",
    "angular_profile",
    "angular_threshold",
    "critical_log_profile_check",
]

# 16-point Gauss-Legendre rule on [0, 1]
_GX, _GW = np.polynomial.legendre.leggauss(16)
_GX = 0.5 * (_GX + 1.0)
_GW = 0.5 * _GW


class ProfileLifeError(RuntimeError):
    """A profile hit zero (or its life ended) before the requested range."""

    def __init__(self, msg, t_hit=None):
        super().__init__(msg)
        self.t_hit = t_hit


@dataclass(frozen=True)
class ODEProfile:
    """A computed 1D profile with samples on a geometric grid and a fast,
    accurate evaluator (monotone cubic on a dense internal table)."""

    kind: str
    gamma: float
    beta: float
    params: dict
    t: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    t_star: float          # peak location (inf when the profile is global)
    t_end: float           # end of the validity interval
    _eval: object = field(repr=False, compare=False)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-12) or np.any(t > self.t_end * (1.0 + 1e-12)):
            raise ValueError(
                f"evaluation outside validity interval [0, {self.t_end}]")
        return self._eval(np.clip(t, 0.0, self.t_end))

    def __call__(self, t):
        return self.eval(t)


def flat_peak_value(gamma, param):
    """Peak height of the flat profile, or inf for global-life branches."""
    if gamma < 1.0:
        K = param
        return ((1.0 - gamma) * K * K / 2.0) ** (1.0 / (1.0 - gamma))
    if gamma == 1.0:
        return np.exp(param / 2.0)
    if param >= 0.0:
        return np.inf
    return (2.0 / ((gamma - 1.0) * (-param))) ** (1.0 / (gamma - 1.0))


def _flat_speed(gamma, param):
    """v(s) = |u'| as a function of height s (vectorized).

    Finite-life branches are evaluated in peak-relative form via expm1 so the
    radicand does not cancel catastrophically near the peak: e.g. for
    gamma < 1, v^2 = (2/(1-gamma)) (peak^(1-gamma) - s^(1-gamma))
                = (2/(1-gamma)) peak^(1-gamma) (-expm1((1-gamma) ln(s/peak))).
    """
    peak = flat_peak_value(gamma, param)
    if gamma < 1.0:
        c = 2.0 / (1.0 - gamma) * peak ** (1.0 - gamma)  # = K^2

        def v(s):
            with np.errstate(divide="ignore"):
                rad = c * (-np.expm1((1.0 - gamma) * np.log(s / peak)))
            return np.sqrt(np.clip(rad, 0.0, None))
    elif gamma == 1.0:

        def v(s):
            return np.sqrt(np.clip(-2.0 * np.log(s / peak), 0.0, None))
    elif param < 0.0:

        def v(s):
            rad = (2.0 / (gamma - 1.0)) * s ** (1.0 - gamma) \
                * (-np.expm1((gamma - 1.0) * np.log(s / peak)))
            return np.sqrt(np.clip(rad, 0.0, None))
    else:
        C = param

        def v(s):
            return np.sqrt(C + 2.0 * s ** (1.0 - gamma) / (gamma - 1.0))
    return v


def _gauss_pieces(fn, edges):
    """Composite 16-point Gauss of fn over consecutive [edges] intervals;
    returns the per-interval integrals (vectorized over all pieces)."""
    a = edges[:-1]
    w = np.diff(edges)
    nodes = a[:, None] + np.outer(w, _GX)
    vals = fn(nodes.ravel()).reshape(nodes.shape)
    return (vals @ _GW) * w


def _flat_time_table(gamma, param, u_top):
    """Heights s_j (geometric) and times t_j = F(s_j) = int_0^{s_j} ds/v."""
    v = _flat_speed(gamma, param)
    peak = flat_peak_value(gamma, param)
    # region A: geometric heights up to u_a, plain integrand
    u_a = min(u_top, 0.75 * peak) if np.isfinite(peak) else u_top
    s_min = u_a * 1e-12
    n_a = 1400
    sA = s_min * (u_a / s_min) ** (np.linspace(0.0, 1.0, n_a))
    tA = np.concatenate([[0.0], np.cumsum(_gauss_pieces(lambda s: 1.0 / v(s),
                                                        sA))])
    # analytic bound for the missing [0, s_min] sliver (below table accuracy)
    if gamma < 1.0:
        t0 = s_min / param
    elif gamma == 1.0:
        t0 = s_min / np.sqrt(param - 2.0 * np.log(s_min))
    else:
        t0 = np.sqrt((gamma - 1.0) / 2.0) * s_min ** ((gamma + 1.0) / 2.0) \
            * 2.0 / (gamma + 1.0)
    heights = np.concatenate([[0.0], sA]).tolist()
    times = np.concatenate([[0.0], tA + t0]).tolist()
    if np.isfinite(peak) and u_top > u_a:
        # region B: substitute s = peak - tau^2; integrand 2 tau / v smooth
        tau_hi = np.sqrt(peak - u_a)
        tau_lo = np.sqrt(max(peak - u_top, 0.0))
        taus = np.linspace(tau_hi, tau_lo, 600)
        # reversed orientation via q = -tau, so the factor 2 tau = -2 q
        incs = _gauss_pieces(lambda q: -2.0 * q / v(peak - q * q), -taus)
        sB = peak - taus[1:] ** 2
        tB = times[-1] + np.cumsum(incs)
        heights.extend(sB.tolist())
        times.extend(tB.tolist())
    return np.asarray(heights), np.asarray(times), peak


def _flat_evaluator(heights, times, v, t_star):
    """Evaluate u(t) by vectorized bisection on the height table: the table
    brackets every query and F is refreshed with a 16-point Gauss piece from
    the bracket's left edge, so the inversion is accurate to rounding (the
    profile value near the peak is resolved to absolute, not relative,
    precision since u flattens quadratically there)."""

    def F_local(j, u):
        a = heights[j]
        w = u - a
        nodes = a[:, None] + w[:, None] * _GX[None, :]
        with np.errstate(divide="ignore"):
            vals = 1.0 / v(nodes.ravel())
        vals = vals.reshape(nodes.shape)
        return times[j] + (vals @ _GW) * w

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        shape = t.shape
        tq = np.atleast_1d(t).ravel().astype(float)
        if np.isfinite(t_star):
            tq = t_star - np.abs(t_star - tq)
            tq = np.clip(tq, 0.0, t_star)
        inverse = None
        if tq.size > 4096:
            # grid-sampled queries repeat heavily; invert unique values only
            tq, inverse = np.unique(tq, return_inverse=True)
        j = np.searchsorted(times, tq, side="right") - 1
        j = np.clip(j, 0, len(times) - 2)
        lo = heights[j].copy()
        hi = heights[j + 1].copy()
        for _ in range(55):
            mid = 0.5 * (lo + hi)
            above = F_local(j, mid) > tq
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        out = 0.5 * (lo + hi)
        if inverse is not None:
            out = out[inverse]
        if shape == ():
            return float(out[0])
        return out.reshape(shape)

    return evaluator


def flat_profile(gamma, param, t_max, n_samples=400) -> ODEProfile:
    """Flat-boundary profile u with u(0) = 0.

    param is K = u'(0) > 0 for gamma < 1 and the first-integral constant C
    for gamma >= 1 (C < 0 gives a finite-life arch, C >= 0 a global profile,
    gamma = 1 is always finite-life).  Finite-life profiles are reflected past
    the peak, u(t) = u(2T* - t), and t_max beyond 2T* is an error.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if gamma < 1.0 and param <= 0:
        raise ValueError("need K > 0 for gamma < 1")
    if gamma == 1.0 and param <= 2.0 * np.log(1e-300):
        raise ValueError("C too negative")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    peak = flat_peak_value(gamma, param)
    if np.isfinite(peak):
        heights, times, peak = _flat_time_table(gamma, param, peak)
        t_star = times[-1]
        t_end = 2.0 * t_star
        if t_max > t_end * (1.0 + 1e-9):
            raise ProfileLifeError(
                f"t_max={t_max} beyond the profile life 2T*={t_end}",
                t_hit=t_end)
        t_end = max(t_end, t_max)
    else:
        # global branch: build the table high enough to cover t_max
        u_top = max(1.0, param) if gamma < 1 else 1.0
        while True:
            heights, times, _ = _flat_time_table(gamma, param, u_top)
            if times[-1] >= t_max * 1.0000001:
                break
            u_top *= 4.0
        t_star = np.inf
        t_end = t_max
    evaluator = _flat_evaluator(np.asarray(heights), np.asarray(times),
                                _flat_speed(gamma, param), t_star)
    ts = np.geomspace(t_max * 1e-6, t_max, n_samples)
    return ODEProfile(kind="flat", gamma=gamma,
                      beta=2.0 / (1.0 + gamma),
                      params={"param": param, "t_max": t_max},
                      t=ts, u=evaluator(ts),
                      t_star=t_star, t_end=t_end, _eval=evaluator)


def _annulus_rhs(t, y, gamma, r, n):
    u, du = y
    with np.errstate(invalid="ignore"):
        return np.array([du, -u ** (-gamma) - (n - 1.0) / (r + t) * du])


def _graded_steps(t0, t_max, h_uniform, ratio=1.04):
    """Step sizes growing geometrically from ~t0*ratio up to h_uniform, then
    uniform.  Keeps the RK4 local error ~ (delta*t)^5 * u^(5) bounded near
    the singular endpoint where u^(5) ~ t^(-gamma-3)."""
    steps = []
    t = t0
    dt = t0 * (ratio - 1.0)
    while dt < h_uniform and t < t_max:
        dt_eff = min(dt, t_max - t)
        steps.append(dt_eff)
        t += dt_eff
        dt *= ratio
    while t < t_max - 1e-15 * t_max:
        dt_eff = min(h_uniform, t_max - t)
        steps.append(dt_eff)
        t += dt_eff
    return steps


def annulus_profile(gamma, inner_radius, slope_k, t_max,
                    n_steps=20000, n_samples=400) -> ODEProfile:
    """Rotationally symmetric profile above an inner circle:
    u'' + (n-1)/(r+t) u' = -u^-gamma, u(0) = 0, u'(0) = k, n = 2.

    The RHS is singular at t = 0; integration starts from the series
    u = k t - k^-gamma t^(2-gamma)/((1-gamma)(2-gamma)) - (n-1) k t^2/(2r)
    at t0 = 1e-9 t_max and the RK4 steps grow geometrically out of the
    singular layer before switching to a uniform step.  Requires gamma < 1
    (otherwise no profile with finite initial slope exists).  Raises
    ProfileLifeError with the hitting time if u reaches zero before t_max.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("annulus zero-data profiles need gamma in (0, 1)")
    if inner_radius <= 0 or slope_k <= 0:
        raise ValueError("need inner_radius > 0 and slope_k > 0")
    n = 2
    r, k = inner_radius, slope_k
    h = t_max / n_steps
    t0 = 1e-9 * t_max
    u0 = (k * t0 - k ** (-gamma) * t0 ** (2.0 - gamma)
          / ((1.0 - gamma) * (2.0 - gamma)) - (n - 1) * k * t0 * t0 / (2 * r))
    du0 = (k - k ** (-gamma) * t0 ** (1.0 - gamma) / (1.0 - gamma)
           - (n - 1) * k * t0 / r)
    ts = [0.0, t0]
    us = [0.0, u0]
    y = np.array([u0, du0])
    t = t0
    for step in _graded_steps(t0, t_max, h):
        k1 = _annulus_rhs(t, y, gamma, r, n)
        k2 = _annulus_rhs(t + 0.5 * step, y + 0.5 * step * k1, gamma, r, n)
        k3 = _annulus_rhs(t + 0.5 * step, y + 0.5 * step * k2, gamma, r, n)
        k4 = _annulus_rhs(t + step, y + step * k3, gamma, r, n)
        y_new = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(y_new[0]) or y_new[0] <= 0.0:
            if np.isfinite(y_new[0]):
                frac = us[-1] / max(us[-1] - y_new[0], 1e-300)
            else:
                frac = 0.5
            raise ProfileLifeError(
                f"annulus profile hits zero near t={t + frac * step:.6g} "
                f"(before t_max={t_max})", t_hit=t + frac * step)
        t += step
        y = y_new
        ts.append(t)
        us.append(y[0])
    ts = np.asarray(ts)
    us = np.asarray(us)
    pchip = PchipInterpolator(ts, us, extrapolate=False)

    def evaluator(q):
        return pchip(q)

    ipk = int(np.argmax(us))
    t_star = ts[ipk] if 0 < ipk < len(ts) - 1 else np.inf
    samp = np.geomspace(t_max * 1e-6, t_max, n_samples)
    return ODEProfile(kind="annulus", gamma=gamma,
                      beta=2.0 / (1.0 + gamma),
                      params={"inner_radius": r, "slope_k": k,
                              "t_max": t_max},
                      t=samp, u=evaluator(samp),
                      t_star=t_star, t_end=t_max, _eval=evaluator)


def annulus_min_slope(gamma, inner_radius, t_target, tol=1e-3):
    """Smallest initial slope keeping the annulus profile positive on
    (0, t_target], located by bisection (mirrors 'choose K large enough')."""

    def alive(k):
        try:
            annulus_profile(gamma, inner_radius, k, t_target, n_steps=4000)
            return True
        except ProfileLifeError:
            return False

    lo, hi = 1e-3, 1.0
    while not alive(hi):
        lo = hi
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("no surviving slope found")
    while alive(lo) and lo > 1e-12:
        hi = lo
        lo *= 0.5
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if alive(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# angular profile in a sector


@dataclass(frozen=True)
class AngularResult:
    """Outcome of the angular shooting: status is 'exists', 'nonexistence'
    (numerical certificate: the shooting map plateaus below theta/2) or
    'inconclusive' (bracket anomaly)."""

    status: str
    profile: object        # ODEProfile or None
    s_star: float          # matched slope (nan unless exists)
    omega_peak_cap: float  # largest first-stationary angle seen


def _omega_peak(gamma, beta, s, n_steps=3000):
    """First angle where w' = 0 for the IVP w(0)=0, w'(0)=s (gamma < 1).

    Integration never needs to pass the peak: w'' + beta^2 w = -w^-gamma < 0
    forces a peak strictly before the linear quarter-period pi/(2 beta).
    Steps grow geometrically out of the singular layer at omega = 0.
    """
    omega_lim = 0.5 * np.pi / beta
    d0 = 1e-9 * omega_lim
    w = (s * d0 - s ** (-gamma) * d0 ** (2.0 - gamma)
         / ((1.0 - gamma) * (2.0 - gamma)))
    dw = s - s ** (-gamma) * d0 ** (1.0 - gamma) / (1.0 - gamma)
    if w <= 0.0 or dw <= 0.0:
        return None, None, None  # slope too small to leave the singular layer
    y = np.array([w, dw])
    h = omega_lim / n_steps
    om = d0
    path_o = [om]
    path_w = [y[0]]

    def rhs(y):
        return np.array([y[1], -beta * beta * y[0] - y[0] ** (-gamma)])

    for step in _graded_steps(d0, 1.05 * omega_lim, h):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * step * k1)
        k3 = rhs(y + 0.5 * step * k2)
        k4 = rhs(y + step * k3)
        y_new = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if y_new[0] <= 0.0:
            return None, None, None  # fell back to zero without a clean peak
        if y_new[1] <= 0.0:
            # refine the crossing of w' inside [om, om+step] by bisection
            lo, hi, ylo = 0.0, step, y
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                sub = mid - lo
                k1m = rhs(ylo)
                k2m = rhs(ylo + 0.5 * sub * k1m)
                k3m = rhs(ylo + 0.5 * sub * k2m)
                k4m = rhs(ylo + sub * k3m)
                ym = ylo + (sub / 6.0) * (k1m + 2 * k2m + 2 * k3m + k4m)
                if ym[1] <= 0.0:
                    hi = mid
                else:
                    lo, ylo = mid, ym
            om_peak = om + 0.5 * (lo + hi)
            path_o.append(om_peak)
            path_w.append(ylo[0])
            return om_peak, np.asarray(path_o), np.asarray(path_w)
        om += step
        y = y_new
        path_o.append(om)
        path_w.append(y[0])
    return None, None, None


def angular_profile(gamma, theta, n_shoot=80) -> AngularResult:
    """Positive symmetric solution of w'' + beta^2 w = -w^-gamma on (0, theta)
    with w(0) = w(theta) = 0, by bisection on the initial slope.

    gamma must lie in (0, 1): only then is w'(0) finite.  Bracket expansion
    is capped at 60 doublings; a plateau of omega_peak below theta/2 is
    reported as (numerically certified) nonexistence.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("angular slope-shooting needs gamma in (0, 1)")
    if not (0.0 < theta < 2.0 * np.pi):
        raise ValueError("theta must lie in (0, 2*pi)")
    beta = 2.0 / (1.0 + gamma)
    target = 0.5 * theta

    def peak_of(s):
        om, _, _ = _omega_peak(gamma, beta, s)
        return om if om is not None else 0.0

    s_lo, s_hi = 0.5, 1.0
    p_hi = peak_of(s_hi)
    doublings = 0
    while p_hi < target:
        p_prev = p_hi
        s_hi *= 2.0
        p_hi = peak_of(s_hi)
        doublings += 1
        if doublings > 60:
            if p_hi >= p_prev - 1e-12 and p_hi < target:
                return AngularResult("nonexistence", None, np.nan, p_hi)
            return AngularResult("inconclusive", None, np.nan, p_hi)
        if p_hi < p_prev - 1e-9:
            return AngularResult("inconclusive", None, np.nan, p_hi)
    while peak_of(s_lo) > target and s_lo > 1e-300:
        s_lo *= 0.5
    for _ in range(n_shoot):
        mid = np.sqrt(s_lo * s_hi)
        if peak_of(mid) < target:
            s_lo = mid
        else:
            s_hi = mid
        if s_hi - s_lo <= 1e-13 * s_hi:
            break
    s_star = 0.5 * (s_lo + s_hi)
    om_pk, path_o, path_w = _omega_peak(gamma, beta, s_star, n_steps=6000)
    if om_pk is None:
        return AngularResult("inconclusive", None, np.nan, 0.0)
    # mirror about the peak to build the symmetric profile on (0, theta)
    scale = target / om_pk  # tiny residual mismatch absorbed by rescaling omega
    o_half = np.concatenate([[0.0], path_o * scale])
    w_half = np.concatenate([[0.0], path_w])
    o_full = np.concatenate([o_half, theta - o_half[-2::-1]])
    w_full = np.concatenate([w_half, w_half[-2::-1]])
    o_full, idx = np.unique(o_full, return_index=True)
    w_full = w_full[idx]
    lin = PchipInterpolator(o_full, w_full, extrapolate=False)
    m = 401
    samp_o = np.linspace(0.0, theta, m)
    profile = ODEProfile(kind="angular", gamma=gamma, beta=beta,
                         params={"theta": theta, "slope": s_star},
                         t=samp_o, u=lin(samp_o),
                         t_star=target, t_end=theta, _eval=lin)
    return AngularResult("exists", profile, s_star, om_pk)


def angular_threshold(gamma, lo, hi, tol=5e-3):
    """Bisect the existence flag of angular_profile over theta in [lo, hi]."""
    st_lo = angular_profile(gamma, lo).status
    st_hi = angular_profile(gamma, hi).status
    if st_lo != "exists" or st_hi == "exists":
        raise ValueError("bracket does not straddle the threshold")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if angular_profile(gamma, mid).status == "exists":
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# gamma = 1 logarithmic profile


def _log_profile_second_derivative(t):
    """(t sqrt(ln(1/t)))'' from the closed-form identity
    (t sqrt(ln 1/t))'' = -(1/2 + 1/(4 ln(1/t))) / (t sqrt(ln 1/t))."""
    ell = np.log(1.0 / t)
    return -(0.5 + 0.25 / ell) / (t * np.sqrt(ell))


def critical_log_profile_check(A_values, t_window=(1e-4, 0.1), n_pts=200):
    """Classify A * t * sqrt(ln(1/t)) as sub/super-solution of -u'' = u^-1
    on the window, via the closed-form identity (gamma = 1).

    residual(t) = v'' + v^-1 with v = A t sqrt(ln 1/t); sub-solution needs
    residual >= 0 on the window, super-solution residual <= 0.  Also reports
    the crossover interval of A (endpoints where each classification is lost)
    and a finite-difference cross-check of the identity at t = 0.01.
    """
    t = np.geomspace(t_window[0], t_window[1], n_pts)
    y = t * np.sqrt(np.log(1.0 / t))
    ypp = _log_profile_second_derivative(t)
    results = {}
    for A in A_values:
        resid = A * ypp + 1.0 / (A * y)
        if np.min(resid) >= 0.0:
            label = "sub"
        elif np.max(resid) <= 0.0:
            label = "super"
        else:
            label = "mixed"
        results[A] = (label, float(np.min(resid)), float(np.max(resid)))
    # residual >= 0 iff A^2 <= 1/(1/2 + 1/(4 ln(1/t))): the bound is smallest
    # at the window top and largest at the window bottom (-> 2 as t -> 0)
    ell_top = np.log(1.0 / t_window[1])
    ell_bot = np.log(1.0 / t_window[0])
    a_sub_max = np.sqrt(1.0 / (0.5 + 0.25 / ell_top))
    a_super_min = np.sqrt(1.0 / (0.5 + 0.25 / ell_bot))
    # finite-difference cross-check of the printed identity
    tc, hfd = 0.01, 1e-5
    fd = ((tc + hfd) * np.sqrt(np.log(1.0 / (tc + hfd)))
          - 2.0 * tc * np.sqrt(np.log(1.0 / tc))
          + (tc - hfd) * np.sqrt(np.log(1.0 / (tc - hfd)))) / (hfd * hfd)
    identity_rel_err = abs(fd - _log_profile_second_derivative(tc)) \
        / abs(_log_profile_second_derivative(tc))
    return {
        "classifications": results,
        "crossover": (float(a_sub_max), float(a_super_min)),
        "identity_rel_err": float(identity_rel_err),
        "window": t_window,
    }
