"""First Dirichlet eigenvalues and minimal frequencies of spherical domains.

A spherical domain Sigma in S^(n-1) carries a first eigenvalue lambda and a
frequency phi solving phi*(n + phi - 2) = lambda; r^phi * E(angle) is then a
positive harmonic on the cone over Sigma.  Two shapes are supported:

  * n=2 arcs of opening theta: lambda = (pi/theta)^2, E = sin(pi*omega/theta);
  * n=3 axisymmetric caps of polar angle alpha: lambda is the smallest
    eigenvalue of -(sin s * E')' = lambda * sin s * E on (0, alpha) with
    E(alpha) = 0 and regularity at the pole.

The cap eigenvalue is computed twice, by finite differences (flux form,
reduced to a symmetric tridiagonal problem) and by shooting (series start at
the pole + RK4 + bisection on lambda), so each route checks the other.

The criticality of a pair (Sigma, gamma) compares 2/(1+gamma) with phi.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError

__all__ = [
    "ConeSpec",
    "CriticalityClass",
    "sector_frequency",
    "cap_frequency",
    "cap_frequency_shooting",
    "classify",
    "h_sigma_eval",
    "CRITICAL_BAND_TOL",
]

# width of the numerically-declared critical band; the trichotomy is exact in
# the continuum, so this must be explicit and tiny
CRITICAL_BAND_TOL = 1e-9


@dataclass(frozen=True)
class ConeSpec:
    """A spherical domain with its eigenvalue, frequency and eigenfunction
    samples (normalized so max E = 1, E >= 0, E = 0 at the Dirichlet end)."""

    dimension: int
    shape: str              # "arc" or "cap"
    param: float            # theta for arcs, alpha for caps
    lambda_sigma: float
    phi_sigma: float
    angles: np.ndarray = field(repr=False, compare=False)
    values: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        n, phi, lam = self.dimension, self.phi_sigma, self.lambda_sigma
        if phi <= 0 or abs(phi * (n + phi - 2.0) - lam) > 1e-10 * max(1.0, lam):
            raise ValueError("phi does not solve phi*(n+phi-2) = lambda")
        v = np.asarray(self.values)
        if abs(np.max(v) - 1.0) > 1e-10 or np.min(v) < -1e-12:
            raise ValueError("eigenfunction must be nonnegative with max 1")

    def eigenfunction(self, angle):
        """Linear interpolation of the normalized E samples (exact values for
        arcs are used by h_sigma_eval directly)."""
        return np.interp(angle, self.angles, self.values)


@dataclass(frozen=True)
class CriticalityClass:
    label: str     # "subcritical" | "critical" | "supercritical"
    margin: float  # 2/(1+gamma) - phi_sigma
    tol: float


def sector_frequency(theta: float) -> ConeSpec:
    """Planar arc of opening theta: lambda = (pi/theta)^2, phi = pi/theta,
    E(omega) = sin(pi*omega/theta)."""
    if not (0.0 < theta < 2.0 * np.pi):
        raise ValueError("theta must lie in (0, 2*pi)")
    phi = np.pi / theta
    omega = np.linspace(0.0, theta, 257)
    E = np.sin(phi * omega)
    E[0] = 0.0
    E[-1] = 0.0
    E = E / np.max(E)
    return ConeSpec(dimension=2, shape="arc", param=theta,
                    lambda_sigma=phi * phi, phi_sigma=phi,
                    angles=omega, values=E)


def _cap_tridiagonal(alpha, nodes):
    """Flux-form FD discretization of -(sin s E')' = lam sin s E on (0,alpha),
    E(alpha)=0, natural regularity at s=0.  Unknowns at s_j = j*ds,
    j = 0..nodes-1; returns (diag, offdiag, mass) of the generalized
    tridiagonal pencil (T, diag(mass))."""
    ds = alpha / nodes
    j = np.arange(nodes)
    s = j * ds
    a_right = np.sin(s + 0.5 * ds) / ds            # flux weight to node j+1
    # control-volume masses: integral of sin over [s-ds/2, s+ds/2]
    lo = np.maximum(s - 0.5 * ds, 0.0)
    hi = s + 0.5 * ds
    mass = np.cos(lo) - np.cos(hi)
    diag = np.empty(nodes)
    diag[0] = a_right[0]
    diag[1:] = a_right[1:] + a_right[:-1]
    off = -a_right[:-1]
    return diag, off, mass


def cap_frequency(alpha: float, nodes: int = 1024) -> ConeSpec:
    """Axisymmetric spherical cap of polar angle alpha in S^2 (n=3).

    Smallest eigenvalue from the symmetric-tridiagonal reduction
    D^-1/2 T D^-1/2 of the flux-form pencil; phi solves phi*(phi+1) = lambda.
    """
    if not (0.0 < alpha < np.pi):
        raise ValueError("alpha must lie in (0, pi)")
    if nodes < 64:
        raise ValueError("need at least 64 nodes")
    diag, off, mass = _cap_tridiagonal(alpha, nodes)
    dinv = 1.0 / np.sqrt(mass)
    d_std = diag * dinv * dinv
    e_std = off * dinv[:-1] * dinv[1:]
    try:
        lam, vec = eigh_tridiagonal(d_std, e_std, select="i",
                                    select_range=(0, 0))
    except Exception as exc:  # pragma: no cover - LAPACK failure is exotic
        raise ConvergenceError(f"tridiagonal eigensolve failed: {exc}") from exc
    lam = float(lam[0])
    if not np.isfinite(lam) or lam <= 0:
        raise ConvergenceError(f"nonpositive cap eigenvalue {lam}")
    # T E = lam D E with E = D^-1/2 w, w the computed standard eigenvector
    E = vec[:, 0] * dinv
    if E[0] < 0:
        E = -E
    E = np.clip(E, 0.0, None)
    s = np.arange(nodes) * (alpha / nodes)
    angles = np.concatenate([s, [alpha]])
    values = np.concatenate([E, [0.0]])
    values = values / np.max(values)
    phi = 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * lam))
    return ConeSpec(dimension=3, shape="cap", param=alpha,
                    lambda_sigma=lam, phi_sigma=phi,
                    angles=angles, values=values)


def cap_frequency_shooting(alpha: float, lam_hint: float = None,
                           n_steps: int = 4000, tol: float = 1e-12) -> float:
    """Independent oracle for the cap eigenvalue: integrate the regular
    solution E'' = -cot(s) E' - lam E from the pole (series start
    E = 1 - lam s^2/4 + lam(lam - 2/3) s^4/64 + ...) and bisect on lam so
    that E(alpha) = 0 before any interior sign change."""

    def end_value(lam):
        s0 = 1e-4 * alpha
        c2 = -lam / 4.0
        c4 = lam * (lam - 2.0 / 3.0) / 64.0
        E = 1.0 + c2 * s0 * s0 + c4 * s0**4
        dE = 2.0 * c2 * s0 + 4.0 * c4 * s0**3
        h = (alpha - s0) / n_steps
        y = np.array([E, dE])

        def rhs(s, y):
            return np.array([y[1], -np.cos(s) / np.sin(s) * y[1] - lam * y[0]])

        s = s0
        for _ in range(n_steps):
            k1 = rhs(s, y)
            k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(s + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            s += h
        return y[0]

    lo = 1e-6
    hi = lam_hint if lam_hint is not None else (2.4048 / alpha) ** 2 + 2.0
    flo, fhi = end_value(lo), end_value(hi)
    doublings = 0
    while flo * fhi > 0:
        hi *= 2.0
        fhi = end_value(hi)
        doublings += 1
        if doublings > 60:
            raise ConvergenceError(
                f"no eigenvalue bracket found up to lam={hi}; E(alpha)={fhi}")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if flo * end_value(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = end_value(mid)
    return 0.5 * (lo + hi)


def classify(cone: ConeSpec, gamma: float,
             tol: float = CRITICAL_BAND_TOL) -> CriticalityClass:
    """Subcritical if 2/(1+gamma) < phi, critical if equal (within the
    declared band), supercritical if larger."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    margin = 2.0 / (1.0 + gamma) - cone.phi_sigma
    if margin < -tol:
        label = "subcritical"
    elif margin > tol:
        label = "supercritical"
    else:
        label = "critical"
    return CriticalityClass(label=label, margin=margin, tol=tol)


def h_sigma_eval(cone: ConeSpec, X):
    """Homogeneous harmonic H(X) = r^phi * E(angle) on the cone over Sigma.

    Arcs use the exact sine; caps interpolate the eigenfunction samples
    linearly (induced error in H is O((alpha/nodes)^2) times r^phi).
    Raises ValueError outside the open cone or at the vertex.
    Accepts a single point or an (N, dim) array.
    """
    P = np.atleast_2d(np.asarray(X, dtype=float))
    scalar = np.asarray(X).ndim == 1
    if cone.dimension == 2:
        if P.shape[1] != 2:
            raise ValueError("planar cone expects 2D points")
        r = np.hypot(P[:, 0], P[:, 1])
        if np.any(r == 0.0):
            raise ValueError("H is evaluated away from the vertex")
        omega = np.arctan2(P[:, 1], P[:, 0])
        omega = np.where(omega < 0, omega + 2.0 * np.pi, omega)
        if np.any(omega < -1e-12) or np.any(omega > cone.param + 1e-12):
            raise ValueError("point outside the sector")
        val = r ** cone.phi_sigma * np.sin(cone.phi_sigma * omega)
    else:
        if P.shape[1] != 3:
            raise ValueError("cap cone expects 3D points")
        r = np.linalg.norm(P, axis=1)
        if np.any(r == 0.0):
            raise ValueError("H is evaluated away from the vertex")
        s = np.arccos(np.clip(P[:, 2] / r, -1.0, 1.0))
        if np.any(s > cone.param + 1e-12):
            raise ValueError("point outside the cap cone")
        val = r ** cone.phi_sigma * cone.eigenfunction(s)
    return float(val[0]) if scalar else val
