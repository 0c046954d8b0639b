import numpy as np
import pytest

from slef_lab.geometry import DiskDomain, GraphDomain, SectorDomain
from slef_lab.mesh import (
    Field,
    build_cartesian_mesh,
    build_interval_mesh,
    build_polar_mesh,
    harmonic_solve,
)
from slef_lab.ode_lab import flat_profile
from slef_lab.slef_solver import (
    SleConfig,
    rescale_compare,
    residual_check,
    solve_regularized,
    solve_singular,
    verify_comparison,
    verify_nondegeneracy,
)


def solve_1d(gamma, profile, n, eps_min=1e-6, polish=True, span=1e8):
    """FD solve of u'' = -u^-gamma, u(0)=0, u(1)=profile(1) on a graded mesh
    (finest at the zero-data end, where the profile behaves like a fractional
    power and uniform grids cap the observable order).  The first cell is
    pinned at length/span: much below 1e-8 the graded flux coefficients
    exhaust double precision."""
    from slef_lab.mesh import grading_for_span
    mesh = build_interval_mesh(0.0, 1.0, n,
                               grading=grading_for_span(n, span))
    cfg = SleConfig(gamma=gamma, f=1.0, eps0=0.05 * profile.eval(1.0),
                    eps_min=eps_min, polish_to_zero=polish, precond="amg")
    bnd = Field.from_boundary(mesh, {"left": 0.0,
                                     "right": float(profile.eval(1.0))})
    return mesh, solve_singular(mesh, cfg, bnd)


class Test1DOracle:
    def test_matches_quadrature_profile(self):
        for gamma, param in ((0.5, 2.0), (2.0, 0.0)):
            prof = flat_profile(gamma, param, t_max=1.0)
            mesh, (u, rep) = solve_1d(gamma, prof, 500)
            exact = prof.eval(mesh.coords[:, 0])
            assert np.max(np.abs(u.interior - exact)) < 2e-4
            assert rep.monotone_in_eps and rep.subsolution_ok

    def test_second_order(self):
        # graded-mesh refinement: error drops at order >= 1.8 in 1/n
        for gamma, param in ((0.5, 2.0), (2.0, 0.0)):
            prof = flat_profile(gamma, param, t_max=1.0)
            errs = []
            for n in (125, 250, 500):
                mesh, (u, _) = solve_1d(gamma, prof, n, eps_min=1e-9)
                exact = prof.eval(mesh.coords[:, 0])
                errs.append(np.max(np.abs(u.interior - exact)))
            order = np.log2(errs[0] / errs[-1]) / 2.0
            assert order >= 1.8, (gamma, errs)


class TestRegularized:
    def test_ball_center_lower_bound(self):
        # f = lam = 1, zero outer data + eps: center >= (2n/lam)^(-1/gamma)
        mesh = build_cartesian_mesh(DiskDomain(1.0), 2.0**-5)
        cfg = SleConfig(gamma=0.5, f=1.0, eps0=0.5, eps_min=1e-4)
        u, rep = solve_singular(mesh, cfg, Field.from_boundary(mesh, 0.0))
        center = mesh.sample(u, np.array([[0.0, 0.0]]))[0]
        assert center >= (4.0) ** (-2.0)  # = 1/16

    def test_data_monotonicity(self):
        mesh = build_cartesian_mesh(GraphDomain.flat(top=1.0), 2.0**-5)
        cfg = SleConfig(gamma=1.0, f=1.0, eps0=0.5, eps_min=1e-5)
        u1, _ = solve_singular(mesh, cfg, Field.from_boundary(
            mesh, {"graph": 0.0, "left": 0.5, "right": 0.5, "top": 0.5}))
        u2, _ = solve_singular(mesh, cfg, Field.from_boundary(
            mesh, {"graph": 0.0, "left": 1.0, "right": 1.0, "top": 1.0}))
        assert np.min(u2.interior - u1.interior) >= -1e-10

    def test_superharmonic_above_one(self):
        # data 1 on all sides of the unit square, gamma=1, f=1: u >= 1
        dom = GraphDomain.flat(x_range=(0.0, 1.0), top=1.0)
        mesh = build_cartesian_mesh(dom, 2.0**-5)
        cfg = SleConfig(gamma=1.0, f=1.0, eps0=0.25, eps_min=1e-6,
                        polish_to_zero=True)
        u, _ = solve_singular(mesh, cfg, Field.from_boundary(mesh, 1.0))
        assert np.min(u.interior) >= 1.0 - 1e-9


class TestContinuation:
    def test_monotone_and_sandwich(self):
        mesh = build_cartesian_mesh(GraphDomain.flat(top=1.0), 2.0**-5)
        cfg = SleConfig(gamma=0.5, f=1.0, eps0=1.0, eps_min=1e-5)
        bnd = Field.from_boundary(mesh, 0.0)
        u, rep = solve_singular(mesh, cfg, bnd)
        assert rep.monotone_in_eps
        assert rep.monotone_worst >= -1e-10
        assert rep.subsolution_ok
        h = harmonic_solve(mesh, Field(mesh, np.zeros(mesh.n_interior),
                                       u.boundary))
        assert verify_comparison(u, h)
        assert all(g0 >= g1 or g1 < 1e-6
                   for g0, g1 in zip(rep.cauchy_gap, rep.cauchy_gap[1:]))

    def test_schedule_strictly_decreasing(self):
        mesh = build_interval_mesh(0.0, 1.0, 64)
        cfg = SleConfig(gamma=0.5, eps0=0.8, eps_min=1e-4,
                        polish_to_zero=True)
        bnd = Field.from_boundary(mesh, {"left": 0.0, "right": 1.0})
        _, rep = solve_singular(mesh, cfg, bnd)
        eps = rep.eps_schedule
        assert all(a > b for a, b in zip(eps, eps[1:]))
        assert eps[-1] == 0.0

    def test_uniqueness_two_starts(self):
        mesh = build_interval_mesh(0.0, 1.0, 128)
        cfg = SleConfig(gamma=0.5, eps0=0.3, eps_min=1e-6)
        bnd = Field.from_boundary(mesh, {"left": 0.0, "right": 0.5})
        rng = np.random.default_rng(5)
        op = mesh.operator()
        outs = []
        for _ in range(2):
            init = Field(mesh, 0.3 + 0.2 * rng.random(mesh.n_interior),
                         bnd.boundary)
            u, _ = solve_regularized(mesh, cfg, bnd, 1e-6, init, op=op)
            outs.append(u.interior)
        assert np.max(np.abs(outs[0] - outs[1])) <= 1e-8


class TestComparisonOps:
    def test_verify_comparison_trivial(self):
        mesh = build_interval_mesh(0.0, 1.0, 16)
        u = Field.from_function(mesh, lambda x: np.ones(len(x)))
        assert verify_comparison(u, u)
        v = u.copy()
        v.interior = v.interior - 1.0
        v.boundary = v.boundary - 1.0
        assert not verify_comparison(v, u)
        assert verify_comparison(u, v)

    def test_nondegeneracy_examples(self):
        mesh = build_cartesian_mesh(DiskDomain(1.0), 2.0**-5)
        cfg = SleConfig(gamma=0.5, f=1.0)
        big = Field(mesh, np.full(mesh.n_interior, 1e9),
                    np.zeros(mesh.n_boundary))
        assert verify_nondegeneracy(big, mesh, cfg, (0.0, 0.0), 0.9)
        # threshold scales like r^(2/(1+gamma)): value just below fails
        thresh = (4.0) ** (-2.0) * 0.5 ** (4.0 / 3.0)
        just_below = Field(mesh, np.full(mesh.n_interior, 0.9 * thresh),
                           np.zeros(mesh.n_boundary))
        assert not verify_nondegeneracy(just_below, mesh, cfg, (0.0, 0.0), 0.5)
        with pytest.raises(ValueError):
            verify_nondegeneracy(big, mesh, cfg, (0.5, 0.0), 0.9)

    def test_nondegeneracy_of_solution(self):
        mesh = build_cartesian_mesh(DiskDomain(1.0), 2.0**-5)
        cfg = SleConfig(gamma=0.5, f=1.0, eps0=0.5, eps_min=1e-5)
        u, _ = solve_singular(mesh, cfg, Field.from_boundary(mesh, 0.0))
        for r in (0.25, 0.5, 0.9):
            assert verify_nondegeneracy(u, mesh, cfg, (0.0, 0.0), r)
        # subsampled nodewise variant at distance d from the boundary
        rng = np.random.default_rng(2)
        picks = rng.choice(mesh.n_interior, size=60, replace=False)
        dom = DiskDomain(1.0)
        c0 = (2.0 * 2 / cfg.lam) ** (-1.0 / cfg.gamma)
        for k in picks:
            d = dom.boundary_distance(mesh.coords[k])
            if d < 6 * mesh.meta["h"]:
                continue
            bound = c0 * d ** (4.0 / 3.0) * 0.95
            assert u.interior[k] >= bound


class TestRescale:
    def test_exact_homogeneous_profile(self):
        sec = SectorDomain(theta=np.pi / 2, radius=1.0)
        mesh = build_polar_mesh(sec, 48, 24, 1.05)
        cfg = SleConfig(gamma=1.0 / 3.0)
        beta = 2.0 / (1.0 + cfg.gamma)
        u = Field.from_function(
            mesh, lambda p: (np.hypot(p[:, 0], p[:, 1]) ** beta
                             * np.sin(np.arctan2(p[:, 1], p[:, 0]))))
        rep = rescale_compare(u, cfg)
        # exact scaling invariance up to the (one-sided, convex-profile)
        # interpolation error at the half radii
        assert rep["min_diff"] >= -1e-12
        assert rep["min_diff"] <= 1e-5 * rep["max_u"]
        # linearity: doubling u doubles the gap statistic
        u2 = Field(mesh, 2.0 * u.interior, 2.0 * u.boundary)
        rep2 = rescale_compare(u2, cfg)
        assert rep2["min_diff"] == pytest.approx(2.0 * rep["min_diff"],
                                                 abs=1e-12)

    def test_solved_sector(self):
        sec = SectorDomain(theta=np.pi / 2, radius=1.0)
        mesh = build_polar_mesh(sec, 96, 48, 1.08)
        cfg = SleConfig(gamma=1.0 / 3.0, eps0=0.25)
        u, _ = solve_singular(mesh, cfg, Field.from_boundary(mesh, 0.0))
        rep = rescale_compare(u, cfg)
        assert rep["min_diff"] >= -1e-3 * rep["max_u"]


class TestResidualCheck:
    def test_lemma_barrier_subsolution(self):
        # v = ((2n/lam)^(-1/gamma) - |X|^2)_+ with a kink guard
        mesh = build_cartesian_mesh(DiskDomain(1.0), 2.0**-5)
        cfg = SleConfig(gamma=0.5, f=1.0)
        cap = (4.0) ** (-2.0)
        rad = np.sqrt(cap)

        def barrier(p):
            return np.maximum(cap - (p[:, 0] ** 2 + p[:, 1] ** 2), 0.0)

        rep = residual_check(
            barrier, mesh, cfg, "sub",
            guard=lambda p: np.hypot(p[:, 0], p[:, 1]) < 0.9 * rad)
        assert rep.ok
        assert rep.n_checked > 10

    def test_sub_and_super_1d_log_profile(self):
        mesh = build_interval_mesh(0.0, 0.1, 512)
        cfg = SleConfig(gamma=1.0, f=1.0)

        def make(a):
            def cand(x):
                t = np.clip(np.asarray(x, float).reshape(-1), 1e-12, None)
                return a * t * np.sqrt(np.log(1.0 / t))
            return cand

        guard = lambda x: (np.asarray(x).reshape(-1) > 0.005)
        rep = residual_check(make(0.1), mesh, cfg, "sub", guard=guard)
        assert rep.ok
        rep = residual_check(make(10.0), mesh, cfg, "super", guard=guard)
        assert rep.ok
        rep = residual_check(make(10.0), mesh, cfg, "sub", guard=guard)
        assert not rep.ok


class TestConfigValidation:
    def test_requires_bounds_for_callable(self):
        with pytest.raises(ValueError):
            SleConfig(gamma=0.5, f=lambda p: 1.0 + 0 * p[:, 0])
        cfg = SleConfig(gamma=0.5, f=lambda p: 1.0 + 0 * p[:, 0],
                        lam=1.0, Lam=1.0)
        assert cfg.lam == 1.0

    def test_rejects_bad_ranges(self):
        with pytest.raises(ValueError):
            SleConfig(gamma=-1.0)
        with pytest.raises(ValueError):
            SleConfig(gamma=0.5, lam=2.0, Lam=1.0, f=lambda p: 1.0)
        with pytest.raises(ValueError):
            SleConfig(gamma=0.5, eps_factor=1.5)
