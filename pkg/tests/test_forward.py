import numpy as np
import pytest
from scipy.integrate import dblquad
from scipy.special import hankel1

from bathyscatter.dispersion import WaveParams, mild_slope_report, wavenumber_from_depth
from bathyscatter.errors import CapacityError, DomainError, MildSlopeError, SolverError
from bathyscatter.forward import (
    LATTICE_ZETA_PRIME,
    Contrast,
    DiscreteOperator,
    assemble_operator,
    build_contrast,
    green,
    hankel_h1_0,
    kernel_table,
    self_cell_weight,
    simplification_gap,
    solve_scattering,
)
from bathyscatter.grid import DepthMap, Grid, RealField
from bathyscatter.topography import generate_topography, preset, scaled

WAVE = WaveParams(1.0, 1.5)
K_I = WAVE.k_incoming


def compact_q(grid, cx, cy, radius, amp):
    x1, x2 = grid.coordinates()
    r2 = ((x1 - cx) ** 2 + (x2 - cy) ** 2) / radius ** 2
    return amp * np.clip(1 - r2, 0, None) ** 4


def bump_depth(grid, H0=1.5, amp=0.5, width=None):
    L = grid.side_length_m
    width = L / 8 if width is None else width
    x1, x2 = grid.coordinates()
    r = np.hypot(x1 - L / 2, x2 - L / 2)
    h = amp * np.exp(-r ** 2 / (2 * width ** 2)) * np.clip(1 - (r / (0.45 * L)) ** 2, 0, None) ** 3
    return DepthMap(RealField(grid, H0 - h), H0)


class TestHankelPublic:
    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            hankel_h1_0(x)

    def test_small_argument_log(self):
        x = 1e-6
        approx = 1 + (2j / np.pi) * (np.log(x / 2) + 0.5772156649015329)
        assert hankel_h1_0(x) == pytest.approx(approx, rel=1e-10)
        # with the i/4 prefactor the singular part is -(1/2 pi) ln r
        r1, r2 = 1e-6, 2e-6
        diff = (green(r1, K_I) - green(r2, K_I)).real
        assert diff == pytest.approx(-np.log(r1 / r2) / (2 * np.pi), rel=1e-6)

    def test_far_field_envelope(self):
        r = np.array([200.0, 400.0, 800.0])
        G = green(r, K_I)
        env = np.sqrt(1 / (8 * np.pi * K_I * r))
        assert np.allclose(np.abs(G), env, rtol=1e-2)
        phase = 1j * env * np.exp(1j * (K_I * r - np.pi / 4))
        assert np.allclose(G, phase, rtol=2e-2)


class TestQuadrature:
    def test_lattice_constant(self):
        assert LATTICE_ZETA_PRIME == pytest.approx(-1.3105329259115095, rel=1e-14)

    @pytest.mark.parametrize("h,k", [(1.0, 0.267), (0.5, 0.581), (2.0, 0.211)])
    def test_cell_weight_matches_adaptive_quadrature(self, h, k):
        a = h / 2
        # quadrant integrals keep the singular origin at a corner, never sampled
        re = dblquad(lambda y, x: (0.25j * hankel1(0, k * np.hypot(x, y))).real, 0, a, 0, a,
                     epsabs=1e-13, epsrel=1e-13)[0]
        im = dblquad(lambda y, x: (0.25j * hankel1(0, k * np.hypot(x, y))).imag, 0, a, 0, a,
                     epsabs=1e-13, epsrel=1e-13)[0]
        got = self_cell_weight(h, k, "cell")
        assert abs(got - 4 * (re + 1j * im)) <= 1e-6 * h * h

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            self_cell_weight(1.0, 0.3, "trapezoid")

    def test_table_entries(self):
        g = Grid(8.0, 8)
        t = kernel_table(g, K_I)
        for a, b in [(0, 1), (3, 4), (7, 7)]:
            assert t[a, b] == pytest.approx(0.25j * hankel1(0, K_I * np.hypot(a, b)), rel=1e-11)
        assert t[0, 0] == self_cell_weight(1.0, K_I)


class TestContrast:
    def test_flat_is_zero(self):
        g = Grid(32.0, 32)
        d = DepthMap.flat(g, 1.5)
        for kind in ("simplified", "full"):
            assert not np.any(build_contrast(d, WAVE, kind).q.values)

    def test_sign_and_formula(self):
        g = Grid(40.0, 40)
        d = bump_depth(g)
        c = build_contrast(d, WAVE)
        k = wavenumber_from_depth(1.0, 9.81, d.values)
        interior = np.zeros(g.shape, bool)
        interior[1:-1, 1:-1] = True
        assert np.max(np.abs(c.q.values[interior] - (1 - k ** 2 / K_I ** 2)[interior])) <= 1e-12
        assert c.q.values[20, 20] < 0

    def test_q_norm_bound(self):
        g = Grid(60.0, 60)
        d = bump_depth(g, amp=0.6)
        rep = mild_slope_report(d, 1.0)
        for kind in ("simplified", "full"):
            q = build_contrast(d, WAVE, kind).q.values
            assert K_I ** 2 * np.max(np.abs(q)) <= rep.q_bound

    def test_frame_must_vanish(self):
        g = Grid(8.0, 8)
        q = np.zeros(g.shape)
        q[0, 3] = 0.1
        with pytest.raises(ValueError):
            Contrast.from_values(g, q, K_I)

    def test_background_mismatch(self):
        with pytest.raises(ValueError):
            build_contrast(DepthMap.flat(Grid(8.0, 8), 2.0), WAVE)


class TestOperator:
    def test_zero_contrast(self):
        g = Grid(16.0, 16)
        op = assemble_operator(Contrast.from_values(g, np.zeros(g.shape), K_I))
        assert not np.any(op.dense())

    def test_symmetry(self):
        g = Grid(16.0, 16)
        q = compact_q(g, 8, 8, 6, -0.4) + 0.01
        q[0, :] = q[-1, :] = q[:, 0] = q[:, -1] = 0
        A = assemble_operator(Contrast.from_values(g, q, K_I)).dense()
        qv = q.ravel()
        nz = qv != 0
        B = A[np.ix_(nz, nz)] / qv[nz][None, :]
        assert np.allclose(B, B.T, rtol=1e-14, atol=0)

    def test_fft_product_matches_dense(self):
        g = Grid(20.0, 20)
        op = DiscreteOperator(g, K_I, compact_q(g, 10, 10, 7, -0.5))
        v = np.random.default_rng(3).standard_normal(g.n ** 2) * (1 + 0.5j)
        assert np.allclose(op.matvec(v).ravel(), op.dense() @ v, rtol=0, atol=1e-12 * np.abs(v).max())

    def test_capacity(self):
        g = Grid(70.0, 70)
        with pytest.raises(CapacityError):
            DiscreteOperator(g, K_I, matrix_free=False)
        op = DiscreteOperator(g, K_I)
        with pytest.raises(CapacityError):
            op.dense()


class TestSolve:
    def test_zero_contrast_identity(self):
        for n in (16, 80):
            g = Grid(float(n), n)
            s = solve_scattering(Contrast.from_values(g, np.zeros(g.shape), K_I), WAVE)
            assert np.max(np.abs(s.total.values - s.incoming.values)) <= 1e-12
            assert not np.any(s.scattered.values)

    def test_dense_vs_iterative(self):
        g = Grid(32.0, 32)
        c = build_contrast(bump_depth(g, amp=0.7), WAVE)
        a = solve_scattering(c, WAVE, method="dense")
        b = solve_scattering(c, WAVE, method="iterative")
        assert a.method == "dense" and b.method == "iterative"
        rel = np.linalg.norm(a.total.values - b.total.values) / np.linalg.norm(a.total.values)
        assert rel <= 1e-8
        assert a.residual <= 1e-10 and b.residual <= 1e-10

    def test_total_is_incoming_plus_scattered(self):
        g = Grid(32.0, 32)
        s = solve_scattering(build_contrast(bump_depth(g), WAVE), WAVE)
        assert np.array_equal(s.total.values, s.incoming.values + s.scattered.values) or \
            np.max(np.abs(s.total.values - s.incoming.values - s.scattered.values)) < 1e-15

    @pytest.mark.parametrize("diagonal,min_order", [("corrected", 3.5), ("cell", 1.8)])
    def test_self_convergence(self, diagonal, min_order):
        sols = {}
        for n in (16, 32, 64, 128):
            g = Grid(32.0, n)
            c = Contrast.from_values(g, compact_q(g, 16, 16, 10, -0.8), K_I)
            sols[n] = solve_scattering(c, WAVE, diagonal=diagonal).total.values
        e = [np.abs(sols[n] - sols[2 * n][::2, ::2]).max() for n in (16, 32, 64)]
        orders = [np.log2(e[i] / e[i + 1]) for i in range(2)]
        assert min(orders) >= min_order

    def test_linear_in_amplitude(self):
        g = Grid(32.0, 32)
        with pytest.warns(UserWarning, match="steepness"):
            w2 = WaveParams(1.0, 1.5, amplitude_m=0.6)
        c = build_contrast(bump_depth(g), WAVE)
        a = solve_scattering(c, WAVE).total.values
        b = solve_scattering(c, w2).total.values
        assert np.max(np.abs(b - 2 * a)) <= 1e-10 * np.max(np.abs(b))

    def test_radiation_decay(self):
        g = Grid(200.0, 200)
        c = Contrast.from_values(g, compact_q(g, 20, 100, 6, -0.5), K_I)
        s = solve_scattering(c, WAVE)
        r = g.axis() - 20
        sel = (r >= 90) & (r <= 179)
        amp = np.abs(s.scattered.values[100, sel])
        slope = np.polyfit(np.log(r[sel]), np.log(amp), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_full_model_back_transform(self):
        g = Grid(32.0, 32)
        d = bump_depth(g)
        s = solve_scattering(build_contrast(d, WAVE, "full"), WAVE)
        assert s.residual <= 1e-10
        # c = 1 on the frame so the transformed and physical fields agree there
        frame_gap = np.abs(s.total.values[0] - s.incoming.values[0] - s.scattered.values[0]).max()
        assert frame_gap < 1e-15

    def test_gmres_failure_reports_history(self):
        g = Grid(80.0, 80)
        c = build_contrast(bump_depth(g, amp=0.7), WAVE)
        with pytest.raises(SolverError) as exc:
            solve_scattering(c, WAVE, method="iterative", maxiter=2, restart=2)
        assert len(exc.value.residual_history) >= 1

    def test_unknown_method(self):
        g = Grid(16.0, 16)
        with pytest.raises(ValueError):
            solve_scattering(build_contrast(bump_depth(g), WAVE), WAVE, method="magic")

    def test_concurrent_solves_do_not_interfere(self):
        from concurrent.futures import ThreadPoolExecutor
        g = Grid(40.0, 40)
        cs = [build_contrast(bump_depth(g, amp=a), WAVE) for a in (0.2, 0.4, 0.6)]
        serial = [solve_scattering(c, WAVE).total.values for c in cs]
        with ThreadPoolExecutor(3) as pool:
            par = list(pool.map(lambda c: solve_scattering(c, WAVE).total.values, cs))
        for a, b in zip(serial, par):
            assert np.array_equal(a, b)


class TestSimplification:
    def test_flat_gap_zero(self):
        g = Grid(32.0, 32)
        out = simplification_gap(DepthMap.flat(g, 1.5), WAVE)
        assert out.gap == 0.0

    def test_gentle_bump(self):
        g = Grid(100.0, 200)
        spec = preset("gentle")
        full = simplification_gap(generate_topography(spec, g), WAVE)
        half = simplification_gap(generate_topography(scaled(spec, 0.5), g), WAVE)
        assert full.gap <= 0.1 * full.max_scattered
        assert 1.5 <= full.gap / half.gap <= 3.0
        assert full.epsilon == pytest.approx(0.3 * K_I)
        assert half.delta == pytest.approx(full.delta / 2, rel=0.05)

    def test_rejects_steep(self):
        g = Grid(20.0, 40)
        x1, _ = g.coordinates()
        d = np.where(np.abs(x1 - 10) < 3, 0.2, 1.5)
        d[0, :] = d[-1, :] = d[:, 0] = d[:, -1] = 1.5
        with pytest.raises(MildSlopeError):
            simplification_gap(DepthMap(RealField(g, d), 1.5), WAVE)
