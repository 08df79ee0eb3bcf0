import cmath
import math
import warnings

import numpy as np
import pytest

from specbroadcast import qstate as q
from specbroadcast import sphere as sp
from specbroadcast.info import mutual_information
from specbroadcast.qstate import DensityOperator


def params(**kw):
    base = dict(radius=1e-7, permittivity=2.0, displacement=1e-7, k0=1e5, theta=0.0, density=1e6)
    base.update(kw)
    return sp.SphereParams(**base)


P = params()
TAU = sp.decoherence_time(P)
UNIFORM = sp.InitialSystemState.pure(0.5)


def info_at(t_over_tau, f, rho0=UNIFORM, mode="thermodynamic", p=P, mu=0.0):
    state = sp.exact_joint_state(p, rho0, sp.FractionPartition(0.1, f, mu), t_over_tau * TAU, mode)
    return sp.exact_mutual_information(state)


class TestParams:
    @pytest.mark.parametrize("field", ["radius", "displacement", "k0", "density", "c", "box_edge"])
    def test_positive(self, field):
        with pytest.raises(ValueError, match=field):
            params(**{field: 0.0})

    def test_permittivity(self):
        with pytest.raises(ValueError, match="permittivity"):
            params(permittivity=1.0)

    def test_softness_warning(self):
        with pytest.warns(sp.RegimeWarning, match="displacement"):
            params(displacement=2e-6)

    def test_dipole_warning(self):
        with pytest.warns(sp.RegimeWarning, match="dipole"):
            params(radius=2e-6)

    def test_in_regime_is_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            params()

    def test_effective_radius(self):
        assert P.effective_radius == pytest.approx(1e-7 * (1 / 4) ** (1 / 3))


class TestPartition:
    def test_m_must_divide_one(self):
        with pytest.raises(ValueError):
            sp.FractionPartition(m=0.3)

    def test_m_range(self):
        with pytest.raises(ValueError):
            sp.FractionPartition(m=0.0)

    def test_f_range(self):
        with pytest.raises(ValueError):
            sp.FractionPartition(f=1.2)

    def test_n_macro(self):
        assert sp.FractionPartition(m=0.1).n_macro == 10


class TestInitialState:
    def test_pure(self):
        s = sp.InitialSystemState.pure(0.3, phase=0.4)
        assert s.populations == pytest.approx((0.3, 0.7))
        assert abs(s.c12) == pytest.approx(math.sqrt(0.21))

    def test_invalid(self):
        with pytest.raises(ValueError):
            sp.InitialSystemState.from_populations(0.5, 0.6)


class TestPhotons:
    def test_zero_time(self):
        assert sp.photons_scattered(P, 0.0) == 0.0

    def test_linear(self):
        assert sp.photons_scattered(P, 2.0) == pytest.approx(2 * sp.photons_scattered(P, 1.0))

    def test_reference_value(self):
        p = params(c=3e8, box_edge=1.0, density=1e6)
        assert sp.photons_scattered(p, 1.0) == pytest.approx(3e14)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            sp.photons_scattered(P, -1.0)


class TestOverlap:
    def test_vanishing_displacement(self):
        z = sp.single_photon_overlap(params(displacement=1e-60))
        assert abs(z - 1) < 1e-70

    def test_perpendicular_has_no_phase(self):
        z = sp.single_photon_overlap(params(theta=math.pi / 2))
        first, second = sp._series_coefficients(params(theta=0.0))
        assert abs(z.imag) < 1e-15 * first

    def test_first_order_term(self):
        a6 = P.effective_radius**6
        expected = 8 * math.pi * P.displacement * P.k0**5 * a6 / 3
        assert sp.single_photon_overlap(P).imag == pytest.approx(expected, rel=1e-12)

    def test_deficit_matches_second_order(self):
        # 1 - |z|^2 = 2 beta - beta^2 - alpha^2 ~ 2 beta when alpha^2 << beta; needs a small box
        p = params(theta=math.pi / 2, box_edge=1e-9)
        z = sp.single_photon_overlap(p)
        beta = 1 - z.real
        assert (1 - abs(z) ** 2) / (2 * beta) == pytest.approx(1.0, rel=1e-6)

    def test_log_overlap_matches_naive_log_when_representable(self):
        p = params(box_edge=1e-10)
        z = sp.single_photon_overlap(p)
        assert sp.log_single_photon_overlap(p) == pytest.approx(cmath.log(z), rel=1e-6)

    def test_modulus_tends_to_one(self):
        mods = [abs(sp.single_photon_overlap(params(box_edge=L))) for L in (1e-10, 1e-9, 1e-8)]
        assert abs(1 - mods[2]) <= abs(1 - mods[1]) <= abs(1 - mods[0])


class TestTimescale:
    def test_displacement_scaling(self):
        assert sp.decoherence_time(params(displacement=2e-7)) == pytest.approx(TAU / 4)

    def test_angle_ratio(self):
        rate0 = 1 / sp.decoherence_time(params(theta=0.0))
        rate90 = 1 / sp.decoherence_time(params(theta=math.pi / 2))
        assert rate0 / rate90 == pytest.approx(14 / 3)

    def test_independent_of_box(self):
        assert sp.decoherence_time(params(box_edge=3.0)) == TAU

    @pytest.mark.parametrize("field", ["displacement", "k0", "radius", "density"])
    def test_monotone(self, field):
        bigger = params(**{field: getattr(P, field) * 1.5})
        assert sp.decoherence_time(bigger) < TAU

    def test_rate_equals_photon_flux_times_deficit(self):
        first, second = sp._series_coefficients(P)
        assert 1 / TAU == pytest.approx(P.density * P.c * second * P.box_edge**2, rel=1e-12)

    def test_finite_limit(self):
        t = TAU
        vals = [sp.decoherence_factor(P.with_box_edge(L), t, 0.0, "finite") for L in (1e-9, 1e-8, 1e-7)]
        assert vals[-1] == pytest.approx(math.exp(-1), rel=1e-8)


class TestDecoherenceFactor:
    def test_nothing_traced(self):
        for mode in sp.MODES:
            assert sp.decoherence_factor(P, 5 * TAU, 1.0, mode) == 1.0

    def test_zero_time(self):
        for mode in sp.MODES:
            assert sp.decoherence_factor(P, 0.0, 0.3, mode) == 1.0

    def test_one_tau(self):
        assert sp.decoherence_factor(P, TAU, 0.0) == pytest.approx(0.36788, abs=1e-5)

    def test_bad_f(self):
        with pytest.raises(ValueError):
            sp.decoherence_factor(P, TAU, 1.5)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            sp.decoherence_factor(P, TAU, 0.5, "exact")

    def test_monotone_from_above(self):
        t, f = 3 * TAU, 0.5
        limit = math.exp(-1.5)
        edges = [1e-10 * 2 ** (k / 2) for k in range(12)]
        vals = [sp.decoherence_factor(P.with_box_edge(L), t, f, "finite") for L in edges]
        assert all(v > limit for v in vals)
        assert all(a > b for a, b in zip(vals, vals[1:]))
        errs = [v - limit for v in vals]
        for a, b in zip(errs, errs[1:]):
            assert a / b == pytest.approx(2.0, abs=0.2)

    def test_no_phase_converges_from_below(self):
        p = params(theta=math.pi / 2)
        tau = sp.decoherence_time(p)
        vals = [sp.decoherence_factor(p.with_box_edge(L), 3 * tau, 0.5, "finite") for L in (1e-10, 2e-10, 4e-10)]
        assert all(v < math.exp(-1.5) for v in vals)

    def test_tiny_box_is_capped(self):
        with pytest.warns(sp.RegimeWarning, match="capping"):
            v = sp.decoherence_factor(P.with_box_edge(1e-12), TAU, 0.0, "finite")
        assert v == 1.0


class TestMacroOverlap:
    def test_zero_time(self):
        assert sp.macro_overlap(P, 0.0, 0.1) == 1.0

    def test_closed_form(self):
        assert sp.macro_overlap(P, 3 * TAU, 1 / 3) == pytest.approx(math.exp(-1))

    def test_shared_formula(self):
        for t in (0.5, 2.0, 7.0):
            assert sp.macro_overlap(P, t * TAU, 0.3) == pytest.approx(sp.decoherence_factor(P, t * TAU, 0.7))

    def test_bad_m(self):
        with pytest.raises(ValueError):
            sp.macro_overlap(P, TAU, 0.0)

    def test_exponent_ratio(self):
        for mode in sp.MODES:
            p = P.with_box_edge(1e-9)
            d = math.log(sp.decoherence_factor(p, 4 * TAU, 0.4, mode))
            m = math.log(sp.macro_overlap(p, 4 * TAU, 0.1, mode))
            assert m / d == pytest.approx(0.1 / 0.6, rel=1e-12)


def dense_oracle(rho0, z, n_photons, n_kept):
    """System qubit with n photon qubits; photon states |phi_1> = |0>, <phi_2|phi_1> = z."""
    phi1 = np.array([1, 0], dtype=complex)
    phi2 = np.array([np.conj(z), math.sqrt(1 - abs(z) ** 2)], dtype=complex)
    branch = []
    for phi in (phi1, phi2):
        v = np.ones(1, dtype=complex)
        for _ in range(n_photons):
            v = np.kron(v, phi)
        branch.append(v)
    d = 2**n_photons
    psi_cols = np.zeros((2 * d, 2), dtype=complex)
    psi_cols[:d, 0] = branch[0]
    psi_cols[d:, 1] = branch[1]
    m = psi_cols @ rho0.matrix @ psi_cols.conj().T
    full = DensityOperator((2,) + (2,) * n_photons, m)
    return q.partial_trace(full, range(n_kept + 1))


class TestRank2:
    @pytest.mark.parametrize("n,k", [(4, 2), (5, 1), (5, 3), (6, 6)])
    def test_dense_oracle(self, n, k):
        rho0 = sp.InitialSystemState(q.random_density((2,), np.random.default_rng(n + k)).matrix)
        z = 0.8 * cmath.exp(0.3j)
        state = sp.Rank2JointState.from_overlap(rho0, cmath.log(z), k, n - k)
        joint = dense_oracle(rho0, z, n, k)
        dense = np.sort(np.linalg.eigvalsh(joint.matrix))[-2:]
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(state.joint_matrix)), dense, atol=1e-12)
        env = q.partial_trace(joint, range(1, k + 1))
        np.testing.assert_allclose(
            np.sort(np.linalg.eigvalsh(state.env_gram_matrix)), np.sort(np.linalg.eigvalsh(env.matrix))[-2:], atol=1e-12
        )
        np.testing.assert_allclose(state.system_matrix, q.partial_trace(joint, [0]).matrix, atol=1e-12)
        assert sp.exact_mutual_information(state) == pytest.approx(mutual_information(joint, [0]), abs=1e-10)

    def test_damping_bookkeeping(self):
        p = P.with_box_edge(1e-9)
        for f in (0.1, 0.5, 0.9):
            s = sp.exact_joint_state(p, UNIFORM, sp.FractionPartition(0.1, f), 2 * TAU, "finite")
            full = cmath.exp(sp.photons_scattered(p, 2 * TAU) * sp.log_single_photon_overlap(p))
            assert s.kappa12 * s.g == pytest.approx(full, rel=1e-12)

    def test_zero_time_product(self):
        for mode in sp.MODES:
            assert info_at(0.0, 0.5, mode=mode, p=P.with_box_edge(1e-9)) == pytest.approx(0, abs=1e-12)

    def test_full_fraction_pure(self):
        s = sp.exact_joint_state(P, UNIFORM, sp.FractionPartition(0.1, 1.0), 3 * TAU)
        assert q.spectrum_entropy(np.linalg.eigvalsh(s.joint_matrix)) == pytest.approx(0, abs=1e-12)

    def test_bounded_for_pure(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            rho0 = sp.InitialSystemState.pure(rng.random(), rng.random() * 6)
            val = info_at(rng.random() * 10, rng.random(), rho0)
            assert -1e-12 <= val <= 2 + 1e-12

    def test_plateau(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            p1 = rng.uniform(0.05, 0.95)
            rho0 = sp.InitialSystemState.pure(p1)
            assert info_at(60, 0.5, rho0) == pytest.approx(q.shannon_entropy([p1, 1 - p1]), abs=1e-6)

    def test_full_information(self):
        assert info_at(60, 1.0) == pytest.approx(2.0, abs=1e-6)

    def test_mixed_initial_state_reported(self):
        rho0 = sp.InitialSystemState.from_populations(0.5, 0.2)
        val = info_at(60, 1.0, rho0)
        assert 1.0 < val < 2.0

    def test_rejects_large_overlap(self):
        with pytest.raises(ValueError):
            sp.Rank2JointState(UNIFORM.matrix, 1.5, 1.0)


class TestPhaseDiagram:
    def test_shape(self):
        rows = sp.phase_diagram(P, UNIFORM, 20 * TAU)
        assert [r.f for r in rows] == [0.0] + [k / 10 for k in range(1, 10)] + [1.0]
        assert rows[0].mu == 1.0

    def test_endpoints(self):
        rows = sp.phase_diagram(P, UNIFORM, 20 * TAU)
        assert rows[0].i_bits < 1e-3
        assert rows[5].i_bits == pytest.approx(1.0, abs=1e-9)
        assert rows[-1].i_bits == pytest.approx(2.0, abs=1e-9)

    def test_plateau_frozen_values(self):
        # exact rank-2 values at t = 20 tau; the outer fractions keep e^{-2} overlaps
        rows = sp.phase_diagram(P, UNIFORM, 20 * TAU)
        assert rows[1].i_bits == pytest.approx(0.98674743, abs=1e-8)
        assert rows[9].i_bits == pytest.approx(1.01325257, abs=1e-8)

    def test_zero_time_flat(self):
        assert all(r.i_bits == pytest.approx(0, abs=1e-12) for r in sp.phase_diagram(P, UNIFORM, 0.0))

    def test_time_beats_fraction(self):
        # time flattens both plateau edges at once; moving f only trades one edge for the other
        def devs(t):
            return [abs(info_at(t, k / 10) - 1) for k in range(1, 10)]

        worst = [max(devs(t)) for t in (5, 10, 20, 40)]
        assert all(a > b for a, b in zip(worst, worst[1:]))
        d = devs(10)
        assert d == pytest.approx(d[::-1], rel=1e-3)

    def test_finite_micro_point_vanishes_with_box(self):
        vals = [sp.phase_diagram(P.with_box_edge(L), UNIFORM, 20 * TAU, mode="finite")[0].i_bits for L in (1e-9, 1e-8, 1e-7)]
        assert vals[0] < 1e-6
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestRedundancy:
    def test_no_redundancy_at_zero(self):
        res = sp.redundancy(P, UNIFORM, 0.0, 0.1)
        assert not res.reached and res.value is None

    def test_saturates(self):
        res = sp.redundancy(P, UNIFORM, 60 * TAU, 0.1)
        assert res.f_star == pytest.approx(0.1)
        assert res.value == pytest.approx(10)

    def test_monotone_in_time(self):
        vals = [sp.redundancy(P, UNIFORM, t * TAU, 0.1).value or 0 for t in np.linspace(0, 40, 41)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(10)

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            sp.redundancy(P, UNIFORM, TAU, 1.0)


class TestBounds:
    def test_inequality_on_grid(self):
        times = [t * TAU for t in range(1, 21)]
        fracs = [k / 10 for k in range(1, 10)]
        report = sp.bound_suite(P, UNIFORM, times, fracs, [None, 1e-9, 1e-8])
        assert report.holds()
        assert report.applicable_points

    def test_holds_at_every_point(self):
        # the continuity terms already exceed the gap where eps > 1/2
        times = [t * TAU for t in np.linspace(0, 20, 41)]
        report = sp.bound_suite(P, sp.InitialSystemState.pure(0.3, 1.0), times, [k / 20 for k in range(1, 20)])
        assert min(p.slack for p in report.points) >= -1e-10

    def test_limit_estimate_matches_thermodynamic_terms(self):
        for t in (2, 7, 15):
            pt = sp.evaluate_point(P, UNIFORM, sp.FractionPartition(0.1, 0.5), t * TAU)
            assert pt.bound_rhs == pytest.approx(pt.limit_rhs, rel=1e-12)

    def test_frozen_rhs(self):
        # h(e^{-10}/2) + 2 h(e^{-5}) + 4 e^{-5} + e^{-5} for the uniform pure state
        e5 = math.exp(-5)
        expected = q.binary_entropy(0.5 * math.exp(-10)) + 2 * q.binary_entropy(e5) + 4 * e5 + e5
        assert sp.limit_bound(UNIFORM, 10, 0.5) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.150657, abs=1e-6)
        assert sp.limit_bound(UNIFORM, 17, 0.5) < 0.01

    def test_predecohered(self):
        rho0 = sp.InitialSystemState.from_populations(0.3, 0.0)
        pt = sp.evaluate_point(P, rho0, sp.FractionPartition(0.1, 0.4), 3 * TAU)
        assert pt.eps_system == 0 and pt.eps_joint == 0
        assert pt.bound_rhs == pytest.approx(2 * math.sqrt(0.21) * math.exp(-1.2))
        assert pt.slack >= 0

    def test_full_fraction_flagged(self):
        report = sp.bound_suite(P, UNIFORM, [20 * TAU], [0.5, 1.0])
        full = [p for p in report.points if p.f == 1.0][0]
        assert not full.applicable
        assert full.i_bits == pytest.approx(2.0, abs=1e-6)

    def test_sorted_output(self):
        report = sp.bound_suite(P, UNIFORM, [3 * TAU, TAU], [0.7, 0.2], [1e-8, None])
        keys = [(p.t_over_tau, p.f, p.box_edge) for p in report.points]
        assert keys == sorted(keys)


class TestLemma:
    def _states(self, seed):
        rng = np.random.default_rng(seed)
        return rng, q.random_density((2,), rng, rank=1), q.random_density((2,), rng)

    def test_equal_unitaries(self):
        rng, rho_s, rho_e = self._states(0)
        u = q.random_unitary(2, rng)
        rec = sp.lemma1_check(rho_s, rho_e, (u, u), 4, 0.5)
        assert rec.info == pytest.approx(0, abs=1e-10)
        assert rec.overlap == pytest.approx(1, abs=1e-7)
        assert rec.lhs == pytest.approx(q.shannon_entropy(rec.p), abs=1e-10)
        assert rec.holds()

    def test_diagonal_system(self):
        rng = np.random.default_rng(1)
        rho_s = DensityOperator((2,), np.diag([0.3, 0.7]))
        rho_e = q.random_density((3,), rng)
        us = (q.random_unitary(3, rng), q.random_unitary(3, rng))
        rec = sp.lemma1_check(rho_s, rho_e, us, 3, 2 / 3)
        assert rec.eps_system == pytest.approx(0, abs=1e-12)
        assert rec.eps_joint == pytest.approx(0, abs=1e-12)
        assert rec.rhs == pytest.approx(2 * math.sqrt(0.21) * rec.overlap**2, abs=1e-9)
        assert rec.holds()

    def test_random_four_qubit_envs(self):
        for seed in range(20):
            rec = sp.random_lemma1_instance(seed, 4, 2, 0.5)
            assert rec.slack > 0

    def test_too_large(self):
        rng, rho_s, _ = self._states(2)
        rho_e = q.random_density((3,), rng)
        u = q.random_unitary(3, rng)
        with pytest.raises(ValueError, match="exceeds"):
            sp.lemma1_check(rho_s, rho_e, (u, u), 7, 0.5)

    def test_needs_both_sides(self):
        rng, rho_s, rho_e = self._states(3)
        u = q.random_unitary(2, rng)
        with pytest.raises(ValueError):
            sp.lemma1_check(rho_s, rho_e, (u, u), 2, 1.0)

    def test_batch_deterministic(self):
        a = [r.slack for r in sp.lemma1_batch(5, 6)]
        b = [r.slack for r in sp.lemma1_batch(5, 6)]
        assert a == b
