from __future__ import annotations

import numpy as np
import pytest

from poissonkit import (
    BoxDomain,
    Constant,
    HamiltonianField,
    MaxNewtonIterationsError,
    build_spec,
    bracket,
    constant_symplectic,
    coordinate_hamiltonian,
    darboux_chart,
    integrate_canonical,
    integrate_direct,
    linear_hamiltonian,
    quadratic_hamiltonian,
    toda,
    trajectory_to_csv,
    vector_field,
)
from poissonkit.dynamics import _record_stride, validate_gradient


class TestHamiltonianField:
    def test_builtin_gradients_match_differences(self, kmk_spec, rng):
        points = rng.uniform(0.5, 2.0, size=(10, 3))
        validate_gradient(quadratic_hamiltonian([1.0, 2.0, 0.5]), points)
        validate_gradient(linear_hamiltonian([0.3, -1.0, 2.0]), points)
        validate_gradient(coordinate_hamiltonian(2, 3), points)

    def test_fd_gradient_fallback(self):
        H = HamiltonianField(value=lambda x: float(np.sin(x[0]) * x[1]))
        g = H.gradient_at([0.3, 2.0])
        np.testing.assert_allclose(
            g, [2.0 * np.cos(0.3), np.sin(0.3)], atol=1e-8
        )

    def test_coordinate_index_validation(self):
        with pytest.raises(ValueError):
            coordinate_hamiltonian(4, 3)


class TestVectorField:
    def test_casimir_gives_zero_field(self, kmk_spec, toda3_spec):
        H = linear_hamiltonian([1.0, 1.0, 1.0])
        np.testing.assert_array_equal(
            vector_field(kmk_spec, H, [2.0, 3.0, 1.0]), np.zeros(3)
        )
        Ht = linear_hamiltonian([0.0, 0.0, 1.0, 1.0, 1.0])
        np.testing.assert_array_equal(
            vector_field(toda3_spec, Ht, [1.0, 0.5, 0.2, -0.1, 0.4]), np.zeros(5)
        )

    def test_rank_zero_always_zero(self):
        spec = constant_symplectic(0, 3)
        H = quadratic_hamiltonian([1.0, 1.0, 1.0])
        np.testing.assert_array_equal(
            vector_field(spec, H, [0.3, 0.4, 0.5]), np.zeros(3)
        )

    def test_kmk_coordinate_hamiltonian(self, kmk_spec):
        H = coordinate_hamiltonian(3, 3)
        np.testing.assert_allclose(
            vector_field(kmk_spec, H, [2.0, 3.0, 1.0]), [-6.0, 6.0, 0.0], atol=1e-14
        )


class TestBracket:
    def test_self_bracket_vanishes(self, kmk_spec, rng):
        H = quadratic_hamiltonian([1.0, 2.0, 0.5])
        for x in rng.uniform(0.5, 2.0, size=(10, 3)):
            assert abs(bracket(kmk_spec, H, H, x)) <= 1e-13

    def test_skew(self, toda3_spec, rng):
        f = quadratic_hamiltonian([1.0, 0.5, 2.0, 1.0, 0.3])
        g = linear_hamiltonian([0.2, -1.0, 0.4, 0.0, 1.0])
        for x in toda3_spec.domain.halton_points(10, seed=3):
            assert bracket(toda3_spec, f, g, x) == pytest.approx(
                -bracket(toda3_spec, g, f, x), abs=1e-13
            )

    def test_casimir_commutes_with_everything(self, kmk_spec, rng):
        C = linear_hamiltonian([1.0, 1.0, 1.0])
        f = quadratic_hamiltonian([1.0, 2.0, 3.0])
        for x in rng.uniform(0.5, 2.0, size=(10, 3)):
            assert bracket(kmk_spec, f, C, x) == 0.0

    def test_toda_elementary_brackets(self, toda3_spec):
        x = np.array([1.3, 0.8, 0.2, -0.4, 0.6])
        alpha1 = coordinate_hamiltonian(1, 5)
        beta1 = coordinate_hamiltonian(3, 5)
        beta2 = coordinate_hamiltonian(4, 5)
        assert bracket(toda3_spec, alpha1, beta1, x) == pytest.approx(-1.3, abs=1e-14)
        assert bracket(toda3_spec, alpha1, beta2, x) == pytest.approx(1.3, abs=1e-14)


class TestIntegrateDirect:
    def test_zero_steps(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 1.0, 1.0])
        rec = integrate_direct(kmk_spec, H, [1.0, 1.0, 1.0], 0.1, 0)
        assert rec.num_records == 1
        assert rec.times[0] == 0.0
        np.testing.assert_array_equal(rec.states[0], [1.0, 1.0, 1.0])

    def test_casimir_hamiltonian_constant_trajectory(self, kmk_spec):
        H = linear_hamiltonian([1.0, 1.0, 1.0])
        rec = integrate_direct(kmk_spec, H, [1.0, 1.2, 0.8], 0.01, 100)
        assert np.all(rec.states == rec.states[0])
        assert rec.max_energy_drift() == 0.0

    def test_rk4_invariant_drift_small(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 1.0, 1.0])
        rec = integrate_direct(kmk_spec, H, [1.0, 1.2, 0.8], 1e-3, 10_000)
        assert rec.max_casimir_drift() <= 1e-8
        assert rec.max_energy_drift() <= 1e-8 * abs(
            H.value_at([1.0, 1.2, 0.8])
        )

    def test_rk4_energy_drift_fourth_order(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 2.0, 0.5])
        x0 = [1.0, 1.2, 0.8]
        drift = []
        for dt in (0.02, 0.01):
            rec = integrate_direct(kmk_spec, H, x0, dt, int(round(4.0 / dt)))
            drift.append(rec.max_energy_drift())
        assert 8.0 <= drift[0] / drift[1] <= 32.0

    def test_implicit_midpoint_matches_rk4(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 2.0, 0.5])
        x0 = [1.0, 1.2, 0.8]
        a = integrate_direct(kmk_spec, H, x0, 1e-3, 1000, method="rk4")
        b = integrate_direct(kmk_spec, H, x0, 1e-3, 1000, method="implicit-midpoint")
        np.testing.assert_allclose(a.final_state, b.final_state, atol=1e-5)

    def test_domain_exit_truncates(self):
        box = BoxDomain([-1.0, -1.0], [1.0, 1.0])
        spec = build_spec(2, 2, np.eye(2), (Constant(1.0), Constant(1.0)), box)
        # constant drift dx/dt = (0, -1) marches x2 through the wall
        H = linear_hamiltonian([1.0, 0.0])
        rec = integrate_direct(spec, H, [0.0, 0.0], 0.3, 10)
        assert rec.domain_exit
        assert rec.num_records < 11
        assert all(box.contains(x) for x in rec.states)

    def test_newton_failure_raises(self):
        spec = constant_symplectic(1, 2)
        H = HamiltonianField(
            value=lambda x: float(np.sum(x**4)), gradient=lambda x: 4.0 * x**3
        )
        with pytest.raises(MaxNewtonIterationsError):
            integrate_direct(spec, H, [1.0, 0.5], 50.0, 3, method="implicit-midpoint")

    def test_input_validation(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            integrate_direct(kmk_spec, H, [1.0, 1.0, 1.0], -0.1, 10)
        with pytest.raises(ValueError):
            integrate_direct(kmk_spec, H, [1.0, 1.0, 1.0], 0.1, -1)
        with pytest.raises(ValueError):
            integrate_direct(kmk_spec, H, [1.0, 1.0, 1.0], 0.1, 10, method="euler")


class TestIntegrateCanonical:
    def test_casimir_drift_round_trip_only(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 2.0, 0.5])
        rec = integrate_canonical(kmk_spec, H, [1.0, 1.2, 0.8], 1e-3, 1000)
        assert rec.max_casimir_drift() <= 1e-10

    def test_rank_zero_constant(self):
        spec = constant_symplectic(0, 3)
        H = quadratic_hamiltonian([1.0, 1.0, 1.0])
        rec = integrate_canonical(spec, H, [0.3, 0.2, 0.1], 0.1, 20)
        assert np.all(rec.states == rec.states[0])

    def test_energy_bounded_no_secular_drift(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 1.0, 1.0])
        rec = integrate_canonical(kmk_spec, H, [1.0, 1.2, 0.8], 1e-3, 5000)
        assert rec.max_energy_drift() <= 1e-5 * abs(H.value_at([1.0, 1.2, 0.8]))

    def test_direct_and_canonical_agree(self, kmk_spec, toda3_spec):
        cases = [
            (kmk_spec, quadratic_hamiltonian([1.0, 2.0, 0.5]), [1.0, 1.2, 0.8]),
            (
                toda3_spec,
                quadratic_hamiltonian(np.ones(5)),
                [1.0, 0.8, 0.3, -0.2, 0.4],
            ),
        ]
        for spec, H, x0 in cases:
            a = integrate_direct(spec, H, x0, 1e-3, 1000, method="rk4")
            b = integrate_canonical(spec, H, x0, 1e-3, 1000)
            assert float(np.max(np.abs(a.final_state - b.final_state))) <= 1e-4

    def test_reuses_supplied_chart(self, toda3_spec):
        chart = darboux_chart(toda3_spec)
        H = quadratic_hamiltonian(np.ones(5))
        rec = integrate_canonical(
            toda3_spec, H, [1.0, 0.8, 0.3, -0.2, 0.4], 1e-2, 10, chart=chart
        )
        assert rec.num_records == 11
        assert np.all(np.diff(rec.times) > 0)


class TestTrajectoryCsv:
    def test_header_and_shape(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 1.0, 1.0])
        rec = integrate_direct(kmk_spec, H, [1.0, 1.0, 1.0], 0.5, 2)
        text = trajectory_to_csv(rec)
        lines = text.strip().split("\n")
        assert lines[0] == "t,x1,x2,x3,dH,dC_3"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "0" and len(first) == 6

    def test_toda_header_single_casimir_column(self, toda3_spec):
        H = quadratic_hamiltonian(np.ones(5))
        rec = integrate_direct(toda3_spec, H, [1.0, 0.8, 0.3, -0.2, 0.4], 0.1, 1)
        header = trajectory_to_csv(rec).split("\n", 1)[0]
        assert header == "t,x1,x2,x3,x4,x5,dH,dC_5"

    def test_deterministic_bytes(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 2.0, 0.5])
        rec1 = integrate_direct(kmk_spec, H, [1.0, 1.2, 0.8], 1e-2, 50)
        rec2 = integrate_direct(kmk_spec, H, [1.0, 1.2, 0.8], 1e-2, 50)
        assert trajectory_to_csv(rec1) == trajectory_to_csv(rec2)

    def test_values_round_trip(self, kmk_spec):
        H = quadratic_hamiltonian([1.0, 2.0, 0.5])
        rec = integrate_direct(kmk_spec, H, [1.0, 1.2, 0.8], 1e-2, 5)
        lines = trajectory_to_csv(rec).strip().split("\n")[1:]
        parsed = np.array([[float(v) for v in line.split(",")] for line in lines])
        np.testing.assert_array_equal(parsed[:, 1:4], rec.states)
        np.testing.assert_array_equal(parsed[:, 4], rec.energy_drift)


def test_record_stride_thinning():
    assert _record_stride(10) == 1
    assert _record_stride(1_000_000) == 1
    assert _record_stride(2_000_000) == 2
    assert _record_stride(10_000_001) == 11
