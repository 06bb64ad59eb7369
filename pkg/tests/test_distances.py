"""Trace distance, fidelity and the gentle-measurement bound.

Derived expectations were computed by hand from 2x2 eigenvalue problems and
are frozen below; sampled properties use fixed seeds.
"""

import numpy as np
import pytest

from qpzk.core import (
    MixedState,
    PureState,
    RegisterLayout,
    fidelity,
    gentle_post_state,
    random_density,
    random_pure_state,
    rng_from,
    trace_distance,
)
from qpzk.core.metrics import max_povm_advantage_dim2
from qpzk.core.sampling import random_projector
from qpzk.errors import ZeroProbabilityError

A = RegisterLayout.single("A", 1)
AB = RegisterLayout.of(("A", 1), ("B", 1))

KET0 = PureState.from_bits(A, "0")
KET1 = PureState.from_bits(A, "1")
PLUS = PureState(np.array([1, 1]) / np.sqrt(2), A)

# Eigenvalues of |0><0| - |+><+| are +/- sqrt(1/2), so Td = 1/sqrt(2).
TD_ZERO_PLUS = 0.7071067811865476


class TestTraceDistance:
    def test_self_distance_zero(self):
        rng = rng_from(1)
        rho = random_density(A, rng)
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        assert trace_distance(KET0, KET1) == pytest.approx(1.0, abs=1e-12)

    def test_zero_vs_plus_frozen_value(self):
        assert trace_distance(KET0, PLUS) == pytest.approx(TD_ZERO_PLUS, abs=1e-12)

    def test_symmetric(self):
        rng = rng_from(2)
        a, b = random_density(A, rng), random_density(A, rng)
        assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=1e-12)

    def test_equals_max_povm_advantage_on_qubits(self):
        # Operational meaning: best two-outcome distinguishing advantage.
        rng = rng_from(3)
        for _ in range(10):
            a, b = random_density(A, rng), random_density(A, rng)
            td = trace_distance(a, b)
            grid_max, eig_max = max_povm_advantage_dim2(a, b, grid=120)
            assert eig_max == pytest.approx(td, abs=1e-9)
            assert grid_max <= td + 1e-9
            assert grid_max >= td - 5e-4  # grid resolution slack


class TestFidelity:
    def test_self_fidelity_one(self):
        rng = rng_from(4)
        rho = random_density(A, rng)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_zero_vs_plus_squared_overlap(self):
        assert fidelity(KET0, PLUS) == pytest.approx(0.5, abs=1e-12)

    def test_maximally_mixed_vs_zero(self):
        # Closed form on 2x2 matrices gives exactly 1/2.
        mm = MixedState.maximally_mixed(A)
        assert fidelity(mm, KET0.to_mixed()) == pytest.approx(0.5, abs=1e-9)

    def test_pure_inputs_match_overlap(self):
        rng = rng_from(5)
        for _ in range(50):
            psi, phi = random_pure_state(AB, rng), random_pure_state(AB, rng)
            want = abs(psi.overlap(phi)) ** 2
            assert fidelity(psi.to_mixed(), phi.to_mixed()) == pytest.approx(want, abs=1e-9)
            assert fidelity(psi, phi) == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("qubits", [1, 2, 3])
    def test_reverse_triangle_inequality(self, qubits):
        lay = RegisterLayout.single("A", qubits)
        rng = rng_from(60 + qubits)
        for _ in range(300):
            r, s, t = (random_density(lay, rng) for _ in range(3))
            frs, fst, frt = fidelity(r, s), fidelity(s, t), fidelity(r, t)
            assert frs ** 2 + fst ** 2 <= 1.0 + frt + 1e-9


class TestGentleMeasurement:
    def test_state_in_image_is_untouched(self):
        p, post, bound = gentle_post_state(KET0.to_mixed(), np.diag([1.0, 0.0]))
        assert p == pytest.approx(1.0, abs=1e-12)
        assert bound == pytest.approx(0.0, abs=1e-6)
        assert np.allclose(post.matrix, KET0.density(), atol=1e-12)

    def test_plus_projected_to_zero(self):
        p, post, _ = gentle_post_state(PLUS.to_mixed(), np.diag([1.0, 0.0]))
        assert p == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(post.matrix, KET0.density(), atol=1e-12)

    def test_zero_probability_raises(self):
        with pytest.raises(ZeroProbabilityError):
            gentle_post_state(KET1.to_mixed(), np.diag([1.0, 0.0]))

    def test_bound_holds_on_random_instances(self):
        # Two-qubit states against random rank-2 projectors, p >= 1/2 slice.
        rng = rng_from(8)
        checked = 0
        while checked < 400:
            rho = random_density(AB, rng)
            pi = random_projector(4, 2, rng)
            if float(np.trace(pi @ rho.matrix).real) < 0.5:
                continue
            p, post, bound = gentle_post_state(rho, pi)
            assert trace_distance(rho, post) <= bound + 1e-9
            checked += 1
