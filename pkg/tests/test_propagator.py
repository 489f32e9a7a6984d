import numpy as np
import pytest

from oracles import dense_hamiltonian, rk4_evolve, rk4_evolve_piecewise

from xychain import (
    AmplitudeVector,
    BandedHamiltonian,
    ChainSpec,
    FieldProfile,
    NoiseStream,
    PerturbationCase,
    PhaseUndefinedError,
    build_hamiltonian,
    diagonalize,
    evolve_piecewise,
    evolve_static,
    piecewise_site_series,
    relative_phase,
    sample_perturbation,
    site_amplitude_series,
    site_fidelity,
    superposition_fidelity,
)


def random_chain(N, seed, amp=3.0, J=1.0):
    rng = np.random.default_rng(seed)
    field = tuple(rng.uniform(-amp, amp, N))
    return ChainSpec(N, FieldProfile("custom", 0.0, field), J=J)


class TestDiagonalize:
    def test_single_site(self):
        spec = diagonalize(BandedHamiltonian([2.5], []))
        assert spec.eigenvalues[0] == 2.5
        assert spec.eigenvectors[0, 0] == 1.0

    def test_two_site_zero_field(self):
        spec = diagonalize(build_hamiltonian(ChainSpec(2)))
        np.testing.assert_allclose(spec.eigenvalues, [-0.5, 0.5], atol=1e-14)

    def test_open_chain_closed_form(self):
        # tridiagonal with constant off-diagonal b: lambda_k = 2 b cos(k pi / (N+1))
        N = 3
        spec = diagonalize(build_hamiltonian(ChainSpec(N)))
        want = np.sort(2.0 * (-0.5) * np.cos(np.arange(1, N + 1) * np.pi / (N + 1)))
        np.testing.assert_allclose(spec.eigenvalues, want, atol=1e-14)

    def test_orthonormal_and_reconstructs(self):
        H = build_hamiltonian(random_chain(40, seed=1, amp=5.0))
        spec = diagonalize(H)
        W = spec.eigenvectors
        np.testing.assert_allclose(W.T @ W, np.eye(40), atol=1e-10)
        dense = (W * spec.eigenvalues) @ W.T
        rho = np.max(np.abs(spec.eigenvalues))
        np.testing.assert_allclose(dense, H.dense(), atol=1e-10 * rho)
        assert np.all(np.diff(spec.eigenvalues) >= 0)

    def test_deterministic_signs(self):
        H = build_hamiltonian(random_chain(17, seed=2))
        a = diagonalize(H)
        b = diagonalize(H)
        assert np.array_equal(a.eigenvectors, b.eigenvectors)
        lead = np.argmax(np.abs(a.eigenvectors), axis=0)
        assert np.all(a.eigenvectors[lead, np.arange(17)] > 0)


class TestEvolveStatic:
    def test_t_zero_is_identity(self):
        spec = diagonalize(build_hamiltonian(random_chain(9, seed=3)))
        psi0 = AmplitudeVector.site_basis(9, 4)
        out = evolve_static(spec, psi0, 0.0)
        np.testing.assert_allclose(out.amplitudes, psi0.amplitudes, atol=1e-14)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
    def test_two_site_law(self, t):
        # H = -(J/2) X in the site basis, so |c_1(t)| = |cos(t/2)| at J = 1
        spec = diagonalize(build_hamiltonian(ChainSpec(2)))
        out = evolve_static(spec, AmplitudeVector.site_basis(2, 1), t)
        assert abs(out.amplitudes[0]) == pytest.approx(abs(np.cos(t / 2.0)), abs=1e-12)
        oracle = rk4_evolve(dense_hamiltonian(np.zeros(2)), [1.0, 0.0], t)
        np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(oracle), atol=1e-8)

    def test_norm_conserved(self):
        spec = diagonalize(build_hamiltonian(random_chain(30, seed=4, amp=8.0)))
        rng = np.random.default_rng(5)
        psi = rng.normal(size=30) + 1j * rng.normal(size=30)
        psi /= np.linalg.norm(psi)
        state = AmplitudeVector(psi)
        for t in (-7.3, 0.02, 1.0, 50.0):
            assert abs(evolve_static(spec, state, t).norm() - 1.0) < 1e-10

    def test_matches_rk4_oracle(self):
        chain = random_chain(12, seed=6, amp=2.0)
        spec = diagonalize(build_hamiltonian(chain))
        out = evolve_static(spec, AmplitudeVector.site_basis(12, 1), 5.0)
        oracle = rk4_evolve(dense_hamiltonian(chain.field()), AmplitudeVector.site_basis(12, 1).amplitudes, 5.0)
        np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(oracle), atol=1e-6)

    def test_dimension_mismatch(self):
        spec = diagonalize(build_hamiltonian(ChainSpec(4)))
        with pytest.raises(ValueError):
            evolve_static(spec, AmplitudeVector.site_basis(5, 1), 1.0)


class TestSiteAmplitudeSeries:
    def test_agrees_with_full_evolution(self):
        chain = random_chain(15, seed=7)
        spec = diagonalize(build_hamiltonian(chain))
        times = np.linspace(0.0, 12.0, 77)
        series = site_amplitude_series(spec, 3, times)
        for k in (0, 10, 40, 76):
            full = evolve_static(spec, AmplitudeVector.site_basis(15, 3), times[k])
            assert abs(series[k] - full.amplitudes[2]) < 1e-10

    def test_starts_at_exactly_one(self):
        spec = diagonalize(build_hamiltonian(ChainSpec(100, FieldProfile("parabola", 60.0))))
        series = site_amplitude_series(spec, 1, np.array([0.0]))
        assert series[0] == 1.0


class TestEvolvePiecewise:
    def test_constant_generator_matches_static(self):
        chain = random_chain(14, seed=8)
        H = build_hamiltonian(chain)
        spec = diagonalize(H)
        grid = np.linspace(0.0, 8.0, 33)
        traj = evolve_piecewise(lambda k: H, AmplitudeVector.site_basis(14, 2), grid, tau=0.7)
        for state in traj[::4]:
            ref = evolve_static(spec, AmplitudeVector.site_basis(14, 2), state.t)
            np.testing.assert_allclose(state.amplitudes, ref.amplitudes, atol=1e-7)

    def test_single_interval_consistency(self):
        chain = random_chain(10, seed=9)
        H = build_hamiltonian(chain)
        spec = diagonalize(H)
        t = 3.7
        traj = evolve_piecewise(lambda k: H, AmplitudeVector.site_basis(10, 1), [0.0, t], tau=10.0)
        ref = evolve_static(spec, AmplitudeVector.site_basis(10, 1), t)
        np.testing.assert_allclose(traj[-1].amplitudes, ref.amplitudes, atol=1e-8)

    def test_static_field_matches_rk4(self):
        chain = random_chain(20, seed=10, amp=4.0)
        H = build_hamiltonian(chain)
        psi0 = AmplitudeVector.site_basis(20, 1)
        traj = evolve_piecewise(lambda k: H, psi0, [0.0, 10.0], tau=0.5)
        oracle = rk4_evolve(dense_hamiltonian(chain.field()), psi0.amplitudes, 10.0)
        np.testing.assert_allclose(np.abs(traj[-1].amplitudes), np.abs(oracle), atol=1e-6)

    def test_noisy_intervals_match_rk4(self):
        chain = ChainSpec(12, FieldProfile("parabola", 5.0))
        case = PerturbationCase(4, eta=0.3, tau=0.5)
        stream = NoiseStream(21, 0)
        field = chain.field()

        def banded(k):
            return build_hamiltonian(chain, field, sample_perturbation(case, chain, stream, k))

        def dense(k):
            s = sample_perturbation(case, chain, stream, k)
            return dense_hamiltonian(field, coupling_shift=s.coupling_shift)

        traj = evolve_piecewise(banded, AmplitudeVector.site_basis(12, 1), [0.0, 6.0], tau=0.5)
        oracle = rk4_evolve_piecewise(dense, AmplitudeVector.site_basis(12, 1).amplitudes, 12, 0.5)
        np.testing.assert_allclose(np.abs(traj[-1].amplitudes), np.abs(oracle), atol=1e-6)

    def test_site_series_matches_full_walk(self):
        chain = ChainSpec(9, FieldProfile("sine", 2.0))
        H = build_hamiltonian(chain)
        grid = np.linspace(0.0, 5.0, 26)
        traj = evolve_piecewise(lambda k: H, AmplitudeVector.site_basis(9, 1), grid, tau=0.3)
        series = piecewise_site_series(lambda k: H, 1, grid, 0.3, N=9)
        got = np.array([s.amplitudes[0] for s in traj])
        np.testing.assert_allclose(series, got, atol=1e-12)

    def test_norm_over_long_trajectory(self):
        chain = ChainSpec(30, FieldProfile("parabola", 20.0))
        case = PerturbationCase(4, eta=0.1, tau=0.1)
        stream = NoiseStream(33, 0)
        field = chain.field()

        def banded(k):
            return build_hamiltonian(chain, field, sample_perturbation(case, chain, stream, k))

        grid = np.linspace(0.0, 50.0, 11)
        traj = evolve_piecewise(banded, AmplitudeVector.site_basis(30, 1), grid, tau=0.1)
        for state in traj:
            assert abs(state.norm() - 1.0) < 1e-8

    def test_grid_validation(self):
        H = build_hamiltonian(ChainSpec(4))
        psi = AmplitudeVector.site_basis(4, 1)
        with pytest.raises(ValueError):
            evolve_piecewise(lambda k: H, psi, [0.0, 2.0, 1.0], tau=0.5)
        with pytest.raises(ValueError):
            evolve_piecewise(lambda k: H, psi, [0.0, 1.0], tau=0.0)
        with pytest.raises(ValueError):
            evolve_piecewise(lambda k: H, psi, [0.5, 1.0], tau=0.5)


class TestInvariances:
    times = np.linspace(0.2, 9.0, 23)

    def fidelities(self, field, J=1.0):
        N = len(field)
        chain = ChainSpec(N, FieldProfile("custom", 0.0, tuple(field)), J=J)
        spec = diagonalize(build_hamiltonian(chain))
        return np.array([np.abs(site_amplitude_series(spec, j, self.times)) for j in range(1, N + 1)])

    def test_field_sign_invariance(self):
        field = np.random.default_rng(12).uniform(-4, 4, 16)
        np.testing.assert_allclose(self.fidelities(field), self.fidelities(-field), atol=1e-10)

    def test_coupling_sign_invariance(self):
        field = np.random.default_rng(13).uniform(-4, 4, 16)
        np.testing.assert_allclose(self.fidelities(field, J=1.0), self.fidelities(field, J=-1.0), atol=1e-10)

    def test_constant_shift_invariance(self):
        chain = random_chain(14, seed=14)
        H = build_hamiltonian(chain)
        shifted = BandedHamiltonian(H.diag + 7.31, H.band1, H.band2)
        a = site_amplitude_series(diagonalize(H), 1, self.times)
        b = site_amplitude_series(diagonalize(shifted), 1, self.times)
        np.testing.assert_allclose(np.abs(a), np.abs(b), atol=1e-10)

    def test_time_reversal(self):
        spec = diagonalize(build_hamiltonian(random_chain(11, seed=15)))
        psi0 = AmplitudeVector.site_basis(11, 5)
        for t in (0.3, 2.0, 11.0):
            fwd = evolve_static(spec, psi0, t)
            bwd = evolve_static(spec, psi0, -t)
            np.testing.assert_allclose(np.abs(fwd.amplitudes), np.abs(bwd.amplitudes), atol=1e-10)

    def test_mirror_symmetry(self):
        chain = ChainSpec(12, FieldProfile("parabola", 6.0))
        spec = diagonalize(build_hamiltonian(chain))
        for j in (1, 3, 6):
            a = np.abs(site_amplitude_series(spec, j, self.times))
            b = np.abs(site_amplitude_series(spec, 13 - j, self.times))
            np.testing.assert_allclose(a, b, atol=1e-10)


class TestObservables:
    def test_site_fidelity(self):
        psi = AmplitudeVector.site_basis(6, 2)
        assert site_fidelity(psi, 2) == 1.0
        assert site_fidelity(psi, 1) == 0.0
        quarter = AmplitudeVector(np.full(4, 0.5 + 0j))
        assert site_fidelity(quarter, 3) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            site_fidelity(psi, 7)

    def test_phase_zero_at_t_zero(self):
        psi = AmplitudeVector.site_basis(5, 1)
        assert relative_phase(psi, 1, np.zeros(5), 0.0) == 0.0

    @pytest.mark.parametrize("t", [0.3, 1.0])
    def test_single_site_closed_form(self, t):
        h = 1.7
        chain = ChainSpec(1, FieldProfile("custom", 0.0, (h,)), J=0.0)
        field = chain.field()
        spec = diagonalize(build_hamiltonian(chain, field))
        psi = evolve_static(spec, AmplitudeVector.site_basis(1, 1), t)
        # diag = -h/2 and E_vac = +h/2, so theta(t) = arg(e^{+i h t/2} e^{+i h t/2})
        diag = -0.5 * h
        e_vac = 0.5 * h
        want = np.angle(np.exp(-1j * diag * t) * np.exp(1j * e_vac * t))
        assert relative_phase(psi, 1, field, t) == pytest.approx(want, abs=1e-12)

    def test_two_site_phase_is_zero_or_pi(self):
        spec = diagonalize(build_hamiltonian(ChainSpec(2)))
        field = np.zeros(2)
        for t in (0.5, 2.0, 4.0):  # cos(t/2) keeps a safe magnitude here
            psi = evolve_static(spec, AmplitudeVector.site_basis(2, 1), t)
            theta = relative_phase(psi, 1, field, t)
            assert min(abs(theta), abs(abs(theta) - np.pi)) < 1e-10

    def test_phase_undefined_at_zero_amplitude(self):
        spec = diagonalize(build_hamiltonian(ChainSpec(2)))
        psi = evolve_static(spec, AmplitudeVector.site_basis(2, 1), np.pi)  # cos(pi/2) = 0
        with pytest.raises(PhaseUndefinedError):
            relative_phase(psi, 1, np.zeros(2), np.pi)

    def test_superposition_fidelity(self):
        assert superposition_fidelity(1.0, 0.0, 0.3, 2.0) == 1.0
        assert superposition_fidelity(0.0, 1.0, 0.73, 0.0) == pytest.approx(0.73)
        r = 1.0 / np.sqrt(2.0)
        assert superposition_fidelity(r, r, 0.9, 0.0) == pytest.approx(0.95, abs=1e-12)
        with pytest.raises(ValueError):
            superposition_fidelity(1.0, 0.5, 0.9, 0.0)
        with pytest.raises(ValueError):
            superposition_fidelity(1.0, 0.0, 1.5, 0.0)

    def test_retrieval_bound_at_zero_phase(self):
        # f >= F for every normalized (alpha, beta) when theta = 0
        for F in (0.0, 0.37, 0.9, 1.0):
            for wa in np.linspace(0.0, 1.0, 11):
                for phase in np.linspace(0.0, 2.0 * np.pi, 7):
                    alpha = np.sqrt(wa) * np.exp(1j * phase)
                    beta = np.sqrt(1.0 - wa) * np.exp(-1j * 0.4 * phase)
                    assert superposition_fidelity(alpha, beta, F, 0.0) >= F - 1e-12
