import numpy as np
import pytest

from xychain import (
    ChainSpec,
    EnsembleSpec,
    FieldProfile,
    NoiseStream,
    PerturbationCase,
    build_hamiltonian,
    diagonalize,
    ensemble_average_fidelity,
    sample_perturbation,
    site_amplitude_series,
)

TIMES = np.linspace(0.0, 8.0, 41)


def small_chain(N=14, h_m=5.0):
    return ChainSpec(N, FieldProfile("parabola", h_m))


class TestEnsembleAveraging:
    def test_case0_equals_single_run(self):
        chain = small_chain()
        clean = diagonalize(build_hamiltonian(chain))
        single = np.abs(site_amplitude_series(clean, 1, TIMES))
        for n in (1, 5):
            ens = EnsembleSpec(n, 123, PerturbationCase(0))
            got = ensemble_average_fidelity(chain, ens, TIMES)
            np.testing.assert_allclose(got, single, atol=1e-12)

    def test_case4_zero_strength_equals_clean(self):
        chain = small_chain()
        clean = diagonalize(build_hamiltonian(chain))
        single = np.abs(site_amplitude_series(clean, 1, TIMES))
        ens = EnsembleSpec(3, 5, PerturbationCase(4, eta=0.0, tau=0.2))
        got = ensemble_average_fidelity(chain, ens, TIMES)
        np.testing.assert_allclose(got, single, atol=1e-7)

    def test_bitwise_determinism(self):
        chain = small_chain()
        for case in (PerturbationCase(1, epsilon=2.0), PerturbationCase(4, eta=0.2, tau=0.5)):
            ens = EnsembleSpec(6, 77, case)
            a = ensemble_average_fidelity(chain, ens, TIMES)
            b = ensemble_average_fidelity(chain, ens, TIMES)
            assert np.array_equal(a, b)

    def test_threaded_reduction_matches_serial(self):
        chain = small_chain()
        ens = EnsembleSpec(8, 31, PerturbationCase(2, gamma=0.3))
        serial = ensemble_average_fidelity(chain, ens, TIMES, threads=1)
        threaded = ensemble_average_fidelity(chain, ens, TIMES, threads=4)
        assert np.array_equal(serial, threaded)

    def test_bounds(self):
        chain = small_chain()
        ens = EnsembleSpec(10, 9, PerturbationCase(1, epsilon=4.0))
        F = ensemble_average_fidelity(chain, ens, TIMES)
        assert np.all(F >= 0.0)
        assert np.all(F <= 1.0 + 1e-12)

    def test_density_matrix_averaging_order(self):
        # Fbar is the sqrt of the mean population, not the mean of |c_j|
        chain = small_chain()
        case = PerturbationCase(1, epsilon=3.0)
        ens = EnsembleSpec(4, 2024, case)
        got = ensemble_average_fidelity(chain, ens, TIMES)
        pops = []
        for r in range(4):
            s = sample_perturbation(case, chain, NoiseStream(2024, r))
            spec = diagonalize(build_hamiltonian(chain, sample=s))
            pops.append(np.abs(site_amplitude_series(spec, 1, TIMES)) ** 2)
        want = np.sqrt(sum(pops) / 4.0)
        np.testing.assert_allclose(got, want, atol=1e-14)
        wrong_order = sum(np.sqrt(p) for p in pops) / 4.0
        assert np.max(np.abs(want - wrong_order)) > 1e-4

    def test_standard_error_scales_as_inverse_sqrt_n(self):
        chain = ChainSpec(12, FieldProfile("parabola", 4.0))
        case = PerturbationCase(1, epsilon=2.0)
        t_probe = np.array([2.0, 5.0])
        pops = []
        for r in range(800):
            s = sample_perturbation(case, chain, NoiseStream(55, r))
            spec = diagonalize(build_hamiltonian(chain, sample=s))
            pops.append(np.abs(site_amplitude_series(spec, 1, t_probe)) ** 2)
        pops = np.array(pops)

        def stderr(n):
            return pops[:n].std(axis=0, ddof=1) / np.sqrt(n)

        for n1, n2 in ((50, 200), (200, 800), (50, 800)):
            expected = np.sqrt(n2 / n1)
            ratio = stderr(n1) / stderr(n2)
            assert np.all(ratio > expected / 2.0)
            assert np.all(ratio < expected * 2.0)

    def test_validation(self):
        chain = small_chain()
        with pytest.raises(ValueError):
            EnsembleSpec(0, 1, PerturbationCase(0))
        ens = EnsembleSpec(1, 1, PerturbationCase(0))
        with pytest.raises(ValueError):
            ensemble_average_fidelity(chain, ens, np.array([1.0, 0.5]))
        with pytest.raises(ValueError):
            ensemble_average_fidelity(chain, ens, np.array([]))
