import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from django.test import SimpleTestCase

from simulator.dynamics import (
    DensityMatrix,
    StateVector,
    expectation,
    krylov_expm_action,
    liouvillian,
    overlap,
    propagate_density,
    propagate_state,
    sample_times,
)
from simulator.exceptions import BasisMismatchError, NonHermitianError, ParameterError
from simulator.hamiltonian import (
    DecoherenceParams,
    HamiltonianSpec,
    build_hamiltonian,
    build_jump_operators,
    closure_generators,
)
from simulator.hilbert import (
    BasisState,
    OperatorMatrix,
    SubspaceBasis,
    SystemLayout,
    enumerate_reachable,
    number_operator,
)
from simulator.zeno import sector_basis

FLAGGED = BasisState.from_label("g1 g2 sA | 0 0")


def flagged_system(omega=0.1, delta=1.0):
    spec = HamiltonianSpec.ideal(3, omega, delta)
    basis = sector_basis(spec, FLAGGED)
    return build_hamiltonian(spec, basis), StateVector.basis_state(basis, FLAGGED)


class SampleTimesTests(SimpleTestCase):
    def test_grids(self):
        self.assertEqual(sample_times(0.0).tolist(), [0.0])
        np.testing.assert_allclose(sample_times(1.0, samples=3), [0.0, 0.5, 1.0])
        np.testing.assert_allclose(sample_times(1.0, 0.3), [0.0, 0.3, 0.6, 0.9, 1.0])

    def test_invalid(self):
        with self.assertRaises(ParameterError):
            sample_times(-1.0)
        with self.assertRaises(ParameterError):
            sample_times(1.0, samples=1)
        with self.assertRaises(ParameterError):
            sample_times(1.0, 0.0)


class KrylovTests(SimpleTestCase):
    def test_matches_dense_exponential(self):
        rng = np.random.default_rng(7)
        raw = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
        hermitian = (raw + raw.conj().T) / 2
        generator = -1j * hermitian
        vector = rng.normal(size=50) + 1j * rng.normal(size=50)
        vector /= np.linalg.norm(vector)
        exact = la.expm(generator * 2.0) @ vector
        approx = krylov_expm_action(lambda v: generator @ v, vector, 2.0, krylov_dim=20, tolerance=1e-12)
        self.assertLessEqual(np.linalg.norm(exact - approx), 1e-9)

    def test_zero_time_is_identity(self):
        vector = np.array([1.0, 2.0j])
        np.testing.assert_array_equal(krylov_expm_action(lambda v: v, vector, 0.0), vector)


class StateTests(SimpleTestCase):
    def test_shapes_checked(self):
        _, psi = flagged_system()
        with self.assertRaises(BasisMismatchError):
            StateVector(psi.basis, np.ones(3))
        with self.assertRaises(BasisMismatchError):
            DensityMatrix(psi.basis, np.eye(2))

    def test_density_from_state(self):
        H, psi = flagged_system()
        rho = DensityMatrix.from_state(psi)
        self.assertAlmostEqual(rho.trace(), 1.0)
        self.assertEqual(rho.population(FLAGGED), 1.0)
        self.assertAlmostEqual(expectation(H, rho).real, expectation(H, psi).real)
        self.assertEqual(overlap(psi, psi), 1.0)


class UnitaryPropagationTests(SimpleTestCase):
    def test_norm_preserved_over_long_run(self):
        H, psi = flagged_system()
        series, final = propagate_state(H, psi, 2200.0, samples=101)
        self.assertLessEqual(np.max(np.abs(series["norm"] - 1.0)), 1e-9)
        self.assertAlmostEqual(final.norm(), 1.0, places=9)

    def test_energy_and_excitations_conserved(self):
        H, psi = flagged_system()
        counter = number_operator(psi.basis).matrix
        series, _ = propagate_state(
            H,
            psi,
            500.0,
            samples=51,
            observables={
                "energy": lambda v: np.vdot(v, H.matrix @ v).real,
                "excitations": lambda v: np.vdot(v, counter @ v).real,
            },
        )
        self.assertLessEqual(np.max(np.abs(series["energy"] - series["energy"][0])), 1e-9)
        self.assertLessEqual(np.max(np.abs(series["excitations"] - 1.0)), 1e-9)

    def test_step_halving_converges(self):
        H, psi = flagged_system(delta=0.0)
        _, coarse = propagate_state(H, psi, 100.0, samples=101)
        _, fine = propagate_state(H, psi, 100.0, samples=201)
        self.assertLessEqual(np.linalg.norm(coarse.amplitudes - fine.amplitudes), 1e-8)

    def test_krylov_matches_dense(self):
        H, psi = flagged_system()
        _, dense = propagate_state(H, psi, 300.0, samples=11)
        _, krylov = propagate_state(H, psi, 300.0, samples=11, dense_dim_limit=0, krylov_dim=5, tolerance=1e-12)
        self.assertLessEqual(np.linalg.norm(dense.amplitudes - krylov.amplitudes), 1e-8)

    def test_series_frame(self):
        H, psi = flagged_system()
        series, _ = propagate_state(H, psi, 10.0, samples=5, tracked=[FLAGGED])
        frame = series.to_frame(g_mhz=360.0)
        label = FLAGGED.label()
        self.assertEqual(list(frame.columns), ["gt", "t_ns", f"re({label})", f"im({label})", "norm"])
        self.assertEqual(len(frame.index), 5)
        self.assertAlmostEqual(series.at(f"amp({label})", 0.0), 1.0)
        self.assertAlmostEqual(series.population(FLAGGED)[0], 1.0)

    def test_exchanged_spectators_evolve_identically(self):
        spec = HamiltonianSpec.ideal(3, 0.1, 1.0)
        amplitudes = []
        for label in ("f1 g2 sA | 0 0", "g1 f2 sA | 0 0"):
            seed = BasisState.from_label(label)
            basis = sector_basis(spec, seed)
            series, _ = propagate_state(
                build_hamiltonian(spec, basis), StateVector.basis_state(basis, seed), 900.0, samples=101, tracked=[seed]
            )
            amplitudes.append(series.amplitude(seed))
        self.assertLessEqual(np.max(np.abs(amplitudes[0] - amplitudes[1])), 1e-12)

    def test_non_hermitian_rejected(self):
        H, psi = flagged_system()
        upper = OperatorMatrix(psi.basis, sp.triu(H.matrix, format="csr"))
        with self.assertRaises(NonHermitianError):
            propagate_state(upper, psi, 1.0)


class LindbladTests(SimpleTestCase):
    def open_system(self, kappa, gamma, delta=0.0):
        spec = HamiltonianSpec.ideal(3, 0.1, delta)
        decoherence = DecoherenceParams.uniform(spec.layout, kappa, gamma)
        basis = enumerate_reachable(
            spec.layout, [FLAGGED], closure_generators(spec, DecoherenceParams.uniform(spec.layout, 1.0, 1.0))
        )
        H = build_hamiltonian(spec, basis)
        jumps = build_jump_operators(decoherence, spec.layout, basis)
        return H, jumps, StateVector.basis_state(basis, FLAGGED)

    def test_trace_and_positivity(self):
        H, jumps, psi = self.open_system(0.05, 0.05)
        series, rho = propagate_density(H, jumps, DensityMatrix.from_state(psi), 50.0, samples=26)
        self.assertLessEqual(np.max(np.abs(series["trace"] - 1.0)), 1e-7)
        self.assertGreaterEqual(rho.min_eigenvalue(), -1e-7)
        self.assertLessEqual(rho.hermiticity_error(), 1e-12)
        self.assertLess(rho.population(FLAGGED), 1.0)

    def test_closed_limit_matches_unitary(self):
        H, jumps, psi = self.open_system(0.0, 0.0)
        _, rho = propagate_density(H, jumps, DensityMatrix.from_state(psi), 40.0, samples=5)
        _, final = propagate_state(H, psi, 40.0, samples=5)
        pure = np.outer(final.amplitudes, final.amplitudes.conj())
        self.assertLessEqual(np.max(np.abs(rho.matrix - pure)), 1e-8)

    def test_photon_loss_only_liouvillian_is_trace_free(self):
        H, jumps, _ = self.open_system(0.1, 0.0)
        generator = liouvillian(H, jumps)
        size = H.dim
        flat_identity = np.eye(size).reshape(-1)
        # d/dt Tr(rho) = vec(I)^T L vec(rho) must vanish for every rho
        self.assertLessEqual(np.max(np.abs(flat_identity @ generator.toarray())), 1e-12)

    def test_photon_decay_without_hamiltonian(self):
        layout = SystemLayout(3)
        photon = BasisState.from_label("g1 g2 gA | 1 0")
        vacuum = BasisState.from_label("g1 g2 gA | 0 0")
        basis = SubspaceBasis((photon, vacuum), layout)
        H = OperatorMatrix(basis, sp.csr_matrix((2, 2), dtype=complex), True, "H0")
        jumps = build_jump_operators(DecoherenceParams.uniform(layout, 0.05, 0.0), layout, basis)
        rho0 = DensityMatrix.from_state(StateVector.basis_state(basis, photon))
        series, _ = propagate_density(H, jumps, rho0, 40.0, samples=21, tracked=[photon, vacuum])
        expected = np.exp(-0.05 * series.times)
        self.assertLessEqual(np.max(np.abs(series.population(photon) - expected)), 1e-10)
        self.assertLessEqual(np.max(np.abs(series.population(vacuum) - (1.0 - expected))), 1e-10)

    def test_mismatched_bases(self):
        H, jumps, _ = self.open_system(0.1, 0.0)
        _, other = flagged_system()
        with self.assertRaises(BasisMismatchError):
            propagate_density(H, jumps, DensityMatrix.from_state(other), 1.0, samples=2)
