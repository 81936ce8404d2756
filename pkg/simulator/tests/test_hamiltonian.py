import math

import numpy as np
from django.test import SimpleTestCase

from simulator.exceptions import LayoutError, ParameterError
from simulator.hamiltonian import (
    Couplings,
    DecoherenceParams,
    HamiltonianSpec,
    ModelParams,
    PulseParams,
    build_H1,
    build_H2,
    build_hamiltonian,
    build_jump_operators,
    closure_generators,
    hamiltonian_terms,
    jump_terms,
    rate_from_lifetime,
    swapped_spec,
    to_nanoseconds,
)
from simulator.hilbert import BasisState, QuditLevel, SystemLayout, enumerate_reachable, permutation_operator


def sector(spec, label):
    return enumerate_reachable(spec.layout, [BasisState.from_label(label)], hamiltonian_terms(spec))


class ParameterTests(SimpleTestCase):
    def test_pulse(self):
        self.assertTrue(PulseParams(0.1, 0.0).resonant)
        self.assertFalse(PulseParams(0.1, 1.0).resonant)
        with self.assertRaises(ParameterError):
            PulseParams(-0.1, 1.0)
        with self.assertRaises(ParameterError):
            PulseParams(float("nan"), 1.0)

    def test_mismatch(self):
        couplings = Couplings.uniform(SystemLayout(3)).with_mismatch([0.1, -0.05])
        self.assertEqual(tuple(round(g, 12) for g in couplings.g_data), (1.1, 0.95))
        self.assertEqual(couplings.g_central, 1.0)
        with self.assertRaises(ParameterError):
            couplings.with_mismatch([0.1])

    def test_coupling_count_must_match_layout(self):
        with self.assertRaises(LayoutError):
            HamiltonianSpec(SystemLayout(3), PulseParams(0.1, 1.0), Couplings((1.0,)))

    def test_decoherence_rates(self):
        layout = SystemLayout(3)
        params = DecoherenceParams.uniform(layout, 0.01, 0.002)
        self.assertEqual(params.kappa, (0.01, 0.01))
        self.assertEqual(params.rate(2, QuditLevel.S), 0.002)
        self.assertTrue(params.is_dissipative)
        self.assertFalse(DecoherenceParams.uniform(layout).is_dissipative)
        with self.assertRaises(ParameterError):
            DecoherenceParams((-0.1, 0.0))
        with self.assertRaises(ParameterError):
            DecoherenceParams((0.0, 0.0), {(0, QuditLevel.E): 0.1})


class ModelParamsTests(SimpleTestCase):
    def test_defaults(self):
        params = ModelParams()
        self.assertEqual(params.couplings().g_data, (1.0, 1.0))
        self.assertEqual(params.hamiltonian_spec().pulse, PulseParams(0.1, 1.0))
        self.assertFalse(params.decoherence().is_dissipative)

    def test_overrides(self):
        params = ModelParams(kappa=(0.01,), gamma=0.001, gamma_overrides=(("A_s", 0.005),))
        decoherence = params.decoherence()
        self.assertEqual(decoherence.kappa, (0.01, 0.01))
        self.assertEqual(decoherence.rate(2, QuditLevel.S), 0.005)
        self.assertEqual(decoherence.rate(2, QuditLevel.G), 0.001)
        self.assertEqual(decoherence.rate(0, QuditLevel.S), 0.001)

    def test_broadcast_length(self):
        with self.assertRaises(LayoutError):
            ModelParams(g_data=(1.0, 1.0, 1.0)).couplings()

    def test_from_dict(self):
        params = ModelParams(n_qubits=4, omega=0.05, g_data=(1.1, 0.9, 1.0), gamma_overrides=(("2_g", 0.01),))
        self.assertEqual(ModelParams.from_dict(params.as_dict()).hamiltonian_spec(), params.hamiltonian_spec())
        self.assertEqual(ModelParams.from_dict(params.as_dict()).decoherence(), params.decoherence())


class HamiltonianTests(SimpleTestCase):
    def setUp(self):
        self.spec = HamiltonianSpec.ideal(3, 0.1, 1.0)
        self.basis = sector(self.spec, "g1 g2 sA | 0 0")

    def test_sum_of_parts(self):
        H = build_hamiltonian(self.spec, self.basis).toarray()
        parts = build_H1(self.spec, self.basis).toarray() + build_H2(self.spec, self.basis).toarray()
        self.assertTrue(np.allclose(H, parts, atol=0.0))

    def test_matrix_elements(self):
        H = build_hamiltonian(self.spec, self.basis)
        seed = self.basis.position(BasisState.from_label("g1 g2 sA | 0 0"))
        excited = self.basis.position(BasisState.from_label("g1 g2 eA | 0 0"))
        emitted = self.basis.position(BasisState.from_label("g1 g2 gA | 1 0"))
        absorbed = self.basis.position(BasisState.from_label("e1 g2 gA | 0 0"))
        dense = H.toarray()
        self.assertAlmostEqual(dense[excited, seed], 0.1)
        self.assertAlmostEqual(dense[excited, excited], 1.0)
        self.assertAlmostEqual(dense[emitted, excited], 1.0)
        self.assertAlmostEqual(dense[absorbed, emitted], 1.0)
        self.assertAlmostEqual(dense[absorbed, absorbed], 1.0)

    def test_resonant_drops_detuning(self):
        resonant = HamiltonianSpec.ideal(3, 0.1, 0.0)
        h1 = build_H1(resonant, self.basis).toarray()
        self.assertEqual(np.count_nonzero(np.diag(h1)), 0)

    def test_exchange_symmetry(self):
        spec = HamiltonianSpec(self.spec.layout, self.spec.pulse, Couplings((1.05, 0.93)))
        swapped = swapped_spec(spec, 0, 1)
        source = sector(spec, "f1 g2 sA | 0 0")
        target = sector(swapped, "g1 f2 sA | 0 0")
        P = permutation_operator(source, target, {0: 1, 1: 0})
        moved = (P @ build_hamiltonian(spec, source).matrix @ P.conj().T).toarray()
        self.assertLessEqual(np.max(np.abs(moved - build_hamiltonian(swapped, target).toarray())), 1e-12)


class JumpOperatorTests(SimpleTestCase):
    def test_channel_order(self):
        layout = SystemLayout(3)
        names = [channel.name for channel in jump_terms(DecoherenceParams.uniform(layout), layout)]
        self.assertEqual(
            names,
            [
                "a_1",
                "a_2",
                "sigma_g_1",
                "sigma_s_1",
                "sigma_f_1",
                "sigma_g_2",
                "sigma_s_2",
                "sigma_f_2",
                "sigma_g_A",
                "sigma_s_A",
                "sigma_f_A",
            ],
        )

    def test_jump_matrices_on_closed_basis(self):
        spec = HamiltonianSpec.ideal(3, 0.1, 1.0)
        decoherence = DecoherenceParams.uniform(spec.layout, 0.01, 0.02)
        seed = BasisState.from_label("g1 g2 sA | 0 0")
        basis = enumerate_reachable(spec.layout, [seed], closure_generators(spec, decoherence))
        channels = build_jump_operators(decoherence, spec.layout, basis)
        self.assertEqual(len(channels), 11)
        photon_loss = channels[0].operator.toarray()
        source = basis.position(BasisState.from_label("g1 g2 gA | 1 0"))
        target = basis.position(BasisState.from_label("g1 g2 gA | 0 0"))
        self.assertEqual(photon_loss[target, source], 1.0)
        self.assertEqual(channels[0].rate, 0.01)
        self.assertEqual(channels[-1].rate, 0.02)


class UnitTests(SimpleTestCase):
    def test_resonant_gate_times_in_nanoseconds(self):
        self.assertAlmostEqual(to_nanoseconds(math.sqrt(3) * math.pi / 0.1, 360.0), 24.06, delta=0.05)
        self.assertAlmostEqual(to_nanoseconds(math.sqrt(7) * math.pi / 0.1, 360.0), 36.75, delta=0.05)

    def test_rate_from_lifetime(self):
        self.assertAlmostEqual(rate_from_lifetime(1.0, 360.0), 1 / 2261.946710584651, places=12)
        with self.assertRaises(ParameterError):
            rate_from_lifetime(0.0, 360.0)
        with self.assertRaises(ParameterError):
            to_nanoseconds(1.0, -1.0)
