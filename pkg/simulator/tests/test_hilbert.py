from django.test import SimpleTestCase

from simulator.exceptions import BasisMismatchError, CapacityError, ClosureViolationError, LayoutError
from simulator.gates import ComputationalEncoding
from simulator.hamiltonian import (
    DecoherenceParams,
    HamiltonianSpec,
    build_H1,
    build_hamiltonian,
    closure_generators,
    hamiltonian_terms,
)
from simulator.hilbert import (
    BasisState,
    Dyad,
    ModeShift,
    OperatorTerm,
    QuditLevel,
    SubspaceBasis,
    SystemLayout,
    build_operator,
    commutator_norm,
    enumerate_reachable,
    excitation_number,
    identity_term,
    is_conjugation_closed,
    number_operator,
)

F, S, G, E = QuditLevel.F, QuditLevel.S, QuditLevel.G, QuditLevel.E


class LayoutTests(SimpleTestCase):
    def test_sites(self):
        layout = SystemLayout(3)
        self.assertEqual(layout.n_data, 2)
        self.assertEqual(layout.n_modes, 2)
        self.assertEqual(layout.central, 2)
        self.assertEqual(layout.site_name(0), "1")
        self.assertEqual(layout.site_name(2), "A")
        self.assertEqual(layout.qudit_index("A"), 2)
        self.assertEqual(layout.qudit_index("2"), 1)

    def test_invalid_layouts(self):
        with self.assertRaises(LayoutError):
            SystemLayout(1)
        with self.assertRaises(LayoutError):
            SystemLayout(3, n_max=0)
        with self.assertRaises(LayoutError):
            SystemLayout(3).qudit_index("3")

    def test_level_parsing(self):
        self.assertIs(QuditLevel.parse("s"), S)
        self.assertIs(QuditLevel.parse(3), E)
        with self.assertRaises(LayoutError):
            QuditLevel.parse("x")


class BasisStateTests(SimpleTestCase):
    def test_label(self):
        state = SystemLayout(3).state([G, F, S], [0, 1])
        self.assertEqual(state.label(), "g1 f2 sA | 0 1")
        self.assertEqual(state.qudit_part().label(), "g1 f2 sA")
        self.assertEqual(BasisState.from_label("g1 f2 sA | 0 1"), state)

    def test_label_out_of_order(self):
        with self.assertRaises(LayoutError):
            BasisState.from_label("f2 g1 sA")

    def test_check_against_layout(self):
        layout = SystemLayout(3)
        with self.assertRaises(LayoutError):
            BasisState((G, G, S), (0,)).check(layout)
        with self.assertRaises(LayoutError):
            BasisState((G, G, S), (2, 0)).check(layout)
        with self.assertRaises(LayoutError):
            BasisState((G, G, S), (-1, 0))

    def test_excitation_number(self):
        self.assertEqual(excitation_number(BasisState.from_label("g1 g2 sA | 0 0")), 1)
        self.assertEqual(excitation_number(BasisState.from_label("e1 g2 gA | 1 0")), 2)
        self.assertEqual(excitation_number(BasisState.from_label("f1 f2 fA | 0 0")), 0)

    def test_permuted_moves_modes_with_qudits(self):
        state = BasisState.from_label("e1 g2 gA | 1 0")
        self.assertEqual(state.permuted({0: 1, 1: 0}).label(), "g1 e2 gA | 0 1")


class OperatorTermTests(SimpleTestCase):
    def test_raising_above_cutoff_annihilates(self):
        state = BasisState.from_label("g1 g2 gA | 1 0")
        self.assertIsNone(ModeShift(0, raising=True).apply(state, 1))
        amplitude, image = ModeShift(0, raising=True).apply(state, 2)
        self.assertAlmostEqual(amplitude, 2**0.5)
        self.assertEqual(image.photons, (2, 0))

    def test_rightmost_action_first(self):
        term = OperatorTerm((ModeShift(0, raising=True), Dyad(2, G, E)), 0.5)
        amplitude, image = term.apply(BasisState.from_label("g1 g2 eA | 0 0"), 1)
        self.assertEqual(amplitude, 0.5)
        self.assertEqual(image.label(), "g1 g2 gA | 1 0")

    def test_site_used_twice(self):
        with self.assertRaises(LayoutError):
            OperatorTerm((Dyad(0, G, E), Dyad(0, E, G)))

    def test_conjugation_closure(self):
        raising = OperatorTerm((Dyad(2, E, S),), 0.1)
        self.assertFalse(is_conjugation_closed([raising]))
        self.assertTrue(is_conjugation_closed([raising, raising.dagger()]))


class ReachableSubspaceTests(SimpleTestCase):
    def setUp(self):
        self.spec = HamiltonianSpec.ideal(3, 0.1, 1.0)
        self.layout = self.spec.layout

    def sector(self, label):
        seed = BasisState.from_label(label)
        return enumerate_reachable(self.layout, [seed], hamiltonian_terms(self.spec))

    def test_sector_sizes(self):
        self.assertEqual(len(self.sector("f1 f2 fA | 0 0")), 1)
        self.assertEqual(len(self.sector("f1 f2 sA | 0 0")), 4)
        self.assertEqual(len(self.sector("f1 g2 sA | 0 0")), 5)
        self.assertEqual(len(self.sector("g1 g2 sA | 0 0")), 6)

    def test_flagged_sector_states(self):
        labels = set(self.sector("g1 g2 sA | 0 0").labels())
        self.assertEqual(
            labels,
            {
                "g1 g2 sA | 0 0",
                "g1 g2 eA | 0 0",
                "g1 g2 gA | 1 0",
                "g1 g2 gA | 0 1",
                "e1 g2 gA | 0 0",
                "g1 e2 gA | 0 0",
            },
        )

    def test_seed_comes_first_and_excitations_match(self):
        basis = self.sector("g1 g2 sA | 0 0")
        self.assertEqual(basis[0].label(), "g1 g2 sA | 0 0")
        self.assertEqual({excitation_number(state) for state in basis}, {1})

    def test_union_of_computational_seeds(self):
        seeds = ComputationalEncoding(self.layout).states
        basis = enumerate_reachable(self.layout, seeds, hamiltonian_terms(self.spec))
        self.assertEqual(len(basis), 24)

    def test_closure_is_idempotent(self):
        seeds = ComputationalEncoding(self.layout).states
        basis = enumerate_reachable(self.layout, seeds, hamiltonian_terms(self.spec))
        again = enumerate_reachable(self.layout, basis.states, hamiltonian_terms(self.spec))
        self.assertEqual(again.states, basis.states)

    def test_seven_qubit_flagged_sector(self):
        spec = HamiltonianSpec.ideal(7, 0.1, 1.0)
        seed = BasisState.from_label("g1 g2 g3 g4 g5 g6 sA | 0 0 0 0 0 0")
        basis = enumerate_reachable(spec.layout, [seed], hamiltonian_terms(spec))
        self.assertEqual(len(basis), 14)
        self.assertEqual({excitation_number(state) for state in basis}, {1})

    def test_zero_amplitude_still_connects(self):
        still = HamiltonianSpec.ideal(3, 0.0, 0.0)
        seed = BasisState.from_label("g1 g2 sA | 0 0")
        basis = enumerate_reachable(still.layout, [seed], hamiltonian_terms(still))
        self.assertEqual(len(basis), 6)

    def test_capacity(self):
        seed = BasisState.from_label("g1 g2 sA | 0 0")
        with self.assertRaises(CapacityError):
            enumerate_reachable(self.layout, [seed], hamiltonian_terms(self.spec), max_states=3)

    def test_jump_closure_is_larger(self):
        seeds = ComputationalEncoding(self.layout).states
        decoherence = DecoherenceParams.uniform(self.layout, 1.0, 1.0)
        basis = enumerate_reachable(self.layout, seeds, closure_generators(self.spec, decoherence))
        self.assertGreater(len(basis), 24)
        self.assertIn(BasisState.from_label("g1 g2 gA | 0 0"), basis)


class OperatorMatrixTests(SimpleTestCase):
    def setUp(self):
        self.spec = HamiltonianSpec.ideal(3, 0.1, 1.0)
        seed = BasisState.from_label("g1 g2 sA | 0 0")
        self.basis = enumerate_reachable(self.spec.layout, [seed], hamiltonian_terms(self.spec))

    def test_hamiltonian_is_hermitian(self):
        H = build_hamiltonian(self.spec, self.basis)
        self.assertTrue(H.hermitian)
        self.assertEqual(H.hermiticity_error(), 0.0)

    def test_one_sided_term_is_not_hermitian(self):
        op = build_operator([OperatorTerm((Dyad(2, E, S),), 0.1)], self.basis)
        self.assertFalse(op.hermitian)
        self.assertGreater(op.hermiticity_error(), 0.0)

    def test_excitation_number_conserved(self):
        H = build_hamiltonian(self.spec, self.basis)
        self.assertLessEqual(commutator_norm(H, number_operator(self.basis)), 1e-13)

    def test_term_leaving_basis(self):
        seed_only = SubspaceBasis((BasisState.from_label("g1 g2 sA | 0 0"),), self.spec.layout)
        with self.assertRaises(ClosureViolationError):
            build_H1(self.spec, seed_only)

    def test_position_of_missing_state(self):
        with self.assertRaises(BasisMismatchError):
            self.basis.position(BasisState.from_label("f1 f2 fA | 0 0"))

    def test_duplicate_states_rejected(self):
        state = BasisState.from_label("g1 g2 sA | 0 0")
        with self.assertRaises(LayoutError):
            SubspaceBasis((state, state))

    def test_identity_term(self):
        op = build_operator([identity_term()], self.basis)
        self.assertTrue(op.hermitian)
        self.assertEqual((op.toarray() != 0).sum(), len(self.basis))
        self.assertEqual(op.toarray().trace(), len(self.basis))
