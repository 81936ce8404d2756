import os
import tempfile
from pathlib import Path

from django.test import SimpleTestCase, override_settings

from simulator.config import load_model_params, propagation_options, read_config_file, simulator_settings
from simulator.exceptions import ConfigError
from simulator.hilbert import QuditLevel

RUN_FILE = """\
# three-qubit gate, non-resonant
n_qubits=3
omega=0.1
delta=1.0
g_data=1.1,0.9
kappa=0.01
gamma=0.001
gamma_A_s=0.002
"""


class RunFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text, name="run.env"):
        path = Path(self.tmp.name) / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_read(self):
        values = read_config_file(self.write(RUN_FILE))
        self.assertEqual(
            values,
            {
                "n_qubits": 3,
                "omega": 0.1,
                "delta": 1.0,
                "g_data": (1.1, 0.9),
                "kappa": (0.01,),
                "gamma": 0.001,
                "gamma_overrides": (("A_s", 0.002),),
            },
        )

    def test_file_values_reach_the_model(self):
        params = load_model_params(self.write(RUN_FILE))
        self.assertEqual(params.couplings().g_data, (1.1, 0.9))
        decoherence = params.decoherence()
        self.assertEqual(decoherence.kappa, (0.01, 0.01))
        self.assertEqual(decoherence.rate(2, QuditLevel.S), 0.002)
        self.assertEqual(decoherence.rate(0, QuditLevel.S), 0.001)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            read_config_file(self.write("omega=0.1\ndrive=0.2\n"))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            read_config_file(Path(self.tmp.name) / "absent.env")

    def test_invalid_value(self):
        with self.assertRaises(ConfigError):
            read_config_file(self.write("n_qubits=three\n"))

    def test_reading_leaves_process_environment_alone(self):
        read_config_file(self.write("omega=0.3\n"))
        self.assertNotIn("omega", os.environ)


class LoadModelParamsTests(SimpleTestCase):
    def test_defaults(self):
        params = load_model_params()
        self.assertEqual((params.n_qubits, params.omega, params.delta), (3, 0.1, 1.0))

    def test_overrides_skip_none(self):
        params = load_model_params(omega=0.2, delta=None, kappa=0.05)
        self.assertEqual(params.omega, 0.2)
        self.assertEqual(params.delta, 1.0)
        self.assertEqual(params.kappa, (0.05,))

    def test_invalid_model(self):
        with self.assertRaises(ConfigError):
            load_model_params(n_qubits=1)
        with self.assertRaises(ConfigError):
            load_model_params(g_data=(1.0, 1.0, 1.0))
        with self.assertRaises(ConfigError):
            load_model_params(omega=-0.1)


class SettingsTests(SimpleTestCase):
    @override_settings(SIMULATOR={"KRYLOV_DIM": 12})
    def test_partial_override(self):
        conf = simulator_settings()
        self.assertEqual(conf["KRYLOV_DIM"], 12)
        self.assertEqual(conf["DENSE_DIM_LIMIT"], 64)
        self.assertEqual(propagation_options(), {"dense_dim_limit": 64, "krylov_dim": 12, "tolerance": 1e-10})
