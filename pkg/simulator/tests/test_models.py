from django.core.exceptions import ValidationError
from django.test import TestCase

from simulator.models import ExperimentRun, config_digest


class ExperimentRunTests(TestCase):
    def test_digest_ignores_key_order(self):
        run = ExperimentRun.objects.create(experiment="fig3a", config={"b": 1, "a": [0.1, 0.2]})
        self.assertEqual(run.config_digest, config_digest({"a": [0.1, 0.2], "b": 1}))
        self.assertEqual(len(run.config_digest), 64)
        self.assertEqual(ExperimentRun.objects.with_digest(run.config_digest).get(), run)

    def test_queryset_filters(self):
        ExperimentRun.objects.create(experiment="fig3a", status=ExperimentRun.Status.SUCCEEDED, wall_time=1.0)
        ExperimentRun.objects.create(experiment="fig3a", status=ExperimentRun.Status.FAILED, error="boom")
        ExperimentRun.objects.create(experiment="gate-time", status=ExperimentRun.Status.SUCCEEDED, wall_time=0.1)
        self.assertEqual(ExperimentRun.objects.succeeded().count(), 2)
        self.assertEqual(ExperimentRun.objects.failed().get().error, "boom")
        self.assertEqual(ExperimentRun.objects.for_experiment("fig3a").succeeded().count(), 1)

    def test_clean(self):
        with self.assertRaises(ValidationError):
            ExperimentRun(experiment="fig4a", status=ExperimentRun.Status.FAILED).clean()
        with self.assertRaises(ValidationError):
            ExperimentRun(experiment="fig4a", status=ExperimentRun.Status.SUCCEEDED).clean()
        ExperimentRun(experiment="fig4a").clean()

    def test_str_and_state(self):
        run = ExperimentRun.objects.create(experiment="zeno-check")
        self.assertTrue(str(run).startswith("zeno-check [running] "))
        self.assertFalse(run.is_finished)
        run.status = ExperimentRun.Status.SUCCEEDED
        self.assertTrue(run.is_finished)
        self.assertEqual(str(ExperimentRun(experiment="fig2a")), "fig2a")
