import django.core.validators
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True, primary_key=True, serialize=False, verbose_name="ID"
                    ),
                ),
                (
                    "experiment",
                    models.CharField(
                        choices=[
                            ("fig2a", "fig2a"),
                            ("fig2c", "fig2c"),
                            ("fig3a", "fig3a"),
                            ("fig3b", "fig3b"),
                            ("fig4a", "fig4a"),
                            ("fig4b", "fig4b"),
                            ("fig6a", "fig6a"),
                            ("fig6b", "fig6b"),
                            ("zeno-check", "zeno-check"),
                            ("truth-table", "truth-table"),
                            ("gate-time", "gate-time"),
                        ],
                        db_index=True,
                        max_length=20,
                    ),
                ),
                (
                    "variant",
                    models.CharField(blank=True, help_text="Regime or sub-figure tag.", max_length=20),
                ),
                (
                    "config",
                    models.JSONField(default=dict, help_text="Fully resolved run configuration."),
                ),
                ("config_digest", models.CharField(db_index=True, editable=False, max_length=64)),
                ("output_path", models.CharField(blank=True, max_length=500)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("running", "Running"),
                            ("succeeded", "Succeeded"),
                            ("failed", "Failed"),
                        ],
                        default="running",
                        max_length=20,
                    ),
                ),
                ("row_count", models.PositiveIntegerField(default=0)),
                (
                    "wall_time",
                    models.FloatField(
                        blank=True,
                        help_text="Seconds.",
                        null=True,
                        validators=[django.core.validators.MinValueValidator(0)],
                    ),
                ),
                ("summary", models.JSONField(blank=True, default=dict)),
                ("error", models.TextField(blank=True)),
                ("created_at", models.DateTimeField(auto_now_add=True, db_index=True)),
                ("updated_at", models.DateTimeField(auto_now=True)),
            ],
            options={
                "verbose_name": "Experiment run",
                "verbose_name_plural": "Experiment runs",
                "ordering": ("-created_at", "-id"),
                "indexes": [
                    models.Index(fields=["experiment", "status"], name="simulator_e_experim_5c1f0a_idx"),
                    models.Index(fields=["status", "created_at"], name="simulator_e_status_8e2d4b_idx"),
                ],
            },
        ),
    ]
