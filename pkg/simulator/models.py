# models.py
from __future__ import annotations

import hashlib
import json

from django.core.exceptions import ValidationError
from django.core.validators import MinValueValidator
from django.db import models

EXPERIMENT_IDS = (
    "fig2a",
    "fig2c",
    "fig3a",
    "fig3b",
    "fig4a",
    "fig4b",
    "fig6a",
    "fig6b",
    "zeno-check",
    "truth-table",
    "gate-time",
)


def config_digest(config: dict) -> str:
    payload = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ExperimentRunQuerySet(models.QuerySet):
    def succeeded(self):
        return self.filter(status=ExperimentRun.Status.SUCCEEDED)

    def failed(self):
        return self.filter(status=ExperimentRun.Status.FAILED)

    def for_experiment(self, experiment: str):
        return self.filter(experiment=experiment)

    def with_digest(self, digest: str):
        return self.filter(config_digest=digest)


class ExperimentRun(models.Model):
    class Status(models.TextChoices):
        RUNNING = "running", "Running"
        SUCCEEDED = "succeeded", "Succeeded"
        FAILED = "failed", "Failed"

    experiment = models.CharField(
        max_length=20,
        choices=[(value, value) for value in EXPERIMENT_IDS],
        db_index=True,
    )
    variant = models.CharField(max_length=20, blank=True, help_text="Regime or sub-figure tag.")
    config = models.JSONField(default=dict, help_text="Fully resolved run configuration.")
    config_digest = models.CharField(max_length=64, db_index=True, editable=False)
    output_path = models.CharField(max_length=500, blank=True)
    status = models.CharField(
        max_length=20,
        choices=Status.choices,
        default=Status.RUNNING,
    )
    row_count = models.PositiveIntegerField(default=0)
    wall_time = models.FloatField(
        null=True,
        blank=True,
        validators=[MinValueValidator(0)],
        help_text="Seconds.",
    )
    summary = models.JSONField(default=dict, blank=True)
    error = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True, editable=False, db_index=True)
    updated_at = models.DateTimeField(auto_now=True, editable=False)

    objects = ExperimentRunQuerySet.as_manager()

    class Meta:
        ordering = ("-created_at", "-id")
        verbose_name = "Experiment run"
        verbose_name_plural = "Experiment runs"
        indexes = [
            models.Index(fields=["experiment", "status"], name="simulator_e_experim_5c1f0a_idx"),
            models.Index(fields=["status", "created_at"], name="simulator_e_status_8e2d4b_idx"),
        ]

    def __str__(self) -> str:
        return f"{self.experiment} [{self.status}] {self.created_at:%Y-%m-%d %H:%M}" if self.created_at else self.experiment

    def save(self, *args, **kwargs):
        self.config_digest = config_digest(self.config or {})
        super().save(*args, **kwargs)

    def clean(self):
        super().clean()
        if self.status == self.Status.FAILED and not self.error:
            raise ValidationError({"error": "A failed run must record its error."})
        if self.status == self.Status.SUCCEEDED and self.wall_time is None:
            raise ValidationError({"wall_time": "A finished run must record its wall time."})

    @property
    def is_finished(self) -> bool:
        return self.status != self.Status.RUNNING
