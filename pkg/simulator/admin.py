from django.contrib import admin

from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = (
        "experiment",
        "variant",
        "status",
        "row_count",
        "wall_time_display",
        "short_digest",
        "created_at",
    )
    list_filter = ("experiment", "status", ("created_at", admin.DateFieldListFilter))
    search_fields = ("experiment", "variant", "output_path", "config_digest", "error")
    ordering = ("-created_at", "-id")
    readonly_fields = ("config_digest", "wall_time", "row_count", "created_at", "updated_at")

    fieldsets = (
        (
            "Run",
            {
                "fields": (
                    ("experiment", "variant"),
                    ("status", "row_count", "wall_time"),
                    "output_path",
                )
            },
        ),
        (
            "Configuration",
            {"fields": ("config", "config_digest", "summary")},
        ),
        (
            "Diagnostics",
            {"fields": ("error", ("created_at", "updated_at"))},
        ),
    )

    @admin.display(description="Wall time", ordering="wall_time")
    def wall_time_display(self, obj: ExperimentRun) -> str:
        return "-" if obj.wall_time is None else f"{obj.wall_time:.2f} s"

    @admin.display(description="Digest")
    def short_digest(self, obj: ExperimentRun) -> str:
        return obj.config_digest[:12]
