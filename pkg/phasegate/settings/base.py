"""Shared settings for the phasegate simulator.

Everything environment-dependent goes through django-environ; a ``.env`` file
at the repository root is read when present.
"""

from __future__ import annotations

import socket
from pathlib import Path

import environ

BASE_DIR = Path(__file__).resolve().parent.parent.parent

env = environ.Env(
    DEBUG=(bool, False),
    SIMULATOR_RECORD_RUNS=(bool, True),
)
if (BASE_DIR / ".env").exists():
    environ.Env.read_env(BASE_DIR / ".env")

SECRET_KEY = env("SECRET_KEY", default="phasegate-insecure-dev-key")
DEBUG = env("DEBUG")
ALLOWED_HOSTS = env.list("ALLOWED_HOSTS", default=[])

TIME_ZONE = env("TIME_ZONE", default="UTC")
USE_TZ = True

INSTALLED_APPS = [
    # admin lists the run ledger
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    "django_celery_results",
    "simulator",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
]

ROOT_URLCONF = "phasegate.urls"
WSGI_APPLICATION = "phasegate.wsgi.application"
ASGI_APPLICATION = "phasegate.asgi.application"
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

STATIC_URL = "/static/"
STATIC_ROOT = BASE_DIR / "staticfiles"


def ledger_database(url: str | None) -> dict:
    """Run ledger connection: ``DATABASE_URL`` when set, else a SQLite file next to the checkout."""
    if not url:
        return {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": env("SQLITE_PATH", default=str(BASE_DIR / "phasegate.sqlite3")),
        }

    import dj_database_url

    database = dj_database_url.parse(url, conn_max_age=60)
    if database.get("ENGINE", "").endswith("postgresql"):
        database.setdefault("OPTIONS", {}).setdefault("sslmode", "prefer")
        host = env("POSTGRES_HOST", default=None)
        if host:
            # compose service names do not resolve from the host machine
            try:
                socket.getaddrinfo(host, None)
            except socket.gaierror:
                host = "127.0.0.1"
            database["HOST"] = host
        database["PORT"] = env("POSTGRES_PORT", default=database.get("PORT", ""))
    return database


DATABASES = {"default": ledger_database(env("DATABASE_URL", default=None))}

# Sweep points (fig3, fig4) are Celery task groups
CELERY_BROKER_URL = env("CELERY_BROKER_URL", default=env("REDIS_URL", default="redis://127.0.0.1:6379/1"))
CELERY_RESULT_BACKEND = env("CELERY_RESULT_BACKEND", default="django-db")
CELERY_TASK_ALWAYS_EAGER = env.bool("CELERY_TASK_ALWAYS_EAGER", default=False)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_TASK_SERIALIZER = CELERY_RESULT_SERIALIZER = "json"
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_WORKER_PREFETCH_MULTIPLIER = 1
CELERY_TIMEZONE = TIME_ZONE

SIMULATOR = {
    "MAX_SUBSPACE_STATES": env.int("SIMULATOR_MAX_SUBSPACE_STATES", default=4096),
    "DENSE_DIM_LIMIT": env.int("SIMULATOR_DENSE_DIM_LIMIT", default=64),
    "KRYLOV_DIM": env.int("SIMULATOR_KRYLOV_DIM", default=30),
    "KRYLOV_TOLERANCE": env.float("SIMULATOR_KRYLOV_TOLERANCE", default=1e-10),
    "DEFAULT_SAMPLES": env.int("SIMULATOR_DEFAULT_SAMPLES", default=400),
    "RWA_WARN_RATIO": env.float("SIMULATOR_RWA_WARN_RATIO", default=0.2),
    "TRUTH_TABLE_MIN_FIDELITY": env.float("SIMULATOR_TRUTH_TABLE_MIN_FIDELITY", default=0.98),
    "TRUTH_TABLE_MAX_PHASE_ERROR": env.float("SIMULATOR_TRUTH_TABLE_MAX_PHASE_ERROR", default=0.05),
    "RECORD_RUNS": env("SIMULATOR_RECORD_RUNS"),
    "OUTPUT_DIR": env("SIMULATOR_OUTPUT_DIR", default=str(BASE_DIR / "output")),
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "compact": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "compact"},
    },
    "root": {"handlers": ["console"], "level": "INFO"},
    "loggers": {
        "simulator": {
            "handlers": ["console"],
            "level": env("SIMULATOR_LOG_LEVEL", default="INFO"),
            "propagate": False,
        },
        "celery": {"handlers": ["console"], "level": "WARNING", "propagate": False},
    },
}
