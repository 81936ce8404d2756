"""Deployment settings: Postgres ledger, real workers, admin behind TLS."""

from .base import *  # noqa: F401,F403
from .base import LOGGING, SIMULATOR, env

DEBUG = False
SECRET_KEY = env("SECRET_KEY")
ALLOWED_HOSTS = env.list("ALLOWED_HOSTS")
CSRF_TRUSTED_ORIGINS = [f"https://{host}" for host in ALLOWED_HOSTS]
SECURE_PROXY_SSL_HEADER = ("HTTP_X_FORWARDED_PROTO", "https")
SESSION_COOKIE_SECURE = CSRF_COOKIE_SECURE = True

# no SQLite fallback
DATABASES = {"default": env.db("DATABASE_URL")}

CELERY_TASK_ALWAYS_EAGER = False
CELERY_RESULT_EXTENDED = True

SIMULATOR = {**SIMULATOR, "OUTPUT_DIR": env("SIMULATOR_OUTPUT_DIR")}
LOGGING = {**LOGGING, "root": {"handlers": ["console"], "level": "WARNING"}}
