"""Dev settings that extend base."""

from .base import *  # noqa: F401,F403
from .base import SIMULATOR as BASE_SIMULATOR, env

DEBUG = True

ALLOWED_HOSTS = ["localhost", "127.0.0.1", "[::1]"]
CSRF_TRUSTED_ORIGINS = ["http://localhost:8000", "http://127.0.0.1:8000"]

# Run sweep tasks in-process unless a worker pool is explicitly wanted.
CELERY_TASK_ALWAYS_EAGER = env.bool("CELERY_TASK_ALWAYS_EAGER", default=True)
CELERY_RESULT_BACKEND = env("CELERY_RESULT_BACKEND", default="cache+memory://")

PASSWORD_HASHERS = [
    "django.contrib.auth.hashers.MD5PasswordHasher",
]

# Copy so local tweaks do not mutate base module state.
SIMULATOR = {**BASE_SIMULATOR}
