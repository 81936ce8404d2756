"""Expose a concrete settings module for the default Django entrypoints.

manage.py, wsgi.py, asgi.py and the Celery app reference `phasegate.settings`.
Re-exporting the dev settings keeps a fresh checkout runnable without any
environment, while `DJANGO_SETTINGS_MODULE` can still point at `prod`."""

from .dev import *  # noqa: F401,F403
