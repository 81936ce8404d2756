"""
WSGI config for the phasegate project (serves the run-ledger admin).
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "phasegate.settings")

application = get_wsgi_application()
