"""
ASGI config for the phasegate project.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "phasegate.settings")

application = get_asgi_application()
