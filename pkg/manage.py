#!/usr/bin/env python
"""Command-line entry point; ``python manage.py phasegate --help`` lists the experiments."""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "phasegate.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages from requirements.txt "
            "into the active environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
