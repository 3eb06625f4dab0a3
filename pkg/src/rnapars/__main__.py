"""Run the command-line interface with ``python -m rnapars``."""

from .cli import main

raise SystemExit(main())
