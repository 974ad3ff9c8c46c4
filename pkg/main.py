#!/usr/bin/env python3
"""
CPTu state parameter toolkit

Runs undrained element tests and cavity solutions for CASM soils and inverts
the initial state parameter from CPTu soundings. See ``--help``.

Environment variables from a ``.env`` file are loaded by ``cptu_state.cli.main``.
"""

import sys

from cptu_state.cli import main

if __name__ == "__main__":
    sys.exit(main())
