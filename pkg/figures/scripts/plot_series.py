#!/usr/bin/env python3
"""Render a series figure from simulator CSV output."""

from hbondfigs.cli import series_main

if __name__ == "__main__":
    raise SystemExit(series_main())
