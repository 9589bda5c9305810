#!/usr/bin/env python3
"""Render a timeseries figure from simulator CSV output."""

from hbondfigs.cli import timeseries_main

if __name__ == "__main__":
    raise SystemExit(timeseries_main())
