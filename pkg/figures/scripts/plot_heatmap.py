#!/usr/bin/env python3
"""Render a heatmap figure from simulator CSV output."""

from hbondfigs.cli import heatmap_main

if __name__ == "__main__":
    raise SystemExit(heatmap_main())
