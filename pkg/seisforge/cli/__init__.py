"""
Command-line interface for seisforge.

This package contains the argument parser and entry point, run
configuration resolution, command implementations, and SVG plotting.
"""

from seisforge.cli.config import RunConfig, parse_override
from seisforge.cli.main import build_parser, main

__all__ = [
    "RunConfig",
    "parse_override",
    "build_parser",
    "main",
]
