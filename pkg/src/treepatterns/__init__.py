"""Occurrence statistics of tree patterns in random labeled trees."""

from __future__ import annotations

__version__ = "0.1.0"
