"""Positive Horn logic over equality templates and finite structures, periodic powers and periomorphisms."""
from __future__ import annotations

__version__ = "0.1.0"
