"""Highway lane-change decisions with a deep Q-network and a rule-based safety filter."""

from .app import main

__all__ = ["main"]
