"""Small shared helpers: thread-count override and CSV metadata headers."""

from __future__ import annotations

import hashlib
import json
import os

__all__ = ["n_threads", "config_hash", "format_float"]


def n_threads() -> int:
    """Worker count for parallel parameter sweeps.

    Overridden by the DIRAC_GAP_THREADS environment variable; defaults to
    the number of logical cores.
    """
    env = os.environ.get("DIRAC_GAP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def config_hash(config: dict) -> str:
    """Short stable hash of a JSON-serializable configuration."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def format_float(x: float) -> str:
    return f"{x:.17g}"
