#!/usr/bin/env python3
"""
Steiner settings - environment-driven knobs
Read once at import. Invalid values fall back to the default with a warning.
"""

import logging
import os

logger = logging.getLogger(__name__)


def _safe_int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except (ValueError, TypeError):
        logger.warning(f"Invalid integer for env var {name}={raw!r}, using default {default}")
        return default
    if value < minimum:
        logger.warning(f"Env var {name}={value} below minimum {minimum}, using default {default}")
        return default
    return value


def _safe_float_env(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = float(raw)
    except (ValueError, TypeError):
        logger.warning(f"Invalid number for env var {name}={raw!r}, using default {default}")
        return default
    if not value > 0 or value == float('inf'):
        logger.warning(f"Env var {name}={raw!r} must be a positive finite number, using default {default}")
        return default
    return value


# Simplex. The cap is factor * (num_vars + num_rows) pivots per phase.
LP_ITERATION_FACTOR = _safe_int_env('STEINER_LP_ITERATION_FACTOR', 50)
LP_DEGENERATE_STREAK = _safe_int_env('STEINER_LP_DEGENERATE_STREAK', 50)
LP_REFACTOR_EVERY = _safe_int_env('STEINER_LP_REFACTOR_EVERY', 100)

# Row generation for the submodular relaxation.
SUPPORT_CAP = _safe_int_env('STEINER_SUPPORT_CAP', 20)
SEPARATION_ROUNDS = _safe_int_env('STEINER_SEPARATION_ROUNDS', 200)

# Thread pools. Guesses default to sequential; bench solves are independent.
GUESS_WORKERS = _safe_int_env('STEINER_GUESS_WORKERS', 1)
BENCH_WORKERS = _safe_int_env('STEINER_BENCH_WORKERS', 4)

ORACLE_MAX_NODES = _safe_int_env('STEINER_ORACLE_MAX_NODES', 18)
DEFAULT_EPSILON = _safe_float_env('STEINER_DEFAULT_EPSILON', 0.5)
LOG_LEVEL = os.environ.get('STEINER_LOG_LEVEL', 'INFO').strip().upper() or 'INFO'
