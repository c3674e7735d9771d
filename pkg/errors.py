#!/usr/bin/env python3
"""
Steiner errors - exception hierarchy shared by every pipeline
Each class carries the exit code the CLI maps it to.
"""

from typing import Any, Optional


class SteinerError(Exception):
    """Base class. ``exit_code`` is what ``steiner.run_command`` returns."""

    exit_code = 4


class InputError(SteinerError, ValueError):
    """Malformed arguments: bad ids, length mismatches, invalid parameters."""

    exit_code = 1


class InstanceFormatError(InputError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class SizeError(InputError):
    """An exhaustive routine was asked to enumerate past its ceiling."""


class GenerationError(InputError):
    def __init__(self, seed: int, reason: str):
        self.seed = seed
        super().__init__(f"{reason} (seed={seed})")


class InfeasibleError(SteinerError):
    exit_code = 2


class ConnectivityError(InfeasibleError):
    def __init__(self, node: Any, message: Optional[str] = None):
        self.node = node
        super().__init__(message or f"node {node} is not reachable from the root")


class QuotaUnreachableError(InfeasibleError):
    pass


class NumericalError(SteinerError, ArithmeticError):
    exit_code = 3


class ContractError(SteinerError, AssertionError):
    """A proven guarantee did not hold at runtime. Never degraded silently."""

    exit_code = 4


class OracleContractError(ContractError):
    pass
