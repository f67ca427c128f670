"""Exceptions raised by the kernel.

Every failure carries a stable kebab-case ``code`` so callers (and the CLI)
can branch on what went wrong without matching message text. Violations that
are data rather than failures, such as ``validate`` results and inspection
checks, are returned and never raised.
"""
from typing import Optional


class KernelError(Exception):
    """Base class for every error the kernel raises on purpose."""

    code = "kernel-error"

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class FormError(KernelError):
    code = "invalid-form"


class ParseError(KernelError):
    """A source text that does not follow the surface grammar.

    ``kind`` is one of ``indentation``, ``unknown-keyword``,
    ``malformed-field``, ``malformed-splice`` or ``structure``; it doubles as
    the error code.
    """

    def __init__(self, message: str, line: int, column: int, kind: str):
        super().__init__(message, code=kind)
        self.line = line
        self.column = column
        self.kind = kind

    def render(self, filename: str = "<source>") -> str:
        return f"{filename}:{self.line}:{self.column}: {self.message}"

    def __str__(self) -> str:
        return f"{self.kind} at {self.line}:{self.column}: {self.message}"


class EvalError(KernelError):
    code = "eval-error"


class NumberRangeError(EvalError):
    """A numeric literal no finite float can hold, such as ``1e400``.

    ``position`` is the 0-based offset of the literal in the expression text.
    """

    code = "number-out-of-range"

    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class PurityViolation(KernelError):
    """An evaluation appended to its directive log. Never expected to fire."""

    code = "purity-violation"


class PolicyError(KernelError):
    code = "policy-load"


class GovernanceError(KernelError):
    code = "governance-error"


class RunError(KernelError):
    code = "run-error"


class ProviderError(RunError):
    code = "provider-error"


class SystemMachineError(RunError):
    code = "system-machine-error"


class StoreError(KernelError):
    code = "store-error"
