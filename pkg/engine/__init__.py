"""Evaluation, inspection, governance and the machine runtime."""
from .evaluator import Env, call_builtin, evaluate, instantiate_quote
from .governance import Registry, audit_no_bypass, materialize, verify_ledger
from .inspector import compute_capset, estimate_cost, inspect_form
from .providers import MockProvider, mock_provider
from .runtime import RunRequest, RunResult, reflect_of, run, system_eval, system_propose

__all__ = [
    "Env",
    "MockProvider",
    "Registry",
    "RunRequest",
    "RunResult",
    "audit_no_bypass",
    "call_builtin",
    "compute_capset",
    "estimate_cost",
    "evaluate",
    "inspect_form",
    "instantiate_quote",
    "materialize",
    "mock_provider",
    "reflect_of",
    "run",
    "system_eval",
    "system_propose",
    "verify_ledger",
]
