"""Directives: the governed effect records, and the append-only log of them."""
import threading
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Iterator, Optional


class DirectiveKind(Enum):
    MATERIALIZE = "materialize"
    MODEL_INVOKE = "model-invoke"
    MACHINE_CALL = "machine-call"

    def __str__(self) -> str:
        return self.value


RUNTIME_KINDS = frozenset({DirectiveKind.MODEL_INVOKE, DirectiveKind.MACHINE_CALL})

_observed: set = set()
_observed_lock = threading.Lock()


def observed_kinds() -> frozenset:
    """Every directive kind appended to any log in this process."""
    with _observed_lock:
        return frozenset(_observed)


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    payload: Mapping = field(default_factory=dict)
    decision: Optional[int] = None
    capability: Optional[Any] = None  # CapabilityAtom for runtime directives

    def __post_init__(self):
        object.__setattr__(self, "payload", MappingProxyType(dict(self.payload)))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "payload": dict(self.payload),
            "decision": self.decision,
            "capability": None if self.capability is None else str(self.capability),
        }


class DirectiveLog:
    """Append-only list of directives. One writer per log."""

    def __init__(self):
        self._entries: list[Directive] = []

    def append(self, directive: Directive) -> int:
        self._entries.append(directive)
        with _observed_lock:
            _observed.add(directive.kind)
        return len(self._entries) - 1

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Directive]:
        return iter(tuple(self._entries))

    def __getitem__(self, index: int) -> Directive:
        return self._entries[index]

    def kinds(self) -> set:
        return {entry.kind for entry in self._entries}

    def entries(self) -> tuple:
        return tuple(self._entries)
