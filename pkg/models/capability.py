"""Capability atoms: the effects a form needs in order to run."""
from dataclasses import dataclass
from typing import Iterable

MODEL = "model"
CALL = "call"


@dataclass(frozen=True, order=True)
class CapabilityAtom:
    """One effect a running machine may produce.

    ``model:<name>`` allows invoking a model; ``call:<address>`` allows calling
    another machine.
    """

    cap_class: str
    target: str

    def __post_init__(self):
        if self.cap_class not in (MODEL, CALL):
            raise ValueError(f"unknown capability class: {self.cap_class!r}")
        if not self.target:
            raise ValueError("capability target must be non-empty")

    @classmethod
    def model(cls, name: str) -> "CapabilityAtom":
        return cls(MODEL, name)

    @classmethod
    def call(cls, address: str) -> "CapabilityAtom":
        return cls(CALL, address)

    @classmethod
    def parse(cls, text: str) -> "CapabilityAtom":
        cap_class, sep, target = text.partition(":")
        if not sep:
            raise ValueError(f"capability needs a class prefix: {text!r}")
        return cls(cap_class, target)

    def __str__(self) -> str:
        return f"{self.cap_class}:{self.target}"


def is_valid_pattern(pattern: str) -> bool:
    """Exact atom, a prefix ending in ``/*`` or ``:*``, or the bare ``*``."""
    if pattern == "*":
        return True
    body = pattern[:-1] if pattern.endswith(("/*", ":*")) else pattern
    if "*" in body:
        return False
    cap_class, sep, target = body.partition(":")
    if cap_class not in (MODEL, CALL) or not sep:
        return False
    return bool(target) or pattern.endswith(":*")


def pattern_matches(pattern: str, atom: CapabilityAtom) -> bool:
    if pattern == "*":
        return True
    text = str(atom)
    if pattern.endswith("*"):
        return text.startswith(pattern[:-1]) and len(text) > len(pattern) - 1
    return text == pattern


def permitted(atom: CapabilityAtom, patterns: Iterable[str]) -> bool:
    return any(pattern_matches(pattern, atom) for pattern in patterns)


def render_caps(atoms: Iterable[CapabilityAtom]) -> list[str]:
    """Atoms in their canonical text form, sorted for stable output."""
    return sorted(str(atom) for atom in atoms)
