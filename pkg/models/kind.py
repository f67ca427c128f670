"""The closed keyword set of form kinds and the parent-child legality table.

Level 0 is the machine itself, level 1 the eight section verbs, level 2 the
steps, level 3 configuration blocks and level 4 assertions. The section verbs
beyond ``provides`` and ``implements`` are a stated choice and can be
replaced without touching the rest of the kernel.
"""
from enum import Enum
from typing import Optional


class Kind(Enum):
    MACHINE = "machine"

    PROVIDES = "provides"
    REQUIRES = "requires"
    IMPLEMENTS = "implements"
    GOVERNANCE = "governance"
    STATE = "state"
    CONSTANTS = "constants"
    TESTS = "tests"
    METADATA = "metadata"

    COMPUTE = "compute"
    ASK = "ask"

    INPUTS = "inputs"
    OUTPUTS = "outputs"
    TASK = "task"
    RETURNS = "returns"
    POLICIES = "policies"
    LIMITS = "limits"
    MODELS = "models"

    ASSERT = "assert"

    @property
    def level(self) -> int:
        return _LEVELS[self]

    @property
    def requires_name(self) -> bool:
        return self in NAME_REQUIRED

    @property
    def is_step(self) -> bool:
        return self in STEP_KINDS

    @classmethod
    def parse(cls, word: str) -> Optional["Kind"]:
        """Return the kind for a keyword, or None when it is not one."""
        return _BY_WORD.get(word)

    def __str__(self) -> str:
        return self.value


SECTION_KINDS = (
    Kind.PROVIDES,
    Kind.REQUIRES,
    Kind.IMPLEMENTS,
    Kind.GOVERNANCE,
    Kind.STATE,
    Kind.CONSTANTS,
    Kind.TESTS,
    Kind.METADATA,
)

STEP_KINDS = frozenset({Kind.COMPUTE, Kind.ASK})

NAME_REQUIRED = frozenset({Kind.MACHINE, Kind.COMPUTE, Kind.ASK})

_LEVELS = {Kind.MACHINE: 0}
_LEVELS.update({kind: 1 for kind in SECTION_KINDS})
_LEVELS.update({kind: 2 for kind in STEP_KINDS})
_LEVELS.update({
    kind: 3 for kind in (
        Kind.INPUTS, Kind.OUTPUTS, Kind.TASK, Kind.RETURNS,
        Kind.POLICIES, Kind.LIMITS, Kind.MODELS,
    )
})
_LEVELS[Kind.ASSERT] = 4

_BY_WORD = {kind.value: kind for kind in Kind}

# Kinds absent from the table carry fields (and content) only.
LEGAL_CHILDREN: dict[Kind, frozenset[Kind]] = {
    Kind.MACHINE: frozenset(SECTION_KINDS),
    Kind.PROVIDES: frozenset({Kind.INPUTS, Kind.OUTPUTS}),
    Kind.REQUIRES: frozenset({Kind.INPUTS, Kind.OUTPUTS}),
    Kind.IMPLEMENTS: frozenset(STEP_KINDS),
    Kind.ASK: frozenset({Kind.TASK, Kind.RETURNS}),
    Kind.GOVERNANCE: frozenset({Kind.POLICIES, Kind.LIMITS, Kind.MODELS}),
    Kind.TESTS: frozenset({Kind.ASSERT}),
}

# Variant keys an ask step may carry: a model invocation or a machine call.
ASK_USING = "using"
ASK_FROM = "from"


def is_legal_child(parent: Kind, child: Kind) -> bool:
    return child in LEGAL_CHILDREN.get(parent, frozenset())
