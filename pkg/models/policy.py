"""Policy context and trust levels, loaded from JSON with pydantic."""
import json
import sys
from collections.abc import Mapping
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

try:
    from .capability import is_valid_pattern
    from .errors import PolicyError
    from .kind import Kind
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.capability import is_valid_pattern
    from models.errors import PolicyError
    from models.kind import Kind


class TrustLevel(Enum):
    """Declared provenance of a materialization request, most trusted first."""

    HUMAN = "human"
    APPROVED_GENERATOR = "approved_generator"
    VALIDATED_LLM = "validated_llm"
    UNTRUSTED = "untrusted"

    @property
    def rank(self) -> int:
        return _RANK[self]

    def at_least(self, floor: "TrustLevel") -> bool:
        return self.rank >= floor.rank

    @classmethod
    def parse(cls, text: Union[str, "TrustLevel"]) -> "TrustLevel":
        if isinstance(text, TrustLevel):
            return text
        try:
            return cls(text.strip().lower().replace("-", "_"))
        except (ValueError, AttributeError):
            choices = ", ".join(level.value for level in cls)
            raise PolicyError(f"unknown trust level {text!r} (expected one of {choices})", code="invalid-trust")

    def __str__(self) -> str:
        return self.value


_RANK = {
    TrustLevel.HUMAN: 3,
    TrustLevel.APPROVED_GENERATOR: 2,
    TrustLevel.VALIDATED_LLM: 1,
    TrustLevel.UNTRUSTED: 0,
}


class PolicyContext(BaseModel):
    """Governance configuration applied by the inspector."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    allowed_caps: frozenset[str] = Field(default_factory=frozenset)
    allowed_models: frozenset[str] = Field(default_factory=frozenset)
    require_governance_section: bool = False
    max_steps: Optional[int] = Field(default=None, ge=0)
    required_fields: tuple[tuple[str, str], ...] = ()
    model_costs: tuple[tuple[str, int], ...] = ()
    default_model_cost: int = Field(default=10, ge=0)
    compute_step_cost: int = Field(default=1, ge=0)
    budget: int = Field(default=100, ge=0)
    min_trust: TrustLevel = TrustLevel.UNTRUSTED

    @field_validator("allowed_caps")
    @classmethod
    def _patterns_well_formed(cls, value: frozenset) -> frozenset:
        bad = sorted(pattern for pattern in value if not is_valid_pattern(pattern))
        if bad:
            raise ValueError(f"malformed capability patterns: {bad}")
        return value

    @field_validator("required_fields")
    @classmethod
    def _known_kinds(cls, value: tuple) -> tuple:
        unknown = sorted({kind for kind, _ in value if Kind.parse(kind) is None})
        if unknown:
            raise ValueError(f"unknown kinds in required_fields: {unknown}")
        return value

    @field_validator("model_costs", mode="before")
    @classmethod
    def _costs_as_pairs(cls, value):
        # Policy files give an object; keep sorted pairs.
        if isinstance(value, Mapping):
            return tuple(sorted(value.items()))
        return value

    @field_validator("model_costs")
    @classmethod
    def _costs_non_negative(cls, value: tuple) -> tuple:
        models = [model for model, _ in value]
        if len(set(models)) != len(models):
            raise ValueError("duplicate models in model_costs")
        negative = sorted(model for model, cost in value if cost < 0)
        if negative:
            raise ValueError(f"negative model costs: {negative}")
        return value

    @field_validator("min_trust", mode="before")
    @classmethod
    def _parse_trust(cls, value):
        return TrustLevel.parse(value) if isinstance(value, str) else value

    def model_cost(self, model: str) -> int:
        return dict(self.model_costs).get(model, self.default_model_cost)

    def to_dict(self) -> dict:
        return {
            "allowed_caps": sorted(self.allowed_caps),
            "allowed_models": sorted(self.allowed_models),
            "require_governance_section": self.require_governance_section,
            "max_steps": self.max_steps,
            "required_fields": [list(pair) for pair in self.required_fields],
            "model_costs": dict(sorted(self.model_costs)),
            "default_model_cost": self.default_model_cost,
            "compute_step_cost": self.compute_step_cost,
            "budget": self.budget,
            "min_trust": self.min_trust.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyContext":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise PolicyError(_summarize(e)) from e
        except PolicyError as e:
            raise PolicyError(e.message) from e

    @classmethod
    def from_json(cls, text: str) -> "PolicyContext":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise PolicyError(f"policy is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise PolicyError("policy must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PolicyContext":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise PolicyError(f"cannot read policy file {path}: {e.strerror or e}") from e
        return cls.from_json(text)

    @classmethod
    def permissive(cls, **overrides) -> "PolicyContext":
        """Every capability pattern allowed; models still need listing."""
        settings = {
            "allowed_caps": frozenset({"*"}),
            "budget": 100,
        }
        settings.update(overrides)
        return cls(**settings)


def _summarize(error: ValidationError) -> str:
    parts = []
    for issue in error.errors():
        where = ".".join(str(part) for part in issue.get("loc", ())) or "policy"
        parts.append(f"{where}: {issue.get('msg')}")
    return "; ".join(parts)
