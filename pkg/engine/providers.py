"""Model providers for ``ask ... using:`` steps.

Only a deterministic mock ships with the kernel. It answers from canned
responses keyed ``"machine/step"`` and falls back to zero values of the
declared return types.
"""
import json
import sys
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Optional, Protocol, Union

# Handle imports for both module and direct execution
try:
    from ..models.errors import ProviderError
    from ..models.values import is_number
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import ProviderError
    from models.values import is_number


# Type word -> (zero value, conformance test). Unknown words accept anything.
RETURN_TYPES = {
    "text": ("", lambda value: isinstance(value, str)),
    "number": (0, is_number),
    "boolean": (False, lambda value: isinstance(value, bool)),
}


class ModelProvider(Protocol):
    def invoke(
        self,
        model: str,
        task: str,
        schema: list[tuple[str, str]],
        *,
        machine: Optional[str] = None,
        step: Optional[str] = None,
    ) -> dict:
        """Answer ``task`` with an association covering exactly ``schema``."""
        ...


class MockProvider:
    """Canned responses keyed by ``"machine/step"``."""

    def __init__(self, responses: Optional[Mapping] = None):
        self.responses = dict(responses or {})
        self.calls: list[dict] = []

    @classmethod
    def load(cls, path: Union[str, Path]) -> "MockProvider":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ProviderError(f"cannot read models file {path}: {e.strerror or e}", code="provider-config") from e
        except json.JSONDecodeError as e:
            raise ProviderError(f"models file {path} is not valid JSON: {e}", code="provider-config") from e
        if not isinstance(data, dict) or not all(isinstance(value, dict) for value in data.values()):
            raise ProviderError("models file maps \"machine/step\" to response objects", code="provider-config")
        return cls(data)

    def invoke(self, model, task, schema, *, machine=None, step=None) -> dict:
        key = f"{machine}/{step}"
        self.calls.append({"model": model, "task": task, "key": key})
        if key not in self.responses:
            return {name: RETURN_TYPES.get(word, (None, None))[0] for name, word in schema}

        response = self.responses[key]
        expected = [name for name, _ in schema]
        if sorted(response) != sorted(expected):
            raise ProviderError(
                f"response for {key} has keys {sorted(response)}, expected {sorted(expected)}"
            )
        for name, word in schema:
            conforms = RETURN_TYPES.get(word, (None, _anything))[1]
            if not conforms(response[name]):
                raise ProviderError(f"response for {key}: {name} is not a {word}")
        return dict(response)


def mock_provider(config: Optional[Mapping] = None) -> MockProvider:
    return MockProvider(config)


def _anything(value: Any) -> bool:
    return True
