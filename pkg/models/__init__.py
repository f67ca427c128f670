"""Form values and the records governance produces about them."""
from .capability import CapabilityAtom
from .errors import KernelError, FormError, ParseError
from .form import Form, Violation
from .kind import Kind

__all__ = ["CapabilityAtom", "Form", "FormError", "Kind", "KernelError", "ParseError", "Violation"]
