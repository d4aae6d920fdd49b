"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Array dimensions do not fit together."""


class ModelFormatError(ValueError):
    """A model file cannot be parsed into a well-shaped model."""


class InvalidModelError(ValueError):
    """A model violates the interaction axioms beyond tolerance."""

    def __init__(self, violations):
        self.violations = list(violations)
        text = ", ".join(f"{v.name}={v.defect:.3g}" for v in self.violations)
        super().__init__(f"invalid interaction model: {text}")


class GuardError(RuntimeError):
    """A requested computation exceeds a resource guard."""
