"""Diffusion exponent: a finite real p >= 2 or the distinguished infinity label.

Every operator formula in the package branches on the label; infinity is never
approximated by a large finite exponent.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Exponent:
    """Either Finite(p) with p >= 2 or the infinity label (stored as None)."""

    value: float | None

    def __post_init__(self):
        if self.value is not None:
            p = float(self.value)
            if not p >= 2.0:
                raise ValueError(f"finite exponent must satisfy p >= 2, got {p}")
            object.__setattr__(self, "value", p)

    @classmethod
    def finite(cls, p: float) -> "Exponent":
        return cls(float(p))

    @classmethod
    def infinity(cls) -> "Exponent":
        return cls(None)

    @classmethod
    def parse(cls, text: str | float) -> "Exponent":
        """Parse CLI/config spellings: 'inf' (or 'infinity') vs a decimal."""
        if isinstance(text, (int, float)):
            return cls.finite(text)
        s = str(text).strip().lower()
        if s in ("inf", "infinity", "oo"):
            return cls.infinity()
        return cls.finite(float(s))

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    @property
    def p(self) -> float:
        """The finite exponent; raises on the infinity label."""
        if self.value is None:
            raise ValueError("infinity label has no finite exponent value")
        return self.value

    @property
    def time_weight(self) -> float:
        """Coefficient of the time term: p - 1 for finite p, 3 for infinity."""
        return self.p - 1.0 if self.is_finite else 3.0

    @property
    def homogeneity(self) -> float:
        """Degree of the spatial operator: p - 1 for finite p, 3 for infinity."""
        return self.time_weight

    @property
    def power_exponent(self) -> float:
        """The distinguished radial power p/(p-1) (4/3 for infinity)."""
        return self.p / (self.p - 1.0) if self.is_finite else 4.0 / 3.0

    @property
    def label(self) -> str:
        if self.value is None:
            return "inf"
        return f"{self.value:g}"

    def __repr__(self):
        return f"Exponent({self.label})"


INFINITY = Exponent.infinity()
