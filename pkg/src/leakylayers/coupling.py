"""Coupling constants of the two shells."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["Coupling"]


@dataclass(frozen=True)
class Coupling:
    """Complex coupling constants on the outer (plus) and inner (minus) shell."""

    alpha_plus: complex
    alpha_minus: complex

    def __post_init__(self):
        for name in ("alpha_plus", "alpha_minus"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def total(self):
        return self.alpha_plus + self.alpha_minus

    def swapped(self):
        return Coupling(self.alpha_minus, self.alpha_plus)

    @classmethod
    def from_pairs(cls, plus, minus):
        def as_complex(v):
            if isinstance(v, (list, tuple)):
                return complex(float(v[0]), float(v[1]) if len(v) > 1 else 0.0)
            return complex(v)
        return cls(as_complex(plus), as_complex(minus))
