"""
Vecteur d'échelles L̂_k(t) = (e^t, t, ln t, ..., L_k(t)) stocké en logarithmes.
"""

import math
from dataclasses import dataclass
from typing import Tuple


@dataclass(frozen=True)
class ScaleVector:
    """
    log_values[j + 1] = ln L_j(t) pour j = -1..k.

    ln L_{-1}(t) = t est conservé exactement, e^t n'est jamais calculé.
    Comme ln L_j = L_{j+1}, log_values = (t, ln t, ln ln t, ...).
    """

    k: int
    t: float
    log_values: Tuple[float, ...]

    def __post_init__(self):
        if self.k < -1:
            raise ValueError(f"Profondeur k invalide: {self.k}")
        if len(self.log_values) != self.k + 2:
            raise ValueError("log_values doit contenir k + 2 entrées")

    def log_of(self, j: int) -> float:
        """ln L_j(t)."""
        if not -1 <= j <= self.k:
            raise IndexError(f"Indice {j} hors de -1..{self.k}")
        return self.log_values[j + 1]

    def value(self, j: int) -> float:
        """L_j(t) pour j = -1..k+1; peut valoir inf pour j = -1."""
        if not -1 <= j <= self.k + 1:
            raise IndexError(f"Indice {j} hors de -1..{self.k + 1}")
        if j == -1:
            try:
                return math.exp(self.t)
            except OverflowError:
                return math.inf
        if j == 0:
            return self.t
        return self.log_values[j]
