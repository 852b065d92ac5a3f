"""
Types de données pour les champs périodiques à divergence nulle.

Un champ réel est stocké par ses coefficients de Fourier tronqués
û_k (tableau complexe de forme (3, N, N, N), ordre des fréquences de numpy).
Le mode nul et les plans de Nyquist ne sont jamais retenus.
Un champ complexifié garde ses parties réelle et imaginaire séparées:
on ne fusionne jamais les coefficients de u et de iv.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import LatticeMismatchError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Lattice:
    """Réseau de modes k avec |k_j| <= N/2 sur la boîte (l1, l2, l3)."""

    resolution: int
    box_lengths: Tuple[float, float, float] = (TWO_PI, TWO_PI, TWO_PI)

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError(f"La résolution doit être >= 2 (reçu {self.resolution})")
        box = tuple(float(b) for b in self.box_lengths)
        if len(box) != 3 or min(box) <= 0:
            raise ValueError(f"Longueurs de boîte invalides: {self.box_lengths}")
        if not math.isclose(max(box), TWO_PI, rel_tol=1e-12):
            raise ValueError("La plus grande longueur de boîte doit valoir 2π (l* = 2π)")
        object.__setattr__(self, "box_lengths", box)

    @classmethod
    def cube(cls, resolution: int) -> "Lattice":
        """Réseau sur la boîte (2π)³."""
        return _cube_lattice(resolution)

    @property
    def shape(self) -> Tuple[int, int, int]:
        n = self.resolution
        return (n, n, n)

    @property
    def volume(self) -> float:
        """|Ω| = l1 l2 l3."""
        l1, l2, l3 = self.box_lengths
        return l1 * l2 * l3

    @cached_property
    def integer_modes(self) -> np.ndarray:
        """Modes entiers k, forme (3, N, N, N)."""
        freqs = np.rint(np.fft.fftfreq(self.resolution, d=1.0 / self.resolution)).astype(int)
        return np.array(np.meshgrid(freqs, freqs, freqs, indexing="ij"))

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """Vecteurs d'onde k_L = 2π (k1/l1, k2/l2, k3/l3)."""
        scale = np.array([TWO_PI / b for b in self.box_lengths]).reshape(3, 1, 1, 1)
        return self.integer_modes * scale

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|k_L|², valeurs propres de l'opérateur de Stokes."""
        return np.sum(self.wavevectors**2, axis=0)

    @cached_property
    def k_norm(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def support(self) -> np.ndarray:
        """Modes retenus: k != 0, plans de Nyquist exclus."""
        mask = np.any(self.integer_modes != 0, axis=0)
        if self.resolution % 2 == 0:
            nyquist = -self.resolution // 2
            mask &= np.all(self.integer_modes != nyquist, axis=0)
        return mask

    @property
    def dealias_cutoff(self) -> int:
        """Plus grand |k_j| conservé par la règle des 2/3."""
        return (self.resolution - 1) // 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return self.support & np.all(np.abs(self.integer_modes) <= self.dealias_cutoff, axis=0)

    @cached_property
    def safe_k_squared(self) -> np.ndarray:
        """|k_L|² avec 1 au mode nul (divisions sans avertissement)."""
        return np.where(self.support, self.k_squared, 1.0)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.k_squared[self.support].min())

    def mode_index(self, k) -> Tuple[int, int, int]:
        """Indice de tableau du mode entier k."""
        k1, k2, k3 = (int(v) for v in k)
        n = self.resolution
        for v in (k1, k2, k3):
            if 2 * abs(v) >= n:
                raise ValueError(f"Mode {tuple(k)} hors du réseau N={n}")
        return (k1 % n, k2 % n, k3 % n)

    def check_same(self, other: "Lattice") -> None:
        if self != other:
            raise LatticeMismatchError(f"Réseaux incompatibles: {self} vs {other}")


@lru_cache(maxsize=16)
def _cube_lattice(resolution: int) -> Lattice:
    return Lattice(resolution)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Champ réel de moyenne nulle, à divergence nulle, tronqué en Fourier."""

    lattice: Lattice
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.complex128)
        expected = (3,) + self.lattice.shape
        if coeffs.shape != expected:
            raise ValueError(f"Forme des coefficients {coeffs.shape} != {expected}")
        coeffs = np.where(self.lattice.support, coeffs, 0.0)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def zero(cls, lattice: Lattice) -> "SpectralField":
        return cls(lattice, np.zeros((3,) + lattice.shape, dtype=np.complex128))

    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coefficients))) if self.coefficients.size else 0.0

    def divergence_defect(self) -> float:
        """max |k_L·û_k| / max |û_k| (0 pour le champ nul)."""
        scale = self.max_abs()
        if scale == 0.0:
            return 0.0
        div = np.sum(self.lattice.wavevectors * self.coefficients, axis=0)
        return float(np.max(np.abs(div)) / scale)

    def symmetry_defect(self) -> float:
        """max |û_{-k} - conj(û_k)| / max |û_k|."""
        scale = self.max_abs()
        if scale == 0.0:
            return 0.0
        flipped = np.roll(self.coefficients[:, ::-1, ::-1, ::-1], 1, axis=(1, 2, 3))
        return float(np.max(np.abs(flipped - np.conj(self.coefficients))) / scale)

    def _check(self, other: "SpectralField") -> None:
        self.lattice.check_same(other.lattice)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.lattice, self.coefficients + other.coefficients)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.lattice, self.coefficients - other.coefficients)

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.lattice, -self.coefficients)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.lattice, float(scalar) * self.coefficients)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Élément de H_C = H + iH, stocké comme couple (re, im) de champs réels."""

    re: SpectralField
    im: SpectralField

    def __post_init__(self):
        self.re.lattice.check_same(self.im.lattice)

    @property
    def lattice(self) -> Lattice:
        return self.re.lattice

    @classmethod
    def zero(cls, lattice: Lattice) -> "ComplexField":
        z = SpectralField.zero(lattice)
        return cls(z, z)

    @classmethod
    def from_real(cls, u: SpectralField) -> "ComplexField":
        return cls(u, SpectralField.zero(u.lattice))

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_real(self) -> bool:
        return self.im.is_zero()

    def conj(self) -> "ComplexField":
        return ComplexField(self.re, -self.im)

    def scale(self, c: complex) -> "ComplexField":
        """(a + ib)(u + iv) = (au - bv) + i(av + bu)."""
        c = complex(c)
        a, b = c.real, c.imag
        lat = self.lattice
        re = SpectralField(lat, a * self.re.coefficients - b * self.im.coefficients)
        im = SpectralField(lat, a * self.im.coefficients + b * self.re.coefficients)
        return ComplexField(re, im)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexField":
        return ComplexField(-self.re, -self.im)

    def __mul__(self, c: complex) -> "ComplexField":
        return self.scale(c)

    __rmul__ = __mul__


AnyField = Union[SpectralField, ComplexField]


class GevreyIndex(BaseModel):
    """Indice (α, σ) de la norme de Gevrey |A^α e^{σA^{1/2}} u|."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(0.0, ge=0.0, description="Puissance de A")
    sigma: float = Field(0.0, ge=0.0, description="Rayon d'analyticité")

    def shifted(self, delta_alpha: float) -> "GevreyIndex":
        return GevreyIndex(alpha=max(self.alpha + delta_alpha, 0.0), sigma=self.sigma)

    def label(self) -> str:
        return f"gevrey_{self.alpha:g}_{self.sigma:g}"
