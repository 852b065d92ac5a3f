"""
Expansions asymptotiques p(z) = Σ_α z^α ξ_α sur le vecteur d'échelles.

Les parties réelles des exposants sont des Fraction exactes: appartenance à
une classe 𝓔(m, k, μ), fusion des termes et test μ_λ + 1 = μ_n sont exacts.
Les parties imaginaires sont des flottants fusionnés à IM_MERGE_TOL près.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

from app.core.config import settings
from app.core.exceptions import ClassViolationError
from app.models.spectral_field import ComplexField, Lattice, SpectralField


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class ExponentVector:
    """α = (α_{-1}, α_0, ..., α_k); re exacts, im flottants."""

    re: Tuple[Fraction, ...]
    im: Tuple[float, ...]

    def __post_init__(self):
        re = tuple(_as_fraction(v) for v in self.re)
        im = tuple(float(v) + 0.0 for v in self.im)
        if len(re) != len(im) or len(re) < 1:
            raise ValueError("Parties réelle et imaginaire de tailles différentes")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def real(cls, values: Sequence) -> "ExponentVector":
        return cls(tuple(values), (0.0,) * len(values))

    @classmethod
    def zero(cls, k: int) -> "ExponentVector":
        return cls.real((0,) * (k + 2))

    @property
    def k(self) -> int:
        return len(self.re) - 2

    def re_at(self, j: int) -> Fraction:
        return self.re[j + 1]

    def im_at(self, j: int) -> float:
        return self.im[j + 1]

    def entry(self, j: int) -> complex:
        """α_j comme complexe."""
        return complex(float(self.re[j + 1]), self.im[j + 1])

    def conj(self) -> "ExponentVector":
        return ExponentVector(self.re, tuple(-v + 0.0 for v in self.im))

    def is_real(self, tol: Optional[float] = None) -> bool:
        tol = settings.IM_MERGE_TOL if tol is None else tol
        return all(abs(v) <= tol for v in self.im)

    def matches(self, other: "ExponentVector", tol: Optional[float] = None) -> bool:
        """Égalité exacte sur re, à tol près sur im."""
        tol = settings.IM_MERGE_TOL if tol is None else tol
        return self.re == other.re and all(abs(a - b) <= tol for a, b in zip(self.im, other.im))

    def __add__(self, other: "ExponentVector") -> "ExponentVector":
        if len(self.re) != len(other.re):
            raise ValueError("Exposants de profondeurs différentes")
        return ExponentVector(
            tuple(a + b for a, b in zip(self.re, other.re)),
            tuple(a + b for a, b in zip(self.im, other.im)),
        )

    def shift_re(self, upto: int, delta) -> "ExponentVector":
        """Ajoute delta aux parties réelles des entrées 0..upto."""
        delta = _as_fraction(delta)
        re = list(self.re)
        for j in range(0, upto + 1):
            re[j + 1] += delta
        return ExponentVector(tuple(re), self.im)

    def with_re(self, j: int, value) -> "ExponentVector":
        re = list(self.re)
        re[j + 1] = _as_fraction(value)
        return ExponentVector(tuple(re), self.im)

    def padded(self, k_new: int) -> "ExponentVector":
        extra = k_new - self.k
        if extra < 0:
            raise ValueError(f"Impossible de réduire la profondeur {self.k} -> {k_new}")
        return ExponentVector(self.re + (Fraction(0),) * extra, self.im + (0.0,) * extra)

    def in_class(self, m: int, mu) -> bool:
        """α ∈ 𝓔(m, k, μ): Re α_j = 0 pour j < m et Re α_m = μ."""
        if not -1 <= m <= self.k:
            return False
        mu = _as_fraction(mu)
        return all(self.re_at(j) == 0 for j in range(-1, m)) and self.re_at(m) == mu

    def label(self) -> str:
        parts = []
        for a, b in zip(self.re, self.im):
            parts.append(f"{a}{b:+g}i" if b else f"{a}")
        return "(" + ", ".join(parts) + ")"


@dataclass(frozen=True, eq=False)
class ExpansionTerm:
    """Terme z^α ξ_α."""

    exponent: ExponentVector
    coefficient: ComplexField


def coefficient_scale(xi: ComplexField) -> float:
    return max(xi.re.max_abs(), xi.im.max_abs())


def merge_terms(terms: Iterable[ExpansionTerm], tol: Optional[float] = None) -> List[ExpansionTerm]:
    """
    Fusionne les termes de même exposant (somme des coefficients).

    Les termes fusionnés dont le coefficient est < DROP_REL_TOL × échelle
    sont supprimés, l'échelle étant le plus grand coefficient reçu.
    """
    tol = settings.IM_MERGE_TOL if tol is None else tol
    buckets: Dict[Tuple[Fraction, ...], List[List]] = {}
    order: List[Tuple[Tuple[Fraction, ...], int]] = []
    scale = 0.0
    for term in terms:
        scale = max(scale, coefficient_scale(term.coefficient))
        slots = buckets.setdefault(term.exponent.re, [])
        for slot in slots:
            if slot[0].matches(term.exponent, tol):
                slot[1] = slot[1] + term.coefficient
                break
        else:
            slots.append([term.exponent, term.coefficient])
            order.append((term.exponent.re, len(slots) - 1))

    floor = settings.DROP_REL_TOL * scale
    merged = []
    for key, position in order:
        exponent, coeff = buckets[key][position]
        if coefficient_scale(coeff) <= floor or coeff.is_zero():
            continue
        merged.append(ExpansionTerm(exponent, coeff))
    return merged


def find_conjugate_defect(terms: Sequence[ExpansionTerm]) -> Optional[str]:
    """
    Vérifie ξ_ᾱ = conj(ξ_α) pour tous les termes.

    Returns:
        None si fermée par conjugaison, sinon une description du défaut
    """
    scale = max((coefficient_scale(t.coefficient) for t in terms), default=0.0)
    if scale == 0.0:
        return None
    atol = settings.CONJUGATE_TOL * scale
    for term in terms:
        target = term.exponent.conj()
        partner = next((o for o in terms if o.exponent.matches(target)), None)
        if partner is None:
            return f"exposant conjugué de {term.exponent.label()} absent"
        expected = term.coefficient.conj()
        diff = partner.coefficient - expected
        if coefficient_scale(diff) > atol:
            return f"coefficient de {target.label()} différent du conjugué"
    return None


@dataclass(frozen=True, eq=False)
class Expansion:
    """
    Élément de 𝒫_m(k, μ): termes fusionnés, tous dans 𝓔(m, k, μ).

    conjugate_closed est calculé à la construction.
    """

    lattice: Lattice
    k: int
    class_m: int
    class_mu: Fraction
    terms: Tuple[ExpansionTerm, ...] = ()
    conjugate_closed: bool = field(init=False, default=True)

    def __post_init__(self):
        if self.k < -1 or not -1 <= self.class_m <= self.k:
            raise ClassViolationError(f"Classe invalide m={self.class_m}, k={self.k}")
        mu = _as_fraction(self.class_mu)
        object.__setattr__(self, "class_mu", mu)
        for term in self.terms:
            self.lattice.check_same(term.coefficient.lattice)
            if term.exponent.k != self.k:
                raise ClassViolationError(
                    f"Exposant {term.exponent.label()} de profondeur {term.exponent.k} != {self.k}"
                )
            if not term.exponent.in_class(self.class_m, mu):
                raise ClassViolationError(
                    f"Exposant {term.exponent.label()} hors de 𝓔({self.class_m}, {self.k}, {mu})"
                )
        merged = tuple(merge_terms(self.terms))
        object.__setattr__(self, "terms", merged)
        object.__setattr__(self, "conjugate_closed", find_conjugate_defect(merged) is None)

    @classmethod
    def zero(cls, lattice: Lattice, k: int, m: int, mu=0) -> "Expansion":
        return cls(lattice, k, m, _as_fraction(mu), ())

    def is_zero(self) -> bool:
        return not self.terms

    def same_class(self, **changes) -> dict:
        base = dict(lattice=self.lattice, k=self.k, class_m=self.class_m, class_mu=self.class_mu)
        base.update(changes)
        return base

    def with_terms(self, terms: Iterable[ExpansionTerm], **changes) -> "Expansion":
        return Expansion(terms=tuple(terms), **self.same_class(**changes))

    def scale(self) -> float:
        return max((coefficient_scale(t.coefficient) for t in self.terms), default=0.0)

    def class_label(self) -> str:
        return f"𝒫_{self.class_m}(k={self.k}, μ={self.class_mu})"

    def __len__(self) -> int:
        return len(self.terms)


TrigKind = Literal["cos", "sin"]


@dataclass(frozen=True)
class TrigFactor:
    """σ(ω L_j(t)) avec σ ∈ {cos, sin}."""

    j: int
    omega: float
    kind: TrigKind


@dataclass(frozen=True, eq=False)
class TrigTerm:
    """Π_j L_j(t)^{a_j} Π σ(ω L_j(t)) · ξ, exposant réel a ∈ 𝓔_ℝ(m, k, 0)."""

    exponent: Tuple[Fraction, ...]
    factors: Tuple[TrigFactor, ...]
    coefficient: SpectralField


@dataclass(frozen=True, eq=False)
class TrigExpansion:
    """Forme réelle L_m(t)^{μ} Σ termes trigonométriques, sur k + 2 variables."""

    lattice: Lattice
    k: int
    class_m: int
    class_mu: Fraction
    terms: Tuple[TrigTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "class_mu", _as_fraction(self.class_mu))
        for term in self.terms:
            if len(term.exponent) != self.k + 2:
                raise ValueError("Exposant trigonométrique de mauvaise profondeur")
            if any(term.exponent[j + 1] != 0 for j in range(-1, self.class_m + 1)):
                raise ClassViolationError("Exposant hors de 𝓔_ℝ(m, k, 0)")
            for f in term.factors:
                if not 0 <= f.j <= self.k:
                    raise ValueError(f"Facteur trigonométrique sur L_{f.j} hors de 0..{self.k}")

    @property
    def is_non_oscillatory(self) -> bool:
        """Classe 𝒫⁰: aucune fréquence non nulle."""
        return all(f.omega == 0 for term in self.terms for f in term.factors)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class ExponentSequence:
    """Suite (μ_n) fermée par addition (et +1 si m* = 0) sous la borne."""

    m_star: int
    generators: Tuple[Fraction, ...]
    cutoff: Fraction
    mu: Tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.mu)

    def __getitem__(self, n: int) -> Fraction:
        """μ_n pour n = 1..len (indexation à partir de 1)."""
        if not 1 <= n <= len(self.mu):
            raise IndexError(f"μ_{n} hors de la suite (1..{len(self.mu)})")
        return self.mu[n - 1]

    def index_of(self, value) -> Optional[int]:
        value = _as_fraction(value)
        for n, mu in enumerate(self.mu, start=1):
            if mu == value:
                return n
        return None

    def labels(self) -> List[str]:
        return [str(v) for v in self.mu]


@dataclass(frozen=True, eq=False)
class ForceExpansionSpec:
    """p_n ∈ 𝒫_{m*}(k, -μ_n) pour les μ_n de la suite; p_n absent = 0."""

    lattice: Lattice
    m_star: int
    k: int
    sequence: ExponentSequence
    forces: Dict[Fraction, Expansion] = field(default_factory=dict)
    remainder: Optional[str] = None

    def __post_init__(self):
        if self.k < self.m_star:
            raise ClassViolationError("k doit être >= m*")
        for mu, p in self.forces.items():
            if self.sequence.index_of(mu) is None:
                raise ClassViolationError(f"μ = {mu} absent de la suite des exposants")
            if p.is_zero():
                continue
            if (p.k, p.class_m, p.class_mu) != (self.k, self.m_star, -mu):
                raise ClassViolationError(
                    f"p pour μ = {mu} dans {p.class_label()}, attendu 𝒫_{self.m_star}(k={self.k}, μ={-mu})"
                )
            if not p.conjugate_closed:
                raise ClassViolationError(f"p pour μ = {mu} n'est pas fermé par conjugaison")

    def force(self, n: int) -> Expansion:
        """p_n (expansion nulle si non fourni)."""
        mu = self.sequence[n]
        p = self.forces.get(mu)
        if p is None or p.is_zero():
            return Expansion.zero(self.lattice, self.k, self.m_star, -mu)
        return p
