"""
Schémas Pydantic des configurations d'expérience (fichiers YAML).
Valide les données d'entrée de la CLI et de l'API.
"""

import math
from fractions import Fraction
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import settings
from app.models.spectral_field import GevreyIndex

ExperimentKind = Literal["linear", "nse-power", "nse-log", "manufactured", "selftest", "lemma-integral"]


def parse_rational(value) -> Fraction:
    """Convertit "3/2", "1", 0.5 ou 2 en Fraction exacte."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("Booléen non accepté comme rationnel")
    if isinstance(value, float):
        return Fraction(str(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Rationnel invalide: {value!r}") from e


def _rational_str(value) -> str:
    frac = parse_rational(value)
    return str(frac)


class ModeSchema(BaseModel):
    """Coefficient de Fourier d'un champ réel au mode k (le mode -k est déduit)."""
    k: List[int] = Field(..., min_length=3, max_length=3, description="Mode entier (k1, k2, k3)")
    real: List[float] = Field(..., min_length=3, max_length=3, description="Partie réelle de û_k")
    imag: List[float] = Field(
        default_factory=lambda: [0.0, 0.0, 0.0],
        min_length=3,
        max_length=3,
        description="Partie imaginaire de û_k",
    )


class FieldSchema(BaseModel):
    """Champ réel donné par une liste de modes ou par un fichier de champ."""
    modes: List[ModeSchema] = Field(default_factory=list)
    file: Optional[str] = Field(None, description="Fichier au format spectral-field v1")
    amplitude: float = Field(1.0, description="Facteur multiplicatif")

    @model_validator(mode="after")
    def _one_source(self):
        if self.modes and self.file:
            raise ValueError("Donner soit 'modes', soit 'file', pas les deux")
        return self


class CoefficientSchema(BaseModel):
    """Coefficient complexifié ξ = re + i·im."""
    re: FieldSchema = Field(default_factory=FieldSchema)
    im: FieldSchema = Field(default_factory=FieldSchema)


class TermSchema(BaseModel):
    """Terme z^α ξ_α d'une expansion."""
    exponent_re: List[str] = Field(..., description="Parties réelles α_j (rationnels), j = -1..k")
    exponent_im: Optional[List[float]] = Field(None, description="Parties imaginaires α_j")
    coefficient: CoefficientSchema
    with_conjugate: bool = Field(True, description="Ajoute le terme conjugué z^ᾱ ξ̄")

    @field_validator("exponent_re", mode="before")
    @classmethod
    def _rationals(cls, v):
        return [_rational_str(x) for x in v]

    @model_validator(mode="after")
    def _lengths(self):
        if self.exponent_im is not None and len(self.exponent_im) != len(self.exponent_re):
            raise ValueError("exponent_re et exponent_im doivent avoir la même longueur")
        return self


class ForceOrderSchema(BaseModel):
    """Polynôme p_n associé à la décroissance μ_n."""
    mu: str = Field(..., description="μ_n (rationnel > 0)")
    terms: List[TermSchema] = Field(default_factory=list)

    @field_validator("mu", mode="before")
    @classmethod
    def _mu(cls, v):
        frac = parse_rational(v)
        if frac <= 0:
            raise ValueError("μ_n doit être > 0")
        return str(frac)


class ForceSpecSchema(BaseModel):
    """Expansion de la force: p_n ∈ 𝒫_{m*}(k, -μ_n)."""
    m_star: int = Field(0, ge=0)
    k: int = Field(0, ge=-1, description="Profondeur commune du vecteur d'échelles")
    generators: Optional[List[str]] = Field(None, description="Générateurs du semi-groupe (défaut: les μ_n)")
    cutoff: Optional[str] = Field(None, description="Borne de la suite (défaut: le plus grand μ_n)")
    orders: List[ForceOrderSchema] = Field(default_factory=list)
    remainder: Optional[str] = Field(None, description="Description libre du reste (diagnostic)")

    @field_validator("generators", mode="before")
    @classmethod
    def _gens(cls, v):
        return None if v is None else [_rational_str(x) for x in v]

    @field_validator("cutoff", mode="before")
    @classmethod
    def _cutoff(cls, v):
        return None if v is None else _rational_str(v)

    @model_validator(mode="after")
    def _coherence(self):
        if self.k < self.m_star:
            raise ValueError("k doit être >= m_star")
        seen = set()
        for order in self.orders:
            if order.mu in seen:
                raise ValueError(f"μ_n = {order.mu} apparaît dans plusieurs ordres")
            seen.add(order.mu)
        return self


class LatticeSchema(BaseModel):
    resolution: int = Field(16, ge=4, description="N modes par axe")
    box: List[float] = Field(
        default_factory=lambda: [2 * math.pi] * 3,
        min_length=3,
        max_length=3,
        description="Longueurs (l1, l2, l3), max = 2π",
    )


class SolverConfig(BaseModel):
    """Paramètres d'intégration en temps (facteur intégrant pour A, point milieu explicite pour B et f)."""
    scheme: Literal["ifrk2"] = "ifrk2"
    dt: float = Field(1e-3, gt=0)
    t_start: float = Field(1.0, description="Temps initial (dans le domaine de L̂_k)")
    t_end: float = Field(10.0)
    n_samples: int = Field(50, ge=2, description="Nombre d'échantillons si sample_times est vide")
    sample_spacing: Literal["linear", "log"] = "log"
    sample_times: List[float] = Field(default_factory=list)
    clip_threshold: Optional[float] = Field(None, gt=0, description="Seuil d'énergie d'explosion")
    dealias_inputs: bool = True

    @model_validator(mode="after")
    def _horizon(self):
        if self.t_end <= self.t_start:
            raise ValueError("t_end doit être > t_start")
        if self.sample_times:
            times = self.sample_times
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("sample_times doit être strictement croissant")
            if times[0] < self.t_start or times[-1] > self.t_end:
                raise ValueError("sample_times hors de [t_start, t_end]")
        return self


class FitSchema(BaseModel):
    """Fenêtre d'ajustement des pentes et marge du verdict."""
    t_lo: Optional[float] = None
    t_hi: Optional[float] = None
    margin: float = Field(default_factory=lambda: settings.VERDICT_MARGIN, ge=0)


class ForcingSchema(BaseModel):
    """Reste g(t) = amplitude · L_m(t)^{-μ-δ0} · champ."""
    amplitude: float = 0.0
    delta0: float = Field(0.5, gt=0)
    field: FieldSchema = Field(default_factory=FieldSchema)


class LinearSchema(BaseModel):
    """Expérience linéaire w' = -Aw + p(L̂_k(t)) + g(t)."""
    m: int = Field(0, ge=0)
    k: int = Field(0, ge=-1)
    mu: str = Field("1")
    terms: List[TermSchema] = Field(default_factory=list)
    g: ForcingSchema = Field(default_factory=ForcingSchema)
    w0: FieldSchema = Field(default_factory=FieldSchema)

    @field_validator("mu", mode="before")
    @classmethod
    def _mu(cls, v):
        return _rational_str(v)


class LemmaCaseSchema(BaseModel):
    m: int = Field(0, ge=0)
    lam: float = Field(1.0, gt=0)
    gamma: float = Field(1.0, gt=0)
    t_star: float = Field(2.0)


class LemmaSchema(BaseModel):
    cases: List[LemmaCaseSchema] = Field(
        default_factory=lambda: [
            LemmaCaseSchema(m=0, lam=1, gamma=1, t_star=1),
            LemmaCaseSchema(m=1, lam=1, gamma=1, t_star=2),
            LemmaCaseSchema(m=1, lam=2, gamma=0.5, t_star=2),
        ]
    )
    t_max: float = Field(1e3, gt=0)
    n_points: int = Field(200, ge=10)


class OutputSchema(BaseModel):
    name: str = Field("experiment", description="Préfixe des fichiers produits")
    write_fields: bool = False


class ExperimentConfig(BaseModel):
    """Document de configuration d'une expérience."""
    kind: ExperimentKind = "nse-power"
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    lattice: LatticeSchema = Field(default_factory=LatticeSchema)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    monitor: List[GevreyIndex] = Field(default_factory=lambda: [GevreyIndex()])
    residual_index: GevreyIndex = Field(
        default_factory=lambda: GevreyIndex(alpha=0.9),
        description="Norme des résidus |·|_{α+1−ε,σ} (données dans G_{0,0}, ε = 0.1)",
    )
    order: int = Field(1, ge=1, description="Troncature N")
    fit: FitSchema = Field(default_factory=FitSchema)
    force: Optional[ForceSpecSchema] = None
    linear: Optional[LinearSchema] = None
    perturbation: float = Field(1e-3, ge=0, description="Amplitude du bruit de la donnée perturbée")
    dt_levels: int = Field(3, ge=2, description="Nombre de pas dt, dt/2, ... (manufactured)")
    lemma: LemmaSchema = Field(default_factory=LemmaSchema)
    output: OutputSchema = Field(default_factory=OutputSchema)

    @model_validator(mode="after")
    def _consistency(self):
        lo = self.fit.t_lo if self.fit.t_lo is not None else self.solver.t_start
        hi = self.fit.t_hi if self.fit.t_hi is not None else self.solver.t_end
        if not (self.solver.t_start <= lo < hi <= self.solver.t_end):
            raise ValueError("La fenêtre d'ajustement doit être incluse dans [t_start, t_end]")
        if self.kind in ("nse-power", "nse-log", "manufactured"):
            if self.force is None:
                raise ValueError(f"L'expérience {self.kind} requiert une section 'force'")
            if self.order > len(self.force.orders):
                raise ValueError("order ne peut dépasser le nombre de p_n fournis")
            if self.kind == "nse-power" and self.force.m_star != 0:
                raise ValueError("nse-power requiert m_star = 0")
            if self.kind == "nse-log" and self.force.m_star < 1:
                raise ValueError("nse-log requiert m_star >= 1")
        if self.kind == "linear" and self.linear is None:
            raise ValueError("L'expérience linear requiert une section 'linear'")
        return self
