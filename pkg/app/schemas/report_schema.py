"""
Schémas Pydantic des rapports produits par le harnais (CLI et API).
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field


class FitResult(BaseModel):
    """Pente des moindres carrés de ln r contre ln L_m(t)."""
    slope: float
    stderr: float
    intercept: float
    n_samples: int
    m: int


class ResidualSample(BaseModel):
    t: float
    residuals: List[float] = Field(..., description="r_N(t) pour N = 1..order")
    perturbed: List[float] = Field(default_factory=list)
    solution_norm: Optional[float] = None


class TruncationResult(BaseModel):
    """Verdict pour une troncature N."""
    order: int
    mu: str = Field(..., description="μ_N (rationnel)")
    threshold: float = Field(..., description="-μ_N")
    fit: Optional[FitResult] = None
    margin: Optional[float] = Field(None, description="s_N + μ_N (δ_N empirique = -margin)")
    passed: bool = False
    perturbed_fit: Optional[FitResult] = None
    slopes_agree: Optional[bool] = None


class ResidualReport(BaseModel):
    """Résidus r_N(t) = |u(t) - Σ_{n<=N} q_n(t)|_{α,σ}, pentes et verdicts."""
    kind: str
    m_star: int
    seed: int
    resolution: int
    norm_alpha: float
    norm_sigma: float
    margin_min: float
    regime: Literal["algebraic", "exponential"] = "algebraic"
    samples: List[ResidualSample] = Field(default_factory=list)
    truncations: List[TruncationResult] = Field(default_factory=list)
    initial_mismatch: float = 0.0
    solution_decay: Optional[FitResult] = None
    horizon_limited: bool = False
    notes: List[str] = Field(default_factory=list)
    verdict: bool = False


class ConvergenceReport(BaseModel):
    """Erreur de la solution manufacturée pour dt, dt/2, dt/4, ..."""
    resolution: int
    t_start: float
    t_end: float
    dts: List[float]
    errors: List[float]
    ratios: List[float]
    ratio_window: List[float] = Field(default_factory=lambda: [3.0, 5.0])
    verdict: bool


class SelfTestCheck(BaseModel):
    suite: str
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""


class SelfTestReport(BaseModel):
    profile: Literal["quick", "full"]
    fault: Optional[str] = None
    seed: int
    checks: List[SelfTestCheck] = Field(default_factory=list)
    bilinear_constants: Dict[str, float] = Field(
        default_factory=dict, description="Constante empirique de B_C par indice (α, σ)"
    )
    passed: bool = True


class LemmaRow(BaseModel):
    m: int
    lam: float
    gamma: float
    t_star: float
    t: float
    integral: float
    ratio: float


class LemmaSummary(BaseModel):
    m: int
    lam: float
    gamma: float
    t_star: float
    max_ratio: float
    trend_slope: float = Field(..., description="Pente de ln(ratio) contre ln t sur la dernière décade")
    bounded: bool


class LemmaTable(BaseModel):
    rows: List[LemmaRow] = Field(default_factory=list)
    summaries: List[LemmaSummary] = Field(default_factory=list)


class ExpansionSummary(BaseModel):
    """Bilan d'un q_n construit."""
    n: int
    mu: str
    n_terms: int
    coefficient_norm: float = Field(..., description="max_α |ξ_α|_{α,σ}")
    coefficient_norm_gained: float = Field(..., description="max_α |ξ_α|_{α+1,σ}")


class ExpandResult(BaseModel):
    m_star: int
    k: int
    sequence: List[str]
    expansions: List[ExpansionSummary]
    files: List[str] = Field(default_factory=list)
