"""
Configuration centralisée pour l'application.
Gère toutes les variables d'environnement (préfixe NSE_) et les tolérances numériques.
"""

from pathlib import Path
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configuration de l'application."""

    model_config = SettingsConfigDict(
        env_prefix="NSE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # ============ Application ============
    PROJECT_NAME: str = "Coherent NSE Expansions"
    DEBUG: bool = False
    API_VERSION: str = "1.0.0"

    # ============ Serveur ============
    HOST: str = "0.0.0.0"
    PORT: int = 8000
    RELOAD: bool = False

    # ============ Logging ============
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["json", "text"] = "text"

    # ============ Sorties ============
    OUTPUT_DIR: Path = Path("output")

    # ============ Numérique ============
    # Marge du domaine des logarithmes itérés: t >= E_k(0) + marge
    DOMAIN_MARGIN: float = 1e-6
    # Fusion des exposants: tolérance absolue sur les parties imaginaires
    IM_MERGE_TOL: float = 1e-12
    # Termes dont le coefficient est < DROP_REL_TOL * échelle sont supprimés
    DROP_REL_TOL: float = 1e-14
    # Résidu imaginaire toléré à l'évaluation d'une expansion fermée
    REALNESS_TOL: float = 1e-10
    # Tolérance relative sur les coefficients conjugués
    CONJUGATE_TOL: float = 1e-10
    FFT_WORKERS: int = Field(1, description="Nombre de threads scipy.fft (-1 = tous)")
    MAX_WORKERS: int = Field(4, ge=1, description="Threads pour les sommes bilinéaires")

    # ============ Solveur ============
    BLOWUP_FACTOR: float = 1e3
    DIVERGENCE_TOL: float = 1e-13

    # ============ Harnais ============
    VERDICT_MARGIN: float = 0.05
    MIN_FIT_SAMPLES: int = 10
    DEFAULT_SEED: int = 12345
    SELFTEST_PROFILE: Literal["quick", "full"] = "quick"


# Instance globale des settings
settings = Settings()


def validate_settings(cfg: Optional[Settings] = None) -> bool:
    """Valide les paramètres critiques au démarrage."""
    cfg = cfg or settings

    if cfg.DOMAIN_MARGIN < 0:
        raise ValueError("⚠️ ERREUR: NSE_DOMAIN_MARGIN doit être positive ou nulle")

    for name in ("IM_MERGE_TOL", "DROP_REL_TOL", "REALNESS_TOL", "CONJUGATE_TOL"):
        if getattr(cfg, name) <= 0:
            raise ValueError(f"⚠️ ERREUR: NSE_{name} doit être strictement positive")

    if cfg.BLOWUP_FACTOR <= 1:
        raise ValueError("⚠️ ERREUR: NSE_BLOWUP_FACTOR doit être > 1")

    if cfg.FFT_WORKERS == 0:
        raise ValueError("⚠️ ERREUR: NSE_FFT_WORKERS ne peut pas valoir 0")

    return True
