"""
Routes HTTP du harnais: construction des expansions, lemme intégral,
self-test et vérification (même document de configuration que la CLI).
"""

import logging
from typing import Literal, Optional

from fastapi import APIRouter, HTTPException, Query, status
from pydantic import BaseModel, Field

from app.schemas.experiment_schema import ExperimentConfig, LemmaSchema
from app.schemas.report_schema import ConvergenceReport, ExpandResult, LemmaTable, ResidualReport, SelfTestReport
from app.services import experiment_service, selftest_service, timescale_service

logger = logging.getLogger(__name__)

router = APIRouter(tags=["Experiments"])


class VerifyResponse(BaseModel):
    """Rapport d'une vérification et son résumé texte."""
    kind: str
    success: bool
    summary: str
    residual: Optional[ResidualReport] = None
    convergence: Optional[ConvergenceReport] = None
    lemma: Optional[LemmaTable] = None


class LemmaRequest(BaseModel):
    lemma: LemmaSchema = Field(default_factory=LemmaSchema)


@router.post(
    "/expand",
    response_model=ExpandResult,
    summary="Construire q_1..q_N à partir de l'expansion de la force",
    responses={400: {"description": "Configuration ou classe invalide"}},
)
def expand(cfg: ExperimentConfig):
    """
    Construit les termes q_n par la récurrence et retourne leur bilan
    (nombre de termes, normes des coefficients). Aucun fichier n'est écrit.
    """
    if cfg.force is None:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="Section 'force' requise")
    return experiment_service.expand(cfg)


@router.post(
    "/lemma-integral",
    response_model=LemmaTable,
    summary="Tableau des rapports du lemme intégral",
)
def lemma_integral(request: LemmaRequest):
    grid = timescale_service.default_lemma_grid(request.lemma.t_max, request.lemma.n_points)
    return timescale_service.lemma_integral_table(request.lemma.cases, grid)


@router.get(
    "/selftest",
    response_model=SelfTestReport,
    summary="Exécuter le self-test (profil rapide)",
)
def selftest(
    fault: Optional[Literal["resolvent-sign"]] = Query(None, description="Faute injectée"),
    seed: Optional[int] = Query(None),
):
    return selftest_service.run_selftest("quick", fault=fault, seed=seed)


@router.post(
    "/verify",
    response_model=VerifyResponse,
    summary="Exécuter une expérience de vérification",
    responses={400: {"description": "Configuration invalide ou erreur numérique"}},
)
def verify(cfg: ExperimentConfig):
    """
    Exécute l'expérience décrite par la configuration (kind: linear, nse-power,
    nse-log, manufactured ou lemma-integral) et retourne son rapport.
    """
    if cfg.kind == "selftest":
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="Utiliser GET /selftest")
    logger.info(f"🚀 Vérification demandée: {cfg.kind}")
    report = experiment_service.run_experiment(cfg)
    response = VerifyResponse(
        kind=cfg.kind,
        success=experiment_service.is_success(report),
        summary=experiment_service.summary_text(report),
    )
    if isinstance(report, ResidualReport):
        response.residual = report
    elif isinstance(report, ConvergenceReport):
        response.convergence = report
    else:
        response.lemma = report
    return response
