"""
Application FastAPI principale: surface HTTP du harnais de vérification
des expansions asymptotiques de Navier-Stokes.
"""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from app.core.config import settings, validate_settings
from app.core.exceptions import CoherentNSEError
from app.routes import experiment_routes
from app.utils.logger import setup_logging

# ============ Configuration du logging ============
setup_logging()
logger = logging.getLogger(__name__)

# ============ Validation des paramètres ============
try:
    validate_settings()
    logger.info("✅ Configuration validée avec succès")
except Exception as e:
    logger.error(f"❌ Erreur de configuration: {e}")
    raise


@asynccontextmanager
async def lifespan(_: FastAPI):
    """Gestionnaire du cycle de vie de l'application."""
    logger.info("🚀 Application démarrée")
    yield
    logger.info("✅ Application arrêtée")


# ============ Création de l'application ============
app = FastAPI(
    title=settings.PROJECT_NAME,
    description="API de construction et de vérification numérique d'expansions asymptotiques cohérentes",
    version=settings.API_VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/openapi.json",
    lifespan=lifespan,
)


@app.get(
    "/",
    tags=["Health"],
    summary="Vérifier l'état de l'API",
    responses={200: {"description": "API en fonctionnement"}},
)
def root():
    """Endpoint de santé pour vérifier que l'API est en fonctionnement."""
    return {
        "message": "Coherent NSE Expansions API Running",
        "version": settings.API_VERSION,
        "status": "healthy",
    }


@app.get(
    "/health",
    tags=["Health"],
    summary="Vérifier la santé de l'API",
    responses={200: {"description": "API saine"}},
)
def health_check():
    """Endpoint de santé détaillé."""
    return {
        "status": "healthy",
        "version": settings.API_VERSION,
        "debug": settings.DEBUG,
        "selftest_profile": settings.SELFTEST_PROFILE,
    }


# ============ Enregistrement des routes ============
app.include_router(experiment_routes.router)
logger.info("✅ Routes enregistrées avec succès")


# ============ Gestion des erreurs globales ============
@app.exception_handler(CoherentNSEError)
@app.exception_handler(ValidationError)
@app.exception_handler(ValueError)
async def library_exception_handler(_: Request, exc: Exception):
    """Erreurs de domaine, de classe ou de configuration: 400."""
    logger.warning(f"⚠️ Requête rejetée: {exc}")
    return JSONResponse(
        status_code=status.HTTP_400_BAD_REQUEST,
        content={"detail": str(exc), "error": type(exc).__name__},
    )


@app.exception_handler(Exception)
async def global_exception_handler(_: Request, exc: Exception):
    """Gestionnaire global des exceptions."""
    logger.error(f"❌ Erreur non gérée: {exc}")
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"detail": "Erreur interne du serveur"},
    )
