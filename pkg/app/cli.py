"""
Interface en ligne de commande (python -m app).

Codes de sortie: 0 succès, 1 erreur (configuration, domaine, solveur),
2 verdict ou self-test en échec.
"""

import functools
import json
import logging
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from app.core.config import settings, validate_settings
from app.core.exceptions import CoherentNSEError
from app.schemas.experiment_schema import ExperimentConfig
from app.services import experiment_service, selftest_service, solver_service
from app.utils import serialization
from app.utils.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_FAILED = 2


def _handle_errors(func):
    """Erreurs connues: message ❌ et code 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CoherentNSEError, ValidationError, ValueError, FileNotFoundError) as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            raise click.exceptions.Exit(EXIT_ERROR)

    return wrapper


def _load(ctx: click.Context, config: Optional[Path]) -> ExperimentConfig:
    return experiment_service.load_config(config, ctx.obj["overrides"])


def _base_dir(config: Optional[Path]) -> Optional[Path]:
    return Path(config).parent if config is not None else None


@click.group()
@click.option("--log-level", default=None, help="Niveau de log (défaut: NSE_LOG_LEVEL)")
@click.option("--log-format", type=click.Choice(["text", "json"]), default=None, help="Format des logs")
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    envvar="NSE_OUTPUT_DIR",
    help="Répertoire des artefacts (défaut: NSE_OUTPUT_DIR)",
)
@click.option("--set", "overrides", multiple=True, metavar="CLÉ=VALEUR", help="Surcharge d'un champ de configuration")
@click.version_option(settings.API_VERSION)
@click.pass_context
def cli(ctx: click.Context, log_level, log_format, output_dir, overrides):
    """Expansions asymptotiques cohérentes de Navier-Stokes 3D périodique."""
    setup_logging(log_level, log_format)
    validate_settings()
    ctx.ensure_object(dict)
    ctx.obj["output_dir"] = Path(output_dir) if output_dir else settings.OUTPUT_DIR
    ctx.obj["overrides"] = list(overrides)


config_argument = click.argument("config", type=click.Path(exists=True, dir_okay=False, path_type=Path))


@cli.command()
@config_argument
@click.pass_context
@_handle_errors
def expand(ctx: click.Context, config: Path):
    """Construit q_1..q_N et écrit chaque q_n au format expansion v1."""
    cfg = _load(ctx, config)
    out_dir = ctx.obj["output_dir"]
    result = experiment_service.expand(cfg, _base_dir(config), out_dir)
    serialization.write_json(out_dir / f"{cfg.output.name}.expand.json", result)
    for item in result.expansions:
        click.echo(f"q_{item.n}: μ={item.mu}, {item.n_terms} termes, |ξ|max={item.coefficient_norm:.4e}")


@cli.command()
@config_argument
@click.pass_context
@_handle_errors
def simulate(ctx: click.Context, config: Path):
    """Intègre l'équation et écrit la trajectoire en CSV."""
    cfg = _load(ctx, config)
    out_dir = ctx.obj["output_dir"]
    traj = experiment_service.simulate(cfg, _base_dir(config))
    path = solver_service.write_trajectory_csv(out_dir / f"{cfg.output.name}.trajectory.csv", traj)
    if traj.fields is not None:
        for i, u in enumerate(traj.fields):
            serialization.write_field(out_dir / f"{cfg.output.name}.sample{i}.field", u)
    click.echo(f"{len(traj)} échantillons écrits dans {path}")


@cli.command()
@config_argument
@click.pass_context
@_handle_errors
def verify(ctx: click.Context, config: Path):
    """Exécute l'expérience et écrit le rapport (JSON, CSV, résumé)."""
    cfg = _load(ctx, config)
    if cfg.kind == "selftest":
        raise ValueError("Utiliser la commande selftest")
    report = experiment_service.run_experiment(cfg, _base_dir(config))
    experiment_service.write_report(report, ctx.obj["output_dir"], cfg.output.name)
    click.echo(experiment_service.summary_text(report), nl=False)
    if not experiment_service.is_success(report):
        raise click.exceptions.Exit(EXIT_FAILED)


@cli.command()
@click.option("--profile", type=click.Choice(["quick", "full"]), default=None, help="Tailles des suites")
@click.option("--fault", type=click.Choice(list(selftest_service.FAULTS)), default=None, help="Faute injectée")
@click.option("--seed", type=int, default=None)
@click.pass_context
@_handle_errors
def selftest(ctx: click.Context, profile, fault, seed):
    """Exécute les suites d'invariants; code 2 si une vérification échoue."""
    report = selftest_service.run_selftest(profile, fault, seed)
    serialization.write_json(ctx.obj["output_dir"] / "selftest.json", report)
    for check in report.checks:
        status = "OK   " if check.passed else "ÉCHEC"
        value = "" if check.value is None else f" {check.value:.3e}"
        click.echo(f"{status} {check.suite}/{check.name}{value}")
    for key, value in report.bilinear_constants.items():
        click.echo(f"Constante B_C [{key}]: {value:.4f}")
    if not report.passed:
        raise click.exceptions.Exit(EXIT_FAILED)


@cli.command("lemma-integral")
@click.argument("config", required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_context
@_handle_errors
def lemma_integral(ctx: click.Context, config: Optional[Path]):
    """Tableau des rapports du lemme intégral (cas par défaut sans configuration)."""
    cfg = experiment_service.load_config(config, ["kind=lemma-integral", *ctx.obj["overrides"]])
    table = experiment_service.run_lemma_table(cfg)
    name = cfg.output.name if config is not None else "lemma"
    experiment_service.write_report(table, ctx.obj["output_dir"], name)
    click.echo(experiment_service.summary_text(table), nl=False)
    if not experiment_service.is_success(table):
        raise click.exceptions.Exit(EXIT_FAILED)


@cli.command()
def schema():
    """Affiche le schéma JSON des configurations."""
    click.echo(json.dumps(ExperimentConfig.model_json_schema(), indent=2, ensure_ascii=False))


@cli.command()
@click.option("--host", default=None, help="Hôte (défaut: NSE_HOST)")
@click.option("--port", type=int, default=None, help="Port (défaut: NSE_PORT)")
@click.option("--reload/--no-reload", default=None)
def serve(host, port, reload):
    """Démarre l'API HTTP (uvicorn)."""
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=host or settings.HOST,
        port=port or settings.PORT,
        reload=settings.RELOAD if reload is None else reload,
    )


def main():
    cli(obj={})


if __name__ == "__main__":
    main()
