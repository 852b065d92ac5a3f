"""
Orchestration des expériences de vérification.

- linear: w' = -Aw + p(L̂_k(t)) + g(t), résidu |w - Z p|
- nse-power / nse-log: u' + Au + B(u, u) = Σ_{n<=N} p_n, résidus r_N = |u - Σ_{n<=N} q_n|
- manufactured: convergence en dt sous la force manufacturée
- lemma-integral: tableau des rapports du lemme intégral

Les pentes sont ajustées contre ln L_{m*}(t).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from scipy import stats

from app.core.config import settings
from app.core.exceptions import DomainError, FitError
from app.models.expansion import Expansion
from app.models.spectral_field import GevreyIndex, Lattice, SpectralField
from app.models.trajectory import Trajectory
from app.schemas.experiment_schema import ExperimentConfig, SolverConfig, parse_rational
from app.schemas.report_schema import (
    ConvergenceReport,
    ExpandResult,
    FitResult,
    LemmaTable,
    ResidualReport,
    ResidualSample,
    TruncationResult,
)
from app.services import (
    constructor_service,
    expansion_service,
    field_service,
    solver_service,
    timescale_service,
)
from app.utils import serialization

logger = logging.getLogger(__name__)

Report = Union[ResidualReport, ConvergenceReport, LemmaTable]

SMALL_DATA_NOTE = "Données lisses et petites: solution de Galerkin régulière (pas de solution faible générale)"


# ============ Configuration ============

def _parse_override(item: str) -> Tuple[List[str], Any]:
    if "=" not in item:
        raise ValueError(f"Surcharge invalide '{item}': attendu clé.sous_clé=valeur")
    key, raw = item.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ValueError(f"Surcharge invalide '{item}': clé vide")
    return path, yaml.safe_load(raw)


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Applique des surcharges 'a.b.c=valeur' (valeurs lues comme scalaires YAML).
    Un indice entier adresse un élément de liste: 'force.orders.0.mu=2'.
    """
    for item in overrides:
        path, value = _parse_override(item)
        node: Any = data
        for part in path[:-1]:
            if isinstance(node, list):
                node = node[int(part)]
            else:
                node = node.setdefault(part, {})
        last = path[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
        logger.debug(f"Surcharge {'.'.join(path)} = {value!r}")
    return data


def load_config(path: Optional[Path] = None, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """
    Charge une configuration YAML et applique les surcharges.

    Raises:
        FileNotFoundError: si le fichier n'existe pas
        pydantic.ValidationError: si le document est invalide
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Configuration introuvable: {path}")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        logger.info(f"📦 Configuration chargée: {path}")
    data = apply_overrides(data, overrides)
    return ExperimentConfig.model_validate(data)


def build_lattice(cfg: ExperimentConfig) -> Lattice:
    return Lattice(cfg.lattice.resolution, tuple(cfg.lattice.box))


def fit_window(cfg: ExperimentConfig) -> Tuple[float, float]:
    lo = cfg.fit.t_lo if cfg.fit.t_lo is not None else cfg.solver.t_start
    hi = cfg.fit.t_hi if cfg.fit.t_hi is not None else cfg.solver.t_end
    return lo, hi


# ============ Ajustement ============

def fit_decay_exponent(times: Sequence[float], values: Sequence[float], m: int) -> FitResult:
    """
    Pente des moindres carrés de ln r contre ln L_m(t).

    Args:
        times: Instants (dans le domaine de L_m)
        values: Résidus r(t) > 0
        m: Indice du logarithme itéré (0: ln t, 1: ln ln t, ...)

    Returns:
        FitResult (pente, erreur standard, ordonnée à l'origine)

    Raises:
        FitError: trop peu d'échantillons, résidus non positifs ou t hors domaine
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(values, dtype=float)
    if t.shape != r.shape:
        raise FitError("Séries t et r de longueurs différentes")
    if len(t) < settings.MIN_FIT_SAMPLES:
        raise FitError(f"Ajustement impossible: {len(t)} échantillons (minimum {settings.MIN_FIT_SAMPLES})")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise FitError("Ajustement impossible: résidus non positifs ou non finis")
    try:
        x = np.log(timescale_service.iter_log_series(m, t))
    except DomainError as e:
        raise FitError(f"Ajustement impossible: {e}") from e
    if not np.all(np.isfinite(x)) or np.ptp(x) == 0:
        raise FitError("Ajustement impossible: abscisses ln L_m(t) dégénérées")
    fit = stats.linregress(x, np.log(r))
    return FitResult(
        slope=float(fit.slope),
        stderr=float(fit.stderr),
        intercept=float(fit.intercept),
        n_samples=len(t),
        m=m,
    )


def _windowed(times: Sequence[float], values: Sequence[float], lo: float, hi: float):
    pairs = [(t, v) for t, v in zip(times, values) if lo <= t <= hi]
    return [t for t, _ in pairs], [v for _, v in pairs]


def _try_fit(times, values, m, lo, hi, notes: List[str], what: str) -> Optional[FitResult]:
    t, v = _windowed(times, values, lo, hi)
    try:
        return fit_decay_exponent(t, v, m)
    except FitError as e:
        notes.append(f"{what}: {e}")
        logger.warning(f"⚠️ {what}: {e}")
        return None


def slopes_agree(a: Optional[FitResult], b: Optional[FitResult]) -> Optional[bool]:
    """|s - s'| <= 2 sqrt(se² + se'²)."""
    if a is None or b is None:
        return None
    return abs(a.slope - b.slope) <= 2.0 * math.hypot(a.stderr, b.stderr)


def _truncation(order: int, mu: Fraction, fit: Optional[FitResult], margin_min: float) -> TruncationResult:
    mu_f = float(mu)
    margin = None if fit is None else fit.slope + mu_f
    return TruncationResult(
        order=order,
        mu=str(mu),
        threshold=-mu_f,
        fit=fit,
        margin=margin,
        passed=margin is not None and margin < -margin_min,
    )


def run_decay_observation(
    times: Sequence[float],
    norms: Sequence[float],
    m: int,
    lo: float,
    hi: float,
    notes: List[str],
) -> Optional[FitResult]:
    """Pente observée de |u(t)| contre ln L_m(t) (régularité éventuelle, non vérifiée)."""
    fit = _try_fit(times, norms, m, lo, hi, notes, "décroissance de la solution")
    if fit is not None:
        logger.info(f"Décroissance observée de la solution: pente {fit.slope:.3f} ± {fit.stderr:.3f}")
    return fit


# ============ Expérience linéaire ============

def _remainder_force(cfg: ExperimentConfig, lattice: Lattice, base_dir: Optional[Path]):
    lin = cfg.linear
    if lin.g.amplitude == 0.0:
        return None
    shape = constructor_service.field_from_schema(lin.g.field, lattice, base_dir)
    decay = float(parse_rational(lin.mu)) + lin.g.delta0
    amplitude = lin.g.amplitude

    def g(t: float) -> SpectralField:
        return shape * (amplitude * timescale_service.iter_log(lin.m, t) ** (-decay))

    return g


def run_linear_experiment(cfg: ExperimentConfig, base_dir: Optional[Path] = None) -> ResidualReport:
    """
    Intègre w' = -Aw + p + g et ajuste la pente de r(t) = |w(t) - (Z p)(t)|.

    Verdict: pente <= -μ - marge. Avec p = 0 et g = 0 le régime est
    exponentiel et le test de pente est sans objet.
    """
    lin = cfg.linear
    lattice = build_lattice(cfg)
    mu = parse_rational(lin.mu)
    idx = cfg.residual_index
    p = constructor_service.expansion_from_terms(lin.terms, lattice, lin.k, lin.m, -mu, base_dir)
    expansion_service.assert_class(p, lin.m, lin.k, -mu, what="p")
    zp = expansion_service.op_Z(p)
    g = _remainder_force(cfg, lattice, base_dir)
    exponential = p.is_zero() and g is None

    t0 = cfg.solver.t_start
    if lin.w0.modes or lin.w0.file:
        w0 = constructor_service.field_from_schema(lin.w0, lattice, base_dir)
    else:
        w0 = expansion_service.evaluate(zp, t0)

    def probe(t: float, w: SpectralField) -> Dict[str, float]:
        ref = expansion_service.evaluate(zp, t) if not zp.is_zero() else SpectralField.zero(lattice)
        return {"r_1": field_service.gevrey_norm(w - ref, idx), "solution": field_service.gevrey_norm(w, idx)}

    logger.info(f"🚀 Expérience linéaire m={lin.m}, k={lin.k}, μ={mu}, {len(p)} termes")
    traj = solver_service.integrate_stokes_linear(w0, p, g, cfg.solver, cfg.monitor, probe)

    notes = list(traj.notes) + [SMALL_DATA_NOTE]
    residuals = [row["r_1"] for row in traj.probes]
    samples = [
        ResidualSample(t=t, residuals=[row["r_1"]], solution_norm=row["solution"])
        for t, row in zip(traj.times, traj.probes)
    ]
    report = ResidualReport(
        kind="linear",
        m_star=lin.m,
        seed=cfg.seed,
        resolution=lattice.resolution,
        norm_alpha=idx.alpha,
        norm_sigma=idx.sigma,
        margin_min=cfg.fit.margin,
        regime="exponential" if exponential else "algebraic",
        samples=samples,
        initial_mismatch=residuals[0] if traj.times and traj.times[0] == t0 else 0.0,
        horizon_limited=lin.m >= 2,
        notes=notes,
    )
    if exponential:
        report.notes.append("p = 0 et g = 0: décroissance exponentielle, test de pente sans objet")
        report.verdict = True
        logger.info("✅ Régime exponentiel (test de pente sans objet)")
        return report

    lo, hi = fit_window(cfg)
    fit = _try_fit(traj.times, residuals, lin.m, lo, hi, report.notes, "r_1")
    report.truncations = [_truncation(1, mu, fit, cfg.fit.margin)]
    report.verdict = report.truncations[0].passed
    _log_verdict(report)
    return report


# ============ Expériences non linéaires ============

def prepare_expansion(cfg: ExperimentConfig, base_dir: Optional[Path] = None):
    """Lit la force, construit q_1..q_N. Retourne (réseau, spec, q_list)."""
    lattice = build_lattice(cfg)
    spec = constructor_service.force_spec_from_schema(cfg.force, lattice, base_dir)
    q_list = constructor_service.construct_expansion(spec, cfg.order)
    return lattice, spec, q_list


def _residual_probe(q_list: Sequence[Expansion], lattice: Lattice, idx: GevreyIndex):
    def probe(t: float, u: SpectralField) -> Dict[str, float]:
        out: Dict[str, float] = {}
        partial = SpectralField.zero(lattice)
        for n, q in enumerate(q_list, start=1):
            partial = partial + expansion_service.evaluate(q, t)
            out[f"r_{n}"] = field_service.gevrey_norm(u - partial, idx)
        out["solution"] = field_service.gevrey_norm(u, idx)
        return out

    return probe


def run_nse_experiment(cfg: ExperimentConfig, base_dir: Optional[Path] = None) -> ResidualReport:
    """
    Construit q_1..q_N, intègre NSE sous f = Σ_{n<=N} p_n depuis u = Σ q_n(t_start)
    et depuis une donnée perturbée, puis ajuste la pente de chaque r_N.

    Raises:
        BlowUpError: si la solution explose (réduire les amplitudes)
    """
    lattice, spec, q_list = prepare_expansion(cfg, base_dir)
    N = cfg.order
    idx = cfg.residual_index
    t0 = cfg.solver.t_start
    rng = np.random.default_rng(cfg.seed)

    def force(t: float) -> SpectralField:
        return constructor_service.force_value(spec, N, t)

    u0 = constructor_service.expansion_sum(q_list, t0, lattice)
    runs = [u0]
    if cfg.perturbation > 0:
        runs.append(u0 + field_service.random_field(lattice, rng, max_mode=2, amplitude=cfg.perturbation))
    probe = _residual_probe(q_list, lattice, idx)

    logger.info(f"🚀 Expérience {cfg.kind}: N={N}, m*={spec.m_star}, {len(runs)} intégration(s)")
    with ThreadPoolExecutor(max_workers=min(len(runs), settings.MAX_WORKERS)) as pool:
        futures = [
            pool.submit(solver_service.integrate_nse, u, force, cfg.solver, cfg.monitor, probe) for u in runs
        ]
        trajectories: List[Trajectory] = [f.result() for f in futures]
    main = trajectories[0]
    perturbed = trajectories[1] if len(trajectories) > 1 else None

    notes = list(main.notes) + [SMALL_DATA_NOTE]
    samples = []
    for i, t in enumerate(main.times):
        row = main.probes[i]
        samples.append(
            ResidualSample(
                t=t,
                residuals=[row[f"r_{n}"] for n in range(1, N + 1)],
                perturbed=[perturbed.probes[i][f"r_{n}"] for n in range(1, N + 1)] if perturbed else [],
                solution_norm=row["solution"],
            )
        )

    report = ResidualReport(
        kind=cfg.kind,
        m_star=spec.m_star,
        seed=cfg.seed,
        resolution=lattice.resolution,
        norm_alpha=idx.alpha,
        norm_sigma=idx.sigma,
        margin_min=cfg.fit.margin,
        samples=samples,
        initial_mismatch=main.probes[0][f"r_{N}"] if main.times and main.times[0] == t0 else 0.0,
        horizon_limited=spec.m_star >= 2,
        notes=notes,
    )
    if report.horizon_limited:
        report.notes.append(f"m* = {spec.m_star}: L_{spec.m_star}(t) croît trop lentement, horizon limité")

    lo, hi = fit_window(cfg)
    m = spec.m_star
    for n in range(1, N + 1):
        series = [row[f"r_{n}"] for row in main.probes]
        fit = _try_fit(main.times, series, m, lo, hi, report.notes, f"r_{n}")
        result = _truncation(n, spec.sequence[n], fit, cfg.fit.margin)
        if perturbed is not None:
            series_p = [row[f"r_{n}"] for row in perturbed.probes]
            result.perturbed_fit = _try_fit(perturbed.times, series_p, m, lo, hi, report.notes, f"r_{n} perturbé")
            result.slopes_agree = slopes_agree(fit, result.perturbed_fit)
        report.truncations.append(result)

    report.solution_decay = run_decay_observation(
        main.times, [row["solution"] for row in main.probes], m, lo, hi, report.notes
    )
    report.verdict = all(tr.passed for tr in report.truncations)
    _log_verdict(report)
    return report


def run_manufactured_convergence(cfg: ExperimentConfig, base_dir: Optional[Path] = None) -> ConvergenceReport:
    """
    Erreur relative |u(t_end) - Σ q_n(t_end)| / |Σ q_n(t_end)| sous la force
    manufacturée, pour dt, dt/2, dt/4, ... Verdict: rapports successifs dans [3, 5].
    """
    lattice, _, q_list = prepare_expansion(cfg, base_dir)
    solver = cfg.solver
    idx = cfg.residual_index

    def force(t: float) -> SpectralField:
        return constructor_service.manufactured_force(q_list, t, lattice)

    u0 = constructor_service.expansion_sum(q_list, solver.t_start, lattice)
    exact = constructor_service.expansion_sum(q_list, solver.t_end, lattice)
    scale = field_service.gevrey_norm(exact, idx) or 1.0

    dts = [solver.dt / 2**level for level in range(cfg.dt_levels)]
    errors = []
    for dt in dts:
        level_cfg = solver.model_copy(update={"dt": dt, "sample_times": [solver.t_end]})
        logger.info(f"🚀 Solution manufacturée, dt={dt:g}")
        traj = solver_service.integrate_nse(u0, force, level_cfg, keep_fields=True)
        errors.append(field_service.gevrey_norm(traj.fields[-1] - exact, idx) / scale)
    ratios = [a / b if b > 0 else math.inf for a, b in zip(errors, errors[1:])]
    verdict = all(3.0 <= r <= 5.0 for r in ratios)
    status = "✅" if verdict else "❌"
    logger.info(f"{status} Rapports d'erreur: {', '.join(f'{r:.3f}' for r in ratios)}")
    return ConvergenceReport(
        resolution=lattice.resolution,
        t_start=solver.t_start,
        t_end=solver.t_end,
        dts=dts,
        errors=errors,
        ratios=ratios,
        verdict=verdict,
    )


def run_lemma_table(cfg: ExperimentConfig) -> LemmaTable:
    grid = timescale_service.default_lemma_grid(cfg.lemma.t_max, cfg.lemma.n_points)
    return timescale_service.lemma_integral_table(cfg.lemma.cases, grid)


def run_experiment(cfg: ExperimentConfig, base_dir: Optional[Path] = None) -> Report:
    """Dispatch selon cfg.kind (le self-test passe par selftest_service)."""
    if cfg.kind == "linear":
        return run_linear_experiment(cfg, base_dir)
    if cfg.kind in ("nse-power", "nse-log"):
        return run_nse_experiment(cfg, base_dir)
    if cfg.kind == "manufactured":
        return run_manufactured_convergence(cfg, base_dir)
    if cfg.kind == "lemma-integral":
        return run_lemma_table(cfg)
    raise ValueError(f"Type d'expérience non vérifiable: {cfg.kind}")


def is_success(report: Report) -> bool:
    if isinstance(report, LemmaTable):
        return all(s.bounded for s in report.summaries)
    return report.verdict


def _log_verdict(report: ResidualReport) -> None:
    for tr in report.truncations:
        status = "✅" if tr.passed else "❌"
        slope = f"{tr.fit.slope:.3f} ± {tr.fit.stderr:.3f}" if tr.fit else "n/a"
        logger.info(f"{status} N={tr.order}: pente {slope}, seuil {tr.threshold:.3f}")


# ============ Simulation et expansion ============

def simulate(cfg: ExperimentConfig, base_dir: Optional[Path] = None) -> Trajectory:
    """Trajectoire brute (diagnostics et résidus en sondes) pour la commande simulate."""
    if cfg.kind == "linear":
        lin = cfg.linear
        lattice = build_lattice(cfg)
        mu = parse_rational(lin.mu)
        p = constructor_service.expansion_from_terms(lin.terms, lattice, lin.k, lin.m, -mu, base_dir)
        zp = expansion_service.op_Z(p)
        if lin.w0.modes or lin.w0.file:
            w0 = constructor_service.field_from_schema(lin.w0, lattice, base_dir)
        else:
            w0 = expansion_service.evaluate(zp, cfg.solver.t_start)
        probe = _residual_probe([zp], lattice, cfg.residual_index)
        return solver_service.integrate_stokes_linear(
            w0, p, _remainder_force(cfg, lattice, base_dir), cfg.solver, cfg.monitor, probe,
            keep_fields=cfg.output.write_fields,
        )
    if cfg.kind in ("nse-power", "nse-log", "manufactured"):
        lattice, spec, q_list = prepare_expansion(cfg, base_dir)
        if cfg.kind == "manufactured":
            def force(t: float) -> SpectralField:
                return constructor_service.manufactured_force(q_list, t, lattice)
        else:
            def force(t: float) -> SpectralField:
                return constructor_service.force_value(spec, cfg.order, t)
        u0 = constructor_service.expansion_sum(q_list, cfg.solver.t_start, lattice)
        probe = _residual_probe(q_list, lattice, cfg.residual_index)
        return solver_service.integrate_nse(
            u0, force, cfg.solver, cfg.monitor, probe, keep_fields=cfg.output.write_fields
        )
    raise ValueError(f"simulate n'accepte pas le type {cfg.kind}")


def expand(cfg: ExperimentConfig, base_dir: Optional[Path] = None, out_dir: Optional[Path] = None) -> ExpandResult:
    """Construit q_1..q_N et, si out_dir est donné, les écrit au format expansion v1."""
    if cfg.force is None:
        raise ValueError("La commande expand requiert une section 'force'")
    lattice, spec, q_list = prepare_expansion(cfg, base_dir)
    files: List[str] = []
    if out_dir is not None:
        for n, q in enumerate(q_list, start=1):
            path = Path(out_dir) / f"{cfg.output.name}.q{n}.exp"
            serialization.write_expansion(path, q)
            files.append(str(path))
    return ExpandResult(
        m_star=spec.m_star,
        k=spec.k,
        sequence=spec.sequence.labels(),
        expansions=constructor_service.summarize(q_list, spec.sequence, cfg.residual_index),
        files=files,
    )


# ============ Écriture des rapports ============

def residual_rows(report: ResidualReport) -> Tuple[List[Dict[str, float]], List[str]]:
    """Colonnes stables: t, r_1..r_N, r_1_perturbed.., solution."""
    n = max((len(s.residuals) for s in report.samples), default=0)
    columns = ["t"] + [f"r_{i}" for i in range(1, n + 1)]
    has_perturbed = any(s.perturbed for s in report.samples)
    if has_perturbed:
        columns += [f"r_{i}_perturbed" for i in range(1, n + 1)]
    columns.append("solution")
    rows = []
    for s in report.samples:
        row: Dict[str, float] = {"t": s.t, "solution": s.solution_norm}
        for i, r in enumerate(s.residuals, start=1):
            row[f"r_{i}"] = r
        for i, r in enumerate(s.perturbed, start=1):
            row[f"r_{i}_perturbed"] = r
        rows.append(row)
    return rows, columns


def summary_text(report: Report) -> str:
    """Résumé texte lisible d'un rapport."""
    lines: List[str] = []
    if isinstance(report, ResidualReport):
        lines.append(f"Expérience {report.kind} (m*={report.m_star}, N³={report.resolution}³, graine {report.seed})")
        lines.append(f"Régime: {report.regime}; désaccord initial {report.initial_mismatch:.3e}")
        for tr in report.truncations:
            slope = f"{tr.fit.slope:+.4f} ± {tr.fit.stderr:.4f}" if tr.fit else "n/a"
            margin = f"{tr.margin:+.4f}" if tr.margin is not None else "n/a"
            agree = "" if tr.slopes_agree is None else f", accord perturbé: {'oui' if tr.slopes_agree else 'non'}"
            lines.append(
                f"  N={tr.order} μ={tr.mu}: pente {slope}, seuil {tr.threshold:+.4f}, marge {margin}"
                f" -> {'OK' if tr.passed else 'ÉCHEC'}{agree}"
            )
        if report.solution_decay is not None:
            lines.append(f"Décroissance observée de |u|: pente {report.solution_decay.slope:+.4f}")
        lines.extend(f"Note: {note}" for note in report.notes)
        lines.append(f"Verdict: {'OK' if report.verdict else 'ÉCHEC'}")
    elif isinstance(report, ConvergenceReport):
        for dt, err in zip(report.dts, report.errors):
            lines.append(f"dt={dt:g}: erreur {err:.3e}")
        lines.append("Rapports: " + ", ".join(f"{r:.3f}" for r in report.ratios))
        lines.append(f"Verdict: {'OK' if report.verdict else 'ÉCHEC'}")
    else:
        for s in report.summaries:
            lines.append(
                f"m={s.m} λ={s.lam:g} γ={s.gamma:g} T*={s.t_star:g}: rapport max {s.max_ratio:.4g},"
                f" tendance {s.trend_slope:+.3e} -> {'borné' if s.bounded else 'croissant'}"
            )
    return "\n".join(lines) + "\n"


def write_report(report: Report, out_dir: Path, name: str) -> List[Path]:
    """Écrit <name>.json, <name>.csv et <name>.txt dans out_dir."""
    out_dir = Path(out_dir)
    written = [serialization.write_json(out_dir / f"{name}.json", report)]
    if isinstance(report, ResidualReport):
        rows, columns = residual_rows(report)
        written.append(serialization.write_csv(out_dir / f"{name}.csv", rows, columns))
    elif isinstance(report, ConvergenceReport):
        rows = [
            {"dt": dt, "error": err, "ratio": report.ratios[i - 1] if i else ""}
            for i, (dt, err) in enumerate(zip(report.dts, report.errors))
        ]
        written.append(serialization.write_csv(out_dir / f"{name}.csv", rows, ["dt", "error", "ratio"]))
    else:
        rows = [row.model_dump() for row in report.rows]
        columns = ["m", "lam", "gamma", "t_star", "t", "integral", "ratio"]
        written.append(serialization.write_csv(out_dir / f"{name}.csv", rows, columns))
    text_path = out_dir / f"{name}.txt"
    text_path.write_text(summary_text(report), encoding="utf-8")
    written.append(text_path)
    return written
