"""
Fonctions exponentielles et logarithmes itérés E_m, L_m et vecteurs d'échelles.

Les puissances z^α du vecteur L̂_k(t) sont toujours évaluées en logarithme:
ln|z^α| = Σ Re(α_j) ln L_j(t), phase = Σ Im(α_j) ln L_j(t).
"""

import logging
import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from app.core.config import settings
from app.core.exceptions import DomainError, QuadratureError
from app.models.scale_vector import ScaleVector
from app.schemas.experiment_schema import LemmaCaseSchema
from app.schemas.report_schema import LemmaRow, LemmaSummary, LemmaTable

logger = logging.getLogger(__name__)

# Rapport "borné": pente de tendance <= TREND_TOL sur la dernière décade
TREND_TOL = 0.05


def iter_exp(m: int, t: float) -> float:
    """E_m(t): E_0(t) = t, E_{m+1}(t) = e^{E_m(t)}; inf en cas de dépassement."""
    if m < 0:
        raise ValueError(f"iter_exp attend m >= 0 (reçu {m})")
    value = float(t)
    for _ in range(m):
        try:
            value = math.exp(value)
        except OverflowError:
            return math.inf
    return value


def domain_floor(m: int) -> float:
    """E_m(0), borne inférieure (stricte) du domaine de L_m pour m >= 1."""
    return iter_exp(m, 0.0) if m >= 0 else -math.inf


def _check_domain(m: int, t: float, margin: float = 0.0) -> None:
    if m < 0:
        return
    floor = domain_floor(m)
    if not t > floor or t < floor + margin:
        raise DomainError(f"t = {t!r} hors du domaine de L_{m}: il faut t > E_{m}(0) = {floor!r}")


def iter_log(m: int, t: float) -> float:
    """
    L_m(t): L_{-1}(t) = e^t, L_0(t) = t, L_{m+1}(t) = ln L_m(t).

    Raises:
        DomainError: si m >= 1 et t <= E_m(0)
    """
    if m < -1:
        raise ValueError(f"iter_log attend m >= -1 (reçu {m})")
    if m == -1:
        return iter_exp(1, t)
    if m >= 1:
        _check_domain(m, t)
    value = float(t)
    for _ in range(m):
        value = math.log(value)
    return value


def iter_log_series(m: int, t_grid: Iterable[float]) -> np.ndarray:
    """L_m évalué sur une grille (vectorisé)."""
    t = np.asarray(list(t_grid) if not isinstance(t_grid, np.ndarray) else t_grid, dtype=float)
    if m < 0:
        raise ValueError("iter_log_series attend m >= 0")
    if m >= 1 and t.size and not np.all(t > domain_floor(m)):
        raise DomainError(f"Grille hors du domaine de L_{m} (t > {domain_floor(m)!r})")
    values = t.copy()
    for _ in range(m):
        values = np.log(values)
    return values


def scale_vector(k: int, t: float, margin: float = None) -> ScaleVector:
    """
    Représentation logarithmique de L̂_k(t).

    Args:
        k: Profondeur (>= -1)
        t: Temps, t >= E_k(0) + marge
        margin: Marge du domaine (défaut: settings.DOMAIN_MARGIN)

    Returns:
        ScaleVector avec log_values = (t, ln t, ..., ln L_k(t))
    """
    if k < -1:
        raise ValueError(f"Profondeur k invalide: {k}")
    margin = settings.DOMAIN_MARGIN if margin is None else margin
    t = float(t)
    _check_domain(k, t, margin)
    logs: List[float] = [t]
    value = t
    for _ in range(k + 1):
        value = math.log(value)
        logs.append(value)
    return ScaleVector(k=k, t=t, log_values=tuple(logs))


def iter_log_derivative(m: int, t: float) -> float:
    """L_m'(t) = 1 / (t Π_{k=1}^{m-1} L_k(t))."""
    if m == -1:
        return iter_exp(1, t)
    if m == 0:
        return 1.0
    _check_domain(m, t)
    denom = float(t)
    value = float(t)
    for _ in range(1, m):
        value = math.log(value)
        denom *= value
    return 1.0 / denom


def log_monomial(
    exponent_re: Sequence[float],
    exponent_im: Sequence[float],
    sv: ScaleVector,
) -> Tuple[float, float]:
    """(ln|z^α|, arg z^α) au point z = L̂_k(t)."""
    logs = sv.log_values
    if len(exponent_re) != len(logs):
        raise ValueError("Longueur d'exposant incompatible avec le vecteur d'échelles")
    log_mag = math.fsum(float(a) * x for a, x in zip(exponent_re, logs) if a)
    phase = math.fsum(float(b) * x for b, x in zip(exponent_im, logs) if b)
    return log_mag, phase


# ============ Lemme intégral ============

def lemma_integral(m: int, lam: float, gamma: float, t_star: float, t: float) -> float:
    """
    ∫_0^t e^{-γ(t-τ)} L_m(T* + τ)^{-λ} dτ par quadrature adaptative.

    Raises:
        QuadratureError: si scipy.integrate.quad ne converge pas
    """
    if t <= 0:
        return 0.0

    def integrand(s: float) -> float:
        # s = t - τ
        return math.exp(-gamma * s) * iter_log(m, t_star + t - s) ** (-lam)

    split = min(t, 60.0 / gamma)
    total = 0.0
    for a, b in ((0.0, split), (split, t)):
        if b <= a:
            continue
        result = integrate.quad(integrand, a, b, limit=400, epsabs=0.0, epsrel=1e-10, full_output=1)
        if len(result) > 3:
            raise QuadratureError(f"Quadrature non convergente sur [{a}, {b}]: {result[3]}")
        value, abserr = result[0], result[1]
        if abserr > 1e-6 * max(abs(value), 1e-300) and abserr > 1e-14:
            raise QuadratureError(f"Erreur de quadrature trop grande ({abserr:.3e}) sur [{a}, {b}]")
        total += value
    return total


def integral_lemma_ratio(
    m: int,
    lam: float,
    gamma: float,
    t_star: float,
    t_grid: Iterable[float],
) -> Tuple[float, List[Tuple[float, float, float]]]:
    """
    sup_t ∫_0^t e^{-γ(t-τ)} L_m(T*+τ)^{-λ}dτ / L_m(T*+t)^{-λ}.

    Returns:
        (rapport maximal, liste des (t, intégrale, rapport))
    """
    if lam <= 0 or gamma <= 0:
        raise ValueError("λ et γ doivent être > 0")
    _check_domain(m, t_star)
    rows = []
    for t in t_grid:
        t = float(t)
        value = lemma_integral(m, lam, gamma, t_star, t)
        ratio = value * iter_log(m, t_star + t) ** lam
        rows.append((t, value, ratio))
    max_ratio = max((r for _, _, r in rows), default=0.0)
    return max_ratio, rows


def default_lemma_grid(t_max: float, n_points: int) -> np.ndarray:
    """0 puis une grille géométrique jusqu'à t_max."""
    return np.concatenate(([0.0], np.geomspace(min(1e-2, t_max / 10), t_max, n_points - 1)))


def lemma_integral_table(
    cases: Iterable[LemmaCaseSchema],
    t_grid: Sequence[float],
) -> LemmaTable:
    """Tableau des rapports et tendance sur la dernière décade pour chaque cas."""
    table = LemmaTable()
    grid = np.asarray(t_grid, dtype=float)
    t_max = float(grid.max())
    for case in cases:
        logger.info(f"🚀 Lemme intégral m={case.m}, λ={case.lam}, γ={case.gamma}, T*={case.t_star}")
        max_ratio, rows = integral_lemma_ratio(case.m, case.lam, case.gamma, case.t_star, grid)
        for t, value, ratio in rows:
            table.rows.append(
                LemmaRow(
                    m=case.m, lam=case.lam, gamma=case.gamma, t_star=case.t_star,
                    t=t, integral=value, ratio=ratio,
                )
            )
        tail = [(t, r) for t, _, r in rows if t >= t_max / 10 and t > 0 and r > 0]
        if len(tail) >= 3:
            fit = stats.linregress(np.log([t for t, _ in tail]), np.log([r for _, r in tail]))
            trend = float(fit.slope)
        else:
            trend = 0.0
        bounded = math.isfinite(max_ratio) and trend <= TREND_TOL
        table.summaries.append(
            LemmaSummary(
                m=case.m, lam=case.lam, gamma=case.gamma, t_star=case.t_star,
                max_ratio=max_ratio, trend_slope=trend, bounded=bounded,
            )
        )
        status = "✅" if bounded else "⚠️"
        logger.info(f"{status} Rapport max {max_ratio:.4g}, tendance {trend:+.3e}")
    return table
