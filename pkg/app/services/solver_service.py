"""
Intégration de Galerkin spectrale (troncature des 2/3) de

    u' + Au + B(u, u) = f(t)        (Navier-Stokes)
    w' + Aw = p(L̂_k(t)) + g(t)      (Stokes linéaire)

Schéma: facteur intégrant exact e^{-A dt} pour A, point milieu explicite pour B et f.
"""

import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import BlowUpError, NonFiniteError
from app.models.expansion import Expansion
from app.models.spectral_field import GevreyIndex, Lattice, SpectralField
from app.models.trajectory import Trajectory
from app.schemas.experiment_schema import SolverConfig
from app.services import expansion_service, field_service
from app.utils import serialization

logger = logging.getLogger(__name__)

ForceFn = Callable[[float], SpectralField]
ProbeFn = Callable[[float, SpectralField], Dict[str, float]]

TINY = 1e-300


def resolve_sample_times(cfg: SolverConfig) -> List[float]:
    """Instants demandés (explicites, ou n_samples espacés linéairement/logarithmiquement)."""
    if cfg.sample_times:
        return list(cfg.sample_times)
    if cfg.sample_spacing == "log" and cfg.t_start > 0:
        return list(np.geomspace(cfg.t_start, cfg.t_end, cfg.n_samples))
    return list(np.linspace(cfg.t_start, cfg.t_end, cfg.n_samples))


class IntegratingFactorStepper:
    """
    Pas IFRK2 (point milieu avec facteur intégrant):

        u_½     = E_½ (u_n + dt/2 · N(u_n, t_n))
        u_{n+1} = E u_n + dt · E_½ · N(u_½, t_n + dt/2)

    avec E = e^{-|k_L|² dt}, E_½ = e^{-|k_L|² dt/2} et N = f - B(u, u).
    """

    def __init__(self, lattice: Lattice, force: Optional[ForceFn], nonlinear: bool, dealias_inputs: bool = True):
        self.lattice = lattice
        self.force = force
        self.nonlinear = nonlinear
        self.mask = lattice.dealias_mask if dealias_inputs else lattice.support
        self.dt = None

    def setup(self, dt: float) -> None:
        self.dt = dt
        lam = self.lattice.k_squared
        self.E = np.exp(-lam * dt)
        self.E_half = np.exp(-lam * dt / 2.0)

    def masked(self, coeffs: np.ndarray) -> np.ndarray:
        return np.where(self.mask, coeffs, 0.0)

    def rhs(self, coeffs: np.ndarray, t: float) -> np.ndarray:
        out = np.zeros_like(coeffs)
        if self.force is not None:
            f = self.force(t)
            self.lattice.check_same(f.lattice)
            out += f.coefficients
        if self.nonlinear:
            u = SpectralField(self.lattice, coeffs)
            out -= field_service.bilinear_B(u, u).coefficients
        return self.masked(out)

    def step(self, coeffs: np.ndarray, t: float) -> np.ndarray:
        dt = self.dt
        k1 = self.rhs(coeffs, t)
        half = self.E_half * (coeffs + 0.5 * dt * k1)
        k2 = self.rhs(half, t + 0.5 * dt)
        return self.E * coeffs + dt * self.E_half * k2


def _energy(coeffs: np.ndarray, lattice: Lattice) -> float:
    return lattice.volume * float(np.sum(np.abs(coeffs) ** 2))


def _integrate(
    u0: SpectralField,
    force: Optional[ForceFn],
    cfg: SolverConfig,
    nonlinear: bool,
    monitor: Sequence[GevreyIndex] = (),
    probe: Optional[ProbeFn] = None,
    keep_fields: bool = False,
) -> Trajectory:
    lattice = u0.lattice
    stepper = IntegratingFactorStepper(lattice, force, nonlinear, cfg.dealias_inputs)
    stepper.setup(cfg.dt)

    t0, dt = cfg.t_start, cfg.dt
    total_steps = int(round((cfg.t_end - t0) / dt))
    sample_steps: Dict[int, float] = {}
    for s in resolve_sample_times(cfg):
        sample_steps.setdefault(int(round((s - t0) / dt)), s)
    sample_steps = {n: s for n, s in sample_steps.items() if 0 <= n <= total_steps}

    coeffs = stepper.masked(u0.coefficients.copy())
    if cfg.clip_threshold is not None:
        limit = cfg.clip_threshold
    else:
        f0 = field_service.gevrey_norm(force(t0)) if force is not None else 0.0
        scale = max(math.sqrt(_energy(coeffs, lattice)), f0, TINY)
        limit = (settings.BLOWUP_FACTOR * scale) ** 2

    monitor = list(monitor)
    times: List[float] = []
    diagnostics: Dict[str, List[float]] = {"energy": [], "enstrophy": [], "divergence": []}
    for idx in monitor:
        diagnostics[idx.label()] = []
    probes: List[Dict[str, float]] = []
    fields: List[SpectralField] = []
    notes: List[str] = []

    logger.info(
        f"🚀 Intégration {'NSE' if nonlinear else 'Stokes'} N={lattice.resolution}, "
        f"dt={dt:g}, t ∈ [{t0:g}, {cfg.t_end:g}], {total_steps} pas"
    )
    for n in range(total_steps + 1):
        t = t0 + n * dt
        if n in sample_steps:
            u = SpectralField(lattice, coeffs)
            times.append(t)
            diagnostics["energy"].append(field_service.energy(u))
            diagnostics["enstrophy"].append(field_service.enstrophy(u))
            defect = u.divergence_defect()
            diagnostics["divergence"].append(defect)
            if defect > settings.DIVERGENCE_TOL and not any("divergence" in s for s in notes):
                notes.append(f"divergence {defect:.2e} > {settings.DIVERGENCE_TOL:g} en t={t:g}")
                logger.warning(f"⚠️ Défaut de divergence {defect:.2e} en t={t:g}")
            for idx in monitor:
                diagnostics[idx.label()].append(field_service.gevrey_norm(u, idx))
            if probe is not None:
                probes.append(probe(t, u))
            if keep_fields:
                fields.append(u)
            logger.debug(f"t={t:.6g} énergie={diagnostics['energy'][-1]:.6e}")
        if n == total_steps:
            break
        coeffs = stepper.step(coeffs, t)
        if not np.all(np.isfinite(coeffs)):
            raise NonFiniteError(f"Valeurs non finies en t={t + dt:g} (pas {n + 1})")
        energy = _energy(coeffs, lattice)
        if energy > limit:
            raise BlowUpError(
                f"Énergie {energy:.3e} > seuil {limit:.3e} en t={t + dt:g}: réduire l'amplitude de la force"
            )

    logger.info(f"✅ Intégration terminée ({len(times)} échantillons)")
    return Trajectory(
        times=tuple(times),
        diagnostics={name: tuple(values) for name, values in diagnostics.items()},
        probes=tuple(probes),
        fields=tuple(fields) if keep_fields else None,
        steps=total_steps,
        dt=dt,
        notes=notes,
    )


def integrate_nse(
    u0: SpectralField,
    force: Optional[ForceFn],
    cfg: SolverConfig,
    monitor: Sequence[GevreyIndex] = (),
    probe: Optional[ProbeFn] = None,
    keep_fields: bool = False,
) -> Trajectory:
    """
    Intègre u' + Au + B(u, u) = f(t) depuis u(t_start) = u0.

    Raises:
        BlowUpError: si l'énergie dépasse le seuil
        NonFiniteError: si des NaN apparaissent
    """
    return _integrate(u0, force, cfg, True, monitor, probe, keep_fields)


def integrate_stokes_linear(
    w0: SpectralField,
    p: Optional[Expansion],
    g: Optional[ForceFn],
    cfg: SolverConfig,
    monitor: Sequence[GevreyIndex] = (),
    probe: Optional[ProbeFn] = None,
    keep_fields: bool = False,
) -> Trajectory:
    """Intègre w' = -Aw + p(L̂_k(t)) + g(t) (même schéma, sans B)."""
    terms: List[ForceFn] = []
    if p is not None and not p.is_zero():
        terms.append(lambda t: expansion_service.evaluate(p, t))
    if g is not None:
        terms.append(g)

    def force(t: float) -> SpectralField:
        return field_service.sum_fields((fn(t) for fn in terms), w0.lattice)

    return _integrate(w0, force if terms else None, cfg, False, monitor, probe, keep_fields)


def write_trajectory_csv(path: Path, trajectory: Trajectory) -> Path:
    return serialization.write_csv(path, trajectory.rows(), trajectory.columns())
