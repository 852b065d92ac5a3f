"""
Service de calcul spectral sur les champs périodiques.

Opérateur de Stokes A (diagonal: |k_L|²), normes de Gevrey, projection de
Leray, forme bilinéaire B(u, v) = P[(u·∇)v] pseudo-spectrale (règle des 2/3)
et leurs complexifiées, dont la résolvante décalée (A_C + iω)⁻¹.
"""

import logging
import math
from typing import Callable, Iterable, Optional, Sequence, Tuple, TypeVar

import numpy as np
import scipy.fft

from app.core.config import settings
from app.models.spectral_field import (
    AnyField,
    ComplexField,
    GevreyIndex,
    Lattice,
    SpectralField,
)

logger = logging.getLogger(__name__)

F = TypeVar("F", SpectralField, ComplexField)

Mode = Tuple[Sequence[int], Sequence[complex]]


# ============ Transformées ============

def _workers() -> int:
    return settings.FFT_WORKERS


def to_physical(u: SpectralField) -> np.ndarray:
    """Valeurs réelles u(x) sur la grille N³, forme (3, N, N, N)."""
    n3 = u.lattice.resolution**3
    values = scipy.fft.ifftn(u.coefficients, axes=(1, 2, 3), workers=_workers()) * n3
    return values.real


def from_physical(lattice: Lattice, values: np.ndarray) -> np.ndarray:
    """Coefficients bruts û_k = fftn(u)/N³ (non projetés)."""
    n3 = lattice.resolution**3
    return scipy.fft.fftn(np.asarray(values, dtype=float), axes=(1, 2, 3), workers=_workers()) / n3


def grid(lattice: Lattice) -> np.ndarray:
    """Points de grille x_j = l_j n / N, forme (3, N, N, N)."""
    axes = [np.arange(lattice.resolution) * (b / lattice.resolution) for b in lattice.box_lengths]
    return np.array(np.meshgrid(*axes, indexing="ij"))


# ============ Opérateurs diagonaux ============

def _map_modes(w: F, multiplier: np.ndarray) -> F:
    if isinstance(w, ComplexField):
        return ComplexField(_map_modes(w.re, multiplier), _map_modes(w.im, multiplier))
    return SpectralField(w.lattice, w.coefficients * multiplier)


def apply_A_power(w: F, alpha_exp: float) -> F:
    """A^{alpha_exp} w: multiplication par |k_L|^{2·alpha_exp}."""
    lat = w.lattice
    return _map_modes(w, lat.safe_k_squared**alpha_exp)


def apply_exp_sqrtA(w: F, sigma: float) -> F:
    """e^{σA^{1/2}} w: multiplication par e^{σ|k_L|}."""
    if sigma == 0:
        return w
    return _map_modes(w, np.exp(sigma * w.lattice.k_norm))


def apply_exp_A(w: F, s: float) -> F:
    """e^{sA} w (semi-groupe de la chaleur pour s < 0)."""
    if s == 0:
        return w
    return _map_modes(w, np.exp(s * w.lattice.k_squared))


def gevrey_weights(lattice: Lattice, idx: GevreyIndex) -> np.ndarray:
    """|k_L|^{4α} e^{2σ|k_L|} sur les modes retenus, 0 ailleurs."""
    weights = lattice.safe_k_squared ** (2.0 * idx.alpha)
    if idx.sigma:
        weights = weights * np.exp(2.0 * idx.sigma * lattice.k_norm)
    return np.where(lattice.support, weights, 0.0)


def gevrey_norm(w: AnyField, idx: Optional[GevreyIndex] = None) -> float:
    """
    Norme |A^α e^{σA^{1/2}} w| avec le facteur de Parseval |Ω|.

    Args:
        w: Champ réel ou complexifié
        idx: Indice (α, σ) (défaut: norme H)

    Returns:
        (|Ω| Σ_k |k_L|^{4α} e^{2σ|k_L|} |û_k|²)^{1/2}
    """
    idx = idx or GevreyIndex()
    if isinstance(w, ComplexField):
        return math.hypot(gevrey_norm(w.re, idx), gevrey_norm(w.im, idx))
    lat = w.lattice
    weights = gevrey_weights(lat, idx)
    total = np.sum(weights * np.sum(np.abs(w.coefficients) ** 2, axis=0))
    return math.sqrt(lat.volume * float(total))


def inner_product(u: AnyField, v: AnyField) -> float:
    """⟨u, v⟩ dans H (partie réelle du produit de H_C pour les champs complexes)."""
    if isinstance(u, ComplexField) and isinstance(v, ComplexField):
        return inner_product(u.re, v.re) + inner_product(u.im, v.im)
    if isinstance(u, ComplexField) or isinstance(v, ComplexField):
        raise TypeError("inner_product attend deux champs de même nature")
    u.lattice.check_same(v.lattice)
    total = np.sum(u.coefficients * np.conj(v.coefficients))
    return u.lattice.volume * float(total.real)


def energy(u: SpectralField) -> float:
    """|u|²."""
    return gevrey_norm(u) ** 2


def enstrophy(u: SpectralField) -> float:
    """‖u‖² = |A^{1/2} u|²."""
    return gevrey_norm(u, GevreyIndex(alpha=0.5)) ** 2


# ============ Projection de Leray ============

def leray_project(raw) -> SpectralField:
    """
    Projection de Leray mode par mode: û_k ← (I − k_L k_Lᵀ/|k_L|²) û_k.

    Args:
        raw: SpectralField ou tableau (lattice, coefficients) bruts

    Returns:
        Champ à divergence nulle (mode nul supprimé)
    """
    if isinstance(raw, SpectralField):
        lattice, coeffs = raw.lattice, raw.coefficients
    else:
        lattice, coeffs = raw
    kv = lattice.wavevectors
    dot = np.sum(kv * coeffs, axis=0) / lattice.safe_k_squared
    return SpectralField(lattice, coeffs - kv * dot)


# ============ Forme bilinéaire ============

def _dealiased(u: SpectralField) -> np.ndarray:
    return np.where(u.lattice.dealias_mask, u.coefficients, 0.0)


def bilinear_B(u: SpectralField, v: SpectralField) -> SpectralField:
    """
    B(u, v) = P[(u·∇)v] par évaluation pseudo-spectrale.

    Les entrées et la sortie sont tronquées à l'ensemble des 2/3, ce qui
    garantit ⟨B(u, v), v⟩ = 0 dans la troncature.
    """
    u.lattice.check_same(v.lattice)
    lat = u.lattice
    if u.is_zero() or v.is_zero():
        return SpectralField.zero(lat)

    n3 = lat.resolution**3
    workers = _workers()
    u_hat = _dealiased(u)
    v_hat = _dealiased(v)

    u_phys = scipy.fft.ifftn(u_hat, axes=(1, 2, 3), workers=workers).real * n3
    # grad_v[j, i] = ∂_j v_i
    grad_hat = 1j * lat.wavevectors[:, None] * v_hat[None, :]
    grad_v = scipy.fft.ifftn(grad_hat, axes=(2, 3, 4), workers=workers).real * n3

    advection = np.einsum("jxyz,jixyz->ixyz", u_phys, grad_v)
    adv_hat = scipy.fft.fftn(advection, axes=(1, 2, 3), workers=workers) / n3
    adv_hat = np.where(lat.dealias_mask, adv_hat, 0.0)
    return leray_project((lat, adv_hat))


def bilinear_B_complex(w1: ComplexField, w2: ComplexField) -> ComplexField:
    """B_C(u1 + iv1, u2 + iv2) = B(u1,u2) − B(v1,v2) + i(B(u1,v2) + B(v1,u2))."""
    w1.lattice.check_same(w2.lattice)
    re = bilinear_B(w1.re, w2.re) - bilinear_B(w1.im, w2.im)
    im = bilinear_B(w1.re, w2.im) + bilinear_B(w1.im, w2.re)
    return ComplexField(re, im)


# ============ Résolvante complexifiée ============

def resolvent_shift_inverse(w: ComplexField, omega: float) -> ComplexField:
    """
    (A_C + iω)⁻¹ w mode par mode.

    Pour w = u + iv et λ = |k_L|²:
        re = (λû + ωv̂)/(λ² + ω²),  im = (λv̂ − ωû)/(λ² + ω²)
    """
    lat = w.lattice
    lam = lat.safe_k_squared
    denom = lam**2 + omega**2
    u_hat, v_hat = w.re.coefficients, w.im.coefficients
    re = SpectralField(lat, (lam * u_hat + omega * v_hat) / denom)
    im = SpectralField(lat, (lam * v_hat - omega * u_hat) / denom)
    return ComplexField(re, im)


def apply_shift(w: ComplexField, omega: float) -> ComplexField:
    """(A_C + iω) w = (Au − ωv) + i(ωu + Av)."""
    au = apply_A_power(w.re, 1.0)
    av = apply_A_power(w.im, 1.0)
    return ComplexField(au - omega * w.im, omega * w.re + av)


# ============ Inégalités ============

def d0(alpha: float, sigma: float) -> float:
    """
    Constante d₀(α, σ) de |A^α e^{-σA} v| <= d₀(α, σ)|v|.

    Returns:
        e^{-σ} si α = 0, (α/(eσ))^α sinon
    """
    if alpha < 0 or sigma < 0:
        raise ValueError("d0 attend α >= 0 et σ >= 0")
    if alpha == 0:
        return math.exp(-sigma)
    if sigma == 0:
        raise ValueError("d0(α, 0) n'est pas borné pour α > 0")
    return (alpha / (math.e * sigma)) ** alpha


def bilinear_constant(
    pairs: Iterable[Tuple[ComplexField, ComplexField]],
    idx: GevreyIndex,
) -> float:
    """
    Constante empirique de |B_C(w1, w2)|_{α,σ} <= K |w1|_{α+1/2,σ} |w2|_{α+1/2,σ}.

    Returns:
        Le rapport maximal observé sur les paires
    """
    upper = idx.shifted(0.5)
    best = 0.0
    for w1, w2 in pairs:
        denom = gevrey_norm(w1, upper) * gevrey_norm(w2, upper)
        if denom == 0.0:
            continue
        best = max(best, gevrey_norm(bilinear_B_complex(w1, w2), idx) / denom)
    return best


# ============ Constructeurs ============

def raw_from_modes(lattice: Lattice, modes: Iterable[Mode]) -> np.ndarray:
    """Coefficients bruts avec û_k += c et û_{-k} += conj(c)."""
    coeffs = np.zeros((3,) + lattice.shape, dtype=np.complex128)
    for k, vec in modes:
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (3,):
            raise ValueError(f"Vecteur de mode {vec} de taille != 3")
        index = lattice.mode_index(k)
        minus = lattice.mode_index(tuple(-int(v) for v in k))
        coeffs[(slice(None),) + index] += vec
        coeffs[(slice(None),) + minus] += np.conj(vec)
    return coeffs


def field_from_modes(lattice: Lattice, modes: Iterable[Mode], project: bool = True) -> SpectralField:
    """
    Construit un champ réel à partir de couples (k, c ∈ ℂ³).

    Args:
        lattice: Réseau cible
        modes: Modes k et leurs coefficients (le mode -k est ajouté par conjugaison)
        project: Applique la projection de Leray

    Returns:
        Le champ réel correspondant
    """
    coeffs = raw_from_modes(lattice, modes)
    if project:
        return leray_project((lattice, coeffs))
    return SpectralField(lattice, coeffs)


def single_mode(
    lattice: Lattice,
    k: Sequence[int],
    direction: Sequence[float],
    amplitude: float = 1.0,
    kind: str = "cos",
) -> SpectralField:
    """amplitude · cos(k_L·x) e ou amplitude · sin(k_L·x) e (e ⟂ k)."""
    e = np.asarray(direction, dtype=float)
    if kind == "cos":
        vec = 0.5 * amplitude * e
    elif kind == "sin":
        vec = -0.5j * amplitude * e
    else:
        raise ValueError(f"Type de mode inconnu: {kind}")
    return field_from_modes(lattice, [(k, vec)])


def random_field(
    lattice: Lattice,
    rng: np.random.Generator,
    max_mode: Optional[int] = None,
    decay: float = 0.5,
    amplitude: float = 1.0,
) -> SpectralField:
    """
    Champ réel aléatoire lisse, à divergence nulle, de norme H = amplitude.

    Args:
        lattice: Réseau cible
        rng: Générateur numpy (graine fixée par l'appelant)
        max_mode: Plus grand |k_j| excité (défaut: coupure des 2/3)
        decay: Décroissance e^{-decay |k_L|} des amplitudes
        amplitude: Norme H du champ produit
    """
    cutoff = lattice.dealias_cutoff if max_mode is None else min(max_mode, lattice.dealias_cutoff)
    shape = (3,) + lattice.shape
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    active = lattice.dealias_mask & np.all(np.abs(lattice.integer_modes) <= max(cutoff, 1), axis=0)
    raw = np.where(active, raw * np.exp(-decay * lattice.k_norm), 0.0)
    flipped = np.roll(raw[:, ::-1, ::-1, ::-1], 1, axis=(1, 2, 3))
    field = leray_project((lattice, 0.5 * (raw + np.conj(flipped))))
    norm = gevrey_norm(field)
    if norm == 0.0:
        return field
    return field * (amplitude / norm)


def random_complex_field(
    lattice: Lattice,
    rng: np.random.Generator,
    max_mode: Optional[int] = None,
    decay: float = 0.5,
    amplitude: float = 1.0,
) -> ComplexField:
    return ComplexField(
        random_field(lattice, rng, max_mode, decay, amplitude),
        random_field(lattice, rng, max_mode, decay, amplitude),
    )


def dealias(u: SpectralField) -> SpectralField:
    """Troncature à l'ensemble des 2/3."""
    return SpectralField(u.lattice, _dealiased(u))


def sum_fields(fields: Iterable[SpectralField], lattice: Lattice) -> SpectralField:
    total = np.zeros((3,) + lattice.shape, dtype=np.complex128)
    for f in fields:
        lattice.check_same(f.lattice)
        total = total + f.coefficients
    return SpectralField(lattice, total)


ResolventFn = Callable[[ComplexField, float], ComplexField]
