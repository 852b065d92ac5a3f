"""
Algèbre des expansions: opérateurs M_j, R, Z_{A_C}, A_C, produit bilinéaire
terme à terme, évaluation en t, dérivée en temps et forme trigonométrique réelle.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import ClassViolationError, ConjugateClosureError, DomainError
from app.models.expansion import (
    Expansion,
    ExpansionTerm,
    ExponentVector,
    TrigExpansion,
    TrigFactor,
    TrigTerm,
    coefficient_scale,
    find_conjugate_defect,
)
from app.models.spectral_field import ComplexField, GevreyIndex, Lattice, SpectralField
from app.services import field_service, timescale_service
from app.services.field_service import ResolventFn

logger = logging.getLogger(__name__)


# ============ Classes ============

def classify(p: Expansion, m: int, k: int, mu) -> bool:
    """p ∈ 𝒫_m(k, μ) (test exact sur chaque exposant)."""
    mu = Fraction(mu) if not isinstance(mu, Fraction) else mu
    if p.k != k:
        return False
    return all(t.exponent.in_class(m, mu) for t in p.terms)


def assert_class(p: Expansion, m: int, k: int, mu, what: str = "expansion") -> None:
    if not classify(p, m, k, mu):
        raise ClassViolationError(f"{what}: {p.class_label()} n'est pas dans 𝒫_{m}(k={k}, μ={mu})")


def is_conjugate_closed(p: Expansion) -> bool:
    return find_conjugate_defect(p.terms) is None


def require_closed(p: Expansion, what: str = "expansion") -> None:
    defect = find_conjugate_defect(p.terms)
    if defect is not None:
        raise ConjugateClosureError(f"{what} non fermée par conjugaison: {defect}")


# ============ Arithmétique ============

def _compatible(p: Expansion, q: Expansion) -> Tuple[Expansion, Expansion]:
    p.lattice.check_same(q.lattice)
    if p.k != q.k:
        raise ClassViolationError(f"Profondeurs différentes: {p.k} vs {q.k} (utiliser embed)")
    if p.is_zero() and not q.is_zero():
        p = Expansion.zero(q.lattice, q.k, q.class_m, q.class_mu)
    elif q.is_zero() and not p.is_zero():
        q = Expansion.zero(p.lattice, p.k, p.class_m, p.class_mu)
    if (p.class_m, p.class_mu) != (q.class_m, q.class_mu):
        raise ClassViolationError(f"Classes différentes: {p.class_label()} vs {q.class_label()}")
    return p, q


def add(p: Expansion, q: Expansion) -> Expansion:
    p, q = _compatible(p, q)
    return p.with_terms(p.terms + q.terms)


def negate(p: Expansion) -> Expansion:
    return p.with_terms(ExpansionTerm(t.exponent, -t.coefficient) for t in p.terms)


def subtract(p: Expansion, q: Expansion) -> Expansion:
    return add(p, negate(q))


def scale(p: Expansion, c: complex) -> Expansion:
    """c·p; un scalaire réel préserve la fermeture par conjugaison."""
    return p.with_terms(ExpansionTerm(t.exponent, t.coefficient.scale(c)) for t in p.terms)


def sum_expansions(items: Iterable[Expansion], like: Expansion) -> Expansion:
    total = like
    for item in items:
        total = add(total, item)
    return total


# ============ Opérateurs linéaires ============

def op_M(j: int, p: Expansion) -> Expansion:
    """(M_j p)(z) = Σ α_j z^α ξ_α."""
    if not -1 <= j <= p.k:
        raise ValueError(f"Indice j={j} hors de -1..{p.k}")
    return p.with_terms(
        ExpansionTerm(t.exponent, t.coefficient.scale(t.exponent.entry(j)))
        for t in p.terms
        if t.exponent.entry(j) != 0
    )


def _r_class(p: Expansion) -> Tuple[int, Fraction]:
    if p.class_m == 0:
        return 0, p.class_mu - 1
    if p.class_m >= 1:
        return 0, Fraction(-1)
    return p.class_m, p.class_mu


def op_R(p: Expansion) -> Expansion:
    """
    (Rp)(z) = Σ_{j=0}^{k} z_0^{-1} ... z_j^{-1} (M_j p)(z).

    Classe: 𝒫_0(k, μ) -> 𝒫_0(k, μ - 1); 𝒫_m, m >= 1 -> 𝒫_0(k, -1);
    𝒫_{-1}(k, μ) inchangée.
    """
    if p.k < 0:
        raise ValueError("R n'est défini que pour k >= 0")
    m, mu = _r_class(p)
    terms = []
    for t in p.terms:
        for j in range(0, p.k + 1):
            a = t.exponent.entry(j)
            if a == 0:
                continue
            terms.append(ExpansionTerm(t.exponent.shift_re(j, -1), t.coefficient.scale(a)))
    return Expansion(p.lattice, p.k, m, mu, tuple(terms))


def op_Z(p: Expansion, resolvent: Optional[ResolventFn] = None) -> Expansion:
    """
    (Z_{A_C} p)(z) = Σ z^α (A_C + α_{-1})⁻¹ ξ_α.

    Args:
        p: Expansion avec Re α_{-1} = 0 pour tous les termes
        resolvent: (w, ω) -> (A_C + iω)⁻¹ w (défaut: field_service)

    Raises:
        ClassViolationError: si un terme a Re α_{-1} != 0
    """
    resolvent = resolvent or field_service.resolvent_shift_inverse
    for t in p.terms:
        if t.exponent.re_at(-1) != 0:
            raise ClassViolationError(f"Z_A requiert Re α_{{-1}} = 0, reçu {t.exponent.label()}")
    return p.with_terms(
        ExpansionTerm(t.exponent, resolvent(t.coefficient, t.exponent.im_at(-1))) for t in p.terms
    )


def op_A(p: Expansion) -> Expansion:
    """A_C appliqué coefficient par coefficient."""
    return p.with_terms(
        ExpansionTerm(t.exponent, field_service.apply_A_power(t.coefficient, 1.0)) for t in p.terms
    )


def embed(p: Expansion, k_new: int) -> Expansion:
    """Plonge 𝒫(k) dans 𝒫(k_new) en complétant les exposants par des zéros."""
    if k_new < p.k:
        raise ValueError(f"embed: k_new={k_new} < k={p.k}")
    if k_new == p.k:
        return p
    return Expansion(
        p.lattice,
        k_new,
        p.class_m,
        p.class_mu,
        tuple(ExpansionTerm(t.exponent.padded(k_new), t.coefficient) for t in p.terms),
    )


# ============ Produit bilinéaire ============

def bilinear_expansion(p: Expansion, q: Expansion) -> Expansion:
    """
    Σ_{α,β} z^{α+β} B_C(ξ_α, η_β).

    Classe: 𝒫_m(k, μ1) × 𝒫_m(k, μ2) -> 𝒫_m(k, μ1 + μ2).
    """
    p.lattice.check_same(q.lattice)
    if p.k != q.k:
        raise ClassViolationError(f"bilinear_expansion: k différents ({p.k} vs {q.k})")
    if p.class_m != q.class_m:
        raise ClassViolationError(f"bilinear_expansion: m différents ({p.class_m} vs {q.class_m})")
    mu = p.class_mu + q.class_mu
    pairs = [(a, b) for a in p.terms for b in q.terms]
    if not pairs:
        return Expansion.zero(p.lattice, p.k, p.class_m, mu)

    def product(pair):
        a, b = pair
        return ExpansionTerm(
            a.exponent + b.exponent,
            field_service.bilinear_B_complex(a.coefficient, b.coefficient),
        )

    workers = min(settings.MAX_WORKERS, len(pairs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            terms = list(pool.map(product, pairs))
    else:
        terms = [product(pair) for pair in pairs]
    return Expansion(p.lattice, p.k, p.class_m, mu, tuple(terms))


# ============ Évaluation ============

def _weights(p: Expansion, t: float) -> List[complex]:
    sv = timescale_service.scale_vector(p.k, t)
    weights = []
    for term in p.terms:
        log_mag, phase = timescale_service.log_monomial(term.exponent.re, term.exponent.im, sv)
        try:
            magnitude = math.exp(log_mag)
        except OverflowError:
            magnitude = math.inf
        if not math.isfinite(magnitude):
            raise DomainError(
                f"Terme z^{term.exponent.label()} non représentable en t={t}: ln|z^α| = {log_mag:.4g}"
            )
        weights.append(complex(magnitude * math.cos(phase), magnitude * math.sin(phase)))
    return weights


def evaluate_complex(p: Expansion, t: float, weights: Optional[List[complex]] = None) -> ComplexField:
    """Σ_α z^α ξ_α en t, sans hypothèse de réalité."""
    if weights is None:
        weights = _weights(p, t)
    lat = p.lattice
    re = np.zeros((3,) + lat.shape, dtype=np.complex128)
    im = np.zeros_like(re)
    for w, term in zip(weights, p.terms):
        x, y = term.coefficient.re.coefficients, term.coefficient.im.coefficients
        re += w.real * x - w.imag * y
        im += w.real * y + w.imag * x
    return ComplexField(SpectralField(lat, re), SpectralField(lat, im))


def evaluate(p: Expansion, t: float) -> SpectralField:
    """
    Valeur réelle p(L̂_k(t)) calculée en logarithme (module + phase par terme).

    Raises:
        ConjugateClosureError: si p n'est pas fermée ou si le résidu imaginaire
            dépasse REALNESS_TOL relatif
        DomainError: si t est hors du domaine de L̂_k ou si un terme dépasse le plus grand flottant
    """
    require_closed(p)
    if p.is_zero():
        timescale_service.scale_vector(p.k, t)
        return SpectralField.zero(p.lattice)
    weights = _weights(p, t)
    value = evaluate_complex(p, t, weights)
    if not (np.isfinite(value.re.coefficients).all() and np.isfinite(value.im.coefficients).all()):
        raise DomainError(f"Valeur non finie de l'expansion en t={t}")
    magnitude = sum(abs(w) * coefficient_scale(term.coefficient) for w, term in zip(weights, p.terms))
    residue = value.im.max_abs()
    if magnitude > 0 and residue > settings.REALNESS_TOL * magnitude:
        raise ConjugateClosureError(
            f"Résidu imaginaire {residue:.3e} > {settings.REALNESS_TOL:g} × {magnitude:.3e} en t={t}"
        )
    return value.re


def time_derivative(p: Expansion, t: float) -> SpectralField:
    """d/dt p(L̂_k(t)) = (M_{-1} p)(L̂_k(t)) + (R p)(L̂_k(t))."""
    if p.k < 0:
        raise ValueError("time_derivative requiert k >= 0")
    return evaluate(op_M(-1, p), t) + evaluate(op_R(p), t)


def decay_envelope(p: Expansion, t_grid: Sequence[float], idx: Optional[GevreyIndex] = None) -> np.ndarray:
    """|p(L̂_k(t))|_{α,σ} sur la grille."""
    return np.array([field_service.gevrey_norm(evaluate(p, t), idx) for t in t_grid])


# ============ Forme trigonométrique ============

def _expand_angle(factors: Sequence[Tuple[int, float]], kind: str) -> List[Tuple[float, Tuple[TrigFactor, ...]]]:
    """cos/sin(Σ ω_i L_{j_i}) développé en produits de cos et sin."""
    if not factors:
        return [(1.0, ())] if kind == "cos" else []
    (j, omega), rest = factors[0], factors[1:]
    c = TrigFactor(j, omega, "cos")
    s = TrigFactor(j, omega, "sin")
    out = []
    if kind == "cos":
        # cos(a + b) = cos a cos b - sin a sin b
        out += [(sign, (c,) + fs) for sign, fs in _expand_angle(rest, "cos")]
        out += [(-sign, (s,) + fs) for sign, fs in _expand_angle(rest, "sin")]
    else:
        # sin(a + b) = sin a cos b + cos a sin b
        out += [(sign, (s,) + fs) for sign, fs in _expand_angle(rest, "cos")]
        out += [(sign, (c,) + fs) for sign, fs in _expand_angle(rest, "sin")]
    return out


def trig_depth(p: Expansion) -> int:
    """k + 1 si un Im α_k est non nul, k sinon."""
    if any(t.exponent.im_at(p.k) != 0 for t in p.terms):
        return p.k + 1
    return p.k


def to_trig_form(p: Expansion) -> TrigExpansion:
    """
    Forme réelle: chaque paire (α, ᾱ) donne 2 Re(z^α ξ) = 2 z^{Re α}(cos θ x - sin θ y)
    avec θ = Σ_j Im α_j L_{j+1}(t), développé en produits de cos et sin.

    Raises:
        ConjugateClosureError: si p n'est pas fermée par conjugaison
    """
    require_closed(p, "to_trig_form")
    depth = trig_depth(p)
    m = p.class_m
    used = [False] * len(p.terms)
    terms: List[TrigTerm] = []

    for i, term in enumerate(p.terms):
        if used[i]:
            continue
        used[i] = True
        alpha = term.exponent
        base = alpha.padded(depth).with_re(m, 0).re
        xi = term.coefficient
        if alpha.is_real():
            terms.append(TrigTerm(base, (), xi.re))
            continue
        target = alpha.conj()
        for j2, other in enumerate(p.terms):
            if not used[j2] and other.exponent.matches(target):
                used[j2] = True
                break
        factors = [(j + 1, alpha.im_at(j)) for j in range(-1, p.k + 1) if alpha.im_at(j) != 0]
        for sign, fs in _expand_angle(factors, "cos"):
            if not xi.re.is_zero():
                terms.append(TrigTerm(base, fs, (2.0 * sign) * xi.re))
        for sign, fs in _expand_angle(factors, "sin"):
            if not xi.im.is_zero():
                terms.append(TrigTerm(base, fs, (-2.0 * sign) * xi.im))

    return TrigExpansion(p.lattice, depth, m, p.class_mu, tuple(terms))


def evaluate_trig(q: TrigExpansion, t: float) -> SpectralField:
    """Valeur de L_m(t)^{μ} Σ L̂(t)^a Π σ(ω L_j(t)) ξ."""
    # ln L_k n'est requis que si une entrée d'exposant en k est non nulle
    needs_last = any(term.exponent[q.k + 1] != 0 for term in q.terms)
    depth = q.k if needs_last else q.k - 1
    depth = max(depth, q.class_m, -1)
    sv = timescale_service.scale_vector(depth, t)
    prefactor_log = float(q.class_mu) * sv.log_of(q.class_m) if q.class_mu else 0.0

    total = np.zeros((3,) + q.lattice.shape, dtype=np.complex128)
    for term in q.terms:
        log_mag = prefactor_log + math.fsum(
            float(a) * sv.log_of(j) for j, a in zip(range(-1, depth + 1), term.exponent) if a
        )
        weight = math.exp(log_mag)
        for f in term.factors:
            arg = f.omega * sv.value(f.j)
            weight *= math.cos(arg) if f.kind == "cos" else math.sin(arg)
        total += weight * term.coefficient.coefficients
    return SpectralField(q.lattice, total)


def from_trig_form(q: TrigExpansion) -> Expansion:
    """
    Retour à la forme complexe: cos(ω L_j) = ½(z_{j-1}^{iω} + z_{j-1}^{-iω}),
    sin(ω L_j) = (-i/2) z_{j-1}^{iω} + (i/2) z_{j-1}^{-iω}.
    """
    needs_last = any(term.exponent[q.k + 1] != 0 for term in q.terms)
    k_out = max(q.k if needs_last else q.k - 1, q.class_m)
    terms: List[ExpansionTerm] = []
    for term in q.terms:
        re = list(term.exponent[: k_out + 2]) + [Fraction(0)] * max(0, k_out + 2 - len(term.exponent))
        re[q.class_m + 1] += q.class_mu
        options = []
        for f in term.factors:
            if f.kind == "cos":
                options.append([(0.5, f.j - 1, f.omega), (0.5, f.j - 1, -f.omega)])
            else:
                options.append([(-0.5j, f.j - 1, f.omega), (0.5j, f.j - 1, -f.omega)])
        base = ComplexField.from_real(term.coefficient)
        for choice in itertools.product(*options):
            im = [0.0] * (k_out + 2)
            c: complex = 1.0
            for coef, idx, omega in choice:
                im[idx + 1] += omega
                c *= coef
            terms.append(ExpansionTerm(ExponentVector(tuple(re), tuple(im)), base.scale(c)))
    return Expansion(q.lattice, k_out, q.class_m, q.class_mu, tuple(terms))


# ============ Données aléatoires ============

def random_closed_expansion(
    lattice: Lattice,
    rng: np.random.Generator,
    k: int,
    m: int,
    mu,
    n_pairs: int = 2,
    im_scale: float = 2.0,
    max_mode: int = 2,
    amplitude: float = 1.0,
    real_terms: int = 0,
) -> Expansion:
    """
    Expansion aléatoire fermée par conjugaison dans 𝒫_m(k, μ).

    Args:
        n_pairs: Nombre de paires (α, ᾱ) à parties imaginaires non nulles
        real_terms: Nombre de termes à exposant réel (coefficient réel)
    """
    mu = Fraction(mu) if not isinstance(mu, Fraction) else mu
    terms: List[ExpansionTerm] = []

    def exponent(with_im: bool) -> ExponentVector:
        re = [Fraction(0)] * (k + 2)
        re[m + 1] = mu
        for j in range(m + 1, k + 1):
            re[j + 1] = Fraction(int(rng.integers(-4, 3)), 2)
        im = [0.0] * (k + 2)
        if with_im:
            for j in range(-1, k + 1):
                if rng.random() < 0.6:
                    im[j + 1] = float(rng.uniform(-im_scale, im_scale))
            if not any(im):
                im[k + 1] = float(rng.uniform(0.5, im_scale))
        return ExponentVector(tuple(re), tuple(im))

    for _ in range(n_pairs):
        alpha = exponent(with_im=True)
        xi = field_service.random_complex_field(lattice, rng, max_mode=max_mode, amplitude=amplitude)
        terms.append(ExpansionTerm(alpha, xi))
        terms.append(ExpansionTerm(alpha.conj(), xi.conj()))
    for _ in range(real_terms):
        alpha = exponent(with_im=False)
        xi = ComplexField.from_real(field_service.random_field(lattice, rng, max_mode=max_mode, amplitude=amplitude))
        terms.append(ExpansionTerm(alpha, xi))
    return Expansion(lattice, k, m, mu, tuple(terms))


def term_norms(p: Expansion, idx: Optional[GevreyIndex] = None) -> Dict[str, float]:
    """|ξ_α|_{α,σ} par exposant."""
    return {t.exponent.label(): field_service.gevrey_norm(t.coefficient, idx) for t in p.terms}
