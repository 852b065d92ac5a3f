"""
Construction de la suite des exposants (μ_n) et récurrence q_n = Z_{A_C}(...).

Cas puissance (m* = 0):
    q_n = Z(p_n - Σ_{μ_a + μ_b = μ_n} B_C(q_a, q_b) - χ_n)
Cas logarithmique (m* >= 1): même récurrence sans χ_n.
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from app.core.exceptions import ClassViolationError, ConjugateClosureError
from app.models.expansion import (
    Expansion,
    ExpansionTerm,
    ExponentSequence,
    ExponentVector,
    ForceExpansionSpec,
)
from app.models.spectral_field import ComplexField, GevreyIndex, Lattice, SpectralField
from app.schemas.experiment_schema import (
    FieldSchema,
    ForceSpecSchema,
    TermSchema,
    parse_rational,
)
from app.schemas.report_schema import ExpansionSummary
from app.services import expansion_service, field_service
from app.services.field_service import ResolventFn
from app.utils import serialization

logger = logging.getLogger(__name__)


# ============ Suite des exposants ============

def build_exponent_sequence(generators: Iterable, m_star: int, cutoff=None) -> ExponentSequence:
    """
    Clôture de point fixe des générateurs par addition (et +1 si m* = 0).

    Args:
        generators: Rationnels > 0
        m_star: Indice m* (0 = décroissance en puissances de t)
        cutoff: Borne supérieure (défaut: plus grand générateur)

    Raises:
        ValueError: si les générateurs sont vides, négatifs ou au-delà de la borne
    """
    gens = sorted({parse_rational(g) for g in generators})
    if not gens:
        raise ValueError("La suite des exposants requiert au moins un générateur")
    if gens[0] <= 0:
        raise ValueError("Les générateurs doivent être > 0")
    bound = parse_rational(cutoff) if cutoff is not None else gens[-1]
    if gens[-1] > bound:
        raise ValueError(f"Générateur {gens[-1]} au-delà de la borne {bound}")

    values = set(gens)
    while True:
        new = {a + b for a in values for b in values if a + b <= bound}
        if m_star == 0:
            new |= {a + 1 for a in values if a + 1 <= bound}
        if new <= values:
            break
        values |= new
    mu = tuple(sorted(values))
    logger.debug(f"Suite des exposants: {[str(v) for v in mu]}")
    return ExponentSequence(m_star=m_star, generators=tuple(gens), cutoff=bound, mu=mu)


# ============ Récurrence ============

def _zero(spec: ForceExpansionSpec, mu: Fraction) -> Expansion:
    return Expansion.zero(spec.lattice, spec.k, spec.m_star, -mu)


def resolve_chi(
    n: int,
    seq: ExponentSequence,
    q_list: Sequence[Expansion],
    k: Optional[int] = None,
    lattice: Optional[Lattice] = None,
) -> Expansion:
    """
    χ_n = R q_λ si μ_λ + 1 = μ_n pour un λ < n (test exact), 0 sinon.

    Pour m* >= 1 (ou n = 1) χ_n est nul.
    """
    mu_n = seq[n]
    if k is None:
        k = q_list[0].k if q_list else 0
    if lattice is None and q_list:
        lattice = q_list[0].lattice
    if seq.m_star == 0 and n > 1:
        for lam in range(1, n):
            if seq[lam] + 1 == mu_n:
                logger.debug(f"χ_{n} = R q_{lam} (μ_{lam} + 1 = μ_{n} = {mu_n})")
                return expansion_service.embed(expansion_service.op_R(q_list[lam - 1]), k)
    if lattice is None:
        raise ValueError("resolve_chi requiert au moins q_1 pour connaître le réseau")
    return Expansion.zero(lattice, k, seq.m_star, -mu_n)


def nonlinear_sum(n: int, spec: ForceExpansionSpec, q_list: Sequence[Expansion]) -> Expansion:
    """𝒬_n = Σ_{a, b < n, μ_a + μ_b = μ_n} B_C(q_a, q_b) (paires ordonnées)."""
    seq = spec.sequence
    mu_n = seq[n]
    total = _zero(spec, mu_n)
    for a in range(1, n):
        for b in range(1, n):
            if seq[a] + seq[b] == mu_n:
                total = expansion_service.add(
                    total, expansion_service.bilinear_expansion(q_list[a - 1], q_list[b - 1])
                )
    return total


def _chi(n: int, spec: ForceExpansionSpec, q_list: Sequence[Expansion]) -> Expansion:
    if spec.m_star != 0 or n == 1:
        return _zero(spec, spec.sequence[n])
    return resolve_chi(n, spec.sequence, q_list, spec.k, spec.lattice)


def construct_expansion(
    spec: ForceExpansionSpec,
    N: int,
    resolvent: Optional[ResolventFn] = None,
) -> List[Expansion]:
    """
    Construit q_1..q_N.

    Args:
        spec: Expansion de la force
        N: Ordre de troncature (<= longueur de la suite)
        resolvent: Résolvante injectable (tests d'injection de fautes)

    Returns:
        Liste [q_1, ..., q_N], q_n ∈ 𝒫_{m*}(k, -μ_n) fermée par conjugaison

    Raises:
        ClassViolationError: si un intermédiaire sort de sa classe
    """
    seq = spec.sequence
    if not 1 <= N <= len(seq):
        raise ValueError(f"N={N} hors de 1..{len(seq)}")
    logger.info(f"🚀 Construction de q_1..q_{N} (m*={spec.m_star}, k={spec.k})")
    q_list: List[Expansion] = []
    for n in range(1, N + 1):
        mu_n = seq[n]
        rhs = expansion_service.subtract(spec.force(n), nonlinear_sum(n, spec, q_list))
        rhs = expansion_service.subtract(rhs, _chi(n, spec, q_list))
        q_n = expansion_service.op_Z(rhs, resolvent)
        expansion_service.assert_class(q_n, spec.m_star, spec.k, -mu_n, what=f"q_{n}")
        if not q_n.conjugate_closed:
            raise ConjugateClosureError(f"q_{n} n'est pas fermée par conjugaison")
        logger.debug(f"q_{n}: {len(q_n)} termes, classe {q_n.class_label()}")
        q_list.append(q_n)
    logger.info(f"✅ {N} termes construits")
    return q_list


def recursion_balance(
    n: int,
    spec: ForceExpansionSpec,
    q_list: Sequence[Expansion],
    t: float,
    idx: Optional[GevreyIndex] = None,
) -> float:
    """
    Résidu relatif de (A_C + M_{-1}) q_n + χ_n + 𝒬_n - p_n évalué en t.

    Returns:
        |X_n(t)|_{α,σ} / max(|termes|_{α,σ}) (0 si tout est nul)
    """
    q_n = q_list[n - 1]
    parts = [
        expansion_service.op_A(q_n),
        expansion_service.op_M(-1, q_n),
        _chi(n, spec, q_list),
        nonlinear_sum(n, spec, q_list),
        expansion_service.negate(spec.force(n)),
    ]
    total = parts[0]
    for part in parts[1:]:
        total = expansion_service.add(total, part)
    residual = field_service.gevrey_norm(expansion_service.evaluate(total, t), idx)
    scale = max(field_service.gevrey_norm(expansion_service.evaluate(p, t), idx) for p in parts)
    return residual / scale if scale > 0 else 0.0


# ============ Valeurs en temps ============

def expansion_sum(q_list: Sequence[Expansion], t: float, lattice: Lattice, N: Optional[int] = None) -> SpectralField:
    """u_N(t) = Σ_{n<=N} q_n(L̂_k(t))."""
    items = q_list if N is None else q_list[:N]
    return field_service.sum_fields((expansion_service.evaluate(q, t) for q in items), lattice)


def force_value(spec: ForceExpansionSpec, N: int, t: float) -> SpectralField:
    """f_N(t) = Σ_{n<=N} p_n(L̂_k(t))."""
    return field_service.sum_fields(
        (expansion_service.evaluate(spec.force(n), t) for n in range(1, N + 1)), spec.lattice
    )


def manufactured_force(q_list: Sequence[Expansion], t: float, lattice: Lattice) -> SpectralField:
    """
    Force exacte pour laquelle u = Σ q_n(L̂_k(t)) résout u' + Au + B(u, u) = f.
    """
    u = expansion_sum(q_list, t, lattice)
    du = field_service.sum_fields((expansion_service.time_derivative(q, t) for q in q_list), lattice)
    return du + field_service.apply_A_power(u, 1.0) + field_service.bilinear_B(u, u)


def summarize(
    q_list: Sequence[Expansion],
    seq: ExponentSequence,
    idx: Optional[GevreyIndex] = None,
) -> List[ExpansionSummary]:
    """Nombre de termes et normes de Gevrey des coefficients (gain α -> α+1)."""
    idx = idx or GevreyIndex()
    gained = idx.shifted(1.0)
    out = []
    for n, q in enumerate(q_list, start=1):
        norms = [field_service.gevrey_norm(t.coefficient, idx) for t in q.terms]
        norms_gained = [field_service.gevrey_norm(t.coefficient, gained) for t in q.terms]
        out.append(
            ExpansionSummary(
                n=n,
                mu=str(seq[n]),
                n_terms=len(q),
                coefficient_norm=max(norms, default=0.0),
                coefficient_norm_gained=max(norms_gained, default=0.0),
            )
        )
    return out


# ============ Lecture des configurations ============

def field_from_schema(schema: FieldSchema, lattice: Lattice, base_dir: Optional[Path] = None) -> SpectralField:
    """Champ réel depuis une liste de modes ou un fichier."""
    if schema.file:
        path = Path(schema.file)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        u = serialization.read_field(path)
        lattice.check_same(u.lattice)
    else:
        modes = [(m.k, [complex(a, b) for a, b in zip(m.real, m.imag)]) for m in schema.modes]
        u = field_service.field_from_modes(lattice, modes)
    return u * schema.amplitude if schema.amplitude != 1.0 else u


def expansion_from_terms(
    terms: Sequence[TermSchema],
    lattice: Lattice,
    k: int,
    m: int,
    mu,
    base_dir: Optional[Path] = None,
) -> Expansion:
    """
    Expansion de 𝒫_m(k, μ) depuis des termes de configuration.

    with_conjugate ajoute (ᾱ, ξ̄); un terme à exposant réel garde la partie
    réelle de son coefficient.
    """
    out: List[ExpansionTerm] = []
    for term in terms:
        if len(term.exponent_re) != k + 2:
            raise ClassViolationError(f"Exposant de longueur {len(term.exponent_re)} != k + 2 = {k + 2}")
        im = term.exponent_im or [0.0] * (k + 2)
        alpha = ExponentVector(tuple(parse_rational(v) for v in term.exponent_re), tuple(im))
        re_field = field_from_schema(term.coefficient.re, lattice, base_dir)
        im_field = field_from_schema(term.coefficient.im, lattice, base_dir)
        xi = ComplexField(re_field, im_field)
        if term.with_conjugate and alpha.is_real():
            out.append(ExpansionTerm(alpha, ComplexField.from_real(re_field)))
        elif term.with_conjugate:
            out.append(ExpansionTerm(alpha, xi))
            out.append(ExpansionTerm(alpha.conj(), xi.conj()))
        else:
            out.append(ExpansionTerm(alpha, xi))
    return Expansion(lattice, k, m, parse_rational(mu), tuple(out))


def force_spec_from_schema(
    schema: ForceSpecSchema,
    lattice: Lattice,
    base_dir: Optional[Path] = None,
) -> ForceExpansionSpec:
    """ForceExpansionSpec depuis la section 'force' d'une configuration."""
    mus = [parse_rational(o.mu) for o in schema.orders]
    if not mus:
        raise ValueError("La section 'force' doit lister au moins un ordre")
    generators = schema.generators if schema.generators else mus
    cutoff = schema.cutoff if schema.cutoff is not None else max(mus)
    seq = build_exponent_sequence(generators, schema.m_star, cutoff)
    forces = {}
    for order, mu in zip(schema.orders, mus):
        forces[mu] = expansion_from_terms(order.terms, lattice, schema.k, schema.m_star, -mu, base_dir)
    return ForceExpansionSpec(
        lattice=lattice,
        m_star=schema.m_star,
        k=schema.k,
        sequence=seq,
        forces=forces,
        remainder=schema.remainder,
    )
