"""
Suites d'invariants exécutées par `python -m app selftest` et `GET /selftest`.

Profils:
    quick: petites tailles (tests unitaires, API)
    full:  tailles de recette (200 champs 16³, 1000 paires B_C, 50 expansions)

Injection de faute "resolvent-sign": le signe de ω est inversé dans la
résolvante utilisée par les suites resolvent et operators.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import CoherentNSEError
from app.models.expansion import Expansion, ForceExpansionSpec
from app.models.spectral_field import ComplexField, GevreyIndex, Lattice, SpectralField
from app.schemas.report_schema import SelfTestCheck, SelfTestReport
from app.services import constructor_service, expansion_service, field_service, timescale_service
from app.services.field_service import ResolventFn

logger = logging.getLogger(__name__)

FAULTS = ("resolvent-sign",)
OMEGAS = (0.0, 1.0, -1.0, 10.0, -10.0)
BCAS_INDICES = [GevreyIndex(alpha=a, sigma=s) for a in (0.5, 1.0) for s in (0.0, 0.1)]


@dataclass(frozen=True)
class Profile:
    resolvent_fields: int
    resolvent_resolution: int
    expansions: int
    oracle_pairs: int
    orthogonality_resolution: int
    bcas_pairs: int
    bcas_resolution: int
    closure_order: int
    trig_expansions: int


PROFILES: Dict[str, Profile] = {
    "quick": Profile(10, 8, 5, 3, 8, 20, 8, 3, 5),
    "full": Profile(200, 16, 50, 20, 32, 1000, 16, 4, 20),
}


class _Suite:
    """Collecte des vérifications d'une suite."""

    def __init__(self, name: str, report: SelfTestReport):
        self.name = name
        self.report = report

    def check(self, name: str, passed: bool, value: Optional[float] = None,
              threshold: Optional[float] = None, detail: str = "") -> bool:
        self.report.checks.append(
            SelfTestCheck(suite=self.name, name=name, passed=bool(passed), value=value,
                          threshold=threshold, detail=detail)
        )
        if not passed:
            logger.warning(f"❌ {self.name}/{name}: {value} (seuil {threshold}) {detail}")
        return passed

    def below(self, name: str, value: float, threshold: float, detail: str = "") -> bool:
        return self.check(name, value <= threshold, value, threshold, detail)


def _rel(diff: float, scale: float) -> float:
    return diff / scale if scale > 0 else diff


def faulty_resolvent(fault: Optional[str]) -> ResolventFn:
    if fault is None:
        return field_service.resolvent_shift_inverse
    if fault == "resolvent-sign":
        return lambda w, omega: field_service.resolvent_shift_inverse(w, -omega)
    raise ValueError(f"Faute inconnue: {fault} (disponibles: {', '.join(FAULTS)})")


# ============ spectral_field ============

def resolvent_suite(suite: _Suite, profile: Profile, rng: np.random.Generator, resolvent: ResolventFn) -> None:
    """(A_C + iω)∘(A_C + iω)⁻¹ = id, borne |x|_{α+1,σ} <= |w|_{α,σ}, identité exacte, conjugaison."""
    lattice = Lattice.cube(profile.resolvent_resolution)
    idx = GevreyIndex(alpha=0.5, sigma=0.1)
    worst_identity = worst_bound = worst_sharp = worst_conj = 0.0
    for _ in range(profile.resolvent_fields):
        w = field_service.random_complex_field(lattice, rng)
        w_norm = field_service.gevrey_norm(w)
        for omega in OMEGAS:
            x = resolvent(w, omega)
            back = field_service.apply_shift(x, omega)
            worst_identity = max(worst_identity, _rel(field_service.gevrey_norm(back - w), w_norm))
            bound = field_service.gevrey_norm(x, idx.shifted(1.0)) / field_service.gevrey_norm(w, idx)
            worst_bound = max(worst_bound, bound)
            lhs = field_service.gevrey_norm(field_service.apply_shift(w, omega), idx) ** 2
            rhs = (
                field_service.gevrey_norm(field_service.apply_A_power(w, 1.0), idx) ** 2
                + omega**2 * field_service.gevrey_norm(w, idx) ** 2
            )
            worst_sharp = max(worst_sharp, _rel(abs(lhs - rhs), rhs))
            conj = resolvent(w.conj(), -omega) - x.conj()
            worst_conj = max(worst_conj, _rel(field_service.gevrey_norm(conj), field_service.gevrey_norm(x)))
    suite.below("identity", worst_identity, 1e-11)
    suite.below("norm_bound", worst_bound, 1.0 + 1e-12)
    suite.below("sharp_identity", worst_sharp, 1e-10)
    suite.below("conjugation", worst_conj, 1e-12)


def leray_suite(suite: _Suite, rng: np.random.Generator) -> None:
    lattice = Lattice.cube(8)
    modes = [(1, 0, 0), (1, 1, 0), (0, 2, 1), (2, -1, 1)]

    def raw_field() -> SpectralField:
        vecs = rng.standard_normal((len(modes), 3)) + 1j * rng.standard_normal((len(modes), 3))
        return field_service.field_from_modes(lattice, list(zip(modes, vecs)), project=False)

    a, b = raw_field(), raw_field()
    pa, pb = field_service.leray_project(a), field_service.leray_project(b)
    ppa = field_service.leray_project(pa)
    scale = field_service.gevrey_norm(a) * field_service.gevrey_norm(b)
    suite.below("idempotent", _rel(field_service.gevrey_norm(ppa - pa), field_service.gevrey_norm(pa)), 1e-12)
    asym = abs(field_service.inner_product(pa, b) - field_service.inner_product(a, pb))
    suite.below("self_adjoint", _rel(asym, scale), 1e-12)
    suite.below("divergence", pa.divergence_defect(), 1e-13)


def gevrey_suite(suite: _Suite, rng: np.random.Generator) -> None:
    lattice = Lattice.cube(8)
    v = field_service.random_field(lattice, rng)
    alphas = [0.0, 0.25, 0.5, 1.0]
    sigmas = [0.0, 0.1, 0.5]
    monotone = True
    for s in sigmas:
        norms = [field_service.gevrey_norm(v, GevreyIndex(alpha=a, sigma=s)) for a in alphas]
        monotone &= all(y >= x * (1 - 1e-14) for x, y in zip(norms, norms[1:]))
    for a in alphas:
        norms = [field_service.gevrey_norm(v, GevreyIndex(alpha=a, sigma=s)) for s in sigmas]
        monotone &= all(y >= x * (1 - 1e-14) for x, y in zip(norms, norms[1:]))
    suite.check("monotone", monotone)

    worst = 0.0
    v_norm = field_service.gevrey_norm(v)
    for alpha in (0.5, 1.0):
        for sigma in (0.1, 1.0):
            heat = field_service.apply_exp_A(field_service.apply_A_power(v, alpha), -sigma)
            worst = max(worst, field_service.gevrey_norm(heat) / (field_service.d0(alpha, sigma) * v_norm))
            root = field_service.apply_exp_sqrtA(field_service.apply_A_power(v, alpha), -sigma)
            worst = max(worst, field_service.gevrey_norm(root) / (field_service.d0(2 * alpha, sigma) * v_norm))
            lifted = field_service.gevrey_norm(field_service.apply_exp_sqrtA(v, sigma))
            power = field_service.gevrey_norm(field_service.apply_A_power(v, alpha))
            worst = max(worst, power / (field_service.d0(2 * alpha, sigma) * lifted))
    suite.below("d0_bounds", worst, 1.0 + 1e-12)


def convolution_oracle(u: SpectralField, v: SpectralField) -> SpectralField:
    """B(u, v) par somme de convolution directe sur l'ensemble des 2/3 (coût O(N⁶))."""
    lat = u.lattice
    mask = lat.dealias_mask
    modes = lat.integer_modes[:, mask].T
    kv = lat.wavevectors[:, mask].T
    u_hat = u.coefficients[:, mask].T
    v_hat = v.coefficients[:, mask].T
    # s[p, q] = û_p · (i q_L)
    s = 1j * u_hat @ kv.T
    out = np.zeros((3,) + lat.shape, dtype=np.complex128)
    cutoff = lat.dealias_cutoff
    n = lat.resolution
    for p in range(len(modes)):
        target = modes[p] + modes
        keep = np.all(np.abs(target) <= cutoff, axis=1)
        if not np.any(keep):
            continue
        contrib = s[p, keep, None] * v_hat[keep]
        idx = tuple((target[keep] % n).T)
        for i in range(3):
            np.add.at(out[i], idx, contrib[:, i])
    out = np.where(mask, out, 0.0)
    return field_service.leray_project((lat, out))


def bilinear_suite(suite: _Suite, profile: Profile, rng: np.random.Generator, report: SelfTestReport) -> None:
    lattice = Lattice.cube(8)
    worst = 0.0
    for _ in range(profile.oracle_pairs):
        u = field_service.random_field(lattice, rng)
        v = field_service.random_field(lattice, rng)
        fast = field_service.bilinear_B(u, v)
        slow = convolution_oracle(u, v)
        worst = max(worst, _rel(field_service.gevrey_norm(fast - slow), field_service.gevrey_norm(slow)))
    suite.below("convolution_oracle", worst, 1e-10)

    big = Lattice.cube(profile.orthogonality_resolution)
    u = field_service.random_field(big, rng)
    v = field_service.random_field(big, rng)
    b = field_service.bilinear_B(u, v)
    scale = field_service.gevrey_norm(b) * field_service.gevrey_norm(v)
    suite.below("orthogonality", _rel(abs(field_service.inner_product(b, v)), scale), 1e-12)

    shear = field_service.single_mode(lattice, (0, 1, 0), (1.0, 0.0, 0.0), kind="sin")
    suite.below("shear_self_advection", field_service.gevrey_norm(field_service.bilinear_B(shear, shear)), 1e-14)

    w1 = field_service.random_complex_field(lattice, rng)
    w2 = field_service.random_complex_field(lattice, rng)
    direct = field_service.bilinear_B_complex(w1, w2)
    conj = field_service.bilinear_B_complex(w1.conj(), w2.conj()) - direct.conj()
    suite.below("complex_conjugation", _rel(field_service.gevrey_norm(conj), field_service.gevrey_norm(direct)), 1e-12)

    bcas = Lattice.cube(profile.bcas_resolution)
    pairs = [
        (field_service.random_complex_field(bcas, rng, max_mode=3), field_service.random_complex_field(bcas, rng, max_mode=3))
        for _ in range(profile.bcas_pairs)
    ]
    for idx in BCAS_INDICES:
        constant = field_service.bilinear_constant(pairs, idx)
        key = f"alpha={idx.alpha:g},sigma={idx.sigma:g}"
        report.bilinear_constants[key] = constant
        suite.check(f"bcas_finite[{key}]", math.isfinite(constant), constant)


# ============ timescales ============

def timescale_suite(suite: _Suite) -> None:
    suite.below("lone", abs(timescale_service.iter_log(2, timescale_service.iter_exp(3, 0.0)) - 1.0), 1e-12)
    t = math.exp(4.0)
    worst = 0.0
    for m in (1, 2, 3):
        h = 1e-5 * t
        fd = (timescale_service.iter_log(m, t + h) - timescale_service.iter_log(m, t - h)) / (2 * h)
        exact = timescale_service.iter_log_derivative(m, t)
        worst = max(worst, abs(fd - exact) / exact)
    suite.below("derivative_fd", worst, 1e-8)

    # L_k^λ / L_m en coordonnée s = L_m(t): L_{k-m}(s)^λ / s
    decreasing = True
    for k, m, lam in ((1, 0, 5), (2, 1, 5)):
        ratios = [timescale_service.iter_log(k - m, s) ** lam / s for s in (1e3, 1e6)]
        decreasing &= ratios[1] < ratios[0]
    suite.check("log_dominance", decreasing)

    shift, c = 5.0, 3.0
    t_big = 1e8
    ratio0 = timescale_service.iter_log(0, shift + c * t_big) / timescale_service.iter_log(0, t_big)
    suite.below("shift_m0", abs(ratio0 - c) / c, 0.01)
    monotone = True
    for m in (1, 2):
        defects = [
            abs(timescale_service.iter_log(m, shift + c * t) / timescale_service.iter_log(m, t) - 1.0)
            for t in (1e2, 1e4, 1e8)
        ]
        monotone &= all(b < a for a, b in zip(defects, defects[1:]))
    suite.check("shift_m_ge_1", monotone)


# ============ expansion_algebra ============

def _expansion_defect(p: Expansion, q: Expansion) -> float:
    diff = expansion_service.subtract(p, q)
    scale = max((field_service.gevrey_norm(t.coefficient) for t in p.terms), default=0.0)
    worst = max((field_service.gevrey_norm(t.coefficient) for t in diff.terms), default=0.0)
    return _rel(worst, scale)


def operator_suite(suite: _Suite, profile: Profile, rng: np.random.Generator, resolvent: ResolventFn) -> None:
    """(A_C + M_{-1}) Z p = p, Z (A_C + M_{-1}) p = p, d/dt p = M_{-1}p + Rp."""
    lattice = Lattice.cube(8)
    worst_zam = worst_zam2 = worst_fd = 0.0
    closed = True
    t, h = 20.0, 1e-4
    for _ in range(profile.expansions):
        k = int(rng.integers(0, 3))
        n_pairs = int(rng.integers(1, 4))
        p = expansion_service.random_closed_expansion(lattice, rng, k, 0, Fraction(-1), n_pairs=n_pairs, real_terms=1)
        zp = expansion_service.op_Z(p, resolvent)
        shifted = expansion_service.add(expansion_service.op_A(zp), expansion_service.op_M(-1, zp))
        worst_zam = max(worst_zam, _expansion_defect(p, shifted))
        back = expansion_service.op_Z(
            expansion_service.add(expansion_service.op_A(p), expansion_service.op_M(-1, p)), resolvent
        )
        worst_zam2 = max(worst_zam2, _expansion_defect(p, back))
        for q in (zp, expansion_service.op_R(p), expansion_service.op_M(0, p)):
            closed &= q.conjugate_closed
        exact = expansion_service.time_derivative(p, t)
        fd = (expansion_service.evaluate(p, t + h) - expansion_service.evaluate(p, t - h)) * (1.0 / (2 * h))
        worst_fd = max(worst_fd, _rel(field_service.gevrey_norm(fd - exact), field_service.gevrey_norm(exact)))
    suite.below("ZAM", worst_zam, 1e-12)
    suite.below("ZAM2", worst_zam2, 1e-12)
    suite.below("logode_fd", worst_fd, 1e-6)
    suite.check("closure_preserved", closed)


def trig_suite(suite: _Suite, profile: Profile, rng: np.random.Generator) -> None:
    lattice = Lattice.cube(8)
    times = np.linspace(20.0, 60.0, 20)
    worst = worst_direct = 0.0
    for _ in range(profile.trig_expansions):
        k = int(rng.integers(0, 3))
        m = int(rng.integers(0, k + 1))
        p = expansion_service.random_closed_expansion(lattice, rng, k, m, Fraction(-1, 2), n_pairs=2, real_terms=1)
        trig = expansion_service.to_trig_form(p)
        back = expansion_service.from_trig_form(trig)
        for t in times:
            ref = expansion_service.evaluate(p, t)
            scale = field_service.gevrey_norm(ref)
            worst = max(worst, _rel(field_service.gevrey_norm(expansion_service.evaluate(back, t) - ref), scale))
            direct = expansion_service.evaluate_trig(trig, t)
            worst_direct = max(worst_direct, _rel(field_service.gevrey_norm(direct - ref), scale))
    suite.below("round_trip", worst, 1e-10)
    suite.below("trig_evaluation", worst_direct, 1e-10)


# ============ expansion_constructor ============

def closure_suite(suite: _Suite, profile: Profile, rng: np.random.Generator) -> None:
    """q_n du cas puissance: classe, fermeture, réalité, équilibre de la récurrence."""
    lattice = Lattice.cube(8)
    seq = constructor_service.build_exponent_sequence([1], 0, profile.closure_order)
    k = 1
    forces = {}
    for mu in seq.mu:
        p = expansion_service.random_closed_expansion(
            lattice, rng, k, 0, -mu, n_pairs=1, real_terms=1, amplitude=0.05
        )
        forces[mu] = p
    spec = ForceExpansionSpec(lattice=lattice, m_star=0, k=k, sequence=seq, forces=forces)
    q_list = constructor_service.construct_expansion(spec, len(seq))
    classes = all(
        expansion_service.classify(q, 0, k, -seq[n]) and q.conjugate_closed for n, q in enumerate(q_list, start=1)
    )
    suite.check("class_and_closure", classes)

    worst_residue = worst_balance = 0.0
    for t in np.linspace(5.0, 100.0, 20):
        for n, q in enumerate(q_list, start=1):
            value = expansion_service.evaluate_complex(q, t)
            scale = field_service.gevrey_norm(value.re)
            worst_residue = max(worst_residue, _rel(field_service.gevrey_norm(value.im), scale))
    for n in range(1, len(q_list) + 1):
        worst_balance = max(worst_balance, constructor_service.recursion_balance(n, spec, q_list, 10.0))
    suite.below("realness", worst_residue, settings.REALNESS_TOL)
    suite.below("recursion_balance", worst_balance, 1e-10)


# ============ Point d'entrée ============

SuiteFn = Callable[[], None]


def run_selftest(profile: Optional[str] = None, fault: Optional[str] = None, seed: Optional[int] = None) -> SelfTestReport:
    """
    Exécute toutes les suites et retourne le rapport (les échecs sont du contenu).

    Args:
        profile: "quick" ou "full" (défaut: settings.SELFTEST_PROFILE)
        fault: Faute injectée ("resolvent-sign") ou None
        seed: Graine (défaut: settings.DEFAULT_SEED)
    """
    profile = profile or settings.SELFTEST_PROFILE
    if profile not in PROFILES:
        raise ValueError(f"Profil inconnu: {profile}")
    seed = settings.DEFAULT_SEED if seed is None else seed
    sizes = PROFILES[profile]
    resolvent = faulty_resolvent(fault)
    rng = np.random.default_rng(seed)
    report = SelfTestReport(profile=profile, fault=fault, seed=seed)

    suites: Dict[str, SuiteFn] = {
        "resolvent": lambda: resolvent_suite(_Suite("resolvent", report), sizes, rng, resolvent),
        "leray": lambda: leray_suite(_Suite("leray", report), rng),
        "gevrey": lambda: gevrey_suite(_Suite("gevrey", report), rng),
        "bilinear": lambda: bilinear_suite(_Suite("bilinear", report), sizes, rng, report),
        "timescales": lambda: timescale_suite(_Suite("timescales", report)),
        "operators": lambda: operator_suite(_Suite("operators", report), sizes, rng, resolvent),
        "trig": lambda: trig_suite(_Suite("trig", report), sizes, rng),
        "closure": lambda: closure_suite(_Suite("closure", report), sizes, rng),
    }
    logger.info(f"🚀 Self-test (profil {profile}{', faute ' + fault if fault else ''})")
    for name, run in suites.items():
        try:
            run()
        except (CoherentNSEError, ValueError, ArithmeticError) as e:
            _Suite(name, report).check("exception", False, detail=f"{type(e).__name__}: {e}")
    report.passed = all(c.passed for c in report.checks)
    n_failed = sum(not c.passed for c in report.checks)
    if report.passed:
        logger.info(f"✅ Self-test réussi ({len(report.checks)} vérifications)")
    else:
        logger.error(f"❌ Self-test: {n_failed} vérification(s) en échec sur {len(report.checks)}")
    return report
