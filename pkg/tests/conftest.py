"""
Fixtures partagées: réseaux réduits, générateur aléatoire à graine fixe,
expansions fermées de référence.
"""

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from app.models.expansion import Expansion, ExpansionTerm, ExponentVector
from app.models.spectral_field import ComplexField, Lattice
from app.services import field_service

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def lattice():
    return Lattice.cube(8)


@pytest.fixture
def xi(lattice):
    """ξ = cos(x1) e2 + i · ½ cos(x2 + x3) e1."""
    re = field_service.single_mode(lattice, (1, 0, 0), (0, 1, 0))
    im = field_service.single_mode(lattice, (0, 1, 1), (1, 0, 0), amplitude=0.5)
    return ComplexField(re, im)


def closed_pair(lattice, re, im, xi, k=0, m=0, mu=-1):
    """z^α ξ + z^ᾱ ξ̄ dans 𝒫_m(k, μ)."""
    alpha = ExponentVector(tuple(re), tuple(im))
    terms = (ExpansionTerm(alpha, xi), ExpansionTerm(alpha.conj(), xi.conj()))
    return Expansion(lattice, k, m, Fraction(mu), terms)


@pytest.fixture
def oscillating(lattice, xi):
    """p(t) = 2 Re(e^{it} ξ) / t ∈ 𝒫_0(0, -1)."""
    return closed_pair(lattice, (0, -1), (1.0, 0.0), xi)


@pytest.fixture
def config_dir():
    return CONFIG_DIR
