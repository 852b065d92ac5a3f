import math

import numpy as np
import pytest

from app.core.exceptions import LatticeMismatchError
from app.models.spectral_field import ComplexField, GevreyIndex, Lattice, SpectralField
from app.services import field_service


class TestLattice:
    def test_support_excludes_zero_and_nyquist(self, lattice):
        assert not lattice.support[0, 0, 0]
        assert not lattice.support[4, 1, 1]
        assert lattice.support[1, 0, 0]

    def test_dealias_cutoff(self):
        assert Lattice.cube(8).dealias_cutoff == 2
        assert Lattice.cube(16).dealias_cutoff == 5

    def test_mode_out_of_lattice(self, lattice):
        with pytest.raises(ValueError):
            lattice.mode_index((4, 0, 0))

    def test_box_must_reach_two_pi(self):
        with pytest.raises(ValueError):
            Lattice(8, (1.0, 1.0, 1.0))

    def test_mismatch(self, lattice):
        u = SpectralField.zero(lattice)
        v = SpectralField.zero(Lattice.cube(16))
        with pytest.raises(LatticeMismatchError):
            u + v


class TestGevreyNorm:
    def test_cosine_mode(self, lattice):
        u = field_service.single_mode(lattice, (1, 0, 0), (0, 1, 0))
        expected = math.sqrt((2 * math.pi) ** 3 / 2)
        assert field_service.gevrey_norm(u) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(11.1366, abs=1e-4)

    def test_weights_on_unit_mode(self, lattice):
        u = field_service.single_mode(lattice, (1, 0, 0), (0, 1, 0))
        base = field_service.gevrey_norm(u)
        assert field_service.gevrey_norm(u, GevreyIndex(alpha=0.5)) == pytest.approx(base)
        assert field_service.gevrey_norm(u, GevreyIndex(sigma=0.3)) == pytest.approx(base * math.exp(0.3))

    def test_higher_mode(self, lattice):
        u = field_service.single_mode(lattice, (2, 0, 0), (0, 0, 1))
        base = field_service.gevrey_norm(u)
        assert field_service.gevrey_norm(u, GevreyIndex(alpha=1.0)) == pytest.approx(4 * base)

    def test_monotone_in_alpha(self, lattice, rng):
        u = field_service.random_field(lattice, rng)
        norms = [field_service.gevrey_norm(u, GevreyIndex(alpha=a, sigma=0.1)) for a in (0, 0.5, 1, 2)]
        assert norms == sorted(norms)

    def test_complex_norm_is_hypot(self, xi):
        expected = math.hypot(field_service.gevrey_norm(xi.re), field_service.gevrey_norm(xi.im))
        assert field_service.gevrey_norm(xi) == pytest.approx(expected)

    def test_energy_and_enstrophy(self, lattice):
        u = field_service.single_mode(lattice, (1, 1, 0), (1, -1, 0))
        # |k|² = 2
        assert field_service.enstrophy(u) == pytest.approx(2 * field_service.energy(u))


class TestTransforms:
    def test_physical_values(self, lattice):
        u = field_service.single_mode(lattice, (1, 0, 0), (0, 1, 0))
        x = field_service.grid(lattice)
        values = field_service.to_physical(u)
        np.testing.assert_allclose(values[1], np.cos(x[0]), atol=1e-13)
        np.testing.assert_allclose(values[0], 0.0, atol=1e-13)

    def test_back_to_coefficients(self, lattice, rng):
        u = field_service.random_field(lattice, rng)
        back = field_service.from_physical(lattice, field_service.to_physical(u))
        np.testing.assert_allclose(SpectralField(lattice, back).coefficients, u.coefficients, atol=1e-14)


class TestLeray:
    def test_divergence_free_and_idempotent(self, lattice, rng):
        raw = rng.standard_normal((3,) + lattice.shape)
        pu = field_service.leray_project((lattice, field_service.from_physical(lattice, raw)))
        assert pu.divergence_defect() < 1e-13
        again = field_service.leray_project(pu)
        np.testing.assert_allclose(again.coefficients, pu.coefficients, atol=1e-15)

    def test_gradient_removed(self, lattice):
        u = field_service.field_from_modes(lattice, [((1, 0, 0), (1.0, 0.0, 0.0))])
        assert u.is_zero()

    def test_diagonal_mode(self, lattice):
        raw = field_service.raw_from_modes(lattice, [((1, 1, 0), (1.0, 0.0, 0.0))])
        u = field_service.leray_project((lattice, raw))
        for k in [(1, 1, 0), (-1, -1, 0)]:
            np.testing.assert_allclose(u.coefficients[(slice(None),) + lattice.mode_index(k)], [0.5, -0.5, 0.0])

    def test_random_field_properties(self, lattice, rng):
        u = field_service.random_field(lattice, rng, amplitude=0.25)
        assert field_service.gevrey_norm(u) == pytest.approx(0.25)
        assert u.symmetry_defect() < 1e-14
        assert u.divergence_defect() < 1e-13


class TestBilinear:
    def test_orthogonality(self, lattice, rng):
        u = field_service.random_field(lattice, rng)
        v = field_service.random_field(lattice, rng)
        b = field_service.bilinear_B(u, v)
        scale = field_service.gevrey_norm(b) * field_service.gevrey_norm(v)
        assert abs(field_service.inner_product(b, v)) <= 1e-12 * scale

    def test_shear_flow_has_no_self_advection(self, lattice):
        shear = field_service.single_mode(lattice, (0, 1, 0), (1, 0, 0), kind="sin")
        assert field_service.gevrey_norm(field_service.bilinear_B(shear, shear)) < 1e-14

    def test_output_is_divergence_free(self, lattice, rng):
        u = field_service.random_field(lattice, rng)
        assert field_service.bilinear_B(u, u).divergence_defect() < 1e-12

    def test_complexified_real_inputs(self, lattice, rng):
        u = field_service.random_field(lattice, rng)
        v = field_service.random_field(lattice, rng)
        out = field_service.bilinear_B_complex(ComplexField.from_real(u), ComplexField.from_real(v))
        assert out.is_real()
        np.testing.assert_allclose(out.re.coefficients, field_service.bilinear_B(u, v).coefficients)

    def test_complexified_imaginary_inputs(self, lattice, rng):
        u = field_service.random_field(lattice, rng)
        v = field_service.random_field(lattice, rng)
        zero = SpectralField.zero(lattice)
        out = field_service.bilinear_B_complex(ComplexField(zero, u), ComplexField(zero, v))
        assert out.im.is_zero()
        np.testing.assert_allclose(out.re.coefficients, -field_service.bilinear_B(u, v).coefficients)


class TestResolvent:
    @pytest.mark.parametrize("omega", [0.0, 1.0, -1.0, 10.0])
    def test_inverse_of_shift(self, lattice, rng, omega):
        w = field_service.random_complex_field(lattice, rng)
        x = field_service.resolvent_shift_inverse(w, omega)
        back = field_service.apply_shift(x, omega)
        assert field_service.gevrey_norm(back - w) <= 1e-12 * field_service.gevrey_norm(w)

    def test_gains_one_power_of_A(self, lattice, rng):
        w = field_service.random_complex_field(lattice, rng)
        idx = GevreyIndex(alpha=0.5, sigma=0.1)
        x = field_service.resolvent_shift_inverse(w, 3.0)
        assert field_service.gevrey_norm(x, idx.shifted(1.0)) <= field_service.gevrey_norm(w, idx) * (1 + 1e-12)

    def test_unit_mode_values(self, lattice):
        u = field_service.single_mode(lattice, (1, 0, 0), (0, 1, 0))
        x = field_service.resolvent_shift_inverse(ComplexField.from_real(u), 1.0)
        # (1 + i)⁻¹ = (1 - i)/2
        np.testing.assert_allclose(x.re.coefficients, 0.5 * u.coefficients)
        np.testing.assert_allclose(x.im.coefficients, -0.5 * u.coefficients)


class TestInequalities:
    def test_d0(self):
        assert field_service.d0(0.0, 1.0) == pytest.approx(math.exp(-1))
        assert field_service.d0(1.0, 1.0) == pytest.approx(1 / math.e)
        assert field_service.d0(0.5, 0.5) == pytest.approx(math.sqrt(1 / math.e))

    def test_d0_unbounded(self):
        with pytest.raises(ValueError):
            field_service.d0(1.0, 0.0)

    def test_bilinear_constant_finite(self, lattice, rng):
        pairs = [
            (field_service.random_complex_field(lattice, rng), field_service.random_complex_field(lattice, rng))
            for _ in range(3)
        ]
        constant = field_service.bilinear_constant(pairs, GevreyIndex(alpha=0.5))
        assert 0 < constant < math.inf
