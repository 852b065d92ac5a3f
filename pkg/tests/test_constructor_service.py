from fractions import Fraction

import pytest
from pydantic import ValidationError

from app.core.exceptions import ClassViolationError
from app.models.expansion import ForceExpansionSpec
from app.schemas.experiment_schema import ForceSpecSchema
from app.services import constructor_service as cs
from app.services import expansion_service as es
from app.services import field_service
from tests.conftest import closed_pair


@pytest.fixture
def small_xi(xi):
    return xi.scale(0.05)


@pytest.fixture
def power_spec(lattice, small_xi):
    seq = cs.build_exponent_sequence([1], 0, 2)
    p1 = closed_pair(lattice, (0, -1), (1.0, 0.0), small_xi)
    return ForceExpansionSpec(lattice=lattice, m_star=0, k=0, sequence=seq, forces={Fraction(1): p1})


@pytest.fixture
def log_spec(lattice, small_xi):
    seq = cs.build_exponent_sequence(["1/2"], 1, 1)
    p1 = closed_pair(lattice, (0, 0, "-1/2"), (1.0, 0.0, 0.0), small_xi, k=1, m=1, mu=Fraction(-1, 2))
    return ForceExpansionSpec(lattice=lattice, m_star=1, k=1, sequence=seq, forces={Fraction(1, 2): p1})


class TestExponentSequence:
    def test_power_case_adds_one(self):
        seq = cs.build_exponent_sequence(["1/2"], 0, 2)
        assert seq.mu == (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))

    def test_log_case_is_additive_only(self):
        seq = cs.build_exponent_sequence(["2/3"], 1, 2)
        assert seq.mu == (Fraction(2, 3), Fraction(4, 3), Fraction(2))

    def test_power_case_half_integers(self):
        seq = cs.build_exponent_sequence(["3/2"], 0, 5)
        assert [str(mu) for mu in seq.mu] == ["3/2", "5/2", "3", "7/2", "4", "9/2", "5"]

    def test_log_case_two_generators(self):
        seq = cs.build_exponent_sequence(["1/2", "1/3"], 1, "3/2")
        expected = [Fraction(n, 6) for n in (2, 3, 4, 5, 6, 7, 8, 9)]
        assert list(seq.mu) == expected

    def test_power_case_with_integer_generator(self):
        assert cs.build_exponent_sequence([1], 0, 3).mu == (1, 2, 3)

    def test_one_based_indexing(self):
        seq = cs.build_exponent_sequence([1], 0, 3)
        assert seq[1] == 1 and seq[3] == 3
        assert seq.index_of(2) == 2
        with pytest.raises(IndexError):
            seq[0]

    @pytest.mark.parametrize("generators, cutoff", [([], None), (["-1"], None), (["3"], "2")])
    def test_invalid(self, generators, cutoff):
        with pytest.raises(ValueError):
            cs.build_exponent_sequence(generators, 0, cutoff)


class TestForceSpec:
    def test_unknown_mu(self, lattice, small_xi):
        seq = cs.build_exponent_sequence([1], 0, 1)
        p = closed_pair(lattice, (0, -2), (1.0, 0.0), small_xi, mu=-2)
        with pytest.raises(ClassViolationError):
            ForceExpansionSpec(lattice=lattice, m_star=0, k=0, sequence=seq, forces={Fraction(2): p})

    def test_wrong_class(self, lattice, small_xi):
        seq = cs.build_exponent_sequence([1], 0, 1)
        p = closed_pair(lattice, (0, -1), (1.0, 0.0), small_xi)
        with pytest.raises(ClassViolationError):
            ForceExpansionSpec(lattice=lattice, m_star=0, k=1, sequence=seq, forces={Fraction(1): p})

    def test_missing_order_is_zero(self, power_spec):
        p2 = power_spec.force(2)
        assert p2.is_zero()
        assert p2.class_mu == -2

    def test_from_schema(self, lattice):
        schema = ForceSpecSchema.model_validate(
            {
                "m_star": 0,
                "k": 0,
                "orders": [
                    {
                        "mu": "1",
                        "terms": [
                            {
                                "exponent_re": ["0", "-1"],
                                "exponent_im": [1.0, 0.0],
                                "coefficient": {"re": {"modes": [{"k": [1, 0, 0], "real": [0, 0.01, 0]}]}},
                            }
                        ],
                    },
                    {"mu": "2", "terms": []},
                ],
            }
        )
        spec = cs.force_spec_from_schema(schema, lattice)
        assert spec.sequence.mu == (1, 2)
        assert len(spec.force(1)) == 2
        assert spec.force(1).conjugate_closed
        assert spec.force(2).is_zero()

    def test_duplicate_orders_rejected(self):
        with pytest.raises(ValidationError, match="plusieurs ordres"):
            ForceSpecSchema.model_validate({"orders": [{"mu": "1"}, {"mu": 1.0}]})


class TestRecursion:
    def test_power_case_classes(self, power_spec):
        q = cs.construct_expansion(power_spec, 2)
        assert es.classify(q[0], 0, 0, -1)
        assert es.classify(q[1], 0, 0, -2)
        assert all(item.conjugate_closed for item in q)
        assert not q[1].is_zero()

    def test_power_case_balance(self, power_spec):
        q = cs.construct_expansion(power_spec, 2)
        for n in (1, 2):
            assert cs.recursion_balance(n, power_spec, q, 3.0) < 1e-10

    def test_chi_uses_previous_order(self, power_spec):
        q = cs.construct_expansion(power_spec, 1)
        chi = cs.resolve_chi(2, power_spec.sequence, q)
        assert (chi.class_m, chi.class_mu) == (0, Fraction(-2))
        assert not chi.is_zero()

    def test_chi_zero_without_matching_order(self, lattice):
        seq = cs.build_exponent_sequence(["3/2"], 0, 5)
        assert seq[3] == 3
        chi = cs.resolve_chi(3, seq, [], k=0, lattice=lattice)
        assert chi.is_zero()
        assert (chi.class_m, chi.class_mu) == (0, Fraction(-3))

    def test_log_case(self, log_spec):
        q = cs.construct_expansion(log_spec, 2)
        assert es.classify(q[0], 1, 1, Fraction(-1, 2))
        assert es.classify(q[1], 1, 1, -1)
        assert cs.resolve_chi(2, log_spec.sequence, q).is_zero()
        for n in (1, 2):
            assert cs.recursion_balance(n, log_spec, q, 20.0) < 1e-10

    def test_order_out_of_range(self, power_spec):
        with pytest.raises(ValueError):
            cs.construct_expansion(power_spec, 3)

    def test_sums(self, power_spec, lattice):
        q = cs.construct_expansion(power_spec, 2)
        t = 4.0
        total = cs.expansion_sum(q, t, lattice)
        direct = es.evaluate(q[0], t) + es.evaluate(q[1], t)
        assert field_service.gevrey_norm(total - direct) < 1e-14
        assert field_service.gevrey_norm(cs.expansion_sum(q, t, lattice, N=1) - es.evaluate(q[0], t)) < 1e-14
        force = cs.force_value(power_spec, 2, t)
        assert field_service.gevrey_norm(force - es.evaluate(power_spec.force(1), t)) < 1e-14

    def test_manufactured_force_equation(self, power_spec, lattice):
        q = cs.construct_expansion(power_spec, 2)
        t = 5.0
        f = cs.manufactured_force(q, t, lattice)
        u = cs.expansion_sum(q, t, lattice)
        du = sum((es.time_derivative(item, t) for item in q[1:]), es.time_derivative(q[0], t))
        rhs = du + field_service.apply_A_power(u, 1.0) + field_service.bilinear_B(u, u)
        assert field_service.gevrey_norm(f - rhs) <= 1e-13 * field_service.gevrey_norm(f)

    def test_summary(self, power_spec):
        q = cs.construct_expansion(power_spec, 2)
        summary = cs.summarize(q, power_spec.sequence)
        assert [s.mu for s in summary] == ["1", "2"]
        assert all(s.coefficient_norm_gained >= s.coefficient_norm for s in summary)
