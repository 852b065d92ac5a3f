import pytest

from app.services import selftest_service


@pytest.fixture(scope="module")
def quick_report():
    return selftest_service.run_selftest("quick", seed=7)


def _failed(report):
    return {f"{c.suite}/{c.name}" for c in report.checks if not c.passed}


class TestSelfTest:
    def test_quick_profile_passes(self, quick_report):
        assert _failed(quick_report) == set()
        assert quick_report.passed

    def test_every_suite_reports(self, quick_report):
        suites = {c.suite for c in quick_report.checks}
        assert suites == {"resolvent", "leray", "gevrey", "bilinear", "timescales", "operators", "trig", "closure"}

    def test_bilinear_constants(self, quick_report):
        assert set(quick_report.bilinear_constants) == {
            "alpha=0.5,sigma=0", "alpha=0.5,sigma=0.1", "alpha=1,sigma=0", "alpha=1,sigma=0.1",
        }
        assert all(v > 0 for v in quick_report.bilinear_constants.values())

    def test_resolvent_sign_fault_is_detected(self):
        report = selftest_service.run_selftest("quick", fault="resolvent-sign", seed=7)
        failed = _failed(report)
        assert not report.passed
        assert "resolvent/identity" in failed
        assert "resolvent/conjugation" not in failed

    def test_unknown_fault(self):
        with pytest.raises(ValueError):
            selftest_service.run_selftest("quick", fault="nope")

    def test_unknown_profile(self):
        with pytest.raises(ValueError):
            selftest_service.run_selftest("huge")


class TestConvolutionOracle:
    def test_matches_pseudo_spectral(self, lattice, rng):
        from app.services import field_service

        u = field_service.random_field(lattice, rng, max_mode=2)
        v = field_service.random_field(lattice, rng, max_mode=2)
        direct = selftest_service.convolution_oracle(u, v)
        fast = field_service.bilinear_B(u, v)
        assert field_service.gevrey_norm(direct - fast) <= 1e-10 * field_service.gevrey_norm(fast)
