import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pdcstats import (
    CountHistogram,
    DomainError,
    InsufficientStatisticsError,
    JointCountHistogram,
    JointPhotonDistribution,
    PhotonNumberDistribution,
    UnreliableMomentError,
    conditional,
    joint_from_product,
    marginal,
    moments,
    pnd_degenerate_squeezed,
    pnd_pair_count_multimode,
    pnd_poisson,
    pnd_thermal,
    pnd_two_mode_squeezed,
    total_variation,
)


def normalized(d):
    return math.fsum(np.ravel(d.probs)) + d.tail_mass


class TestTwoModeSqueezed:
    def test_vacuum(self):
        d = pnd_two_mode_squeezed(0.0, 2)
        expected = np.zeros((3, 3))
        expected[0, 0] = 1.0
        np.testing.assert_array_equal(d.probs, expected)
        assert d.tail_mass == 0.0

    def test_half(self):
        d = pnd_two_mode_squeezed(0.5, 2)
        np.testing.assert_array_equal(np.diag(d.probs), [0.5, 0.25, 0.125])
        assert d.probs[~np.eye(3, dtype=bool)].sum() == 0.0
        assert d.tail_mass == 0.125

    @pytest.mark.parametrize("eta_sq", np.round(np.arange(0.0, 1.0, 0.1), 1))
    def test_off_diagonal_exactly_zero(self, eta_sq):
        d = pnd_two_mode_squeezed(eta_sq, 15)
        assert np.all(d.probs[~np.eye(16, dtype=bool)] == 0.0)
        assert abs(normalized(d) - 1) < 1e-12

    @pytest.mark.parametrize("eta_sq", [0.1, 0.37, 0.8])
    def test_marginal_is_thermal(self, eta_sq):
        # oracle: sum the defining formula over the idler index by hand
        n_max = 40
        mean = eta_sq / (1 - eta_sq)
        d = marginal(pnd_two_mode_squeezed(eta_sq, n_max), "idler")
        for n in range(n_max + 1):
            row = sum((1 - eta_sq) * eta_sq**k if k == n else 0.0 for k in range(n_max + 1))
            assert d.probs[n] == pytest.approx(row, rel=1e-14, abs=1e-300)
            assert d.probs[n] == pytest.approx(mean**n / (1 + mean) ** (n + 1), rel=1e-12)

    @pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            pnd_two_mode_squeezed(bad, 3)


class TestDegenerateSqueezed:
    def test_vacuum(self):
        assert pnd_degenerate_squeezed(0.0, 4).probs[0] == 1.0

    def test_half(self):
        d = pnd_degenerate_squeezed(0.5, 4)
        np.testing.assert_array_equal(d.probs, [0.5, 0, 0.25, 0, 0.125])
        assert d.tail_mass == 0.125

    @pytest.mark.parametrize("chi_sq", [0.0, 0.2, 0.5, 0.9])
    @pytest.mark.parametrize("n_max", [0, 1, 7, 30])
    def test_parity_and_norm(self, chi_sq, n_max):
        d = pnd_degenerate_squeezed(chi_sq, n_max)
        assert np.all(d.probs[1::2] == 0.0)
        assert abs(normalized(d) - 1) < 1e-12

    @pytest.mark.parametrize("chi_sq", [0.1, 0.3, 0.6])
    def test_mean(self, chi_sq):
        mean, _ = moments(pnd_degenerate_squeezed(chi_sq, 400))
        assert mean == pytest.approx(2 * chi_sq / (1 - chi_sq), rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            pnd_degenerate_squeezed(1.0, 4)


class TestPoissonThermal:
    def test_poisson_vacuum(self):
        assert pnd_poisson(0.0, 5).probs[0] == 1.0

    def test_poisson_one(self):
        assert pnd_poisson(1.0, 5).probs[0] == pytest.approx(math.exp(-1), abs=1e-15)

    @pytest.mark.parametrize("mean", [0.3, 1.0, 4.5])
    def test_poisson_mean_and_norm(self, mean):
        d = pnd_poisson(mean, 80)
        assert abs(normalized(d) - 1) < 1e-12
        m, v = moments(d)
        assert m == pytest.approx(mean, abs=1e-9)
        assert v == pytest.approx(mean, abs=1e-9)

    def test_thermal_vacuum(self):
        assert pnd_thermal(0.0, 5).probs[0] == 1.0

    def test_thermal_one(self):
        d = pnd_thermal(1.0, 10)
        np.testing.assert_allclose(d.probs, 0.5 ** (np.arange(11) + 1), rtol=0, atol=1e-16)
        m, v = moments(pnd_thermal(1.0, 200))
        assert m == pytest.approx(1.0, abs=1e-12)
        assert v == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("mean", [0.05, 1.0, 3.0])
    def test_thermal_is_two_mode_marginal(self, mean):
        a = pnd_thermal(mean, 25)
        b = marginal(pnd_two_mode_squeezed(mean / (1 + mean), 25))
        np.testing.assert_allclose(a.probs, b.probs, rtol=1e-13, atol=0)
        assert a.tail_mass == pytest.approx(b.tail_mass, rel=1e-12)

    @pytest.mark.parametrize("fn", [pnd_poisson, pnd_thermal])
    def test_negative_mean(self, fn):
        with pytest.raises(DomainError):
            fn(-1.0, 3)


class TestMultimode:
    def test_single_mode_is_thermal(self):
        a = pnd_pair_count_multimode(1, 0.7, 20)
        b = pnd_thermal(0.7, 20)
        np.testing.assert_allclose(a.probs, b.probs, rtol=1e-15)

    @pytest.mark.parametrize("modes,mu", [(2, 0.5), (7, 0.1), (50, 0.02), (1000, 0.001)])
    def test_matches_negative_binomial(self, modes, mu):
        # oracle: closed-form negative binomial, independent of the convolution path
        d = pnd_pair_count_multimode(modes, mu, 25)
        ref = stats.nbinom.pmf(np.arange(26), modes, 1 / (1 + mu))
        np.testing.assert_allclose(d.probs, ref, rtol=1e-11, atol=1e-300)
        assert abs(normalized(d) - 1) < 1e-12

    def test_poisson_limit(self):
        d = pnd_pair_count_multimode(1000, 0.001, 40)
        assert total_variation(d, pnd_poisson(1.0, 40)) < 0.001

    def test_convergence_monotone(self):
        ref = pnd_poisson(1.0, 40)
        dist = [total_variation(pnd_pair_count_multimode(m, 1.0 / m, 40), ref) for m in (1, 10, 100, 1000)]
        assert all(a > b for a, b in zip(dist, dist[1:]))

    @pytest.mark.parametrize("modes,mu", [(3, 0.2), (100, 0.01), (1000, 0.001)])
    def test_mean(self, modes, mu):
        m, _ = moments(pnd_pair_count_multimode(modes, mu, 60))
        assert m == pytest.approx(modes * mu, abs=1e-9)

    @pytest.mark.parametrize("modes,mu", [(0, 0.1), (-2, 0.1), (3, -0.1)])
    def test_domain(self, modes, mu):
        with pytest.raises(DomainError):
            pnd_pair_count_multimode(modes, mu, 5)


class TestMarginal:
    def test_product(self):
        a, b = pnd_poisson(0.4, 12), pnd_thermal(0.9, 12)
        j = joint_from_product(a, b)
        np.testing.assert_allclose(marginal(j, "signal").probs, a.probs * b.probs.sum(), rtol=1e-14)
        np.testing.assert_allclose(marginal(j, "idler").probs, b.probs * a.probs.sum(), rtol=1e-14)

    def test_symmetric(self):
        j = pnd_two_mode_squeezed(0.3, 6)
        np.testing.assert_array_equal(marginal(j, "signal").probs, marginal(j, "idler").probs)

    def test_tail_carried(self):
        j = pnd_two_mode_squeezed(0.5, 4)
        assert marginal(j).tail_mass == j.tail_mass

    def test_bad_axis(self):
        with pytest.raises(DomainError):
            marginal(pnd_two_mode_squeezed(0.3, 2), "pump")


class TestConditional:
    def test_diagonal(self):
        h = JointCountHistogram(np.diag([5, 3, 7, 1]), 16)
        c = conditional(h, 2)
        np.testing.assert_array_equal(c.counts, [0, 0, 7, 0])
        assert c.trials == 7

    def test_row_arithmetic(self):
        counts = np.zeros((3, 2), dtype=int)
        counts[1] = [10, 30]
        c = conditional(JointCountHistogram(counts, 40), 1)
        assert c.trials == 40
        assert c.frequencies()[0] == 0.25

    def test_empty_row(self):
        with pytest.raises(InsufficientStatisticsError):
            conditional(JointCountHistogram(np.diag([1, 0, 1]), 2), 1)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1), st.integers(0, 50))
    def test_chain_rule(self, rows, cols, seed, overflow):
        counts = np.random.default_rng(seed).integers(0, 40, size=(rows, cols))
        counts[0, 0] += 1
        h = JointCountHistogram(counts, counts.sum() + overflow)
        sig = h.marginal("signal")
        for n1 in range(rows):
            if sig.counts[n1] == 0:
                continue
            c = conditional(h, n1)
            # p(n1, n2) = p(n2 | n1) p(n1), in exact integer arithmetic
            for n2 in range(cols):
                assert c.counts[n2] * sig.counts[n1] == h.counts[n1, n2] * c.trials


class TestMoments:
    def test_unreliable(self):
        with pytest.raises(UnreliableMomentError):
            moments(pnd_thermal(5.0, 3))


class TestValidation:
    def test_unnormalized(self):
        with pytest.raises(DomainError):
            PhotonNumberDistribution(np.array([0.5, 0.4]), 0.0)

    def test_negative_count(self):
        with pytest.raises(DomainError):
            CountHistogram(np.array([1, -1]), 5)

    def test_counts_above_trials(self):
        with pytest.raises(DomainError):
            JointCountHistogram(np.ones((2, 2), dtype=int), 3)

    def test_immutable(self):
        d = pnd_poisson(1.0, 3)
        with pytest.raises(ValueError):
            d.probs[0] = 0.0

    def test_underflow_flushed_to_tail(self):
        d = pnd_poisson(1.0, 200)
        assert np.all((d.probs == 0) | (d.probs >= 1e-300))
        assert abs(normalized(d) - 1) < 1e-12

    def test_joint_from_truncated(self):
        j = JointPhotonDistribution.from_truncated(np.full((2, 2), 0.2))
        assert j.tail_mass == pytest.approx(0.2)
