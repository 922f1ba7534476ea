import math

import numpy as np
import pytest
from scipy.stats import poisson

from poissoncap.channel import (
    BinaryInput,
    ChannelScenario,
    DiscreteInput,
    i0,
    i1,
    kl_poisson,
    mutual_information,
    mutual_information_terms,
)
from poissoncap.errors import DomainError

# mpmath at 50 digits
I0_0_1_HALF = 0.075879057379803429277924553849346
I0_0_50 = {0.1: 0.094824464092043671103769252473705, 0.5: 0.34657359027997265470376459399274}
I1_SMALL = 0.026721921135255995479244307101601  # (lam, zeta, p) = (0.001, 1, 0.01)


def series_kl(a, b):
    # direct sum over a support holding all but ~1e-16 of Poisson_a
    y = np.arange(int(a + 12 * math.sqrt(a + 1) + 60))
    pa, lpa, lpb = poisson.pmf(y, a), poisson.logpmf(y, a), poisson.logpmf(y, b)
    keep = pa > 0
    return math.fsum(pa[keep] * (lpa[keep] - lpb[keep]))


def entropy_mi(levels, probs, lam, ymax=60):
    # H(Y) - H(Y|X) by brute force over y in [0, ymax]
    y = np.arange(ymax + 1)
    W = np.array([poisson.pmf(y, lam + x) for x in levels])
    q = np.asarray(probs) @ W
    h = lambda v: -math.fsum(v[v > 0] * np.log(v[v > 0]))  # noqa: E731
    return h(q) - math.fsum(p * h(row) for p, row in zip(probs, W))


class TestScenario:
    def test_effective_dark_current(self):
        assert ChannelScenario.constant(0.7, 1e-3).dark_current == 0.7
        assert ChannelScenario.proportional(2.0, 1e-3).dark_current == pytest.approx(2e-3)

    def test_peak(self):
        assert not ChannelScenario.constant(1.0, 0.1).peak_limited
        assert ChannelScenario.constant(1.0, 0.1, 3.0).peak_limited

    @pytest.mark.parametrize("args", [("constant", -1.0, 0.1), ("constant", 1.0, 0.0), ("bogus", 1.0, 0.1)])
    def test_invalid(self, args):
        with pytest.raises(DomainError):
            ChannelScenario(*args)


class TestInputs:
    def test_binary(self):
        b = BinaryInput(2.0, 0.25)
        assert b.average_power == 0.5
        d = b.to_discrete()
        assert list(d.levels) == [0.0, 2.0] and list(d.probs) == [0.75, 0.25]

    def test_merge_duplicates(self):
        d = DiscreteInput([1.0, 0.0, 1.0], [0.25, 0.5, 0.25])
        assert list(d.levels) == [0.0, 1.0] and list(d.probs) == [0.5, 0.5]

    def test_constraints(self):
        d = DiscreteInput([0.0, 2.0], [0.9, 0.1])
        assert d.satisfies(ChannelScenario.constant(1.0, 0.2, 2.0))
        assert not d.satisfies(ChannelScenario.constant(1.0, 0.19, 2.0))
        assert not d.satisfies(ChannelScenario.constant(1.0, 0.2, 1.5))

    @pytest.mark.parametrize(
        "levels, probs", [([0.0, 1.0], [0.5, 0.6]), ([-1.0, 1.0], [0.5, 0.5]), ([], [])]
    )
    def test_invalid(self, levels, probs):
        with pytest.raises(DomainError):
            DiscreteInput(levels, probs)

    @pytest.mark.parametrize("zeta, p", [(0.0, 0.5), (1.0, 0.0), (1.0, 1.0)])
    def test_invalid_binary(self, zeta, p):
        with pytest.raises(DomainError):
            BinaryInput(zeta, p)


class TestKL:
    def test_identical(self):
        assert kl_poisson(1.0, 1.0) == 0.0

    def test_closed_form(self):
        assert kl_poisson(2.0, 1.0) == pytest.approx(2 * math.log(2) - 1, abs=1e-15)
        assert abs(kl_poisson(2.0, 1.0) - series_kl(2.0, 1.0)) <= 1e-12

    def test_degenerate(self):
        assert kl_poisson(0.0, 1.0) == 1.0
        assert kl_poisson(0.0, 0.0) == 0.0
        assert kl_poisson(1.0, 0.0) == math.inf

    def test_log_grid_against_series(self):
        g = np.geomspace(0.01, 50.0, 9)
        for a in g:
            for b in g:
                assert abs(kl_poisson(a, b) - series_kl(a, b)) <= 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            kl_poisson(-1.0, 1.0)


class TestMutualInformation:
    def test_single_point(self):
        for lam in (0.0, 0.5, 3.0):
            assert mutual_information(DiscreteInput([1.7], [1.0]), lam) == 0.0

    def test_against_entropy_difference(self):
        v = mutual_information(BinaryInput(1.0, 0.5), 0.0)
        assert abs(v - entropy_mi([0.0, 1.0], [0.5, 0.5], 0.0)) <= 1e-12

    def test_multi_level_against_entropy_difference(self):
        levels, probs = [0.0, 0.5, 2.0, 4.0], [0.4, 0.2, 0.3, 0.1]
        v = mutual_information(DiscreteInput(levels, probs), 0.3)
        assert abs(v - entropy_mi(levels, probs, 0.3)) <= 1e-12

    def test_per_output_terms(self):
        t = mutual_information_terms(BinaryInput(1.0, 0.3), 0.2)
        assert math.fsum(t) == pytest.approx(mutual_information(BinaryInput(1.0, 0.3), 0.2), abs=1e-15)
        # the y = 0 term is exactly i0
        assert t[0] == pytest.approx(i0(0.2, 1.0, 0.3), abs=1e-15)

    def test_tiny_power_relative_accuracy(self):
        # I ~ 1e-7 nats: the per-input KL form must not cancel
        b = BinaryInput(0.1, 1e-7)
        ref = entropy_mi([0.0, 0.1], [1 - 1e-7, 1e-7], 0.0)  # only a loose check at this size
        v = mutual_information(b, 0.0)
        # lam = 0 closed form: y >= 1 gives p (1 - e^-z) log(1/p), y = 0 gives -a log a - p z e^-z
        p, z = 1e-7, 0.1
        a = 1.0 + p * math.expm1(-z)
        exact = p * -math.expm1(-z) * math.log(1 / p) - a * math.log1p(p * math.expm1(-z)) - p * z * math.exp(-z)
        assert v == pytest.approx(exact, rel=1e-10)
        assert v == pytest.approx(ref, rel=1e-6)

    def test_permutation_and_merging(self):
        a = mutual_information(DiscreteInput([0.0, 1.0, 2.0], [0.5, 0.3, 0.2]), 0.4)
        b = mutual_information(DiscreteInput([2.0, 0.0, 1.0, 1.0], [0.2, 0.5, 0.1, 0.2]), 0.4)
        assert a == pytest.approx(b, abs=1e-15)

    def test_dark_current_degrades(self):
        b = BinaryInput(1.5, 0.2)
        vals = [mutual_information(b, lam) for lam in np.linspace(0.0, 5.0, 26)]
        assert all(y <= x + 1e-15 for x, y in zip(vals, vals[1:]))

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            k = rng.integers(1, 5)
            w = rng.dirichlet(np.ones(k))
            d = DiscreteInput(rng.uniform(0, 6, k), w / math.fsum(w))
            assert mutual_information(d, rng.uniform(0, 3)) >= 0.0


class TestDecomposition:
    def test_i0_large_zeta(self):
        for p, ref in I0_0_50.items():
            assert abs(i0(0.0, 50.0, p) - ref) <= 1e-10
            assert abs(i0(0.0, 50.0, p) + (1 - p) * math.log1p(-p)) <= 1e-10

    def test_i0_value(self):
        assert abs(i0(0.0, 1.0, 0.5) - I0_0_1_HALF) <= 1e-14

    def test_i0_lower_estimate(self):
        rng = np.random.default_rng(11)
        for lam, zeta, p in zip(rng.uniform(0, 3, 200), rng.uniform(0.01, 10, 200), rng.uniform(0.001, 0.999, 200)):
            assert i0(lam, zeta, p) >= -lam - p * (lam + zeta) - 1e-15

    def test_i1_zero_dark(self):
        for zeta, p in [(0.1, 0.01), (1.0, 0.5), (4.0, 0.2)]:
            ref = p * -math.expm1(-zeta) * math.log(1 / p)
            assert i1(0.0, zeta, p) == pytest.approx(ref, rel=1e-13)

    def test_i1_brute_force(self):
        assert abs(i1(0.001, 1.0, 0.01) - I1_SMALL) <= 1e-10

    def test_identity(self):
        rng = np.random.default_rng(5)
        for lam, zeta, p in zip(rng.uniform(0, 2, 20), rng.uniform(0.05, 8, 20), rng.uniform(0.01, 0.99, 20)):
            mi = mutual_information(BinaryInput(zeta, p), lam)
            assert abs(i0(lam, zeta, p) + i1(lam, zeta, p) - mi) <= 1e-12
