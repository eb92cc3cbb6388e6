import numpy as np
import pytest

from robustcbp.errors import DomainError
from robustcbp.families import (TableFamily, as_pmf, geometric_family, mean_of,
                                offspring_mean_twotype, trinomial_family)

from oracles import geometric_fisher_bruteforce

THETAS = np.linspace(0.01, 0.99, 101)


class TestGeometric:
    fam = geometric_family()

    def test_moments_at_03(self):
        assert self.fam.mean(0.3) == pytest.approx(2.3333, abs=5e-5)
        assert self.fam.variance(0.3) == pytest.approx(7.7778, abs=5e-5)

    def test_pmf_at_half(self):
        assert self.fam.pmf(0.5, 0) == 0.5

    def test_parameter_space_clipped(self):
        assert self.fam.lower == 1e-6 and self.fam.upper == 1 - 1e-6
        with pytest.raises(DomainError):
            self.fam.check(0.0)

    def test_normalization_on_grid(self):
        for t in THETAS:
            p = self.fam.pmf_vector(t)
            assert abs(p.sum() - 1.0) < 1e-10

    def test_support_hint_is_smallest(self):
        for t in (0.05, 0.3, 0.77):
            K = self.fam.support_hint(t)
            assert (1 - t) ** (K + 1) < 1e-14
            assert (1 - t) ** K >= 1e-14

    def test_derivative_matches_finite_differences(self):
        h = 1e-6
        for t in np.linspace(0.05, 0.95, 19):
            for k in range(0, 30, 3):
                fd = (self.fam.pmf(t + h, k) - self.fam.pmf(t - h, k)) / (2 * h)
                an = self.fam.pmf_dtheta(t, k)
                assert abs(fd - an) <= 1e-5 * max(abs(an), 1e-3)

    def test_moments_bruteforce(self):
        for t in np.linspace(0.05, 0.95, 19):
            p = self.fam.pmf_vector(t)
            k = np.arange(p.size)
            m = k @ p
            assert m == pytest.approx(self.fam.mean(t), abs=1e-8)
            assert ((k - m) ** 2) @ p == pytest.approx(self.fam.variance(t), abs=1e-8)

    def test_fisher_information_formula(self):
        for t in (0.2, 0.3, 0.5):
            assert self.fam.fisher_information(t) == pytest.approx(
                geometric_fisher_bruteforce(t), rel=1e-10)

    def test_identifiability_probe(self):
        grid = np.linspace(0.05, 0.95, 31)
        K = 2000
        P = self.fam.probs(grid, np.arange(K))
        for i in range(grid.size):
            for j in range(i + 1, grid.size):
                l1 = np.abs(P[i] - P[j]).sum()
                assert l1 / (grid[j] - grid[i]) > 0

    def test_continuity_in_theta(self):
        for k in (0, 5, 40):
            a = self.fam.pmf(0.3, k)
            b = self.fam.pmf(0.3 + 1e-9, k)
            assert abs(a - b) < 1e-7


class TestTrinomial:
    fam = trinomial_family()

    def test_complement_category(self):
        assert self.fam.pmf((0.3854, 0.4902), 2) == pytest.approx(0.1244, abs=1e-12)

    def test_symmetric_point(self):
        for k in range(3):
            assert self.fam.pmf((1 / 3, 1 / 3), k) == pytest.approx(1 / 3)

    def test_vertex_is_point_mass(self):
        assert self.fam.pmf_vector((1.0, 0.0)).tolist() == [1.0, 0.0, 0.0]

    def test_normalization(self):
        rng = np.random.default_rng(4)
        pts = rng.dirichlet([1, 1, 1], 101)[:, :2]
        assert np.allclose(self.fam.probs(pts, [0, 1, 2]).sum(axis=1), 1.0, atol=1e-12)

    def test_outside_simplex(self):
        with pytest.raises(DomainError):
            self.fam.check((0.7, 0.6))
        with pytest.raises(DomainError):
            mean_of(self.fam, np.array([0.7, 0.6]))

    def test_twotype_mean(self):
        assert offspring_mean_twotype(0.4902) == pytest.approx(0.9804)
        assert offspring_mean_twotype(0.5) == 1.0
        assert mean_of(self.fam, np.array([0.2, 0.5])) == 1.0


def test_geometric_mean_at_half():
    assert mean_of(geometric_family(), 0.5) == 1.0


def test_mean_of_rejects_outside():
    with pytest.raises(DomainError):
        mean_of(geometric_family(), 1.5)


class TestTable:
    def test_moments(self):
        fam = TableFamily([0.25, 0.5, 0.25])
        assert fam.mean() == 1.0
        assert fam.variance() == 0.5
        assert fam.pmf(None, 7) == 0.0

    def test_rejects_unnormalized(self):
        with pytest.raises(DomainError):
            TableFamily([0.5, 0.4])


def test_as_pmf_from_mapping():
    assert as_pmf({"0": 0.5, 3: 0.5}).tolist() == [0.5, 0, 0, 0.5]
    with pytest.raises(DomainError):
        as_pmf([0.5, -0.1])
