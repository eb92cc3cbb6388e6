from fractions import Fraction

import numpy as np
import pytest

from robustcbp.errors import ConvergenceWarning, DataError, DomainError, EstimationError
from robustcbp.fixtures import TABLE3, TABLE4, load_fixture
from robustcbp.multitype import (Dirichlet, SimplexPosterior, TwoTypeStats,
                                 build_simplex_dposterior, criticality_prob, edap_simplex,
                                 edap_standard_error, hpd_region, mdap_simplex, mle_twotype,
                                 mle_twotype_exact, simulate_twotype)

from oracles import dirichlet_hpd_cells

EXP1 = load_fixture("oligo-exp1")
EXP2 = load_fixture("oligo-exp2")
JEFF = Dirichlet((0.5, 0.5, 0.5))


@pytest.fixture(scope="module")
def posts():
    out = {}
    for name, s in (("exp1", EXP1), ("exp2", EXP2)):
        for kind in ("KL", "HD", "NED"):
            out[name, kind] = build_simplex_dposterior(kind, s, JEFF, seed=0)
    return out


class TestStats:
    def test_mle_exp1(self):
        assert mle_twotype(EXP1) == pytest.approx((0.3854, 0.4902, 0.1244, 0.9647), abs=5e-5)

    def test_mle_exp2(self):
        assert mle_twotype(EXP2) == pytest.approx((0.1375, 0.4944, 0.3680, 0.9746), abs=5e-5)

    def test_mle_sums_to_one_exactly(self):
        for s in (EXP1, EXP2):
            p0, p1, p2, _ = mle_twotype_exact(s)
            assert p0 + p1 + p2 == Fraction(1)

    def test_all_mass_dies(self):
        s = TwoTypeStats(y1_0=10, y1_2=0, psi=0, delta=10, y1_total=12, n=1, z0=12)
        assert mle_twotype(s) == (1.0, 0.0, 0.0, 10 / 12)

    def test_invalid(self):
        with pytest.raises(DataError):
            TwoTypeStats(y1_0=1, y1_2=1, psi=1, delta=4, y1_total=5, n=1, z0=5)
        with pytest.raises(DataError):
            TwoTypeStats(y1_0=3, y1_2=1, psi=1, delta=5, y1_total=4, n=1, z0=4)
        with pytest.raises(EstimationError):
            mle_twotype(TwoTypeStats(0, 0, 0, 0, 3, 1, 3))


class TestSimulation:
    def test_doubling(self):
        rec = simulate_twotype(0.0, 1.0, 1.0, 3, 6, seed=1)
        assert [g.z1 for g in rec.generations] == [3 * 2**l for l in range(6)]

    def test_no_progenitors(self):
        rec = simulate_twotype(0.3, 0.5, 0.0, 5, 4, seed=1)
        assert len(rec.generations) == 1 and rec.generations[0].phi == 0

    def test_deterministic(self):
        a = simulate_twotype(0.3854, 0.4902, 0.9647, 34, 7, seed=3)
        b = simulate_twotype(0.3854, 0.4902, 0.9647, 34, 7, seed=3)
        assert a == b

    def test_bad_parameters(self):
        with pytest.raises(DomainError):
            simulate_twotype(0.7, 0.6, 0.5, 3, 3, 0)
        with pytest.raises(DomainError):
            simulate_twotype(0.3, 0.3, 1.5, 3, 3, 0)

    def test_envelope(self):
        # mean progenitors per generation is gamma * z0 * (2 q1 gamma)^l
        q0, q1, g, z0, n = 0.3854, 0.4902, 0.9647, 34, 7
        expected = g * z0 * sum((2 * q1 * g) ** l for l in range(n))
        deltas = [simulate_twotype(q0, q1, g, z0, n, seed=s).stats().delta for s in range(200)]
        assert abs(np.mean(deltas) - expected) < 0.15 * expected
        assert 0.5 * expected <= np.median(deltas) <= 1.5 * expected

    def test_stats_consistent(self):
        s = simulate_twotype(0.3, 0.5, 0.9, 20, 6, seed=5).stats()
        assert s.delta == s.y1_0 + s.y1_2 + s.psi <= s.y1_total


class TestPosterior:
    def test_zero_delta_is_prior(self):
        s = TwoTypeStats(0, 0, 0, 0, 10, 1, 10)
        post = build_simplex_dposterior("HD", s, JEFF, seed=2)
        assert np.all(post.weights == post.weights[0])
        se = edap_standard_error(post)
        assert np.all(np.abs(np.array(edap_simplex(post)) - 1 / 3) < 3 * se + 1e-12)

    def test_kl_conjugacy(self, posts):
        for name, s in (("exp1", EXP1), ("exp2", EXP2)):
            post = posts[name, "KL"]
            a = np.array([0.5 + s.y1_0, 0.5 + s.y1_2, 0.5 + s.psi])
            se = edap_standard_error(post)
            assert np.all(np.abs(edap_simplex(post) - a / a.sum()) < 3 * se)

    @pytest.mark.parametrize("kind", ["KL", "HD", "NED"])
    def test_reference_edap(self, posts, kind):
        assert edap_simplex(posts["exp1", kind]) == pytest.approx(TABLE3[kind][0], abs=3e-3)
        assert edap_simplex(posts["exp2", kind]) == pytest.approx(TABLE4[kind][0], abs=3e-3)

    def test_simplex_membership(self, posts):
        for post in posts.values():
            e = edap_simplex(post)
            assert min(e) > 0 and sum(e) == pytest.approx(1.0, abs=1e-12)

    def test_across_kind_agreement(self, posts):
        for name in ("exp1", "exp2"):
            p0 = [edap_simplex(posts[name, k])[0] for k in ("KL", "HD", "NED")]
            assert max(p0) - min(p0) < 0.005

    @pytest.mark.filterwarnings("ignore::robustcbp.errors.ConvergenceWarning")
    def test_bitwise_reproducible(self):
        a = build_simplex_dposterior("NED", EXP1, JEFF, n_draws=20000, seed=9)
        b = build_simplex_dposterior("NED", EXP1, JEFF, n_draws=20000, seed=9)
        assert np.array_equal(a.draws, b.draws) and np.array_equal(a.log_weights, b.log_weights)
        assert edap_simplex(a) == edap_simplex(b)

    def test_doubling_draws(self, posts):
        small = posts["exp1", "HD"]
        big = build_simplex_dposterior("HD", EXP1, JEFF, n_draws=400_000, seed=0)
        se = edap_standard_error(small)
        assert np.all(np.abs(np.array(edap_simplex(big)) - edap_simplex(small)) < 2 * se)

    def test_min_draws(self):
        with pytest.raises(DomainError):
            build_simplex_dposterior("HD", EXP1, JEFF, n_draws=100)

    def test_low_ess_warns(self):
        with pytest.warns(ConvergenceWarning):
            build_simplex_dposterior("HD", EXP1, JEFF, n_draws=10_000, seed=0, ess_floor=1e6)

    def test_uniform_weights_give_mean_of_draws(self):
        x = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.1]])
        post = SimplexPosterior(x, np.zeros(3))
        assert edap_simplex(post)[:2] == pytest.approx(x.mean(axis=0).tolist())
        assert post.effective_sample_size == pytest.approx(3.0)


class TestMode:
    def test_exp1_hellinger(self):
        m = mdap_simplex("HD", EXP1, JEFF)
        assert m.p == pytest.approx(TABLE3["HD"][1], abs=1e-9)

    @pytest.mark.parametrize("kind", ["KL", "HD", "NED"])
    def test_exp2(self, kind):
        m = mdap_simplex(kind, EXP2, JEFF)
        assert m.p == pytest.approx((0.136, 0.496, 0.368), abs=1e-9)
        assert not m.boundary

    def test_zero_delta_flags_boundary(self):
        m = mdap_simplex("HD", TwoTypeStats(0, 0, 0, 0, 3, 1, 3), JEFF)
        assert m.boundary


class TestCriticality:
    def test_point_mass(self):
        post = SimplexPosterior(np.array([[0.2, 0.6]]), np.zeros(1))
        assert criticality_prob(post) == 1.0

    def test_reference_values(self, posts):
        assert criticality_prob(posts["exp1", "HD"]) == pytest.approx(0.3424, abs=0.01)
        assert criticality_prob(posts["exp2", "NED"]) == pytest.approx(0.4177, abs=0.01)


class TestRegion:
    def test_mass_bracket(self, posts):
        post = posts["exp1", "HD"]
        r = hpd_region(post, 0.95)
        top = np.sort(r.mass)[::-1]
        assert 0.95 <= r.region_mass <= 0.95 + 2 * top[0]

    def test_nesting(self, posts):
        post = posts["exp2", "NED"]
        small = hpd_region(post, 0.5)
        big = hpd_region(post, 0.999)
        assert np.array_equal(small.cells, big.cells)
        assert np.all(big.in_region[small.in_region])

    def test_kl_against_oracle(self, posts):
        cell = 0.01
        a = np.array([0.5 + EXP1.y1_0, 0.5 + EXP1.y1_2, 0.5 + EXP1.psi])
        oracle = dirichlet_hpd_cells(a, cell, 0.95)
        r = hpd_region(posts["exp1", "KL"], 0.95, cell=cell)
        ours = np.zeros_like(oracle)
        ours[tuple(r.cells[r.in_region].T)] = True
        o_idx, u_idx = np.argwhere(oracle), np.argwhere(ours)
        for src, dst in ((u_idx, o_idx), (o_idx, u_idx)):
            d = np.abs(src[:, None, :] - dst[None, :, :]).max(axis=2).min(axis=1)
            assert d.max() <= 2

    def test_csv(self, posts):
        text = hpd_region(posts["exp1", "HD"], 0.95).to_csv()
        assert text.splitlines()[0] == "q0,q1,density,in_region"
