import numpy as np
import pytest

from robustcbp.errors import DomainError
from robustcbp.families import TableFamily, geometric_family
from robustcbp.robustness import (ContaminationModel, alpha_influence, breakdown_scan,
                                  contaminate, contaminated_posterior_stability,
                                  influence_function, model_pmf)

GEO = geometric_family()
D3 = 1e3


class TestContaminate:
    @pytest.mark.parametrize("alpha,L", [(0.15, 11), (0.5, 0), (1e-4, 300), (0.3, 2)])
    def test_is_pmf(self, alpha, L):
        q = contaminate(GEO, 0.3, alpha, L)
        assert abs(q.sum() - 1.0) < 1e-14 and np.all(q >= 0)

    def test_zero_alpha(self):
        assert np.array_equal(contaminate(GEO, 0.3, 0.0, 11), model_pmf(GEO, 0.3))

    def test_inside_support(self):
        p = model_pmf(GEO, 0.3)
        q = contaminate(GEO, 0.3, 0.15, 2)
        assert q[2] == pytest.approx(0.85 * p[2] + 0.15, abs=1e-15)

    def test_simulated_law(self):
        q = ContaminationModel(0.3, 0.15, 11).pmf(GEO)
        assert q[11] == pytest.approx(0.85 * 0.3 * 0.7**11 + 0.15, abs=1e-13)
        assert q[0] == pytest.approx(0.85 * 0.3, abs=1e-13)

    def test_bad_alpha(self):
        with pytest.raises(DomainError):
            contaminate(GEO, 0.3, 1.0, 4)
        with pytest.raises(DomainError):
            contaminate(GEO, 0.3, 0.1, -1)


class TestInfluence:
    def test_hellinger_dips_near_mode(self):
        Ls = list(range(0, 41))
        curve = alpha_influence("HD", "EDAP", GEO, 0.3, 1e-3, Ls, delta=D3)
        mag = np.abs(curve.values)
        # contamination at the model's high-probability points moves the estimate least
        assert mag[:3].min() < mag[curve.argmax_abs()]
        assert mag[0] < mag[11]

    @pytest.mark.parametrize("kind", ["HD", "NED"])
    def test_redescending(self, kind):
        curve = alpha_influence(kind, "EDAP", GEO, 0.3, 1e-2, range(41), delta=1e4)
        mag = np.abs(curve.values)
        assert mag[40] < mag.max()
        assert curve.argmax_abs() < 40

    def test_kl_not_redescending(self):
        curve = alpha_influence("KL", "EDAP", GEO, 0.3, 1e-2, range(41), delta=1e4)
        assert curve.argmax_abs() == 40

    @pytest.mark.parametrize("L", [0, 11, 25, 50])
    def test_finite(self, L):
        value, diag = influence_function("HD", GEO, 0.3, L, delta=D3)
        assert np.isfinite(value) and abs(value) < 1e3
        assert len(diag.quotients) == 3

    def test_self_contamination(self):
        fam = TableFamily(model_pmf(GEO, 0.3))
        value, _ = influence_function("HD", GEO, 0.3, fam.pmf_vector(None), delta=D3)
        assert abs(value) < 1e-6

    def test_kl_matches_conjugate_derivative(self):
        L = 20
        value, diag = influence_function("KL", GEO, 0.3, L, delta=D3)
        p = model_pmf(GEO, 0.3)
        m0 = np.arange(p.size) @ p
        exact = -(0.5 + D3) * D3 * (L - m0) / (1 + D3 + D3 * m0) ** 2
        assert value == pytest.approx(exact, rel=1e-4)
        errs = [abs(qv - exact) for qv in diag.quotients]
        assert errs[0] > errs[1] > errs[2]
        assert diag.converged

    def test_mde_ignores_delta(self):
        a = alpha_influence("HD", "MDE", GEO, 0.3, 0.1, [11])
        b = alpha_influence("HD", "MDE", GEO, 0.3, 0.1, [11], delta=500)
        assert a.values[0] == b.values[0]

    def test_edap_needs_delta(self):
        with pytest.raises(DomainError):
            alpha_influence("HD", "EDAP", GEO, 0.3, 0.1, [11])

    def test_edap_approaches_mde(self):
        mde_if = alpha_influence("HD", "MDE", GEO, 0.3, 0.1, [11]).values[0]
        gaps = [abs(alpha_influence("HD", "EDAP", GEO, 0.3, 0.1, [11], delta=d).values[0]
                    - mde_if) for d in (1e2, 1e3, 1e4)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_csv(self):
        text = alpha_influence("HD", "MDE", GEO, 0.3, 0.1, [1, 2]).to_csv()
        assert text.splitlines()[0] == "L,if_alpha,estimator"


class TestBreakdown:
    @staticmethod
    @pytest.fixture(scope="class")
    def scans():
        return {k: breakdown_scan(k, "EDAP", GEO, 0.3, [0.001, 0.15], 50, delta=D3)
                for k in ("KL", "HD", "NED")}

    def test_bounded(self, scans):
        for s in scans.values():
            assert all(b <= 1 for b in s.b_hat.values())

    def test_hellinger_below_kl(self, scans):
        assert scans["HD"].b_hat[0.15] < scans["KL"].b_hat[0.15]

    def test_small_alpha(self, scans):
        for s in scans.values():
            assert s.b_hat[0.001] < 0.01

    def test_monotone_in_lmax(self, scans):
        wide = breakdown_scan("HD", "EDAP", GEO, 0.3, [0.15], 100, delta=D3)
        assert wide.b_hat[0.15] >= scans["HD"].b_hat[0.15]

    def test_rows_and_csv(self, scans):
        s = scans["HD"]
        assert len(s.rows) == 2 * 51
        assert s.to_csv().splitlines()[0] == "alpha,L,estimate,displacement"


class TestStability:
    def test_zero_alpha(self):
        out = contaminated_posterior_stability("HD", GEO, 0.3, 0.0, [5, 15, 60], D3)
        assert all(v == 0.0 for v in out.values())

    def test_ned_decays(self):
        out = contaminated_posterior_stability("NED", GEO, 0.3, 0.2, [5, 15, 60], D3)
        assert out[60] < out[15] < out[5]

    def test_kl_does_not_decay(self):
        out = contaminated_posterior_stability("KL", GEO, 0.3, 0.2, [5, 15, 60], D3)
        assert min(out.values()) > 1.0
