import numpy as np
import pytest
from scipy.special import ndtri

from conftest import small_discrete
from naive import naive_sandwich, naive_tilted_e0
from semiresp import (Dataset, NearSingularJacobian, discrete, estimate_reports,
                      from_arrays, m_ca1, moment_from_values, solve_p_ca1,
                      variance_gamma, variance_mu, wald_ci)
from semiresp.inference import _sandwich
from semiresp.profile import ProfileEngine


def test_wald_ci_degenerate():
    assert wald_ci(1.5, 0.0, 0.05) == (1.5, 1.5)


def test_wald_ci_reference_interval():
    # variance chosen so the 95% half width is 0.06
    z = ndtri(0.975)
    lo, hi = wald_ci(1.86, (0.06 / z) ** 2, 0.05)
    assert lo == pytest.approx(1.80, abs=1e-12)
    assert hi == pytest.approx(1.92, abs=1e-12)


def test_wald_ci_alpha_scaling_is_quantile_ratio():
    lo1, hi1 = wald_ci(0.0, 1.0, 0.05)
    lo2, hi2 = wald_ci(0.0, 1.0, 0.32)
    got = (hi2 - lo2) / (hi1 - lo1)
    assert got == pytest.approx(ndtri(1 - 0.16) / ndtri(1 - 0.025), abs=1e-9)


def test_variance_gamma_constant_moment_is_singular():
    data = small_discrete(seed=2, n=300)
    m = moment_from_values(np.ones(data.n), "const")
    with pytest.raises(NearSingularJacobian):
        variance_gamma(data, 0.5, m)


def test_sandwich_matches_naive_sums():
    data = small_discrete(seed=21, n=150)
    eng = ProfileEngine(data)
    gamma_hat = 0.55
    m_vals = m_ca1(data, engine=eng).matrix(gamma_hat)[:, 0]
    m = moment_from_values(m_vals, "frozen")
    parts = _sandwich(data, gamma_hat, m, eng, None)
    a_naive, b_naive = naive_sandwich(data, gamma_hat, m_vals)
    assert parts.a_mat[0] == pytest.approx(a_naive, rel=1e-10)
    var_naive = b_naive / a_naive ** 2 / data.n
    assert parts.variance == pytest.approx(var_naive, rel=1e-10)


def test_variance_gamma_nonnegative_and_scales_inversely():
    data = small_discrete(seed=5, n=200)
    gamma_hat = solve_p_ca1(data).gamma_hat
    m_vals = m_ca1(data).matrix(gamma_hat)
    var1 = variance_gamma(data, gamma_hat, moment_from_values(m_vals))
    assert var1 >= 0
    k = 3
    rep = Dataset(list(data.observations) * k, data.x1_kinds, data.x2_kinds)
    var_k = variance_gamma(rep, gamma_hat, moment_from_values(np.tile(m_vals, (k, 1))))
    assert var_k == pytest.approx(var1 / k, rel=1e-6)


def test_variance_mu_known_gamma_reduces_to_term_variance():
    data = small_discrete(seed=9, n=250)
    gamma = 0.6
    eng = ProfileEngine(data)
    got = variance_mu(data, gamma, 0.0, "mp", engine=eng)
    # direct reconstruction of the per-observation contributions
    pi = eng.pi_resp(gamma)
    e0 = naive_tilted_e0(data, gamma, lambda x, y: y)
    t = e0.copy()
    t[data.resp_mask] += (data.y_resp - e0[data.resp_mask]) / pi
    assert got == pytest.approx(np.var(t) / data.n, rel=1e-12)


def test_variance_mu_complete_data_near_sample_variance():
    n = 400
    rng = np.random.default_rng(14)
    y = rng.standard_normal(n) + 2.0
    data = from_arrays(rng.integers(0, 2, n), rng.integers(0, 2, n), y,
                       np.ones(n, dtype=int), [discrete(0, 1)], [discrete(0, 1)])
    g_fn = lambda x1m: np.full(x1m.shape[0], 18.0)   # forces pi ~ 1
    eng = ProfileEngine(data, g_override=g_fn)
    got = variance_mu(data, 0.4, 0.0, "mp", engine=eng)
    assert got == pytest.approx(np.var(y) / n, rel=0.05)


def test_variance_mu_rejects_unknown_kind():
    data = small_discrete(seed=2, n=120)
    from semiresp import ConfigError
    with pytest.raises(ConfigError):
        variance_mu(data, 0.5, 0.0, "nope")


def test_estimate_reports_shapes_and_json():
    data = small_discrete(seed=3, n=600)
    reports = estimate_reports(data, ["p-ca1", "p-gmm"], ["mu-ipw", "mu-mp"])
    assert [r.target for r in reports] == ["gamma", "mu", "mu"] * 2
    for r in reports:
        d = r.to_json_dict()
        assert d["ci_lo"] <= d["estimate"] <= d["ci_hi"]
        assert d["variance"] >= 0
        assert d["n"] == 600
    mu_rows = [r for r in reports if r.target == "mu"]
    assert {r.method["gamma_estimator"] for r in mu_rows} == {"p-ca1", "p-gmm"}


def test_estimate_reports_without_ci():
    data = small_discrete(seed=3, n=300)
    reports = estimate_reports(data, ["p-ca2"], ["mu-db"], compute_ci=False)
    assert all(r.variance is None and r.ci is None for r in reports)
