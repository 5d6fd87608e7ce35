"""Sandwich variance for gamma, plug-in variance for the mean, Wald intervals.

The gamma variance is the M-estimation sandwich n^-1 A^-1 B A^-1 with

    A = (1/n) sum_i ((1-pi_i)/pi_i) delta_i (y_i - E0~(Y|x1_i)) (m_i - E0~(m|x1_i))
    B = (1/n) sum_i (delta_i/pi_i - 1)^2 (m_i - E0~(m|x1_i))^2

(the squared-weight form of B is the observable completion: its conditional
expectation is (1-pi)/pi and it needs no outcome value on nonrespondent rows).
Vector moments get the weighted GMM sandwich.

The mean variance plugs the estimator's influence decomposition together: the
per-observation term E0(Y|·) + (delta/pi)(y - E0(Y|·)), the tilt-sensitivity
H = (1/n) sum delta_i (1/pi_i - 1)(y_i - E0)^2, and the solved gamma's own
influence -psi_i / A; the empirical variance of the combined contribution
includes the cross covariance automatically.  No bootstrap anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .data import Dataset
from .errors import ConfigError, EstimationError, NearSingularJacobian
from .gamma import (DEFAULT_BRACKET, EstimationContext, MomentFunction,
                    _moment_for, _residual_fn, _solve_scalar,
                    instrument_moments, sandwich_slope, solve_em_p_mle,
                    solve_p_gmm)
from .mu import estimate_mu
from .outcome import WorkingEngine
from .profile import PI_CLIP, ProfileEngine

A_FLOOR = 1e-10


@dataclass(frozen=True)
class EstimateReport:
    """Point estimate with sandwich variance and Wald interval."""

    target: str                 # "gamma" | "mu"
    estimator: str
    estimate: float
    variance: Optional[float]
    ci: Optional[tuple]
    alpha: float
    method: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {
            "target": self.target,
            "estimator": self.estimator,
            "estimate": self.estimate,
            "variance": self.variance,
            "ci_lo": None if self.ci is None else self.ci[0],
            "ci_hi": None if self.ci is None else self.ci[1],
            "alpha": self.alpha,
        }
        out.update({k: v for k, v in self.method.items() if _jsonable(v)})
        return out


def _jsonable(v):
    return isinstance(v, (str, int, float, bool, type(None)))


def wald_ci(estimate: float, variance: float, alpha: float = 0.05) -> tuple:
    """estimate +/- z_{1-alpha/2} sqrt(variance)."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    z = float(ndtri(1.0 - alpha / 2.0))
    half = z * np.sqrt(variance)
    return (float(estimate - half), float(estimate + half))


@dataclass
class _SandwichParts:
    variance: float
    a_mat: np.ndarray          # (k,) derivative vector
    influence: np.ndarray      # (n,) per-observation influence of gamma_hat


def _sandwich(data: Dataset, gamma_hat: float, m: MomentFunction,
              engine: ProfileEngine, weight: Optional[np.ndarray]) -> _SandwichParts:
    eng = engine
    n = eng.n
    pi = eng.pi_resp(gamma_hat)
    w = eng.calib_weights(gamma_hat)
    m_vals = m.matrix(gamma_hat)
    k = m_vals.shape[1]
    centered = np.empty_like(m_vals)
    for j in range(k):
        e0m = eng.e0_x1(gamma_hat, m_vals[eng.resp, j])
        centered[:, j] = m_vals[:, j] - e0m
    a_vec = sandwich_slope(eng, gamma_hat, m_vals)
    psi = w[:, None] * centered
    b_mat = psi.T @ psi / n
    if k == 1:
        a = float(a_vec[0])
        if abs(a) < A_FLOOR:
            raise NearSingularJacobian(f"|A| = {abs(a):.2e} below {A_FLOOR}")
        variance = float(b_mat[0, 0] / a ** 2 / n)
        influence = -psi[:, 0] / a
        return _SandwichParts(variance, a_vec, influence)
    w_mat = np.eye(k) if weight is None else np.asarray(weight)
    awa = float(a_vec @ w_mat @ a_vec)
    if abs(awa) < A_FLOOR:
        raise NearSingularJacobian(f"|A'WA| = {abs(awa):.2e} below {A_FLOOR}")
    middle = a_vec @ w_mat @ b_mat @ w_mat @ a_vec
    variance = float(middle / awa ** 2 / n)
    influence = -(psi @ w_mat @ a_vec) / awa
    return _SandwichParts(variance, a_vec, influence)


def variance_gamma(data: Dataset, gamma_hat: float, m: MomentFunction,
                   e0_engine="nonparam", *, engine: Optional[ProfileEngine] = None,
                   weight=None, **engine_opts) -> float:
    """Sandwich variance of a solved gamma for the given moment function."""
    eng = engine if engine is not None else ProfileEngine(data, **engine_opts)
    return _sandwich(data, gamma_hat, m, eng, weight).variance


def _mu_influence(data: Dataset, gamma_hat: float, which: str,
                  engine: ProfileEngine, e0_engine, analytic: bool):
    """Per-observation terms T_i and the tilt sensitivity H for one mu form."""
    eng = engine
    pi = eng.pi_resp(gamma_hat)
    if which == "ipw":
        e0 = eng.e0_x1(gamma_hat, eng.y_r)
    elif isinstance(e0_engine, WorkingEngine):
        e0 = e0_engine.analytic_e0_y(gamma_hat) if analytic \
            else e0_engine.fi_e0_y(gamma_hat)
    elif e0_engine == "nonparam":
        e0 = eng.e0_full(gamma_hat, eng.y_r)
    elif e0_engine == "zero":
        e0 = np.zeros(eng.n)
    else:
        raise ConfigError(f"unknown e0 engine {e0_engine!r}")
    t_terms = e0.copy()
    resid = eng.y_r - e0[eng.resp]
    t_terms[eng.resp] += resid / pi
    h = float(np.sum((1.0 / pi - 1.0) * resid ** 2) / eng.n)
    return t_terms, h


def variance_mu(data: Dataset, gamma_hat: float, var_gamma: float, which: str,
                e0_engine="nonparam", *, engine: Optional[ProfileEngine] = None,
                gamma_influence: Optional[np.ndarray] = None,
                analytic: bool = True, **engine_opts) -> float:
    """Plug-in variance of mu-ipw / mu-mp / mu-db at the solved gamma.

    With the per-observation gamma influence available, the combined
    contribution T_i + H phi_i is variance'd directly (covariance included);
    otherwise the independent approximation T-variance + H^2 var_gamma is
    used (exact when gamma is known, var_gamma = 0).
    """
    if which not in ("ipw", "mp", "db"):
        raise ConfigError(f"which must be ipw|mp|db, got {which!r}")
    eng = engine if engine is not None else ProfileEngine(data, **engine_opts)
    t_terms, h = _mu_influence(data, gamma_hat, which, eng, e0_engine, analytic)
    if gamma_influence is not None:
        u = t_terms + h * gamma_influence
        return float(np.var(u) / eng.n)
    return float(np.var(t_terms) / eng.n + h ** 2 * var_gamma)


# ---------------------------------------------------------------------------
# one-dataset estimation pipeline (CLI + simulation driver)


def estimate_reports(data: Dataset, gamma_estimators, mu_estimators=(), *,
                     alpha: float = 0.05, compute_ci: bool = True,
                     bracket=DEFAULT_BRACKET, v: Optional[MomentFunction] = None,
                     design=None, s: int = 500, rng=None,
                     bandwidth=None, full_bandwidth=None, kernel="gaussian",
                     clip=PI_CLIP, g_override=None, analytic_mu: bool = True,
                     gamma_init: float = 0.0, em_tol: float = 1e-6) -> list:
    """Solve every requested gamma estimator, then every mu estimator under it.

    Returns a flat list of EstimateReport; mu reports carry the gamma
    estimator id in their method metadata.  Numerical failures raise
    EstimationError (the simulation driver catches and counts them).
    """
    ctx = EstimationContext(data, bandwidth=bandwidth, full_bandwidth=full_bandwidth,
                            kernel=kernel, clip=clip, design=design, s=s, rng=rng,
                            g_override=g_override, bracket=bracket)
    reports = []
    for est in gamma_estimators:
        reports.extend(_estimate_one(ctx, est, mu_estimators, alpha=alpha,
                                     compute_ci=compute_ci, v=v,
                                     analytic_mu=analytic_mu,
                                     gamma_init=gamma_init, em_tol=em_tol))
    return reports


def _estimate_one(ctx: EstimationContext, est: str, mu_estimators, *, alpha,
                  compute_ci, v, analytic_mu, gamma_init, em_tol) -> list:
    data = ctx.data
    eng = ctx.engine
    weight = None
    working = None

    if est == "p-gmm":
        moments = v if v is not None else instrument_moments(data)
        res = solve_p_gmm(data, v=moments, bracket=ctx.bracket, engine=eng)
        weight = res.diagnostics.get("W")
        sandwich_m = moments
    elif est == "p-mle":
        res = solve_em_p_mle(data, gamma_init=gamma_init, tol=em_tol,
                             bracket=ctx.bracket, _ctx=ctx)
        sandwich_m = _moment_for(ctx, "p-ca1", None)
    else:
        if est.startswith("pw-"):
            working = ctx.working_engine(with_draws=est != "pw-ca2-a")
        presolve = ctx.presolve_root() if est in ("pw-score", "pw-ca1", "pw-ca2-s") else None
        f = _residual_fn(ctx, est, working)
        res = _solve_scalar(f, ctx.bracket, presolve_root=presolve, estimator=est)
        res.diagnostics["clip_activations"] = eng.clip_count(res.gamma_hat)
        sandwich_key = {"p-score": "p-ca1", "pw-score": "pw-ca1"}.get(est, est)
        sandwich_m = _moment_for(ctx, sandwich_key, working)

    gamma_hat = res.gamma_hat
    method = {"n": data.n, "gamma_estimator": est,
              "iterations": res.iterations, "solver_residual": res.residual,
              "bandwidth": eng.bandwidth}
    method.update({k: val for k, val in res.diagnostics.items() if _jsonable(val)})

    parts = None
    var_g = None
    ci_g = None
    if compute_ci:
        parts = _sandwich(data, gamma_hat, sandwich_m, eng, weight)
        var_g = parts.variance
        ci_g = wald_ci(gamma_hat, var_g, alpha)
    reports = [EstimateReport("gamma", est, gamma_hat, var_g, ci_g, alpha, method)]

    for mu_est in mu_estimators:
        mu_working = working
        if mu_est in ("mu-w-mp", "mu-w-db"):
            if mu_working is None:
                mu_working = ctx.working_engine(with_draws=not analytic_mu)
            mu_val = estimate_mu(data, mu_est, gamma_hat, engine=eng,
                                 working=mu_working, analytic=analytic_mu)
            e0_for_var = mu_working
        else:
            mu_val = estimate_mu(data, mu_est, gamma_hat, engine=eng)
            e0_for_var = "nonparam"
        var_m = None
        ci_m = None
        if compute_ci:
            which = "ipw" if mu_est == "mu-ipw" else ("mp" if "mp" in mu_est else "db")
            var_m = variance_mu(data, gamma_hat, var_g, which, e0_for_var,
                                engine=eng, gamma_influence=parts.influence,
                                analytic=analytic_mu)
            ci_m = wald_ci(mu_val.value, var_m, alpha)
        mu_method = {"n": data.n, "gamma_estimator": est, "engine": mu_val.engine}
        reports.append(EstimateReport("mu", mu_est, mu_val.value, var_m, ci_m,
                                      alpha, mu_method))
    return reports
