"""Estimators of the tilt coefficient gamma.

All estimators profile the nonparametric response component at every trial
gamma and solve a one-dimensional estimating equation:

* ``p-gmm``    calibration with instrument moments v(x2) (level indicators
               when x2 is discrete, identity coordinates otherwise), solved
               by root finding when one-dimensional and by two-step GMM
               otherwise.
* ``p-score``  profile score equation, with the nonrespondent conditional
               expectation estimated nonparametrically.
* ``p-ca1``    calibration with m(x; gamma) = E0~{pi_p(X1,Y) Y | x}.
* ``p-ca2``    calibration with m(x; gamma) = E~{d e^{gY} Y|x} / E~{d e^{gY}/pi_p|x}.
* ``pw-*``     the same equations with the conditional expectations computed
               from a Gaussian working outcome model: fractional imputation
               for ``pw-score`` / ``pw-ca1`` / ``pw-ca2-s``, closed-form
               moments for ``pw-ca2-a``.
* ``p-mle``    EM-type profile maximum likelihood.

The scalar estimating equations here can have spurious roots away from the
truth (the residual flattens and recrosses zero under extreme tilts), so the
solver scans a grid over the bracket, refines every sign change with Brent's
method, and keeps the root where the residual is increasing; among several
admissible roots the one closest to zero tilt wins.  At the population truth
the residual slope equals the sandwich A-matrix, which is positive for these
moment choices, so increasing crossings are the statistically meaningful ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .data import Dataset
from .errors import ConfigError, EstimationError, MaxIterations, NoSignChange
from .outcome import DEFAULT_FI_DRAWS, OutcomeWorkingModel, WorkingEngine, fit_working_model
from .profile import PI_CLIP, ProfileEngine

DEFAULT_BRACKET = (-3.0, 3.0)
SCAN_POINTS = 13
RESIDUAL_TOL = 1e-8
GAMMA_XTOL = 1e-10
PRESOLVE_HALFWIDTH = 0.35
RIDGE = 1e-8
COND_LIMIT = 1e12

ESTIMATOR_IDS = ("p-gmm", "p-score", "p-ca1", "p-ca2",
                 "pw-score", "pw-ca1", "pw-ca2-s", "pw-ca2-a", "p-mle")


@dataclass
class MomentFunction:
    """Control-variate vector m(x; gamma): evaluates to an (n, arity) array."""

    arity: int
    values: Callable[[float], np.ndarray]
    label: str = "m"

    def matrix(self, gamma: float) -> np.ndarray:
        out = np.asarray(self.values(gamma), dtype=float)
        if out.ndim == 1:
            out = out[:, None]
        if out.shape[1] != self.arity:
            raise ValueError(f"moment function {self.label} returned arity "
                             f"{out.shape[1]}, declared {self.arity}")
        return out


@dataclass
class GammaSolveResult:
    """Solved tilt coefficient with solver diagnostics."""

    gamma_hat: float
    residual: float
    iterations: int
    bracket: tuple
    estimator: str = ""
    diagnostics: dict = field(default_factory=dict)


class EstimationContext:
    """Shared engines for one dataset so several estimators reuse the profile.

    The working outcome model (when a design is declared) is fitted once;
    fractional draws are generated per estimator call from the supplied rng.
    """

    def __init__(self, data: Dataset, *, bandwidth=None, full_bandwidth=None,
                 kernel: str = "gaussian", clip: float = PI_CLIP,
                 design=None, s: int = DEFAULT_FI_DRAWS, rng=None,
                 g_override=None, bracket=DEFAULT_BRACKET):
        self.data = data
        self.engine = ProfileEngine(data, bandwidth=bandwidth,
                                    full_bandwidth=full_bandwidth, kernel=kernel,
                                    clip=clip, g_override=g_override)
        self.clip = clip
        self.s = s
        self.rng = rng
        self.bracket = tuple(bracket)
        self.model: Optional[OutcomeWorkingModel] = None
        if design is not None:
            self.model = design if isinstance(design, OutcomeWorkingModel) \
                else fit_working_model(data, design)
        self._analytic_engine = None
        self._presolve = ("unset",)

    def working_engine(self, *, with_draws: bool) -> WorkingEngine:
        if self.model is None:
            raise ConfigError("a working-model design is required for pw-* estimators")
        if not with_draws:
            if self._analytic_engine is None:
                self._analytic_engine = WorkingEngine(self.data, self.model,
                                                      s=self.s, analytic_only=True)
            return self._analytic_engine
        if self.rng is None:
            raise ConfigError("an rng is required for fractional-imputation draws")
        return WorkingEngine(self.data, self.model, s=self.s, rng=self.rng)

    def presolve_root(self) -> Optional[float]:
        """Cheap analytic pw-ca2-a root used to pre-bracket FI estimators."""
        if self._presolve == ("unset",):
            root = None
            if self.model is not None:
                try:
                    f = _residual_fn(self, "pw-ca2-a",
                                     self.working_engine(with_draws=False))
                    root = _solve_scalar(f, self.bracket).gamma_hat
                except EstimationError:
                    root = None
            self._presolve = (root,)
        return self._presolve[0]


# ---------------------------------------------------------------------------
# residual functions


def _score_values(eng: ProfileEngine, gamma: float, e0_term: np.ndarray) -> float:
    pi = eng.pi_resp(gamma)
    total = float(np.sum((1.0 - pi) * eng.y_r))
    if np.any(eng.nonresp):
        total -= float(np.sum(e0_term[eng.nonresp]))
    return total / eng.n


def _residual_fn(ctx: EstimationContext, estimator: str,
                 working: Optional[WorkingEngine]) -> Callable[[float], float]:
    eng = ctx.engine

    if estimator == "p-score":
        def f(gamma):
            pi = eng.pi_resp(gamma)
            e0 = np.zeros(eng.n)
            if np.any(eng.nonresp):
                e0 = eng.e0_full(gamma, pi * eng.y_r)
            return _score_values(eng, gamma, e0)
        return f

    if estimator == "pw-score":
        def f(gamma):
            g = eng.g_obs(gamma)
            e0 = working.fi_score_term(gamma, g)
            return _score_values(eng, gamma, e0)
        return f

    if estimator in ("p-ca1", "p-ca2", "pw-ca1", "pw-ca2-s", "pw-ca2-a"):
        m = _moment_for(ctx, estimator, working)

        def f(gamma):
            w = eng.calib_weights(gamma)
            return float(np.mean(w * m.matrix(gamma)[:, 0]))
        return f

    raise ConfigError(f"no scalar residual for estimator {estimator!r}")


def _moment_for(ctx: EstimationContext, estimator: str,
                working: Optional[WorkingEngine]) -> MomentFunction:
    """The m(x; gamma) each estimator calibrates against (arity 1)."""
    eng = ctx.engine

    if estimator in ("p-ca1", "p-score", "p-mle"):
        def vals(gamma):
            pi = eng.pi_resp(gamma)
            return eng.e0_full(gamma, pi * eng.y_r)
        return MomentFunction(1, vals, "ca1")

    if estimator == "p-ca2":
        def vals(gamma):
            pi = eng.pi_resp(gamma)
            num = eng.e0_full(gamma, eng.y_r)
            den = eng.e0_full(gamma, 1.0 / pi)
            return num / den
        return MomentFunction(1, vals, "ca2")

    if estimator in ("pw-ca1", "pw-score"):
        return MomentFunction(1, lambda gamma: working.fi_score_term(gamma, eng.g_obs(gamma)),
                              "ca1-fi")

    if estimator == "pw-ca2-s":
        return MomentFunction(1, lambda gamma: working.fi_m_ca2(gamma, eng.g_obs(gamma), ctx.clip),
                              "ca2-fi")

    if estimator == "pw-ca2-a":
        return MomentFunction(1, lambda gamma: working.analytic_m_ca2(gamma, eng.g_obs(gamma)),
                              "ca2-analytic")

    raise ConfigError(f"no moment function for estimator {estimator!r}")


def instrument_moments(data: Dataset) -> MomentFunction:
    """Default v(x2) for p-gmm: joint level indicators when every x2 coordinate
    is discrete, identity coordinates otherwise."""
    if all(k.is_discrete for k in data.x2_kinds):
        levels, codes = np.unique(data.x2_mat, axis=0, return_inverse=True)
        k = levels.shape[0]
        cols = np.zeros((data.n, k))
        cols[np.arange(data.n), codes] = 1.0
        return MomentFunction(k, lambda gamma: cols, "x2-indicators")
    cols = np.array(data.x2_mat, dtype=float)
    return MomentFunction(cols.shape[1], lambda gamma: cols, "x2-identity")


def moment_from_values(values, label="custom") -> MomentFunction:
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    return MomentFunction(vals.shape[1], lambda gamma: vals, label)


# ---------------------------------------------------------------------------
# public operations


def calibration_residual(data: Dataset, gamma: float, m: MomentFunction,
                         *, engine: Optional[ProfileEngine] = None,
                         **engine_opts) -> np.ndarray:
    """(1/n) sum_i (delta_i / pi_p(x1_i, y_i; gamma) - 1) m(x_i; gamma)."""
    eng = engine if engine is not None else ProfileEngine(data, **engine_opts)
    w = eng.calib_weights(gamma)
    return w @ m.matrix(gamma) / eng.n


def score_residual(data: Dataset, gamma: float, e0_engine="nonparam",
                   *, engine: Optional[ProfileEngine] = None,
                   **engine_opts) -> float:
    """Profile mean-score residual at gamma."""
    eng = engine if engine is not None else ProfileEngine(data, **engine_opts)
    pi = eng.pi_resp(gamma)
    if isinstance(e0_engine, WorkingEngine):
        e0 = e0_engine.fi_score_term(gamma, eng.g_obs(gamma))
    elif e0_engine == "nonparam":
        e0 = eng.e0_full(gamma, pi * eng.y_r) if np.any(eng.nonresp) else np.zeros(eng.n)
    else:
        raise ConfigError(f"unknown e0 engine {e0_engine!r}")
    return _score_values(eng, gamma, e0)


def m_ca1(data: Dataset, e0_engine="nonparam", *, engine=None, **engine_opts) -> MomentFunction:
    """Likelihood-derived control m(x; gamma) = E0~{pi_p(X1,Y;gamma) Y | x}."""
    eng = engine if engine is not None else ProfileEngine(data, **engine_opts)
    if isinstance(e0_engine, WorkingEngine):
        return MomentFunction(1, lambda g: e0_engine.fi_score_term(g, eng.g_obs(g)), "ca1-fi")

    def vals(gamma):
        pi = eng.pi_resp(gamma)
        return eng.e0_full(gamma, pi * eng.y_r)
    return MomentFunction(1, vals, "ca1")


def m_ca2(data: Dataset, e0_engine="nonparam", *, engine=None, analytic=False,
          **engine_opts) -> MomentFunction:
    """Variance-optimal control m(x; gamma) (odds-weighted tilted mean of Y)."""
    eng = engine if engine is not None else ProfileEngine(data, **engine_opts)
    if isinstance(e0_engine, WorkingEngine):
        if analytic:
            return MomentFunction(1, lambda g: e0_engine.analytic_m_ca2(g, eng.g_obs(g)),
                                  "ca2-analytic")
        clip = eng.clip
        return MomentFunction(1, lambda g: e0_engine.fi_m_ca2(g, eng.g_obs(g), clip), "ca2-fi")

    def vals(gamma):
        pi = eng.pi_resp(gamma)
        return eng.e0_full(gamma, eng.y_r) / eng.e0_full(gamma, 1.0 / pi)
    return MomentFunction(1, vals, "ca2")


# ---------------------------------------------------------------------------
# scalar solver with admissible-root selection


class _Counted:
    def __init__(self, f):
        self.f = f
        self.count = 0

    def __call__(self, x):
        self.count += 1
        return self.f(x)


def _scan_roots(f, lo, hi, points):
    gs = np.linspace(lo, hi, points)
    fs = np.array([f(g) for g in gs])
    roots = []
    for i in range(points - 1):
        a, b = fs[i], fs[i + 1]
        if a == 0.0:
            roots.append((gs[i], fs[i + 1] > fs[i]))
        elif np.sign(a) != np.sign(b):
            r = brentq(f, gs[i], gs[i + 1], xtol=GAMMA_XTOL)
            roots.append((r, b > a))
    if fs[-1] == 0.0:
        roots.append((gs[-1], fs[-1] > fs[-2]))
    return roots, fs


def _orientation(fs) -> bool:
    """True when the residual ascends through the bracket center.

    The central slope (around zero tilt for the default bracket) carries the
    estimating equation's identification direction; spurious recrossings under
    extreme tilts run against it.  Flat-at-center noise defaults to ascending.
    """
    mid = (len(fs) - 1) // 2
    return bool(fs[min(mid + 1, len(fs) - 1)] >= fs[max(mid - 1, 0)])


def _solve_scalar(f, bracket, *, presolve_root=None, estimator="",
                  scan_points=SCAN_POINTS) -> GammaSolveResult:
    lo, hi = bracket
    counted = _Counted(f)
    diagnostics = {}

    if presolve_root is not None:
        a = max(lo, presolve_root - PRESOLVE_HALFWIDTH)
        b = min(hi, presolve_root + PRESOLVE_HALFWIDTH)
        if a < b:
            fa, fb = counted(a), counted(b)
            if fa < 0.0 < fb:
                root = brentq(counted, a, b, xtol=GAMMA_XTOL)
                return GammaSolveResult(root, abs(counted(root)), counted.count,
                                        (lo, hi), estimator,
                                        {"method": "presolve-bracket"})
        diagnostics["presolve_fallback"] = True

    expanded = False
    while True:
        roots, fs = _scan_roots(counted, lo, hi, scan_points)
        if roots:
            break
        if expanded:
            raise NoSignChange((lo, hi), (float(fs[0]), float(fs[-1])))
        lo, hi = 2.0 * lo, 2.0 * hi
        expanded = True
        diagnostics["bracket_expanded"] = True

    want_up = _orientation(fs)
    admissible = [r for r, up in roots if up == want_up]
    if admissible:
        root = min(admissible, key=abs)
    else:
        root = min((r for r, _ in roots), key=abs)
        diagnostics["no_ascending_root"] = True
    if len(roots) > 1:
        diagnostics["n_roots"] = len(roots)
    return GammaSolveResult(float(root), abs(counted(root)), counted.count,
                            (lo, hi), estimator, diagnostics)


def _gmm_objective(f_vec, w_mat):
    def obj(gamma):
        q = f_vec(gamma)
        return float(q @ w_mat @ q)
    return obj


def sandwich_slope(engine: ProfileEngine, gamma: float,
                   m_matrix: np.ndarray) -> np.ndarray:
    """Estimated derivative of the calibration moment vector at gamma.

    A_k = (1/n) sum_i delta_i ((1-pi_i)/pi_i)(y_i - E0~(Y|x1_i))(m_ik - E0~(m_k|x1_i));
    exact for the profiled cell construction because the profile derivative is
    the tilted respondent mean.
    """
    eng = engine
    pi = eng.pi_resp(gamma)
    e0y = eng.e0_x1(gamma, eng.y_r)
    resid_y = (eng.y_r - e0y[eng.resp]) * (1.0 - pi) / pi
    out = np.empty(m_matrix.shape[1])
    for j in range(m_matrix.shape[1]):
        e0m = eng.e0_x1(gamma, m_matrix[eng.resp, j])
        out[j] = resid_y @ (m_matrix[eng.resp, j] - e0m[eng.resp]) / eng.n
    return out


def _gmm_minimize(q_vec, obj, w_mat, lo, hi, engine, v, points=SCAN_POINTS):
    """Minimize the GMM objective with admissible-candidate selection.

    Exact moment roots come in pairs here too (the underlying scalar residuals
    recross zero under extreme tilts), and every root zeroes the objective.
    Near-tied local minima are disambiguated on the scalar projection
    u = A'WQ: its central slope fixes the identification direction and only
    candidates crossed in that direction are kept; ties resolve toward zero
    tilt.
    """
    gs = np.linspace(lo, hi, points)
    q_grid = np.array([q_vec(g) for g in gs])
    vals = np.einsum("ij,jk,ik->i", q_grid, w_mat, q_grid)
    evals = points
    cands = []
    for i in range(points):
        left = vals[i - 1] if i > 0 else np.inf
        right = vals[i + 1] if i < points - 1 else np.inf
        if vals[i] <= left and vals[i] <= right:
            a = gs[max(0, i - 1)]
            b = gs[min(points - 1, i + 1)]
            res = minimize_scalar(obj, bounds=(a, b), method="bounded",
                                  options={"xatol": GAMMA_XTOL})
            evals += int(res.nfev)
            cands.append((float(res.x), float(res.fun)))
    best = min(f for _, f in cands)
    near = [g for g, f in cands if f <= best + 1e-12 + 1e-6 * abs(best)]
    if len(near) == 1:
        return near[0], evals, {}
    g_best = min((g for g, f in cands if f <= best + 1e-12 + 1e-6 * abs(best)),
                 key=abs)
    a_vec = sandwich_slope(engine, g_best, v.matrix(g_best))
    direction = w_mat @ a_vec
    want_up = _orientation(q_grid @ direction)
    h = 1e-3
    admissible = []
    for g in near:
        u_hi = q_vec(min(g + h, hi)) @ direction
        u_lo = q_vec(max(g - h, lo)) @ direction
        evals += 2
        if (u_hi > u_lo) == want_up:
            admissible.append(g)
    diag = {"n_candidates": len(near)}
    pool = admissible if admissible else near
    if not admissible:
        diag["no_ascending_root"] = True
    return min(pool, key=abs), evals, diag


def solve_p_gmm(data: Dataset, v: Optional[MomentFunction] = None,
                bracket=DEFAULT_BRACKET, *, engine=None, clip=PI_CLIP,
                **engine_opts) -> GammaSolveResult:
    """Instrument-calibration estimator (the baseline).

    Scalar moments are solved by bracketed root finding; vector moments by
    two-step GMM with the moment covariance estimated at the first-step
    solution (ridge-stabilized, identity fallback when ill-conditioned).
    """
    eng = engine if engine is not None else ProfileEngine(data, clip=clip, **engine_opts)
    if v is None:
        v = instrument_moments(data)
    if v.arity == 1:
        f = lambda g: float(np.mean(eng.calib_weights(g) * v.matrix(g)[:, 0]))
        out = _solve_scalar(f, bracket, estimator="p-gmm")
        out.diagnostics["moments"] = v.label
        return out

    def q_vec(gamma):
        return eng.calib_weights(gamma) @ v.matrix(gamma) / eng.n

    lo, hi = bracket
    w1 = np.eye(v.arity)
    g1, evals1, diag1 = _gmm_minimize(q_vec, _gmm_objective(q_vec, w1), w1,
                                      lo, hi, eng, v)
    psi = eng.calib_weights(g1)[:, None] * v.matrix(g1)
    s_mat = psi.T @ psi / eng.n
    s_mat = s_mat + RIDGE * np.trace(s_mat) * np.eye(v.arity)
    diagnostics = {"moments": v.label, "weighting": "two-step"}
    if np.linalg.cond(s_mat) > COND_LIMIT:
        w2 = w1
        diagnostics["weighting"] = "identity-fallback"
    else:
        w2 = np.linalg.inv(s_mat)
    g2, evals2, diag2 = _gmm_minimize(q_vec, _gmm_objective(q_vec, w2), w2,
                                      lo, hi, eng, v)
    q_final = q_vec(g2)
    diagnostics["first_step"] = g1
    diagnostics["W"] = w2
    diagnostics.update(diag2)
    return GammaSolveResult(g2, float(np.linalg.norm(q_final)),
                            evals1 + evals2, tuple(bracket), "p-gmm", diagnostics)


def _solve_generic(ctx: EstimationContext, estimator: str) -> GammaSolveResult:
    working = None
    presolve = None
    if estimator.startswith("pw-"):
        working = ctx.working_engine(with_draws=estimator != "pw-ca2-a")
        if estimator != "pw-ca2-a":
            presolve = ctx.presolve_root()
    f = _residual_fn(ctx, estimator, working)
    out = _solve_scalar(f, ctx.bracket, presolve_root=presolve, estimator=estimator)
    out.diagnostics["clip_activations"] = ctx.engine.clip_count(out.gamma_hat)
    return out


def _solve_with_engine(ctx, estimator, e0_engine) -> GammaSolveResult:
    if isinstance(e0_engine, WorkingEngine):
        f = _residual_fn(ctx, estimator, e0_engine)
        out = _solve_scalar(f, ctx.bracket, estimator=estimator)
        out.diagnostics["clip_activations"] = ctx.engine.clip_count(out.gamma_hat)
        return out
    return _solve_generic(ctx, estimator)


def solve_p_score(data: Dataset, e0_engine="nonparam", bracket=DEFAULT_BRACKET,
                  **ctx_opts) -> GammaSolveResult:
    ctx = EstimationContext(data, bracket=bracket, **ctx_opts)
    est = "pw-score" if e0_engine == "working" or isinstance(e0_engine, WorkingEngine) \
        else "p-score"
    return _solve_with_engine(ctx, est, e0_engine)


def solve_p_ca1(data: Dataset, e0_engine="nonparam", bracket=DEFAULT_BRACKET,
                **ctx_opts) -> GammaSolveResult:
    ctx = EstimationContext(data, bracket=bracket, **ctx_opts)
    est = "pw-ca1" if e0_engine == "working" or isinstance(e0_engine, WorkingEngine) \
        else "p-ca1"
    return _solve_with_engine(ctx, est, e0_engine)


def solve_p_ca2(data: Dataset, e0_engine="nonparam", bracket=DEFAULT_BRACKET,
                *, analytic=False, **ctx_opts) -> GammaSolveResult:
    ctx = EstimationContext(data, bracket=bracket, **ctx_opts)
    if e0_engine == "working" or isinstance(e0_engine, WorkingEngine):
        est = "pw-ca2-a" if analytic else "pw-ca2-s"
    else:
        est = "p-ca2"
    return _solve_with_engine(ctx, est, e0_engine)


def solve_em_p_mle(data: Dataset, gamma_init: float = 0.0, tol: float = 1e-6,
                   max_iter: int = 100, bracket=DEFAULT_BRACKET, *,
                   _ctx: Optional[EstimationContext] = None,
                   **ctx_opts) -> GammaSolveResult:
    """EM-type profile MLE.

    E-step: expected complete-data log likelihood with nonrespondent terms
    imputed by the tilted conditional expectation at the current iterate;
    M-step: bounded scalar maximization over the bracket.
    """
    ctx = _ctx if _ctx is not None else EstimationContext(data, bracket=bracket, **ctx_opts)
    eng = ctx.engine
    lo, hi = ctx.bracket
    gamma_t = float(gamma_init)
    if not (lo <= gamma_t <= hi):
        raise ConfigError(f"gamma_init {gamma_t} outside bracket {ctx.bracket}")
    evals = 0

    def objective(gamma, gamma_tilt):
        # complete-data profile log likelihood, nonrespondent part imputed
        g = eng.g_obs(gamma)
        eta_r = g[eng.resp] - gamma * eng.y_r
        loglik = float(np.sum(-np.logaddexp(0.0, -eta_r)))          # log pi on respondents
        if np.any(eng.nonresp):
            log_1mpi = -np.logaddexp(0.0, eta_r)                     # log(1 - pi) on respondents
            h = eng.e0_full(gamma_tilt, log_1mpi)
            loglik += float(np.sum(h[eng.nonresp]))
        return loglik

    history = [gamma_t]
    for _ in range(max_iter):
        res = minimize_scalar(lambda g: -objective(g, gamma_t),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        evals += int(res.nfev)
        gamma_next = float(res.x)
        history.append(gamma_next)
        done = abs(gamma_next - gamma_t) < tol
        gamma_t = gamma_next
        if done:
            resid = abs(score_residual(data, gamma_t, engine=eng))
            return GammaSolveResult(gamma_t, resid, evals, ctx.bracket, "p-mle",
                                    {"em_iterations": len(history) - 1,
                                     "history": history})
    raise MaxIterations(f"EM did not converge in {max_iter} iterations "
                        f"(last iterates {history[-3:]})")


def solve_gamma(data: Dataset, estimator: str, *, bracket=DEFAULT_BRACKET,
                v: Optional[MomentFunction] = None, gamma_init: float = 0.0,
                em_tol: float = 1e-6, **ctx_opts) -> GammaSolveResult:
    """Solve for gamma by estimator id (see ESTIMATOR_IDS)."""
    if estimator not in ESTIMATOR_IDS:
        raise ConfigError(f"unknown estimator {estimator!r}; valid ids: "
                          f"{', '.join(ESTIMATOR_IDS)}")
    if estimator == "p-gmm":
        ctx = EstimationContext(data, bracket=bracket, **ctx_opts)
        return solve_p_gmm(data, v=v, bracket=bracket, engine=ctx.engine)
    if estimator == "p-mle":
        return solve_em_p_mle(data, gamma_init=gamma_init, tol=em_tol,
                              bracket=bracket, **ctx_opts)
    ctx = EstimationContext(data, bracket=bracket, **ctx_opts)
    return _solve_generic(ctx, estimator)
