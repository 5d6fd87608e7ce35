"""Parametric working model for the respondent outcome distribution.

A Gaussian linear regression f(y | x, delta=1) fitted on respondents supplies
conditional expectations for the working-model estimator variants, either by
fractional-imputation sampling (tilt-reweighted draws) or in closed form via
the normal moment-generating function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigError, SingularDesign

DEFAULT_FI_DRAWS = 500


# ---------------------------------------------------------------------------
# design specification: products of named coordinates with integer powers


@dataclass(frozen=True)
class DesignSpec:
    """Feature map declared as term strings over x1/x2 coordinates.

    Terms look like "1", "x1", "x2^2", or products such as "x1*x2^2".
    """

    terms: tuple

    @classmethod
    def parse(cls, term_strings) -> "DesignSpec":
        terms = []
        for raw in term_strings:
            raw = raw.strip()
            if raw == "1":
                terms.append(((),))
                continue
            factors = []
            for piece in raw.split("*"):
                name, _, power = piece.strip().partition("^")
                if not name:
                    raise ConfigError(f"bad design term {raw!r}")
                try:
                    p = int(power) if power else 1
                except ValueError as exc:
                    raise ConfigError(f"bad power in design term {raw!r}") from exc
                factors.append((name, p))
            terms.append(tuple(factors))
        return cls(tuple(terms))

    @property
    def names(self):
        out = []
        for t in self.terms:
            if t == ((),) or t == ():
                out.append("1")
            else:
                out.append("*".join(f"{n}^{p}" if p != 1 else n for n, p in t))
        return out

    def matrix(self, data: Dataset, rows=None) -> np.ndarray:
        idx = slice(None) if rows is None else rows
        n = data.n if rows is None else int(np.sum(rows)) if rows.dtype == bool else len(rows)
        cols = []
        for t in self.terms:
            if t == ((),) or t == ():
                cols.append(np.ones(n))
                continue
            col = np.ones(n)
            for name, p in t:
                col = col * data.column(name)[idx] ** p
            cols.append(col)
        return np.column_stack(cols)


@dataclass(frozen=True)
class OutcomeWorkingModel:
    """Fitted Gaussian linear model: y | x, delta=1 ~ N(design(x)'beta, sigma2)."""

    design: DesignSpec
    beta: np.ndarray
    sigma2: float

    def mean(self, data: Dataset, rows=None) -> np.ndarray:
        return self.design.matrix(data, rows) @ self.beta


@dataclass(frozen=True)
class FractionalSample:
    """s Monte Carlo outcome draws for one target covariate point."""

    draws: np.ndarray
    s: int

    def __post_init__(self):
        if self.s < 1 or len(self.draws) != self.s:
            raise ValueError("draw count mismatch")
        if not np.all(np.isfinite(self.draws)):
            raise ValueError("draws must be finite")


def fit_working_model(data: Dataset, design) -> OutcomeWorkingModel:
    """Least-squares fit on respondents; sigma2 uses the MLE denominator."""
    if not isinstance(design, DesignSpec):
        design = DesignSpec.parse(design)
    X = design.matrix(data, data.resp_mask)
    y = data.y_resp
    p = X.shape[1]
    if len(y) < p + 1:
        raise ValueError(f"need at least {p + 1} respondents to fit {p} coefficients")
    u, sv, vt = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(sv > sv[0] * 1e-10)) if len(sv) else 0
    if rank < p:
        # name the terms loading on the null space
        null = np.abs(vt[rank:]).sum(axis=0)
        bad = [design.names[j] for j in np.flatnonzero(null > 1e-8)]
        raise SingularDesign(bad)
    beta = vt.T @ ((u.T @ y) / sv)
    resid = y - X @ beta
    sigma2 = float(resid @ resid / len(y))
    return OutcomeWorkingModel(design, beta, sigma2)


def draw_fractional(model: OutcomeWorkingModel, data: Dataset, row: int,
                    s: int, rng) -> FractionalSample:
    """s i.i.d. draws from the fitted conditional density at one observation."""
    mu = float(model.mean(data, np.array([row]))[0])
    draws = rng.normal(mu, np.sqrt(model.sigma2), size=s)
    return FractionalSample(draws, s)


def fi_tilted_expectation(sample: FractionalSample, gamma: float, e_fn) -> float:
    """Self-normalized tilted mean over a fractional sample.

    Returns sum_j e^{gamma y_j} e_fn(y_j) / sum_j e^{gamma y_j}, with the
    exponentials shifted by their maximum so weights never overflow.
    """
    y = sample.draws
    t = np.exp(gamma * y - np.max(gamma * y))
    w = t / t.sum()
    return float(w @ np.asarray([e_fn(v) for v in y], dtype=float))


def analytic_tilted_moments(model: OutcomeWorkingModel, data: Dataset, row: int,
                            gamma: float):
    """Normal-MGF moments at one observation.

    With mu = design(x)'beta and s2 the residual variance:
      m0    = E[e^{gamma Y} | x, delta=1]   = exp(gamma mu + gamma^2 s2 / 2)
      m1    = E[e^{gamma Y} Y | x, delta=1] = m0 (mu + gamma s2)
    plus the same pair with gamma replaced by 2 gamma.
    """
    mu = float(model.mean(data, np.array([row]))[0])
    s2 = model.sigma2
    m0 = np.exp(gamma * mu + gamma ** 2 * s2 / 2)
    m1 = m0 * (mu + gamma * s2)
    m0_2g = np.exp(2 * gamma * mu + 2 * gamma ** 2 * s2)
    m1_2g = m0_2g * (mu + 2 * gamma * s2)
    return m0, m1, m0_2g, m1_2g


# ---------------------------------------------------------------------------
# vectorized per-dataset engine used by the pw-* estimators


class WorkingEngine:
    """Fractional-imputation and analytic conditional expectations, vectorized.

    Draws are generated once per instance (common random numbers), so every
    residual built on them is a smooth, deterministic function of gamma.
    """

    def __init__(self, data: Dataset, model: OutcomeWorkingModel, *,
                 s: int = DEFAULT_FI_DRAWS, rng=None, analytic_only: bool = False):
        self.data = data
        self.model = model
        self.s = s
        self.mu = model.mean(data)
        self.sigma2 = model.sigma2
        self._cache = {}
        if analytic_only:
            self.draws = None
        else:
            if rng is None:
                raise ValueError("rng required to generate fractional draws")
            self.draws = self.mu[:, None] + np.sqrt(self.sigma2) \
                * rng.standard_normal((data.n, s))
            self._rowshift = None

    # FI paths ---------------------------------------------------------------

    def _tilt(self, gamma: float):
        st = self._cache.get(gamma)
        if st is None:
            if self.draws is None:
                raise ValueError("engine was built analytic-only; no draws available")
            if self._rowshift is None:
                self._rowmax = self.draws.max(axis=1)
                self._rowmin = self.draws.min(axis=1)
                self._rowshift = True
            shift = np.where(gamma >= 0, gamma * self._rowmax, gamma * self._rowmin)
            t = np.exp(gamma * self.draws - shift[:, None])
            st = {"t": t, "shift": shift, "den": t.sum(axis=1),
                  "sum_ty": (t * self.draws).sum(axis=1)}
            if len(self._cache) > 3:
                self._cache.pop(next(iter(self._cache)))
            self._cache[gamma] = st
        return st

    def fi_score_term(self, gamma: float, g_obs: np.ndarray) -> np.ndarray:
        """FI version of E0{pi_p(X1,Y) Y | x} at every observation (also m_ca1).

        Reuses the shifted tilt matrix for the response probability:
        pi_ij = 1 / (1 + c_i t_ij) with c_i = exp(shift_i - g_i), so only one
        large exponential is ever taken per gamma.
        """
        st = self._tilt(gamma)
        c = np.exp(st["shift"] - g_obs)
        denom = 1.0 + c[:, None] * st["t"]
        num = (st["t"] * self.draws / denom).sum(axis=1)
        return num / st["den"]

    def fi_e0_y(self, gamma: float) -> np.ndarray:
        """FI version of E0{Y | x} (tilted mean of the draws)."""
        st = self._tilt(gamma)
        return st["sum_ty"] / st["den"]

    def fi_m_ca2(self, gamma: float, g_obs: np.ndarray, clip: float) -> np.ndarray:
        st = self._tilt(gamma)
        c = np.exp(st["shift"] - g_obs)
        inv_pi = np.minimum(1.0 + c[:, None] * st["t"], 1.0 / clip)
        den = (st["t"] * inv_pi).sum(axis=1)
        return st["sum_ty"] / den

    # analytic paths ----------------------------------------------------------

    def analytic_e0_y(self, gamma: float) -> np.ndarray:
        """Tilted-normal mean: E0[Y | x] = mu(x) + gamma sigma2, exactly."""
        return self.mu + gamma * self.sigma2

    def analytic_m_ca2(self, gamma: float, g_obs: np.ndarray) -> np.ndarray:
        """Closed-form m_ca2 via normal MGF moments.

        e^{gamma y} / pi_p = e^{gamma y} + e^{-g} e^{2 gamma y}, so the
        denominator is m0 + e^{-g} m0(2 gamma); computed in log space to keep
        solver excursions finite.
        """
        mu, s2 = self.mu, self.sigma2
        log_m0 = gamma * mu + gamma ** 2 * s2 / 2
        log_m0_2g = 2 * gamma * mu + 2 * gamma ** 2 * s2
        log_den = np.logaddexp(log_m0, log_m0_2g - g_obs)
        return (mu + gamma * s2) * np.exp(log_m0 - log_den)
