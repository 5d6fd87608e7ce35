"""Profiled response model: exp{g_hat_gamma(x1)}, pi_p, and tilted expectations.

For a trial tilt coefficient gamma the unspecified log-odds component g(x1)
has the closed-form profile estimate

    exp{g_hat_gamma(x1)} = E~{delta exp(gamma Y) | x1} / E~{1 - delta | x1},

with E~ either an exact cell average (discrete x1) or a Nadaraya-Watson
kernel average (continuous x1), fitted over all n points.  The profile
response probability is pi_p(x1, y) = expit(g_hat_gamma(x1) - gamma y).

The same machinery yields the tilted conditional expectation

    E0~{e(X,Y) | x} = E~{delta e^{gamma Y} e(X,Y) | x} / E~{delta e^{gamma Y} | x},

an estimate of E{e(X,Y) | x, delta=0} used throughout the estimators.
All exponential sums run through shifted (log-sum-exp style) paths so solver
excursions to large |gamma| cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .data import Dataset
from .errors import DegenerateWindow, EmptyCell
from .smoothing import DEN_FLOOR, KERNELS, Bandwidth, silverman_bandwidth

PI_CLIP = 1e-8   # probability floor; inverse-probability ratios stay bounded


# ---------------------------------------------------------------------------
# grouping backends


class _CellGroups:
    """Exact stratification on the joint levels of a covariate matrix."""

    def __init__(self, mat: np.ndarray):
        levels, codes = np.unique(mat, axis=0, return_inverse=True)
        self.levels = levels              # (K, d) level rows
        self.codes = codes.astype(np.intp)
        self.k = levels.shape[0]
        self._lookup = {tuple(row): i for i, row in enumerate(levels)}

    def code_of(self, x) -> int:
        key = tuple(np.atleast_1d(np.asarray(x, dtype=float)))
        got = self._lookup.get(key)
        if got is None:
            raise EmptyCell(key, "level not present in fitted data")
        return got

    def label(self, code: int):
        row = self.levels[code]
        return float(row[0]) if row.shape[0] == 1 else tuple(row)


class _KernelWeights:
    """Sample-point weight matrix: product kernel over continuous coordinates,
    exact match on discrete ones."""

    def __init__(self, mat, kinds, h, kernel="gaussian"):
        self.mat = np.asarray(mat, dtype=float)
        self.kinds = kinds
        self.h = h.h if isinstance(h, Bandwidth) else float(h)
        self.kernel = kernel
        cont = [j for j, k in enumerate(kinds) if not k.is_discrete]
        disc = [j for j, k in enumerate(kinds) if k.is_discrete]
        self.cont, self.disc = cont, disc
        scales = self.mat[:, cont].std(axis=0, ddof=0) if cont else np.empty(0)
        if scales.size:
            scales[scales == 0] = 1.0
        self.scales = scales
        self.w = self._weights_at(self.mat)

    def _weights_at(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n_eval = pts.shape[0]
        w = np.ones((n_eval, self.mat.shape[0]))
        if self.cont:
            kfun = KERNELS[self.kernel]
            u = (pts[:, None, self.cont] - self.mat[None, :, self.cont]) \
                / (self.h * self.scales[None, None, :])
            w = np.prod(kfun(u), axis=2)
        for j in self.disc:
            w *= pts[:, None, j] == self.mat[None, :, j]
        return w


# ---------------------------------------------------------------------------
# engine


class ProfileEngine:
    """Per-dataset numerical core shared by every estimator.

    Precomputes respondent indexing and grouping structures once, then serves
    profile values, response probabilities, calibration weights, and tilted
    conditional expectations as vectorized functions of gamma.  Results for
    the most recent gamma values are cached, which makes grid scans and
    bracketed root refinement cheap.

    ``g_override`` injects a known g(x1) (callable on the x1 matrix), skipping
    profiling entirely; estimators then operate with fixed propensities.
    """

    def __init__(self, data: Dataset, *, bandwidth=None, full_bandwidth=None,
                 kernel: str = "gaussian", clip: float = PI_CLIP,
                 g_override: Optional[Callable] = None):
        self.data = data
        self.clip = clip
        self.kernel = kernel
        self.g_override = g_override
        self.resp = data.resp_mask
        self.nonresp = ~data.resp_mask
        self.y_r = data.y_resp
        self.n = data.n
        self._cache = {}
        self._full_ready = False
        self._x1_ready = False
        self._x1_bandwidth = bandwidth
        self.bandwidth = None

        self.x1_discrete = all(k.is_discrete for k in data.x1_kinds)
        if g_override is not None:
            self._g_fixed = np.asarray(g_override(data.x1_mat), dtype=float).reshape(-1)
            self._x1_ready = True

        self.full_bandwidth = full_bandwidth
        self.full_discrete = all(k.is_discrete for k in data.x_kinds)

    def _ensure_x1(self):
        """Profiling structures over x1, built on first use.

        Both profiling and conditioning on x1 need these; purely full-x users
        (tilted expectations on complete data) never trigger the respondent /
        nonrespondent cell requirements."""
        if self._x1_ready:
            return
        data = self.data
        if not self.x1_discrete:
            h = self._x1_bandwidth if self._x1_bandwidth is not None \
                else silverman_bandwidth(data.x1_mat)
            self.x1_weights = _KernelWeights(data.x1_mat, data.x1_kinds, h, self.kernel)
            self.bandwidth = self.x1_weights.h
            den = self.x1_weights.w @ self.nonresp.astype(float)
            if np.any(den < DEN_FLOOR):
                raise DegenerateWindow(data.x1_mat[int(np.argmin(den))])
            self._x1_log_den = np.log(den)
            self._x1_w_resp = self.x1_weights.w[:, self.resp]
        else:
            self.x1_groups = _CellGroups(data.x1_mat)
            c = self.x1_groups
            self.x1_codes = c.codes
            self.x1_codes_r = c.codes[self.resp]
            n0 = np.bincount(c.codes[self.nonresp], minlength=c.k).astype(float)
            n1 = np.bincount(self.x1_codes_r, minlength=c.k)
            for code in range(c.k):
                if n1[code] == 0:
                    raise EmptyCell(c.label(code), "x1 cell has no respondents")
                if n0[code] == 0:
                    raise EmptyCell(c.label(code), "x1 cell has no nonrespondents")
            self._log_n0 = np.log(n0)
            # per-cell extreme outcomes give exact log-sum-exp shifts for any gamma
            self._ymax_c = np.full(c.k, -np.inf)
            self._ymin_c = np.full(c.k, np.inf)
            np.maximum.at(self._ymax_c, self.x1_codes_r, self.y_r)
            np.minimum.at(self._ymin_c, self.x1_codes_r, self.y_r)
        self._x1_ready = True

    # -- profile ------------------------------------------------------------

    def _state(self, gamma: float) -> dict:
        st = self._cache.get(gamma)
        if st is None:
            st = {}
            if len(self._cache) > 6:
                self._cache.pop(next(iter(self._cache)))
            self._cache[gamma] = st
        return st

    def g_obs(self, gamma: float) -> np.ndarray:
        """g_hat_gamma evaluated at every observation's x1 (length n)."""
        st = self._state(gamma)
        if "g" in st:
            return st["g"]
        self._ensure_x1()
        if self.g_override is not None:
            g = self._g_fixed
        elif self.x1_discrete:
            c = self.x1_groups
            shift = np.where(gamma >= 0, gamma * self._ymax_c, gamma * self._ymin_c)
            t = np.exp(gamma * self.y_r - shift[self.x1_codes_r])
            s = np.bincount(self.x1_codes_r, weights=t, minlength=c.k)
            g_cell = shift + np.log(s) - self._log_n0
            g = g_cell[self.x1_codes]
        else:
            shift = float(np.max(gamma * self.y_r))
            num = self._x1_w_resp @ np.exp(gamma * self.y_r - shift)
            if np.any(num <= 0):
                raise DegenerateWindow(self.data.x1_mat[int(np.argmin(num))])
            g = shift + np.log(num) - self._x1_log_den
        st["g"] = g
        return g

    def pi_resp(self, gamma: float) -> np.ndarray:
        """Clipped pi_p(x1_i, y_i; gamma) over respondents."""
        st = self._state(gamma)
        if "pi" in st:
            return st["pi"]
        g = self.g_obs(gamma)
        eta = g[self.resp] - gamma * self.y_r
        pi = expit(eta)
        st["clip_count"] = int(np.sum((pi < self.clip) | (pi > 1 - self.clip)))
        pi = np.clip(pi, self.clip, 1 - self.clip)
        st["pi"] = pi
        return pi

    def clip_count(self, gamma: float) -> int:
        self.pi_resp(gamma)
        return self._state(gamma).get("clip_count", 0)

    def calib_weights(self, gamma: float) -> np.ndarray:
        """Per-observation delta_i / pi_i - 1 (equals -1 for nonrespondents)."""
        st = self._state(gamma)
        if "w" in st:
            return st["w"]
        w = np.full(self.n, -1.0)
        w[self.resp] = 1.0 / self.pi_resp(gamma) - 1.0
        st["w"] = w
        return w

    # -- tilted conditional expectations -------------------------------------

    def _ensure_full(self):
        if self._full_ready:
            return
        data = self.data
        if self.full_discrete:
            self.x_groups = _CellGroups(data.x_mat)
            self.x_codes = self.x_groups.codes
            self.x_codes_r = self.x_codes[self.resp]
            n1 = np.bincount(self.x_codes_r, minlength=self.x_groups.k)
            for code in range(self.x_groups.k):
                if n1[code] == 0:
                    raise EmptyCell(self.x_groups.label(code),
                                    "x cell has no respondents")
            self._x_ymax = np.full(self.x_groups.k, -np.inf)
            self._x_ymin = np.full(self.x_groups.k, np.inf)
            np.maximum.at(self._x_ymax, self.x_codes_r, self.y_r)
            np.minimum.at(self._x_ymin, self.x_codes_r, self.y_r)
        else:
            h = self.full_bandwidth
            if h is None:
                cont = [j for j, k in enumerate(data.x_kinds) if not k.is_discrete]
                h = silverman_bandwidth(data.x_mat[:, cont]) if cont else 1.0
            self.x_weights = _KernelWeights(data.x_mat, data.x_kinds, h, self.kernel)
            self._x_w_resp = self.x_weights.w[:, self.resp]
        self._full_ready = True

    def _tilted_cells(self, gamma, codes_r, k, ymax, ymin, vals_r):
        shift = np.where(gamma >= 0, gamma * ymax, gamma * ymin)
        t = np.exp(gamma * self.y_r - shift[codes_r])
        den = np.bincount(codes_r, weights=t, minlength=k)
        num = np.bincount(codes_r, weights=t * vals_r, minlength=k)
        return num, den

    def e0_full(self, gamma: float, vals_r: np.ndarray) -> np.ndarray:
        """Tilted E0-hat of a respondent-valued quantity given full x, at all rows."""
        self._ensure_full()
        if self.full_discrete:
            num, den = self._tilted_cells(gamma, self.x_codes_r, self.x_groups.k,
                                          self._x_ymax, self._x_ymin, vals_r)
            return (num / den)[self.x_codes]
        shift = float(np.max(gamma * self.y_r))
        t = np.exp(gamma * self.y_r - shift)
        den = self._x_w_resp @ t
        if np.any(den < DEN_FLOOR):
            raise DegenerateWindow(self.data.x_mat[int(np.argmin(den))])
        return (self._x_w_resp @ (t * vals_r)) / den

    def e0_x1(self, gamma: float, vals_r: np.ndarray) -> np.ndarray:
        """Tilted E0-hat of a respondent-valued quantity given x1 only, at all rows."""
        self._ensure_x1()
        if self.g_override is not None or not self.x1_discrete:
            # kernel (or hook) path: smooth over x1 with tilt weights
            if self.g_override is not None:
                groups = getattr(self, "_hook_groups", None)
                if groups is None:
                    groups = _CellGroups(self.data.x1_mat)
                    self._hook_groups = groups
                    self._hook_ymax = np.full(groups.k, -np.inf)
                    self._hook_ymin = np.full(groups.k, np.inf)
                    np.maximum.at(self._hook_ymax, groups.codes[self.resp], self.y_r)
                    np.minimum.at(self._hook_ymin, groups.codes[self.resp], self.y_r)
                num, den = self._tilted_cells(gamma, groups.codes[self.resp],
                                              groups.k, self._hook_ymax,
                                              self._hook_ymin, vals_r)
                bad = den <= 0
                if np.any(bad):
                    raise EmptyCell(groups.label(int(np.argmax(bad))),
                                    "x1 cell has no respondents")
                return (num / den)[groups.codes]
            shift = float(np.max(gamma * self.y_r))
            t = np.exp(gamma * self.y_r - shift)
            den = self._x1_w_resp @ t
            if np.any(den < DEN_FLOOR):
                raise DegenerateWindow(self.data.x1_mat[int(np.argmin(den))])
            return (self._x1_w_resp @ (t * vals_r)) / den
        num, den = self._tilted_cells(gamma, self.x1_codes_r, self.x1_groups.k,
                                      self._ymax_c, self._ymin_c, vals_r)
        return (num / den)[self.x1_codes]


# ---------------------------------------------------------------------------
# public model objects


@dataclass(frozen=True)
class ProfiledResponseModel:
    """gamma plus the fitted x1 -> g_hat map; evaluates pi_p(x1, y)."""

    gamma: float
    g_fn: Callable          # x1 (vector or matrix) -> g_hat values
    smoother_kind: str      # "cell" | "kernel" | "known-g"
    bandwidth: Optional[float] = None
    clip: float = PI_CLIP
    diagnostics: dict = field(default_factory=dict)

    def exp_g(self, x1):
        return np.exp(self.g_fn(x1))

    def pi(self, x1, y):
        return profile_pi(self, x1, y)


def fit_profile_g(data: Dataset, gamma: float, kind: str = "auto",
                  bandwidth=None, kernel: str = "gaussian",
                  clip: float = PI_CLIP, g_override=None) -> ProfiledResponseModel:
    """Profile the nonparametric response component at a fixed gamma.

    ``kind`` is "cell", "kernel", or "auto" (cell exactly when every x1
    coordinate is discrete).  ``g_override`` is the known-g test hook.
    """
    if g_override is not None:
        fn = lambda x1: np.asarray(g_override(np.atleast_2d(np.asarray(x1, dtype=float))),
                                   dtype=float).reshape(-1)
        return ProfiledResponseModel(gamma, fn, "known-g", None, clip)
    want_cell = kind == "cell" or (kind == "auto" and all(k.is_discrete for k in data.x1_kinds))
    if kind == "kernel" or not want_cell:
        eng = ProfileEngine(data, bandwidth=bandwidth, kernel=kernel, clip=clip)
        if eng.x1_discrete:
            raise ValueError("kernel profiling requested but no continuous x1 coordinate")
        eng._ensure_x1()
        w_all = eng.x1_weights
        y_r, resp, nonresp = eng.y_r, eng.resp, eng.nonresp

        def g_fn(x1):
            pts = np.atleast_2d(np.asarray(x1, dtype=float))
            w = w_all._weights_at(pts)
            den = w @ nonresp.astype(float)
            if np.any(den < DEN_FLOOR):
                raise DegenerateWindow(pts[int(np.argmin(den))])
            shift = float(np.max(gamma * y_r))
            num = w[:, resp] @ np.exp(gamma * y_r - shift)
            if np.any(num <= 0):
                raise DegenerateWindow(pts[int(np.argmin(num))])
            return shift + np.log(num) - np.log(den)

        diag = {"n": data.n}
        return ProfiledResponseModel(gamma, g_fn, "kernel", w_all.h, clip, diag)

    eng = ProfileEngine(data, clip=clip)
    g_all = eng.g_obs(gamma)
    groups = eng.x1_groups
    g_cell = np.empty(groups.k)
    g_cell[groups.codes] = g_all

    def g_fn(x1):
        pts = np.atleast_2d(np.asarray(x1, dtype=float))
        return np.array([g_cell[groups.code_of(p)] for p in pts])

    return ProfiledResponseModel(gamma, g_fn, "cell", None, clip,
                                 {"levels": groups.k})


def profile_pi(model: ProfiledResponseModel, x1, y):
    """pi_p(x1, y) = expit(g_hat(x1) - gamma y), computed in log space and clipped."""
    g = np.asarray(model.g_fn(x1), dtype=float)
    y = np.asarray(y, dtype=float)
    pi = np.clip(expit(g - model.gamma * y), model.clip, 1 - model.clip)
    if pi.size == 1:
        return float(pi.reshape(-1)[0])
    return pi


@dataclass(frozen=True)
class TiltedExpectation:
    """Ratio of tilted smoothers estimating E{e(X,Y) | x, delta=0}."""

    gamma: float
    evaluate_fn: Callable      # x row(s) -> values
    at_sample: np.ndarray      # values at the fitted sample points

    def evaluate(self, x):
        return self.evaluate_fn(x)


def tilted_e0(data: Dataset, gamma: float, e_fn, kind: str = "auto",
              bandwidth=None, kernel: str = "gaussian") -> TiltedExpectation:
    """Fit E0-hat{e(X,Y) | x} over the full covariate vector.

    ``e_fn(x_row, y)`` is any scalar function; it is evaluated on respondents.
    Evaluation elsewhere uses the same smoother ratio; sample-point values are
    precomputed.
    """
    eng = ProfileEngine(data, full_bandwidth=bandwidth, kernel=kernel)
    resp_x = data.x_mat[data.resp_mask]
    vals_r = np.array([e_fn(resp_x[i], data.y_resp[i]) for i in range(len(data.y_resp))],
                      dtype=float)
    at_sample = eng.e0_full(gamma, vals_r)
    y_r = data.y_resp

    if eng.full_discrete:
        groups = eng.x_groups
        num, den = eng._tilted_cells(gamma, eng.x_codes_r, groups.k,
                                     eng._x_ymax, eng._x_ymin, vals_r)
        ratio = num / den

        def evaluate_fn(x):
            pts = np.atleast_2d(np.asarray(x, dtype=float))
            out = np.array([ratio[groups.code_of(p)] for p in pts])
            return float(out[0]) if out.size == 1 else out
    else:
        w_all = eng.x_weights

        def evaluate_fn(x):
            pts = np.atleast_2d(np.asarray(x, dtype=float))
            w = w_all._weights_at(pts)[:, data.resp_mask]
            shift = float(np.max(gamma * y_r))
            t = np.exp(gamma * y_r - shift)
            den = w @ t
            if np.any(den < DEN_FLOOR):
                raise DegenerateWindow(pts[int(np.argmin(den))])
            out = (w @ (t * vals_r)) / den
            return float(out[0]) if out.size == 1 else out

    return TiltedExpectation(gamma, evaluate_fn, at_sample)
