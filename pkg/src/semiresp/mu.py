"""Mean-functional estimators built on a solved tilt coefficient.

Three forms, each averaging over all n observations:

* ``mu-ipw``  inverse probability weighting, delta_i y_i / pi_p(x1_i, y_i).
* ``mu-mp``   observed outcomes plus tilted conditional-mean imputation for
              nonrespondents.
* ``mu-db``   the doubly-robust-form combination of the two.

``mu-w-mp`` / ``mu-w-db`` replace the nonparametric conditional mean with the
working-model tilted mean (closed form mu(x) + gamma sigma2, or the
fractional-imputation ratio).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .data import Dataset
from .errors import ConfigError
from .outcome import WorkingEngine
from .profile import ProfiledResponseModel, ProfileEngine

MU_ESTIMATOR_IDS = ("mu-ipw", "mu-mp", "mu-db", "mu-w-mp", "mu-w-db")


@dataclass(frozen=True)
class MuEstimate:
    value: float
    estimator: str
    gamma_used: float
    engine: str  # "nonparam" | "working-analytic" | "working-fi" | "zero"


def _resolve(data: Dataset, model_or_gamma, engine):
    """Return (gamma, pi_at_respondents, profile_engine_or_None)."""
    if isinstance(model_or_gamma, ProfiledResponseModel):
        model = model_or_gamma
        x1_r = data.x1_mat[data.resp_mask]
        pi = np.atleast_1d(model.pi(x1_r, data.y_resp))
        return model.gamma, pi, engine
    gamma = float(model_or_gamma)
    eng = engine if engine is not None else ProfileEngine(data)
    return gamma, eng.pi_resp(gamma), eng


def _e0_values(data: Dataset, gamma: float, e0, eng, analytic: bool):
    """Per-observation conditional-mean imputations and an engine tag."""
    if isinstance(e0, WorkingEngine):
        if analytic:
            return e0.analytic_e0_y(gamma), "working-analytic"
        return e0.fi_e0_y(gamma), "working-fi"
    if e0 == "zero":
        return np.zeros(data.n), "zero"
    if e0 == "nonparam":
        if eng is None:
            eng = ProfileEngine(data)
        return eng.e0_full(gamma, data.y_resp), "nonparam"
    raise ConfigError(f"unknown e0 engine {e0!r}")


def mu_ipw(data: Dataset, model_or_gamma: Union[ProfiledResponseModel, float],
           *, engine=None) -> MuEstimate:
    """(1/n) sum_i delta_i y_i / pi_p(x1_i, y_i; gamma_hat)."""
    gamma, pi, _ = _resolve(data, model_or_gamma, engine)
    value = float(np.sum(data.y_resp / pi) / data.n)
    return MuEstimate(value, "mu-ipw", gamma, "nonparam")


def mu_mp(data: Dataset, model_or_gamma, e0="nonparam", *, engine=None,
          analytic: bool = True) -> MuEstimate:
    """Observed y plus tilted conditional-mean imputation for nonrespondents.

    Needs no response probabilities, so complete data reduces to the sample
    mean without touching the profile.
    """
    gamma = model_or_gamma.gamma if isinstance(model_or_gamma, ProfiledResponseModel) \
        else float(model_or_gamma)
    nonresp = ~data.resp_mask
    total = float(np.sum(data.y_resp))
    tag = "nonparam" if e0 == "nonparam" else ("zero" if e0 == "zero" else None)
    if np.any(nonresp):
        e0_vals, tag = _e0_values(data, gamma, e0, engine, analytic)
        total += float(np.sum(e0_vals[nonresp]))
    elif tag is None:
        tag = "working-analytic" if analytic else "working-fi"
    value = total / data.n
    name = "mu-mp" if tag in ("nonparam", "zero") else "mu-w-mp"
    return MuEstimate(value, name, gamma, tag)


def mu_db(data: Dataset, model_or_gamma, e0="nonparam", *, engine=None,
          analytic: bool = True) -> MuEstimate:
    """(1/n) sum_i [delta_i y_i / pi_i + (1 - delta_i / pi_i) E0_hat(Y | x_i)]."""
    gamma, pi, eng = _resolve(data, model_or_gamma, engine)
    e0_vals, tag = _e0_values(data, gamma, e0, eng, analytic)
    total = float(np.sum(e0_vals))
    total += float(np.sum((data.y_resp - e0_vals[data.resp_mask]) / pi))
    name = "mu-db" if tag in ("nonparam", "zero") else "mu-w-db"
    return MuEstimate(total / data.n, name, gamma, tag)


def estimate_mu(data: Dataset, estimator: str, gamma: float, *, engine=None,
                working: WorkingEngine = None, analytic: bool = True) -> MuEstimate:
    """Dispatch by estimator id (see MU_ESTIMATOR_IDS)."""
    if estimator == "mu-ipw":
        return mu_ipw(data, gamma, engine=engine)
    if estimator == "mu-mp":
        return mu_mp(data, gamma, "nonparam", engine=engine)
    if estimator == "mu-db":
        return mu_db(data, gamma, "nonparam", engine=engine)
    if estimator in ("mu-w-mp", "mu-w-db"):
        if working is None:
            raise ConfigError(f"{estimator} needs a working outcome engine")
        fn = mu_mp if estimator == "mu-w-mp" else mu_db
        return fn(data, gamma, working, engine=engine, analytic=analytic)
    raise ConfigError(f"unknown mu estimator {estimator!r}; valid ids: "
                      f"{', '.join(MU_ESTIMATOR_IDS)}")
