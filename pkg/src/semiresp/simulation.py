"""Data-generating processes and the replicated Monte Carlo study runner.

Two synthetic families are built in:

``discrete``
    X1 uniform on {0,1,2,3}, X2 ~ Bernoulli(0.5) independent, binary Y with
    P(Y=1|x) = expit((x1-1.6)^2 + 1.5 x2 - 1.3), and response probability
    expit(g(x1) - 0.6 y) with g per response model M1/M2/M3.

``mixed``
    X1 ~ Bernoulli(0.5), X2 ~ U[-1,1], respondent outcome
    Y | x, delta=1 ~ N(-1.0 - 0.4 x1 + 0.5 x2^2, 1), tilt 0.5, and g per
    M1/M2/M3.  Generation uses the exponential-tilting identities: the odds
    of nonresponse given x are exp{-g(x1)} E[e^{gamma Y}|x, delta=1], and the
    nonrespondent outcome law is the respondent one mean-shifted by
    gamma sigma^2.  The implied P(delta=1|x,y) is exactly expit(g - gamma y).

``impose``
    Masks a complete CSV-shaped dataset with an artificial-missingness
    logistic model (see ImposeModel).

Replications derive their RNG streams from (base seed, replication index)
only, so reports are bit-identical regardless of worker scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import expit

from .data import Dataset, Observation, continuous, discrete, from_arrays
from .errors import ConfigError, EstimationError
from .gamma import DEFAULT_BRACKET, ESTIMATOR_IDS, EstimationContext
from .inference import _estimate_one
from .mu import MU_ESTIMATOR_IDS
from .outcome import DesignSpec

GAMMA_DISCRETE = 0.6
GAMMA_MIXED = 0.5
MIXED_SIGMA2 = 1.0

# response-model log-odds components g(x1); the response probability is
# expit(g(x1) - gamma y) throughout
DISCRETE_G = {
    "M1": lambda x1: 0.2 + 0.8 * x1,
    "M2": lambda x1: 0.2 - 0.4 * x1 + 0.7 * x1 ** 2,
    "M3": lambda x1: 1.6 - 0.8 * np.sin(x1),
}
MIXED_G = {
    "M1": lambda x1: 0.3 + 0.4 * x1,
    "M2": lambda x1: 0.3 + 0.3 * x1 + 0.2 * x1 ** 2,
    "M3": lambda x1: 0.3 + 0.3 * np.sin(x1),
}


def _discrete_p_y1(x1, x2):
    return expit((x1 - 1.6) ** 2 + 1.5 * x2 - 1.3)


def _mixed_mu1(x1, x2):
    return -1.0 - 0.4 * x1 + 0.5 * x2 ** 2


@dataclass(frozen=True)
class DgpSpec:
    """One data-generating process: family, response model id, sample size."""

    family: str          # "discrete" | "mixed" | "impose"
    model: str = "M1"    # M1 | M2 | M3
    n: int = 1000

    def __post_init__(self):
        if self.family not in ("discrete", "mixed", "impose"):
            raise ConfigError(f"unknown family {self.family!r}")
        if self.family != "impose" and self.model not in ("M1", "M2", "M3"):
            raise ConfigError(f"unknown response model {self.model!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")

    @property
    def gamma_true(self) -> float:
        return GAMMA_DISCRETE if self.family == "discrete" else GAMMA_MIXED

    @property
    def mu_true(self) -> float:
        if self.family == "discrete":
            vals = [_discrete_p_y1(a, b) for a in range(4) for b in (0, 1)]
            return float(np.mean(vals))
        if self.family == "mixed":
            return mixed_population_summary(self.model)[0]
        raise ConfigError("mu_true undefined for the impose family")


def gen_discrete(spec: DgpSpec, rng) -> Dataset:
    """Fully discrete design; all covariates carry discrete level metadata."""
    n = spec.n
    x1 = rng.integers(0, 4, n).astype(float)
    x2 = rng.integers(0, 2, n).astype(float)
    y = (rng.random(n) < _discrete_p_y1(x1, x2)).astype(float)
    pi = expit(DISCRETE_G[spec.model](x1) - GAMMA_DISCRETE * y)
    delta = (rng.random(n) < pi).astype(int)
    return from_arrays(x1, x2, y, delta,
                       [discrete(0, 1, 2, 3)], [discrete(0, 1)])


def gen_mixed(spec: DgpSpec, rng) -> Dataset:
    """Binary x1, continuous instrument and outcome, Gaussian respondent law."""
    n = spec.n
    x1 = rng.integers(0, 2, n).astype(float)
    x2 = rng.uniform(-1.0, 1.0, n)
    mu1 = _mixed_mu1(x1, x2)
    g = MIXED_G[spec.model](x1)
    odds_nonresp = np.exp(-g + GAMMA_MIXED * mu1
                          + GAMMA_MIXED ** 2 * MIXED_SIGMA2 / 2.0)
    delta = (rng.random(n) < 1.0 / (1.0 + odds_nonresp)).astype(int)
    sd = np.sqrt(MIXED_SIGMA2)
    mean = np.where(delta == 1, mu1, mu1 + GAMMA_MIXED * MIXED_SIGMA2)
    y = rng.normal(mean, sd)
    return from_arrays(x1, x2, y, delta, [discrete(0, 1)], [continuous()])


def mixed_population_summary(model: str, quad_points: int = 128):
    """(mu_true, missing_rate) for a mixed-family model, by Gauss-Legendre."""
    nodes, wts = np.polynomial.legendre.leggauss(quad_points)
    wts = wts / 2.0                      # U[-1,1] density
    mu_total = 0.0
    miss_total = 0.0
    for x1 in (0.0, 1.0):
        mu1 = _mixed_mu1(x1, nodes)
        odds = np.exp(-MIXED_G[model](x1) + GAMMA_MIXED * mu1
                      + GAMMA_MIXED ** 2 * MIXED_SIGMA2 / 2.0)
        p_miss = odds / (1.0 + odds)
        mu_total += 0.5 * float(wts @ (mu1 + GAMMA_MIXED * MIXED_SIGMA2 * p_miss))
        miss_total += 0.5 * float(wts @ p_miss)
    return mu_total, miss_total


def generate(spec: DgpSpec, rng) -> Dataset:
    if spec.family == "discrete":
        return gen_discrete(spec, rng)
    if spec.family == "mixed":
        return gen_mixed(spec, rng)
    raise ConfigError("impose family needs a complete dataset; use impose_missingness")


@dataclass(frozen=True)
class ImposeModel:
    """Artificial-missingness logistic model applied to complete data.

    Response probability expit(c0 + c_sqrt sqrt(x1) + c_lin x1 - gamma y);
    M1 = (1.3, 0.3, 0.2, 0.6), M2 = (1.2, 0.0, 0.5, 0.6).
    """

    c0: float
    c_sqrt: float
    c_lin: float
    gamma: float

    @classmethod
    def named(cls, name: str, gamma: Optional[float] = None) -> "ImposeModel":
        table = {"M1": cls(1.3, 0.3, 0.2, 0.6), "M2": cls(1.2, 0.0, 0.5, 0.6)}
        if name not in table:
            raise ConfigError(f"unknown impose model {name!r} (M1 or M2)")
        model = table[name]
        return model if gamma is None else replace(model, gamma=gamma)

    def response_probability(self, x1, y):
        x1 = np.asarray(x1, dtype=float)
        if self.c_sqrt != 0.0 and np.any(x1 < 0):
            raise EstimationError("sqrt term needs x1 >= 0")
        return expit(self.c0 + self.c_sqrt * np.sqrt(np.maximum(x1, 0.0))
                     + self.c_lin * x1 - self.gamma * np.asarray(y, dtype=float))


def impose_missingness(data: Dataset, model: ImposeModel, rng) -> Dataset:
    """Draw delta from the model and mask y where delta = 0."""
    if not all(ob.delta == 1 and ob.y is not None for ob in data.observations):
        raise ConfigError("impose_missingness requires a complete dataset")
    x1 = data.x1_mat[:, 0]
    y = np.array([ob.y for ob in data.observations], dtype=float)
    pi = model.response_probability(x1, y)
    delta = (rng.random(data.n) < pi).astype(int)
    obs = [Observation(ob.x1, ob.x2, ob.y if d == 1 else None, int(d))
           for ob, d in zip(data.observations, delta)]
    return Dataset(obs, data.x1_kinds, data.x2_kinds)


# ---------------------------------------------------------------------------
# study runner


@dataclass(frozen=True)
class StudyConfig:
    """Monte Carlo study settings; hash of (config, seed) determines output."""

    dgp: DgpSpec
    estimators: tuple = ("p-ca1",)
    mu_estimators: tuple = ("mu-ipw", "mu-mp", "mu-db")
    reps: int = 500
    seed: int = 0
    workers: int = 1
    compute_ci: bool = True
    alpha: float = 0.05
    bracket: tuple = DEFAULT_BRACKET
    design: Optional[tuple] = None       # working-model terms, e.g. ("1","x1","x2^2")
    s: int = 500
    analytic_mu: bool = True

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        for e in self.estimators:
            if e not in ESTIMATOR_IDS:
                raise ConfigError(f"unknown estimator {e!r}; valid ids: "
                                  f"{', '.join(ESTIMATOR_IDS)}")
        for e in self.mu_estimators:
            if e not in MU_ESTIMATOR_IDS:
                raise ConfigError(f"unknown mu estimator {e!r}; valid ids: "
                                  f"{', '.join(MU_ESTIMATOR_IDS)}")
        if any(e.startswith("pw-") for e in self.estimators) and self.design is None:
            raise ConfigError("pw-* estimators need a working-model design")
        if any(e.startswith("mu-w") for e in self.mu_estimators) and self.design is None:
            raise ConfigError("mu-w-* estimators need a working-model design")


@dataclass
class TargetSummary:
    estimator: str
    target: str          # "gamma" | mu estimator id
    true_value: float
    n_ok: int
    n_fail: int
    bias: float
    mse: float
    coverage: Optional[float]
    mean_half_width: Optional[float]

    def to_json_dict(self):
        return {
            "estimator": self.estimator, "target": self.target,
            "true": self.true_value, "n_ok": self.n_ok, "n_fail": self.n_fail,
            "bias": self.bias, "mse": self.mse, "coverage": self.coverage,
            "mean_half_width": self.mean_half_width,
        }


@dataclass
class SimulationReport:
    config: StudyConfig
    rows: list
    failures: dict

    def row(self, estimator: str, target: str) -> TargetSummary:
        for r in self.rows:
            if r.estimator == estimator and r.target == target:
                return r
        raise KeyError((estimator, target))

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(r.to_json_dict()) for r in self.rows)

    def to_table(self) -> str:
        dgp = self.config.dgp
        head = (f"family={dgp.family} model={dgp.model} n={dgp.n} "
                f"reps={self.config.reps} seed={self.config.seed}")
        lines = [head, f"{'estimator':>10s} {'target':>8s} {'bias':>9s} "
                       f"{'mse':>10s} {'coverage':>8s} {'halfw':>8s} {'fail':>4s}"]
        for r in self.rows:
            cov = "-" if r.coverage is None else f"{r.coverage:.3f}"
            hw = "-" if r.mean_half_width is None else f"{r.mean_half_width:.4f}"
            lines.append(f"{r.estimator:>10s} {r.target:>8s} {r.bias:+9.4f} "
                         f"{r.mse:10.5f} {cov:>8s} {hw:>8s} {r.n_fail:4d}")
        return "\n".join(lines)


def _rep_rng(seed: int, rep: int, stream: int):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep, stream)))


def _run_one_rep(args):
    config, rep = args
    rng_gen = _rep_rng(config.seed, rep, 0)
    rng_est = _rep_rng(config.seed, rep, 1)
    data = generate(config.dgp, rng_gen)
    design = None if config.design is None else DesignSpec.parse(config.design)
    records = {}
    try:
        ctx = EstimationContext(data, design=design, s=config.s, rng=rng_est,
                                bracket=config.bracket)
    except EstimationError as exc:
        # dataset-level failure (e.g. an empty profiling cell) hits every estimator
        return rep, {est: ("fail", type(exc).__name__) for est in config.estimators}
    for est in config.estimators:
        try:
            reports = _estimate_one(ctx, est, config.mu_estimators,
                                    alpha=config.alpha,
                                    compute_ci=config.compute_ci, v=None,
                                    analytic_mu=config.analytic_mu,
                                    gamma_init=0.0, em_tol=1e-6)
        except EstimationError as exc:
            records[est] = ("fail", type(exc).__name__)
            continue
        rows = {}
        for rep_out in reports:
            key = "gamma" if rep_out.target == "gamma" else rep_out.estimator
            rows[key] = (rep_out.estimate, rep_out.ci)
        records[est] = ("ok", rows)
    return rep, records


def run_study(config: StudyConfig) -> SimulationReport:
    """Run the replicated study and summarize bias / MSE / coverage per target.

    Replication r uses RNG streams derived from (seed, r) only; failed
    replications are excluded per estimator and counted, never silently.
    """
    jobs = [(config, r) for r in range(config.reps)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_one_rep, jobs, chunksize=8))
    else:
        results = [_run_one_rep(j) for j in jobs]
    results.sort(key=lambda t: t[0])

    gamma_true = config.dgp.gamma_true
    mu_true = config.dgp.mu_true if config.mu_estimators else None
    rows = []
    failures = {}
    for est in config.estimators:
        ok = [rec[est][1] for _, rec in results if rec[est][0] == "ok"]
        n_fail = config.reps - len(ok)
        failures[est] = n_fail
        targets = [("gamma", gamma_true)] + [(m, mu_true) for m in config.mu_estimators]
        for target, true_val in targets:
            est_vals = np.array([r[target][0] for r in ok]) if ok else np.empty(0)
            cis = [r[target][1] for r in ok]
            cov = None
            halfw = None
            if config.compute_ci and ok and cis[0] is not None:
                hits = [ci[0] <= true_val <= ci[1] for ci in cis]
                cov = float(np.mean(hits))
                halfw = float(np.mean([(ci[1] - ci[0]) / 2 for ci in cis]))
            bias = float(np.mean(est_vals) - true_val) if len(est_vals) else float("nan")
            mse = float(np.mean((est_vals - true_val) ** 2)) if len(est_vals) else float("nan")
            rows.append(TargetSummary(est, target, true_val, len(ok), n_fail,
                                      bias, mse, cov, halfw))
    return SimulationReport(config, rows, failures)
