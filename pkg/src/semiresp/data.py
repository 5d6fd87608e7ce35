"""Observation containers, variable-kind metadata, validation, and CSV I/O.

A dataset holds ``n`` rows of ``(x1, x2, y-or-missing, delta)`` where ``x1``
enters the nonparametric part of the response model and ``x2`` is the
nonresponse instrument.  A missing outcome is stored as ``None`` (and written
as an empty CSV field), never as a sentinel number.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class VariableKind:
    """Per-coordinate metadata: ``discrete`` with a level set, or ``continuous``."""

    tag: str                      # "discrete" | "continuous"
    levels: tuple = ()            # ordered, duplicate-free codes when discrete

    def __post_init__(self):
        if self.tag not in ("discrete", "continuous"):
            raise ValueError(f"unknown variable kind {self.tag!r}")
        if self.tag == "discrete":
            if len(self.levels) == 0:
                raise ValueError("discrete kind requires a non-empty level set")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError("discrete level set contains duplicates")

    @property
    def is_discrete(self) -> bool:
        return self.tag == "discrete"


def discrete(*levels) -> VariableKind:
    return VariableKind("discrete", tuple(float(v) for v in levels))


def continuous() -> VariableKind:
    return VariableKind("continuous")


@dataclass(frozen=True)
class Observation:
    """One row: covariates, outcome (present iff delta == 1), response flag."""

    x1: tuple
    x2: tuple
    y: Optional[float]
    delta: int


@dataclass(frozen=True)
class Violation:
    """A single validation finding: the rule broken and the row involved."""

    rule: str
    index: Optional[int] = None

    def __str__(self):
        where = "dataset" if self.index is None else f"row {self.index}"
        return f"{where}: {self.rule}"


class Dataset:
    """Immutable collection of observations with covariate kind metadata.

    Column caches (``x1_mat``, ``x2_mat``, ``delta``, ``y_resp``) are built on
    construction; the observation list remains the source of truth.  Instances
    are safe to share across parallel replication workers.
    """

    def __init__(self, observations: Sequence[Observation],
                 x1_kinds: Sequence[VariableKind],
                 x2_kinds: Sequence[VariableKind]):
        self.observations = tuple(observations)
        self.x1_kinds = tuple(x1_kinds)
        self.x2_kinds = tuple(x2_kinds)
        n = len(self.observations)
        d1, d2 = len(self.x1_kinds), len(self.x2_kinds)
        self.x1_mat = np.empty((n, d1))
        self.x2_mat = np.empty((n, d2))
        self.delta = np.empty(n, dtype=np.int8)
        ys = []
        for i, ob in enumerate(self.observations):
            self.x1_mat[i] = ob.x1
            self.x2_mat[i] = ob.x2
            self.delta[i] = ob.delta
            if ob.delta == 1 and ob.y is not None:
                ys.append(ob.y)
        self.resp_mask = self.delta == 1
        self.resp_idx = np.flatnonzero(self.resp_mask)
        self.y_resp = np.asarray(ys, dtype=float) if len(ys) == len(self.resp_idx) \
            else np.asarray([self.observations[i].y for i in self.resp_idx], dtype=float)
        self.x1_mat.setflags(write=False)
        self.x2_mat.setflags(write=False)
        self.delta.setflags(write=False)
        self.y_resp.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def n_resp(self) -> int:
        return int(self.resp_mask.sum())

    @property
    def x_mat(self) -> np.ndarray:
        """Full covariate matrix (x1 columns then x2 columns)."""
        return np.column_stack([self.x1_mat, self.x2_mat])

    @property
    def x_kinds(self):
        return self.x1_kinds + self.x2_kinds

    def column(self, name: str) -> np.ndarray:
        """Covariate column by symbolic name: x1, x2, x1_2 (second x1 coord), ..."""
        role, idx = _parse_column_name(name)
        mat = self.x1_mat if role == "x1" else self.x2_mat
        if idx >= mat.shape[1]:
            raise ConfigError(f"column {name!r} out of range (role {role} has {mat.shape[1]} coords)")
        return mat[:, idx]

    def __len__(self):
        return self.n


def _parse_column_name(name: str):
    base, _, suffix = name.partition("_")
    if base not in ("x1", "x2"):
        raise ConfigError(f"unknown covariate name {name!r}; use x1, x2, x1_2, ...")
    idx = int(suffix) - 1 if suffix else 0
    if idx < 0:
        raise ConfigError(f"bad coordinate index in {name!r}")
    return base, idx


def from_arrays(x1, x2, y, delta, x1_kinds, x2_kinds) -> Dataset:
    """Build a Dataset from column arrays; y entries where delta==0 are ignored."""
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    if x1.shape[0] == 1 and x1.shape[1] != 1 and len(delta) != 1:
        x1 = x1.T
    if x2.shape[0] == 1 and x2.shape[1] != 1 and len(delta) != 1:
        x2 = x2.T
    delta = np.asarray(delta, dtype=int)
    y = np.asarray(y, dtype=float)
    obs = [
        Observation(tuple(x1[i]), tuple(x2[i]),
                    float(y[i]) if delta[i] == 1 else None, int(delta[i]))
        for i in range(len(delta))
    ]
    return Dataset(obs, x1_kinds, x2_kinds)


def validate(dataset: Dataset) -> list:
    """Check every type invariant; return violations as data, not exceptions."""
    out = []
    if dataset.n < 1:
        out.append(Violation("n >= 1"))
        return out
    d1, d2 = len(dataset.x1_kinds), len(dataset.x2_kinds)
    for i, ob in enumerate(dataset.observations):
        if ob.delta not in (0, 1):
            out.append(Violation(f"delta must be 0 or 1, got {ob.delta}", i))
        if ob.delta == 1 and ob.y is None:
            out.append(Violation("y must be present when delta=1", i))
        if ob.delta == 0 and ob.y is not None:
            out.append(Violation("y must be absent when delta=0", i))
        if ob.y is not None and not np.isfinite(ob.y):
            out.append(Violation("y must be finite", i))
        if len(ob.x1) != d1:
            out.append(Violation(f"x1 has {len(ob.x1)} coords, expected {d1}", i))
        if len(ob.x2) != d2:
            out.append(Violation(f"x2 has {len(ob.x2)} coords, expected {d2}", i))
    for role, kinds, mat in (("x1", dataset.x1_kinds, dataset.x1_mat),
                             ("x2", dataset.x2_kinds, dataset.x2_mat)):
        for j, kind in enumerate(kinds):
            if not kind.is_discrete:
                continue
            levels = set(kind.levels)
            for i, v in enumerate(mat[:, j]):
                if v not in levels:
                    out.append(Violation(
                        f"{role} coord {j + 1} value {v} outside declared levels", i))
    return out


def respondent_split(dataset: Dataset):
    """Partition into (respondents, nonrespondents), preserving input order."""
    resp = [ob for ob in dataset.observations if ob.delta == 1]
    nonresp = [ob for ob in dataset.observations if ob.delta == 0]
    mk = lambda rows: Dataset(rows, dataset.x1_kinds, dataset.x2_kinds)
    return mk(resp), mk(nonresp)


# ---------------------------------------------------------------------------
# CSV interface: header row + sidecar column mapping (see configio.ColumnMap)


def load_csv(path, colmap) -> Dataset:
    """Read a CSV per the column mapping; empty y field means missing."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigError(f"{path}: empty CSV")
        for col in colmap.all_columns():
            if col not in reader.fieldnames:
                raise ConfigError(f"{path}: column {col!r} not in header {reader.fieldnames}")
        obs = []
        for i, row in enumerate(reader):
            try:
                x1 = tuple(float(row[c]) for c in colmap.x1)
                x2 = tuple(float(row[c]) for c in colmap.x2)
                ystr = row[colmap.y].strip() if colmap.y else ""
                if colmap.delta:
                    delta = int(float(row[colmap.delta]))
                else:
                    delta = 1 if ystr != "" else 0
                # keep an inconsistent (y, delta) pair as-is so validation
                # can name the offending row instead of masking it on load
                y = float(ystr) if ystr != "" else None
            except ValueError as exc:
                raise ConfigError(f"{path}: row {i}: {exc}") from exc
            obs.append(Observation(x1, x2, y, delta))
    return Dataset(obs, colmap.x1_kinds, colmap.x2_kinds)


def write_csv(path, dataset: Dataset, colmap) -> None:
    """Write a CSV loadable by :func:`load_csv` with the same mapping (lossless)."""
    header = list(colmap.x1) + list(colmap.x2) + [colmap.y]
    if colmap.delta:
        header.append(colmap.delta)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ob in dataset.observations:
            row = [_fmt(v) for v in ob.x1] + [_fmt(v) for v in ob.x2]
            row.append(_fmt(ob.y) if ob.y is not None else "")
            if colmap.delta:
                row.append(str(ob.delta))
            writer.writerow(row)


def _fmt(v: float) -> str:
    return repr(float(v))
