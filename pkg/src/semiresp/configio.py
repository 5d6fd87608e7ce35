"""Flat key-value configuration files (INI sections) for the CLI and studies.

Two kinds of blocks are understood:

``[columns]`` / ``[kinds]``
    Map CSV columns to roles (x1 / x2 / y / delta) and declare per-column
    variable kinds, e.g. ``income = continuous`` or ``gender = discrete:0,1``.

``[study]`` (plus optional ``[engine]``)
    Monte Carlo study settings consumed by :func:`semiresp.simulation.run_study`.

Every key can be overridden from the command line with ``section.key=value``
(or a bare ``key=value`` when the key is unambiguous); overrides win.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .data import VariableKind, continuous, discrete
from .errors import ConfigError


def read_config(path, overrides=()) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str  # keep column names case-sensitive
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    apply_overrides(cp, overrides)
    return cp


def apply_overrides(cp: configparser.ConfigParser, overrides) -> None:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        value = value.strip()
        if "." in key:
            section, _, name = key.partition(".")
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, name, value)
            continue
        hits = [s for s in cp.sections() if cp.has_option(s, key)]
        if len(hits) == 1:
            cp.set(hits[0], key, value)
        elif len(hits) > 1:
            raise ConfigError(f"override key {key!r} ambiguous across sections {hits}")
        else:
            if not cp.has_section("study"):
                cp.add_section("study")
            cp.set("study", key, value)


def _parse_kind(text: str) -> VariableKind:
    text = text.strip()
    if text == "continuous":
        return continuous()
    if text.startswith("discrete"):
        _, _, levels = text.partition(":")
        if not levels.strip():
            raise ConfigError("discrete kind needs levels, e.g. discrete:0,1")
        return discrete(*[float(v) for v in levels.split(",")])
    raise ConfigError(f"unknown kind {text!r}")


@dataclass
class ColumnMap:
    """CSV column assignment: names for x1/x2 coordinates, y, and delta."""

    x1: list
    x2: list
    y: str
    delta: str = ""
    x1_kinds: list = field(default_factory=list)
    x2_kinds: list = field(default_factory=list)

    def all_columns(self):
        cols = list(self.x1) + list(self.x2)
        if self.y:
            cols.append(self.y)
        if self.delta:
            cols.append(self.delta)
        return cols


def column_map(cp: configparser.ConfigParser, *, require_delta=False) -> ColumnMap:
    if not cp.has_section("columns"):
        raise ConfigError("config needs a [columns] section")
    sec = cp["columns"]
    for role in ("x1", "x2", "y"):
        if role not in sec:
            raise ConfigError(f"[columns] missing {role!r}")
    split = lambda s: [c.strip() for c in s.split(",") if c.strip()]
    cm = ColumnMap(
        x1=split(sec["x1"]),
        x2=split(sec["x2"]),
        y=sec["y"].strip(),
        delta=sec.get("delta", "").strip(),
    )
    if require_delta and not cm.delta:
        raise ConfigError("[columns] must name a delta column for this command")
    kinds = cp["kinds"] if cp.has_section("kinds") else {}
    def kind_for(col):
        if col in kinds:
            return _parse_kind(kinds[col])
        return continuous()
    cm.x1_kinds = [kind_for(c) for c in cm.x1]
    cm.x2_kinds = [kind_for(c) for c in cm.x2]
    return cm


# typed getters -------------------------------------------------------------

def get_str(cp, section, key, default=None):
    if cp.has_option(section, key):
        return cp.get(section, key).strip()
    if default is None:
        raise ConfigError(f"[{section}] missing {key!r}")
    return default


def get_int(cp, section, key, default=None):
    raw = get_str(cp, section, key, None if default is None else str(default))
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from exc


def get_float(cp, section, key, default=None):
    raw = get_str(cp, section, key, None if default is None else repr(default))
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from exc


def get_list(cp, section, key, default=None):
    raw = get_str(cp, section, key, "" if default is not None else None)
    if not raw:
        return list(default)
    return [v.strip() for v in raw.split(",") if v.strip()]
