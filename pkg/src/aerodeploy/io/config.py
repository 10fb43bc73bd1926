"""Run configuration file.

INI-style ``key = value`` lines under ``[grounding]``, ``[traversability]``,
``[compatibility]`` and ``[deployment]``; ``#`` starts a comment line.
Compatibility entries are ``class.<id> = <tau>`` plus ``default``.
Unknown sections or keys are errors.  Slope thresholds are in degrees.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..bev import DEFAULT_RESOLUTION
from ..deployment import DeploymentConfig
from ..exceptions import ConfigInvalid
from ..features import FeatureConfig
from ..grounding import GroundingConfig
from ..traversability import CompatibilityTable, ThresholdConfig

_GRID_KEYS = {"resolution": float, "padding": float}
_FEATURE_KEYS = {"k_slope": int, "k_rough": int, "min_neighbors": int}
_THRESHOLD_KEYS = {f.name: float for f in fields(ThresholdConfig)}
_DEPLOY_KEYS = {"T_th": "T_th", "r_max": "r_max", "lambda": "lam", "K": "K",
                "min_separation": "min_separation"}


@dataclass(frozen=True)
class RunConfig:
    grounding: GroundingConfig = field(default_factory=GroundingConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    compatibility: CompatibilityTable = field(default_factory=CompatibilityTable)
    deployment: DeploymentConfig = field(default_factory=DeploymentConfig)
    resolution: float = DEFAULT_RESOLUTION
    padding: float = 0.0

    def __post_init__(self):
        if not self.resolution > 0:
            raise ConfigInvalid("resolution must be positive")
        if not self.padding >= 0:
            raise ConfigInvalid("padding must be non-negative")


def _num(value: str, kind, key: str):
    try:
        return kind(value)
    except ValueError as exc:
        raise ConfigInvalid(f"{key}: cannot parse {value!r} as {kind.__name__}") from exc


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=None,
        strict=True, empty_lines_in_values=False, default_section="\0",
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigInvalid(str(exc)) from exc
    unknown = set(cp.sections()) - {"grounding", "traversability", "compatibility", "deployment"}
    if unknown:
        raise ConfigInvalid(f"unknown config sections: {sorted(unknown)}")

    kw = {}
    if cp.has_section("grounding"):
        g = {}
        for key, value in cp.items("grounding"):
            if key == "strides":
                g["strides"] = tuple(_num(s.strip(), int, key) for s in value.split(",") if s.strip())
            elif key == "min_pairs":
                g[key] = _num(value, int, key)
            elif key == "degenerate_ratio_tol":
                g[key] = _num(value, float, key)
            else:
                raise ConfigInvalid(f"unknown key [grounding] {key}")
        try:
            kw["grounding"] = GroundingConfig(**g)
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from exc

    if cp.has_section("traversability"):
        feats, th = {}, {}
        for key, value in cp.items("traversability"):
            if key in _GRID_KEYS:
                kw[key] = _num(value, _GRID_KEYS[key], key)
            elif key in _FEATURE_KEYS:
                feats[key] = _num(value, int, key)
            elif key in _THRESHOLD_KEYS:
                th[key] = _num(value, float, key)
            else:
                raise ConfigInvalid(f"unknown key [traversability] {key}")
        kw["features"] = FeatureConfig(**feats)
        kw["thresholds"] = ThresholdConfig(**th)

    if cp.has_section("compatibility"):
        values, default = {}, CompatibilityTable().default
        for key, value in cp.items("compatibility"):
            if key == "default":
                default = _num(value, float, key)
            elif key.startswith("class."):
                values[_num(key[6:], int, key)] = _num(value, float, key)
            else:
                raise ConfigInvalid(f"unknown key [compatibility] {key}")
        kw["compatibility"] = CompatibilityTable(values, default)

    if cp.has_section("deployment"):
        d = {}
        for key, value in cp.items("deployment"):
            if key not in _DEPLOY_KEYS:
                raise ConfigInvalid(f"unknown key [deployment] {key}")
            d[_DEPLOY_KEYS[key]] = _num(value, int if key == "K" else float, key)
        kw["deployment"] = DeploymentConfig(**d)

    return RunConfig(**kw)


def read_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def serialize_config(cfg: RunConfig) -> str:
    g, f, t, c, d = cfg.grounding, cfg.features, cfg.thresholds, cfg.compatibility, cfg.deployment
    lines = [
        "[grounding]",
        "strides = " + ", ".join(str(k) for k in g.strides),
        f"min_pairs = {g.min_pairs}",
        f"degenerate_ratio_tol = {g.degenerate_ratio_tol!r}",
        "",
        "[traversability]",
        f"resolution = {cfg.resolution!r}",
        f"padding = {cfg.padding!r}",
        f"k_slope = {f.k_slope}",
        f"k_rough = {f.k_rough}",
        f"min_neighbors = {f.min_neighbors}",
    ]
    lines += [f"{name} = {float(getattr(t, name))!r}" for name in _THRESHOLD_KEYS]
    lines += ["", "[compatibility]", f"default = {c.default!r}"]
    lines += [f"class.{k} = {v!r}" for k, v in c.values.items()]
    lines += ["", "[deployment]"]
    lines += [f"{key} = {getattr(d, attr)!r}" for key, attr in _DEPLOY_KEYS.items()]
    return "\n".join(lines) + "\n"
