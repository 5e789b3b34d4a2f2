"""TOML run configuration with embedded defaults."""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .problem import ProblemParams
from .radial_ode import IntegratorControl

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "load_config", "dumps_toml"]


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, Any] = {
    "problem": {
        "N": 3,
        "p": 2.0,
        "q": 3.0,
        "delta": 0.5,
        "lambda": 0.05,
        "eps": 0.001,
        "mu": 0.0,
        "R": 1.0,
        "singular": True,
        "check_window": True,
        "f": {"monomials": [], "c0": 0.5},
    },
    "scan": {"a_min": 1e-3, "a_max": 1e3, "n": 64},
    "solve": {"branch": 0},
    "integrator": {"rtol": 1e-11, "atol": 1e-14, "n_uniform": 2048},
    "continuation": {"eps0": 0.1, "factor": 0.25, "steps": 10, "tol_rel": 1e-6},
    "sweep": {"lambdas": [0.01, 0.02, 0.05, 0.1, 0.2, 0.5]},
    "probe": {"mus": [0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0]},
    "blowup": {"heights": [10.0, 100.0, 1000.0], "x_max": 40.0},
    "verify": {"test_count": 8},
}


@dataclass
class RunConfig:
    problem: ProblemParams
    raw: dict[str, Any]

    def section(self, name: str) -> dict[str, Any]:
        return self.raw[name]

    @property
    def scan(self) -> tuple[float, float, int]:
        s = self.raw["scan"]
        return float(s["a_min"]), float(s["a_max"]), int(s["n"])

    @property
    def ctrl(self) -> IntegratorControl:
        s = self.raw["integrator"]
        return IntegratorControl(rtol=float(s["rtol"]), atol=float(s["atol"]),
                                 n_uniform=int(s["n_uniform"]))


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        key = f"{where}{k}"
        if k not in base:
            raise ConfigError(f"unknown key '{key}'")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"'{key}' must be a table")
            out[k] = _merge(base[k], v, key + ".")
        else:
            out[k] = v
    return out


def _validate(raw: dict) -> None:
    for sec, key in (("integrator", "rtol"), ("integrator", "atol"),
                     ("continuation", "tol_rel"), ("continuation", "eps0")):
        if not raw[sec][key] > 0:
            raise ConfigError(f"{sec}.{key} must be positive")
    f = raw["continuation"]["factor"]
    if not 0 < f <= 1:
        raise ConfigError("continuation.factor must lie in (0, 1]")
    s = raw["scan"]
    if not 0 < s["a_min"] < s["a_max"] or s["n"] < 2:
        raise ConfigError("scan needs 0 < a_min < a_max and n >= 2")


def load_config(path: str | Path | None = None, text: str | None = None) -> RunConfig:
    """Merge a TOML file (or string) over :data:`DEFAULTS` and validate it."""
    over: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    if text is not None:
        try:
            over = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path or '<config>'}: {exc}") from None
    raw = _merge(DEFAULTS, over)
    _validate(raw)
    try:
        problem = ProblemParams.from_config(raw["problem"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"[problem]: {exc}") from None
    return RunConfig(problem=problem, raw=raw)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(type(v))


def dumps_toml(doc: dict) -> str:
    """Serialize a two-level dict (tables of scalars/lists, dotted sub-tables)."""
    lines = []
    for name, table in doc.items():
        lines.append(f"[{name}]")
        for k, v in table.items():
            if isinstance(v, dict):
                for kk, vv in v.items():
                    lines.append(f"{k}.{kk} = {_toml_value(vv)}")
            else:
                lines.append(f"{k} = {_toml_value(v)}")
        lines.append("")
    return "\n".join(lines)
