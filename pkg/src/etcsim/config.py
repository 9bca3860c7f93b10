"""TOML configuration loading: sections system/observer/controller/triggers/init/sim/analysis."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .controller import GainSet, TriggerThresholds
from .engine import SimConfig
from .exprlang import parse_expr
from .plant import PlantModel

__all__ = ["ConfigError", "load_config", "apply_overrides"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration file."""


def _section(data: dict, name: str) -> dict:
    try:
        sec = data[name]
    except KeyError:
        raise ConfigError(f"missing [{name}] section") from None
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def _get(sec: dict, section: str, key: str, default: Any = ...) -> Any:
    if key in sec:
        return sec[key]
    if default is ...:
        raise ConfigError(f"missing key {key!r} in [{section}]")
    return default


def _floats(sec: dict, section: str, key: str, default: Any = ...) -> tuple[float, ...]:
    value = _get(sec, section, key, default)
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key} must be an array of numbers") from None


def apply_overrides(data: dict, overrides: dict[str, Any]) -> dict:
    """Apply dotted-path overrides like {"triggers.gamma_y": 0.3} to a parsed config."""
    for path, value in overrides.items():
        parts = path.split(".")
        if len(parts) != 2:
            raise ConfigError(f"override path {path!r} must be section.key")
        section, key = parts
        if section not in data or key not in data[section]:
            raise ConfigError(f"override path {path!r} does not exist in the config")
        data[section][key] = value
    return data


def load_config(
    path: str | Path,
    overrides: Optional[dict[str, Any]] = None,
    strict: bool = True,
) -> SimConfig:
    """Parse and assemble a SimConfig; with strict=True all invariants are enforced."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from None

    if overrides:
        apply_overrides(data, overrides)

    system = _section(data, "system")
    observer = _section(data, "observer")
    controller = _section(data, "controller")
    triggers = _section(data, "triggers")
    init = _section(data, "init")
    sim = _section(data, "sim")
    analysis = data.get("analysis", {})

    n = int(_get(system, "system", "n"))
    psi_srcs = _get(system, "system", "psi")
    if not isinstance(psi_srcs, list) or not all(isinstance(s, str) for s in psi_srcs):
        raise ConfigError("system.psi must be an array of expression strings")
    psi = tuple(parse_expr(src) for src in psi_srcs)

    model = PlantModel(
        n=n,
        theta_true=float(_get(system, "system", "theta_true")),
        theta_bar=float(_get(system, "system", "theta_bar")),
        psi=psi,
        L=_floats(system, "system", "lipschitz"),
        Psi=_floats(system, "system", "slope_bounds"),
    )
    gains = GainSet(
        c=_floats(controller, "controller", "c"),
        rho=_floats(controller, "controller", "rho"),
        phi=_floats(controller, "controller", "phi"),
        varrho=_floats(controller, "controller", "varrho"),
        delta=float(_get(controller, "controller", "delta")),
        sigma=float(_get(controller, "controller", "sigma")),
    )
    thresholds = TriggerThresholds(
        gamma_y=float(_get(triggers, "triggers", "gamma_y")),
        gamma_ybar=float(_get(triggers, "triggers", "gamma_ybar")),
        gamma_xi=float(_get(triggers, "triggers", "gamma_xi")),
        gamma_zeta=float(_get(triggers, "triggers", "gamma_zeta")),
        gamma_h=float(_get(triggers, "triggers", "gamma_h")),
        gamma_f=float(_get(triggers, "triggers", "gamma_f")),
    )
    q = analysis.get("q")
    config = SimConfig(
        model=model,
        k=np.array(_floats(observer, "observer", "k")),
        gains=gains,
        thresholds=thresholds,
        x0=np.array(_floats(init, "init", "x0")),
        xi0=np.array(_floats(init, "init", "xi0")),
        zeta0=np.array(_floats(init, "init", "zeta0")),
        theta_hat0=float(_get(init, "init", "theta_hat0")),
        alpha_f0=np.array(_floats(init, "init", "alpha_f0")),
        t_end=float(_get(sim, "sim", "t_end")),
        h=float(_get(sim, "sim", "h", 0.01)),
        record_stride=int(_get(sim, "sim", "record_stride", 1)),
        q=float(q) if q is not None else None,
        loc_tol=float(_get(sim, "sim", "loc_tol", 1e-9)),
    )
    if strict:
        try:
            config.validate()
        except ValueError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None
    return config
