"""
Scenario config files (YAML) <-> ScenarioConfig.

Required top-level fields: dt, horizon, R, gamma_ini, delta, lambda, goal,
ego_start, pedestrians. Everything else has a default in util.constants.
Trust-estimator parameters sit under an optional 'trust' mapping.
"""
from dataclasses import fields
import os
from typing import Any, Dict, List

from enforce_typing import enforce_types
import yaml

from util.confidence import ConfidenceScript, ScriptEntry
from util.errors import ConfigError, MissingFieldError
from util.scenariosim import PedestrianConfig, ScenarioConfig

_REQUIRED = ["dt", "horizon", "R", "gamma_ini", "delta", "lambda", "goal", "ego_start", "pedestrians"]

_FLOAT_FIELDS = ["dt", "R", "gamma_ini", "delta", "u_max", "kp", "goal_tol", "solver_tol", "terminal_weight"]
_INT_FIELDS = ["horizon", "max_steps", "max_iters", "trust_decimation"]
_TRUST_FIELDS = ["alpha", "beta", "beta0", "nu1", "nu2", "nu3", "nu01", "nu02", "nu03"]

_TOP_LEVEL = set(_REQUIRED + _FLOAT_FIELDS + _INT_FIELDS) | {
    "name",
    "grid_bounds",
    "reference_mode",
    "trust",
}

# numeric fields a sweep may vary, besides ped{j}_trust
SWEEPABLE = ["horizon", "gamma_ini", "delta", "lambda"]


@enforce_types
def parseConfig(path: str) -> ScenarioConfig:
    """
    @description
      Load and fully validate a scenario config file.

    @arguments
      path -- YAML file

    @return
      config -- ScenarioConfig

    @notes
      Raises MissingFieldError naming the field, or ConfigError quoting the
      violated condition.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r") as f:
        try:
            d = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: not valid YAML: {e}") from e
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    print(f"Loaded {path}")
    return configFromDict(d)


@enforce_types
def configFromDict(d: dict) -> ScenarioConfig:
    for key in _REQUIRED:
        if key not in d:
            raise MissingFieldError(key)
    unknown = sorted(set(d) - _TOP_LEVEL)
    if unknown:
        raise ConfigError(f"scenario: unknown field(s) {unknown}")

    kwargs: Dict[str, Any] = {}
    for key in _FLOAT_FIELDS:
        if key in d:
            kwargs[key] = _float(d[key], key)
    for key in _INT_FIELDS:
        if key in d:
            kwargs[key] = _int(d[key], key)
    kwargs["lambda_"] = _float(d["lambda"], "lambda")
    kwargs["goal"] = _vec2(d["goal"], "goal")
    kwargs["ego_start"] = _vec2(d["ego_start"], "ego_start")
    if "name" in d:
        kwargs["name"] = str(d["name"])
    if "grid_bounds" in d:
        gb = d["grid_bounds"]
        if not isinstance(gb, list) or len(gb) != 2:
            raise ConfigError("grid_bounds: need [[x_lo, y_lo], [x_hi, y_hi]]")
        kwargs["grid_bounds"] = (_vec2(gb[0], "grid_bounds"), _vec2(gb[1], "grid_bounds"))
    if "reference_mode" in d:
        kwargs["reference_mode"] = str(d["reference_mode"])

    trust = d.get("trust") or {}
    if not isinstance(trust, dict):
        raise ConfigError("trust: must be a mapping")
    unknown = sorted(set(trust) - set(_TRUST_FIELDS + ["rho"]))
    if unknown:
        raise ConfigError(f"trust: unknown field(s) {unknown}")
    for key in _TRUST_FIELDS:
        if key in trust:
            kwargs[key] = _float(trust[key], f"trust.{key}")
    if "rho" in trust:
        if not isinstance(trust["rho"], list):
            raise ConfigError("trust.rho: must be a list")
        kwargs["rho"] = tuple(_float(r, "trust.rho") for r in trust["rho"])

    peds = d["pedestrians"]
    if peds is None:
        peds = []
    if not isinstance(peds, list):
        raise ConfigError("pedestrians: must be a list")
    kwargs["pedestrians"] = tuple(_pedestrian(p, j) for j, p in enumerate(peds))

    try:
        return ScenarioConfig(**kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from e


@enforce_types
def configToDict(config: ScenarioConfig) -> dict:
    """Every field, defaults included, in file layout"""
    d: Dict[str, Any] = {"name": config.name}
    for key in _FLOAT_FIELDS + _INT_FIELDS:
        d[key] = getattr(config, key)
    d["lambda"] = config.lambda_
    d["goal"] = list(config.goal)
    d["ego_start"] = list(config.ego_start)
    d["grid_bounds"] = [list(config.grid_bounds[0]), list(config.grid_bounds[1])]
    d["reference_mode"] = config.reference_mode
    trust: Dict[str, Any] = {key: getattr(config, key) for key in _TRUST_FIELDS}
    trust["rho"] = list(config.rho)
    d["trust"] = trust
    d["pedestrians"] = [_pedestrianToDict(p) for p in config.pedestrians]
    return d


@enforce_types
def dumpEffectiveConfig(config: ScenarioConfig, path: str):
    assert not os.path.exists(path), f"{path} can't already exist"
    with open(path, "w") as f:
        yaml.safe_dump(configToDict(config), f, sort_keys=False)
    print(f"Created {path}")


@enforce_types
def sweptConfig(config: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    """
    @description
      Copy of config with one numeric field replaced.

    @arguments
      param -- horizon | gamma_ini | delta | lambda | ped{j}_trust
      value -- new value

    @return
      config2 -- validated ScenarioConfig
    """
    d = configToDict(config)
    if param in SWEEPABLE:
        d[param] = value
    elif param.startswith("ped") and param.endswith("_trust"):
        try:
            j = int(param[len("ped") : -len("_trust")])
        except ValueError as e:
            raise ConfigError(f"can't sweep '{param}'") from e
        if not 0 <= j < len(d["pedestrians"]):
            raise ConfigError(f"can't sweep '{param}': no pedestrian {j}")
        ped = d["pedestrians"][j]
        ped.pop("script", None)
        ped["trust"] = value
    else:
        raise ConfigError(
            f"can't sweep '{param}'; choose from {SWEEPABLE} or ped<j>_trust"
        )
    return configFromDict(d)


# ========================================================================
# helpers


def _pedestrian(p, j: int) -> PedestrianConfig:
    where = f"pedestrians[{j}]"
    if not isinstance(p, dict):
        raise ConfigError(f"{where}: must be a mapping")
    if "start" not in p:
        raise MissingFieldError("start", where)
    unknown = sorted(set(p) - {"id", "start", "velocity", "trust", "script"})
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {unknown}")
    script = None
    if p.get("script") is not None:
        script = _script(p["script"], where)
    trust = None
    if p.get("trust") is not None:
        trust = _float(p["trust"], f"{where}.trust")
    return PedestrianConfig(
        start=_vec2(p["start"], f"{where}.start"),
        velocity=_vec2(p.get("velocity", [0.0, 0.0]), f"{where}.velocity"),
        trust=trust,
        script=script,
        ped_id=str(p.get("id", f"ped{j}")),
    )


def _script(entries, where: str) -> ConfidenceScript:
    if not isinstance(entries, list):
        raise ConfigError(f"{where}.script: must be a list")
    out: List[ScriptEntry] = []
    for i, e in enumerate(entries):
        w = f"{where}.script[{i}]"
        if not isinstance(e, dict):
            raise ConfigError(f"{w}: must be a mapping")
        for key in ("steps", "c_sm", "c_eye", "c_fluc"):
            if key not in e:
                raise MissingFieldError(key, w)
        steps = e["steps"]
        if not isinstance(steps, list) or len(steps) != 2:
            raise ConfigError(f"{w}.steps: need [first, last]")
        try:
            out.append(
                ScriptEntry(
                    first=_int(steps[0], f"{w}.steps"),
                    last=_int(steps[1], f"{w}.steps"),
                    c_sm=_float(e["c_sm"], f"{w}.c_sm"),
                    c_eye=_float(e["c_eye"], f"{w}.c_eye"),
                    c_fluc=_float(e["c_fluc"], f"{w}.c_fluc"),
                )
            )
        except ValueError as err:
            raise ConfigError(f"{w}: {err}") from err
    try:
        return ConfidenceScript(entries=tuple(out))
    except ValueError as err:
        raise ConfigError(f"{where}.script: {err}") from err


def _pedestrianToDict(p: PedestrianConfig) -> dict:
    d: Dict[str, Any] = {
        "id": p.ped_id,
        "start": list(p.start),
        "velocity": list(p.velocity),
    }
    if p.trust is not None:
        d["trust"] = p.trust
    if p.script is not None:
        d["script"] = [
            {
                "steps": [e.first, e.last],
                "c_sm": e.c_sm,
                "c_eye": e.c_eye,
                "c_fluc": e.c_fluc,
            }
            for e in p.script.entries
        ]
    return d


def _float(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _int(v, where: str) -> int:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    if isinstance(v, float) and v.is_integer():
        return int(v)
    if not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return v


def _vec2(v, where: str):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{where}: expected [x, y], got {v!r}")
    return (_float(v[0], where), _float(v[1], where))


# keep the file layout and the dataclass in step
assert {f.name for f in fields(ScenarioConfig)} == (
    set(_FLOAT_FIELDS + _INT_FIELDS + _TRUST_FIELDS)
    | {"lambda_", "goal", "ego_start", "pedestrians", "name", "grid_bounds", "reference_mode", "rho"}
), "configfile fields out of sync with ScenarioConfig"
