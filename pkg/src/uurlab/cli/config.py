"""Experiment configuration: a single JSON document per run.

A config has the top-level keys ``kind`` (required), ``seed``,
``output_dir`` and ``parameters``.  Parameters are kind-specific; anything
omitted takes the default listed in :data:`DEFAULTS`.  Angles in a config are
in degrees.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..checks import CHECKS
from ..interferometer import CONVENTIONS, DEFAULT_CONVENTION

KINDS = ("verify", "fig3", "fig4", "musmap", "otoc", "fit-csv")
TOP_LEVEL_KEYS = ("kind", "seed", "output_dir", "parameters")

DEFAULTS = {
    "verify": {"checks": list(range(1, len(CHECKS) + 1))},
    "fig3": {
        "n_points": 13, "side_min_deg": 10.0, "side_max_deg": 120.0,
        "counts_scale": 4000.0, "phase_points": 24,
    },
    "fig4": {
        "stack_u": [36.0, 0.0], "stack_v": [0.0, 36.0],
        "h_start_deg": 0.0, "h_stop_deg": 90.0, "h_step_deg": 1.0,
        "counts_scale": 4000.0, "phase_points": 24, "waveplate_error_deg": 0.0,
        "convention_id": DEFAULT_CONVENTION, "mus_resolution": 64,
    },
    "musmap": {
        "u_axis": [0.0, 1.0, 0.0], "u_angle_deg": 45.0,
        "v_axis": [0.0, 0.0, 1.0], "v_angle_deg": 45.0,
        "resolution": 64,
    },
    "otoc": {"dim": 2, "t_start": 0.0, "t_stop": 5.0, "n_times": 51},
    "fit-csv": {"files": None, "counts_scale": None, "assume_pure": False},
}

REQUIRED = {"fit-csv": ("files",)}


class ConfigError(ValueError):
    """Base class for configuration problems; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConfigParseError(ConfigError):
    pass


class UnknownKeyError(ConfigError):
    pass


class MissingFieldError(ConfigError):
    pass


class ConfigValidationError(ConfigError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    seed: int = 0
    output_dir: str = ""
    parameters: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "seed": self.seed, "output_dir": self.output_dir,
                "parameters": json.loads(json.dumps(self.parameters))}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def with_overrides(self, seed=None, output_dir=None):
        data = self.to_dict()
        if seed is not None:
            data["seed"] = seed
        if output_dir is not None:
            data["output_dir"] = str(output_dir)
        return spec_from_dict(data)


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _number(params, key, positive=False, nonnegative=False, integer=False, minimum=None):
    x = params[key]
    if integer:
        if not isinstance(x, int) or isinstance(x, bool):
            raise ConfigValidationError(f"parameters.{key} must be an integer, got {x!r}", key)
    elif not _is_number(x):
        raise ConfigValidationError(f"parameters.{key} must be a number, got {x!r}", key)
    if positive and x <= 0:
        raise ConfigValidationError(f"parameters.{key} must be positive, got {x!r}", key)
    if nonnegative and x < 0:
        raise ConfigValidationError(f"parameters.{key} must be non-negative, got {x!r}", key)
    if minimum is not None and x < minimum:
        raise ConfigValidationError(f"parameters.{key} must be at least {minimum}, got {x!r}", key)
    params[key] = x if integer else float(x)


def _vector(params, key, length):
    x = params[key]
    if not isinstance(x, list) or len(x) != length or not all(_is_number(v) for v in x):
        raise ConfigValidationError(f"parameters.{key} must be a list of {length} numbers, got {x!r}", key)
    params[key] = [float(v) for v in x]


def _validate(kind, p):
    if kind == "verify":
        checks = p["checks"]
        valid = range(1, len(CHECKS) + 1)
        if not isinstance(checks, list) or not checks or not all(isinstance(c, int) and c in valid for c in checks):
            raise ConfigValidationError(f"parameters.checks must be a non-empty list drawn from 1..{len(CHECKS)}",
                                        "checks")
        p["checks"] = sorted(set(checks))
    elif kind == "fig3":
        _number(p, "n_points", integer=True, minimum=2)
        _number(p, "side_min_deg", positive=True)
        _number(p, "side_max_deg", positive=True)
        _number(p, "counts_scale", positive=True)
        _number(p, "phase_points", integer=True, minimum=8)
        if not p["side_min_deg"] < p["side_max_deg"] < 180:
            raise ConfigValidationError("parameters.side_max_deg must exceed side_min_deg and stay below 180",
                                        "side_max_deg")
    elif kind == "fig4":
        _vector(p, "stack_u", 2)
        _vector(p, "stack_v", 2)
        for key in ("h_start_deg", "h_stop_deg"):
            _number(p, key)
        _number(p, "h_step_deg", positive=True)
        _number(p, "counts_scale", positive=True)
        _number(p, "phase_points", integer=True, minimum=8)
        _number(p, "waveplate_error_deg", nonnegative=True)
        _number(p, "mus_resolution", integer=True, minimum=32)
        if p["h_stop_deg"] <= p["h_start_deg"]:
            raise ConfigValidationError("parameters.h_stop_deg must exceed h_start_deg", "h_stop_deg")
        if p["convention_id"] not in CONVENTIONS:
            raise ConfigValidationError(f"parameters.convention_id must be one of {sorted(CONVENTIONS)}",
                                        "convention_id")
    elif kind == "musmap":
        for key in ("u_axis", "v_axis"):
            _vector(p, key, 3)
            if not any(p[key]):
                raise ConfigValidationError(f"parameters.{key} must be non-zero", key)
        _number(p, "u_angle_deg")
        _number(p, "v_angle_deg")
        _number(p, "resolution", integer=True, minimum=32)
    elif kind == "otoc":
        _number(p, "dim", integer=True, minimum=2)
        _number(p, "t_start")
        _number(p, "t_stop")
        _number(p, "n_times", integer=True, minimum=1)
        if p["t_stop"] < p["t_start"]:
            raise ConfigValidationError("parameters.t_stop must not be below t_start", "t_stop")
    elif kind == "fit-csv":
        files = p["files"]
        if not isinstance(files, list) or not files or not all(isinstance(f, str) for f in files):
            raise ConfigValidationError("parameters.files must be a non-empty list of paths", "files")
        if p["counts_scale"] is not None:
            _number(p, "counts_scale", positive=True)
        if not isinstance(p["assume_pure"], bool):
            raise ConfigValidationError("parameters.assume_pure must be true or false", "assume_pure")


def spec_from_dict(data):
    """Default and validate a parsed config document."""
    if not isinstance(data, dict):
        raise ConfigParseError("the config must be a JSON object")
    unknown = sorted(set(data) - set(TOP_LEVEL_KEYS))
    if unknown:
        raise UnknownKeyError(f"unknown top-level key(s): {', '.join(unknown)}", unknown[0])
    if "kind" not in data:
        raise MissingFieldError("missing required field 'kind'", "kind")
    kind = data["kind"]
    if kind not in KINDS:
        raise ConfigValidationError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}", "kind")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigValidationError(f"seed must be a non-negative integer, got {seed!r}", "seed")
    output_dir = data.get("output_dir", f"uurlab-out/{kind}")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigValidationError("output_dir must be a non-empty string", "output_dir")
    given = data.get("parameters", {})
    if not isinstance(given, dict):
        raise ConfigValidationError("parameters must be a JSON object", "parameters")
    unknown = sorted(set(given) - set(DEFAULTS[kind]))
    if unknown:
        raise UnknownKeyError(f"unknown parameter(s) for kind {kind!r}: {', '.join(unknown)}", unknown[0])
    for key in REQUIRED.get(kind, ()):
        if given.get(key) is None:
            raise MissingFieldError(f"missing required parameter '{key}' for kind {kind!r}", key)
    params = json.loads(json.dumps(DEFAULTS[kind]))
    params.update(json.loads(json.dumps(given)))
    _validate(kind, params)
    return ExperimentSpec(kind=kind, seed=seed, output_dir=output_dir, parameters=params)


def ingest_config(path):
    """Read, default and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigParseError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return spec_from_dict(data)
