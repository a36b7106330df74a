"""Run configuration: a strict JSON document.

Complex numbers are ``[re, im]`` pairs (plain reals are accepted on input),
matrices are row-major nested arrays.  Unknown keys are rejected.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace

from .exceptions import ConfigParseError, ConfigValidationError

MODES = ("example", "verify", "generate", "readout")
BUILTINS = ("paper_example", "degenerate_free")

DEFAULT_TOLERANCES = {
    "infidelity": 1e-7,
    "tdse_rtol": 1e-4,
    "norm_drift": 1e-8,
}
DEFAULT_OUTPUT = {
    "dir": None,
    "csv": "trajectory.csv",
    "json": "potentials.json",
    "export": "export.json",
    "report": "report.json",
    "readout_csv": "readout.csv",
}


@dataclass(frozen=True)
class GridConfig:
    start: float = 0.0
    stop: float = 2 * math.pi
    points: int = 2001


@dataclass(frozen=True)
class EigenstateConfig:
    energy_index: int = 0
    coefficients: tuple = None


@dataclass(frozen=True)
class ReadoutConfig:
    observable: tuple = None
    observed_value: float = None


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.  Complex data is held in nested tuples."""

    mode: str = "example"
    spec: dict = field(default_factory=lambda: {"builtin": "paper_example"})
    eigenstate: EigenstateConfig = None
    chi0: tuple = None
    grid: GridConfig = GridConfig()
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    readout: ReadoutConfig = ReadoutConfig()
    output: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUT))
    seed: int = 0
    threads: int = 1


def _fail(msg):
    raise ConfigValidationError(msg)


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        _fail(f"{where} must be an object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        _fail(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        _fail(f"{where} must be a finite number")
    return float(x)


def _integer(x, where):
    if isinstance(x, bool) or not isinstance(x, int):
        _fail(f"{where} must be an integer")
    return x


def _complex(x, where):
    if isinstance(x, list):
        if len(x) != 2:
            _fail(f"{where} must be a number or an [re, im] pair")
        return complex(_number(x[0], where), _number(x[1], where))
    return complex(_number(x, where), 0.0)


def _cvector(x, where):
    if not isinstance(x, list) or not x:
        _fail(f"{where} must be a non-empty array")
    return tuple(_complex(v, f"{where}[{i}]") for i, v in enumerate(x))


def _cmatrix(x, where):
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        _fail(f"{where} must be a non-empty array of rows")
    rows = tuple(_cvector(r, f"{where}[{i}]") for i, r in enumerate(x))
    if len({len(r) for r in rows}) != 1:
        _fail(f"{where} has ragged rows")
    return rows


def _parse_spec(obj):
    if not isinstance(obj, dict):
        _fail("spec must be an object")
    if "builtin" in obj:
        _check_keys(obj, ("builtin",), "spec")
        if obj["builtin"] not in BUILTINS:
            _fail(f"unknown builtin spec {obj['builtin']!r}; choose from {', '.join(BUILTINS)}")
        return {"builtin": obj["builtin"]}
    if "random" in obj:
        _check_keys(obj, ("random",), "spec")
        r = obj["random"]
        _check_keys(r, ("d_system", "d_clock", "coupling_strength"), "spec.random")
        out = {
            "d_system": _integer(r.get("d_system", 2), "spec.random.d_system"),
            "d_clock": _integer(r.get("d_clock", 4), "spec.random.d_clock"),
            "coupling_strength": _number(r.get("coupling_strength", 0.5), "spec.random.coupling_strength"),
        }
        if out["d_system"] < 1 or out["d_clock"] < 1 or out["coupling_strength"] < 0:
            _fail("spec.random needs positive dimensions and coupling_strength >= 0")
        return {"random": out}
    _check_keys(obj, ("h_system", "h_clock", "v_interaction"), "spec")
    missing = [k for k in ("h_system", "h_clock", "v_interaction") if k not in obj]
    if missing:
        _fail(f"inline spec is missing {', '.join(missing)}")
    return {k: _cmatrix(obj[k], f"spec.{k}") for k in ("h_system", "h_clock", "v_interaction")}


def config_from_dict(doc):
    """Validate a decoded JSON object into a :class:`RunConfig`."""
    _check_keys(doc, ("mode", "spec", "eigenstate", "chi0", "grid", "tolerances", "readout", "output", "seed",
                      "threads"), "config")
    mode = doc.get("mode", "example")
    if mode not in MODES:
        _fail(f"mode must be one of {', '.join(MODES)}")

    spec = _parse_spec(doc.get("spec", {"builtin": "paper_example"}))

    eig = None
    if doc.get("eigenstate") is not None:
        e = doc["eigenstate"]
        _check_keys(e, ("energy_index", "coefficients"), "eigenstate")
        coeffs = e.get("coefficients")
        eig = EigenstateConfig(
            _integer(e.get("energy_index", 0), "eigenstate.energy_index"),
            None if coeffs is None else _cvector(coeffs, "eigenstate.coefficients"),
        )

    chi0 = None if doc.get("chi0") is None else _cvector(doc["chi0"], "chi0")

    g = doc.get("grid", {})
    _check_keys(g, ("start", "stop", "points"), "grid")
    grid = GridConfig(
        _number(g.get("start", 0.0), "grid.start"),
        _number(g.get("stop", 2 * math.pi), "grid.stop"),
        _integer(g.get("points", 2001), "grid.points"),
    )
    if grid.points < 2:
        _fail("grid.points must be at least 2")
    if not grid.stop > grid.start:
        _fail("grid.stop must exceed grid.start")

    t = doc.get("tolerances", {})
    _check_keys(t, DEFAULT_TOLERANCES, "tolerances")
    tolerances = {k: _number(t.get(k, v), f"tolerances.{k}") for k, v in DEFAULT_TOLERANCES.items()}
    if any(v <= 0 for v in tolerances.values()):
        _fail("tolerances must be positive")

    r = doc.get("readout", {})
    _check_keys(r, ("observable", "observed_value"), "readout")
    readout = ReadoutConfig(
        None if r.get("observable") is None else _cmatrix(r["observable"], "readout.observable"),
        None if r.get("observed_value") is None else _number(r["observed_value"], "readout.observed_value"),
    )

    o = doc.get("output", {})
    _check_keys(o, DEFAULT_OUTPUT, "output")
    output = dict(DEFAULT_OUTPUT)
    for k, v in o.items():
        if v is not None and not isinstance(v, str):
            _fail(f"output.{k} must be a string")
        output[k] = v

    seed = _integer(doc.get("seed", 0), "seed")
    threads = _integer(doc.get("threads", 1), "threads")
    if threads < 1:
        _fail("threads must be >= 1")

    return RunConfig(mode, spec, eig, chi0, grid, tolerances, readout, output, seed, threads)


def parse_config(text):
    """Parse and validate a JSON configuration document.

    Malformed JSON raises :class:`ConfigParseError`; well-formed documents
    with invalid content raise :class:`ConfigValidationError`.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigParseError(f"config is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"malformed config: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigParseError("config must be a JSON object")
    return config_from_dict(doc)


def _encode(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, tuple):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    return value


def config_to_dict(cfg):
    doc = {
        "mode": cfg.mode,
        "spec": _encode(cfg.spec),
        "grid": asdict(cfg.grid),
        "tolerances": dict(cfg.tolerances),
        "output": {k: v for k, v in cfg.output.items()},
        "seed": cfg.seed,
        "threads": cfg.threads,
    }
    if cfg.eigenstate is not None:
        doc["eigenstate"] = {"energy_index": cfg.eigenstate.energy_index,
                             "coefficients": _encode(cfg.eigenstate.coefficients)}
    if cfg.chi0 is not None:
        doc["chi0"] = _encode(cfg.chi0)
    if cfg.readout.observable is not None or cfg.readout.observed_value is not None:
        doc["readout"] = {"observable": _encode(cfg.readout.observable),
                          "observed_value": cfg.readout.observed_value}
    return doc


def serialize_config(cfg):
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def with_overrides(cfg, **changes):
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
