"""Scenario documents (JSON) <-> :class:`ScenarioConfig`.

Document layout::

    {
      "a": "sigma_z⊗I",                      # preset, or [[[re, im], ...], ...]
      "b": "I⊗sigma_z",
      "pre": [[0.577.., 0], [0.577.., 0], [0.577.., 0], [0, 0]],   # or "|++>"
      "post": "|++>",
      "g": 0.01, "l": 2, "sigma": 1.0, "hbar": 1.0,
      "grid": {"n": 256, "extent": 27.71}
    }

``sigma``, ``hbar`` and ``grid`` are optional.  Observable presets are
``I``, ``sigma_x``, ``sigma_y``, ``sigma_z`` joined by ``⊗`` (or ``(x)``).
State presets are kets over ``0 1 + -`` such as ``"|0+>"``.
"""
from __future__ import annotations

import json
from functools import reduce
from importlib import resources

import numpy as np

from .errors import GridTooSmall, ParseError, ValidationError
from .evolution import ScenarioConfig
from .probe_field import CONTAINMENT, GridSpec
from .quantum_core import HERMITIAN_TOL, NORM_TOL, PAULI, Observable, SystemState

_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}
_REQUIRED = ("a", "b", "pre", "post", "g", "l")


def _complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ValidationError(f"{where}: expected a number or [re, im] pair")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ValidationError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _preset_observable(name: str, where: str) -> np.ndarray:
    tokens = [t.strip() for t in name.replace("(x)", "⊗").split("⊗")]
    try:
        mats = [PAULI[t] for t in tokens]
    except KeyError as exc:
        raise ValidationError(f"{where}: unknown observable preset {exc.args[0]!r}") from None
    return reduce(np.kron, mats)


def _observable(value, where: str) -> Observable:
    if isinstance(value, str):
        m = _preset_observable(value, where)
    elif isinstance(value, list) and value and all(isinstance(row, list) for row in value):
        m = np.array([[_complex(v, where) for v in row] for row in value])
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"{where} not a square matrix")
    else:
        raise ValidationError(f"{where}: expected preset name or matrix")
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValidationError(f"{where} not Hermitian")
    return Observable(m)


def _state(value, where: str) -> SystemState:
    if isinstance(value, str):
        label = value.strip()
        if not (label.startswith("|") and label.endswith(">")) or len(label) < 3:
            raise ValidationError(f"{where}: state preset must look like '|0+>'")
        try:
            v = reduce(np.kron, [_KETS[c] for c in label[1:-1]])
        except KeyError as exc:
            raise ValidationError(f"{where}: unknown ket symbol {exc.args[0]!r}") from None
    elif isinstance(value, list) and value:
        v = np.array([_complex(x, where) for x in value])
    else:
        raise ValidationError(f"{where}: expected a complex vector or ket preset")
    if abs(np.vdot(v, v).real - 1.0) > NORM_TOL:
        raise ValidationError(f"{where} not normalized (norm^2 = {np.vdot(v, v).real:.17g})")
    return SystemState(v)


def _number(doc: dict, key: str, kind=float):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{key}: expected a number, got {v!r}")
    if kind is int:
        if int(v) != v:
            raise ValidationError(f"{key}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be a JSON object")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise ValidationError(f"missing field(s): {', '.join(missing)}")
    a = _observable(doc["a"], "observable.a")
    b = _observable(doc["b"], "observable.b")
    pre = _state(doc["pre"], "state.pre")
    post = _state(doc["post"], "state.post")
    g = _number(doc, "g")
    l = _number(doc, "l", int)
    sigma = _number(doc, "sigma") if "sigma" in doc else 1.0
    hbar = _number(doc, "hbar") if "hbar" in doc else 1.0
    grid = None
    if "grid" in doc:
        gd = doc["grid"]
        if not isinstance(gd, dict) or "n" not in gd or "extent" not in gd:
            raise ValidationError("grid: expected {\"n\": ..., \"extent\": ...}")
        n = _number(gd, "n", int)
        if n % 2:
            raise ValidationError(f"grid.n must be even, got {n}")
        grid = GridSpec(n, _number(gd, "extent"))
    sc = ScenarioConfig(a=a, b=b, pre=pre, post=post, g=g, l=l, sigma=sigma, hbar=hbar, grid=grid)
    needed = CONTAINMENT * sc.sigma * np.sqrt(abs(sc.l) + 1)
    if sc.grid.extent < needed * (1 - 1e-12):
        raise GridTooSmall(f"grid.extent {sc.grid.extent:g} < {needed:g} required for l={sc.l}")
    return sc


def parse_scenario(text: bytes | str) -> ScenarioConfig:
    """Parse and validate a scenario document.

    Raises
    ------
    ParseError
        Malformed UTF-8 or JSON.
    ValidationError
        A type invariant fails; the message names the offending field.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"scenario is not UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scenario JSON: {exc}") from None
    return scenario_from_dict(doc)


def _pairs(values) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(values).ravel()]


def scenario_to_dict(sc: ScenarioConfig) -> dict:
    """Canonical form: explicit matrices and vectors as [re, im] pairs."""

    def matrix(o: Observable):
        return [_pairs(row) for row in o.entries]

    return {
        "a": matrix(sc.a),
        "b": matrix(sc.b),
        "pre": _pairs(sc.pre.amplitudes),
        "post": _pairs(sc.post.amplitudes),
        "g": sc.g,
        "l": sc.l,
        "sigma": sc.sigma,
        "hbar": sc.hbar,
        "grid": {"n": sc.grid.n, "extent": sc.grid.extent},
    }


def dump_scenario(sc: ScenarioConfig) -> str:
    return json.dumps(scenario_to_dict(sc), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def bundled(name: str) -> bytes:
    """Raw bytes of a scenario shipped with the package, e.g. ``"pauli_zz"``."""
    return resources.files("lgweak.scenarios").joinpath(f"{name}.json").read_bytes()


def load_bundled(name: str) -> ScenarioConfig:
    return parse_scenario(bundled(name))
