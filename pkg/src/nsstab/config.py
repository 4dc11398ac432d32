"""Run configuration: TOML documents, presets, flag overrides and validation.

A configuration has typed blocks::

    [problem]
    ell = 1.0
    eps = 0.1
    u_minus = 0.5
    u_plus = 1.0
    # v_minus omitted: taken from the stationary jump relation
    pressure = {type = "saint-venant", kappa = 1.0}
    viscosity = {type = "power", C = 1.0, a = 1.0}

    [scheme]
    N = 200
    T_final = 10.0

    [evolve]
    init = "tanh(0.25, 20)"

Flags override file keys; presets supply a complete starting document.
"""

from __future__ import annotations

import copy
import math
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import tomli

from .constitutive import (ConstantViscosity, Laws, PowerPressure, PowerViscosity,
                           check_pressure_law, check_viscosity_law, saint_venant_pressure)
from .errors import ConfigurationError, DegenerateJump, NSStabError
from .evolve import CLOSURES, LIMITERS, SchemeConfig
from .hyperbolic import compatible_boundary_data
from .problem import BoundaryData

MODES = ("steady", "evolve", "sigma-map", "hyperbolic-check", "figures")
OUTPUT_ROOT_ENV = "NSSTAB_OUTPUT_ROOT"

_FIG4_PROBLEM = {
    "ell": 1.0, "eps": 0.1, "u_minus": 0.5, "u_plus": 1.0,
    "pressure": {"type": "saint-venant", "kappa": 1.0},
    "viscosity": {"type": "power", "C": 1.0, "a": 1.0},
}

PRESETS: Dict[str, dict] = {
    # f(u) for several alpha and a trajectory stopped at u2
    "fig1": {"problem": dict(_FIG4_PROBLEM), "figure": {"name": "fig1"}},
    # g(w) for three viscosities at kappa=1, alpha=400, v*^2=1000
    "fig2": {
        "problem": dict(_FIG4_PROBLEM),
        "figure": {"name": "fig2", "alpha": 400.0, "v_star_sq": 1000.0,
                   "viscosities": [{"type": "power", "C": 1.0, "a": 1.0},
                                   {"type": "power", "C": 0.5, "a": 0.5},
                                   {"type": "power", "C": 2.0, "a": 2.0}]},
    },
    # stationary connection in the phase plane and in x
    "fig3": {"problem": dict(_FIG4_PROBLEM), "figure": {"name": "fig3"}},
    # relaxation of a tanh front towards the steady state
    "fig4": {
        "problem": dict(_FIG4_PROBLEM),
        "scheme": {"N": 200, "T_final": 10.0},
        "evolve": {"init": "tanh(0.25, 20)"},
        "figure": {"name": "fig4"},
    },
}

_PROBLEM_KEYS = {"ell", "eps", "u_minus", "u_plus", "v_minus", "pressure", "viscosity"}
_SCHEME_KEYS = {f for f in SchemeConfig.__dataclass_fields__}
_EVOLVE_KEYS = {"init", "amplitude", "delta1", "delta2", "compare_closures"}
_TOP_KEYS = {"problem", "scheme", "evolve", "sigma_map", "jump", "figure", "seed", "output"}

_INIT_RE = re.compile(r"^\s*(steady|tanh|perturbed-steady|file)\s*(?:\((.*)\))?\s*$")


@dataclass
class InitSpec:
    kind: str = "tanh"  # steady | tanh | perturbed-steady | file
    args: tuple = (0.25, 20.0)
    path: Optional[str] = None


@dataclass
class RunConfig:
    mode: str
    boundary: BoundaryData
    laws: Laws
    scheme: SchemeConfig
    init: InitSpec
    seed: int = 0
    out: Optional[Path] = None
    preset: Optional[str] = None
    h2_from_jump: bool = True
    delta1: float = 0.6
    delta2: float = 5.0
    compare_closures: bool = False
    sigma_map: dict = field(default_factory=dict)
    jump: dict = field(default_factory=dict)
    figure: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict)  # resolved key-value document

    def resolved(self) -> dict:
        doc = copy.deepcopy(self.document)
        doc["mode"] = self.mode
        doc["problem"]["v_minus"] = self.boundary.v_minus
        doc["scheme"] = asdict(self.scheme)
        return doc


def parse_init(text: str) -> InitSpec:
    """``steady``, ``tanh(a, b)``, ``perturbed-steady(amplitude)`` or ``file(path)``."""
    m = _INIT_RE.match(str(text))
    if not m:
        raise ConfigurationError(f"evolve.init: cannot parse {text!r}")
    kind, inner = m.group(1), m.group(2)
    if kind == "file":
        if not inner:
            raise ConfigurationError("evolve.init: file(...) needs a path")
        return InitSpec("file", (), inner.strip().strip("'\""))
    try:
        args = tuple(float(a) for a in inner.split(",")) if inner and inner.strip() else ()
    except ValueError:
        raise ConfigurationError(f"evolve.init: non-numeric arguments in {text!r}") from None
    expected = {"steady": (0,), "tanh": (0, 2), "perturbed-steady": (0, 1)}[kind]
    if len(args) not in expected:
        raise ConfigurationError(f"evolve.init: {kind} takes {max(expected)} arguments")
    if kind == "tanh" and not args:
        args = (0.25, 20.0)
    if kind == "perturbed-steady" and not args:
        args = (0.01,)
    return InitSpec(kind, args)


def pressure_from_spec(spec: Any, key: str = "problem.pressure"):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigurationError(f"{key}: expected a table with a 'type' entry")
    kind = spec["type"]
    extra = set(spec) - {"type", "kappa", "gamma"}
    if extra:
        raise ConfigurationError(f"{key}: unknown entries {sorted(extra)}")
    try:
        if kind == "saint-venant":
            if "gamma" in spec:
                raise ConfigurationError(f"{key}: saint-venant fixes gamma = 2")
            law = saint_venant_pressure(float(spec.get("kappa", 1.0)))
        elif kind == "power":
            law = PowerPressure(float(spec.get("kappa", 1.0)), float(spec["gamma"]))
        else:
            raise ConfigurationError(f"{key}.type: unknown pressure type {kind!r}")
    except KeyError as exc:
        raise ConfigurationError(f"{key}.{exc.args[0]}: missing") from None
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: entries must be numbers") from None
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc).replace("pressure:", f"{key}:", 1)) from None
    check_pressure_law(law)
    return law


def viscosity_from_spec(spec: Any, key: str = "problem.viscosity"):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigurationError(f"{key}: expected a table with a 'type' entry")
    kind = spec["type"]
    try:
        if kind == "power":
            extra = set(spec) - {"type", "C", "a"}
            law = PowerViscosity(float(spec.get("C", 1.0)), float(spec.get("a", 1.0)))
        elif kind == "constant":
            extra = set(spec) - {"type", "c"}
            law = ConstantViscosity(float(spec.get("c", 1.0)))
        else:
            raise ConfigurationError(f"{key}.type: unknown viscosity type {kind!r}")
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: entries must be numbers") from None
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc).replace("viscosity:", f"{key}:", 1)) from None
    if extra:
        raise ConfigurationError(f"{key}: unknown entries {sorted(extra)}")
    check_viscosity_law(law)
    return law


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("pressure", "viscosity"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_document(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def _positive(doc, block, key, problems, required=True):
    if key not in doc:
        if required:
            problems.append(f"{block}.{key}: missing")
        return None
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        problems.append(f"{block}.{key}: must be a number")
        return None
    if not (val > 0 and math.isfinite(val)):
        problems.append(f"{block}.{key}: must be positive, got {val}")
        return None
    return float(val)


def build_config(doc: dict, mode: str, preset: Optional[str] = None,
                 out: Optional[str] = None) -> RunConfig:
    """Validate a key-value document; every violation is reported at once."""
    if mode not in MODES:
        raise ConfigurationError(f"mode: must be one of {MODES}")
    problems = []
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        problems.append(f"unknown top-level keys {sorted(unknown)}")
    prob = doc.get("problem")
    if not isinstance(prob, dict):
        raise ConfigurationError("problem: missing block")
    unknown = set(prob) - _PROBLEM_KEYS
    if unknown:
        problems.append(f"problem: unknown keys {sorted(unknown)}")
    ell = _positive(prob, "problem", "ell", problems)
    eps = _positive(prob, "problem", "eps", problems)
    um = _positive(prob, "problem", "u_minus", problems)
    up = _positive(prob, "problem", "u_plus", problems)
    vm = _positive(prob, "problem", "v_minus", problems, required=False)
    pressure = viscosity = None
    for key, builder in (("pressure", pressure_from_spec), ("viscosity", viscosity_from_spec)):
        if key not in prob:
            problems.append(f"problem.{key}: missing")
            continue
        try:
            law = builder(prob[key], f"problem.{key}")
        except ConfigurationError as exc:
            problems.append(str(exc))
            continue
        if key == "pressure":
            pressure = law
        else:
            viscosity = law
    if um is not None and up is not None and mode in ("steady", "evolve") and not um < up:
        problems.append("problem.u_minus: must be below problem.u_plus for a connection")

    sch = doc.get("scheme", {})
    unknown = set(sch) - _SCHEME_KEYS
    if unknown:
        problems.append(f"scheme: unknown keys {sorted(unknown)}")
    scheme = None
    try:
        scheme = SchemeConfig(**{k: v for k, v in sch.items() if k in _SCHEME_KEYS})
    except NSStabError as exc:
        problems.extend(f"scheme: {p}" for p in str(exc).split("; "))
    except TypeError as exc:
        problems.append(f"scheme: {exc}")

    ev = doc.get("evolve", {})
    unknown = set(ev) - _EVOLVE_KEYS
    if unknown:
        problems.append(f"evolve: unknown keys {sorted(unknown)}")
    init = InitSpec()
    try:
        init = parse_init(ev.get("init", "tanh(0.25, 20)"))
    except ConfigurationError as exc:
        problems.append(str(exc))
    delta1 = _positive(ev, "evolve", "delta1", problems, required=False) or 0.6
    delta2 = _positive(ev, "evolve", "delta2", problems, required=False) or 5.0

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        problems.append("seed: must be a non-negative integer")
        seed = 0

    v_from_jump = vm is None
    if not problems and v_from_jump:
        try:
            vm, verdict = compatible_boundary_data(um, up, pressure)
        except DegenerateJump:
            problems.append("problem.v_minus: required when u_minus == u_plus")
        else:
            if not (vm > 0 and math.isfinite(vm)):
                problems.append("problem.v_minus: no positive momentum satisfies the jump "
                                "relation for these densities; give v_minus explicitly")
    if problems:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(problems))

    boundary = BoundaryData(ell, eps, um, up, vm)
    resolved_doc = copy.deepcopy(doc)
    resolved_doc.setdefault("scheme", {})
    return RunConfig(
        mode=mode, boundary=boundary, laws=Laws(pressure, viscosity), scheme=scheme, init=init,
        seed=seed, out=Path(out) if out else None, preset=preset, h2_from_jump=v_from_jump,
        delta1=delta1, delta2=delta2, compare_closures=bool(ev.get("compare_closures", False)),
        sigma_map=dict(doc.get("sigma_map", {})), jump=dict(doc.get("jump", {})),
        figure=dict(doc.get("figure", {})), document=resolved_doc,
    )


def parse_config(mode: str, path=None, preset: Optional[str] = None,
                 overrides: Optional[dict] = None, out: Optional[str] = None) -> RunConfig:
    """Preset, then file, then flag overrides, merged in that order."""
    doc: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"preset: unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        doc = copy.deepcopy(PRESETS[preset])
    if path is not None:
        doc = _merge(doc, load_document(path))
    if overrides:
        doc = _merge(doc, overrides)
    if not doc:
        raise ConfigurationError("no configuration: give --config or --preset")
    return build_config(doc, mode, preset=preset, out=out)


def output_dir(cfg: RunConfig, config_path=None) -> Path:
    """``--out`` if given, else ``$NSSTAB_OUTPUT_ROOT/<mode>-<name>`` (default root ``nsstab-out``)."""
    if cfg.out is not None:
        return cfg.out
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "nsstab-out"))
    name = cfg.preset or (Path(config_path).stem if config_path else "run")
    return root / f"{cfg.mode}-{name}"
