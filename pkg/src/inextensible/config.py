"""Scenario configuration: YAML schema, defaults and validation.

Schema (every key optional unless marked; defaults in DEFAULTS):

    model:
      variant: beam-eta2          # required; beam-eta2 | beam-eta4 | plate-I | plate-II | plate-III
      params: {length: 1.0, stiffness: 1.0}   # or {lx, ly, thickness, young, poisson}
    basis: {nx: 6, ny: 1, nqx: null, nqy: null}
    initial:
      mode: 0                     # clamped-free x-mode index
      amplitude: 0.0              # tip deflection of the initial shape
      velocity: 0.0               # tip velocity of the initial shape
      file: null                  # CSV with columns x[,y],w[,w_t]; replaces mode/amplitude
    integrator:
      dt: 0.01
      t_end: 1.0
      scheme: implicit-midpoint-projected   # or explicit-rk4-reduced
      constraint_mode: null       # multiplier | reduced; null picks the scheme's natural mode
      newton_tol: 1.0e-11
    load: {kind: tip, magnitude: 0.0}
    modes: {count: 4}
    output:
      dir: out
      probes: []                  # [[x], ...] or [[x, y], ...]; w histories
      snapshots: []               # times of field snapshots (nearest step)
      formats: [csv, json, svg]
      seed: 0
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .core import ConfigError, InextError, ModelSpec, UnsupportedMode, Variant, make_model
from .dynamics import MULTIPLIER, REDUCED, RK4, SCHEMES, check_mode
from .statics import LOAD_KINDS, LoadSpec

DEFAULTS = {
    "model": {"params": {}},
    "basis": {"nx": 6, "ny": 1, "nqx": None, "nqy": None},
    "initial": {"mode": 0, "amplitude": 0.0, "velocity": 0.0, "file": None},
    "integrator": {"dt": 0.01, "t_end": 1.0, "scheme": "implicit-midpoint-projected",
                   "constraint_mode": None, "newton_tol": 1e-11},
    "load": {"kind": "tip", "magnitude": 0.0},
    "modes": {"count": 4},
    "output": {"dir": "out", "probes": [], "snapshots": [], "formats": ["csv", "json", "svg"],
               "seed": 0},
}
FORMATS = ("csv", "json", "svg")


@dataclass
class ScenarioConfig:
    model: ModelSpec
    nx: int
    ny: int
    nqx: int | None
    nqy: int | None
    initial_mode: int
    amplitude: float
    velocity: float
    initial_file: Path | None
    dt: float
    t_end: float
    scheme: str
    constraint_mode: str
    newton_tol: float
    load: LoadSpec
    n_modes: int
    out_dir: Path
    probes: list
    snapshots: list
    formats: list
    seed: int
    effective: dict = field(default_factory=dict)
    defaults_used: list = field(default_factory=list)
    source: Path | None = None

    def config_hash(self) -> str:
        """sha256 of the canonical effective configuration (output dir excluded)."""
        eff = copy.deepcopy(self.effective)
        eff.get("output", {}).pop("dir", None)
        if self.initial_file is not None:
            eff["initial"]["file_sha256"] = hashlib.sha256(self.initial_file.read_bytes()).hexdigest()
            eff["initial"]["file"] = self.initial_file.name
        text = json.dumps(eff, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _line_map(node, prefix="", out=None) -> dict:
    """Dotted key path -> 1-based source line, from a composed YAML node tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _line_map(v, path, out)
    return out


class _Checker:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, path: str, msg: str):
        line = self.lines.get(path)
        where = f"{path} (line {line})" if line else path
        raise ConfigError(f"{where}: {msg}")

    def number(self, path, value, positive=False, integer=False, minimum=None):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        if integer and int(value) != value:
            self.fail(path, f"expected an integer, got {value!r}")
        if not math.isfinite(value):
            self.fail(path, "must be finite")
        if positive and value <= 0:
            self.fail(path, f"must be positive, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value!r}")
        return int(value) if integer else float(value)


def _merge(raw: dict, chk: _Checker) -> tuple:
    eff = copy.deepcopy(DEFAULTS)
    used = []
    for section, body in raw.items():
        if section not in DEFAULTS:
            chk.fail(section, f"unknown section; expected one of {sorted(DEFAULTS)}")
        if body is None:
            continue
        if not isinstance(body, dict):
            chk.fail(section, "expected a mapping")
        for key, value in body.items():
            if key not in DEFAULTS[section] and not (section == "model" and key == "variant"):
                chk.fail(f"{section}.{key}", "unknown key")
            eff[section][key] = value
    for section, body in DEFAULTS.items():
        for key, value in body.items():
            if key not in (raw.get(section) or {}):
                used.append(f"{section}.{key} = {json.dumps(value)}")
    return eff, used


def parse_config(text: str, base_dir: Path | None = None, source: Path | None = None) -> ScenarioConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ConfigError(f"{where}YAML parse error: {getattr(exc, 'problem', exc)}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    chk = _Checker(_line_map(node))
    eff, used = _merge(raw, chk)
    base_dir = base_dir or Path(".")

    m = eff["model"]
    if "variant" not in m:
        chk.fail("model.variant", "required")
    params = m.get("params") or {}
    if not isinstance(params, dict):
        chk.fail("model.params", "expected a mapping")
    try:
        model = make_model(m["variant"], params)
    except InextError as exc:
        chk.fail("model", str(exc))

    b = eff["basis"]
    nx = chk.number("basis.nx", b["nx"], integer=True, minimum=1)
    ny = chk.number("basis.ny", b["ny"], integer=True, minimum=1)
    if model.is_beam and ny != 1:
        chk.fail("basis.ny", "beams take ny = 1")
    nqx = None if b["nqx"] is None else chk.number("basis.nqx", b["nqx"], integer=True, minimum=nx)
    nqy = None if b["nqy"] is None else chk.number("basis.nqy", b["nqy"], integer=True, minimum=ny)

    ini = eff["initial"]
    mode = chk.number("initial.mode", ini["mode"], integer=True, minimum=0)
    if mode >= nx:
        chk.fail("initial.mode", f"must be below basis.nx = {nx}")
    amp = chk.number("initial.amplitude", ini["amplitude"])
    vel = chk.number("initial.velocity", ini["velocity"])
    ifile = None
    if ini["file"] is not None:
        ifile = (base_dir / str(ini["file"])).resolve()
        if not ifile.is_file():
            chk.fail("initial.file", f"file not found: {ifile}")

    it = eff["integrator"]
    dt = chk.number("integrator.dt", it["dt"], positive=True)
    t_end = chk.number("integrator.t_end", it["t_end"], positive=True)
    scheme = it["scheme"]
    if scheme not in SCHEMES:
        chk.fail("integrator.scheme", f"expected one of {SCHEMES}, got {scheme!r}")
    cmode = it["constraint_mode"]
    if cmode is None:
        cmode = REDUCED if scheme == RK4 else MULTIPLIER
    if cmode not in (MULTIPLIER, REDUCED):
        chk.fail("integrator.constraint_mode", f"expected multiplier or reduced, got {cmode!r}")
    tol = chk.number("integrator.newton_tol", it["newton_tol"], positive=True)
    try:
        check_mode(model, cmode, scheme)
    except UnsupportedMode as exc:
        # plate-III configs stay valid for static and modes; run reports the mode error
        if model.variant is not Variant.PLATE_III:
            line = chk.lines.get("integrator.scheme") or chk.lines.get("integrator")
            where = f" (line {line})" if line else ""
            raise UnsupportedMode(f"integrator.scheme{where}: {exc}") from None

    ld = eff["load"]
    if ld["kind"] not in LOAD_KINDS:
        chk.fail("load.kind", f"expected one of {LOAD_KINDS}, got {ld['kind']!r}")
    if model.is_beam and ld["kind"] == "edge":
        chk.fail("load.kind", "edge loads apply to plates")
    if not model.is_beam and ld["kind"] == "tip":
        if "load" in raw and "kind" in (raw["load"] or {}):
            chk.fail("load.kind", "tip loads apply to beams; use edge or pressure")
        ld["kind"] = "edge"
    load = LoadSpec(ld["kind"], chk.number("load.magnitude", ld["magnitude"]))

    n_modes = chk.number("modes.count", eff["modes"]["count"], integer=True, minimum=1)
    if n_modes > nx * ny:
        chk.fail("modes.count", f"must not exceed the modal dimension {nx * ny}")

    out = eff["output"]
    lengths = ([model.params.length] if model.is_beam else [model.params.lx, model.params.ly])
    probes = []
    if not isinstance(out["probes"], list):
        chk.fail("output.probes", "expected a list of points")
    for i, p in enumerate(out["probes"]):
        p = p if isinstance(p, list) else [p]
        if len(p) != len(lengths):
            chk.fail("output.probes", f"point {i} needs {len(lengths)} coordinate(s)")
        pts = [chk.number("output.probes", c) for c in p]
        if any(c < 0 or c > L for c, L in zip(pts, lengths)):
            chk.fail("output.probes", f"point {i} = {pts} lies outside the domain")
        probes.append(pts)
    if not isinstance(out["snapshots"], list):
        chk.fail("output.snapshots", "expected a list of times")
    snaps = [chk.number("output.snapshots", t) for t in out["snapshots"]]
    if any(t < 0 or t > t_end for t in snaps):
        chk.fail("output.snapshots", "snapshot times must lie in [0, t_end]")
    formats = out["formats"]
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        chk.fail("output.formats", f"expected a subset of {FORMATS}")
    seed = chk.number("output.seed", out["seed"], integer=True, minimum=0)

    eff["model"] = model.to_dict()
    eff["integrator"]["constraint_mode"] = cmode
    eff["load"] = {"kind": load.kind, "magnitude": load.magnitude}
    return ScenarioConfig(
        model=model, nx=nx, ny=ny, nqx=nqx, nqy=nqy, initial_mode=mode, amplitude=amp, velocity=vel,
        initial_file=ifile, dt=dt, t_end=t_end, scheme=scheme, constraint_mode=cmode, newton_tol=tol,
        load=load, n_modes=n_modes, out_dir=Path(str(out["dir"])), probes=probes, snapshots=snaps,
        formats=list(formats), seed=seed, effective=eff, defaults_used=used, source=source)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent, source=path)


def read_initial_file(path: Path) -> dict:
    """Columns of a tabulated initial field: x[, y], w[, w_t]."""
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except ValueError as exc:
        raise ConfigError(f"initial.file: cannot parse {path.name}: {exc}") from None
    names = data.dtype.names or ()
    if "x" not in names or "w" not in names:
        raise ConfigError(f"initial.file: {path.name} needs columns x and w")
    table = {k: np.atleast_1d(data[k]) for k in names}
    if not all(np.all(np.isfinite(v)) for v in table.values()):
        raise ConfigError(f"initial.file: {path.name} contains missing or non-finite values")
    return table
