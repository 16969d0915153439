"""Parameter, model and field containers shared by the rest of the package."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np


class InextError(Exception):
    """Base class for package errors."""


class ParameterError(InextError, ValueError):
    pass


class NuOutOfRange(ParameterError):
    pass


class VariantMismatch(ParameterError):
    pass


class SlopeTooLarge(InextError, ValueError):
    pass


class MissingField(InextError, KeyError):
    pass


class MissingMultiplier(InextError, ValueError):
    pass


class UnsupportedMode(InextError, ValueError):
    pass


class NewtonDivergence(InextError, RuntimeError):
    def __init__(self, message, trace=(), step_index=None):
        super().__init__(message)
        self.trace = list(trace)
        self.step_index = step_index


class ProjectionFailure(InextError, RuntimeError):
    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class ContinuationStall(InextError, RuntimeError):
    def __init__(self, message, last_level=0.0, last_report=None):
        super().__init__(message)
        self.last_level = last_level
        self.last_report = last_report


class ConfigError(InextError, ValueError):
    pass


class Variant(str, enum.Enum):
    BEAM_ETA2 = "beam-eta2"
    BEAM_ETA4 = "beam-eta4"
    PLATE_I = "plate-I"
    PLATE_II = "plate-II"
    PLATE_III = "plate-III"

    @property
    def is_beam(self) -> bool:
        return self in (Variant.BEAM_ETA2, Variant.BEAM_ETA4)

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, Variant):
            return value
        text = str(value).strip()
        for v in cls:
            if text.lower() in (v.value.lower(), v.name.lower(), v.name.replace("_", "").lower()):
                return v
        aliases = {"beameta2": cls.BEAM_ETA2, "beameta4": cls.BEAM_ETA4,
                   "platei": cls.PLATE_I, "plateii": cls.PLATE_II, "plateiii": cls.PLATE_III}
        key = text.replace("-", "").replace("_", "").lower()
        if key in aliases:
            return aliases[key]
        raise ParameterError(f"unknown model variant {value!r}")


def _positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
    return value


def plate_stiffness(young: float, thickness: float, poisson: float) -> float:
    """D = E h^2 / (12 (1 - nu^2)); the squared thickness is deliberate."""
    return young * thickness ** 2 / (12.0 * (1.0 - poisson ** 2))


@dataclass(frozen=True)
class BeamParams:
    length: float = 1.0
    stiffness: float = 1.0
    order: str = "eta2"

    def __post_init__(self):
        object.__setattr__(self, "length", _positive("length", self.length))
        object.__setattr__(self, "stiffness", _positive("stiffness", self.stiffness))
        if self.order not in ("eta2", "eta4"):
            raise ParameterError(f"order must be 'eta2' or 'eta4', got {self.order!r}")


@dataclass(frozen=True)
class PlateParams:
    lx: float = 1.0
    ly: float = 1.0
    thickness: float = 0.1
    young: float = 1.0
    poisson: float = 0.3
    stiffness: float = field(init=False)

    def __post_init__(self):
        for name in ("lx", "ly", "thickness", "young"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        try:
            nu = float(self.poisson)
        except (TypeError, ValueError):
            raise ParameterError(f"poisson must be a number, got {self.poisson!r}") from None
        if not (0.0 < nu < 0.5):
            raise NuOutOfRange(f"poisson ratio must lie in (0, 1/2), got {nu!r}")
        object.__setattr__(self, "poisson", nu)
        object.__setattr__(self, "stiffness", plate_stiffness(self.young, self.thickness, nu))


@dataclass(frozen=True)
class ModelSpec:
    variant: Variant
    params: BeamParams | PlateParams

    def __post_init__(self):
        want = BeamParams if self.variant.is_beam else PlateParams
        if not isinstance(self.params, want):
            raise VariantMismatch(
                f"{self.variant.value} needs {want.__name__}, got {type(self.params).__name__}")
        if self.variant.is_beam:
            order = "eta2" if self.variant is Variant.BEAM_ETA2 else "eta4"
            if self.params.order != order:
                raise VariantMismatch(
                    f"{self.variant.value} expects order {order!r}, params carry {self.params.order!r}")

    @property
    def is_beam(self) -> bool:
        return self.variant.is_beam

    @property
    def stiffness(self) -> float:
        return self.params.stiffness

    def to_dict(self) -> dict:
        d = asdict(self.params)
        if not self.is_beam:
            d.pop("stiffness")
        return {"variant": self.variant.value, "params": d}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelSpec":
        return make_model(data["variant"], data.get("params", {}))


_BEAM_KEYS = {"length": "length", "l": "length", "L": "length", "stiffness": "stiffness",
              "d": "stiffness", "D": "stiffness", "order": "order"}
_PLATE_KEYS = {"lx": "lx", "Lx": "lx", "L_x": "lx", "ly": "ly", "Ly": "ly", "L_y": "ly",
               "thickness": "thickness", "h": "thickness", "young": "young", "E": "young",
               "poisson": "poisson", "nu": "poisson"}


def make_model(variant, params: Mapping | None = None, **kwargs) -> ModelSpec:
    """Validate raw parameters and build a ModelSpec.

    Beam keys: length (L), stiffness (D), optional order. Plate keys: lx, ly,
    thickness (h), young (E), poisson (nu). D is derived for plates.
    """
    variant = Variant.parse(variant)
    raw = dict(params or {})
    raw.update(kwargs)
    table = _BEAM_KEYS if variant.is_beam else _PLATE_KEYS
    clean = {}
    for key, value in raw.items():
        if key not in table:
            if key in ("stiffness", "D") and not variant.is_beam:
                raise ParameterError("plate stiffness is derived from (E, h, nu) and cannot be set")
            raise VariantMismatch(f"parameter {key!r} does not apply to {variant.value}")
        clean[table[key]] = value
    if variant.is_beam:
        expected = "eta2" if variant is Variant.BEAM_ETA2 else "eta4"
        clean.setdefault("order", expected)
        return ModelSpec(variant, BeamParams(**clean))
    return ModelSpec(variant, PlateParams(**clean))


def dkey(name: str, nx: int = 0, ny: int = 0, nt: int = 0) -> str:
    """Canonical derivative key, e.g. dkey('w', 1, 2) == 'w_xyy'."""
    suffix = "x" * nx + "y" * ny + "t" * nt
    return f"{name}_{suffix}" if suffix else name


@dataclass(frozen=True, eq=False)
class FieldState:
    """Samples of (u, v, w) and their derivatives on a tensor grid of points.

    ``x`` and ``y`` are the 1D coordinate vectors; arrays have shape
    ``(len(x),)`` for beams and ``(len(x), len(y))`` for plates. ``quad`` holds
    the 1D quadrature grids when the sample points are quadrature nodes, which
    is required by the nonlocal (cumulative) operators.
    """

    x: np.ndarray
    y: np.ndarray | None
    data: Mapping[str, np.ndarray]
    quad: tuple | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        y = None if self.y is None else np.asarray(self.y, dtype=float)
        object.__setattr__(self, "y", y)
        shape = self.shape
        frozen = {}
        for key, arr in self.data.items():
            arr = np.array(arr, dtype=float)
            if arr.shape != shape:
                arr = np.broadcast_to(arr, shape).copy()
            arr.setflags(write=False)
            frozen[key] = arr
        object.__setattr__(self, "data", frozen)

    @property
    def shape(self) -> tuple:
        return (self.x.size,) if self.y is None else (self.x.size, self.y.size)

    @property
    def ndim(self) -> int:
        return 1 if self.y is None else 2

    def __getitem__(self, key: str) -> np.ndarray:
        try:
            return self.data[key]
        except KeyError:
            raise MissingField(f"field {key!r} not present in state") from None

    def __contains__(self, key: str) -> bool:
        return key in self.data

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def has(self, *keys: str) -> bool:
        return all(k in self.data for k in keys)

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if k not in self.data]
        if missing:
            raise MissingField(f"state lacks required fields {missing}")

    def with_fields(self, **arrays) -> "FieldState":
        merged = dict(self.data)
        merged.update(arrays)
        return FieldState(self.x, self.y, merged, self.quad)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def is_zero(self, *keys: str) -> bool:
        return all(not np.any(self.data[k]) for k in keys if k in self.data)


@dataclass(frozen=True, eq=False)
class MultiplierField:
    """Lagrange multiplier samples on the same grid as a FieldState.

    Keys are 'lambda' (beam) or 'lambda1', 'lambda2', 'lambda3' (plate), with
    optional first derivatives such as 'lambda1_x'.
    """

    values: Mapping[str, np.ndarray]
    active: tuple

    def __post_init__(self):
        frozen = {}
        for key, arr in self.values.items():
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            frozen[key] = arr
        object.__setattr__(self, "values", frozen)
        object.__setattr__(self, "active", tuple(self.active))
        for name in self.active:
            if name not in frozen:
                raise MissingMultiplier(f"active multiplier {name!r} has no samples")

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @classmethod
    def beam(cls, lam, lam_x=None) -> "MultiplierField":
        vals = {"lambda": lam}
        if lam_x is not None:
            vals["lambda_x"] = lam_x
        return cls(vals, ("lambda",))

    @classmethod
    def plate(cls, lambda1, lambda2, lambda3=None, **derivs) -> "MultiplierField":
        vals = {"lambda1": lambda1, "lambda2": lambda2}
        active = ["lambda1", "lambda2"]
        if lambda3 is not None:
            vals["lambda3"] = lambda3
            active.append("lambda3")
        vals.update(derivs)
        return cls(vals, tuple(active))


ACTIVE_MULTIPLIERS = {
    Variant.BEAM_ETA2: ("lambda",),
    Variant.BEAM_ETA4: ("lambda",),
    Variant.PLATE_I: ("lambda1", "lambda2", "lambda3"),
    Variant.PLATE_II: ("lambda1", "lambda2"),
    Variant.PLATE_III: ("lambda1", "lambda2"),
}
