"""Experiment configuration: a key-value document (YAML or JSON) mapped onto dataclasses.

Example::

    kind: chern
    model: {name: chern, params: {m: 1.0, W: 1.0}}
    sizes: [20]
    seeds: [1, 2, 3, 4, 5]

An explicit model replaces ``name`` by ``d``, ``Q``, a ``hoppings`` list of
``{q: [..], re: [[..]], im: [[..]]}`` entries and an optional ``disorder``
list of ``{q: [..], W: w}`` entries.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, InvalidArgumentError
from .lattice import HoppingModel
from .models import BUILTIN_MODELS

KINDS = ("chern", "index", "sigma12", "identity-check", "decay", "convergence", "oracle")
# kinds whose pipeline builds a Clifford representation of the model dimension
CLIFFORD_KINDS = ("index", "decay", "convergence", "identity-check")

# model used when a config omits one
DEFAULT_MODEL = {"sigma12": "chern_stack"}

DEFAULT_POINTS = [[[1, 0], [0, 1]], [[2, 0], [0, 1]], [[1, 1], [0, 1]]]


@dataclass
class ModelSpec:
    name: str | None = "chern"
    params: dict = field(default_factory=dict)
    d: int | None = None
    Q: int | None = None
    hoppings: list = field(default_factory=list)
    disorder: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, raw) -> "ModelSpec":
        if not isinstance(raw, dict):
            raise ConfigError(f"model must be a mapping, got {type(raw).__name__}")
        unknown = set(raw) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown model keys: {sorted(unknown)}")
        spec = cls(**raw)
        if spec.hoppings:
            spec.name = raw.get("name")
        return spec

    def build(self) -> HoppingModel:
        try:
            if self.hoppings:
                return self._explicit()
            if self.name not in BUILTIN_MODELS:
                raise ConfigError(f"unknown model {self.name!r}; built-ins are {sorted(BUILTIN_MODELS)}")
            return BUILTIN_MODELS[self.name](**self.params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for model {self.name!r}: {exc}") from exc
        except InvalidArgumentError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid model: {exc}") from exc

    def _explicit(self) -> HoppingModel:
        if self.d is None or self.Q is None:
            raise ConfigError("an explicit model needs d and Q")
        hop = {}
        for entry in self.hoppings:
            try:
                q = tuple(int(v) for v in entry["q"])
                re = np.asarray(entry.get("re", np.zeros((self.Q, self.Q))), dtype=float)
                im = np.asarray(entry.get("im", np.zeros((self.Q, self.Q))), dtype=float)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed hopping entry {entry!r}: {exc}") from exc
            if q in hop:
                raise ConfigError(f"hopping q={q} given twice")
            hop[q] = re + 1j * im
        dis = {}
        for entry in self.disorder:
            try:
                dis[tuple(int(v) for v in entry["q"])] = float(entry["W"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed disorder entry {entry!r}: {exc}") from exc
        return HoppingModel(int(self.d), int(self.Q), hop, dis, name=self.name or "custom")


@dataclass
class ExperimentConfig:
    kind: str
    model: ModelSpec = field(default_factory=ModelSpec)
    sizes: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    fermi_level: float = 0.0
    tolerance: float = 0.05
    interior_radius: int | None = None
    interior_radii: list | None = None  # convergence sweeps; default {R//3, R//2}
    shifts: list | None = None
    n_shifts: int = 1
    shift_seed: int = 0
    fedosov_n: int | None = None
    kernel: bool = False
    kernel_tol: float = 1e-3
    decay_k: int = 2
    oracle_grid: int = 24
    band: int = 0
    directions: list = field(default_factory=lambda: [0, 1])
    points: list | None = None
    cutoff: float = 200.0
    d: int | None = None  # identity-check only
    threads: int = 1
    output: str | None = None
    experiment_id: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a key-value mapping")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in raw:
            raise ConfigError("config needs a 'kind'")
        data = dict(raw)
        default = {"name": DEFAULT_MODEL.get(raw["kind"], "chern")}
        data["model"] = ModelSpec.from_dict(raw.get("model", default))
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def dimension(self) -> int:
        if self.kind == "identity-check":
            return int(self.d if self.d is not None else 2)
        return self.model.build().d

    def default_sizes(self) -> list:
        return {
            "chern": [24],
            "index": [12],
            "sigma12": [10],
            "decay": [12],
            "convergence": [8, 12],
            "oracle": [24, 48],
            "identity-check": [],
        }[self.kind]

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {list(KINDS)}")
        for key in ("sizes", "seeds"):
            val = getattr(self, key)
            if not isinstance(val, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in val):
                raise ConfigError(f"{key} must be a list of integers")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        if not self.sizes:
            self.sizes = self.default_sizes()
        if any(s < 1 for s in self.sizes):
            raise ConfigError(f"sizes must be positive, got {self.sizes}")

        if self.kind == "identity-check":
            d = self.dimension
            if d < 2 or d % 2:
                raise ConfigError(f"the Clifford construction needs an even dimension >= 2, got d={d}")
            pts = self.points if self.points is not None else (DEFAULT_POINTS if d == 2 else None)
            if pts is None:
                raise ConfigError(f"identity-check in d={d} needs explicit points")
            for conf in pts:
                if np.shape(conf) != (d, d):
                    raise ConfigError(f"each point configuration must be {d} points in Z^{d}, got {conf}")
            return

        model = self.model.build()
        d = model.d
        if self.kind in CLIFFORD_KINDS and d % 2:
            raise ConfigError(f"the Clifford construction needs an even dimension, model has d={d}")
        if self.kind == "sigma12" and d != 3:
            raise ConfigError(f"sigma12 needs a three-dimensional model, got d={d}")
        if self.kind in ("chern",) and d % 2:
            raise ConfigError(f"the top-degree cocycle needs an even dimension, model has d={d}")
        if self.kind == "oracle" and (d != 2 or not model.is_clean):
            raise ConfigError("the momentum oracle needs a clean two-dimensional model")
        if self.kind in ("chern", "sigma12"):
            # torus side L must keep every hopping off the minimal-image seam
            bad = [L for L in self.sizes if L <= 2 * model.range]
            if bad:
                raise ConfigError(f"torus sizes {bad} violate the minimal-image bound L > {2 * model.range}")
        if not model.is_clean and not self.seeds:
            raise ConfigError("a disordered model needs a nonempty seeds list")
        if self.shifts is not None:
            for x0 in self.shifts:
                if len(x0) != d or any(not 0 <= v < 1 for v in x0):
                    raise ConfigError(f"shift {x0} must have {d} coordinates in [0, 1)")
        if self.interior_radius is not None and self.kind in ("index", "decay"):
            bad = [R for R in self.sizes if self.interior_radius > R]
            if bad:
                raise ConfigError(f"interior_radius {self.interior_radius} exceeds box radii {bad}")


def read_document(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)  # JSON is a subset of YAML
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a key-value mapping at top level")
    return raw


def load_config(path, **overrides) -> ExperimentConfig:
    """Read a config file; non-None ``overrides`` replace top-level keys before validation."""
    raw = read_document(path) if path is not None else {}
    kind = overrides.get("kind")
    if kind is not None and raw.get("kind", kind) != kind:
        raise ConfigError(f"config kind {raw['kind']!r} does not match the requested {kind!r}")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(raw)
