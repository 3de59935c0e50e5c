"""Scenario configuration: TOML parsing, validation and serialisation.

A scenario file looks like::

    name = "sim1"
    mode = "flexible"          # or "rigid"
    ds = 0.02
    seed = 0

    [initial_curve]            # either from/to (resampled to ds) or nodes
    from = [2.0, 2.0]
    to = [1.4, 1.4]

    [[obstacles]]
    center = [1.4, 1.0]
    radius = 0.3

    [control]                  # kappa0, reg_eps
    [cost]                     # alpha, smooth_eps, contact_tol, penalty_schedule,
                               # grad_tol, max_iters, guard_gap
    [hardness]                 # constant, [[hardness.bumps]] center/radius/width/peak
    [target]                   # kind = "plane" (normal, offset) or "point" (point); tol
    [exploration]              # kernel_rate
    [restart]                  # strategy = "R1"|"R2", c, rho, h0
    [breakdown]                # contact, angle, curvature
    [limits]                   # max_attempts, max_length, max_steps

Every table is optional except ``initial_curve``; ``ds`` is required.
Points may have two (planar) or three coordinates.
"""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .control import ControlParams
from .environment import (Environment, ExplorationSet, Hardness, HardnessBump, Obstacle,
                          TargetSpec)
from .geometry import RootCurve, as_vec3
from .growth import BreakdownTol, RestartParams
from .solver import CostParams


class ConfigError(ValueError):
    """Invalid scenario document; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _point(value, name: str) -> tuple:
    try:
        return tuple(float(c) for c in as_vec3(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"expected 2 or 3 coordinates ({exc})") from None


@dataclass(frozen=True)
class ObstacleSpec:
    center: tuple
    radius: float


@dataclass(frozen=True)
class BumpSpec:
    center: tuple
    radius: float
    width: float
    peak: float


@dataclass(frozen=True)
class TargetConfig:
    kind: str = "plane"
    normal: tuple = (0.0, 1.0, 0.0)
    offset: float = 0.0
    point: tuple | None = None
    tol: float | None = None


@dataclass(frozen=True)
class CurveSpec:
    """Initial curve: explicit ``nodes`` or a segment ``start -> end``."""

    nodes: tuple | None = None
    start: tuple | None = None
    end: tuple | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    ds: float
    initial_curve: CurveSpec
    name: str = "scenario"
    mode: str = "flexible"
    seed: int = 0
    obstacles: tuple = ()
    control: ControlParams = field(default_factory=ControlParams)
    cost: CostParams = field(default_factory=CostParams)
    hardness_constant: float = 0.0
    hardness_bumps: tuple = ()
    target: TargetConfig = field(default_factory=TargetConfig)
    kernel_rate: float = 1.0
    restart: RestartParams = field(default_factory=RestartParams)
    breakdown: BreakdownTol = field(default_factory=BreakdownTol)
    max_steps: int = 5000

    @property
    def target_tol_value(self) -> float:
        return self.ds if self.target.tol is None else self.target.tol

    def build_curve(self) -> RootCurve:
        spec = self.initial_curve
        if spec.nodes is not None:
            curve = RootCurve(np.array(spec.nodes, dtype=float), self.ds)
            curve.check_arc_length(1e-6)
            return curve
        start, end = np.array(spec.start), np.array(spec.end)
        return RootCurve.straight(start, end - start, float(np.linalg.norm(end - start)), self.ds)

    def build_environment(self) -> Environment:
        return Environment(
            obstacles=[Obstacle(o.center, o.radius) for o in self.obstacles],
            hardness=Hardness(self.hardness_constant,
                              tuple(HardnessBump(b.center, b.radius, b.width, b.peak)
                                    for b in self.hardness_bumps)),
            target=TargetSpec(kind=self.target.kind, normal=np.array(self.target.normal),
                              offset=self.target.offset,
                              point=None if self.target.point is None else np.array(self.target.point)),
            explored=ExplorationSet(kernel_rate=self.kernel_rate),
        )

    def build_initial(self) -> tuple[RootCurve, Environment]:
        return self.build_curve(), self.build_environment()

    def to_dict(self) -> dict:
        """Plain nested dict in the file schema (``None`` entries omitted)."""
        curve = {}
        if self.initial_curve.nodes is not None:
            curve["nodes"] = [list(p) for p in self.initial_curve.nodes]
        else:
            curve["from"] = list(self.initial_curve.start)
            curve["to"] = list(self.initial_curve.end)
        cost = dataclasses.asdict(self.cost)
        cost["penalty_schedule"] = list(cost["penalty_schedule"])
        target = {"kind": self.target.kind, "normal": list(self.target.normal),
                  "offset": self.target.offset}
        if self.target.point is not None:
            target["point"] = list(self.target.point)
        if self.target.tol is not None:
            target["tol"] = self.target.tol
        restart = dataclasses.asdict(self.restart)
        limits = {"max_attempts": restart.pop("max_attempts"),
                  "max_length": restart.pop("max_length"),
                  "max_steps": self.max_steps}
        restart.pop("target_tol")
        doc = {
            "name": self.name, "mode": self.mode, "ds": self.ds, "seed": self.seed,
            "initial_curve": curve,
            "obstacles": [{"center": list(o.center), "radius": o.radius} for o in self.obstacles],
            "control": dataclasses.asdict(self.control),
            "cost": cost,
            "hardness": {"constant": self.hardness_constant,
                         "bumps": [{"center": list(b.center), "radius": b.radius,
                                    "width": b.width, "peak": b.peak}
                                   for b in self.hardness_bumps]},
            "target": target,
            "exploration": {"kernel_rate": self.kernel_rate},
            "restart": restart,
            "breakdown": dataclasses.asdict(self.breakdown),
            "limits": limits,
        }
        return _drop_none(doc)


def _drop_none(obj):
    if isinstance(obj, dict):
        return {k: _drop_none(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, list):
        return [_drop_none(v) for v in obj]
    return obj


_TOP_KEYS = {"name", "mode", "ds", "seed", "initial_curve", "obstacles", "control", "cost",
             "hardness", "target", "exploration", "restart", "breakdown", "limits"}
_TABLE_KEYS = {
    "initial_curve": {"nodes", "from", "to"},
    "control": {"kappa0", "reg_eps"},
    "cost": {"alpha", "smooth_eps", "contact_tol", "penalty_schedule", "grad_tol", "max_iters",
             "guard_gap"},
    "hardness": {"constant", "bumps"},
    "target": {"kind", "normal", "offset", "point", "tol"},
    "exploration": {"kernel_rate"},
    "restart": {"strategy", "c", "rho", "h0"},
    "breakdown": {"contact", "angle", "curvature"},
    "limits": {"max_attempts", "max_length", "max_steps"},
}


def _table(doc: dict, name: str) -> dict:
    table = doc.get(name, {})
    if not isinstance(table, dict):
        raise ConfigError(name, "expected a table")
    unknown = set(table) - _TABLE_KEYS[name]
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
    return table


def _build(name: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, str(exc)) from None


def config_from_dict(doc: dict) -> ScenarioConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    if "ds" not in doc:
        raise ConfigError("ds", "missing required field")
    ds = doc["ds"]
    if not isinstance(ds, (int, float)) or not ds > 0:
        raise ConfigError("ds", "must be a positive number")
    ds = float(ds)
    mode = doc.get("mode", "flexible")
    if mode not in ("flexible", "rigid"):
        raise ConfigError("mode", f"expected 'flexible' or 'rigid', got {mode!r}")

    if "initial_curve" not in doc:
        raise ConfigError("initial_curve", "missing required field")
    ic = _table(doc, "initial_curve")
    if "nodes" in ic:
        if "from" in ic or "to" in ic:
            raise ConfigError("initial_curve", "give either nodes or from/to, not both")
        nodes = tuple(_point(p, "initial_curve.nodes") for p in ic["nodes"])
        if len(nodes) < 2:
            raise ConfigError("initial_curve.nodes", "need at least two nodes")
        gaps = np.linalg.norm(np.diff(np.array(nodes), axis=0), axis=1)
        if np.max(np.abs(gaps - ds)) > 1e-6:
            raise ConfigError("initial_curve.nodes", "consecutive nodes must be ds apart")
        curve = CurveSpec(nodes=nodes)
    else:
        for key in ("from", "to"):
            if key not in ic:
                raise ConfigError(f"initial_curve.{key}", "missing required field")
        start, end = _point(ic["from"], "initial_curve.from"), _point(ic["to"], "initial_curve.to")
        if np.linalg.norm(np.subtract(end, start)) < ds:
            raise ConfigError("initial_curve", "segment shorter than ds")
        curve = CurveSpec(start=start, end=end)

    obstacles = []
    for i, o in enumerate(doc.get("obstacles", [])):
        extra = set(o) - {"center", "radius"}
        if extra:
            raise ConfigError(f"obstacles[{i}].{sorted(extra)[0]}", "unknown key")
        if "center" not in o or "radius" not in o:
            raise ConfigError(f"obstacles[{i}]", "needs center and radius")
        if not o["radius"] > 0:
            raise ConfigError(f"obstacles[{i}].radius", "must be positive")
        obstacles.append(ObstacleSpec(_point(o["center"], f"obstacles[{i}].center"),
                                      float(o["radius"])))

    ctrl = _table(doc, "control")
    cost = dict(_table(doc, "cost"))
    if "penalty_schedule" in cost:
        cost["penalty_schedule"] = tuple(float(m) for m in cost["penalty_schedule"])
    hard = _table(doc, "hardness")
    bumps = []
    for i, b in enumerate(hard.get("bumps", [])):
        try:
            bumps.append(BumpSpec(_point(b["center"], f"hardness.bumps[{i}].center"),
                                  float(b["radius"]), float(b["width"]), float(b["peak"])))
        except KeyError as exc:
            raise ConfigError(f"hardness.bumps[{i}].{exc.args[0]}", "missing required field") from None
        if bumps[-1].width <= 0 or bumps[-1].peak < 0:
            raise ConfigError(f"hardness.bumps[{i}]", "needs width > 0 and peak >= 0")
    h_const = float(hard.get("constant", 0.0))
    if h_const < 0:
        raise ConfigError("hardness.constant", "must be >= 0")

    tgt = _table(doc, "target")
    target = TargetConfig(
        kind=tgt.get("kind", "plane"),
        normal=_point(tgt.get("normal", [0.0, 1.0, 0.0]), "target.normal"),
        offset=float(tgt.get("offset", 0.0)),
        point=_point(tgt["point"], "target.point") if "point" in tgt else None,
        tol=float(tgt["tol"]) if "tol" in tgt else None,
    )
    if target.kind not in ("plane", "point"):
        raise ConfigError("target.kind", f"expected 'plane' or 'point', got {target.kind!r}")
    if target.kind == "point" and target.point is None:
        raise ConfigError("target.point", "missing required field")

    kernel_rate = float(_table(doc, "exploration").get("kernel_rate", 1.0))
    if not kernel_rate > 0:
        raise ConfigError("exploration.kernel_rate", "must be positive")
    limits = _table(doc, "limits")
    restart_tbl = dict(_table(doc, "restart"))
    restart_tbl["target_tol"] = target.tol
    for key in ("max_attempts", "max_length"):
        if key in limits:
            restart_tbl[key] = limits[key]
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed", "must be an integer")

    return ScenarioConfig(
        ds=ds, initial_curve=curve, name=str(doc.get("name", "scenario")), mode=mode, seed=seed,
        obstacles=tuple(obstacles),
        control=_build("control", ControlParams, **ctrl),
        cost=_build("cost", CostParams, **cost),
        hardness_constant=h_const, hardness_bumps=tuple(bumps),
        target=target, kernel_rate=kernel_rate,
        restart=_build("restart", RestartParams, **restart_tbl),
        breakdown=_build("breakdown", BreakdownTol, **_table(doc, "breakdown")),
        max_steps=int(limits.get("max_steps", 5000)),
    )


def parse_config(text: str) -> ScenarioConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<document>", f"malformed TOML: {exc}") from None
    return config_from_dict(doc)


def dump_config(config: ScenarioConfig) -> str:
    return tomli_w.dumps(config.to_dict())


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def bundled_config_path(name: str) -> Path:
    """Path of a bundled scenario (``"sim1"``, ``"sim2"``)."""
    return Path(str(resources.files("rootgrowth") / "configs" / f"{name}.toml"))


def bundled_config(name: str) -> ScenarioConfig:
    return load_config(bundled_config_path(name))
