"""JSON scenario files.

Example::

    {
      "model": "three_level_chain",
      "omega": [0, 2, 5, 10],
      "gamma": 0,
      "t_max": 20,
      "output": "out/three_level_sweep"
    }

``omega`` and ``gamma`` may be scalars or lists; lists are swept as a cross
product. Unknown keys are rejected.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field, fields

from .dynamics import ATOL, RTOL
from .models import MODEL_NAMES


class ConfigError(ValueError):
    """Invalid scenario configuration; ``str()`` carries field and line."""


@dataclass
class SolverConfig:
    rtol: float = RTOL
    atol: float = ATOL


@dataclass
class TrajectoryConfig:
    n_traj: int = 1000
    seed: int = 0
    dark_threshold: float | None = None  # default 2 / xi
    n_checkpoints: int = 20


@dataclass
class ScenarioConfig:
    model: str
    xi: float = 1.0
    omega: list[float] = field(default_factory=lambda: [0.0])
    gamma: list[float] = field(default_factory=lambda: [0.0])
    t_max: float = 20.0
    n_points: int = 2000
    initial: str | int = "ket0"
    representation: str = "rate"
    prune: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)
    trajectories: TrajectoryConfig | None = None
    output: str = "zenoguard_out"
    workers: int = 1

    def sweep(self) -> list[tuple[float, float]]:
        return list(itertools.product(self.omega, self.gamma))

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.trajectories is None:
            d.pop("trajectories")
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict, source: str | None = None) -> "ScenarioConfig":
        return _parse(data, source)

    @classmethod
    def loads(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}: invalid JSON ({exc.msg})") from None
        return _parse(data, text)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _where(key: str, source: str | None) -> str:
    if source:
        needle = f'"{key.split(".")[-1]}"'
        for lineno, line in enumerate(source.splitlines(), 1):
            if needle in line:
                return f"line {lineno}, field '{key}'"
    return f"field '{key}'"


def _number(value, key, source, *, minimum=0.0, strict=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{_where(key, source)}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value < minimum or (strict and value == minimum):
        bound = ">" if strict else ">="
        raise ConfigError(f"{_where(key, source)}: must be finite and {bound} {minimum:g}")
    return value


def _integer(value, key, source, minimum) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{_where(key, source)}: expected an integer >= {minimum}, got {value!r}")
    return value


def _rates(value, key, source) -> list[float]:
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ConfigError(f"{_where(key, source)}: empty list")
    return [_number(v, key, source) for v in values]


def _check_keys(data, allowed, prefix, source):
    if not isinstance(data, dict):
        raise ConfigError(f"{_where(prefix or 'config', source)}: expected an object")
    for key in data:
        if key not in allowed:
            name = f"{prefix}.{key}" if prefix else key
            raise ConfigError(f"{_where(name, source)}: unknown key")


def _parse(data: dict, source: str | None) -> ScenarioConfig:
    top = {f.name for f in fields(ScenarioConfig)}
    _check_keys(data, top, "", source)
    if "model" not in data:
        raise ConfigError("field 'model': required")
    model = data["model"]
    if model not in MODEL_NAMES:
        raise ConfigError(f"{_where('model', source)}: unknown model {model!r}, expected one of {MODEL_NAMES}")
    cfg = ScenarioConfig(model=model)
    if "xi" in data:
        cfg.xi = _number(data["xi"], "xi", source)
    for key in ("omega", "gamma"):
        if key in data:
            setattr(cfg, key, _rates(data[key], key, source))
    if "t_max" in data:
        cfg.t_max = _number(data["t_max"], "t_max", source, strict=True)
    if "n_points" in data:
        cfg.n_points = _integer(data["n_points"], "n_points", source, 2)
    if "initial" in data:
        init = data["initial"]
        if isinstance(init, bool) or not (init in ("ket0", "mixed") or isinstance(init, int)):
            raise ConfigError(f"{_where('initial', source)}: expected 'ket0', 'mixed' or a level index")
        if isinstance(init, int) and init < 0:
            raise ConfigError(f"{_where('initial', source)}: level index must be >= 0")
        cfg.initial = init
    if "representation" in data:
        if data["representation"] not in ("rate", "master"):
            raise ConfigError(f"{_where('representation', source)}: expected 'rate' or 'master'")
        cfg.representation = data["representation"]
    if "prune" in data:
        if not isinstance(data["prune"], bool):
            raise ConfigError(f"{_where('prune', source)}: expected true/false")
        cfg.prune = data["prune"]
    if "solver" in data:
        _check_keys(data["solver"], {"rtol", "atol"}, "solver", source)
        s = data["solver"]
        cfg.solver = SolverConfig(
            rtol=_number(s.get("rtol", RTOL), "solver.rtol", source, strict=True),
            atol=_number(s.get("atol", ATOL), "solver.atol", source, strict=True),
        )
    if data.get("trajectories") is not None:
        tr = data["trajectories"]
        _check_keys(tr, {f.name for f in fields(TrajectoryConfig)}, "trajectories", source)
        t = TrajectoryConfig()
        if "n_traj" in tr:
            t.n_traj = _integer(tr["n_traj"], "trajectories.n_traj", source, 1)
        if "seed" in tr:
            t.seed = _integer(tr["seed"], "trajectories.seed", source, 0)
            if t.seed >= 2**64:
                raise ConfigError(f"{_where('trajectories.seed', source)}: must fit in 64 bits")
        if tr.get("dark_threshold") is not None:
            t.dark_threshold = _number(tr["dark_threshold"], "trajectories.dark_threshold", source, strict=True)
        if "n_checkpoints" in tr:
            t.n_checkpoints = _integer(tr["n_checkpoints"], "trajectories.n_checkpoints", source, 0)
        cfg.trajectories = t
    if "output" in data:
        if not isinstance(data["output"], str) or not data["output"]:
            raise ConfigError(f"{_where('output', source)}: expected a non-empty path prefix")
        cfg.output = data["output"]
    if "workers" in data:
        cfg.workers = _integer(data["workers"], "workers", source, 1)
    return cfg
