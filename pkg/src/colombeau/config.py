"""Run configuration: a flat ``key = value`` text document with flag overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .asymptotics import Tolerances
from .errors import ParameterError
from .mollifier import MAX_MOMENT_ORDER, make_mollifier
from .nets import EpsilonGrid


@dataclass(frozen=True)
class RunConfig:
    eps_max: float = 0.5
    ratio: float = 0.7
    count: int = 24
    mollifier_q: int = 4
    mollifier_radius: float = 1.0
    tol_slope: float = 0.25
    tol_res: float = 0.15
    tol_assoc: float = 1e-6
    ode_rtol: float = 1e-10
    out: str = "out"
    demo: str = "ppwave"
    profile: str = "vacuum"

    def __post_init__(self):
        self.grid  # validates grid parameters
        if not 0 <= self.mollifier_q <= MAX_MOMENT_ORDER:
            raise ParameterError(f"mollifier_q must lie in 0..{MAX_MOMENT_ORDER}")
        if not 0 < self.mollifier_radius <= 4:
            raise ParameterError("mollifier_radius must lie in (0, 4]")
        for name, lo, hi in (("tol_slope", 0.01, 1.0), ("tol_res", 1e-4, 1.0),
                             ("tol_assoc", 1e-12, 1e-2), ("ode_rtol", 1e-13, 1e-6)):
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ParameterError(f"{name}={v} outside [{lo}, {hi}]")

    @property
    def grid(self):
        return EpsilonGrid(self.eps_max, self.ratio, self.count)

    @property
    def mollifier(self):
        return make_mollifier(self.mollifier_q, self.mollifier_radius)

    @property
    def tolerances(self):
        return Tolerances(self.tol_slope, self.tol_res, self.tol_assoc, self.ode_rtol)

    def replace(self, **changes):
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_text(self):
        return "".join(f"{f.name} = {getattr(self, f.name)!r}\n".replace("'", "")
                       for f in dataclasses.fields(self))


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(name, raw):
    kind = type(_FIELDS[name].default)
    try:
        return kind(raw) if kind is not int else int(raw, 10)
    except ValueError as exc:
        raise ParameterError(f"config key {name}: cannot read {raw!r} as {kind.__name__}") from exc


def parse_config(text, base=None):
    """Read ``key = value`` lines (``#`` comments, blank lines ignored)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "grid":
            g = EpsilonGrid.parse(raw)
            values.update(eps_max=g.eps_max, ratio=g.ratio, count=g.count)
            continue
        if key not in _FIELDS:
            raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return (base or RunConfig()).replace(**values)


def load_config(path, base=None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)
