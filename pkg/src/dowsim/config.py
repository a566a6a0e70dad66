"""INI run configuration: one optional ``[run]`` section plus one experiment section.

Example::

    [run]
    seed = 7
    out = results
    format = csv
    units = natural

    [evolve]
    n = 1024
    x_min = -40
    x_max = 40
    sigma = 1.0
    dt = 0.01
    n_steps = 1000

Keys are case-sensitive, and keys unknown to a section are rejected so that
typos do not pass silently.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


from .collapse import CollapseOperator, CollapsePolicy, Criterion, Shape
from .deformation import DeformationParams, Mode
from .errors import ConfigError
from .events import InteractionEvent
from .evolution import BarrierPotential, FreePotential, HarmonicPotential, Potential
from .wavefield import UNIT_SYSTEMS, GridSpec, UnitSystem

COMMANDS = ("evolve", "trajectory", "double-slit", "born-check", "localization-table", "compare", "entangle")
FORMATS = ("csv", "json")


class Section:
    """Typed, usage-tracked view of one INI section."""

    def __init__(self, name: str, items: dict[str, str] | None = None):
        self.name = name
        self._items = dict(items or {})
        self._used: set[str] = set()

    def __contains__(self, key):
        return key in self._items

    def raw(self, key: str, default=None):
        self._used.add(key)
        return self._items.get(key, default)

    def _convert(self, key, default, conv, what):
        value = self.raw(key)
        if value is None:
            return default
        try:
            return conv(value.strip())
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: expected {what}, got {value!r}") from None

    def float(self, key: str, default=None) -> float:
        return self._convert(key, default, float, "a number")

    def int(self, key: str, default=None) -> int:
        return self._convert(key, default, int, "an integer")

    def str(self, key: str, default=None) -> str:
        return self._convert(key, default, str, "text")

    def bool(self, key: str, default=False) -> bool:
        def conv(v):
            low = v.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(v)
        return self._convert(key, default, conv, "a boolean")

    def floats(self, key: str, default=None) -> tuple[float, ...] | None:
        return self._convert(key, default, lambda v: tuple(float(x) for x in v.replace(",", " ").split()),
                             "numbers")

    def ints(self, key: str, default=None) -> tuple[int, ...] | None:
        return self._convert(key, default, lambda v: tuple(int(x) for x in v.replace(",", " ").split()),
                             "integers")

    def choice(self, key: str, default: str, options: Sequence[str]) -> str:
        value = self.str(key, default).lower()
        if value not in options:
            raise ConfigError(f"[{self.name}] {key}: expected one of {list(options)}, got {value!r}")
        return value

    def finish(self):
        unknown = sorted(set(self._items) - self._used)
        if unknown:
            raise ConfigError(f"[{self.name}] unknown keys: {', '.join(unknown)}")


@dataclass
class RunConfig:
    command: str
    section: Section
    seed: int = 0
    out: Path = Path("results")
    fmt: str = "csv"
    units: UnitSystem | None = None     # None: the command's default
    base_dir: Path = Path(".")


def load_config(path: str | Path | None, command: str) -> RunConfig:
    """Parse ``path`` (or start from defaults if ``None``) for ``command``."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if path is None:
        return RunConfig(command, Section(command))
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str    # keys are case-sensitive (s and S differ)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    experiments = [s for s in parser.sections() if s != "run"]
    unknown = [s for s in experiments if s not in COMMANDS]
    if unknown:
        raise ConfigError(f"{path}: unknown sections {unknown}")
    if len(experiments) > 1:
        raise ConfigError(f"{path}: expected one experiment section, found {experiments}")
    if experiments and experiments[0] != command:
        raise ConfigError(f"{path}: section [{experiments[0]}] does not match command {command!r}")
    run = Section("run", dict(parser["run"]) if parser.has_section("run") else {})
    cfg = RunConfig(command, Section(command, dict(parser[command]) if experiments else {}),
                    base_dir=path.parent)
    cfg.seed = run.int("seed", 0)
    cfg.out = Path(run.str("out", "results"))
    cfg.fmt = run.choice("format", "csv", FORMATS)
    label = run.str("units")
    if label is not None:
        if label not in UNIT_SYSTEMS:
            raise ConfigError(f"[run] units: expected one of {sorted(UNIT_SYSTEMS)}, got {label!r}")
        cfg.units = UNIT_SYSTEMS[label]
    run.finish()
    return cfg


# builders shared by several commands

def grid_from(sec: Section, n=(1024,), x_min=(-40.0,), x_max=(40.0,)) -> GridSpec:
    n = sec.ints("n", n)
    lo = sec.floats("x_min", x_min)
    hi = sec.floats("x_max", x_max)
    if len(lo) == 1 and len(n) == 2:
        lo, hi = lo * 2, hi * 2
    return GridSpec(tuple(n), tuple(lo), tuple(hi))


@dataclass(frozen=True)
class PacketSpec:
    x0: tuple[float, ...]
    sigma: tuple[float, ...]
    k0: tuple[float, ...]


def _per_dim(values: tuple[float, ...], dim: int, key: str) -> tuple[float, ...]:
    if len(values) == 1:
        return values * dim
    if len(values) != dim:
        raise ConfigError(f"{key} needs 1 or {dim} values, got {len(values)}")
    return values


def packet_from(sec: Section, dim: int) -> PacketSpec:
    return PacketSpec(_per_dim(sec.floats("x0", (0.0,)), dim, "x0"),
                      _per_dim(sec.floats("sigma", (1.0,)), dim, "sigma"),
                      _per_dim(sec.floats("k0", (0.0,)), dim, "k0"))


def potential_from(sec: Section) -> Potential:
    kind = sec.choice("potential", "free", ("free", "harmonic", "barrier"))
    if kind == "harmonic":
        center = sec.floats("center", (0.0,))
        return HarmonicPotential(sec.float("stiffness", 1.0), center[0] if len(center) == 1 else center)
    if kind == "barrier":
        return BarrierPotential(sec.float("barrier_position", 0.0), sec.float("barrier_thickness", 0.5),
                                sec.float("barrier_height", 50.0))
    return FreePotential()


def policy_from(sec: Section, units: UnitSystem) -> CollapsePolicy:
    criterion = Criterion(sec.choice("criterion", "threshold", [c.value for c in Criterion]))
    op = CollapseOperator(sec.float("operator_width"),
                          Shape(sec.choice("operator_shape", "gaussian", [s.value for s in Shape])))
    return CollapsePolicy(criterion, units, sec.float("epsilon_c"), sec.float("D"), op)


def deform_from(sec: Section) -> DeformationParams:
    return DeformationParams(sec.float("gamma", 1.0),
                             Mode(sec.choice("mode", "multiplicative", [m.value for m in Mode])))


def events_from(sec: Section, dim: int) -> list[InteractionEvent]:
    """One event per line of ``events``: ``t center... extent energy``."""
    events = []
    for line in (sec.str("events", "") or "").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals = [float(x) for x in line.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"[{sec.name}] events: bad line {line!r}") from None
        if len(vals) != dim + 3:
            raise ConfigError(f"[{sec.name}] events: expected t, {dim} centre value(s), extent, energy "
                              f"in {line!r}")
        t, center, extent, energy = vals[0], vals[1:1 + dim], vals[-2], vals[-1]
        events.append(InteractionEvent(t, center[0] if dim == 1 else tuple(center), extent, energy,
                                       label=f"e{len(events)}"))
    return events
