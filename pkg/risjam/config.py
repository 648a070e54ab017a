"""
Configuration loading and validation.

A TOML file holds up to three sections: [scenario], [solver] (with [solver.sa]) and [sweep].
Keys come from each dataclass field's metadata ("key", and "unit" for dB/dBm inputs). Omitted keys keep their
defaults; every problem found is reported at once.
"""

import dataclasses
import logging
import math
import typing as t
from enum import Enum
from pathlib import Path

import toml

from risjam.baselines import SchemeId
from risjam.geometry import (
    FadingKind,
    FadingSpec,
    Link,
    LinkSpec,
    PathLossSpec,
    Position3D,
    ScenarioConfig,
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    watts_to_dbm,
)
from risjam.harness import SweepSpec
from risjam.solver import SolverConfig

logger = logging.getLogger(__name__)

SECTIONS = ("scenario", "solver", "sweep")
LINK_KEYS = ("fading", "rician_factor", "exponent", "pl0_db", "d0_m")
Configs = t.Tuple[ScenarioConfig, SolverConfig, SweepSpec]


class ConfigError(ValueError):
    def __init__(self, problems: t.Sequence[str]):
        self.problems = list(problems)
        super().__init__("Invalid configuration:\n  " + "\n  ".join(self.problems))


# SECTION 1: Value converters
def _as_bool(value):
    if not isinstance(value, bool):
        raise TypeError(f"expected true/false, got {value!r}")
    return value


def _as_int(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"expected an integer, got {value!r}")
    return value


def _as_float(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"expected a number, got {value!r}")
    return float(value)


def _as_str(value):
    if not isinstance(value, str):
        raise TypeError(f"expected a string, got {value!r}")
    return value


def _as_position(value):
    if not isinstance(value, list):
        raise TypeError(f"expected [x, y, z], got {value!r}")
    return Position3D.from_sequence([_as_float(v) for v in value])


CONVERTERS: t.Dict[type, t.Callable] = {
    bool: _as_bool,
    int: _as_int,
    float: _as_float,
    str: _as_str,
    Position3D: _as_position,
}
TO_LINEAR = {"db": db_to_linear, "dbm": dbm_to_watts}
FROM_LINEAR = {"db": linear_to_db, "dbm": watts_to_dbm}


def _as_enum(enum_type: t.Type[Enum], value):
    if enum_type is SchemeId:
        return SchemeId.parse(_as_str(value))
    try:
        return enum_type[_as_str(value).upper()]
    except KeyError:
        raise ValueError(
            f"expected one of {', '.join(m.name for m in enum_type)}, got {value!r}"
        ) from None


def convert(python_type, value, unit: t.Optional[str] = None):
    if t.get_origin(python_type) is tuple:
        if not isinstance(value, list):
            raise TypeError(f"expected a list, got {value!r}")
        item_type = t.get_args(python_type)[0]
        return tuple(convert(item_type, v) for v in value)
    if isinstance(python_type, type) and issubclass(python_type, Enum):
        return _as_enum(python_type, value)
    converted = CONVERTERS[python_type](value)
    return TO_LINEAR[unit](converted) if unit else converted


# SECTION 2: Sections
def _links(table, prefix: str, problems: t.List[str]) -> t.Dict[Link, LinkSpec]:
    links = ScenarioConfig().links.copy()
    if not isinstance(table, dict):
        problems.append(f"{prefix}: expected a table of links")
        return links
    for name, entry in table.items():
        key = f"{prefix}.{name}"
        if name not in Link.__members__:
            problems.append(f"{key}: unknown link, expected one of {', '.join(Link.__members__)}")
            continue
        if not isinstance(entry, dict):
            problems.append(f"{key}: expected a table")
            continue
        if unknown := sorted(set(entry) - set(LINK_KEYS)):
            problems.append(f"{key}: unknown key(s) {', '.join(unknown)}")
        base = links[Link[name]]
        try:
            kind = (
                _as_enum(FadingKind, entry["fading"]) if "fading" in entry else base.fading.kind
            )
            factor = _as_float(entry.get("rician_factor", base.fading.rician_factor))
            path_loss = PathLossSpec(
                pl0_db=_as_float(entry.get("pl0_db", base.path_loss.pl0_db)),
                d0=_as_float(entry.get("d0_m", base.path_loss.d0)),
                exponent=_as_float(entry.get("exponent", base.path_loss.exponent)),
            )
        except (TypeError, ValueError) as e:
            problems.append(f"{key}: {e}")
            continue
        links[Link[name]] = LinkSpec(fading=FadingSpec(kind, factor), path_loss=path_loss)
    return links


def build_section(cls, table, prefix: str, problems: t.List[str]):
    """Instantiate dataclass `cls` from a TOML table, appending any problem found."""
    if not isinstance(table, dict):
        problems.append(f"{prefix}: expected a table, got {table!r}")
        return cls()
    fields = {f.metadata.get("key", f.name): f for f in dataclasses.fields(cls)}
    if unknown := sorted(set(table) - set(fields)):
        problems.append(f"{prefix}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for key, field in fields.items():
        if key not in table:
            continue
        name = f"{prefix}.{key}"
        if key == "links":
            kwargs[field.name] = _links(table[key], name, problems)
        elif dataclasses.is_dataclass(field.type) and field.type not in CONVERTERS:
            kwargs[field.name] = build_section(field.type, table[key], name, problems)
        else:
            try:
                kwargs[field.name] = convert(field.type, table[key], field.metadata.get("unit"))
            except (TypeError, ValueError) as e:
                problems.append(f"{name}: {e}")
    return cls(**kwargs)


def snapshot(obj) -> t.Dict[str, t.Any]:
    """Inverse of build_section: resolved values in config keys and units."""
    out: t.Dict[str, t.Any] = {}
    for field in dataclasses.fields(obj):
        key = field.metadata.get("key", field.name)
        value = getattr(obj, field.name)
        if unit := field.metadata.get("unit"):
            value = FROM_LINEAR[unit](value)
        out[key] = _plain(value)
    return out


def _plain(value):
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, Position3D):
        return [value.x, value.y, value.z]
    if isinstance(value, LinkSpec):
        return {
            "fading": value.fading.kind.name.lower(),
            "rician_factor": value.fading.rician_factor,
            "exponent": value.path_loss.exponent,
            "pl0_db": value.path_loss.pl0_db,
            "d0_m": value.path_loss.d0,
        }
    if isinstance(value, dict):
        return {_plain(k): _plain(v) for k, v in value.items()}
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if dataclasses.is_dataclass(value):
        return snapshot(value)
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


# SECTION 3: Entry points
def validate(scenario: ScenarioConfig, solver: SolverConfig, sweep: SweepSpec) -> Configs:
    problems = scenario.problems() + solver.problems() + sweep.problems()
    if problems:
        raise ConfigError(problems)
    return scenario, solver, sweep


def parse_config(text: str) -> Configs:
    try:
        document = toml.loads(text)
    except toml.TomlDecodeError as e:
        raise ConfigError([f"line {e.lineno}, column {e.colno}: {e.msg}"]) from e
    problems: t.List[str] = []
    if unknown := sorted(set(document) - set(SECTIONS)):
        problems.append(f"unknown section(s) {', '.join(unknown)}")
    scenario = build_section(ScenarioConfig, document.get("scenario", {}), "scenario", problems)
    solver = build_section(SolverConfig, document.get("solver", {}), "solver", problems)
    sweep = build_section(SweepSpec, document.get("sweep", {}), "sweep", problems)
    if problems:
        raise ConfigError(problems)
    return validate(scenario, solver, sweep)


def load_config(path: t.Optional[t.Union[str, Path]] = None) -> Configs:
    """No path means every default."""
    if path is None:
        return validate(ScenarioConfig(), SolverConfig(), SweepSpec())
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError([f"{path}: {e.strerror}"]) from e
    logger.info("Loading configuration from %s", path)
    return parse_config(text)


def apply_overrides(
    configs: Configs,
    seed: t.Optional[int] = None,
    trials: t.Optional[int] = None,
    schemes: t.Optional[str] = None,
) -> t.Tuple[Configs, t.Dict[str, t.Any]]:
    """Command-line overrides on the sweep; returns the new configs and what was overridden."""
    scenario, solver, sweep = configs
    overrides: t.Dict[str, t.Any] = {}
    if seed is not None:
        overrides["base_seed"] = seed
    if trials is not None:
        overrides["n_trials"] = trials
    if schemes is not None:
        try:
            parsed = tuple(SchemeId.parse(s) for s in schemes.split(",") if s.strip())
        except ValueError as e:
            raise ConfigError([f"--schemes: {e}"]) from e
        overrides["schemes"] = parsed
    sweep = sweep.replace(**overrides)
    return validate(scenario, solver, sweep), {k: _plain(v) for k, v in overrides.items()}
