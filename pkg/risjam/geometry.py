"""
Scenario geometry and random channel synthesis.
Nodes are placed in 3-D, every link gets log-distance path loss and Rayleigh or Rician fading.
"""

import dataclasses
import math
import typing as t
from enum import Enum

import numpy as np


# SECTION 1: Types / Literals
Rng = np.random.Generator


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value) if value > 0 else -math.inf


def dbm_to_watts(value_dbm: float) -> float:
    return db_to_linear(value_dbm - 30.0)


def watts_to_dbm(value_w: float) -> float:
    return linear_to_db(value_w) + 30.0


class FadingKind(Enum):
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"


class Link(Enum):
    """The seven links of the scenario, named by (from, to)."""

    TI = "ST-RIS"
    IR = "RIS-SR"
    KI = "LJ-RIS"
    IM = "RIS-LM"
    TM = "ST-LM"
    TR = "ST-SR"
    KR = "LJ-SR"


@dataclasses.dataclass(frozen=True)
class Position3D:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"Position coordinates must be finite, got {self}.")

    @classmethod
    def from_sequence(cls, s: t.Sequence[float]) -> "Position3D":
        if len(s) != 3:
            raise ValueError(f"A position needs exactly 3 coordinates, got {list(s)}.")
        return cls(*[float(c) for c in s])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def replace(self, **changes) -> "Position3D":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class FadingSpec:
    kind: FadingKind = FadingKind.RAYLEIGH
    rician_factor: float = 0.0

    @classmethod
    def rayleigh(cls):
        return cls(kind=FadingKind.RAYLEIGH)

    @classmethod
    def rician(cls, factor: float):
        return cls(kind=FadingKind.RICIAN, rician_factor=factor)

    def problems(self, prefix: str = "fading") -> t.List[str]:
        if self.rician_factor < 0 or not math.isfinite(self.rician_factor):
            return [f"{prefix}.rician_factor must be finite and >= 0, got {self.rician_factor}"]
        return []


@dataclasses.dataclass(frozen=True)
class PathLossSpec:
    pl0_db: float = -30.0
    d0: float = 1.0
    exponent: float = 2.0

    def problems(self, prefix: str = "path_loss") -> t.List[str]:
        problems = []
        if not self.d0 > 0:
            problems.append(f"{prefix}.d0_m must be > 0, got {self.d0}")
        if not self.exponent > 0:
            problems.append(f"{prefix}.exponent must be > 0, got {self.exponent}")
        return problems


@dataclasses.dataclass(frozen=True)
class LinkSpec:
    fading: FadingSpec = dataclasses.field(default_factory=FadingSpec)
    path_loss: PathLossSpec = dataclasses.field(default_factory=PathLossSpec)


def default_links(pl0_db: float = -30.0, d0: float = 1.0) -> t.Dict[Link, LinkSpec]:
    def spec(exponent, fading):
        return LinkSpec(fading=fading, path_loss=PathLossSpec(pl0_db, d0, exponent))

    return {
        Link.TI: spec(2.0, FadingSpec.rician(2.0)),
        Link.IR: spec(4.0, FadingSpec.rician(2.0)),
        Link.KI: spec(2.0, FadingSpec.rician(10.0)),
        Link.IM: spec(2.0, FadingSpec.rician(10.0)),
        Link.TM: spec(4.0, FadingSpec.rayleigh()),
        Link.TR: spec(4.0, FadingSpec.rayleigh()),
        Link.KR: spec(4.0, FadingSpec.rayleigh()),
    }


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """Full experiment description. Powers in watts, thresholds linear."""

    m_t: int = dataclasses.field(default=4, metadata={"key": "m_t"})
    n_elements: int = dataclasses.field(default=10, metadata={"key": "n_elements"})
    k_jammers: int = dataclasses.field(default=6, metadata={"key": "k_jammers"})
    st_position: Position3D = dataclasses.field(
        default=Position3D(20.0, 0.0, 3.0), metadata={"key": "st_position"}
    )
    sr_position: Position3D = dataclasses.field(
        default=Position3D(20.0, 100.0, 0.0), metadata={"key": "sr_position"}
    )
    ris_position: Position3D = dataclasses.field(
        default=Position3D(0.0, 20.0, 3.0), metadata={"key": "ris_position"}
    )
    deployment_center: Position3D = dataclasses.field(
        default=Position3D(20.0, 150.0, 0.0), metadata={"key": "deployment_center"}
    )
    deployment_radius: float = dataclasses.field(
        default=20.0, metadata={"key": "deployment_radius_m"}
    )
    links: t.Dict[Link, LinkSpec] = dataclasses.field(
        default_factory=default_links, metadata={"key": "links"}
    )
    sigma2_sr: float = dataclasses.field(
        default=dbm_to_watts(-90.0), metadata={"key": "sigma2_sr_dbm", "unit": "dbm"}
    )
    sigma2_m: float = dataclasses.field(
        default=dbm_to_watts(-90.0), metadata={"key": "sigma2_m_dbm", "unit": "dbm"}
    )
    gamma_sr_th: float = dataclasses.field(
        default=db_to_linear(-10.0), metadata={"key": "gamma_sr_th_db", "unit": "db"}
    )
    gamma_m_th: float = dataclasses.field(
        default=db_to_linear(12.0), metadata={"key": "gamma_m_th_db", "unit": "db"}
    )
    p_st: float = dataclasses.field(default=1.0, metadata={"key": "p_st_w"})
    p_j_max: float = dataclasses.field(default=10.0, metadata={"key": "p_j_max_w"})
    redraw_positions: bool = dataclasses.field(
        default=True, metadata={"key": "redraw_positions"}
    )

    def link(self, link: Link) -> LinkSpec:
        return self.links[link]

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def problems(self) -> t.List[str]:
        problems = []
        for name in ("m_t", "n_elements", "k_jammers"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                problems.append(f"scenario.{name} must be a positive integer, got {value!r}")
        for name in ("sigma2_sr", "sigma2_m", "p_st", "p_j_max"):
            if not getattr(self, name) > 0:
                problems.append(f"scenario.{name} must be > 0, got {getattr(self, name)}")
        for name in ("gamma_sr_th", "gamma_m_th"):
            if not (math.isfinite(getattr(self, name)) and getattr(self, name) > 0):
                problems.append(f"scenario.{name} must be finite and > 0, got {getattr(self, name)}")
        if not self.deployment_radius >= 0:
            problems.append(
                f"scenario.deployment_radius_m must be >= 0, got {self.deployment_radius}"
            )
        if missing := [link.name for link in Link if link not in self.links]:
            problems.append(f"scenario.links is missing {', '.join(missing)}")
        for link, spec in self.links.items():
            prefix = f"scenario.links.{link.name}"
            problems += spec.fading.problems(prefix) + spec.path_loss.problems(prefix)
        return problems


@dataclasses.dataclass(eq=False)
class ChannelSet:
    """One realization of all seven channels.

    Shapes: H_TI (M_t, N), h_IR (N,), H_KI (N, K), h_IM (N,), h_TM (M_t,), h_TR (M_t,), h_KR (K,).
    """

    H_TI: np.ndarray
    h_IR: np.ndarray
    H_KI: np.ndarray
    h_IM: np.ndarray
    h_TM: np.ndarray
    h_TR: np.ndarray
    h_KR: np.ndarray

    def __post_init__(self):
        m_t, n = np.shape(self.H_TI)
        k = np.shape(self.H_KI)[1] if np.ndim(self.H_KI) == 2 else -1
        expected = {
            "h_IR": (n,),
            "H_KI": (n, k),
            "h_IM": (n,),
            "h_TM": (m_t,),
            "h_TR": (m_t,),
            "h_KR": (k,),
        }
        for name, shape in expected.items():
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(
                    f"{name} has shape {np.shape(getattr(self, name))}, expected {shape}."
                )
        for f in dataclasses.fields(self):
            if not np.all(np.isfinite(getattr(self, f.name))):
                raise ValueError(f"{f.name} contains non-finite entries.")

    @property
    def m_t(self) -> int:
        return self.H_TI.shape[0]

    @property
    def n_elements(self) -> int:
        return self.H_TI.shape[1]

    @property
    def k_jammers(self) -> int:
        return self.H_KI.shape[1]

    def without_ris(self) -> "ChannelSet":
        "Same direct links, every RIS-related channel replaced by zeros."
        return dataclasses.replace(
            self,
            H_TI=np.zeros_like(self.H_TI),
            h_IR=np.zeros_like(self.h_IR),
            H_KI=np.zeros_like(self.H_KI),
            h_IM=np.zeros_like(self.h_IM),
        )

    def identical(self, other: "ChannelSet") -> bool:
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in dataclasses.fields(self)
        )


# SECTION 2: Large-scale model
def distance(a: Position3D, b: Position3D) -> float:
    return float(np.linalg.norm(a.as_array() - b.as_array()))


def path_loss_linear(spec: PathLossSpec, d: float) -> float:
    if d < spec.d0:
        raise ValueError(
            f"Distance {d} m is below the path-loss reference distance {spec.d0} m."
        )
    return db_to_linear(spec.pl0_db - 10.0 * spec.exponent * math.log10(d / spec.d0))


# SECTION 3: Small-scale model
def complex_gaussian(rng: Rng, rows: int, cols: int) -> np.ndarray:
    "i.i.d. CN(0, 1) entries."
    return (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    ) / math.sqrt(2.0)


def draw_small_scale(rng: Rng, spec: FadingSpec, rows: int, cols: int) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError(f"Fading matrix needs rows, cols >= 1, got ({rows}, {cols}).")
    scattered = complex_gaussian(rng, rows, cols)
    if spec.kind is FadingKind.RAYLEIGH:
        return scattered
    kappa = spec.rician_factor
    if math.isinf(kappa):
        return np.ones((rows, cols), dtype=complex)
    # all-ones line-of-sight component
    return math.sqrt(kappa / (kappa + 1.0)) + math.sqrt(1.0 / (kappa + 1.0)) * scattered


# SECTION 4: Placement and channel sets
def place_monitor_and_jammers(
    rng: Rng, scenario: ScenarioConfig
) -> t.Tuple[Position3D, t.List[Position3D]]:
    """LM first, then the K jammers, each uniform on the horizontal deployment disk."""
    count = scenario.k_jammers + 1
    radius = scenario.deployment_radius * np.sqrt(rng.random(count))
    angle = 2.0 * np.pi * rng.random(count)
    c = scenario.deployment_center
    points = [
        Position3D(c.x + r * math.cos(a), c.y + r * math.sin(a), c.z)
        for r, a in zip(radius, angle)
    ]
    return points[0], points[1:]


def _link_gain(scenario: ScenarioConfig, link: Link, a: Position3D, b: Position3D):
    return path_loss_linear(scenario.link(link).path_loss, distance(a, b))


def generate_channel_set(
    rng: Rng,
    scenario: ScenarioConfig,
    lm_position: Position3D,
    lj_positions: t.Sequence[Position3D],
) -> ChannelSet:
    if len(lj_positions) != scenario.k_jammers:
        raise ValueError(
            f"Expected {scenario.k_jammers} jammer positions, got {len(lj_positions)}."
        )
    m_t, n, k = scenario.m_t, scenario.n_elements, scenario.k_jammers
    st, sr, ris = scenario.st_position, scenario.sr_position, scenario.ris_position

    def draw(link: Link, rows: int, cols: int) -> np.ndarray:
        return draw_small_scale(rng, scenario.link(link).fading, rows, cols)

    # Direct links are drawn first so they stay common when only N changes.
    h_TR = math.sqrt(_link_gain(scenario, Link.TR, st, sr)) * draw(Link.TR, 1, m_t)[0]
    h_TM = (
        math.sqrt(_link_gain(scenario, Link.TM, st, lm_position))
        * draw(Link.TM, 1, m_t)[0]
    )
    kr_gain = np.array([_link_gain(scenario, Link.KR, lj, sr) for lj in lj_positions])
    h_KR = np.sqrt(kr_gain) * draw(Link.KR, 1, k)[0]

    H_TI = math.sqrt(_link_gain(scenario, Link.TI, st, ris)) * draw(Link.TI, m_t, n)
    h_IR = math.sqrt(_link_gain(scenario, Link.IR, ris, sr)) * draw(Link.IR, n, 1)[:, 0]
    ki_gain = np.array([_link_gain(scenario, Link.KI, lj, ris) for lj in lj_positions])
    H_KI = draw(Link.KI, n, k) * np.sqrt(ki_gain)[np.newaxis, :]
    h_IM = (
        math.sqrt(_link_gain(scenario, Link.IM, ris, lm_position))
        * draw(Link.IM, n, 1)[:, 0]
    )
    return ChannelSet(
        H_TI=H_TI, h_IR=h_IR, H_KI=H_KI, h_IM=h_IM, h_TM=h_TM, h_TR=h_TR, h_KR=h_KR
    )
