"""
MRT beamformers, RIS-composed effective channels and the SINR/SNR metrics built on them.
"""

import dataclasses

import numpy as np

from risjam.geometry import ChannelSet, Rng

TWO_PI = 2.0 * np.pi
UNIT_MODULUS_TOL = 1e-12


def wrap_phase(theta):
    "Reduce angles to [0, 2π). np.mod sends tiny negatives to exactly 2π, those fold to 0."
    wrapped = np.mod(theta, TWO_PI)
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


@dataclasses.dataclass(frozen=True, eq=False)
class PhaseVector:
    """RIS phases θ in [0, 2π); v = exp(jθ), Φ = diag(v)."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if not np.all(np.isfinite(theta)):
            raise ValueError("Phase vector contains non-finite angles.")
        object.__setattr__(self, "theta", wrap_phase(theta))

    @classmethod
    def ones(cls, n: int) -> "PhaseVector":
        return cls(np.zeros(n))

    @classmethod
    def from_v(cls, v: np.ndarray) -> "PhaseVector":
        v = np.asarray(v, dtype=complex)
        if np.any(np.abs(np.abs(v) - 1.0) > UNIT_MODULUS_TOL):
            raise ValueError("RIS coefficients must have unit modulus.")
        return cls(np.angle(v))

    @classmethod
    def random(cls, n: int, rng: Rng) -> "PhaseVector":
        return cls(rng.uniform(0.0, TWO_PI, n))

    @property
    def v(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    @property
    def phi(self) -> np.ndarray:
        return np.diag(self.v)

    def __len__(self):
        return self.theta.size

    def with_element(self, ell: int, theta: float) -> "PhaseVector":
        updated = self.theta.copy()
        updated[ell] = theta
        return PhaseVector(updated)


@dataclasses.dataclass(frozen=True, eq=False)
class Beamformers:
    w_st: np.ndarray
    w_j_bar: np.ndarray
    p_j: float = 0.0

    @property
    def w_j(self) -> np.ndarray:
        return np.sqrt(self.p_j) * self.w_j_bar


@dataclasses.dataclass(frozen=True, eq=False)
class EffectiveChannels:
    h_s: np.ndarray
    h_i: np.ndarray
    h_m: np.ndarray


@dataclasses.dataclass(frozen=True)
class LinkMetrics:
    gamma_sr: float
    gamma_m: float


def _phases(ch: ChannelSet, phi: PhaseVector) -> np.ndarray:
    if len(phi) != ch.n_elements:
        raise ValueError(
            f"Phase vector has {len(phi)} elements, channels have N={ch.n_elements}."
        )
    return phi.v


def effective_channels(ch: ChannelSet, phi: PhaseVector) -> EffectiveChannels:
    v = _phases(ch, phi)
    ti_h = ch.H_TI.conj().T
    return EffectiveChannels(
        h_s=ch.h_TR + (ch.h_IR.conj() * v) @ ti_h,
        h_i=ch.h_KR + (ch.h_IR.conj() * v) @ ch.H_KI,
        h_m=ch.h_TM + (ch.h_IM.conj() * v) @ ti_h,
    )


def mrt_st(ch: ChannelSet, p_st: float) -> np.ndarray:
    norm = np.linalg.norm(ch.h_TR)
    if norm == 0:
        raise ValueError("MRT needs a nonzero ST-SR channel h_TR.")
    return np.sqrt(p_st) * ch.h_TR.conj() / norm


def mrt_lj_direction(eff: EffectiveChannels) -> np.ndarray:
    norm = np.linalg.norm(eff.h_i)
    if norm == 0:
        raise ValueError("Jammer MRT needs a nonzero effective channel h_i.")
    return eff.h_i / norm


def beamformers(ch: ChannelSet, phi: PhaseVector, p_st: float, p_j: float = 0.0):
    return Beamformers(
        w_st=mrt_st(ch, p_st),
        w_j_bar=mrt_lj_direction(effective_channels(ch, phi)),
        p_j=p_j,
    )


def received_powers(ch: ChannelSet, phi: PhaseVector, p_st: float):
    "Returns (|h_s w_ST|^2, ||h_i||^2, |h_m w_ST|^2)."
    eff = effective_channels(ch, phi)
    w_st = mrt_st(ch, p_st)
    return (
        float(np.abs(eff.h_s @ w_st) ** 2),
        float(np.linalg.norm(eff.h_i) ** 2),
        float(np.abs(eff.h_m @ w_st) ** 2),
    )


def link_metrics(
    ch: ChannelSet,
    phi: PhaseVector,
    p_st: float,
    p_j: float,
    sigma2_sr: float,
    sigma2_m: float,
) -> LinkMetrics:
    if p_j < 0:
        raise ValueError(f"Jammer power must be >= 0, got {p_j}.")
    signal_sr, jam_gain, signal_m = received_powers(ch, phi, p_st)
    # MRT jamming: |h_i w̄_J^H|^2 == ||h_i||^2
    return LinkMetrics(
        gamma_sr=signal_sr / (p_j * jam_gain + sigma2_sr),
        gamma_m=signal_m / sigma2_m,
    )


def pj_lower_bound(
    ch: ChannelSet,
    phi: PhaseVector,
    p_st: float,
    gamma_sr_th: float,
    sigma2_sr: float,
) -> float:
    """Smallest jammer power pushing SR's SINR down to the threshold, 0 if already below."""
    signal_sr, jam_gain, _ = received_powers(ch, phi, p_st)
    if jam_gain == 0:
        raise ValueError("Jamming is impossible: effective jammer channel h_i is zero.")
    return max(0.0, (signal_sr - sigma2_sr * gamma_sr_th) / (gamma_sr_th * jam_gain))


def unit_modulus_violation(phi: PhaseVector) -> float:
    return float(np.max(np.abs(np.abs(phi.v) - 1.0))) if len(phi) else 0.0
