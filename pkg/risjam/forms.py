"""
Quadratic-form rewrite of the three link powers in the RIS phase vector v,
and the per-element sinusoidal coefficients the BCD sweep works with.

For X in {ST, J, M}: |v a_X + d_X|^2 = v A_X v^H + 2 Re{v b_X} + c_X with A_X = a_X a_X^H.
"""

import dataclasses
import typing as t
from enum import Enum

import numpy as np

from risjam.beamforming import PhaseVector, wrap_phase
from risjam.geometry import ChannelSet

DENOMINATOR_FLOOR = 1e-30


class FormKind(Enum):
    ST = "ST"
    J = "J"
    M = "M"


@dataclasses.dataclass(frozen=True, eq=False)
class QuadraticForm:
    kind: FormKind
    a: np.ndarray
    b: np.ndarray
    c: float

    @property
    def A(self) -> np.ndarray:
        return np.outer(self.a, self.a.conj())

    @property
    def n_elements(self) -> int:
        return self.a.size


@dataclasses.dataclass(frozen=True)
class PerElementCoeffs:
    """Varying θ_ℓ alone, the form equals Re{e^{jθ_ℓ} alpha} + beta = rho cos(θ_ℓ + phase) + beta."""

    alpha: complex
    beta: float

    @property
    def rho(self) -> float:
        return abs(self.alpha)

    @property
    def phase(self) -> float:
        return float(wrap_phase(np.angle(self.alpha)))

    def value(self, theta: t.Union[float, np.ndarray]) -> t.Union[float, np.ndarray]:
        return self.rho * np.cos(theta + self.phase) + self.beta


def build_form(
    kind: FormKind,
    ch: ChannelSet,
    w_st: np.ndarray,
    w_j_bar: t.Optional[np.ndarray] = None,
) -> QuadraticForm:
    if kind is FormKind.J:
        if w_j_bar is None:
            raise TypeError("The J form needs the jammer direction w_j_bar.")
        beam = w_j_bar.conj()
        cascade, direct = ch.h_IR.conj() * (ch.H_KI @ beam), ch.h_KR @ beam
    elif kind is FormKind.ST:
        cascade = ch.h_IR.conj() * (ch.H_TI.conj().T @ w_st)
        direct = ch.h_TR @ w_st
    elif kind is FormKind.M:
        cascade = ch.h_IM.conj() * (ch.H_TI.conj().T @ w_st)
        direct = ch.h_TM @ w_st
    else:  # pragma: no cover
        raise ValueError(f"Unknown form kind {kind}.")
    return QuadraticForm(
        kind=kind, a=cascade, b=cascade * np.conj(direct), c=float(np.abs(direct) ** 2)
    )


def _check(form: QuadraticForm, v: PhaseVector):
    if len(v) != form.n_elements:
        raise ValueError(
            f"Phase vector has {len(v)} elements, the {form.kind.name} form has {form.n_elements}."
        )


def eval_form(form: QuadraticForm, v: PhaseVector) -> float:
    _check(form, v)
    x = v.v
    return float(np.abs(x @ form.a) ** 2 + 2.0 * np.real(x @ form.b) + form.c)


def per_element_coeffs(form: QuadraticForm, v: PhaseVector, ell: int) -> PerElementCoeffs:
    """ell is zero-based."""
    _check(form, v)
    if not 0 <= ell < form.n_elements:
        raise ValueError(f"Element index {ell} out of range for N={form.n_elements}.")
    x = v.v
    others = np.ones(form.n_elements, dtype=bool)
    others[ell] = False
    rest = x[others] @ form.a[others]
    alpha = 2.0 * (form.b[ell] + form.a[ell] * np.conj(rest))
    beta = (
        abs(form.a[ell]) ** 2
        + abs(rest) ** 2
        + 2.0 * np.real(x[others] @ form.b[others])
        + form.c
    )
    return PerElementCoeffs(alpha=complex(alpha), beta=float(beta))
