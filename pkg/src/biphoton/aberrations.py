"""Per-arm polynomial phase profiles and their nonlocal cancellation partners.

An aberrated arm multiplies the joint amplitude by exp[i*phi(coordinate)]
along its own axis.  Profiles are stored as derivative values
c_n = phi^(n)(0), matching how quadratic coefficients are usually quoted
(phi''(0) in mm^2), so no factorial bookkeeping leaks into user input.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import BasisMismatchError, InsufficientOrderError, InvalidParameterError
from .grids import Basis, BiphotonGrid

__all__ = [
    "PhaseDomain",
    "PhaseProfile",
    "Arm",
    "ArmAssignment",
    "apply_aberration",
    "cancellation_partner",
    "joint_phase_expansion",
    "DEFAULT_MAX_ORDER",
]

# Profiles are padded with zeros up to this order so that expansions through
# the cubic always have two spare orders available.
DEFAULT_MAX_ORDER = 5


class PhaseDomain(Enum):
    """Coordinate the polynomial phase is a function of."""

    MOMENTUM = "momentum"   # phi(kappa), c_n in mm^n
    POSITION = "position"   # theta(x),  c_n in mm^-n

    @property
    def basis(self) -> Basis:
        return Basis.MOMENTUM if self is PhaseDomain.MOMENTUM else Basis.POSITION


class Arm(Enum):
    SIGNAL = "signal"
    IDLER = "idler"


def _canonical_unit(order: int, domain: PhaseDomain) -> str:
    if order == 0:
        return "rad"
    exponent = order if domain is PhaseDomain.MOMENTUM else -order
    return f"mm^{exponent}"


def _normalise_unit(unit: str) -> str:
    u = unit.replace(" ", "").lower()
    if u in ("rad", "1", "mm^0"):
        return "rad"
    if u == "mm":
        return "mm^1"
    if u == "1/mm":
        return "mm^-1"
    m = re.fullmatch(r"mm\^(-?\d+)", u)
    if m:
        return f"mm^{int(m.group(1))}"
    raise InvalidParameterError(f"unrecognised phase-coefficient unit {unit!r}")


@dataclass(frozen=True)
class PhaseProfile:
    """Polynomial phase phi(u) = sum_n c_n u^n / n! about u = 0.

    ``coeffs[n]`` is the n-th derivative at zero.  Evaluation is exact
    polynomial arithmetic; nothing is truncated beyond the stored order.
    """

    domain: PhaseDomain
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise InvalidParameterError("a profile needs at least the constant term")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @classmethod
    def zero(cls, domain: PhaseDomain = PhaseDomain.MOMENTUM) -> "PhaseProfile":
        return cls(domain, (0.0,) * (DEFAULT_MAX_ORDER + 1))

    @classmethod
    def from_derivatives(
        cls,
        domain: PhaseDomain,
        derivatives: dict[int, float],
        max_order: int = DEFAULT_MAX_ORDER,
    ) -> "PhaseProfile":
        """Build a profile from ``{order: phi^(order)(0)}``, zero elsewhere."""
        if any(o < 0 for o in derivatives):
            raise InvalidParameterError("derivative orders must be non-negative")
        top = max(max_order, max(derivatives, default=0))
        coeffs = [0.0] * (top + 1)
        for order, value in derivatives.items():
            coeffs[order] = float(value)
        return cls(domain, tuple(coeffs))

    @classmethod
    def from_terms(
        cls,
        terms: Iterable[tuple[int, float, str]],
        domain: PhaseDomain,
        max_order: int = DEFAULT_MAX_ORDER,
    ) -> "PhaseProfile":
        """Build a profile from (order, value, unit) triples.

        The unit of each term must match the domain: mm^n for momentum-domain
        profiles, mm^-n for position-domain ones ("rad" for order 0).
        """
        derivatives: dict[int, float] = {}
        for order, value, unit in terms:
            if order in derivatives:
                raise InvalidParameterError(f"duplicate phase term of order {order}")
            expected = _canonical_unit(order, domain)
            if _normalise_unit(unit) != _normalise_unit(expected):
                raise InvalidParameterError(
                    f"order-{order} coefficient in a {domain.value}-domain profile "
                    f"must carry unit {expected}, got {unit!r}"
                )
            derivatives[order] = value
        return cls.from_derivatives(domain, derivatives, max_order=max_order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def derivative_at_zero(self, order: int) -> float:
        return self.coeffs[order] if order <= self.order else 0.0

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def evaluate(self, u):
        """Phase in radians at coordinate(s) ``u``."""
        u = np.asarray(u, dtype=float)
        # Horner on the monomial coefficients c_n/n!.
        acc = np.zeros_like(u)
        for n in range(self.order, -1, -1):
            acc = acc * u + self.coeffs[n] / math.factorial(n)
        return acc


@dataclass(frozen=True)
class ArmAssignment:
    """One phase profile attached to one arm; a missing arm is the identity."""

    arm: Arm
    profile: PhaseProfile


def apply_aberration(state: BiphotonGrid, assignment: ArmAssignment) -> BiphotonGrid:
    """Multiply the joint amplitude by exp[i*phi] along the assigned arm.

    The state basis must match the profile domain (momentum-domain profiles
    act on momentum-basis states, position-domain ones on position-basis
    states); a pure phase leaves the normalisation unchanged.
    """
    profile = assignment.profile
    if state.basis is not profile.domain.basis:
        raise BasisMismatchError(
            f"{profile.domain.value}-domain profile cannot act on a "
            f"{state.basis.value}-basis state; transform the state first"
        )
    axis = state.axis_s if assignment.arm is Arm.SIGNAL else state.axis_i
    phase = np.exp(1j * profile.evaluate(axis.coordinates))
    if assignment.arm is Arm.SIGNAL:
        amplitude = state.amplitude * phase[:, None]
    else:
        amplitude = state.amplitude * phase[None, :]
    return BiphotonGrid(state.axis_s, state.axis_i, state.basis, amplitude)


def cancellation_partner(profile: PhaseProfile) -> PhaseProfile:
    """Profile for the other arm that cancels ``profile`` nonlocally.

    For perfectly anticorrelated momenta the joint phase is
    phi_out(kappa) + phi_in(-kappa), which vanishes identically when
    c_n_out = -(-1)^n * c_n_in: even orders flip sign, odd orders are kept.
    The operation is an involution.
    """
    coeffs = tuple(-((-1.0) ** n) * c for n, c in enumerate(profile.coeffs))
    return PhaseProfile(profile.domain, coeffs)


def joint_phase_expansion(
    phi_s: PhaseProfile, phi_i: PhaseProfile, order: int
) -> list[float]:
    """Series coefficients of phi_s(kappa) + phi_i(-kappa) through ``order``.

    Entry n is [phi_s^(n)(0) + (-1)^n * phi_i^(n)(0)] / n!; the list is all
    zeros exactly when the cancellation condition holds through that order.
    """
    if order < 0:
        raise InvalidParameterError("expansion order must be non-negative")
    if order > phi_s.order or order > phi_i.order:
        raise InsufficientOrderError(
            f"expansion to order {order} requested, but profiles store orders "
            f"{phi_s.order} and {phi_i.order}"
        )
    return [
        (phi_s.coeffs[n] + ((-1.0) ** n) * phi_i.coeffs[n]) / math.factorial(n)
        for n in range(order + 1)
    ]
