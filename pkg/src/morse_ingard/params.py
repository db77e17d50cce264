"""Physical parameters of the Morse-Ingard system and derived nondimensional
coefficients.

The two regimes bundled here (QEPAS and ROTADE) share sound speed, heat
capacity ratio and driving frequency; they differ in the viscous and thermal
lengths and in the pressure/temperature rate ``alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional gas parameters (SI units)."""

    ell_v: float
    ell_h: float
    alpha: float
    c: float
    gamma: float
    omega: float

    def __post_init__(self):
        for name in ("ell_v", "ell_h", "alpha", "c", "gamma", "omega"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")


@dataclass(frozen=True)
class DerivedParams:
    """Nondimensional groups and the scalar coefficients of the weak forms.

    Attributes
    ----------
    scriptM : float
        Thermal group ``ell_h * omega / c``.
    Lambda : float
        Viscous group ``ell_v * omega / c``.
    lambda_over_m : float
        Ratio ``Lambda / scriptM``.
    kappa_tilde : float
        Signed bracket ``gamma (1 - Lambda/scriptM) - Lambda/scriptM``; the
        pressure block subtracts this times the mass matrix.
    sigma1 : complex
        Scale of the temperature-row coupling, ``i (gamma - 1) / gamma``.
    sigma2 : float
        Scale of the pressure-row coupling, ``gamma (1 - Lambda/scriptM)``.
    """

    scriptM: float
    Lambda: float
    gamma: float
    lambda_over_m: float = field(init=False)
    kappa_tilde: float = field(init=False)
    sigma1: complex = field(init=False)
    sigma2: float = field(init=False)

    def __post_init__(self):
        if not (self.scriptM > 0.0 and self.Lambda > 0.0):
            raise ValueError("scriptM and Lambda must be positive")
        r = self.Lambda / self.scriptM
        g = self.gamma
        object.__setattr__(self, "lambda_over_m", r)
        object.__setattr__(self, "kappa_tilde", g * (1.0 - r) - r)
        object.__setattr__(self, "sigma1", 1j * (g - 1.0) / g)
        object.__setattr__(self, "sigma2", g * (1.0 - r))

    @property
    def sqrt_gamma(self) -> float:
        return math.sqrt(self.gamma)


def qepas_params() -> PhysicalParams:
    """Quartz-enhanced photoacoustic spectroscopy regime."""
    return PhysicalParams(
        ell_v=1.537e-7, ell_h=1.0157e-7, alpha=204.656, c=348.7, gamma=7.0 / 5.0, omega=2.061e5
    )


def rotade_params() -> PhysicalParams:
    """Resonant optothermoacoustic detection regime."""
    return PhysicalParams(
        ell_v=1.383e-5, ell_h=9.144e-6, alpha=2.274, c=348.7, gamma=7.0 / 5.0, omega=2.061e5
    )


REGIMES = {"QEPAS": qepas_params, "ROTADE": rotade_params}


def derive(p: PhysicalParams) -> DerivedParams:
    """Nondimensionalize; ``alpha`` does not enter the scaled equations."""
    return DerivedParams(
        scriptM=p.ell_h * p.omega / p.c,
        Lambda=p.ell_v * p.omega / p.c,
        gamma=p.gamma,
    )
