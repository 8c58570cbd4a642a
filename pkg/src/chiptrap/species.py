"""Atomic species data."""

from dataclasses import dataclass

from .constants import mu_B


@dataclass(frozen=True)
class AtomSpecies:
    """Properties of the trapped atom.

    Attributes:
        mass: atomic mass in kg.
        g_F: Lande factor of the hyperfine state.
        m_F: magnetic quantum number.
        alpha: static scalar polarizability, C*m^2/V.
        stark_k: differential-Stark calibration, Hz per (V/m)^2.
        label: human-readable name.
    """

    mass: float
    g_F: float
    m_F: int
    alpha: float
    stark_k: float
    label: str = ""

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive for ground-state atoms")

    @property
    def mu_eff(self) -> float:
        """Effective magnetic moment mu_B * g_F * m_F, J/T."""
        return mu_B * self.g_F * self.m_F


# 7Li in |F=2, mF=2>: mass 7.016 u; alpha = 164.1 a.u.; the Stark
# calibration reproduces a 450 kHz detuning at 10 kV/cm.
LI7 = AtomSpecies(
    mass=1.1650e-26,
    g_F=0.5,
    m_F=2,
    alpha=2.706e-39,
    stark_k=450e3 / 1e6**2,
    label="7Li |F=2,mF=2>",
)
