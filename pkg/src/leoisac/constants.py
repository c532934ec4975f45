"""Physical constants shared by the geometry and link-budget code."""

from dataclasses import dataclass


@dataclass(frozen=True)
class GeometryConstants:
    G: float = 6.674e-11  # m^3 / (kg s^2)
    M_E: float = 5.972e24  # kg
    R_E: float = 6371.0e3  # m
    v_c: float = 299_792_458.0  # m/s
    omega_E: float = 7.2921159e-5  # rad/s

    @property
    def mu(self) -> float:
        return self.G * self.M_E


CONSTANTS = GeometryConstants()

R_E = CONSTANTS.R_E
SPEED_OF_LIGHT = CONSTANTS.v_c
