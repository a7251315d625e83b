"""
Matter - Spin/polarization tensor and the Maxwell-like stress-energy of the vortex model

Geometric units throughout (G = c = κ = 1), masses as lengths.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from loguru import logger

from .algebra import MINKOWSKI
from .exceptions import MatterError


@dataclass(frozen=True, eq=False)
class SpinPolarization:
    """Polarization p and spin s of a particle, both 3-vectors"""
    p: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        s = np.asarray(self.s, dtype=float)
        if p.shape != (3,) or s.shape != (3,):
            raise MatterError(f"p and s must be 3-vectors, got {p.shape} and {s.shape}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "s", s)


@dataclass(frozen=True, eq=False)
class SpinTensor:
    S: np.ndarray
    frame: str = "lab"


@dataclass(frozen=True, eq=False)
class StressEnergy:
    T: np.ndarray

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.T - self.T.T)))

    def trace(self) -> float:
        """η^{μν} T_μν"""
        return float(np.einsum("mn,mn->", np.linalg.inv(MINKOWSKI), self.T))


# T_00 of the block form over the rest mass p² + s²; the spherical
# representation quotes T_00 = T_rr = m instead
REST_FRAME_T00_RATIO = 0.5


class RestFrameComponents(NamedTuple):
    """Spherical components of a rest-frame particle (p ∥ s along the radius)"""
    t00: float
    trr: float
    rest_mass: float


def spin_tensor(sp: SpinPolarization, layout: str = "antisymmetric", frame: str = "lab") -> SpinTensor:
    """
    Fill S_μν with p in the time-space block and s in the space-space block

    Args:
        sp: polarization and spin
        layout: "antisymmetric" puts S_ij = ε_ijk s_k (S_12 = s3, S_13 = −s2,
            S_23 = s1); "printed" keeps S_13 = +s2 as it appears in print
        frame: label carried along

    Returns:
        SpinTensor
    """
    p, s = sp.p, sp.s
    S = np.zeros((4, 4))
    S[0, 1:] = p
    if layout == "antisymmetric":
        S[1, 2], S[1, 3], S[2, 3] = s[2], -s[1], s[0]
    elif layout == "printed":
        S[1, 2], S[1, 3], S[2, 3] = s[2], s[1], s[0]
    else:
        raise MatterError(f"unknown layout {layout!r}")
    S = S - S.T
    return SpinTensor(S=S, frame=frame)


def stress_energy(S: SpinTensor, tolerance: float = 1e-12) -> StressEnergy:
    """
    T_μν = −[S_μλ η^{λκ} S_κν + ¼ η_μν S_αβ S^{αβ}]

    Symmetric and η-traceless for any antisymmetric S.
    """
    S_low = np.asarray(S.S, dtype=float)
    if np.max(np.abs(S_low + S_low.T)) > tolerance * max(1.0, np.max(np.abs(S_low))):
        raise MatterError("spin tensor is not antisymmetric")
    eta = MINKOWSKI
    eta_inv = np.linalg.inv(eta)
    S_up = eta_inv @ S_low @ eta_inv
    contraction = np.einsum("ab,ab->", S_low, S_up)
    T = -(S_low @ eta_inv @ S_low + 0.25 * eta * contraction)
    return StressEnergy(T=0.5 * (T + T.T))


def polarization_stress(sp: SpinPolarization) -> np.ndarray:
    """P_ij = p_i p_j + s_i s_j − ½ δ_ij (p² + s²)"""
    p, s = sp.p, sp.s
    return np.outer(p, p) + np.outer(s, s) - 0.5 * np.eye(3) * (p @ p + s @ s)


def stress_energy_blocks(sp: SpinPolarization) -> StressEnergy:
    """Explicit block form [[½(p²+s²), U], [U, −P]] with U = p×s"""
    T = np.zeros((4, 4))
    T[0, 0] = 0.5 * (sp.p @ sp.p + sp.s @ sp.s)
    flux = energy_flux(sp)
    T[0, 1:] = flux
    T[1:, 0] = flux
    T[1:, 1:] = -polarization_stress(sp)
    return StressEnergy(T=T)


def energy_flux(sp: SpinPolarization) -> np.ndarray:
    """U = p × s; zero iff the particle is in its rest frame"""
    return np.cross(sp.p, sp.s)


def rest_mass(sp: SpinPolarization) -> float:
    """m = p·p + s·s"""
    return float(sp.p @ sp.p + sp.s @ sp.s)


def rest_frame_components(sp: SpinPolarization, tolerance: float = 1e-12) -> RestFrameComponents:
    """
    T_00 and the radial-radial component for a particle whose p and s are parallel

    The radial direction is taken along p (or s when p vanishes). Both
    components come from the block form, so T_00 = (p² + s²)/2 =
    REST_FRAME_T00_RATIO · m and T_rr = −T_00. A WARNING is logged since the
    spherical representation states T_00 = T_rr = m.
    """
    flux = energy_flux(sp)
    scale = max(rest_mass(sp), 1e-300)
    if np.linalg.norm(flux) > tolerance * scale:
        raise MatterError("p and s are not parallel; the particle is not at rest")
    axis = sp.p if np.linalg.norm(sp.p) > 0 else sp.s
    T = stress_energy(spin_tensor(sp)).T
    if np.linalg.norm(axis) == 0:
        return RestFrameComponents(t00=0.0, trr=0.0, rest_mass=0.0)
    n = axis / np.linalg.norm(axis)
    trr = float(n @ T[1:, 1:] @ n)
    components = RestFrameComponents(t00=float(T[0, 0]), trr=trr, rest_mass=rest_mass(sp))
    if not np.isclose(components.t00, components.rest_mass):
        logger.warning(
            f"Rest frame: T_00={components.t00:.6g}, T_rr={components.trr:.6g} from the block form, "
            f"p²+s²={components.rest_mass:.6g}; the spherical representation T_00 = T_rr = m "
            f"is {1 / REST_FRAME_T00_RATIO:g}x larger"
        )
    return components


def boost_matrix(v: np.ndarray) -> np.ndarray:
    """Standard Lorentz boost with velocity v (c = 1)"""
    v = np.asarray(v, dtype=float)
    speed2 = float(v @ v)
    if speed2 >= 1.0:
        raise MatterError(f"|v| = {np.sqrt(speed2):.6g} is not subluminal")
    gamma = 1.0 / np.sqrt(1.0 - speed2)
    B = np.eye(4)
    B[0, 0] = gamma
    B[0, 1:] = gamma * v
    B[1:, 0] = gamma * v
    if speed2 > 0:
        B[1:, 1:] += (gamma - 1.0) * np.outer(v, v) / speed2
    return B


def boost_stress_energy(T: StressEnergy, v: np.ndarray) -> StressEnergy:
    """Λ T Λᵀ; symmetry and tracelessness are preserved"""
    B = boost_matrix(v)
    return StressEnergy(T=B @ T.T @ B.T)
