"""
Radiation - Quadrupole radiation of binaries: numeric Q⃛ power, Peters-Matthews, orbital speed-up

Geometric units unless a function says otherwise; the SI form of the
speed-up keeps G and c explicit through astropy.constants.
"""

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from astropy import constants as const
from astropy import units as u
from loguru import logger
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .exceptions import RadiationError

MIN_SAMPLES_PER_ORBIT = 64
PAD = 3

# f'''(0) h³ ≈ Σ c_k f(k h), k = −3..3
THIRD_DERIVATIVE_STENCIL = np.array([1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0])
# f''(0) h² ≈ Σ c_k f(k h), k = −3..3
SECOND_DERIVATIVE_STENCIL = np.array([1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0])


@dataclass(frozen=True)
class KeplerBinary:
    """Pulsar mass, companion mass, orbital period (geometric lengths) and eccentricity"""
    m_p: float
    m_c: float
    P_b: float
    e: float

    def __post_init__(self):
        if self.m_p <= 0 or self.m_c <= 0:
            raise RadiationError(f"masses must be positive, got {self.m_p}, {self.m_c}")
        if self.P_b <= 0:
            raise RadiationError(f"orbital period must be positive, got {self.P_b}")
        if not 0.0 <= self.e < 1.0:
            raise RadiationError(f"eccentricity {self.e} outside [0, 1)")

    @property
    def total_mass(self) -> float:
        return self.m_p + self.m_c

    @property
    def semi_major_axis(self) -> float:
        """Kepler III: a³ = M (P_b / 2π)²"""
        return (self.total_mass * (self.P_b / (2.0 * np.pi)) ** 2) ** (1.0 / 3.0)


@dataclass(frozen=True, eq=False)
class BinaryTrajectory:
    """Uniformly sampled body positions (n, n_bodies, 3); `pad` extra samples sit at each end"""
    times: np.ndarray
    positions: np.ndarray
    masses: np.ndarray
    samples_per_orbit: int
    pad: int = PAD

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def core(self) -> slice:
        """Samples covering exactly one orbit, each with full stencil support"""
        return slice(self.pad, self.pad + self.samples_per_orbit)

    def rotated(self, rotation: np.ndarray) -> "BinaryTrajectory":
        return BinaryTrajectory(self.times, self.positions @ np.asarray(rotation).T, self.masses,
                                self.samples_per_orbit, self.pad)

    def translated(self, offset: Sequence[float]) -> "BinaryTrajectory":
        return BinaryTrajectory(self.times, self.positions + np.asarray(offset, dtype=float), self.masses,
                                self.samples_per_orbit, self.pad)


@dataclass(frozen=True, eq=False)
class QuadrupoleSeries:
    """q_ij = Σ m x_i x_j and its trace-free part Q per sample"""
    times: np.ndarray
    q: np.ndarray
    Q: np.ndarray

    def trace_residual(self) -> float:
        return float(np.max(np.abs(np.trace(self.Q, axis1=-2, axis2=-1))))


class MomentContent(NamedTuple):
    """Largest |d/dt Σm|, |d²/dt² Σ m x| and |Q⃛| along a trajectory"""
    monopole: float
    dipole: float
    quadrupole: float

    def dipole_free(self, tolerance: float) -> bool:
        return self.monopole <= tolerance and self.dipole <= tolerance


class PowerSeries(NamedTuple):
    times: np.ndarray
    power: np.ndarray
    average: float


# ===================
# Moments
# ===================

def quadrupole_moment(masses: Sequence[float], positions: np.ndarray) -> np.ndarray:
    """q_ij = Σ m x_i x_j for positions (..., n_bodies, 3)"""
    return np.einsum("b,...bi,...bj->...ij", np.asarray(masses, dtype=float), positions, positions)


def trace_free(q: np.ndarray) -> np.ndarray:
    """Q = q − (tr q / 3) I"""
    return q - np.trace(q, axis1=-2, axis2=-1)[..., None, None] * np.eye(3) / 3.0


def quadrupole_series(traj: BinaryTrajectory) -> QuadrupoleSeries:
    q = quadrupole_moment(traj.masses, traj.positions)
    return QuadrupoleSeries(times=traj.times, q=q, Q=trace_free(q))


def _stencil_derivative(values: np.ndarray, stencil: np.ndarray, h: float, power: int) -> np.ndarray:
    """Apply a 7-point stencil along axis 0; the 3 samples at each end are dropped"""
    n = values.shape[0]
    if n < 7:
        raise RadiationError(f"need at least 7 samples for the stencil, got {n}")
    out = sum(c * values[k: n - 6 + k] for k, c in enumerate(stencil) if c != 0.0)
    return out / h**power


def third_derivative(values: np.ndarray, h: float) -> np.ndarray:
    return _stencil_derivative(values, THIRD_DERIVATIVE_STENCIL, h, 3)


def second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    return _stencil_derivative(values, SECOND_DERIVATIVE_STENCIL, h, 2)


# ===================
# Trajectories
# ===================

def kepler_binary_trajectory(m1: float, m2: float, a: float, e: float, samples_per_orbit: int = 1024,
                             n_orbits: int = 1, tol: float = 1e-12) -> BinaryTrajectory:
    """
    Newtonian two-body orbit in the centre-of-mass frame, starting at periastron,
    sampled uniformly over n_orbits with PAD extra samples before and after
    """
    if m1 <= 0 or m2 <= 0 or a <= 0:
        raise RadiationError(f"need positive masses and semi-major axis, got {m1}, {m2}, {a}")
    if not 0.0 <= e < 1.0:
        raise RadiationError(f"eccentricity {e} outside [0, 1)")
    if samples_per_orbit < MIN_SAMPLES_PER_ORBIT:
        raise RadiationError(f"{samples_per_orbit} samples per orbit is below {MIN_SAMPLES_PER_ORBIT}")
    M = m1 + m2
    period = 2.0 * np.pi * np.sqrt(a**3 / M)
    h = period / samples_per_orbit
    count = n_orbits * samples_per_orbit + 2 * PAD
    t_eval = h * (np.arange(count) - PAD)
    r_peri = a * (1.0 - e)
    v_peri = np.sqrt(M * (1.0 + e) / r_peri)

    def rhs(t, y):
        r = y[:3]
        return np.concatenate([y[3:], -M * r / np.linalg.norm(r) ** 3])

    y0 = np.array([r_peri, 0.0, 0.0, 0.0, v_peri, 0.0])
    # integrate backwards and forwards from periastron so the padding is exact too
    back = solve_ivp(rhs, (0.0, t_eval[0]), y0, method="DOP853", rtol=tol, atol=tol * a * 1e-3,
                     t_eval=t_eval[:PAD][::-1])
    fwd = solve_ivp(rhs, (0.0, t_eval[-1]), y0, method="DOP853", rtol=tol, atol=tol * a * 1e-3,
                    t_eval=t_eval[PAD:])
    if back.status < 0 or fwd.status < 0:
        raise RadiationError(f"Kepler integration failed: {back.message or fwd.message}")
    rel = np.concatenate([back.y[:3, ::-1], fwd.y[:3]], axis=1).T
    positions = np.stack([(m2 / M) * rel, -(m1 / M) * rel], axis=1)
    logger.debug(f"Kepler trajectory: e={e}, {count} samples, h={h:.6g}")
    return BinaryTrajectory(t_eval, positions, np.array([m1, m2], dtype=float), samples_per_orbit)


# ===================
# Radiated power
# ===================

def radiated_power_numeric(traj: BinaryTrajectory) -> PowerSeries:
    """
    dE/dt = −(1/5) Q⃛_jk Q⃛_jk from 7-point third derivatives, averaged over one orbit

    Raises:
        RadiationError: fewer than MIN_SAMPLES_PER_ORBIT samples per orbit
    """
    if traj.samples_per_orbit < MIN_SAMPLES_PER_ORBIT:
        raise RadiationError(f"{traj.samples_per_orbit} samples per orbit is below {MIN_SAMPLES_PER_ORBIT}")
    series = quadrupole_series(traj)
    Q3 = third_derivative(series.Q, traj.spacing)
    power = -0.2 * np.einsum("tjk,tjk->t", Q3, Q3)
    times = traj.times[PAD: len(traj.times) - PAD]
    one_orbit = power[: traj.samples_per_orbit]
    return PowerSeries(times=times, power=power, average=float(np.mean(one_orbit)))


def peters_matthews_power(m1: float, m2: float, r: float, v: float, rdot: float) -> float:
    """−(8/15) (μ² M² / r⁴)(12 v² − 11 ṙ²), pointwise"""
    if r <= 0:
        raise RadiationError(f"separation must be positive, got {r}")
    M = m1 + m2
    mu = m1 * m2 / M
    return float(-(8.0 / 15.0) * mu**2 * M**2 / r**4 * (12.0 * v**2 - 11.0 * rdot**2))


def eccentricity_enhancement(e: float) -> float:
    """(1 + 73e²/24 + 37e⁴/96)(1 − e²)^{−7/2}"""
    if not 0.0 <= e < 1.0:
        raise RadiationError(f"eccentricity {e} outside [0, 1)")
    return (1.0 + 73.0 * e**2 / 24.0 + 37.0 * e**4 / 96.0) / (1.0 - e**2) ** 3.5


def peters_matthews_average(m1: float, m2: float, a: float, e: float) -> float:
    """Orbit average −(32/5) m1² m2² M / a⁵ · f(e)"""
    return float(-(32.0 / 5.0) * m1**2 * m2**2 * (m1 + m2) / a**5 * eccentricity_enhancement(e))


def peters_matthews_trajectory_average(traj: BinaryTrajectory) -> float:
    """Time average of the pointwise Peters-Matthews power over one sampled orbit"""
    rel = traj.positions[:, 0] - traj.positions[:, 1]
    vel = np.gradient(rel, traj.spacing, axis=0, edge_order=2)
    core = traj.core
    m1, m2 = traj.masses
    values = [
        peters_matthews_power(m1, m2, np.linalg.norm(r), np.linalg.norm(v), (r @ v) / np.linalg.norm(r))
        for r, v in zip(rel[core], vel[core])
    ]
    return float(np.mean(values))


# ===================
# Orbital period decay
# ===================

def orbital_speedup(binary: KeplerBinary) -> float:
    """Ṗ_b = −(192π/5)(P_b/2π)^{−5/3} f(e) m_p m_c M^{−1/3} in geometric units (dimensionless)"""
    return float(-(192.0 * np.pi / 5.0) * (binary.P_b / (2.0 * np.pi)) ** (-5.0 / 3.0)
                 * eccentricity_enhancement(binary.e) * binary.m_p * binary.m_c * binary.total_mass ** (-1.0 / 3.0))


def orbital_speedup_si(m_p: u.Quantity, m_c: u.Quantity, P_b: u.Quantity, e: float) -> float:
    """
    The same formula with G and c explicit: −(192π/5) G^{5/3} c^{−5} (P_b/2π)^{−5/3}
    f(e) m_p m_c (m_p + m_c)^{−1/3}
    """
    value = (-(192.0 * np.pi / 5.0) * const.G ** (5.0 / 3.0) * const.c ** -5
             * (P_b / (2.0 * np.pi)) ** (-5.0 / 3.0) * eccentricity_enhancement(e)
             * m_p * m_c * (m_p + m_c) ** (-1.0 / 3.0))
    return float(value.decompose().to_value(u.dimensionless_unscaled))


def period_derivative_from_power(m1: float, m2: float, a: float, power: float) -> float:
    """Energy balance with Kepler III: Ṗ = −(3/2) P Ė / E, E = −m1 m2 / (2a)"""
    if a <= 0:
        raise RadiationError(f"semi-major axis must be positive, got {a}")
    period = 2.0 * np.pi * np.sqrt(a**3 / (m1 + m2))
    energy = -m1 * m2 / (2.0 * a)
    return float(-1.5 * period * power / energy)


# ===================
# Moment content and wave potential
# ===================

def moment_content(traj: BinaryTrajectory) -> MomentContent:
    """Rates of the monopole and mass dipole (both zero for a closed system) and |Q⃛|"""
    h = traj.spacing
    mass_series = np.full(len(traj.times), float(np.sum(traj.masses)))
    monopole = np.max(np.abs(np.gradient(mass_series, h)))
    dipole = np.einsum("b,tbi->ti", traj.masses, traj.positions)
    D2 = second_derivative(dipole, h)
    Q3 = third_derivative(quadrupole_series(traj).Q, h)
    content = MomentContent(float(monopole), float(np.max(np.abs(D2))), float(np.max(np.abs(Q3))))
    logger.debug(f"Moment content: {content}")
    return content


def wave_potential(series: QuadrupoleSeries, distance: float, t: float) -> np.ndarray:
    """h'_ij = (2/r) q̈_ij(t − r), q̈ by 7-point stencil and cubic-spline interpolation"""
    if distance <= 0:
        raise RadiationError(f"distance must be positive, got {distance}")
    h = float(series.times[1] - series.times[0])
    q2 = second_derivative(series.q, h)
    inner = series.times[PAD: len(series.times) - PAD]
    retarded = t - distance
    if not inner[0] <= retarded <= inner[-1]:
        raise RadiationError(f"retarded time {retarded:g} outside the sampled range [{inner[0]:g}, {inner[-1]:g}]")
    spline = CubicSpline(inner, q2, axis=0)
    return 2.0 / distance * spline(retarded)


def eccentricity_sweep(m1: float, m2: float, a: float, eccentricities: Sequence[float],
                       samples_per_orbit: int = 2048) -> List[Dict[str, float]]:
    """Numeric and closed-form power with the implied Ṗ for each eccentricity"""
    rows = []
    for e in eccentricities:
        traj = kepler_binary_trajectory(m1, m2, a, e, samples_per_orbit)
        numeric = radiated_power_numeric(traj).average
        closed = peters_matthews_average(m1, m2, a, e)
        rows.append({
            "e": float(e),
            "dEdt_numeric": numeric,
            "dEdt_closed_form": closed,
            "relative_error": abs(numeric - closed) / abs(closed),
            "pdot": period_derivative_from_power(m1, m2, a, closed),
        })
        logger.debug(f"Sweep e={e}: numeric={numeric:.6e}, closed={closed:.6e}")
    return rows
