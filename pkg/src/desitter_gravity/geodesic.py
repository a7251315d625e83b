"""
Geodesic - Test-particle motion in the potential G_μν and the classic solar-system observables

The particle Lagrangian G_μν ẋ^μ ẋ^ν gives

    ẍ^λ + ½ (G⁻¹)^{λν} [∂_ρ G_μν + ∂_μ G_ρν − ∂_ν G_μρ] ẋ^μ ẋ^ρ = 0

integrated with scipy's DOP853. Orbits use the spherical closure of
field.solve_spherical in (t, r, θ, φ), restricted to the equatorial plane.
"""

from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import solve_ivp

from .exceptions import GeodesicError
from .field import AnalyticPotential, SphericalSolution, solve_spherical
from .units import solar_mass_geometric

CONDITION_LIMIT = 1e12


def _conditioning(G: np.ndarray) -> float:
    """Condition number of G after scaling by its diagonal, so coordinate scale factors do not count"""
    if not np.all(np.isfinite(G)):
        return np.inf
    d = np.sqrt(np.abs(np.diagonal(G)))
    if np.any(d == 0):
        return np.inf
    return float(np.linalg.cond(G / np.outer(d, d)))


@dataclass(frozen=True, eq=False)
class GeodesicState:
    """Position x^μ and affine velocity u^μ = dx^μ/dτ"""
    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if x.shape != (4,) or u.shape != (4,):
            raise GeodesicError(f"state needs 4-vectors, got {x.shape} and {u.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)

    def reversed(self) -> "GeodesicState":
        """Same point, velocity flipped (time reversal)"""
        return GeodesicState(self.x, -self.u)


@dataclass(eq=False)
class Trajectory:
    """Samples of a geodesic; `success` is False for partial runs, with the reason in `diagnostic`"""
    tau: np.ndarray
    x: np.ndarray
    u: np.ndarray
    potential: AnalyticPotential
    success: bool = True
    diagnostic: str = ""
    event_tau: Optional[List[np.ndarray]] = None
    event_states: Optional[List[np.ndarray]] = None

    def __len__(self) -> int:
        return len(self.tau)

    def state(self, index: int) -> GeodesicState:
        return GeodesicState(self.x[index], self.u[index])

    @property
    def final(self) -> GeodesicState:
        return self.state(-1)

    def norms(self) -> np.ndarray:
        """G_μν u^μ u^ν at every sample"""
        G = _metric(self.potential, self.x)
        return np.einsum("...mn,...m,...n->...", G, self.u, self.u)

    def norm_drift(self) -> float:
        norms = self.norms()
        return float(np.max(np.abs(norms - norms[0])))


# ===================
# Connection
# ===================

def _metric(potential: AnalyticPotential, x: np.ndarray) -> np.ndarray:
    return potential.G_fn(np.asarray(x, dtype=float))


def _metric_gradient(potential: AnalyticPotential, x: np.ndarray) -> np.ndarray:
    if potential.dG_fn is not None:
        return potential.dG_fn(x)
    return potential.derivatives(x)[0]


def _christoffel(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    """Γ^λ_{μρ} from G and dG[ρ, μ, ν] = ∂_ρ G_μν"""
    G_inv = np.linalg.inv(G)
    bracket = (np.einsum("rmn->mrn", dG) + dG - np.einsum("nmr->mrn", dG))
    return 0.5 * np.einsum("ln,mrn->lmr", G_inv, bracket)


def connection_coefficients(potential: AnalyticPotential, x: Sequence[float]) -> np.ndarray:
    """
    Γ^λ_{μρ} = ½ (G⁻¹)^{λν}[∂_ρ G_μν + ∂_μ G_ρν − ∂_ν G_μρ] at one point

    Args:
        potential: closure providing G (and dG, exact or numeric)
        x: 4-vector

    Returns:
        (4, 4, 4) array indexed [λ, μ, ρ]

    Raises:
        GeodesicError: G is singular at x
    """
    x = np.asarray(x, dtype=float)
    G = _metric(potential, x)
    if _conditioning(G) > CONDITION_LIMIT:
        raise GeodesicError(f"G is singular at x = {x.tolist()}")
    return _christoffel(G, _metric_gradient(potential, x))


def _torsion_force(potential: AnalyticPotential, x: np.ndarray, u: np.ndarray, G: np.ndarray) -> np.ndarray:
    """
    −2 (G⁻¹)^{λν} H_μνρ u^μ u^ρ

    The cubic term H_μνλ ẋ^μ ẋ^ν ẋ^λ of the particle Lagrangian vanishes for H
    antisymmetric in (ν, λ); this contorsion-like force is the coupling used
    instead. It is G-orthogonal to u, so the norm is unchanged.
    """
    H = potential._H(x)
    return -2.0 * np.linalg.solve(G, np.einsum("mnr,m,r->n", H, u, u))


def _geodesic_rhs(potential: AnalyticPotential, torsion_coupling: float) -> Callable:
    def rhs(tau: float, y: np.ndarray) -> np.ndarray:
        x, u = y[:4], y[4:]
        G = _metric(potential, x)
        try:
            gamma = _christoffel(G, _metric_gradient(potential, x))
        except np.linalg.LinAlgError:
            return np.full(8, np.nan)
        acc = -np.einsum("lmr,m,r->l", gamma, u, u)
        if torsion_coupling:
            acc = acc + torsion_coupling * _torsion_force(potential, x, u, G)
        return np.concatenate([u, acc])
    return rhs


def _singularity_event(potential: AnalyticPotential) -> Callable:
    def event(tau: float, y: np.ndarray) -> float:
        return np.log10(CONDITION_LIMIT) - np.log10(max(_conditioning(_metric(potential, y[:4])), 1.0))
    event.terminal = True
    event.direction = -1
    return event


# ===================
# Integration
# ===================

def integrate_geodesic(ic: GeodesicState, potential: AnalyticPotential, tau_end: float,
                       tol: float = 1e-10, events: Optional[List[Callable]] = None,
                       torsion_coupling: float = 0.0, max_step: float = np.inf,
                       samples: Optional[int] = None) -> Trajectory:
    """
    Adaptive integration of the geodesic equation from τ = 0 to tau_end

    Args:
        ic: initial state
        potential: the G (and H) closure
        tau_end: final affine parameter, > 0
        tol: relative tolerance target for the norm drift
        events: extra solve_ivp event functions
        torsion_coupling: scale of the torsion force (0 is pure geodesic motion)
        max_step: largest allowed step
        samples: evaluate the dense solution at this many uniform τ instead of the steps

    Returns:
        Trajectory; on step failure or a singular G the partial run with success=False
    """
    if tol <= 0:
        raise GeodesicError(f"tol must be positive, got {tol}")
    if tau_end <= 0:
        raise GeodesicError(f"tau_end must be positive, got {tau_end}")
    singular = _singularity_event(potential)
    all_events = [singular] + list(events or [])
    y0 = np.concatenate([ic.x, ic.u])
    solution = solve_ivp(
        _geodesic_rhs(potential, torsion_coupling), (0.0, tau_end), y0,
        method="DOP853", rtol=0.1 * tol, atol=1e-6 * tol,
        events=all_events, dense_output=samples is not None, max_step=max_step,
    )
    success, diagnostic = solution.status >= 0, ""
    if solution.status < 0:
        diagnostic = f"integration failed at tau={solution.t[-1]:.6g}: {solution.message}"
        logger.warning(diagnostic)
    elif len(solution.t_events[0]):
        success = False
        diagnostic = f"G became singular near x = {solution.y_events[0][0][:4].tolist()}"
        logger.warning(diagnostic)

    if samples is not None and solution.sol is not None:
        tau = np.linspace(0.0, solution.t[-1], samples)
        y = solution.sol(tau)
    else:
        tau, y = solution.t, solution.y
    logger.debug(f"Geodesic: {solution.nfev} evaluations, tau_end={tau[-1]:.6g}, status={solution.status}")
    return Trajectory(
        tau=tau, x=y[:4].T.copy(), u=y[4:].T.copy(), potential=potential,
        success=bool(success), diagnostic=diagnostic,
        event_tau=list(solution.t_events[1:]) if solution.t_events else None,
        event_states=list(solution.y_events[1:]) if solution.y_events else None,
    )


def killing_energy(traj: Trajectory) -> np.ndarray:
    """E = −G_0ν u^ν, conserved in a static field"""
    G = _metric(traj.potential, traj.x)
    return -np.einsum("...n,...n->...", G[..., 0, :], traj.u)


def killing_angular_momentum(traj: Trajectory) -> np.ndarray:
    """L = G_φν u^ν (index 3 in spherical coordinates), conserved in a spherical field"""
    G = _metric(traj.potential, traj.x)
    return np.einsum("...n,...n->...", G[..., 3, :], traj.u)


# ===================
# Initial conditions in the spherical field
# ===================

def _equatorial(r: float, phi: float = 0.0) -> np.ndarray:
    return np.array([0.0, r, 0.5 * np.pi, phi])


def circular_orbit_state(mass: float, r: float) -> GeodesicState:
    """
    Circular equatorial orbit: u^φ = u^t √(M/r³), u^t = (1 − 3M/r)^{-1/2}

    The coordinate angular frequency is exactly Keplerian in this field.
    """
    if r <= 3.0 * mass:
        raise GeodesicError(f"no circular timelike orbit at r={r:g} for M={mass:g}")
    ut = 1.0 / np.sqrt(1.0 - 3.0 * mass / r)
    return GeodesicState(_equatorial(r), np.array([ut, 0.0, 0.0, ut * np.sqrt(mass / r**3)]))


def bound_orbit_state(mass: float, r_peri: float, r_apo: float) -> GeodesicState:
    """
    Equatorial state at apoapsis for an orbit turning at r_peri and r_apo

    With f = 1 − 2M/r, E = f u^t and L = r² u^φ solve E²/f − L²/r² = 1 at both turning points.
    """
    f_p, f_a = 1.0 - 2.0 * mass / r_peri, 1.0 - 2.0 * mass / r_apo
    system = np.array([[1.0 / f_p, -1.0 / r_peri**2], [1.0 / f_a, -1.0 / r_apo**2]])
    E2, L2 = np.linalg.solve(system, np.ones(2))
    if not (0.0 < E2 < 1.0) or L2 <= 0.0:
        raise GeodesicError(f"no bound orbit between r={r_peri:g} and r={r_apo:g} for M={mass:g}")
    ut = np.sqrt(E2) / f_a
    return GeodesicState(_equatorial(r_apo), np.array([ut, 0.0, 0.0, np.sqrt(L2) / r_apo**2]))


def _radial_velocity_event(tau: float, y: np.ndarray) -> float:
    return y[5]


_radial_velocity_event.direction = 1


# ===================
# Classic observables
# ===================

class ApsidalMotion(NamedTuple):
    """Advance per orbit (radians) and mean perihelion-to-perihelion coordinate time"""
    advance: float
    period: float


def apsidal_motion(m_central: float, a_semimajor: float, e: float, n_orbits: int = 3,
                   tol: float = 1e-11) -> ApsidalMotion:
    """
    Apsidal advance and radial period of a bound orbit in the spherical field

    Lengths are scaled by the semi-major axis. Perihelia are the upward zero
    crossings of u^r, located by solve_ivp's event root finding; the advance
    and the period are averaged over `n_orbits` perihelion-to-perihelion
    intervals.

    Args:
        m_central: central mass (geometric, length), positive
        a_semimajor: semi-major axis (same unit)
        e: eccentricity in (0, 1)
        n_orbits: intervals to average, at least 3
        tol: integrator tolerance

    Returns:
        ApsidalMotion with the period in the unit of a_semimajor
    """
    if n_orbits < 3:
        raise GeodesicError(f"n_orbits must be at least 3, got {n_orbits}")
    if a_semimajor <= 0 or m_central <= 0:
        raise GeodesicError(f"need a > 0 and M > 0, got a={a_semimajor}, M={m_central}")
    if not 0.0 < e < 1.0:
        raise GeodesicError(f"eccentricity {e} does not give a bound orbit with a perihelion")
    mass = m_central / a_semimajor
    r_peri, r_apo = 1.0 - e, 1.0 + e
    if 2.0 * mass / r_peri > 0.1:
        raise GeodesicError(f"perihelion r={r_peri * a_semimajor:g} is in the strong field (2M/r > 0.1)")
    if 2.0 * mass / r_peri > 1e-2:
        logger.warning(f"Weak-field assumption is marginal: 2M/r_p = {2 * mass / r_peri:.3g}")

    ic = bound_orbit_state(mass, r_peri, r_apo)
    period = 2.0 * np.pi / np.sqrt(mass)
    traj = integrate_geodesic(ic, solve_spherical(mass, r_min=1e-3 * r_peri), (n_orbits + 1.2) * period,
                              tol=tol, events=[_radial_velocity_event])
    if not traj.success:
        raise GeodesicError(f"orbit integration failed: {traj.diagnostic}")
    perihelia = traj.event_states[0]
    if len(perihelia) < n_orbits + 1:
        raise GeodesicError(f"found {len(perihelia)} perihelia, need {n_orbits + 1}")
    span = perihelia[n_orbits] - perihelia[0]
    motion = ApsidalMotion(advance=float(span[3] / n_orbits - 2.0 * np.pi),
                           period=float(span[0] / n_orbits * a_semimajor))
    logger.info(f"Perihelion advance {motion.advance:.6e} rad/orbit (M/a={mass:.3e}, e={e})")
    return motion


def perihelion_precession(m_central: float, a_semimajor: float, e: float, n_orbits: int = 3,
                          tol: float = 1e-11) -> float:
    """
    Mean apsidal advance per orbit (radians); zero for a massless center

    Successive perihelia are u^r = 0 events root-found by solve_ivp during
    the integration, not radial minima interpolated from samples.
    """
    if m_central == 0 and a_semimajor > 0 and 0.0 < e < 1.0 and n_orbits >= 3:
        return 0.0
    return apsidal_motion(m_central, a_semimajor, e, n_orbits, tol).advance


def kepler_period_check(mass: float, r: float, tol: float = 1e-10) -> Tuple[float, float]:
    """Coordinate-time period of a circular orbit and the Kepler value 2π√(r³/M)"""
    def full_turn(tau, y):
        return y[3] - 2.0 * np.pi
    full_turn.terminal = True
    full_turn.direction = 1

    ic = circular_orbit_state(mass, r)
    span = 1.5 * 2.0 * np.pi * np.sqrt(r**3 / mass)
    traj = integrate_geodesic(ic, solve_spherical(mass, r_min=0.5 * r), span, tol=tol, events=[full_turn])
    if not len(traj.event_states[0]):
        raise GeodesicError("orbit did not complete a turn")
    return float(traj.event_states[0][0][0]), float(2.0 * np.pi * np.sqrt(r**3 / mass))


def light_deflection(m_central: float, impact_parameter: float, tol: float = 1e-12,
                     start_distance: float = 1e6) -> float:
    """
    Total bending of a null ray passing the mass (radians)

    The ray starts `start_distance` impact parameters away, travelling along +x
    at height b, and stops when it is back at the starting radius.
    """
    if impact_parameter <= 0 or m_central < 0:
        raise GeodesicError(f"need b > 0 and M >= 0, got b={impact_parameter}, M={m_central}")
    mass = m_central / impact_parameter
    if mass >= 1.0 / (3.0 * np.sqrt(3.0)):
        raise GeodesicError(f"impact parameter {impact_parameter:g} is captured (b <= 3√3 M)")
    if mass > 1e-2:
        logger.warning(f"Light deflection outside the weak field: M/b = {mass:.3g}")
    R = float(start_distance)
    r0 = np.hypot(R, 1.0)
    phi0 = np.arctan2(1.0, -R)
    x = np.array([0.0, r0, 0.5 * np.pi, phi0])
    ur, uphi = -R / r0, -1.0 / r0**2
    potential = solve_spherical(mass, r_min=2.0 * mass if mass > 0 else 1e-9)
    G = _metric(potential, x)
    ut = np.sqrt((G[1, 1] * ur**2 + G[3, 3] * uphi**2) / -G[0, 0])
    ic = GeodesicState(x, np.array([ut, ur, 0.0, uphi]))

    def back_out(tau, y):
        return y[1] - r0
    back_out.terminal = True
    back_out.direction = 1

    traj = integrate_geodesic(ic, potential, 3.0 * R, tol=tol, events=[back_out])
    if not traj.success or not len(traj.event_states[0]):
        raise GeodesicError(f"ray did not escape: {traj.diagnostic or 'no exit found'}")

    def heading(y: np.ndarray) -> float:
        r, phi, vr, vphi = y[1], y[3], y[5], y[7]
        vx = vr * np.cos(phi) - r * np.sin(phi) * vphi
        vy = vr * np.sin(phi) + r * np.cos(phi) * vphi
        return float(np.arctan2(vy, vx))

    final = traj.event_states[0][0]
    start = np.concatenate([ic.x, ic.u])
    deflection = abs(float(np.angle(np.exp(1j * (heading(final) - heading(start))))))
    logger.debug(f"Light deflection {deflection:.6e} rad at M/b={mass:.3e}")
    return deflection


def gravitational_redshift(m_central: float, r_emit: float, r_obs: float) -> float:
    """
    Observed over emitted frequency for static emitter and observer,
    √(G_00(r_emit) / G_00(r_obs)); r_obs may be infinite
    """
    if m_central < 0:
        raise GeodesicError(f"mass must be non-negative, got {m_central}")
    for label, r in (("r_emit", r_emit), ("r_obs", r_obs)):
        if r <= 2.0 * m_central:
            raise GeodesicError(f"{label}={r:g} is inside 2M={2 * m_central:g}")
    field = SphericalSolution(m_central, r_min=0.0)
    g_emit = field.radial_components(r_emit)[0]
    g_obs = -1.0 if np.isinf(r_obs) else field.radial_components(r_obs)[0]
    return float(np.sqrt(g_emit / g_obs))


def radial_potential_comparison(m: float, r: float) -> Tuple[float, float, float]:
    """(G_rr = 1 + 2M/r, Schwarzschild (1 − 2M/r)⁻¹, their difference)"""
    if r <= 2.0 * m:
        raise GeodesicError(f"r={r:g} is inside 2M={2 * m:g}")
    x = 2.0 * m / r
    ym, gr = 1.0 + x, 1.0 / (1.0 - x)
    return ym, gr, gr - ym


# ===================
# Bundle
# ===================

class Observable(NamedTuple):
    name: str
    value: float
    oracle: float
    tolerance: float
    relative: bool
    source: str

    @property
    def passed(self) -> bool:
        err = abs(self.value - self.oracle)
        if self.relative:
            err /= abs(self.oracle)
        return bool(err <= self.tolerance)


def classic_tests(m_sun: Optional[float] = None, mercury_a: float = 5.79e10, mercury_e: float = 0.2056,
                  sun_radius: float = 6.96e8, earth_mass: float = 4.435e-3, earth_radius: float = 6.371e6,
                  n_orbits: int = 3) -> List[Observable]:
    """The four solar-system observables against their weak-field closed forms (lengths in metres)"""
    m_sun = solar_mass_geometric() if m_sun is None else m_sun
    precession = perihelion_precession(m_sun, mercury_a, mercury_e, n_orbits)
    deflection = light_deflection(m_sun, sun_radius)
    shift = 1.0 - gravitational_redshift(earth_mass, earth_radius, np.inf)
    x = earth_mass / earth_radius
    x_ratio = 1e-3
    ratio = radial_potential_comparison(x_ratio, 1.0)[2] / x_ratio**2
    return [
        Observable("perihelion_precession", precession, 6 * np.pi * m_sun / (mercury_a * (1 - mercury_e**2)),
                   1e-2, True, "1PN apsidal advance 6πM/(a(1-e²))"),
        Observable("light_deflection", deflection, 4 * m_sun / sun_radius, 1e-2, True, "weak deflection 4M/b"),
        Observable("redshift", shift, x + 0.5 * x**2, 1e-6, True, "series 1 - sqrt(1-2M/r)"),
        Observable("radial_potential_ratio", ratio, 4.0, 2e-2, True, "(1-2x)^-1 - (1+2x) = 4(M/r)^2 + ..."),
    ]
