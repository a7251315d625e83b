"""
Cosmology - Homogeneous isotropic universe with G_00 = −1, G_ij = b a² δ_ij and torsion c, d

The scale factor coasts, a = a0 t / t0. The state (b, c, ċ, d, ḋ, ρ) is
integrated with ḃ from the first Robertson-Walker equation

    3ȧ(aḃ + bȧ − ȧ + ca)/a² = 8πρ

the torsion equations

    c̈a² + 3ċȧa − 3ȧ²c + äac − ȧab + aȧ − ḃa² − ca² = 0
    d̈a² − ȧ²d + aȧḋ − a²b²d = 0

and radiation-like matter ρ̇ = −4(ȧ/a)ρ. The second Robertson-Walker
equation (pressure p = ρ/3) is monitored as a residual. The Poincaré
approximation drops the torsion (c = d = 0).
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import solve_ivp

from .algebra import AlgebraMode
from .exceptions import CosmologyError
from .field import Grid, RefinementStudy, grid_derivative, grid_second_derivative

COSMOLOGY_MODES = (AlgebraMode.DESITTER, AlgebraMode.POINCARE)


@dataclass(frozen=True)
class CosmoParams:
    """Present-day boundary data at t0; d0 and its zero rate at t0 are a free choice"""
    a0: float = 1.0
    t0: float = 1.0
    rho0: float = 0.0
    b0: float = 1.0
    c0: float = 0.0
    d0: float = 0.0
    mode: AlgebraMode = AlgebraMode.DESITTER

    def __post_init__(self):
        if self.a0 <= 0 or self.t0 <= 0:
            raise CosmologyError(f"a0 and t0 must be positive, got a0={self.a0}, t0={self.t0}")
        if self.rho0 < 0:
            raise CosmologyError(f"rho0 must be non-negative, got {self.rho0}")
        mode = AlgebraMode(self.mode)
        if mode not in COSMOLOGY_MODES:
            raise CosmologyError(f"cosmology supports desitter and poincare, got {mode.value}")
        object.__setattr__(self, "mode", mode)

    @property
    def expansion_rate(self) -> float:
        """ȧ = a0 / t0"""
        return self.a0 / self.t0

    @property
    def torsion_constant(self) -> float:
        """C = (1/3t0)(−12c0 + 8πρ0 t0⁴)"""
        return (-12.0 * self.c0 + 8.0 * np.pi * self.rho0 * self.t0**4) / (3.0 * self.t0)

    def to_dict(self) -> Dict[str, object]:
        return {"a0": self.a0, "t0": self.t0, "rho0": self.rho0, "b0": self.b0,
                "c0": self.c0, "d0": self.d0, "mode": self.mode.value}


@dataclass(frozen=True)
class CosmoState:
    t: float
    a: float
    b: float
    c: float
    d: float
    rho: float
    b_dot: float = 0.0
    b_ddot: float = 0.0
    c_dot: float = 0.0
    c_ddot: float = 0.0
    d_dot: float = 0.0
    d_ddot: float = 0.0

    @property
    def a_dot(self) -> float:
        return self.a / self.t

    def to_row(self) -> Dict[str, float]:
        """Diagnostic row: (t, a, b, c, d, rho, H, Htilde, s, sddot)"""
        hubble = 1.0 / self.t
        if self.b > 0:
            beta = np.sqrt(self.b)
            beta_dot = self.b_dot / (2.0 * beta)
            beta_ddot = self.b_ddot / (2.0 * beta) - self.b_dot**2 / (4.0 * beta**3)
            h_tilde = hubble + beta_dot / beta
            s = beta * self.a
            s_ddot = beta_ddot * self.a + 2.0 * beta_dot * self.a_dot
        else:
            h_tilde = s = s_ddot = float("nan")
        return {"t": self.t, "a": self.a, "b": self.b, "c": self.c, "d": self.d, "rho": self.rho,
                "H": hubble, "Htilde": h_tilde, "s": s, "sddot": s_ddot}


class Residuals(NamedTuple):
    """Left minus right hand sides of the five equations"""
    rw1: float
    rw2: float
    torsion_c: float
    torsion_d: float
    matter: float

    def max_relative(self, scale: float) -> float:
        return max(abs(v) for v in self) / scale


@dataclass
class CosmoTrajectory:
    states: List[CosmoState] = field(default_factory=list)
    params: Optional[CosmoParams] = None
    success: bool = True
    diagnostic: str = ""
    rw2_residuals: List[float] = field(default_factory=list)

    def rows(self) -> List[Dict[str, float]]:
        return [s.to_row() for s in self.states]


# ===================
# Equations
# ===================

def _check_time(t: float) -> None:
    if not t > 0:
        raise CosmologyError(f"time must be positive, got {t}")


def desitter_residuals(state: CosmoState, a_ddot: float = 0.0, rho_dot: Optional[float] = None) -> Residuals:
    """
    Residuals of the two Robertson-Walker equations, the two torsion equations and
    matter conservation for a state carrying its derivatives; ȧ = a/t unless
    a_ddot says otherwise, ρ̇ defaults to the coasting value −4ρ/t
    """
    _check_time(state.t)
    if state.a <= 0:
        raise CosmologyError(f"scale factor must be positive, got {state.a}")
    a, ad, add = state.a, state.a_dot, a_ddot
    b, bd, bdd = state.b, state.b_dot, state.b_ddot
    c, cd, cdd = state.c, state.c_dot, state.c_ddot
    d, dd, ddd = state.d, state.d_dot, state.d_ddot
    rho = state.rho
    rho_dot = -4.0 * ad / a * rho if rho_dot is None else rho_dot
    rw1 = 3.0 * ad * (a * bd + b * ad - ad + c * a) / a**2 - 8.0 * np.pi * rho
    rw2 = ((-3.0 * ad * bd * a - bdd * a**2 - add * a * b - ad**2 * b + a * add - bdd * a**2
            - cd * a**2 - 2.0 * ad * a * c) / a**2 - 8.0 * np.pi * rho / 3.0)
    torsion_c = (cdd * a**2 + 3.0 * cd * ad * a - 3.0 * ad**2 * c + add * a * c - ad * a * b
                 + a * ad - bd * a**2 - c * a**2)
    torsion_d = ddd * a**2 - ad**2 * d + a * ad * dd - a**2 * b**2 * d
    matter = rho_dot + 4.0 * ad / a * rho
    return Residuals(float(rw1), float(rw2), float(torsion_c), float(torsion_d), float(matter))


def _b_rate(a: float, ad: float, b: float, c: float, rho: float) -> float:
    """ḃ solved from the first Robertson-Walker equation"""
    return (8.0 * np.pi * rho * a**2 / (3.0 * ad) - b * ad + ad - c * a) / a


def _rhs(params: CosmoParams):
    ad = params.expansion_rate
    torsion = params.mode == AlgebraMode.DESITTER

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        b, c, cd, d, dd, rho = y
        a = ad * t
        bd = _b_rate(a, ad, b, c, rho)
        if torsion:
            cdd = (-3.0 * cd * ad * a + 3.0 * ad**2 * c + ad * a * b - a * ad + bd * a**2 + c * a**2) / a**2
            ddd = (ad**2 * d - a * ad * dd + a**2 * b**2 * d) / a**2
        else:
            cdd = ddd = 0.0
        return np.array([bd, cd, cdd, dd, ddd, -4.0 * ad / a * rho])

    return rhs


def _state_from_vector(params: CosmoParams, t: float, y: np.ndarray, rhs, delta: float) -> CosmoState:
    """Full state with first derivatives from the equations and ḃ's rate by central differences"""
    rates = rhs(t, y)
    fwd = y + delta * rates
    back = y - delta * rates
    b_ddot = (rhs(t + delta, fwd)[0] - rhs(t - delta, back)[0]) / (2.0 * delta)
    return CosmoState(t=t, a=params.expansion_rate * t, b=y[0], c=y[1], d=y[3], rho=y[5],
                      b_dot=rates[0], b_ddot=b_ddot, c_dot=y[2], c_ddot=rates[2], d_dot=y[4], d_ddot=rates[4])


# ===================
# Closed forms
# ===================

def closed_form_desitter(t: float, params: CosmoParams, d_tol: float = 1e-10) -> CosmoState:
    """
    a = a0 t/t0, ρ = ρ0 a0⁴/a⁴,
    b = (1/12t²)[Ct⁴ − 3Ct³ + (12 + 8πρ0t0⁴)t² − 40πρ0t0⁴ t − 32πρ0t0⁴],
    c = (1/12)(−3Ct + 8πρ0t0⁴); d from its own ODE with d(t0) = d0, ḋ(t0) = 0
    """
    _check_time(t)
    C = params.torsion_constant
    R = params.rho0 * params.t0**4
    a = params.expansion_rate * t
    b = (C * t**2 - 3.0 * C * t + (12.0 + 8.0 * np.pi * R) - 40.0 * np.pi * R / t - 32.0 * np.pi * R / t**2) / 12.0
    bd = (2.0 * C * t - 3.0 * C + 40.0 * np.pi * R / t**2 + 64.0 * np.pi * R / t**3) / 12.0
    bdd = (2.0 * C - 80.0 * np.pi * R / t**3 - 192.0 * np.pi * R / t**4) / 12.0
    c = (-3.0 * C * t + 8.0 * np.pi * R) / 12.0
    d, dd, ddd = _solve_d(params, t, d_tol)
    return CosmoState(t=t, a=a, b=b, c=c, d=d, rho=params.rho0 * (params.a0 / a) ** 4,
                      b_dot=bd, b_ddot=bdd, c_dot=-C / 4.0, c_ddot=0.0, d_dot=dd, d_ddot=ddd)


def _solve_d(params: CosmoParams, t: float, tol: float) -> Tuple[float, float, float]:
    """d-equation along the closed-form b, from (d0, 0) at t0"""
    if params.d0 == 0.0:
        return 0.0, 0.0, 0.0
    ad = params.expansion_rate
    C = params.torsion_constant
    R = params.rho0 * params.t0**4

    def b_of(s):
        return (C * s**2 - 3.0 * C * s + (12.0 + 8.0 * np.pi * R) - 40.0 * np.pi * R / s - 32.0 * np.pi * R / s**2) / 12.0

    def rhs(s, y):
        a = ad * s
        return [y[1], (ad**2 * y[0] - a * ad * y[1] + a**2 * b_of(s) ** 2 * y[0]) / a**2]

    if t == params.t0:
        y = np.array([params.d0, 0.0])
    else:
        solution = solve_ivp(rhs, (params.t0, t), [params.d0, 0.0], method="DOP853", rtol=tol, atol=tol * 1e-3)
        if solution.status < 0:
            raise CosmologyError(f"d-equation failed: {solution.message}")
        y = solution.y[:, -1]
    return float(y[0]), float(y[1]), float(rhs(t, y)[1])


def closed_form_poincare(t: float, params: CosmoParams) -> CosmoState:
    """
    b = 1 − 8πρ0 / (3(a0⁴/t0⁴) t²) + K / ((a0/t0) t), K = (b0 + 8πρ0/(3a0⁴/t0²) − 1) a0;
    c = d = 0
    """
    _check_time(t)
    alpha = params.expansion_rate
    B = -8.0 * np.pi * params.rho0 / (3.0 * params.a0**4 / params.t0**4)
    K = (params.b0 + 8.0 * np.pi * params.rho0 / (3.0 * params.a0**4 / params.t0**2) - 1.0) * params.a0
    Kp = K / alpha
    a = alpha * t
    return CosmoState(
        t=t, a=a, b=1.0 + B / t**2 + Kp / t, c=0.0, d=0.0, rho=params.rho0 * (params.a0 / a) ** 4,
        b_dot=-2.0 * B / t**3 - Kp / t**2, b_ddot=6.0 * B / t**4 + 2.0 * Kp / t**3,
    )


def closed_form(t: float, params: CosmoParams) -> CosmoState:
    if params.mode == AlgebraMode.POINCARE:
        return closed_form_poincare(t, params)
    return closed_form_desitter(t, params)


def closed_form_residual_profile(params: CosmoParams, times: Sequence[float]) -> List[Dict[str, float]]:
    """Residuals of the closed form of the params' mode at each time"""
    rows = []
    for t in times:
        res = desitter_residuals(closed_form(t, params))
        rows.append({"t": float(t), **res._asdict()})
    worst = max(abs(r["rw1"]) for r in rows) if rows else 0.0
    if worst > 1e-8:
        logger.warning(f"Closed-form {params.mode.value} solution leaves an rw1 residual up to {worst:.3e}")
    return rows


# ===================
# Integration
# ===================

def initial_vector(params: CosmoParams) -> np.ndarray:
    """(b, c, ċ, d, ḋ, ρ) at t0"""
    if params.mode == AlgebraMode.POINCARE:
        return np.array([params.b0, 0.0, 0.0, 0.0, 0.0, params.rho0])
    return np.array([params.b0, params.c0, -params.torsion_constant / 4.0, params.d0, 0.0, params.rho0])


def integrate_cosmology(params: CosmoParams, t_start: float, t_end: float, tol: float = 1e-10,
                        samples: int = 101, method: str = "DOP853") -> CosmoTrajectory:
    """
    Integrate from the boundary data at t0 out to [t_start, t_end] in both directions

    Args:
        params: boundary data and mode; ċ(t0) = −C/4 from the closed-form torsion
        t_start, t_end: 0 < t_start < t_end
        tol: relative tolerance
        samples: uniformly spaced output times
        method: any solve_ivp method (LSODA for stiff runs)

    Returns:
        CosmoTrajectory; a failed leg gives the states reached with success=False
    """
    if not 0 < t_start < t_end:
        raise CosmologyError(f"need 0 < t_start < t_end, got {t_start}, {t_end}")
    if tol <= 0:
        raise CosmologyError(f"tol must be positive, got {tol}")
    times = np.linspace(t_start, t_end, samples)
    rhs = _rhs(params)
    y0 = initial_vector(params)
    traj = CosmoTrajectory(params=params)
    y_at = {}
    legs = (
        (t_start, times[times < params.t0][::-1]),
        (t_end, times[times > params.t0]),
    )
    if np.any(times == params.t0):
        y_at[params.t0] = y0
    for target, t_eval in legs:
        if not len(t_eval):
            continue
        solution = solve_ivp(rhs, (params.t0, target), y0, method=method, rtol=tol, atol=tol * 1e-3, t_eval=t_eval)
        if solution.status < 0:
            reached = solution.t[-1] if len(solution.t) else params.t0
            traj.success = False
            traj.diagnostic = f"integration stopped near t={reached:.6g}: {solution.message}"
            logger.warning(traj.diagnostic)
        for t, y in zip(solution.t, solution.y.T):
            y_at[float(t)] = y
    for t in sorted(y_at):
        state = _state_from_vector(params, t, y_at[t], rhs, delta=1e-6 * t)
        traj.states.append(state)
        traj.rw2_residuals.append(desitter_residuals(state).rw2)
    logger.info(f"Cosmology ({params.mode.value}): {len(traj.states)} states over [{t_start:g}, {t_end:g}]")
    return traj


def rw_refinement_study(params: CosmoParams, order: int = 4, levels: int = 3, half_width: Optional[float] = None,
                        base_points: int = 9) -> RefinementStudy:
    """
    Robertson-Walker residuals of the closed form with ḃ, b̈ and ċ taken by
    grid stencils on a time interval around t0, against the same residuals
    with exact derivatives; the gap is the stencil truncation error

    Args:
        params: boundary data and mode of the closed form
        order: 2 or 4
        levels: number of grids (each halves h)
        half_width: half the time interval, below t0 (default t0/4)
        base_points: points on the coarsest grid
    """
    half_width = 0.25 * params.t0 if half_width is None else half_width
    if not 0.0 < half_width < params.t0:
        raise CosmologyError(f"half_width must lie in (0, t0), got {half_width}")
    h = 2.0 * half_width / (base_points - 1)
    grid = Grid((params.t0 - half_width, 0.0, 0.0, 0.0), (h, 1.0, 1.0, 1.0), (base_points, 1, 1, 1))
    margin = order // 2
    study = RefinementStudy()
    for level in range(levels):
        stride = 2**level
        states = [closed_form(float(t), params) for t in grid.axis_values(0)]
        b = np.array([s.b for s in states]).reshape(grid.shape)
        c = np.array([s.c for s in states]).reshape(grid.shape)
        b_dot = grid_derivative(b, grid, 0, order)[:, 0, 0, 0]
        b_ddot = grid_second_derivative(b, grid, 0, order)[:, 0, 0, 0]
        c_dot = grid_derivative(c, grid, 0, order)[:, 0, 0, 0]
        gaps = {"rw1": 0.0, "rw2": 0.0}
        for i in range(stride * margin, stride * (base_points - margin - 1) + 1, stride):
            exact = desitter_residuals(states[i])
            stencil = desitter_residuals(replace(states[i], b_dot=float(b_dot[i]), b_ddot=float(b_ddot[i]),
                                                 c_dot=float(c_dot[i])))
            gaps["rw1"] = max(gaps["rw1"], abs(stencil.rw1 - exact.rw1))
            gaps["rw2"] = max(gaps["rw2"], abs(stencil.rw2 - exact.rw2))
        study.rows.append({"h": grid.spacing[0], "residual_rw1": gaps["rw1"], "residual_rw2": gaps["rw2"]})
        logger.debug(f"Cosmology refinement level {level}: h={grid.spacing[0]:.4g}, {gaps}")
        grid = grid.refined()
    for coarse, fine in zip(study.rows, study.rows[1:]):
        if coarse["residual_rw2"] > 0 and fine["residual_rw2"] > 0:
            study.orders.append(float(np.log2(coarse["residual_rw2"] / fine["residual_rw2"])))
    logger.info(f"Cosmology residual order (stencil {order}): {study.orders}")
    return study


# ===================
# Observables
# ===================

def apparent_hubble(t: float, params: CosmoParams) -> Tuple[float, float, float]:
    """(H = 1/t, β̇/β, H̃ = H + β̇/β) with β = √b from the closed form of the mode"""
    state = closed_form(t, params)
    if state.b <= 0:
        raise CosmologyError(f"b({t:g}) = {state.b:.6g} <= 0: β = √b is undefined")
    hubble = 1.0 / t
    drift = state.b_dot / (2.0 * state.b)
    return hubble, drift, hubble + drift


def age_estimate(h_tilde: float, drift: float) -> float:
    """t0 = 1 / (H̃ − β̇/β)"""
    if h_tilde == drift:
        raise CosmologyError("H̃ equals β̇/β: the age is unbounded")
    return 1.0 / (h_tilde - drift)


def acceleration_diagnostic(params: CosmoParams, times: Sequence[float]) -> List[Dict[str, float]]:
    """Rows of s = √b a and s̈ from the closed form of the mode"""
    rows = []
    for t in times:
        state = closed_form(t, params)
        if state.b <= 0:
            raise CosmologyError(f"b({t:g}) = {state.b:.6g} <= 0 inside the requested range")
        row = state.to_row()
        rows.append({"t": float(t), "s": row["s"], "sddot": row["sddot"]})
    return rows


def compare_modes(params: CosmoParams, times: Sequence[float]) -> List[Dict[str, float]]:
    """de Sitter and Poincaré closed forms side by side for the same boundary data"""
    desitter = CosmoParams(**{**params.to_dict(), "mode": AlgebraMode.DESITTER})
    poincare = CosmoParams(**{**params.to_dict(), "mode": AlgebraMode.POINCARE})
    rows = []
    for t in times:
        ds = closed_form_desitter(t, desitter).to_row()
        pc = closed_form_poincare(t, poincare).to_row()
        rows.append({
            "t": float(t), "a": ds["a"],
            "b_desitter": ds["b"], "b_poincare": pc["b"],
            "Htilde_desitter": ds["Htilde"], "Htilde_poincare": pc["Htilde"],
            "sddot_desitter": ds["sddot"], "sddot_poincare": pc["sddot"],
        })
    return rows
