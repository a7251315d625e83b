"""
PostNewtonian - 1PN potentials of point-mass systems and the two-body 1PN dynamics

Potentials are sums over compact bodies (geometric units), evaluated at
field points x with shape (..., 3):

    U   = Σ m_a / r_a
    V_j = Σ m_a v_aj / r_a
    Ψ   = Σ m_a (v_a² + U_¬a(x_a)) / r_a
    Φ   = Σ m_a/r_a [((x − x_a)·v_a)² / r_a² − v_a²]
    χ   = Σ m_a r_a

and the gauge-fixed field is h_00 = U + 2Ψ, h_0j = −2V_j, h_ij = δ_ij U,
with G = η + 2h. U_¬a excludes body a's own contribution.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import solve_ivp

from .algebra import MINKOWSKI
from .exceptions import PostNewtonianError


@dataclass(frozen=True, eq=False)
class Body:
    """Compact body: mass (length), position and velocity (c = 1)"""
    mass: float
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float)
        velocity = np.asarray(self.velocity, dtype=float)
        if position.shape != (3,) or velocity.shape != (3,):
            raise PostNewtonianError(f"position and velocity must be 3-vectors, got {position.shape}, {velocity.shape}")
        if not self.mass > 0:
            raise PostNewtonianError(f"body mass must be positive, got {self.mass}")
        if velocity @ velocity >= 1.0:
            raise PostNewtonianError(f"body speed {np.linalg.norm(velocity):.6g} is not below c")
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "velocity", velocity)

    @classmethod
    def from_dict(cls, data: Dict) -> "Body":
        return cls(data["mass"], data["position"], data.get("velocity", (0.0, 0.0, 0.0)))

    def to_dict(self) -> Dict[str, object]:
        return {"mass": self.mass, "position": self.position.tolist(), "velocity": self.velocity.tolist()}


ORDER_TAGS = {"h00": 4, "h0j": 3, "hij": 2}


@dataclass(frozen=True, eq=False)
class PNField:
    """h_μν components at one or more field points; order_tags give the trusted ε order"""
    h00: np.ndarray
    h0j: np.ndarray
    hij: np.ndarray
    order_tags: Dict[str, int] = field(default_factory=lambda: dict(ORDER_TAGS))

    def to_dict(self) -> Dict[str, object]:
        return {
            "h00": np.asarray(self.h00).tolist(),
            "h0j": np.asarray(self.h0j).tolist(),
            "hij": np.asarray(self.hij).tolist(),
            "order_tags": dict(self.order_tags),
        }


# ===================
# Separations
# ===================

def _separations(bodies: Sequence[Body], x: np.ndarray, exclude: Optional[int] = None) -> Iterable[Tuple[Body, np.ndarray, np.ndarray]]:
    """(body, x − x_a, |x − x_a|) for every body, rejecting coincident points"""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise PostNewtonianError(f"field points need 3 components, got shape {x.shape}")
    for index, body in enumerate(bodies):
        if index == exclude:
            continue
        d = x - body.position
        r = np.linalg.norm(d, axis=-1)
        if np.any(r == 0):
            raise PostNewtonianError(f"field point coincides with the body at {body.position.tolist()}")
        yield body, d, r


def newtonian_potential(bodies: Sequence[Body], x: np.ndarray, exclude: Optional[int] = None) -> np.ndarray:
    """U = Σ m_a / |x − x_a|"""
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape[:-1])
    for body, _, r in _separations(bodies, x, exclude):
        total = total + body.mass / r
    return total


def vector_potential(bodies: Sequence[Body], x: np.ndarray) -> np.ndarray:
    """V_j = Σ m_a v_aj / |x − x_a|"""
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape)
    for body, _, r in _separations(bodies, x):
        total = total + (body.mass / r)[..., None] * body.velocity
    return total


def _self_excluded_potential(bodies: Sequence[Body], index: int) -> float:
    return float(newtonian_potential(bodies, bodies[index].position, exclude=index))


def psi_phi_potentials(bodies: Sequence[Body], x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(Ψ, Φ) at the field points, with self-exclusion inside Ψ"""
    x = np.asarray(x, dtype=float)
    psi = np.zeros(x.shape[:-1])
    phi = np.zeros(x.shape[:-1])
    for index, (body, d, r) in enumerate(_separations(bodies, x)):
        v2 = body.velocity @ body.velocity
        psi = psi + body.mass * (v2 + _self_excluded_potential(bodies, index)) / r
        radial = d @ body.velocity
        phi = phi + body.mass / r * (radial**2 / r**2 - v2)
    return psi, phi


def gauge_function(bodies: Sequence[Body], x: np.ndarray) -> np.ndarray:
    """χ = Σ m_a |x − x_a|"""
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape[:-1])
    for body, _, r in _separations(bodies, x):
        total = total + body.mass * r
    return total


def gauge_hessian(bodies: Sequence[Body], x: np.ndarray) -> np.ndarray:
    """
    ∂_μ∂_ν χ (4x4) for bodies moving uniformly; ∂_i∂_j r = (δ_ij − n_i n_j)/r,
    ∂_0∂_j r = (n_j (n·v) − v_j)/r, ∂_0² r = (v² − (n·v)²)/r
    """
    x = np.asarray(x, dtype=float)
    hess = np.zeros(x.shape[:-1] + (4, 4))
    eye = np.eye(3)
    for body, d, r in _separations(bodies, x):
        n = d / r[..., None]
        v = body.velocity
        nv = n @ v
        w = (body.mass / r)
        hess[..., 1:, 1:] += w[..., None, None] * (eye - n[..., :, None] * n[..., None, :])
        mixed = w[..., None] * (n * nv[..., None] - v)
        hess[..., 0, 1:] += mixed
        hess[..., 1:, 0] += mixed
        hess[..., 0, 0] += w * (v @ v - nv**2)
    return hess


def harmonic_field(bodies: Sequence[Body], x: np.ndarray) -> PNField:
    """
    The field before the χ gauge: h̃_00 = U + 2Ψ + Φ,
    h̃_0j = −Σ m_a/r_a (v_j + (n·v) n_j), h̃_ij = Σ m_a n_i n_j / r_a
    """
    x = np.asarray(x, dtype=float)
    U = newtonian_potential(bodies, x)
    psi, phi = psi_phi_potentials(bodies, x)
    h0j = np.zeros(x.shape)
    hij = np.zeros(x.shape[:-1] + (3, 3))
    for body, d, r in _separations(bodies, x):
        n = d / r[..., None]
        w = body.mass / r
        h0j = h0j - w[..., None] * (body.velocity + (n @ body.velocity)[..., None] * n)
        hij = hij + w[..., None, None] * n[..., :, None] * n[..., None, :]
    return PNField(h00=U + 2.0 * psi + phi, h0j=h0j, hij=hij)


def assemble_1pn_field(bodies: Sequence[Body], x: np.ndarray) -> PNField:
    """h_00 = U + 2Ψ, h_0j = −2V_j, h_ij = δ_ij U (after the χ gauge)"""
    x = np.asarray(x, dtype=float)
    U = newtonian_potential(bodies, x)
    psi, _ = psi_phi_potentials(bodies, x)
    hij = U[..., None, None] * np.eye(3)
    return PNField(h00=U + 2.0 * psi, h0j=-2.0 * vector_potential(bodies, x), hij=hij)


def metric_components(pn: PNField) -> np.ndarray:
    """G = η + 2h as (..., 4, 4)"""
    h00 = np.asarray(pn.h00)
    G = np.broadcast_to(MINKOWSKI, h00.shape + (4, 4)).copy()
    G[..., 0, 0] += 2.0 * h00
    G[..., 0, 1:] += 2.0 * pn.h0j
    G[..., 1:, 0] += 2.0 * pn.h0j
    G[..., 1:, 1:] += 2.0 * pn.hij
    return G


def displayed_two_body_metric(bodies: Sequence[Body], x: np.ndarray) -> Dict[str, np.ndarray]:
    """
    Pulsar-system G_μν written term by term: G_00 = −1 + 2U + 2Ψ, G_0j = −2V_j,
    G_ij = δ_ij(1 + 2U)

    Returned as separate Newtonian, Ψ and vector pieces so callers can compare
    them one by one against metric_components.
    """
    if len(bodies) != 2:
        raise PostNewtonianError(f"the pulsar metric is for two bodies, got {len(bodies)}")
    x = np.asarray(x, dtype=float)
    U = newtonian_potential(bodies, x)
    psi, _ = psi_phi_potentials(bodies, x)
    return {"newtonian": 2.0 * U, "psi": 2.0 * psi, "vector": -2.0 * vector_potential(bodies, x),
            "spatial": 2.0 * U}


# Assembled over displayed coefficient of the Ψ and vector terms in the two-body metric
PSI_DISPLAY_RATIO = 2.0
VECTOR_DISPLAY_RATIO = 2.0


def _fit_ratio(assembled: np.ndarray, shown: np.ndarray) -> Optional[float]:
    """Least-squares c in assembled ≈ c · shown; None when the shown term vanishes"""
    norm = float(np.sum(shown * shown))
    if norm == 0.0:
        return None
    return float(np.sum(assembled * shown) / norm)


def displayed_metric_ratios(bodies: Sequence[Body], x: np.ndarray) -> Dict[str, Optional[float]]:
    """
    Assembled over displayed coefficient, term by term, for the two-body metric

    With G = η + 2h the assembled field carries 4Ψ in G_00 and −4V_j in G_0j,
    twice the displayed Ψ and vector terms; the Newtonian and spatial terms
    agree. Any ratio away from 1 is logged as a warning.

    Returns:
        {"newtonian", "psi", "vector", "spatial"} ratios; "vector" is None for static bodies
    """
    shown = displayed_two_body_metric(bodies, x)
    x = np.asarray(x, dtype=float)
    pn = assemble_1pn_field(bodies, x)
    U = newtonian_potential(bodies, x)
    psi, _ = psi_phi_potentials(bodies, x)
    # G − η = 2h, taken from h so the 1PN terms are not rounded against η
    diagonal = 2.0 * np.diagonal(pn.hij, axis1=-2, axis2=-1)
    ratios = {
        "newtonian": _fit_ratio(2.0 * pn.h00 - 4.0 * psi, shown["newtonian"]),
        "psi": _fit_ratio(2.0 * pn.h00 - 2.0 * U, shown["psi"]),
        "vector": _fit_ratio(2.0 * pn.h0j, shown["vector"]),
        "spatial": _fit_ratio(diagonal, np.broadcast_to(shown["spatial"][..., None], diagonal.shape)),
    }
    off = {k: v for k, v in ratios.items() if v is not None and abs(v - 1.0) > 1e-6}
    if off:
        logger.warning("Displayed two-body metric differs from G = η + 2h: "
                       + ", ".join(f"{k} term x{v:.6g}" for k, v in off.items()))
    return ratios


# ===================
# Iteration of the integral equation
# ===================

def iterate_integral_field(bodies: Sequence[Body], points: np.ndarray, iterations: int) -> List[PNField]:
    """
    Iterate h' = ∫ T[h] / |x − x'| for point sources, starting from h = 0

    Each body contributes m_a (1 + 2v_a² + 2h_00,¬a(x_a)) / r_a to h_00,
    −2 m_a v_a / r_a to h_0j and δ_ij m_a / r_a to h_ij, where h_00,¬a is the
    field of the other bodies at x_a. The rest-mass part of a pass does not
    depend on h, so the first pass already uses U_¬a(x_a) there and h^(1)
    equals assemble_1pn_field. Later passes feed back the previous iterate
    and move h_00 only at O(ε⁶).

    Returns:
        the iterates h^(1) .. h^(iterations) on the points
    """
    if iterations < 1:
        raise PostNewtonianError(f"iterations must be at least 1, got {iterations}")
    points = np.asarray(points, dtype=float)
    at_bodies = np.array([_self_excluded_potential(bodies, index) for index in range(len(bodies))])
    history: List[PNField] = []
    for step in range(iterations):
        h00 = np.zeros(points.shape[:-1])
        h0j = np.zeros(points.shape)
        U = np.zeros(points.shape[:-1])
        for index, (body, _, r) in enumerate(_separations(bodies, points)):
            v2 = body.velocity @ body.velocity
            h00 = h00 + body.mass * (1.0 + 2.0 * v2 + 2.0 * at_bodies[index]) / r
            h0j = h0j - 2.0 * (body.mass / r)[..., None] * body.velocity
            U = U + body.mass / r
        history.append(PNField(h00=h00, h0j=h0j, hij=U[..., None, None] * np.eye(3)))
        at_bodies = np.array([_iterate_at_body(bodies, index, at_bodies) for index in range(len(bodies))])
        logger.debug(f"Integral iteration {step + 1}: max h00 = {np.max(np.abs(h00)) if h00.size else 0.0:.6e}")
    return history


def _iterate_at_body(bodies: Sequence[Body], index: int, previous: np.ndarray) -> float:
    """h_00 of the current iterate at body `index`, excluding its own contribution"""
    total = 0.0
    for other, body in enumerate(bodies):
        if other == index:
            continue
        r = float(np.linalg.norm(bodies[index].position - body.position))
        if r == 0:
            raise PostNewtonianError("two bodies share a position")
        v2 = body.velocity @ body.velocity
        total += body.mass * (1.0 + 2.0 * v2 + 2.0 * previous[other]) / r
    return total


# ===================
# Smeared-density quadrature
# ===================

def smeared_potential(bodies: Sequence[Body], x: np.ndarray, width: float, kernel: str = "newtonian",
                      resolution: int = 24) -> np.ndarray:
    """
    ∫ ρ(x') K(x − x') d³x' for Gaussian-smeared bodies of standard deviation `width`,
    K = 1/|x − x'| ("newtonian") or |x − x'| ("chi"), by Gauss-Hermite quadrature
    """
    if width <= 0:
        raise PostNewtonianError(f"width must be positive, got {width}")
    if kernel not in ("newtonian", "chi"):
        raise PostNewtonianError(f"unknown kernel {kernel!r}")
    nodes, weights = np.polynomial.hermite.hermgauss(resolution)
    offsets = np.sqrt(2.0) * width * np.stack(np.meshgrid(nodes, nodes, nodes, indexing="ij"), axis=-1).reshape(-1, 3)
    w = (np.einsum("i,j,k->ijk", weights, weights, weights) / np.pi**1.5).reshape(-1)
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape[:-1])
    for body in bodies:
        d = np.linalg.norm(x[..., None, :] - body.position - offsets, axis=-1)
        values = 1.0 / d if kernel == "newtonian" else d
        total = total + body.mass * (values @ w)
    return total


# ===================
# Isotropic coordinates
# ===================

def schwarzschild_radius(r_bar: float, m: float) -> float:
    """r = r̄ (1 + M/2r̄)²"""
    return r_bar * (1.0 + m / (2.0 * r_bar)) ** 2


def isotropic_radius(r: float, m: float) -> float:
    """Inverse map r̄ = (r − M + √(r² − 2Mr)) / 2"""
    if r < 2.0 * m:
        raise PostNewtonianError(f"r={r:g} is inside 2M")
    return 0.5 * (r - m + np.sqrt(r * r - 2.0 * m * r))


def isotropic_comparison(m: float, r_bar: float) -> Tuple[float, float]:
    """
    (YM h_00 in isotropic form, M/r̄ − 2(M/r̄)², and GR's exact isotropic
    h_00 = (1 − ((1 − M/2r̄)/(1 + M/2r̄))²)/2 = M/r̄ − (M/r̄)² + ...)
    """
    if r_bar <= m / 2.0:
        raise PostNewtonianError(f"r_bar={r_bar:g} must exceed M/2")
    x = m / r_bar
    ym = x - 2.0 * x * x
    gr = 0.5 * (1.0 - ((1.0 - x / 2.0) / (1.0 + x / 2.0)) ** 2)
    return float(ym), float(gr)


def ym_isotropic_exact(m: float, r_bar: float) -> float:
    """M/r with r the image of r̄: the exact transform of h_00 = M/r"""
    return float(m / schwarzschild_radius(r_bar, m))


# ===================
# Two-body 1PN dynamics and post-Keplerian parameters
# ===================

@dataclass
class BinaryOrbit:
    """Relative-coordinate solution; `success` False marks a partial run"""
    t: np.ndarray
    r: np.ndarray
    v: np.ndarray
    total_mass: float
    nu: float
    success: bool = True
    diagnostic: str = ""


def one_pn_acceleration(r_vec: np.ndarray, v_vec: np.ndarray, total_mass: float, nu: float) -> np.ndarray:
    """a = −(M/r²)[(1 + A) n + B v], A = (1+3ν)v² − (3/2)νṙ² − 2(2+ν)M/r, B = −2(2−ν)ṙ"""
    r = np.linalg.norm(r_vec)
    n = r_vec / r
    v2 = v_vec @ v_vec
    rdot = n @ v_vec
    A = (1.0 + 3.0 * nu) * v2 - 1.5 * nu * rdot**2 - 2.0 * (2.0 + nu) * total_mass / r
    B = -2.0 * (2.0 - nu) * rdot
    return -(total_mass / r**2) * ((1.0 + A) * n + B * v_vec)


def one_pn_energy(r_vec: np.ndarray, v_vec: np.ndarray, total_mass: float, nu: float) -> np.ndarray:
    """
    E/μ = ½v² − M/r + (3/8)(1 − 3ν)v⁴ + (M/2r)[(3 + ν)v² + νṙ² + M/r]
    (arrays of shape (..., 3) allowed)
    """
    r = np.linalg.norm(r_vec, axis=-1)
    v2 = np.sum(v_vec * v_vec, axis=-1)
    rdot = np.sum(r_vec * v_vec, axis=-1) / r
    M = total_mass
    return (0.5 * v2 - M / r + 0.375 * (1.0 - 3.0 * nu) * v2**2
            + 0.5 * M / r * ((3.0 + nu) * v2 + nu * rdot**2 + M / r))


def integrate_1pn_binary(m1: float, m2: float, r0: Sequence[float], v0: Sequence[float], t_end: float,
                         tol: float = 1e-11, samples: int = 2000) -> BinaryOrbit:
    """Relative 1PN two-body motion with DOP853, sampled uniformly"""
    if m1 <= 0 or m2 <= 0:
        raise PostNewtonianError(f"masses must be positive, got {m1}, {m2}")
    if t_end <= 0:
        raise PostNewtonianError(f"t_end must be positive, got {t_end}")
    M = m1 + m2
    nu = m1 * m2 / M**2

    def rhs(t, y):
        return np.concatenate([y[3:], one_pn_acceleration(y[:3], y[3:], M, nu)])

    y0 = np.concatenate([np.asarray(r0, dtype=float), np.asarray(v0, dtype=float)])
    t_eval = np.linspace(0.0, t_end, samples)
    solution = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=tol, atol=tol * 1e-3, t_eval=t_eval)
    if solution.status < 0:
        logger.warning(f"1PN binary integration stopped: {solution.message}")
    return BinaryOrbit(t=solution.t, r=solution.y[:3].T, v=solution.y[3:].T, total_mass=M, nu=nu,
                       success=solution.status >= 0, diagnostic="" if solution.status >= 0 else solution.message)


def post_keplerian_parameters(m_p: float, m_c: float, P_b: float, e: float,
                              x_proj: Optional[float] = None) -> Dict[str, float]:
    """
    1PN post-Keplerian parameters in geometric units (masses and times as lengths)

    Args:
        m_p, m_c: pulsar and companion masses
        P_b: orbital period
        e: eccentricity in [0, 1)
        x_proj: projected semi-major axis of the pulsar orbit (light-length); enables s

    Returns:
        {"omega_dot": rad per unit length, "gamma": length, "shapiro_r": length, "shapiro_s": -}
    """
    if m_p <= 0 or m_c <= 0 or P_b <= 0:
        raise PostNewtonianError(f"masses and period must be positive, got {m_p}, {m_c}, {P_b}")
    if not 0.0 <= e < 1.0:
        raise PostNewtonianError(f"eccentricity {e} outside [0, 1)")
    M = m_p + m_c
    n = 2.0 * np.pi / P_b
    params = {
        "omega_dot": 3.0 * n ** (5.0 / 3.0) * M ** (2.0 / 3.0) / (1.0 - e * e),
        "gamma": e * n ** (-1.0 / 3.0) * M ** (-4.0 / 3.0) * m_c * (m_p + 2.0 * m_c),
        "shapiro_r": m_c,
    }
    if x_proj is not None:
        s = x_proj * n ** (2.0 / 3.0) * M ** (2.0 / 3.0) / m_c
        if s > 1.0:
            logger.warning(f"Shapiro shape s = {s:.6g} exceeds 1; check x_proj and the masses")
        params["shapiro_s"] = s
    return params
