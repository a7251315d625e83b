"""
Field - Covariant field strengths, field equations, continuity and gauge transformations

The potential A_μ = G_μν V^ν + H_μνλ M^{νλ} is assembled as 5x5 matrices
and every nonlinear term is taken from the matrix algebra:

    F_μν = ∂_μ A_ν − ∂_ν A_μ + [A_μ, A_ν]
    D^μ F_μν = η^{μκ}(∂_κ F_μν + [A_κ, F_μν])

Decomposing F_μν along V^λ gives E_μνλ, along M^{αβ} gives F_μναβ.
Spacetime indices are raised and lowered with η only; G is never
index-raised (its inverse is a separate object, see geodesic).
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from .algebra import GeneratorSet, bracket, decompose_matrices, potential_matrices
from .exceptions import FieldError

ArrayFn = Callable[[np.ndarray], np.ndarray]

STENCIL_MIN_POINTS = {2: 3, 4: 5}


# ===================
# Grids and finite differences
# ===================

@dataclass(frozen=True)
class Grid:
    """Uniform grid over (t, x, y, z); an axis of length 1 is held constant"""
    origin: Tuple[float, float, float, float]
    spacing: Tuple[float, float, float, float]
    shape: Tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.origin) != 4 or len(self.spacing) != 4 or len(self.shape) != 4:
            raise FieldError("grid origin, spacing and shape need 4 entries each")
        if any(n < 1 for n in self.shape) or any(h <= 0 for h in self.spacing):
            raise FieldError(f"invalid grid: shape={self.shape}, spacing={self.spacing}")

    def axis_values(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def points(self) -> np.ndarray:
        """Grid coordinates with shape (*shape, 4)"""
        axes = np.meshgrid(*[self.axis_values(a) for a in range(4)], indexing="ij")
        return np.stack(axes, axis=-1)

    def refined(self) -> "Grid":
        """Same box with half the spacing along every non-constant axis"""
        spacing = tuple(h / 2 if n > 1 else h for h, n in zip(self.spacing, self.shape))
        shape = tuple(2 * n - 1 if n > 1 else 1 for n in self.shape)
        return Grid(self.origin, spacing, shape)

    def interior(self, margin: int) -> Tuple[slice, ...]:
        """Index slices that stay `margin` points away from every open edge"""
        return tuple(slice(margin, n - margin) if n > 1 else slice(None) for n in self.shape)

    @classmethod
    def from_dict(cls, data: Dict) -> "Grid":
        return cls(tuple(data["origin"]), tuple(data["spacing"]), tuple(data["shape"]))


def grid_derivative(values: np.ndarray, grid: Grid, axis: int, order: int = 4) -> np.ndarray:
    """
    First derivative along one grid axis

    Args:
        values: array whose first four axes are the grid axes
        grid: the grid
        axis: 0..3
        order: 2 or 4 (interior); boundaries are always second order

    Returns:
        array of the same shape
    """
    n = grid.shape[axis]
    if n == 1:
        return np.zeros_like(values)
    if order not in STENCIL_MIN_POINTS:
        raise FieldError(f"unsupported stencil order {order}")
    if n < STENCIL_MIN_POINTS[order]:
        raise FieldError(f"grid too coarse for order-{order} stencil: {n} points along axis {axis}")
    h = grid.spacing[axis]
    result = np.gradient(values, h, axis=axis, edge_order=2)
    if order == 4:
        f = np.moveaxis(values, axis, 0)
        out = np.moveaxis(result, axis, 0)
        out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    return result


def grid_second_derivative(values: np.ndarray, grid: Grid, axis: int, order: int = 4) -> np.ndarray:
    """Second derivative along one axis; only points `order // 2` from an edge are accurate"""
    n = grid.shape[axis]
    if n == 1:
        return np.zeros_like(values)
    if order not in STENCIL_MIN_POINTS:
        raise FieldError(f"unsupported stencil order {order}")
    if n < STENCIL_MIN_POINTS[order]:
        raise FieldError(f"grid too coarse for order-{order} stencil: {n} points along axis {axis}")
    h = grid.spacing[axis]
    f = np.moveaxis(values, axis, 0)
    out = np.zeros_like(f)
    if order == 2:
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    else:
        out[2:-2] = (-f[4:] + 16.0 * f[3:-1] - 30.0 * f[2:-2] + 16.0 * f[1:-3] - f[:-4]) / (12.0 * h**2)
    return np.moveaxis(out, 0, axis)


def _gradient(values: np.ndarray, grid: Grid, order: int) -> np.ndarray:
    """Stack ∂_ρ along a new axis placed right after the four grid axes"""
    return np.stack([grid_derivative(values, grid, rho, order) for rho in range(4)], axis=4)


def _numeric_gradient(fn: ArrayFn, points: np.ndarray, step: float) -> np.ndarray:
    """Fourth-order central differences of a closure in each coordinate"""
    grads = []
    for rho in range(4):
        e = np.zeros(4)
        e[rho] = step
        d = (-fn(points + 2 * e) + 8.0 * fn(points + e) - 8.0 * fn(points - e) + fn(points - 2 * e))
        grads.append(d / (12.0 * step))
    return np.stack(grads, axis=points.ndim - 1)


# ===================
# Potentials and sources
# ===================

@dataclass(frozen=True, eq=False)
class FieldSample:
    """G, H and their first derivatives at a set of points (dG[..., ρ, μ, ν] = ∂_ρ G_μν)"""
    G: np.ndarray
    H: np.ndarray
    dG: np.ndarray
    dH: np.ndarray
    grid: Optional[Grid] = None


def _check_antisymmetric(H: np.ndarray, tolerance: float = 1e-12) -> None:
    residual = np.max(np.abs(H + np.swapaxes(H, -1, -2))) if H.size else 0.0
    if residual > tolerance * max(1.0, float(np.max(np.abs(H))) if H.size else 1.0):
        raise FieldError(f"H is not antisymmetric in its last two indices (residual {residual:.3e})")


class PotentialField:
    """The gravitational state (G_μν, H_μνλ); subclasses decide how it is sampled"""

    name = "potential"

    def sample(self, grid: Optional[Grid] = None) -> FieldSample:
        raise NotImplementedError


class AnalyticPotential(PotentialField):
    """
    Potential given by closures of the coordinates

    Args:
        G_fn: points (..., 4) -> (..., 4, 4)
        H_fn: points -> (..., 4, 4, 4), zero when omitted
        dG_fn, dH_fn: exact derivatives (..., 4, ...) with ∂_ρ first; numeric when omitted
        step: finite-difference step for numeric derivatives
        coordinates: label, "cartesian" or "spherical"
    """

    def __init__(self, G_fn: ArrayFn, H_fn: Optional[ArrayFn] = None,
                 dG_fn: Optional[ArrayFn] = None, dH_fn: Optional[ArrayFn] = None,
                 step: float = 1e-4, coordinates: str = "cartesian", name: str = "analytic"):
        self.G_fn = G_fn
        self.H_fn = H_fn
        self.dG_fn = dG_fn
        self.dH_fn = dH_fn
        self.step = step
        self.coordinates = coordinates
        self.name = name

    def _H(self, points: np.ndarray) -> np.ndarray:
        if self.H_fn is None:
            return np.zeros(points.shape[:-1] + (4, 4, 4))
        return self.H_fn(points)

    def evaluate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        points = np.asarray(points, dtype=float)
        H = self._H(points)
        _check_antisymmetric(H)
        return self.G_fn(points), H

    def derivatives(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        points = np.asarray(points, dtype=float)
        dG = self.dG_fn(points) if self.dG_fn else _numeric_gradient(self.G_fn, points, self.step)
        if self.dH_fn:
            dH = self.dH_fn(points)
        elif self.H_fn is None:
            dH = np.zeros(points.shape[:-1] + (4, 4, 4, 4))
        else:
            dH = _numeric_gradient(self.H_fn, points, self.step)
        return dG, dH

    def sample_points(self, points: np.ndarray) -> FieldSample:
        G, H = self.evaluate(points)
        dG, dH = self.derivatives(points)
        return FieldSample(G=G, H=H, dG=dG, dH=dH)

    def sample(self, grid: Optional[Grid] = None) -> FieldSample:
        if grid is None:
            raise FieldError("an analytic potential needs a grid to be sampled on")
        s = self.sample_points(grid.points())
        return FieldSample(G=s.G, H=s.H, dG=s.dG, dH=s.dH, grid=grid)


class GridPotential(PotentialField):
    """Potential sampled on a grid, differentiated by central differences"""

    def __init__(self, grid: Grid, G: np.ndarray, H: Optional[np.ndarray] = None,
                 order: int = 4, name: str = "grid"):
        G = np.asarray(G, dtype=float)
        if G.shape != tuple(grid.shape) + (4, 4):
            raise FieldError(f"G has shape {G.shape}, expected {tuple(grid.shape) + (4, 4)}")
        H = np.zeros(G.shape[:-2] + (4, 4, 4)) if H is None else np.asarray(H, dtype=float)
        if H.shape != tuple(grid.shape) + (4, 4, 4):
            raise FieldError(f"H has shape {H.shape}, expected {tuple(grid.shape) + (4, 4, 4)}")
        _check_antisymmetric(H)
        self.grid = grid
        self.G = G
        self.H = H
        self.order = order
        self.name = name

    def sample(self, grid: Optional[Grid] = None) -> FieldSample:
        if grid is not None and grid != self.grid:
            raise FieldError("a grid potential can only be sampled on its own grid")
        return FieldSample(
            G=self.G, H=self.H,
            dG=_gradient(self.G, self.grid, self.order),
            dH=_gradient(self.H, self.grid, self.order),
            grid=self.grid,
        )

    @classmethod
    def from_dict(cls, data: Dict, order: int = 4) -> "GridPotential":
        """Load {"grid": {...}, "G": nested lists, "H": nested lists (optional)}"""
        grid = Grid.from_dict(data["grid"])
        H = np.asarray(data["H"], dtype=float) if "H" in data else None
        return cls(grid, np.asarray(data["G"], dtype=float), H, order=order, name="custom")


@dataclass(frozen=True, eq=False)
class SourceField:
    """T_νλ and S_ναβ sampled on the same points as the potential"""
    T: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        if self.T.shape[:-2] != self.S.shape[:-3]:
            raise FieldError(f"T {self.T.shape} and S {self.S.shape} are sampled on different points")
        _check_antisymmetric(self.S)

    @classmethod
    def zeros(cls, shape: Tuple[int, ...]) -> "SourceField":
        return cls(T=np.zeros(tuple(shape) + (4, 4)), S=np.zeros(tuple(shape) + (4, 4, 4)))

    @classmethod
    def from_dict(cls, data: Dict, shape: Tuple[int, ...]) -> "SourceField":
        source = cls.zeros(shape)
        T = np.asarray(data["T"], dtype=float) if "T" in data else source.T
        S = np.asarray(data["S"], dtype=float) if "S" in data else source.S
        return cls(T=T, S=S)


@dataclass(frozen=True, eq=False)
class FieldStrengths:
    """E_μνλ, F_μναβ and the matrix form F_μν they decompose"""
    E: np.ndarray
    F: np.ndarray
    matrices: np.ndarray

    def antisymmetry_residual(self) -> float:
        e = np.max(np.abs(self.E + np.swapaxes(self.E, -3, -2)))
        f1 = np.max(np.abs(self.F + np.swapaxes(self.F, -4, -3)))
        f2 = np.max(np.abs(self.F + np.swapaxes(self.F, -1, -2)))
        return float(max(e, f1, f2))


@dataclass(frozen=True)
class GaugeParams:
    """Infinitesimal gauge parameter Δ = ξ_μ V^μ + χ_μν M^{μν}, as closures or grid arrays"""
    xi: object
    chi: object
    dxi: Optional[ArrayFn] = None
    dchi: Optional[ArrayFn] = None
    step: float = 1e-4


# ===================
# Field strengths
# ===================

def _vacuum(gens: GeneratorSet) -> np.ndarray:
    """[V_μ, V_ν] of the flat background A_μ = V_μ"""
    return bracket(gens.V[:, None], gens.V[None, :])


def _strength_matrices(sample: FieldSample, gens: GeneratorSet, subtract_vacuum: bool) -> Tuple[np.ndarray, np.ndarray]:
    A = potential_matrices(sample.G, sample.H, gens)
    dA = potential_matrices(sample.dG, sample.dH, gens)
    curl = dA - np.swapaxes(dA, -4, -3)
    products = np.einsum("...mij,...njk->...mnik", A, A)
    F = curl + products - np.swapaxes(products, -4, -3)
    if subtract_vacuum:
        F = F - _vacuum(gens)
    return A, F


def strengths_from_sample(sample: FieldSample, gens: GeneratorSet,
                          subtract_vacuum: bool = True) -> FieldStrengths:
    _, F = _strength_matrices(sample, gens, subtract_vacuum)
    E, Fc = decompose_matrices(F, gens)
    return FieldStrengths(E=E, F=Fc, matrices=F)


def field_strength(potential: PotentialField, gens: GeneratorSet, where=None,
                   subtract_vacuum: bool = True) -> FieldStrengths:
    """
    E and F of a potential

    Args:
        potential: analytic or grid potential
        gens: generator set fixing the mode
        where: Grid or array of points (..., 4); a grid potential uses its own grid
        subtract_vacuum: remove the constant flat-background commutator [V_μ, V_ν]
            so that G = η, H = 0 is vacuum in every mode

    Returns:
        FieldStrengths
    """
    if isinstance(where, Grid) or where is None:
        sample = potential.sample(where)
    elif isinstance(potential, AnalyticPotential):
        sample = potential.sample_points(np.asarray(where, dtype=float))
    else:
        raise FieldError("points can only be given for analytic potentials")
    return strengths_from_sample(sample, gens, subtract_vacuum)


# ===================
# Field and continuity equations
# ===================

def _require_grid(potential: PotentialField, grid: Optional[Grid]) -> FieldSample:
    if isinstance(potential, GridPotential):
        return potential.sample(grid)
    if grid is None:
        raise FieldError("residuals of an analytic potential need a grid")
    return potential.sample(grid)


def _covariant_divergence(X: np.ndarray, A: np.ndarray, grid: Grid, gens: GeneratorSet,
                          order: int) -> np.ndarray:
    """η^{μκ}(∂_κ X_μ… + [A_κ, X_μ…]) for X with a leading spacetime index μ after the grid axes"""
    eta_inv = np.linalg.inv(gens.eta)
    dX = _gradient(X, grid, order)
    extra = "".join("abcdefgh"[: X.ndim - 7])
    div = np.einsum(f"mk,...km{extra}ij->...{extra}ij", eta_inv, dX)
    A_up = np.einsum("mk,...kij->...mij", eta_inv, A)
    comm = (np.einsum(f"...mij,...m{extra}jk->...{extra}ik", A_up, X)
            - np.einsum(f"...m{extra}ij,...mjk->...{extra}ik", X, A_up))
    return div + comm


def field_equation_residual(potential: PotentialField, source: SourceField, gens: GeneratorSet,
                            grid: Optional[Grid] = None, subtract_vacuum: bool = True,
                            order: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """
    D^μ F_μν decomposed along V^λ and M^{αβ}, minus 8πT_νλ and 8πS_ναβ

    Returns:
        (rank-2 residual (..., 4, 4), rank-3 residual (..., 4, 4, 4)); only points
        2·order/2 away from open edges carry the full stencil accuracy
    """
    sample = _require_grid(potential, grid)
    if source.T.shape[:-2] != sample.G.shape[:-2]:
        raise FieldError(f"source sampled on {source.T.shape[:-2]}, potential on {sample.G.shape[:-2]}")
    A, F = _strength_matrices(sample, gens, subtract_vacuum)
    J = _covariant_divergence(F, A, sample.grid, gens, order)
    rank2, rank3 = decompose_matrices(J, gens)
    return rank2 - 8 * np.pi * source.T, rank3 - 8 * np.pi * source.S


def continuity_residual(potential: PotentialField, source: SourceField, gens: GeneratorSet,
                        grid: Optional[Grid] = None, order: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """
    D^μ J_μ for the current J_μ = T_μν V^ν + S_μαβ M^{αβ}

    Returns:
        (4-vector residual of D^μT_μν, rank-2 residual of D^μS_μνλ)
    """
    sample = _require_grid(potential, grid)
    if source.T.shape[:-2] != sample.G.shape[:-2]:
        raise FieldError(f"source sampled on {source.T.shape[:-2]}, potential on {sample.G.shape[:-2]}")
    A = potential_matrices(sample.G, sample.H, gens)
    J = potential_matrices(source.T, source.S, gens)
    return decompose_matrices(_covariant_divergence(J, A, sample.grid, gens, order), gens)


def abelian_limit_check(potential: PotentialField, source: SourceField, gens: GeneratorSet,
                        grid: Optional[Grid] = None, order: int = 4, margin: Optional[int] = None) -> float:
    """
    Max difference between the full rank-2 residual and the Abelian one,
    ∂^μ(∂_μ G_νλ − ∂_ν G_μλ) − 8πT_νλ, over interior points

    Requires H ≡ 0 and S ≡ 0.
    """
    sample = _require_grid(potential, grid)
    if np.any(sample.H != 0) or np.any(source.S != 0):
        raise FieldError("the Abelian limit needs H = 0 and S = 0")
    full, _ = field_equation_residual(potential, source, gens, sample.grid, order=order)
    dG = sample.dG
    curl = dG - np.swapaxes(dG, -3, -2)
    d_curl = _gradient(curl, sample.grid, order)
    eta_inv = np.linalg.inv(gens.eta)
    abelian = np.einsum("mk,...kmnl->...nl", eta_inv, d_curl) - 8 * np.pi * source.T
    inner = sample.grid.interior(2 * (order // 2) if margin is None else margin)
    difference = float(np.max(np.abs((full - abelian)[inner])))
    logger.debug(f"Abelian limit difference ({gens.mode.value}): {difference:.3e}")
    return difference


def relaxed_residual(potential: PotentialField, source: SourceField, grid: Optional[Grid] = None,
                     order: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """
    Harmonic-gauge relaxed equations □G_μν − 8πT_μν and □H_μαβ − 8πS_μαβ per component,
    using Minkowski □ = −∂_t² + ∇² and second-derivative stencils
    """
    sample = _require_grid(potential, grid)
    g = sample.grid

    def box(values: np.ndarray) -> np.ndarray:
        total = -grid_second_derivative(values, g, 0, order)
        for axis in (1, 2, 3):
            total = total + grid_second_derivative(values, g, axis, order)
        return total

    return box(sample.G) - 8 * np.pi * source.T, box(sample.H) - 8 * np.pi * source.S


# ===================
# Custom samples
# ===================

def load_custom_field(data: Dict, order: int = 4) -> Tuple[GridPotential, SourceField]:
    """
    Read {"grid": {"origin", "spacing", "shape"}, "potential": {"G", "H"},
    "source": {"T", "S"}} into a grid potential and its source; H, T and S
    default to zero
    """
    try:
        potential = GridPotential.from_dict({"grid": data["grid"], **data["potential"]}, order=order)
        source = SourceField.from_dict(data.get("source", {}), potential.grid.shape)
    except FieldError:
        raise
    except KeyError as e:
        raise FieldError(f"custom field data has no {e} entry")
    except (TypeError, ValueError) as e:
        raise FieldError(f"malformed custom field data: {e}")
    return potential, source


def custom_residual_norms(potential: GridPotential, source: SourceField, gens: GeneratorSet,
                          order: int = 4) -> Dict[str, float]:
    """Max field-equation residuals over the points where both nested stencils are accurate"""
    grid = potential.grid
    open_axes = [a for a in range(4) if grid.shape[a] > 1]
    if not open_axes:
        raise FieldError("a custom grid needs at least one axis with more than one point")
    rank2, rank3 = field_equation_residual(potential, source, gens, order=order)
    inner = grid.interior(2 * (order // 2))
    if rank2[inner].size == 0:
        raise FieldError(f"grid {grid.shape} has no interior points for the order-{order} stencil")
    return {
        "h": float(min(grid.spacing[a] for a in open_axes)),
        "residual_rank2": float(np.max(np.abs(rank2[inner]))),
        "residual_rank3": float(np.max(np.abs(rank3[inner]))),
    }


# ===================
# Gauge transformations
# ===================

def gauge_transform(potential: PotentialField, params: GaugeParams, gens: GeneratorSet) -> PotentialField:
    """
    A'_μ = A_μ + ∂_μΔ + [A_μ, Δ] with Δ = ξ_ν V^ν + χ_νλ M^{νλ}, decomposed back to (G', H')

    Closures give a closure, grid potentials give a grid potential.
    """
    if isinstance(potential, GridPotential):
        grid = potential.grid
        xi = np.asarray(params.xi, dtype=float)
        chi = np.asarray(params.chi, dtype=float)
        _check_antisymmetric(chi)
        delta = potential_matrices(xi, chi, gens)
        d_delta = potential_matrices(_gradient(xi, grid, potential.order), _gradient(chi, grid, potential.order), gens)
        A = potential_matrices(potential.G, potential.H, gens)
        A_new = A + d_delta + bracket(A, delta[..., None, :, :])
        G_new, H_new = decompose_matrices(A_new, gens)
        return GridPotential(grid, G_new, H_new, order=potential.order, name=f"{potential.name}-gauged")

    if not isinstance(potential, AnalyticPotential):
        raise FieldError(f"cannot gauge-transform {type(potential).__name__}")

    def transformed(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        G, H = potential.evaluate(points)
        xi, chi = params.xi(points), params.chi(points)
        _check_antisymmetric(chi)
        dxi = params.dxi(points) if params.dxi else _numeric_gradient(params.xi, points, params.step)
        dchi = params.dchi(points) if params.dchi else _numeric_gradient(params.chi, points, params.step)
        A = potential_matrices(G, H, gens)
        delta = potential_matrices(xi, chi, gens)
        A_new = A + potential_matrices(dxi, dchi, gens) + bracket(A, delta[..., None, :, :])
        return decompose_matrices(A_new, gens)

    return AnalyticPotential(
        G_fn=lambda p: transformed(p)[0],
        H_fn=lambda p: transformed(p)[1],
        step=potential.step,
        coordinates=potential.coordinates,
        name=f"{potential.name}-gauged",
    )


# ===================
# Actions
# ===================

def gauss_legendre_box(lower: np.ndarray, upper: np.ndarray, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor-product Gauss-Legendre nodes (resolution^4, 4) and weights over a 4D box"""
    nodes, weights = np.polynomial.legendre.leggauss(resolution)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    half = 0.5 * (upper - lower)
    mid = 0.5 * (upper + lower)
    axes = [mid[a] + half[a] * nodes for a in range(4)]
    w_axes = [half[a] * weights for a in range(4)]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    w = np.einsum("i,j,k,l->ijkl", *w_axes).reshape(-1)
    return points, w


def trace_action(potential: AnalyticPotential, gens: GeneratorSet, lower, upper,
                 resolution: int = 8, subtract_vacuum: bool = False) -> float:
    """
    ¼ ∫ η^{ac} η^{bd} tr(F_ab F_cd) over a box by Gauss-Legendre quadrature

    The trace is the Killing form of the algebra, so the result is gauge invariant.
    """
    if resolution < 2:
        raise FieldError(f"resolution must be at least 2, got {resolution}")
    points, weights = gauss_legendre_box(lower, upper, resolution)
    strengths = field_strength(potential, gens, points, subtract_vacuum=subtract_vacuum)
    eta_inv = np.linalg.inv(gens.eta)
    F = strengths.matrices
    F_up = np.einsum("ac,bd,...cdij->...abij", eta_inv, eta_inv, F)
    density = 0.25 * np.einsum("...abij,...abji->...", F, F_up)
    return float(np.sum(weights * density))


# ===================
# Static spherically symmetric solution
# ===================

class SphericalSolution(AnalyticPotential):
    """
    G_00 = −(1 − 2M/r), G_rr = 1 + 2M/r, G_θθ = r², G_φφ = r² sin²θ, H = 0
    in coordinates (t, r, θ, φ)
    """

    def __init__(self, mass: float, r_min: float):
        self.mass = float(mass)
        self.r_min = float(r_min)
        super().__init__(G_fn=self._metric, dG_fn=self._metric_derivatives,
                         coordinates="spherical", name=f"spherical(M={mass:g})")

    def _radius(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r = points[..., 1]
        if np.any(r < self.r_min):
            raise FieldError(f"evaluation inside r_min={self.r_min:g} (r={np.min(r):g})")
        return r, points[..., 2]

    def radial_components(self, r):
        """(G_00, G_rr) as functions of r"""
        r = np.asarray(r, dtype=float)
        return -(1.0 - 2.0 * self.mass / r), 1.0 + 2.0 * self.mass / r

    def _metric(self, points: np.ndarray) -> np.ndarray:
        r, theta = self._radius(points)
        G = np.zeros(points.shape[:-1] + (4, 4))
        G[..., 0, 0], G[..., 1, 1] = self.radial_components(r)
        G[..., 2, 2] = r**2
        G[..., 3, 3] = (r * np.sin(theta)) ** 2
        return G

    def _metric_derivatives(self, points: np.ndarray) -> np.ndarray:
        r, theta = self._radius(points)
        dG = np.zeros(points.shape[:-1] + (4, 4, 4))
        dG[..., 1, 0, 0] = -2.0 * self.mass / r**2
        dG[..., 1, 1, 1] = -2.0 * self.mass / r**2
        dG[..., 1, 2, 2] = 2.0 * r
        dG[..., 1, 3, 3] = 2.0 * r * np.sin(theta) ** 2
        dG[..., 2, 3, 3] = 2.0 * r**2 * np.sin(theta) * np.cos(theta)
        return dG


def solve_spherical(mass: float, r_min: float) -> SphericalSolution:
    """
    Linearized static spherically symmetric solution around a point mass

    Args:
        mass: M ≥ 0 in geometric units; negative masses are rejected and M = 0
            is accepted as the flat vacuum closure rather than refused
        r_min: closure refuses to evaluate below this radius

    Returns:
        SphericalSolution closure
    """
    if mass < 0:
        raise FieldError(f"mass must be non-negative, got {mass}")
    if r_min <= 0:
        raise FieldError(f"r_min must be positive, got {r_min}")
    return SphericalSolution(mass, r_min)


def spherical_cartesian(mass: float, center: Tuple[float, float, float] = (0.0, 0.0, 0.0)) -> AnalyticPotential:
    """The spherical solution in Cartesian form: G = η + (2M/r)(δ_0μ δ_0ν + n_i n_j)"""
    center = np.asarray(center, dtype=float)

    def metric(points: np.ndarray) -> np.ndarray:
        x = points[..., 1:] - center
        r = np.linalg.norm(x, axis=-1)
        if np.any(r == 0):
            raise FieldError("the Cartesian spherical solution is singular at its center")
        n = x / r[..., None]
        G = np.broadcast_to(np.diag([-1.0, 1.0, 1.0, 1.0]), points.shape[:-1] + (4, 4)).copy()
        pot = 2.0 * mass / r
        G[..., 0, 0] += pot
        G[..., 1:, 1:] += pot[..., None, None] * n[..., :, None] * n[..., None, :]
        return G

    return AnalyticPotential(G_fn=metric, name=f"spherical-cartesian(M={mass:g})")


@dataclass
class RefinementStudy:
    """Rows of (h, residual norms) under grid halving and the fitted orders"""
    rows: List[Dict[str, float]] = field(default_factory=list)
    orders: List[float] = field(default_factory=list)

    @property
    def final_order(self) -> float:
        return self.orders[-1] if self.orders else float("nan")


def spherical_refinement_study(mass: float = 1.0, order: int = 4, levels: int = 3,
                               center_offset: float = 6.0, half_width: float = 1.0,
                               base_points: int = 9) -> RefinementStudy:
    """
    ∇² of the component functions G_00(r) + 1 and G_rr(r) − 1 on a Cartesian box
    away from the origin, refined `levels` times; the exact value is 0, so the
    residual is the truncation error of the stencil

    Args:
        mass: point mass M
        order: 2 or 4
        levels: number of grids (each halves h)
        center_offset: distance of the box center from the mass
        half_width: half the box edge
        base_points: points per axis on the coarsest grid
    """
    solution = solve_spherical(mass, r_min=1e-12)
    study = RefinementStudy()
    h = 2.0 * half_width / (base_points - 1)
    origin = (0.0, center_offset - half_width, -half_width, -half_width)
    grid = Grid(origin, (1.0, h, h, h), (1, base_points, base_points, base_points))
    margin = order // 2
    for level in range(levels):
        # residuals are compared on the interior points of the coarsest grid
        stride = 2**level
        coarse = (slice(None),) + (slice(stride * margin, stride * (base_points - margin - 1) + 1, stride),) * 3
        pts = grid.points()
        r = np.linalg.norm(pts[..., 1:], axis=-1)
        g00, grr = solution.radial_components(r)
        norms = {}
        for label, values in (("G00", g00 + 1.0), ("Grr", grr - 1.0)):
            lap = sum(grid_second_derivative(values, grid, axis, order) for axis in (1, 2, 3))
            norms[label] = float(np.max(np.abs(lap[coarse])))
        study.rows.append({"h": grid.spacing[1], "residual_G00": norms["G00"], "residual_Grr": norms["Grr"]})
        logger.debug(f"Spherical refinement level {level}: h={grid.spacing[1]:.4g}, {norms}")
        grid = grid.refined()
    for coarse, fine in zip(study.rows, study.rows[1:]):
        study.orders.append(float(np.log2(coarse["residual_G00"] / fine["residual_G00"])))
    logger.info(f"Spherical residual order (stencil {order}): {study.orders}")
    return study
