"""
Algebra - Generators of the de Sitter, SO(5), anti-de Sitter and Poincaré groups

All generators are real 5x5 matrices in the defining representation,

    (M_AB)^C_D = δ^C_A η_BD − δ^C_B η_AD,      V_μ = M_μ4 / ℓ

with η the invariant form of the mode and ℓ the contraction radius. With
this normalization [V_μ, V_ν] = σ M_μν / ℓ² where σ = −η_44, so σ = −1 for
de Sitter and SO(5), +1 for anti-de Sitter. Poincaré uses the affine
embedding: V_μ is the nilpotent translation with the last column carrying
v^μ, and [V_μ, V_ν] = 0 exactly.
"""

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Tuple

import numpy as np
from loguru import logger
from scipy.linalg import expm

from .exceptions import AlgebraError

LORENTZ_PAIRS: Tuple[Tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])


class AlgebraMode(str, Enum):
    """Gauge group variants"""
    DESITTER = "desitter"
    SO5 = "so5"
    ANTI_DESITTER = "antidesitter"
    POINCARE = "poincare"

    @property
    def form(self) -> np.ndarray:
        """5x5 invariant form (the Poincaré entry is degenerate in the fifth slot)"""
        return np.diag(_FORMS[self]).astype(float)

    @property
    def spacetime_form(self) -> np.ndarray:
        """4x4 form used to raise and lower spacetime indices"""
        return self.form[:4, :4].copy()


_FORMS: Dict[AlgebraMode, Tuple[float, ...]] = {
    AlgebraMode.DESITTER: (-1.0, 1.0, 1.0, 1.0, 1.0),
    AlgebraMode.SO5: (1.0, 1.0, 1.0, 1.0, 1.0),
    AlgebraMode.ANTI_DESITTER: (-1.0, 1.0, 1.0, 1.0, -1.0),
    AlgebraMode.POINCARE: (-1.0, 1.0, 1.0, 1.0, 0.0),
}


def _rotation_generator(a: int, b: int, form: np.ndarray) -> np.ndarray:
    """(M_ab)^C_D = δ^C_a η_bD − δ^C_b η_aD"""
    x = np.zeros((5, 5))
    x[a, :] += form[b, :]
    x[b, :] -= form[a, :]
    return x


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """
    The ten generators of one mode.

    V has shape (4, 5, 5); M has shape (6, 5, 5) ordered as LORENTZ_PAIRS.
    """
    mode: AlgebraMode
    V: np.ndarray
    M: np.ndarray
    radius: float = 1.0

    @property
    def sigma(self) -> int:
        """Sign of [V, V] relative to M (0 in Poincaré mode)"""
        if self.mode == AlgebraMode.POINCARE:
            return 0
        return int(-self.mode.form[4, 4])

    @property
    def structure_coefficient(self) -> float:
        """c in [V_μ, V_ν] = c M_μν"""
        return self.sigma / self.radius**2

    @property
    def eta(self) -> np.ndarray:
        return self.mode.spacetime_form

    @cached_property
    def M_full(self) -> np.ndarray:
        """(4, 4, 5, 5) with M_νμ = −M_μν and zero diagonal"""
        full = np.zeros((4, 4, 5, 5))
        for k, (mu, nu) in enumerate(LORENTZ_PAIRS):
            full[mu, nu] = self.M[k]
            full[nu, mu] = -self.M[k]
        return full

    @cached_property
    def V_up(self) -> np.ndarray:
        """V^ν = η^{νκ} V_κ"""
        return np.einsum("nk,kij->nij", np.linalg.inv(self.eta), self.V)

    @cached_property
    def M_up(self) -> np.ndarray:
        """M^{νλ} = η^{να} η^{λβ} M_αβ"""
        eta_inv = np.linalg.inv(self.eta)
        return np.einsum("na,lb,abij->nlij", eta_inv, eta_inv, self.M_full)

    @cached_property
    def basis(self) -> np.ndarray:
        """(10, 5, 5): V^0..V^3 followed by M^{νλ} for ν<λ"""
        m_up = np.stack([self.M_up[mu, nu] for mu, nu in LORENTZ_PAIRS])
        return np.concatenate([self.V_up, m_up])

    @cached_property
    def _projector(self) -> np.ndarray:
        return np.linalg.pinv(self.basis.reshape(10, 25))

    def generators(self) -> Dict[str, np.ndarray]:
        """Named lowered generators, e.g. 'V0', 'M01'"""
        named = {f"V{mu}": self.V[mu] for mu in range(4)}
        named.update({f"M{mu}{nu}": self.M[k] for k, (mu, nu) in enumerate(LORENTZ_PAIRS)})
        return named


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """A 5x5 real matrix tagged with the mode it belongs to"""
    matrix: np.ndarray
    mode: AlgebraMode

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_modes(self, other)
        return AlgebraElement(self.matrix + other.matrix, self.mode)

    def __mul__(self, scalar: float) -> "AlgebraElement":
        return AlgebraElement(scalar * self.matrix, self.mode)

    __rmul__ = __mul__


@dataclass(frozen=True)
class AlgebraReport:
    """Maximum absolute residual per structure-relation family"""
    mode: AlgebraMode
    sigma: int
    radius: float
    residuals: Dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def passed(self, tolerance: float = 1e-12) -> bool:
        return self.max_residual <= tolerance

    def to_dict(self) -> Dict[str, object]:
        return {
            "mode": self.mode.value,
            "sigma": self.sigma,
            "radius": self.radius,
            "residuals": dict(self.residuals),
            "max_residual": self.max_residual,
        }


# ===================
# Construction
# ===================

def build_generators(mode: AlgebraMode, radius: float = 1.0) -> GeneratorSet:
    """
    Build the 4 V and 6 M generators of a mode

    Args:
        mode: which group
        radius: contraction radius ℓ scaling V_μ = M_μ4/ℓ (ignored for Poincaré)

    Returns:
        GeneratorSet
    """
    mode = AlgebraMode(mode)
    if radius <= 0:
        raise AlgebraError(f"radius must be positive, got {radius}")
    form = mode.form
    M = np.stack([_rotation_generator(a, b, form) for a, b in LORENTZ_PAIRS])
    if mode == AlgebraMode.POINCARE:
        V = np.zeros((4, 5, 5))
        for mu in range(4):
            V[mu, mu, 4] = 1.0
        radius = 1.0
    else:
        V = np.stack([_rotation_generator(mu, 4, form) for mu in range(4)]) / radius
    logger.debug(f"Built {mode.value} generators (radius={radius})")
    return GeneratorSet(mode=mode, V=V, M=M, radius=radius)


def element(matrix: np.ndarray, gens: GeneratorSet, tolerance: float = 1e-10) -> AlgebraElement:
    """Wrap a matrix as an AlgebraElement after checking it lies in the span of gens"""
    matrix = np.asarray(matrix, dtype=float)
    coeffs = matrix.reshape(25) @ gens._projector
    residual = np.max(np.abs(coeffs @ gens.basis.reshape(10, 25) - matrix.reshape(25)))
    if residual > tolerance * max(1.0, np.max(np.abs(matrix))):
        raise AlgebraError(f"matrix is not in the {gens.mode.value} algebra (residual {residual:.3e})")
    return AlgebraElement(matrix, gens.mode)


def _check_modes(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.mode != b.mode:
        raise AlgebraError(f"mode mismatch: {a.mode.value} vs {b.mode.value}")


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix commutator ab − ba, broadcasting over leading axes"""
    return a @ b - b @ a


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Lie bracket of two elements of the same mode"""
    _check_modes(a, b)
    return AlgebraElement(bracket(a.matrix, b.matrix), a.mode)


# ===================
# Structure relations
# ===================

def verify_algebra(gens: GeneratorSet) -> AlgebraReport:
    """
    Check every generator pair against the structure relations

        [V_μ, V_ν]   = c M_μν              (c = σ/ℓ², 0 for Poincaré)
        [M_μν, V_ρ]  = η_νρ V_μ − η_μρ V_ν
        [M_μν, M_ρκ] = η_νρ M_μκ + η_μκ M_νρ − η_νκ M_μρ − η_μρ M_νκ

    and the Jacobi identity on all triples of the basis.

    Returns:
        AlgebraReport with max absolute residual per family
    """
    eta = gens.eta
    V, Mf = gens.V, gens.M_full
    c = gens.structure_coefficient

    vv = 0.0
    for mu, nu in itertools.product(range(4), repeat=2):
        vv = max(vv, np.max(np.abs(bracket(V[mu], V[nu]) - c * Mf[mu, nu])))

    mv = 0.0
    for (mu, nu), rho in itertools.product(LORENTZ_PAIRS, range(4)):
        expected = eta[nu, rho] * V[mu] - eta[mu, rho] * V[nu]
        mv = max(mv, np.max(np.abs(bracket(Mf[mu, nu], V[rho]) - expected)))

    mm = 0.0
    for (mu, nu), (rho, kap) in itertools.product(LORENTZ_PAIRS, repeat=2):
        expected = (eta[nu, rho] * Mf[mu, kap] + eta[mu, kap] * Mf[nu, rho]
                    - eta[nu, kap] * Mf[mu, rho] - eta[mu, rho] * Mf[nu, kap])
        mm = max(mm, np.max(np.abs(bracket(Mf[mu, nu], Mf[rho, kap]) - expected)))

    jacobi = 0.0
    basis = np.concatenate([gens.V, gens.M])
    for i, j, k in itertools.combinations(range(10), 3):
        x, y, z = basis[i], basis[j], basis[k]
        total = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
        jacobi = max(jacobi, np.max(np.abs(total)))

    report = AlgebraReport(
        mode=gens.mode,
        sigma=gens.sigma,
        radius=gens.radius,
        residuals={"VV": float(vv), "MV": float(mv), "MM": float(mm), "jacobi": float(jacobi)},
    )
    logger.info(f"Algebra {gens.mode.value}: sigma={gens.sigma}, max residual {report.max_residual:.2e}")
    return report


# ===================
# Potentials as generator sums
# ===================

def potential_matrices(G: np.ndarray, H: np.ndarray, gens: GeneratorSet) -> np.ndarray:
    """
    Batched A = G_ν V^ν + H_νλ M^{νλ} (sum over all ν, λ)

    Args:
        G: (..., 4) component rows
        H: (..., 4, 4) antisymmetric in the last two axes

    Returns:
        (..., 5, 5) matrices
    """
    return (np.einsum("...n,nij->...ij", G, gens.V_up)
            + np.einsum("...nl,nlij->...ij", H, gens.M_up))


def decompose_matrices(X: np.ndarray, gens: GeneratorSet) -> Tuple[np.ndarray, np.ndarray]:
    """Batched inverse of potential_matrices: returns (G (..., 4), H (..., 4, 4))"""
    X = np.asarray(X, dtype=float)
    coeffs = X.reshape(X.shape[:-2] + (25,)) @ gens._projector
    G = coeffs[..., :4]
    H = np.zeros(X.shape[:-2] + (4, 4))
    for k, (mu, nu) in enumerate(LORENTZ_PAIRS):
        H[..., mu, nu] = 0.5 * coeffs[..., 4 + k]
        H[..., nu, mu] = -0.5 * coeffs[..., 4 + k]
    return G, H


def compose_potential(G_row: np.ndarray, H_rows: np.ndarray, gens: GeneratorSet,
                      tolerance: float = 1e-12) -> AlgebraElement:
    """
    Compose one direction of the potential, A_μ = G_μν V^ν + H_μνλ M^{νλ}

    Args:
        G_row: 4 components G_μν for fixed μ
        H_rows: 4x4 components H_μνλ for fixed μ, antisymmetric in (ν, λ)
        gens: generator set

    Returns:
        AlgebraElement
    """
    G_row = np.asarray(G_row, dtype=float)
    H_rows = np.asarray(H_rows, dtype=float)
    if G_row.shape != (4,) or H_rows.shape != (4, 4):
        raise AlgebraError(f"expected shapes (4,) and (4, 4), got {G_row.shape} and {H_rows.shape}")
    asym = np.max(np.abs(H_rows + H_rows.T))
    if asym > tolerance * max(1.0, np.max(np.abs(H_rows))):
        raise AlgebraError(f"H components are not antisymmetric (residual {asym:.3e})")
    return AlgebraElement(potential_matrices(G_row, H_rows, gens), gens.mode)


def decompose_potential(x: AlgebraElement, gens: GeneratorSet) -> Tuple[np.ndarray, np.ndarray]:
    """Exact inverse of compose_potential"""
    if x.mode != gens.mode:
        raise AlgebraError(f"mode mismatch: {x.mode.value} vs {gens.mode.value}")
    return decompose_matrices(x.matrix, gens)


# ===================
# Group elements
# ===================

def group_residual(U: np.ndarray, mode: AlgebraMode) -> float:
    """Max deviation of U from the group (form preservation, affine row for Poincaré)"""
    U = np.asarray(U)
    mode = AlgebraMode(mode)
    if mode == AlgebraMode.POINCARE:
        lorentz = U[..., :4, :4]
        form = np.swapaxes(lorentz, -1, -2) @ MINKOWSKI @ lorentz - MINKOWSKI
        affine = U[..., 4, :] - np.eye(5)[4]
        return float(max(np.max(np.abs(form)), np.max(np.abs(affine))))
    eta = mode.form
    return float(np.max(np.abs(np.swapaxes(U, -1, -2) @ eta @ U - eta)))


def exp_map(x: AlgebraElement, tolerance: float = 1e-12) -> np.ndarray:
    """
    Group element exp(x) by Padé scaling-and-squaring

    Args:
        x: algebra element (the matrix may carry leading batch axes)
        tolerance: acceptable invariant-form residual per unit norm

    Returns:
        5x5 group element(s)
    """
    if tolerance <= 0:
        raise AlgebraError(f"tolerance must be positive, got {tolerance}")
    U = expm(np.asarray(x.matrix, dtype=float))
    residual = group_residual(U, x.mode)
    scale = max(1.0, float(np.max(np.abs(U))) ** 2)
    if residual > 10 * tolerance * scale:
        logger.warning(f"exp_map left the {x.mode.value} group: residual {residual:.3e}")
    return U


def group_inverse(U: np.ndarray, mode: AlgebraMode) -> np.ndarray:
    """Inverse of a group element: η Uᵀ η for the metric modes"""
    mode = AlgebraMode(mode)
    if mode == AlgebraMode.POINCARE:
        return np.linalg.inv(U)
    eta = mode.form
    return eta @ np.swapaxes(U, -1, -2) @ eta
