"""
Lattice - Background-free lattice: vertex labels, plaquette holonomies and the Wilson action

Vertices carry integer ids on a grid whose bookkeeping labels x are ε/2
apart. Link variables join vertices two edges apart, U = exp(ε A_a(z)),
with the potential evaluated at the vertex z between them, so the
plaquettes live on the even sublattice and have side ε.
"""

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .algebra import AlgebraElement, AlgebraMode, GeneratorSet, exp_map, group_inverse, potential_matrices
from .exceptions import LatticeError
from .field import AnalyticPotential, trace_action

Vertex = Tuple[int, int, int, int]


@dataclass(frozen=True, eq=False)
class LatticeGraph:
    """
    Open-boundary lattice with `cells` plaquette sides per axis.

    links[n, a] is the element carried from even vertex 2n to 2n + 2â; the
    reverse edge carries its group inverse. Entries with n_a == cells are unused.
    """
    cells: Tuple[int, int, int, int]
    epsilon: float
    mode: AlgebraMode
    links: np.ndarray
    origin: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise LatticeError(f"epsilon must be positive, got {self.epsilon}")
        if len(self.cells) != 4 or any(c < 1 for c in self.cells):
            raise LatticeError(f"cells must be 4 positive integers, got {self.cells}")
        expected = self.coarse_shape + (4, 5, 5)
        if self.links.shape != expected:
            raise LatticeError(f"links have shape {self.links.shape}, expected {expected}")

    @property
    def dims(self) -> Tuple[int, ...]:
        """Vertices per axis"""
        return tuple(2 * c + 1 for c in self.cells)

    @property
    def coarse_shape(self) -> Tuple[int, ...]:
        return tuple(c + 1 for c in self.cells)

    def vertex_position(self, vertex: Sequence[int]) -> np.ndarray:
        """Bookkeeping label x of a vertex"""
        return np.asarray(self.origin) + 0.5 * self.epsilon * np.asarray(vertex, dtype=float)

    def link(self, u: Sequence[int], v: Sequence[int]) -> np.ndarray:
        """Group element on the edge u -> v (two lattice edges apart)"""
        u, v = np.asarray(u), np.asarray(v)
        step = v - u
        axes = np.nonzero(step)[0]
        if len(axes) != 1 or abs(step[axes[0]]) != 2 or np.any(u % 2) or np.any(v % 2):
            raise LatticeError(f"no link between {tuple(u)} and {tuple(v)}")
        if np.any(u < 0) or np.any(v < 0) or np.any(u >= self.dims) or np.any(v >= self.dims):
            raise LatticeError(f"link {tuple(u)} -> {tuple(v)} leaves the lattice")
        a = int(axes[0])
        if step[a] > 0:
            return self.links[tuple(u // 2) + (a,)]
        return group_inverse(self.links[tuple(v // 2) + (a,)], self.mode)

    @classmethod
    def identity(cls, cells: Sequence[int], epsilon: float, mode: AlgebraMode = AlgebraMode.SO5) -> "LatticeGraph":
        shape = tuple(c + 1 for c in cells) + (4, 5, 5)
        links = np.broadcast_to(np.eye(5), shape).copy()
        return cls(tuple(cells), epsilon, AlgebraMode(mode), links)

    @classmethod
    def from_potential(cls, potential: AnalyticPotential, gens: GeneratorSet,
                       origin: Sequence[float], epsilon: float, cells: Sequence[int]) -> "LatticeGraph":
        """
        Links U = exp(ε A_a) with A_a evaluated at the vertex between the ends

        Args:
            potential: analytic (G, H) closure
            gens: generator set (fixes the mode)
            origin: coordinates of vertex (0, 0, 0, 0)
            epsilon: link length
            cells: plaquette sides per axis
        """
        cells = tuple(int(c) for c in cells)
        coarse = tuple(c + 1 for c in cells)
        origin = np.asarray(origin, dtype=float)
        axes = [origin[a] + epsilon * np.arange(coarse[a]) for a in range(4)]
        sites = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        links = np.empty(coarse + (4, 5, 5))
        for a in range(4):
            shift = np.zeros(4)
            shift[a] = 0.5 * epsilon
            G, H = potential.evaluate(sites + shift)
            A_a = potential_matrices(G[..., a, :], H[..., a, :, :], gens)
            links[..., a, :, :] = exp_map(AlgebraElement(epsilon * A_a, gens.mode))
        logger.debug(f"Built {cells} lattice links (epsilon={epsilon:g}, mode={gens.mode.value})")
        return cls(cells, float(epsilon), gens.mode, links, tuple(origin))


@dataclass(frozen=True)
class PlaquetteLoop:
    """Four vertex ids forming a loop in the (a, b) plane"""
    vertices: Tuple[Vertex, Vertex, Vertex, Vertex]
    plane: Tuple[int, int]

    def __post_init__(self):
        ring = list(self.vertices) + [self.vertices[0]]
        for u, v in zip(ring, ring[1:]):
            step = np.abs(np.subtract(v, u))
            if step.sum() != 2 or step.max() != 2:
                raise LatticeError(f"loop vertices {u} and {v} are not two edges apart")

    @classmethod
    def at(cls, corner: Sequence[int], a: int, b: int) -> "PlaquetteLoop":
        """Loop corner -> +2a -> +2a+2b -> +2b"""
        c = np.asarray(corner, dtype=int)
        ea, eb = 2 * np.eye(4, dtype=int)[a], 2 * np.eye(4, dtype=int)[b]
        verts = tuple(tuple(int(i) for i in v) for v in (c, c + ea, c + ea + eb, c + eb))
        return cls(vertices=verts, plane=(a, b))


@dataclass(frozen=True, eq=False)
class VertexLabels:
    """Bookkeeping labels x (spacing ε/2) and physical labels y (5 components) per vertex"""
    x: np.ndarray
    y: np.ndarray
    labelled: np.ndarray
    closure_residual: float
    unlabelled: List[Vertex] = field(default_factory=list)


# ===================
# Label propagation
# ===================

def label_hop(y: np.ndarray, sign: int, G_row: np.ndarray, H_rows: np.ndarray,
              epsilon: float) -> np.ndarray:
    """
    One edge hop: w_b = y_b ± (ε/2)(G_ab + H_abc y_c), b, c over spacetime; y_4 unchanged
    """
    w = np.array(y, dtype=float)
    w[:4] = y[:4] + sign * 0.5 * epsilon * (G_row + H_rows @ y[:4])
    return w


def propagate_labels(lattice: LatticeGraph, potential: AnalyticPotential, seed: Sequence[float],
                     seed_vertex: Optional[Sequence[int]] = None,
                     active: Optional[np.ndarray] = None) -> VertexLabels:
    """
    Breadth-first physical labels from a seed

    Args:
        lattice: supplies dims, epsilon and origin
        potential: (G, H) closure, evaluated at the midpoint of each hop
        seed: 5-vector ȳ for the seed vertex
        seed_vertex: defaults to the origin vertex
        active: optional boolean mask of vertices taking part (holes disconnect)

    Returns:
        VertexLabels with the loop-closure residual over every labelled edge
    """
    dims = lattice.dims
    seed = np.asarray(seed, dtype=float)
    if seed.shape != (5,):
        raise LatticeError(f"seed must be a 5-vector, got shape {seed.shape}")
    seed_vertex = tuple(seed_vertex) if seed_vertex is not None else (0, 0, 0, 0)
    active = np.ones(dims, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    if not active[seed_vertex]:
        raise LatticeError(f"seed vertex {seed_vertex} is not active")

    idx = np.stack(np.meshgrid(*[np.arange(n) for n in dims], indexing="ij"), axis=-1)
    x = np.asarray(lattice.origin) + 0.5 * lattice.epsilon * idx

    # potentials at the midpoint of every forward edge, per direction
    half = 0.25 * lattice.epsilon
    edge_fields: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    for a in range(4):
        shift = np.zeros(4)
        shift[a] = half
        G, H = potential.evaluate(x + shift)
        edge_fields[a] = (G[..., a, :], H[..., a, :, :])

    y = np.zeros(dims + (5,))
    labelled = np.zeros(dims, dtype=bool)
    y[seed_vertex] = seed
    labelled[seed_vertex] = True
    queue = deque([seed_vertex])
    while queue:
        u = queue.popleft()
        for a, sign in product(range(4), (1, -1)):
            v = list(u)
            v[a] += sign
            v = tuple(v)
            if not 0 <= v[a] < dims[a] or labelled[v] or not active[v]:
                continue
            edge = u if sign > 0 else v
            G_row, H_rows = edge_fields[a][0][edge], edge_fields[a][1][edge]
            y[v] = label_hop(y[u], sign, G_row, H_rows, lattice.epsilon)
            labelled[v] = True
            queue.append(v)

    residual = 0.0
    for a in range(4):
        G_rows, H_rows = edge_fields[a]
        front = tuple(slice(0, n - 1) if ax == a else slice(None) for ax, n in enumerate(dims))
        back = tuple(slice(1, n) if ax == a else slice(None) for ax, n in enumerate(dims))
        both = labelled[front] & labelled[back]
        if not np.any(both):
            continue
        yu, yv = y[front][both], y[back][both]
        predicted = yu[:, :4] + 0.5 * lattice.epsilon * (
            G_rows[front][both] + np.einsum("ebc,ec->eb", H_rows[front][both], yu[:, :4]))
        residual = max(residual, float(np.max(np.abs(predicted - yv[:, :4]))))

    unlabelled = [tuple(int(i) for i in v) for v in np.argwhere(active & ~labelled)]
    if unlabelled:
        logger.warning(f"{len(unlabelled)} vertices unreachable from seed {seed_vertex}")
    if residual > 0:
        logger.info(f"Label propagation is path dependent: closure residual {residual:.3e}")
    return VertexLabels(x=x, y=y, labelled=labelled, closure_residual=residual, unlabelled=unlabelled)


# ===================
# Holonomies and the Wilson action
# ===================

def loop_holonomy(lattice: LatticeGraph, path: Sequence[Sequence[int]]) -> np.ndarray:
    """Ordered product of link elements along a closed path of vertices"""
    if len(path) < 2 or tuple(path[0]) != tuple(path[-1]):
        raise LatticeError("a holonomy needs a closed path")
    result = np.eye(5)
    for u, v in zip(path, path[1:]):
        result = result @ lattice.link(u, v)
    return result


def plaquette_holonomy(lattice: LatticeGraph, loop: PlaquetteLoop) -> np.ndarray:
    """U_ij U_jk U_kl U_li around the loop"""
    return loop_holonomy(lattice, list(loop.vertices) + [loop.vertices[0]])


def _plane_holonomies(lattice: LatticeGraph, a: int, b: int) -> np.ndarray:
    links = lattice.links
    cells = lattice.cells
    base = tuple(slice(0, cells[ax]) if ax in (a, b) else slice(None) for ax in range(4))
    plus_a = tuple(slice(1, cells[ax] + 1) if ax == a else s for ax, s in enumerate(base))
    plus_b = tuple(slice(1, cells[ax] + 1) if ax == b else s for ax, s in enumerate(base))
    U_a = links[base + (a,)]
    U_b_shift = links[plus_a + (b,)]
    U_a_shift = links[plus_b + (a,)]
    U_b = links[base + (b,)]
    return U_a @ U_b_shift @ group_inverse(U_a_shift, lattice.mode) @ group_inverse(U_b, lattice.mode)


def _transverse_weights(lattice: LatticeGraph, a: int, b: int) -> np.ndarray:
    """Trapezoid weights: ½ per transverse axis at an open boundary"""
    weights = np.ones(1)
    shape = []
    for ax in range(4):
        if ax in (a, b):
            w = np.ones(lattice.cells[ax])
        else:
            w = np.ones(lattice.cells[ax] + 1)
            w[0] = w[-1] = 0.5
        weights = np.multiply.outer(weights, w)
        shape.append(len(w))
    return weights.reshape(shape)


def wilson_action(lattice: LatticeGraph) -> float:
    """
    Σ_p w_p η^aa η^bb Re tr(U_p − I) over all plaquettes of the even sublattice;
    identity links give 0 and smooth potentials reproduce the continuum action + O(ε²)
    """
    eta = lattice.mode.spacetime_form
    total = 0.0
    for a, b in combinations(range(4), 2):
        P = _plane_holonomies(lattice, a, b)
        traces = np.real(np.trace(P, axis1=-2, axis2=-1)) - 5.0
        total += eta[a, a] * eta[b, b] * float(np.sum(_transverse_weights(lattice, a, b) * traces))
    return total


def gauge_conjugate(lattice: LatticeGraph, g: np.ndarray) -> LatticeGraph:
    """U_a(n) -> g(n) U_a(n) g(n + â)⁻¹ for per-site group elements g"""
    if g.shape != lattice.coarse_shape + (5, 5):
        raise LatticeError(f"gauge field has shape {g.shape}, expected {lattice.coarse_shape + (5, 5)}")
    links = lattice.links.copy()
    for a in range(4):
        base = tuple(slice(0, lattice.cells[ax]) if ax == a else slice(None) for ax in range(4))
        ahead = tuple(slice(1, lattice.cells[ax] + 1) if ax == a else slice(None) for ax in range(4))
        links[base + (a,)] = g[base] @ lattice.links[base + (a,)] @ group_inverse(g[ahead], lattice.mode)
    return LatticeGraph(lattice.cells, lattice.epsilon, lattice.mode, links, lattice.origin)


def random_gauge_field(lattice: LatticeGraph, gens: GeneratorSet, seed: int, scale: float = 1.0) -> np.ndarray:
    """Per-site group elements exp(Σ c_k T_k) with normal coefficients from a seeded generator"""
    rng = np.random.default_rng(seed)
    coeffs = scale * rng.standard_normal(lattice.coarse_shape + (10,))
    algebra = np.einsum("...k,kij->...ij", coeffs, np.concatenate([gens.V, gens.M]))
    return exp_map(AlgebraElement(algebra, gens.mode))


# ===================
# Continuum limit
# ===================

def continuum_action(potential: AnalyticPotential, gens: GeneratorSet, lower: Sequence[float],
                     upper: Sequence[float], resolution: int = 12) -> float:
    """¼∫ η^{ac} η^{bd} tr(F_ab F_cd) over the box, Gauss-Legendre with `resolution` nodes per axis"""
    if resolution < 8:
        raise LatticeError(f"resolution must be at least 8, got {resolution}")
    return trace_action(potential, gens, lower, upper, resolution, subtract_vacuum=False)


def smooth_test_potential(seed: int = 7, amplitude: float = 0.5, torsion: float = 0.3) -> AnalyticPotential:
    """
    Smooth trigonometric (G, H) closure with exact derivatives, the shared test field
    of the convergence and gauge studies
    """
    rng = np.random.default_rng(seed)
    kG = rng.uniform(-1.0, 1.0, (4, 4, 4))
    pG = rng.uniform(0.0, 2 * np.pi, (4, 4))
    kH = rng.uniform(-1.0, 1.0, (4, 4, 4, 4))
    pH = rng.uniform(0.0, 2 * np.pi, (4, 4, 4))

    def G(points):
        return amplitude * np.sin(np.einsum("abr,...r->...ab", kG, points) + pG)

    def dG(points):
        c = amplitude * np.cos(np.einsum("abr,...r->...ab", kG, points) + pG)
        return np.einsum("abr,...ab->...rab", kG, c)

    def H(points):
        h = torsion * np.sin(np.einsum("abcr,...r->...abc", kH, points) + pH)
        return h - np.swapaxes(h, -1, -2)

    def dH(points):
        c = torsion * np.cos(np.einsum("abcr,...r->...abc", kH, points) + pH)
        d = np.einsum("abcr,...abc->...rabc", kH, c)
        return d - np.swapaxes(d, -1, -2)

    return AnalyticPotential(G_fn=G, H_fn=H, dG_fn=dG, dH_fn=dH, name=f"smooth(seed={seed})")


@dataclass
class ConvergenceStudy:
    rows: List[Dict[str, float]] = field(default_factory=list)
    orders: List[float] = field(default_factory=list)

    @property
    def final_order(self) -> float:
        return self.orders[-1] if self.orders else float("nan")


def convergence_study(potential: AnalyticPotential, gens: GeneratorSet, length: float = 1.0,
                      base_cells: int = 4, levels: int = 3, resolution: int = 12) -> ConvergenceStudy:
    """
    Wilson action on [0, length]^4 for ε = length/base_cells halved `levels − 1` times,
    against the continuum action; orders from successive error ratios
    """
    lower, upper = np.zeros(4), np.full(4, float(length))
    reference = continuum_action(potential, gens, lower, upper, resolution)
    study = ConvergenceStudy()
    for level in range(levels):
        cells = base_cells * 2**level
        epsilon = length / cells
        lattice = LatticeGraph.from_potential(potential, gens, lower, epsilon, (cells,) * 4)
        s_wilson = wilson_action(lattice)
        study.rows.append({
            "epsilon": epsilon,
            "S_wilson": s_wilson,
            "S_continuum": reference,
            "error": abs(s_wilson - reference),
        })
        logger.debug(f"Lattice level {level}: eps={epsilon:.4g}, S_wilson={s_wilson:.10g}")
    for coarse, fine in zip(study.rows, study.rows[1:]):
        study.orders.append(float(np.log2(coarse["error"] / fine["error"])))
    logger.info(f"Wilson action convergence orders: {study.orders}")
    return study
