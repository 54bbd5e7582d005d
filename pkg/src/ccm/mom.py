"""Thin-wire EFIE method of moments for parallel z-directed strip dipoles.

All lengths are in free-space wavelengths, so the wavenumber is fixed at
``k = 2*pi`` and the assembled matrices depend on geometry only.  Each
dipole is a strip of width ``w`` modelled as a wire of radius ``w/4``,
discretized with triangular (rooftop) basis functions and Galerkin testing.
The reduced kernel places the source on the wire axis and the observation
point a distance ``rho`` away: ``rho = a`` on the same wire and ``rho = |dx|``
between two wires.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, OverlapError, QuadratureFailure
from .linalg import SymMatrix

ETA0 = 376.730313668
WAVENUMBER = 2.0 * np.pi
GAUSS_POINTS = 8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_POINTS)
# nodes mapped to (0, 1), weights summing to 1
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def auto_segments(length: float) -> int:
    """31 segments per half wavelength of dipole length, rounded to odd."""
    n = max(3, int(round(31.0 * length / 0.5)))
    return n if n % 2 else n + 1


@dataclass(frozen=True)
class WireDipole:
    length: float
    strip_width: float = 0.005
    x_position: float = 0.0
    segments: int | None = None

    def __post_init__(self):
        if self.segments is None:
            object.__setattr__(self, "segments", auto_segments(self.length))
        if not self.length > 0 or not self.strip_width > 0:
            raise ValueError("length and strip_width must be positive")
        if self.strip_width > self.length / 10:
            raise ValueError(
                f"strip_width {self.strip_width} exceeds length/10 for length {self.length}"
            )
        if int(self.segments) != self.segments or self.segments < 3 or self.segments % 2 == 0:
            raise ValueError(f"segments must be an odd integer >= 3, got {self.segments}")

    @property
    def radius(self) -> float:
        """Equivalent wire radius of the strip."""
        return self.strip_width / 4.0

    @property
    def segment_length(self) -> float:
        return self.length / self.segments

    @property
    def basis_count(self) -> int:
        return self.segments - 1


@dataclass(frozen=True)
class ArrayLayout:
    elements: tuple

    def __post_init__(self):
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        if not elements:
            raise ValueError("an array needs at least one element")
        for i, a in enumerate(elements):
            for b in elements[i + 1:]:
                _check_separation(a, b)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


@dataclass(frozen=True)
class BasisSet:
    owner: int
    count: int
    node_z: np.ndarray


@dataclass(frozen=True)
class BlockImpedance:
    """Block-partitioned impedance matrix of an array.

    ``self_blocks[i]`` is ``Z_ii``; ``mutual[(i, j)]`` holds ``Z_ij`` for
    ``i < j`` only.  Lower blocks are implied by reciprocity.
    """

    self_blocks: tuple
    mutual: dict = field(default_factory=dict)

    def __post_init__(self):
        blocks = tuple(np.asarray(z, dtype=complex) for z in self.self_blocks)
        object.__setattr__(self, "self_blocks", blocks)
        sizes = self.sizes
        mutual = {}
        for (i, j), z in self.mutual.items():
            if not i < j:
                raise ValueError("mutual blocks are keyed by (i, j) with i < j")
            z = np.asarray(z, dtype=complex)
            if z.shape != (sizes[i], sizes[j]):
                raise DimensionMismatch(
                    f"Z_{i}{j} has shape {z.shape}, expected {(sizes[i], sizes[j])}"
                )
            mutual[(i, j)] = z
        object.__setattr__(self, "mutual", mutual)

    @property
    def n_elements(self) -> int:
        return len(self.self_blocks)

    @property
    def sizes(self) -> list:
        """Basis counts K_i per element."""
        return [z.shape[0] for z in self.self_blocks]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)])

    def block(self, i: int, j: int) -> np.ndarray:
        if i == j:
            return self.self_blocks[i]
        if i < j:
            z = self.mutual.get((i, j))
            return np.zeros((self.sizes[i], self.sizes[j]), complex) if z is None else z
        return self.block(j, i).T

    def full(self) -> np.ndarray:
        """Dense coupled impedance matrix Z^c."""
        off = self.offsets
        z = np.zeros((off[-1], off[-1]), dtype=complex)
        for i in range(self.n_elements):
            for j in range(self.n_elements):
                z[off[i]:off[i + 1], off[j]:off[j + 1]] = self.block(i, j)
        return z

    def subset(self, indices) -> "BlockImpedance":
        """Blocks restricted to (and reordered by) ``indices``."""
        indices = list(indices)
        mutual = {}
        for a, i in enumerate(indices):
            for b, j in enumerate(indices):
                if a < b:
                    mutual[(a, b)] = self.block(i, j)
        return BlockImpedance(tuple(self.self_blocks[i] for i in indices), mutual)


def _check_separation(a: WireDipole, b: WireDipole):
    gap = abs(a.x_position - b.x_position) - 0.5 * (a.strip_width + b.strip_width)
    if not gap > 0:
        raise OverlapError(
            f"dipoles at x={a.x_position} and x={b.x_position} overlap (edge gap {gap:.3g})"
        )


def mesh(dipole: WireDipole, owner: int = 0) -> BasisSet:
    """Uniform segmentation; basis apexes are the interior nodes."""
    nodes = _nodes(dipole)
    return BasisSet(owner=owner, count=dipole.basis_count, node_z=nodes[1:-1].copy())


def _nodes(dipole: WireDipole) -> np.ndarray:
    half = 0.5 * dipole.length
    nodes = -half + dipole.segment_length * np.arange(dipole.segments + 1)
    # exact mirror symmetry about z = 0
    return 0.5 * (nodes - nodes[::-1])


def _segment_integrals(obs: WireDipole, src: WireDipole, rho: float):
    """Segment-pair integrals of the reduced kernel.

    Returns ``(I, J)`` where ``J[p, q] = int_p int_q G`` and
    ``I[p, q, s, t]`` weights the integrand by the linear shape functions
    ``s`` on observation segment ``p`` and ``t`` on source segment ``q``
    (index 0 rising, 1 falling).  The 1/R part of the inner integral is
    done analytically; the smooth remainder by Gauss-Legendre.
    """
    k = WAVENUMBER
    za = _nodes(obs)[:-1]
    zb = _nodes(src)[:-1]
    da, db = obs.segment_length, src.segment_length

    # observation points, shape (Pa, G)
    zo = za[:, None] + _GL_T[None, :] * da
    wo = _GL_W * da
    shape_o = np.stack([_GL_T, 1.0 - _GL_T])  # (2, G)

    # analytic 1/R integrals over each source segment: (Pa, G, Qb)
    u1 = zb[None, None, :] - zo[:, :, None]
    u2 = u1 + db
    r1 = np.hypot(u1, rho)
    r2 = np.hypot(u2, rho)
    s0 = np.arcsinh(u2 / rho) - np.arcsinh(u1 / rho)
    s1 = r2 - r1
    rise = (s1 - u1 * s0) / db
    sing = np.stack([rise, s0 - rise], axis=-1) / (4 * np.pi)  # (Pa, G, Qb, 2)
    sing0 = s0 / (4 * np.pi)

    # smooth remainder (exp(-jkR) - 1) / (4 pi R) sampled on source points
    zs = zb[:, None] + _GL_T[None, :] * db  # (Qb, H)
    ws = _GL_W * db
    dist = np.hypot(zo[:, :, None, None] - zs[None, None, :, :], rho)
    rem = np.expm1(-1j * k * dist) / (4 * np.pi * dist)  # (Pa, G, Qb, H)
    shape_s = np.stack([_GL_T, 1.0 - _GL_T])  # (2, H)
    inner_shaped = sing + np.einsum("pgqh,h,th->pgqt", rem, ws, shape_s)
    inner_plain = sing0 + np.einsum("pgqh,h->pgq", rem, ws)

    I = np.einsum("pgqt,g,sg->pqst", inner_shaped, wo, shape_o)
    J = np.einsum("pgq,g->pq", inner_plain, wo)
    return I, J


def _impedance(obs: WireDipole, src: WireDipole, rho: float) -> np.ndarray:
    """One-directional Galerkin block (obs basis x src basis), not symmetrized."""
    I, J = _segment_integrals(obs, src, rho)
    k = WAVENUMBER
    m = np.arange(1, obs.segments)
    n = np.arange(1, src.segments)
    # basis m: rising on segment m-1, falling on segment m
    M, N = np.meshgrid(m, n, indexing="ij")
    vec = (I[M - 1, N - 1, 0, 0] + I[M - 1, N, 0, 1]
           + I[M, N - 1, 1, 0] + I[M, N, 1, 1])
    scal = (J[M - 1, N - 1] - J[M - 1, N] - J[M, N - 1] + J[M, N])
    scal = scal / (obs.segment_length * src.segment_length)
    z = 1j * k * ETA0 * vec - 1j * (ETA0 / k) * scal
    if not np.all(np.isfinite(z)):
        raise QuadratureFailure("non-finite impedance entry")
    return z


def self_impedance(dipole: WireDipole) -> np.ndarray:
    """Complex symmetric Z of one dipole."""
    z = _impedance(dipole, dipole, dipole.radius)
    return 0.5 * (z + z.T)


def mutual_impedance(a: WireDipole, b: WireDipole) -> np.ndarray:
    """Complex Z_ab; ``mutual_impedance(b, a)`` is its exact transpose."""
    _check_separation(a, b)
    rho = abs(a.x_position - b.x_position)
    return 0.5 * (_impedance(a, b, rho) + _impedance(b, a, rho).T)


def assemble_self(dipole: WireDipole):
    """Return ``(R, X)`` of a single dipole as symmetric matrices."""
    z = self_impedance(dipole)
    r = SymMatrix(z.real)
    r.check_psd(1e-10, "self radiation matrix")
    return r, SymMatrix(z.imag)


def assemble_mutual(a: WireDipole, b: WireDipole):
    """Return ``(R_ab, X_ab)`` as plain real arrays."""
    z = mutual_impedance(a, b)
    return z.real.copy(), z.imag.copy()


def assemble_array(layout: ArrayLayout) -> BlockImpedance:
    elements = list(layout)
    selfs = tuple(self_impedance(e) for e in elements)
    for i, z in enumerate(selfs):
        SymMatrix(z.real).check_psd(1e-10, f"radiation matrix of element {i}")
    mutual = {}
    for i in range(len(elements)):
        for j in range(i + 1, len(elements)):
            mutual[(i, j)] = mutual_impedance(elements[i], elements[j])
    return BlockImpedance(selfs, mutual)


def delta_gap(dipole: WireDipole, voltage: complex = 1.0) -> np.ndarray:
    """Excitation vector of a unit delta-gap across the central segment.

    The gap field ``voltage / segment_length`` is tested with the two
    rooftops overlapping the central segment, each receiving half.
    """
    v = np.zeros(dipole.basis_count, dtype=complex)
    centre = dipole.segments // 2  # index of the central segment
    v[centre - 1] = 0.5 * voltage
    v[centre] = 0.5 * voltage
    return v


def input_impedance(dipole: WireDipole, z: np.ndarray | None = None) -> complex:
    """Input impedance of a centre-fed dipole from a direct MoM solve."""
    if z is None:
        z = self_impedance(dipole)
    current = np.linalg.solve(z, delta_gap(dipole))
    return feed_impedance(dipole, current)


def feed_impedance(dipole: WireDipole, current: np.ndarray) -> complex:
    centre = dipole.segments // 2
    feed_current = 0.5 * (current[centre - 1] + current[centre])
    return 1.0 / feed_current
