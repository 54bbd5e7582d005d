"""Coupled characteristic modes of multi-element arrays by subspace projection.

The isolated dominant currents of every element span a reduced space.  The
coupled impedance matrix is projected onto it, giving block modal power
matrices ``P_Rc`` and ``P_Xc``; their generalized eigenvectors form the modal
coupling matrix ``M`` and the coupled currents are ``I_uc @ M``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .cma import ModeSet
from .errors import DimensionMismatch, ZeroColumn
from .linalg import SymMatrix, congruence, generalized_eig
from .mom import BlockImpedance

DISPLAY_PEAK = 1000.0
PAIR_THRESHOLD = 1e-4
TIE_TOL = 1e-6
BLOCK_ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class BlockPower:
    block_sizes: tuple
    p_rc: SymMatrix
    p_xc: SymMatrix

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(int)

    def block(self, which: str, i: int, j: int) -> np.ndarray:
        m = (self.p_rc if which == "R" else self.p_xc).entries
        o = self.offsets
        return m[o[i]:o[i + 1], o[j]:o[j + 1]]

    def check(self) -> None:
        for which, mat in (("R", self.p_rc), ("X", self.p_xc)):
            scale = mat.norm()
            for i in range(len(self.block_sizes)):
                b = self.block(which, i, i)
                off = np.abs(b - np.diag(np.diag(b)))
                if off.size and off.max() > BLOCK_ORTHO_TOL * scale:
                    raise AssertionError(
                        f"diagonal block {i} of P_{which}c is not diagonal "
                        f"(off-diagonal {off.max():.2e}, norm {scale:.2e})"
                    )


@dataclass(frozen=True)
class CouplingMatrix:
    block_sizes: tuple
    m: np.ndarray
    display_m: np.ndarray

    def labels(self) -> list[str]:
        """Row labels A1, A2, ..., B1, ... (element letter, mode number)."""
        return [
            f"{element_letter(i)}{n + 1}"
            for i, size in enumerate(self.block_sizes)
            for n in range(size)
        ]


@dataclass(frozen=True)
class CoupledResult:
    lambdas_c: np.ndarray
    coupling: CouplingMatrix
    currents_c: np.ndarray
    association: tuple
    uncoupled: tuple
    power: BlockPower

    @property
    def k(self) -> int:
        return len(self.lambdas_c)

    def column_labels(self) -> list[str]:
        """A1, B1, ... : associated element and rank within its group."""
        seen: dict = {}
        out = []
        for a in self.association:
            seen[a] = seen.get(a, 0) + 1
            out.append(f"{element_letter(a)}{seen[a]}")
        return out

    def group(self, element: int) -> np.ndarray:
        """Indices of coupled modes associated with ``element``, dominant first."""
        return np.array([j for j, a in enumerate(self.association) if a == element], dtype=int)


def element_letter(i: int) -> str:
    letters = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        letters = chr(ord("A") + r) + letters
    return letters


def uncoupled_currents(isolated) -> np.ndarray:
    """Block-diagonal matrix of isolated eigencurrents."""
    return sla.block_diag(*[m.currents for m in isolated])


def block_power(isolated, blocks: BlockImpedance) -> BlockPower:
    """Project the coupled array onto the isolated modes of its elements.

    Each diagonal block of R carries the regularization shift its element was
    solved with, so the diagonal blocks of ``P_Rc`` reproduce the isolated
    radiated powers.
    """
    isolated = tuple(isolated)
    if len(isolated) != blocks.n_elements:
        raise DimensionMismatch(
            f"{len(isolated)} mode sets for {blocks.n_elements} elements"
        )
    for i, (modes, size) in enumerate(zip(isolated, blocks.sizes)):
        if modes.n != size:
            raise DimensionMismatch(
                f"element {i}: modes have {modes.n} rows, impedance block is {size}"
            )
    z = blocks.full()
    shifts = np.concatenate([np.full(m.n, m.shift) for m in isolated])
    r = z.real + np.diag(shifts)
    v = uncoupled_currents(isolated)
    bp = BlockPower(
        block_sizes=tuple(m.k for m in isolated),
        p_rc=congruence(v, r),
        p_xc=congruence(v, z.imag),
    )
    bp.check()
    return bp


def select_coupled_pairs(bp: BlockPower, threshold: float = PAIR_THRESHOLD) -> list:
    """Mode pairs of distinct elements with non-negligible modal coupling.

    Returns ``(i, a, j, b)`` for mode ``a`` of element ``i`` and mode ``b``
    of element ``j`` (``i < j``), where ``max(|P_R|, |P_X|)`` reaches
    ``threshold`` times the largest such value in that block.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    pairs = []
    n = len(bp.block_sizes)
    for i in range(n):
        for j in range(i + 1, n):
            mag = np.maximum(np.abs(bp.block("R", i, j)), np.abs(bp.block("X", i, j)))
            peak = mag.max() if mag.size else 0.0
            if peak <= 0:
                continue
            for a, b in zip(*np.nonzero(mag >= threshold * peak)):
                pairs.append((i, int(a), j, int(b)))
    return pairs


def normalize_display(m, block_sizes=None) -> np.ndarray:
    """Scale each column so its peak entry is exactly +1000.

    When several entries share the peak magnitude (to one part in 1e9) the
    first of them is made positive, so even/odd pairs read ``1000 ... -1000``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if block_sizes is not None and sum(block_sizes) != m.shape[0]:
        raise DimensionMismatch(f"block sizes {block_sizes} do not cover {m.shape[0]} rows")
    out = np.empty_like(m)
    for j, col in enumerate(m.T):
        mag = np.abs(col)
        peak = mag.max()
        if not peak > 0:
            raise ZeroColumn(f"column {j} of the coupling matrix is zero")
        pivot = int(np.flatnonzero(mag >= peak * (1 - 1e-9))[0])
        out[:, j] = col * (DISPLAY_PEAK / (peak * np.sign(col[pivot])))
        out[np.argmax(mag), j] = np.copysign(DISPLAY_PEAK, out[np.argmax(mag), j])
    return out


def associate(m, block_sizes, lambdas_c, isolated, tie_tol: float = TIE_TOL) -> list:
    """Element index dominating each column of ``m``.

    A column belongs to the element whose block holds its largest entry.
    Blocks whose peaks agree to ``tie_tol`` are tied; tied columns sharing
    the same dominant isolated mode are split in order of |lambda_c|, the
    smaller eigenvalue going to the element with the smaller isolated
    |lambda| (then the lower index).
    """
    m = np.asarray(m, dtype=float)
    off = np.concatenate([[0], np.cumsum(block_sizes)]).astype(int)
    n_el = len(block_sizes)
    labels = [None] * m.shape[1]
    groups: dict = {}
    for j, col in enumerate(m.T):
        peaks = np.array([np.abs(col[off[i]:off[i + 1]]).max() if block_sizes[i] else 0.0
                          for i in range(n_el)])
        top = peaks.max()
        tied = [i for i in range(n_el) if peaks[i] >= top * (1 - tie_tol)]
        # rank tied blocks by the isolated |lambda| at their peak entry
        keyed = []
        for i in tied:
            local = int(np.argmax(np.abs(col[off[i]:off[i + 1]])))
            keyed.append((abs(isolated[i].lambdas[local]), i, local))
        keyed.sort()
        if len(keyed) == 1:
            labels[j] = keyed[0][1]
            continue
        key = (tuple(sorted(tied)), keyed[0][2])
        groups.setdefault(key, []).append((j, [i for _, i, _ in keyed]))
    for members in groups.values():
        members.sort(key=lambda t: (abs(lambdas_c[t[0]]), lambdas_c[t[0]]))
        for rank, (j, order) in enumerate(members):
            labels[j] = order[rank % len(order)]
    return labels


def _definite(m: SymMatrix) -> bool:
    return bool(m.eigvalsh()[0] > 0)


def column_order(lambdas_c, association) -> list:
    """Order columns by rank inside their association group, then by |lambda|.

    Yields A1, B1, A2, B2, ... for two elements, each pair sorted by |lambda|.
    """
    lam = np.abs(np.asarray(lambdas_c))
    rank = {}
    for element in set(association):
        idx = [j for j, a in enumerate(association) if a == element]
        for r, j in enumerate(sorted(idx, key=lambda j: (lam[j], j))):
            rank[j] = r
    return sorted(range(len(lam)), key=lambda j: (rank[j], lam[j], association[j]))


def couple_n(isolated, blocks: BlockImpedance, tie_tol: float = TIE_TOL) -> CoupledResult:
    """Coupled modes of an N-element array from the isolated mode sets."""
    isolated = tuple(isolated)
    if len(isolated) < 2:
        raise ValueError("coupling needs at least two elements")
    bp = block_power(isolated, blocks)
    bp.p_rc.check_psd(what="projected radiation matrix P_Rc")
    # P_Rc already carries the elements' shifts: solve it as it stands
    g = generalized_eig(bp.p_xc, bp.p_rc, regularization=0.0 if _definite(bp.p_rc) else None)
    assoc = associate(g.vectors, bp.block_sizes, g.lambdas, isolated, tie_tol)
    order = column_order(g.lambdas, assoc)
    m = g.vectors[:, order]
    lambdas_c = g.lambdas[order]
    assoc = tuple(assoc[j] for j in order)
    coupling = CouplingMatrix(bp.block_sizes, m, normalize_display(m, bp.block_sizes))
    return CoupledResult(
        lambdas_c=lambdas_c,
        coupling=coupling,
        currents_c=uncoupled_currents(isolated) @ m,
        association=assoc,
        uncoupled=isolated,
        power=bp,
    )


def couple_two(a: ModeSet, b: ModeSet, blocks: BlockImpedance, tie_tol: float = TIE_TOL) -> CoupledResult:
    """Two-element coupling; identical to ``couple_n([a, b], blocks)``."""
    if blocks.n_elements != 2:
        raise DimensionMismatch(f"expected 2 elements, got {blocks.n_elements}")
    return couple_n((a, b), blocks, tie_tol)


def perturbation(coupled: CoupledResult) -> list:
    """``(element, mode, |lambda_c - lambda_isolated|)`` per coupled mode.

    Coupled modes are matched by rank within their association group to
    the isolated modes of that element.  Ranks beyond the element's
    retained count have no partner and report NaN.
    """
    out = []
    for element, modes in enumerate(coupled.uncoupled):
        idx = coupled.group(element)
        idx = idx[np.argsort(np.abs(coupled.lambdas_c[idx]), kind="stable")]
        for rank, j in enumerate(idx):
            iso = modes.lambdas[rank] if rank < modes.k else np.nan
            out.append((element, rank, float(abs(coupled.lambdas_c[j] - iso))))
    return out


def projected_residual(coupled: CoupledResult, blocks: BlockImpedance) -> np.ndarray:
    """Full-space residual of each coupled mode, projected onto the isolated subspace.

    Scaled by ``(|P_Xc| + |lambda| |P_Rc|) * |m_col|``.
    """
    z = blocks.full()
    shifts = np.concatenate([np.full(m.n, m.shift) for m in coupled.uncoupled])
    v = uncoupled_currents(coupled.uncoupled)
    i_c = coupled.currents_c
    res = v.T @ (z.imag @ i_c - (z.real @ i_c + shifts[:, None] * i_c) * coupled.lambdas_c)
    bp = coupled.power
    scale = (bp.p_xc.norm() + np.abs(coupled.lambdas_c) * bp.p_rc.norm())
    return np.linalg.norm(res, axis=0) / (scale * np.linalg.norm(coupled.coupling.m, axis=0))
