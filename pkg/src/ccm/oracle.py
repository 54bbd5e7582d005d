"""Brute-force reference: the full coupled eigenproblem and mode matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cma import ModeSet, modes_from_gep
from .coupled import CoupledResult
from .errors import AmbiguousMatch, DimensionMismatch
from .linalg import SymMatrix
from .mom import BlockImpedance

MIN_COSINE = 0.5


@dataclass(frozen=True)
class ModeMatch:
    pairs: tuple
    eig_rel_err: np.ndarray
    current_similarity: np.ndarray

    def __len__(self):
        return len(self.pairs)


def full_coupled_modes(blocks: BlockImpedance, k: int | None = None, check: bool = True,
                       shifts=None) -> ModeSet:
    """Dominant ``k`` modes of the dense coupled system (all of them by default).

    ``shifts`` gives a diagonal regularization per element; the shifted R is
    then solved without further regularization.
    """
    z = blocks.full()
    k = z.shape[0] if k is None else k
    r = z.real
    reg = None
    if shifts is not None:
        r = r + np.diag(np.repeat(np.asarray(shifts, float), blocks.sizes))
        reg = 0.0
    return modes_from_gep(SymMatrix(r), SymMatrix(z.imag), k, check, reg)


def r_cosines(a: np.ndarray, b: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``|a_i' R b_j| / sqrt(a_i' R a_i * b_j' R b_j)`` for all column pairs."""
    ra = np.einsum("ij,ij->j", a, r @ a)
    rb = np.einsum("ij,ij->j", b, r @ b)
    cos = np.abs(a.T @ r @ b) / np.sqrt(np.outer(ra, rb))
    return np.clip(cos, 0.0, 1.0)


def match_modes(subspace: CoupledResult, full: ModeSet, blocks: BlockImpedance) -> ModeMatch:
    """Pair every subspace mode with a distinct full-space mode.

    Greedy on the largest |cosine| in the (shifted) R inner product; equal
    cosines go to the closer eigenvalue.  Raises AmbiguousMatch, carrying the
    completed matching, when some subspace mode has best cosine below 0.5.
    """
    i_sub = subspace.currents_c
    if i_sub.shape[0] != full.n:
        raise DimensionMismatch(
            f"subspace currents have {i_sub.shape[0]} rows, full modes {full.n}"
        )
    r = _shifted_r(blocks, subspace) + full.shift * np.eye(full.n)
    cos = r_cosines(i_sub, full.currents, r)
    lam_s = subspace.lambdas_c[:, None]
    lam_f = full.lambdas[None, :]
    gap = np.abs(lam_s - lam_f) / np.maximum(np.abs(lam_f), np.finfo(float).tiny)

    taken_s, taken_f = set(), set()
    pairs = []
    # candidates in order of cosine, then eigenvalue proximity
    flat = np.lexsort((gap.ravel(), -cos.ravel()))
    for idx in flat:
        s, f = divmod(int(idx), cos.shape[1])
        if s in taken_s or f in taken_f:
            continue
        pairs.append((s, f))
        taken_s.add(s)
        taken_f.add(f)
        if len(pairs) == min(cos.shape):
            break
    pairs.sort()
    err = np.array([gap[s, f] for s, f in pairs])
    sim = np.array([cos[s, f] for s, f in pairs])
    match = ModeMatch(tuple(pairs), err, sim)
    weak = [s for (s, _), c in zip(pairs, sim) if c < MIN_COSINE]
    if weak:
        raise AmbiguousMatch(
            f"subspace modes {weak} have no full-space partner with |cosine| >= {MIN_COSINE}",
            match=match,
        )
    return match


def _shifted_r(blocks: BlockImpedance, coupled: CoupledResult) -> np.ndarray:
    shifts = [m.shift for m in coupled.uncoupled]
    return blocks.full().real + np.diag(np.repeat(shifts, blocks.sizes))


def compare(coupled: CoupledResult, blocks: BlockImpedance, strict: bool = False):
    """Match a coupled result against the full solve of the same regularized system.

    Returns ``(match, full_modes)``.  Weak matches are returned rather than
    raised unless ``strict``.
    """
    shifts = [m.shift for m in coupled.uncoupled]
    full = full_coupled_modes(blocks, check=False, shifts=shifts if any(shifts) else None)
    try:
        return match_modes(coupled, full, blocks), full
    except AmbiguousMatch as exc:
        if strict:
            raise
        return exc.match, full
