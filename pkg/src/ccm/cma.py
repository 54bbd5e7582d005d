"""Characteristic modes of a single body in a retained eigen-subspace."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, KTooLarge, SingularModalPower
from .linalg import SymMatrix, congruence, generalized_eig, quadratic_forms

IDENTITY_TOL = 1e-8
ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class ModeSet:
    """Retained characteristic modes, dominant first.

    ``p_r`` and ``p_x`` are the diagonals of the modal power matrices
    ``I' R I`` and ``I' X I``.  ``shift`` is the diagonal regularization
    that was added to R before solving (0 when none was needed); the
    powers are measured against the shifted matrix.
    """

    lambdas: np.ndarray
    currents: np.ndarray
    p_r: np.ndarray
    p_x: np.ndarray
    shift: float = 0.0

    def __post_init__(self):
        for name in ("lambdas", "currents", "p_r", "p_x"):
            a = np.array(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        k = len(self.lambdas)
        if self.currents.ndim != 2 or self.currents.shape[1] != k:
            raise DimensionMismatch(f"currents shape {self.currents.shape} for {k} modes")
        if self.p_r.shape != (k,) or self.p_x.shape != (k,):
            raise DimensionMismatch("modal power vectors must have one entry per mode")

    @property
    def k(self) -> int:
        return len(self.lambdas)

    @property
    def n(self) -> int:
        return self.currents.shape[0]

    def select(self, indices) -> "ModeSet":
        """Subset of modes, e.g. ``select([1])`` keeps only the second mode."""
        idx = np.asarray(indices, dtype=int)
        if idx.ndim != 1 or idx.size == 0 or idx.min() < 0 or idx.max() >= self.k:
            raise KTooLarge(f"mode indices {list(idx)} outside 0..{self.k - 1}")
        return ModeSet(self.lambdas[idx], self.currents[:, idx], self.p_r[idx],
                       self.p_x[idx], self.shift)

    def violations(self, R) -> list[str]:
        """Invariant breaches of this set with respect to radiation matrix R."""
        out = []
        lam = np.abs(self.lambdas)
        if np.any(np.diff(lam) < 0):
            out.append("|lambda| not nondecreasing")
        if np.any(self.p_r <= 0):
            out.append(f"nonpositive radiated power at modes {np.flatnonzero(self.p_r <= 0).tolist()}")
        gap = np.abs(self.p_x - self.lambdas * self.p_r)
        scale = np.maximum(np.abs(self.p_x), np.abs(self.lambdas * self.p_r))
        bad = np.flatnonzero(gap > IDENTITY_TOL * scale)
        if bad.size:
            out.append(f"p_x != lambda*p_r at modes {bad.tolist()}")
        defect = self.orthogonality_defect(R)
        if defect >= ORTHO_TOL:
            out.append(f"R-orthogonality defect {defect:.2e}")
        return out

    def orthogonality_defect(self, R) -> float:
        """Max of |I_i' R I_j| / sqrt(p_r[i] p_r[j]) over i != j."""
        if self.k < 2:
            return 0.0
        R = SymMatrix.of(R)
        p = congruence(self.currents, R.shifted(self.shift)).entries
        off = np.abs(p - np.diag(np.diag(p)))
        d = np.sqrt(np.abs(self.p_r))
        return float(np.max(off / np.outer(d, d)))


@dataclass(frozen=True)
class ModalSolution:
    alpha: np.ndarray
    excitation: np.ndarray
    current: np.ndarray


def modes_from_gep(R, X, k: int, check: bool = True, regularization=None) -> ModeSet:
    R = SymMatrix.of(R)
    X = SymMatrix.of(X)
    if not 1 <= k <= R.n:
        raise KTooLarge(f"k={k} outside 1..{R.n}")
    g = generalized_eig(X, R, regularization)
    v = g.vectors[:, :k]
    p_r = quadratic_forms(v, R.shifted(g.regularization))
    p_x = quadratic_forms(v, X)
    modes = ModeSet(g.lambdas[:k], v, p_r, p_x, g.regularization)
    if check:
        problems = modes.violations(R)
        if problems:
            raise AssertionError("mode set invariants violated: " + "; ".join(problems))
    return modes


def isolated_modes(R, X, k: int, check: bool = True) -> ModeSet:
    """The ``k`` dominant characteristic modes of ``X I = lambda R I``.

    With ``check`` the set's invariants are asserted.  Pass ``check=False``
    to obtain the full spectrum of a numerically rank-deficient R, whose
    trailing modes cannot be made R-orthogonal in double precision.
    """
    return modes_from_gep(R, X, k, check)


def modal_excitation(modes: ModeSet, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (modes.n,):
        raise DimensionMismatch(f"excitation has shape {v.shape}, expected ({modes.n},)")
    return modes.currents.T @ v


def modal_solve(modes: ModeSet, v) -> ModalSolution:
    """Modal-superposition solution of ``Z I = V`` in the retained subspace."""
    if np.any(modes.p_r <= 0):
        bad = np.flatnonzero(modes.p_r <= 0).tolist()
        raise SingularModalPower(f"radiated power is not positive for modes {bad}")
    e = modal_excitation(modes, v)
    alpha = e / (modes.p_r * (1.0 + 1j * modes.lambdas))
    return ModalSolution(alpha=alpha, excitation=e, current=modes.currents @ alpha)
