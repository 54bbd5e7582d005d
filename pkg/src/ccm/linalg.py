"""Dense symmetric linear algebra and the symmetric-definite eigensolver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceFailure, DimensionMismatch, NotPositiveSemidefinite

RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-8
CONDITION_LIMIT = 1e12
PSD_TOL = 1e-12
# modes whose radiated power is below this multiple of the shift (1e-4 of
# the mean diagonal of R) are re-solved as one Rayleigh-Ritz block
_RESOLVED_FACTOR = 1e8


class SymMatrix:
    """Immutable real symmetric matrix.

    Symmetry is enforced on construction by averaging with the transpose,
    which makes ``entries[i, j] == entries[j, i]`` hold bit for bit.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise DimensionMismatch("empty matrix")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._a = a

    @classmethod
    def of(cls, m) -> "SymMatrix":
        return m if isinstance(m, cls) else cls(m)

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._a

    @property
    def shape(self):
        return self._a.shape

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __repr__(self):
        return f"SymMatrix(n={self.n})"

    def __eq__(self, other):
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._a, other._a)

    __hash__ = None

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self._a))

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._a)

    def shifted(self, delta: float) -> "SymMatrix":
        return self if not delta else SymMatrix(self._a + delta * np.eye(self.n))

    def check_psd(self, rel_tol: float = PSD_TOL, what: str = "matrix") -> None:
        lo = self.eigvalsh()[0]
        if lo < -rel_tol * self.norm():
            raise NotPositiveSemidefinite(
                f"{what} has eigenvalue {lo:.3e} below -{rel_tol:g}*||.||_F"
            )


@dataclass(frozen=True)
class GepResult:
    """Eigenpairs of ``X v = lambda R v``.

    ``vectors`` has unit-norm columns.  When R had to be regularized,
    ``regularization`` holds the diagonal shift and ``rnorms`` are taken
    against the shifted matrix, so that ``v' X v == lambda * rnorm``.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    rnorms: np.ndarray
    regularization: float = 0.0

    def __len__(self):
        return len(self.lambdas)


def congruence(V, A) -> SymMatrix:
    """``V.T @ A @ V``, re-symmetrized."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    A = SymMatrix.of(A)
    if V.shape[0] != A.n:
        raise DimensionMismatch(f"V has {V.shape[0]} rows, A is {A.n}x{A.n}")
    return SymMatrix(V.T @ A.entries @ V)


def quadratic_forms(V, A) -> np.ndarray:
    """Column-wise ``v' A v``; each value depends on its own column only."""
    V = np.asarray(V, dtype=np.float64)
    A = SymMatrix.of(A)
    if V.shape[0] != A.n:
        raise DimensionMismatch(f"V has {V.shape[0]} rows, A is {A.n}x{A.n}")
    return np.array([v @ (A.entries @ v) for v in V.T])


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Scale columns so each largest-magnitude entry is positive."""
    vectors = np.array(vectors, dtype=np.float64)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _first_nonzero(v: np.ndarray) -> float:
    nz = np.flatnonzero(np.abs(v) > 1e-14 * np.max(np.abs(v)))
    return float(v[nz[0]]) if nz.size else 0.0


def dominance_order(lambdas: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Ascending |lambda|, then signed lambda, then first nonzero entry."""
    first = np.array([_first_nonzero(v) for v in vectors.T])
    return np.lexsort((first, lambdas, np.abs(lambdas)))


def generalized_eig(X, R, regularization: float | None = None) -> GepResult:
    """All eigenpairs of ``X v = lambda R v`` for symmetric X and PSD R.

    Well-conditioned R (condition number at most 1e12) is Cholesky-factored
    and the problem reduced to a standard symmetric one.  Otherwise R is
    replaced by ``R + delta*I`` (``delta`` defaults to ``1e-12*trace(R)/n``;
    an explicit 0 is allowed for positive definite R) and the inverse pencil ``L' X^-1 L`` is diagonalized instead, which keeps
    the small-|lambda| pairs accurate; pairs with radiated power at the level
    of the shift are then re-solved together by Rayleigh-Ritz.  The shift is
    recorded on the result.
    """
    X = SymMatrix.of(X)
    R = SymMatrix.of(R)
    if X.n != R.n:
        raise DimensionMismatch(f"X is {X.n}x{X.n} but R is {R.n}x{R.n}")
    n = R.n
    r_eigs, r_vecs = np.linalg.eigh(R.entries)
    if r_eigs[0] < -PSD_TOL * R.norm():
        raise NotPositiveSemidefinite(
            f"R has eigenvalue {r_eigs[0]:.3e} below -{PSD_TOL:g}*||R||_F"
        )
    floor = PSD_TOL * np.trace(R.entries) / n
    if not floor > 0:
        floor = PSD_TOL * max(R.norm(), np.finfo(float).tiny)
    shift = floor if regularization is None else float(regularization)
    if shift < 0:
        raise ValueError("regularization must be nonnegative")
    if shift == 0 and not r_eigs[0] > 0:
        raise NotPositiveSemidefinite("regularization 0 requires a positive definite R")

    if r_eigs[0] > 0 and r_eigs[-1] <= CONDITION_LIMIT * r_eigs[0]:
        try:
            lambdas, vectors = _cholesky_solve(X.entries, R.entries)
            shift = 0.0
        except np.linalg.LinAlgError:
            if shift == 0:
                raise ConvergenceFailure("Cholesky factorization of R failed")
            lambdas, vectors = _regularized_solve(X.entries, R.entries, r_eigs, r_vecs, shift, floor)
    else:
        lambdas, vectors = _regularized_solve(X.entries, R.entries, r_eigs, r_vecs, shift, floor)

    vectors = fix_signs(vectors / np.linalg.norm(vectors, axis=0))
    r_eff = R.shifted(shift)
    rnorms = quadratic_forms(vectors, r_eff)
    if shift:
        # Rayleigh quotients, consistent with the reported powers
        lambdas = quadratic_forms(vectors, X) / rnorms
    order = dominance_order(lambdas, vectors)
    lambdas, vectors, rnorms = lambdas[order], vectors[:, order], rnorms[order]
    return GepResult(lambdas, vectors, rnorms, shift)


def _cholesky_solve(x, r):
    try:
        return sla.eigh(x, r, driver="gv")
    except (sla.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError(str(exc)) from exc


def _regularized_solve(x, r, r_eigs, r_vecs, shift, floor):
    n = x.shape[0]
    r_eff = r + shift * np.eye(n)
    factor = r_vecs * np.sqrt(np.maximum(r_eigs, 0.0) + shift)
    try:
        lu = sla.lu_factor(x, check_finite=True)
        x_cond = np.linalg.cond(x)
    except (sla.LinAlgError, ValueError):
        x_cond = np.inf
    if not np.isfinite(x_cond) or x_cond > CONDITION_LIMIT:
        # X too close to singular for the inverse pencil
        try:
            return _cholesky_solve(x, r_eff)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc

    xinv_l = sla.lu_solve(lu, factor)
    h = factor.T @ xinv_l
    try:
        _, y = np.linalg.eigh(0.5 * (h + h.T))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc
    v = xinv_l @ y
    v /= np.linalg.norm(v, axis=0)

    rn = np.einsum("ij,ij->j", v, r_eff @ v)
    resolved = rn > _RESOLVED_FACTOR * floor
    v_res = v[:, resolved]
    lam_res = np.einsum("ij,ij->j", v_res, x @ v_res) / rn[resolved]
    if resolved.all():
        return lam_res, v_res

    # Rayleigh-Ritz on the complement, made R_eff-orthogonal to the resolved modes
    rest = v[:, ~resolved]
    rest = rest - v_res @ ((v_res.T @ r_eff @ rest) / rn[resolved][:, None])
    basis, _ = np.linalg.qr(rest)
    # R_eff restricted to the block as a Gram matrix of the spectral factor,
    # positive definite by construction
    _, tri = np.linalg.qr(factor.T @ basis)
    xb = basis.T @ x @ basis
    tinv = sla.solve_triangular(tri, np.eye(tri.shape[0]))
    std = tinv.T @ xb @ tinv
    try:
        lam_rest, c = np.linalg.eigh(0.5 * (std + std.T))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"Rayleigh-Ritz block solve failed: {exc}") from exc
    return np.concatenate([lam_res, lam_rest]), np.hstack([v_res, basis @ (tinv @ c)])


def residuals(X, R, result: GepResult) -> np.ndarray:
    """Scaled residuals ``|X v - lambda R v| / (|X|_F + |lambda| |R|_F)``."""
    X = SymMatrix.of(X)
    R = SymMatrix.of(R)
    v = result.vectors
    res = np.linalg.norm(X.entries @ v - R.entries @ v * result.lambdas, axis=0)
    return res / (X.norm() + np.abs(result.lambdas) * R.norm())


def offdiagonal(m: np.ndarray, scale: str = "pairwise") -> float:
    """Largest off-diagonal magnitude of ``m`` relative to its diagonal.

    ``pairwise`` divides entry (i, j) by ``sqrt(|m_ii m_jj|)``; ``norm``
    divides every entry by the Frobenius norm of ``m``.
    """
    m = np.asarray(m, dtype=float)
    if m.shape[0] < 2:
        return 0.0
    off = np.abs(m - np.diag(np.diag(m)))
    if scale == "norm":
        return float(off.max() / max(np.linalg.norm(m), np.finfo(float).tiny))
    d = np.sqrt(np.abs(np.diag(m)))
    denom = np.outer(d, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(off == 0, 0.0, off / denom)
    return float(np.nanmax(rel))
