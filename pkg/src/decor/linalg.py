"""Dense linear algebra kernels: thin SVD, Gram-Schmidt, and small matrix utilities.

Everything here operates on plain 2-D float64 numpy arrays. Inputs are
validated once at the boundary (`as_matrix`); all downstream arithmetic
assumes finite, well-shaped data. Sizes are small (at most a few hundred
rows/columns), so the implementations favor accuracy and determinism over
raw throughput.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: A singular value sigma_i counts toward the effective rank when
#: sigma_i > RANK_RTOL * sigma_1.
RANK_RTOL = 1e-10

#: Jacobi sweep cap and convergence threshold. A row pair is converged when
#: |a_p . a_q| <= JACOBI_REL_TOL * |a_p| |a_q|, which also bounds every Gram
#: off-diagonal by JACOBI_REL_TOL * ||m||_F^2. Rows whose norm falls below
#: JACOBI_DEAD_TOL * ||m||_F are numerically zero: their singular value is 0
#: and their right-vector direction is filled by basis completion.
JACOBI_MAX_SWEEPS = 60
JACOBI_REL_TOL = 1e-13
JACOBI_DEAD_TOL = 1e-14


def as_matrix(values, *, name: str = "matrix") -> np.ndarray:
    """Validate and convert input to a non-empty, finite, C-order float64 2-D array."""
    m = np.array(values, dtype=np.float64, order="C", copy=True)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {m.ndim}-D")
    if m.size == 0:
        raise ValueError(f"{name} must be non-empty, got shape {m.shape}")
    finite = np.isfinite(m)
    if not finite.all():
        i, j = np.argwhere(~finite)[0]
        raise ValueError(f"{name} entry ({i}, {j}) is not finite: {m[i, j]!r}")
    return m


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SvdFactorization:
    """Thin SVD m = u @ diag(sigma) @ v.T with k = min(rows, cols) columns.

    Columns of `u` and `v` are orthonormal; `sigma` is sorted descending with
    ties kept in original order. Arrays are read-only so factorizations can be
    shared freely across threads.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.sigma.ndim != 1:
            raise ValueError("sigma must be 1-D")
        k = self.sigma.shape[0]
        if self.u.shape[1] != k or self.v.shape[1] != k:
            raise ValueError(
                f"factor shapes disagree: u {self.u.shape}, v {self.v.shape}, k={k}"
            )
        if np.any(self.sigma < 0) or np.any(np.diff(self.sigma) > 0):
            raise ValueError("sigma must be non-negative and sorted descending")
        _freeze(self.u), _freeze(self.sigma), _freeze(self.v)

    @property
    def k(self) -> int:
        return self.sigma.shape[0]

    @property
    def effective_rank(self) -> int:
        """Number of singular values above RANK_RTOL * sigma_1."""
        if self.k == 0 or self.sigma[0] == 0.0:
            return 0
        return int(np.count_nonzero(self.sigma > RANK_RTOL * self.sigma[0]))


@lru_cache(maxsize=None)
def _round_robin_pairs(n: int) -> tuple:
    """Rounds of disjoint index pairs covering all (p, q), p < q < n (circle method)."""
    if n < 2:
        return ()
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p >= 0 and q >= 0:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps), np.array(qs)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _complete_basis(v: np.ndarray, dead: np.ndarray) -> None:
    """Fill columns `dead` of v with unit vectors orthogonal to the live columns.

    For each column the best coordinate-vector residual is used; its norm is
    at least 1/sqrt(d) whenever the complement is non-empty, which it is for
    a thin factorization.
    """
    d = v.shape[0]
    for i in dead:
        best, best_norm = None, -1.0
        for j in range(d):
            cand = np.zeros(d)
            cand[j] = 1.0
            for _ in range(2):
                cand -= v @ (v.T @ cand)
            norm = float(np.linalg.norm(cand))
            if norm > best_norm:
                best, best_norm = cand, norm
            if norm > 0.9:
                break
        v[:, i] = best / best_norm


def thin_svd(m) -> SvdFactorization:
    """One-sided Jacobi thin SVD.

    Rows of the short side are orthogonalized by plane rotations applied in
    round-robin batches of disjoint pairs; the rotations are accumulated to
    recover u. A pair rotates while its normalized overlap exceeds
    JACOBI_REL_TOL, capped at JACOBI_MAX_SWEEPS sweeps. The sign of each v
    column is fixed so its largest-magnitude entry is positive, making the
    factorization deterministic.
    """
    a = as_matrix(m)
    swapped = a.shape[0] > a.shape[1]
    if swapped:
        a = np.ascontiguousarray(a.T)
    rows, cols = a.shape
    # prescale so squared norms cannot overflow for extreme inputs
    amax = float(np.max(np.abs(a)))
    if amax > 0.0:
        a /= amax
    w = np.eye(rows)
    fro2 = float(np.einsum("ij,ij->", a, a))
    dead2 = (JACOBI_DEAD_TOL**2) * fro2
    if fro2 > 0.0 and rows > 1:
        for _ in range(JACOBI_MAX_SWEEPS):
            gram = a @ a.T
            norms2 = np.diag(gram).copy()
            np.fill_diagonal(gram, 0.0)
            alive = norms2 > dead2
            denom = np.maximum(norms2, dead2)
            overlap = np.abs(gram) / np.sqrt(np.outer(denom, denom))
            overlap[~alive, :] = 0.0
            overlap[:, ~alive] = 0.0
            if overlap.max() <= JACOBI_REL_TOL:
                break
            for pp, qq in _round_robin_pairs(rows):
                ap, aq = a[pp], a[qq]
                apq = np.einsum("ij,ij->i", ap, aq)
                app = np.einsum("ij,ij->i", ap, ap)
                aqq = np.einsum("ij,ij->i", aq, aq)
                live = (apq**2 > (JACOBI_REL_TOL**2) * app * aqq) & (
                    np.minimum(app, aqq) > dead2
                )
                if not np.any(live):
                    continue
                theta = 0.5 * np.arctan2(2.0 * apq, app - aqq)
                c = np.where(live, np.cos(theta), 1.0)[:, None]
                s = np.where(live, np.sin(theta), 0.0)[:, None]
                a[pp] = c * ap + s * aq
                a[qq] = c * aq - s * ap
                wp, wq = w[pp], w[qq]
                w[pp] = c * wp + s * wq
                w[qq] = c * wq - s * wp

    sigma = np.sqrt(np.einsum("ij,ij->i", a, a))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    u = w[order].T
    v = np.zeros((cols, rows))
    live = sigma > JACOBI_DEAD_TOL * np.sqrt(fro2)
    if np.any(live):
        v[:, live] = (a[order[live]] / sigma[live, None]).T
    sigma[~live] = 0.0
    _complete_basis(v, np.nonzero(~live)[0])
    sigma *= amax

    if swapped:
        u, v = v, u

    # deterministic sign: dominant entry of each v column made positive
    jmax = np.argmax(np.abs(v), axis=0)
    flip = v[jmax, np.arange(v.shape[1])] < 0
    v[:, flip] *= -1.0
    u[:, flip] *= -1.0
    return SvdFactorization(u=u, sigma=sigma, v=v)


def gram_schmidt_basis(m, tol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) for the row space of m.

    Modified Gram-Schmidt with a second re-orthogonalization pass per row.
    A row is dropped when its residual norm after orthogonalization falls
    below tol times the largest row norm; if every row is dropped the result
    has zero columns, which callers treat as an empty subspace.
    """
    a = as_matrix(m)
    d = a.shape[1]
    scale = float(np.max(np.linalg.norm(a, axis=1)))
    if scale == 0.0:
        return np.zeros((d, 0))
    threshold = tol * scale
    basis: list[np.ndarray] = []
    for row in a:
        vec = row.copy()
        for _ in range(2):
            for b in basis:
                vec -= (vec @ b) * b
        norm = float(np.linalg.norm(vec))
        if norm >= threshold:
            basis.append(vec / norm)
    if not basis:
        return np.zeros((d, 0))
    return np.column_stack(basis)


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, name="left operand")
    b = as_matrix(b, name="right operand")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def frobenius_norm(m) -> float:
    m = np.asarray(m, dtype=np.float64)
    return float(np.sqrt(np.einsum("ij,ij->", m, m)))


def row_cosine(a, b) -> np.ndarray:
    """Cosine between corresponding rows of a and b; zero-norm rows give 0."""
    a = as_matrix(a, name="left operand")
    b = as_matrix(b, name="right operand")
    if a.shape != b.shape:
        raise ValueError(f"row_cosine needs equal shapes, got {a.shape} and {b.shape}")
    dots = np.einsum("ij,ij->i", a, b)
    denom = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    out = np.zeros(a.shape[0])
    mask = denom > 0.0
    out[mask] = dots[mask] / denom[mask]
    return out
