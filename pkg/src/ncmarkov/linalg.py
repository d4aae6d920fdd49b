"""Dense complex linear algebra kernel.

Matrices are numpy ``complex128`` arrays. Eigenvalues of Hermitian matrices
come from a cyclic Jacobi method and singular values from one-sided (Hestenes)
Jacobi, both using round-robin ordering so that each round applies ``n // 2``
disjoint rotations as a single vectorized update.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

__all__ = [
    "as_matrix",
    "as_vector",
    "tensor_product",
    "unitarity_defect",
    "orthonormal_completion",
    "hermitian_eig",
    "singular_values",
    "kernel_dimension",
    "op_norm",
    "min_eigenvalue",
]

_EPS = np.finfo(float).eps
_MAX_SWEEPS = 80
# one-sided Jacobi treats columns as orthogonal below this cosine
_ORTH = 4 * _EPS


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1:
        raise ShapeError(f"expected a vector, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product, left factor major.

    Row ``i * rows(b) + k`` and column ``j * cols(b) + l`` of the result hold
    ``a[i, j] * b[k, l]``.
    """
    return np.kron(as_matrix(a), as_matrix(b))


def unitarity_defect(m) -> float:
    """Return ``max(||m* m - I||_F, ||m m* - I||_F)``."""
    m = as_matrix(m)
    n, k = m.shape
    if n != k:
        raise ShapeError(f"unitarity defect needs a square matrix, got {m.shape}")
    eye = np.eye(n)
    mh = m.conj().T
    return float(max(np.linalg.norm(mh @ m - eye), np.linalg.norm(m @ mh - eye)))


def orthonormal_completion(v, tol: float = 1e-8) -> np.ndarray:
    """Unitary matrix whose first column is ``v``.

    The vector is rotated by a global phase so that its first entry is real
    and nonnegative, mapped from ``e_1`` by a Householder reflector, and the
    phase is restored. The result is deterministic in ``v``.

    Parameters
    ----------
    v : array_like
        Vector with norm within ``tol`` of one.
    """
    v = as_vector(v)
    n = v.shape[0]
    norm = np.linalg.norm(v)
    if n == 0 or norm < 0.5:
        raise ValueError("cannot complete a near-zero vector to a basis")
    if abs(norm - 1.0) > tol:
        raise ValueError(f"vector norm {norm} is not within {tol} of 1")
    v = v / norm
    pivot = v[0]
    phase = pivot / abs(pivot) if abs(pivot) > 0 else 1.0
    u = v / phase
    w = -u
    w[0] += 1.0
    wn2 = float(np.real(np.vdot(w, w)))
    q = np.eye(n, dtype=complex)
    if wn2 > 0.0:
        q -= (2.0 / wn2) * np.outer(w, w.conj())
    q *= phase
    q[:, 0] = v
    return q


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings covering every index pair exactly once in ``n - 1`` rounds."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _rotations(app, aqq, apq):
    """Jacobi rotations annihilating the (p, q) entries of 2x2 Hermitian blocks.

    Returns ``c`` (real) and ``sp = s * phase`` such that the unitary
    ``[[c, sp], [-conj(sp), c]]`` diagonalizes ``[[app, apq], [conj(apq), aqq]]``.
    """
    r = np.abs(apq)
    active = r > 0.0
    safe = np.where(active, r, 1.0)
    phase = np.where(active, apq / safe, 1.0)
    tau = (aqq - app) / (2.0 * safe)
    sgn = np.where(tau >= 0.0, 1.0, -1.0)
    t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    c = np.where(active, c, 1.0)
    s = np.where(active, s, 0.0)
    return c, s * phase


def hermitian_eig(m, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi.

    Returns
    -------
    eigenvalues : ndarray
        Real, ascending.
    eigenvectors : ndarray
        Unitary matrix ``V`` with ``m @ V ~= V @ diag(eigenvalues)``.
    """
    m = as_matrix(m)
    n, k = m.shape
    if n != k:
        raise ShapeError(f"hermitian_eig needs a square matrix, got {m.shape}")
    fro = np.linalg.norm(m)
    if np.linalg.norm(m - m.conj().T) > tol * fro:
        raise ValueError("matrix is not Hermitian within tolerance")
    a = 0.5 * (m + m.conj().T)
    v = np.eye(n, dtype=complex)
    if n <= 1 or fro == 0.0:
        return np.real(np.diag(a)).copy(), v
    rounds = _round_robin(n)
    target = _EPS * fro
    for _ in range(_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p, q in rounds:
            c, sp = _rotations(np.real(a[p, p]), np.real(a[q, q]), a[p, q])
            cs = np.conj(sp)
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = ap * c - aq * cs
            a[:, q] = ap * sp + aq * c
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - sp[:, None] * rq
            a[q, :] = cs[:, None] * rp + c[:, None] * rq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c - vq * cs
            v[:, q] = vp * sp + vq * c
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def singular_values(m) -> np.ndarray:
    """Singular values in descending order (one-sided Jacobi).

    Columns of ``m`` (or of ``m*`` when that is the narrower side) are
    orthogonalized by plane rotations, which diagonalizes ``m* m`` implicitly;
    the singular values are the final column norms. Working on ``m`` itself
    keeps exact zeros at rounding level instead of ``sqrt(eps)``.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    x = m.conj().T.copy() if cols > rows else m.copy()
    n = x.shape[1]
    if n == 0:
        return np.zeros(0)
    if n > 1:
        rounds = _round_robin(n)
        for _ in range(_MAX_SWEEPS):
            worst = 0.0
            for p, q in rounds:
                xp, xq = x[:, p], x[:, q]
                alpha = np.sum(np.abs(xp) ** 2, axis=0)
                beta = np.sum(np.abs(xq) ** 2, axis=0)
                gamma = np.sum(xp.conj() * xq, axis=0)
                scale = np.sqrt(alpha * beta)
                rel = np.where(scale > 0.0, np.abs(gamma) / np.where(scale > 0, scale, 1.0), 0.0)
                if rel.size:
                    worst = max(worst, float(rel.max()))
                gamma = np.where(rel > _ORTH, gamma, 0.0)
                c, sp = _rotations(alpha, beta, gamma)
                cs = np.conj(sp)
                xp, xq = xp.copy(), xq.copy()
                x[:, p] = xp * c - xq * cs
                x[:, q] = xp * sp + xq * c
            if worst <= _ORTH:
                break
    s = np.linalg.norm(x, axis=0)
    return np.sort(s)[::-1]


def kernel_dimension(m, tol: float = 1e-9) -> int:
    """Number of columns minus numerical rank.

    A singular value counts as zero when it is at most ``tol`` times the
    largest singular value, or ``tol`` in absolute terms when every singular
    value is below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    s = singular_values(m)
    if s.size == 0:
        return m.shape[1]
    scale = s[0] if s[0] > tol else 1.0
    return int(m.shape[1] - np.count_nonzero(s > tol * scale))


def op_norm(m) -> float:
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a Hermitian matrix (``inf`` for empty input)."""
    m = as_matrix(m)
    if m.shape[0] == 0:
        return float("inf")
    return float(hermitian_eig(m)[0][0])
