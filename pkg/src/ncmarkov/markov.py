"""Transition operator and the diagnostics built on it.

``Z(X) = sum_j A_j* X A_j`` is the transition operator on ``B(H)`` and
``Phi0(X) = sum_j A0_j* X A0_j`` its analogue for the blocks compressed to
``H0``. Superoperators are stored as matrices acting on column-major
vectorizations: ``zhat @ vec(X) == vec(Z(X))`` with
``vec(X) = X.reshape(-1, order="F")``.

Four verdicts are computed independently and compared:

* ergodic: the fixed space of ``Z`` is one-dimensional (rank of ``zhat - I``);
* observable: the observability Gramian equals the identity on ``H0``;
* stable: ``Phi0^n(I) -> 0``, judged by a Gelfand-type radius estimate;
* inner: the partial sums of ``Theta(w)* Theta(w)`` approach the identity,
  checked only in the implied direction against the bound
  ``I - sum_{|w| <= N} Theta(w)* Theta(w) = sum_j B0_j* Phi0^N(I) B0_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import ShapeError
from .linalg import as_matrix, hermitian_eig, kernel_dimension, singular_values
from .model import Colligation, InteractionModel, ReducedColligation, colligation_of
from .transfer import inner_defect, series
from .words import word_count

__all__ = [
    "TransitionSuperoperator",
    "superoperator_matrix",
    "transition_superoperator",
    "transition_apply",
    "fixed_space_dim",
    "observability_gramian",
    "x_fixed_point",
    "phi_power",
    "stability_radius",
    "DiagnosticsReport",
    "diagnose",
]

MAX_INNER_WORDS = 10**6


def _vec(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1, order="F")


def _unvec(v: np.ndarray, n: int) -> np.ndarray:
    return v.reshape(n, n, order="F")


def superoperator_matrix(a: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> sum_j a[j]* X a[j]`` on column-major ``vec(X)``."""
    n = a.shape[1]
    m = np.zeros((n * n, n * n), dtype=complex)
    for aj in a:
        m += np.kron(aj.T, aj.conj().T)
    return m


@dataclass(frozen=True, eq=False)
class TransitionSuperoperator:
    dim_h: int
    zhat: np.ndarray


def transition_superoperator(col: Colligation) -> TransitionSuperoperator:
    return TransitionSuperoperator(col.dim_h, superoperator_matrix(col.a))


def transition_apply(col: Colligation, x) -> np.ndarray:
    """``Z(x) = sum_j A_j* x A_j``."""
    x = as_matrix(x)
    if x.shape != (col.dim_h, col.dim_h):
        raise ShapeError(f"x has shape {x.shape}, expected {(col.dim_h, col.dim_h)}")
    return np.einsum("jba,bc,jcd->ad", col.a.conj(), x, col.a)


def fixed_space_dim(sup: TransitionSuperoperator, tol: float = DEFAULT.rank) -> int:
    """Dimension of ``{X : Z(X) = X}``; the chain is ergodic iff this is 1."""
    n2 = sup.zhat.shape[0]
    return kernel_dimension(sup.zhat - np.eye(n2), tol)


def _monotone_limit(step, start: np.ndarray, tol: float, max_iter: int):
    cur = start
    for it in range(1, max_iter + 1):
        nxt = step(cur)
        if np.linalg.norm(nxt - cur) < tol:
            return nxt, True, it
        cur = nxt
    return cur, False, max_iter


def observability_gramian(red: ReducedColligation, tol: float = DEFAULT.iteration,
                          max_iter: int = DEFAULT.max_iter) -> tuple[np.ndarray, bool]:
    """Limit of ``G <- C0* C0 + Phi0(G)`` from ``G = 0``.

    ``<xi, G xi> = sum_w ||C0 A0_w xi||^2`` is the squared norm of the
    observability operator. Returns the last iterate and whether the
    increments fell below ``tol`` within ``max_iter`` steps.
    """
    n = red.dim_h
    if n == 0:
        return np.zeros((0, 0), dtype=complex), True
    phi = superoperator_matrix(red.a)
    cc = _vec(red.c.conj().T @ red.c)
    g, ok, _ = _monotone_limit(lambda v: cc + phi @ v, np.zeros(n * n, dtype=complex), tol, max_iter)
    g = _unvec(g, n)
    return 0.5 * (g + g.conj().T), ok


def x_fixed_point(col: Colligation, tol: float = DEFAULT.iteration,
                  max_iter: int = DEFAULT.max_iter) -> tuple[np.ndarray, bool]:
    """Limit of ``Z^n(p)``, ``p`` the projection onto ``omega_h``.

    The sequence is increasing and bounded by the identity; its limit is the
    identity exactly when ``Z`` is ergodic.
    """
    n = col.dim_h
    zhat = superoperator_matrix(col.a)
    p = np.outer(col.omega_h, col.omega_h.conj())
    x, ok, _ = _monotone_limit(lambda v: zhat @ v, _vec(p), tol, max_iter)
    x = _unvec(x, n)
    return 0.5 * (x + x.conj().T), ok


def phi_power(red: ReducedColligation, n: int) -> np.ndarray:
    """``Phi0^n(I) = sum_{|w| = n} A0_w* A0_w`` by binary powering."""
    k = red.dim_h
    if k == 0:
        return np.zeros((0, 0), dtype=complex)
    base = superoperator_matrix(red.a)
    acc = np.eye(k * k, dtype=complex)
    while n > 0:
        if n & 1:
            acc = base @ acc
        base = base @ base
        n >>= 1
    return _unvec(acc @ _vec(np.eye(k, dtype=complex)), k)


def _psd_norm(x: np.ndarray) -> float:
    if x.shape[0] == 0:
        return 0.0
    w, _ = hermitian_eig(0.5 * (x + x.conj().T))
    return float(np.max(np.abs(w)))


def stability_radius(red: ReducedColligation, n_max: int = DEFAULT.stability_n_max) -> float:
    """Estimate ``lim ||Phi0^n(I)||^(1/n)`` from ``n = 2, 4, ..., <= n_max``.

    The superoperator matrix is squared repeatedly; the value for the largest
    power of two not exceeding ``n_max`` is returned. Zero for empty ``H0``.
    """
    if n_max < 4:
        raise ValueError("n_max must be at least 4")
    k = red.dim_h
    if k == 0:
        return 0.0
    m = superoperator_matrix(red.a)
    eye = _vec(np.eye(k, dtype=complex))
    n, r = 1, 0.0
    while 2 * n <= n_max:
        m = m @ m
        n *= 2
        norm = _psd_norm(_unvec(m @ eye, k))
        r = norm ** (1.0 / n) if norm > 0 else 0.0
    return float(r)


@dataclass
class DiagnosticsReport:
    fixed_space_dim: int
    ergodic: bool
    gramian: np.ndarray
    gramian_defect: float
    observable: bool
    stability_radius_estimate: float
    stable: bool
    inner_defects: list[tuple[int, float]]
    consistent: bool
    xfixed: np.ndarray
    indeterminate: bool = False
    converged: bool = True
    gramian_min_eigenvalue: float = 1.0
    gramian_x_defect: float = 0.0
    tail_bounds: list[tuple[int, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

        return {
            "fixed_space_dim": self.fixed_space_dim,
            "ergodic": self.ergodic,
            "gramian": mat(self.gramian),
            "gramian_defect": self.gramian_defect,
            "observable": self.observable,
            "stability_radius_estimate": self.stability_radius_estimate,
            "stable": self.stable,
            "inner_defects": [[n, v] for n, v in self.inner_defects],
            "consistent": self.consistent,
            "xfixed": mat(self.xfixed),
            "indeterminate": self.indeterminate,
            "converged": self.converged,
            "gramian_min_eigenvalue": self.gramian_min_eigenvalue,
            "gramian_x_defect": self.gramian_x_defect,
            "tail_bounds": [[n, v] for n, v in self.tail_bounds],
            "notes": list(self.notes),
        }

    def to_table(self) -> str:
        rows = [
            ("fixed_space_dim", self.fixed_space_dim),
            ("ergodic", self.ergodic),
            ("gramian_defect", f"{self.gramian_defect:.3e}"),
            ("gramian_min_eigenvalue", f"{self.gramian_min_eigenvalue:.6g}"),
            ("observable", self.observable),
            ("stability_radius_estimate", f"{self.stability_radius_estimate:.9f}"),
            ("stable", self.stable),
            ("gramian_x_defect", f"{self.gramian_x_defect:.3e}"),
        ]
        for (n, v), (_, t) in zip(self.inner_defects, self.tail_bounds):
            rows.append((f"inner_defect[N={n}]", f"{v:.3e}  (tail bound {t:.3e})"))
        rows += [
            ("converged", self.converged),
            ("indeterminate", self.indeterminate),
            ("consistent", self.consistent),
        ]
        width = max(len(k) for k, _ in rows)
        lines = [f"{k.ljust(width)}  {v}" for k, v in rows]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


def diagnose(model: InteractionModel, tol: Tolerances = DEFAULT,
             inner_lengths: tuple[int, ...] = (2, 4, 8)) -> DiagnosticsReport:
    """Compute every verdict and check that they agree.

    Verdicts inside their gray zones (see :class:`~ncmarkov.config.Tolerances`)
    mark the report ``indeterminate`` instead of being trusted.
    """
    col, red = colligation_of(model)
    notes: list[str] = []
    gray = False

    sup = transition_superoperator(col)
    shifted = sup.zhat - np.eye(sup.zhat.shape[0])
    fdim = fixed_space_dim(sup, tol.rank)
    ergodic = fdim == 1
    sv = singular_values(shifted)
    scale = sv[0] if sv.size and sv[0] > tol.rank else 1.0
    if np.any((sv > tol.ergodic_gray * scale) & (sv <= tol.verdict * scale)):
        gray = True
        notes.append("zhat - I has singular values between the rank and verdict thresholds")

    g, g_ok = observability_gramian(red, tol.iteration, tol.max_iter)
    x, x_ok = x_fixed_point(col, tol.iteration, tol.max_iter)
    converged = g_ok and x_ok
    if not converged:
        gray = True
        notes.append("fixed point iteration did not converge")
    k = red.dim_h
    if k == 0:
        g_defect, g_min = 0.0, 1.0
    else:
        w, _ = hermitian_eig(np.eye(k) - g)
        g_defect = float(np.max(np.abs(w)))
        g_min = float(1.0 - w[-1])
    observable = g_defect <= tol.verdict
    if tol.verdict < g_defect <= tol.observable_gray:
        gray = True
        notes.append("gramian defect lies between the verdict and gray thresholds")
    gx_defect = float(np.linalg.norm(red.embedding.conj().T @ x @ red.embedding - g)) if k else 0.0

    radius = stability_radius(red, tol.stability_n_max)
    stable = radius < 1.0 - tol.verdict
    if not stable and radius < 1.0 - tol.unstable_edge:
        gray = True
        notes.append("stability radius estimate is close to 1")

    lengths = [n for n in inner_lengths if word_count(col.d, n) <= MAX_INNER_WORDS]
    defects, bounds = [], []
    if lengths:
        ser = series(col, max(lengths))
        for n in lengths:
            defects.append((n, inner_defect(ser, n)))
            bounds.append((n, _psd_norm(phi_power(red, n))))

    consistent = ergodic == observable == stable and gx_defect <= tol.verdict
    if ergodic and observable and stable and model.dim_p >= 2:
        vals = [v for _, v in defects]
        if any(b > a + tol.arithmetic for a, b in zip(vals, vals[1:])):
            consistent = False
            notes.append("inner defect increases with N")
        if any(v > t + 1e-9 for (_, v), (_, t) in zip(defects, bounds)):
            consistent = False
            notes.append("inner defect exceeds the tail bound")
    elif not (ergodic or observable or stable) and defects and defects[-1][1] > tol.verdict:
        notes.append(f"not inner: inner defect {defects[-1][1]:.3g} at N={defects[-1][0]}")

    return DiagnosticsReport(
        fixed_space_dim=fdim,
        ergodic=ergodic,
        gramian=g,
        gramian_defect=g_defect,
        observable=observable,
        stability_radius_estimate=radius,
        stable=stable,
        inner_defects=defects,
        consistent=consistent,
        xfixed=x,
        indeterminate=gray,
        converged=converged,
        gramian_min_eigenvalue=g_min,
        gramian_x_defect=gx_defect,
        tail_bounds=bounds,
        notes=notes,
    )
