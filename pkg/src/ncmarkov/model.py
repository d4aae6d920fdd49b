"""Interaction models with vacuum vectors and their colligations.

An interaction is a unitary ``U: H (x) K -> H (x) P`` with unit vectors
``omega_h, omega_k, omega_p`` such that ``U (omega_h (x) omega_k) =
omega_h (x) omega_p``. Product bases are H major: basis vector
``e_i (x) f_m`` has index ``i * dim_k + m`` (``i * dim_p + m`` on the output
side).

Coordinates used throughout:

* ``eps_1, ..., eps_d`` (``d = dim_p``) are the columns of
  ``frame.p_basis``; the canonical frame has ``eps_1 = omega_p``.
* The input space ``H (x) omega_k^perp`` has dimension ``dim_h * (dim_k - 1)``;
  coordinate ``i * (dim_k - 1) + (m - 1)`` belongs to ``e_i (x)`` column ``m``
  (0-based, ``m >= 1``) of ``frame.k_basis``.
* The output space ``omega_h (x) omega_p^perp`` has coordinate ``j - 1`` for
  ``eps_{j+1}`` (0-based ``j >= 1``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .config import DEFAULT
from .errors import InvalidModelError, ModelFormatError, ShapeError
from .linalg import as_matrix, as_vector, orthonormal_completion, unitarity_defect

__all__ = [
    "InteractionModel",
    "Violation",
    "validate",
    "BasisFrame",
    "canonical_frame",
    "kraus_operators",
    "Colligation",
    "ReducedColligation",
    "extract_colligation",
    "reduce_colligation",
    "colligation_of",
    "generate",
    "model_to_json",
    "model_from_json",
    "save_model",
    "load_model",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class InteractionModel:
    dim_h: int
    dim_k: int
    dim_p: int
    u: np.ndarray
    omega_h: np.ndarray
    omega_k: np.ndarray
    omega_p: np.ndarray

    def __post_init__(self):
        for name in ("dim_h", "dim_k", "dim_p"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ShapeError(f"{name} must be a positive integer, got {value!r}")
        if self.dim_k != self.dim_p:
            raise ShapeError(
                f"dim_k ({self.dim_k}) != dim_p ({self.dim_p}); a unitary needs equal dimensions"
            )
        u = as_matrix(self.u)
        shape = (self.dim_h * self.dim_p, self.dim_h * self.dim_k)
        if u.shape != shape:
            raise ShapeError(f"u has shape {u.shape}, expected {shape}")
        object.__setattr__(self, "u", _frozen(u))
        for name, dim in (("omega_h", self.dim_h), ("omega_k", self.dim_k), ("omega_p", self.dim_p)):
            v = as_vector(getattr(self, name))
            if v.shape != (dim,):
                raise ShapeError(f"{name} has length {v.shape[0]}, expected {dim}")
            object.__setattr__(self, name, _frozen(v))

    @property
    def d(self) -> int:
        return self.dim_p

    @property
    def dim_u(self) -> int:
        return self.dim_h * (self.dim_k - 1)

    @property
    def dim_y(self) -> int:
        return self.dim_p - 1

    def u4(self) -> np.ndarray:
        """``u`` as a tensor indexed ``[h_out, p, h_in, k]``."""
        return self.u.reshape(self.dim_h, self.dim_p, self.dim_h, self.dim_k)

    def vacuum_in(self) -> np.ndarray:
        return np.kron(self.omega_h, self.omega_k)

    def vacuum_out(self) -> np.ndarray:
        return np.kron(self.omega_h, self.omega_p)


class Violation(NamedTuple):
    name: str
    defect: float


def validate(model: InteractionModel, tol: float = DEFAULT.validation) -> list[Violation]:
    """List the interaction axioms violated by more than ``tol``.

    Checked: ``unitarity`` of ``u``, the ``vacuum_condition``
    ``u (omega_h (x) omega_k) = omega_h (x) omega_p`` and the unit norm of each
    vacuum vector. Shape errors are raised when the model is constructed.
    """
    found = []
    checks = [
        ("unitarity", unitarity_defect(model.u)),
        ("vacuum_condition", float(np.linalg.norm(model.u @ model.vacuum_in() - model.vacuum_out()))),
        ("omega_h_norm", abs(float(np.linalg.norm(model.omega_h)) - 1.0)),
        ("omega_k_norm", abs(float(np.linalg.norm(model.omega_k)) - 1.0)),
        ("omega_p_norm", abs(float(np.linalg.norm(model.omega_p)) - 1.0)),
    ]
    for name, defect in checks:
        if not defect <= tol:
            found.append(Violation(name, defect))
    return found


@dataclass(frozen=True, eq=False)
class BasisFrame:
    k_basis: np.ndarray
    p_basis: np.ndarray


def canonical_frame(model: InteractionModel) -> BasisFrame:
    """Householder frames whose first columns are ``omega_k`` and ``omega_p``."""
    return BasisFrame(
        k_basis=_frozen(orthonormal_completion(model.omega_k)),
        p_basis=_frozen(orthonormal_completion(model.omega_p)),
    )


def kraus_operators(model: InteractionModel, p_basis=None) -> np.ndarray:
    """The operators ``A_j`` with ``U (xi (x) omega_k) = sum_j A_j xi (x) eps_j``.

    ``p_basis`` may be any orthonormal basis of P (columns); by default the
    canonical one. Returns an array of shape ``(d, dim_h, dim_h)``.
    """
    if p_basis is None:
        p_basis = canonical_frame(model).p_basis
    t = np.einsum("apbk,pj,k->jab", model.u4(), np.conj(p_basis), model.omega_k)
    return t


@dataclass(frozen=True, eq=False)
class Colligation:
    """Blocks ``A_j`` (``a[j]``), ``B_j`` (``b[j]``), ``C`` and ``D``.

    ``a`` has shape ``(d, dim_h, dim_h)``, ``b`` shape ``(d, dim_h, dim_u)``,
    ``c`` shape ``(dim_y, dim_h)`` and ``dmat`` shape ``(dim_y, dim_u)``.
    """

    d: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    dmat: np.ndarray
    omega_h: np.ndarray

    @property
    def dim_h(self) -> int:
        return self.a.shape[1]

    @property
    def dim_u(self) -> int:
        return self.dmat.shape[1]

    @property
    def dim_y(self) -> int:
        return self.dmat.shape[0]

    def stacked(self) -> np.ndarray:
        """``[(A_j, B_j)]_j`` as one matrix from ``H + U`` to ``H^d``."""
        return np.concatenate([np.concatenate([self.a[j], self.b[j]], axis=1) for j in range(self.d)], axis=0)

    def full(self) -> np.ndarray:
        """The whole colligation including the ``(C, D)`` row."""
        return np.concatenate([self.stacked(), np.concatenate([self.c, self.dmat], axis=1)], axis=0)


@dataclass(frozen=True, eq=False)
class ReducedColligation(Colligation):
    """Colligation compressed to ``H0 = H minus span(omega_h)``.

    ``embedding`` is the ``dim_h x (dim_h - 1)`` isometry whose columns span
    ``H0``; ``a``, ``b``, ``c`` act on ``H0`` coordinates.
    """

    embedding: np.ndarray = None


def extract_colligation(model: InteractionModel, frame: BasisFrame | None = None,
                        tol: float = DEFAULT.validation) -> Colligation:
    """Read off ``A_j, B_j, C, D`` from ``u`` in the given frame.

    Raises
    ------
    InvalidModelError
        When the model fails :func:`validate`.
    """
    bad = validate(model, tol)
    if bad:
        raise InvalidModelError(bad)
    if frame is None:
        frame = canonical_frame(model)
    if not (np.allclose(frame.k_basis[:, 0], model.omega_k, rtol=0, atol=1e-12)
            and np.allclose(frame.p_basis[:, 0], model.omega_p, rtol=0, atol=1e-12)):
        raise ValueError("frame must have the vacuum vectors as first columns")
    h, k, d = model.dim_h, model.dim_k, model.dim_p
    # u in frame coordinates, indexed [h_out, j, h_in, m]
    t = np.einsum("apbk,pj,km->ajbm", model.u4(), np.conj(frame.p_basis), frame.k_basis)
    a = np.ascontiguousarray(t[:, :, :, 0].transpose(1, 0, 2))
    b = np.ascontiguousarray(t[:, :, :, 1:].transpose(1, 0, 2, 3).reshape(d, h, h * (k - 1)))
    proj = np.einsum("a,ajbm->jbm", np.conj(model.omega_h), t)
    c = np.ascontiguousarray(proj[1:, :, 0])
    dmat = np.ascontiguousarray(proj[1:, :, 1:].reshape(d - 1, h * (k - 1)))
    return Colligation(d=d, a=a, b=b, c=c, dmat=dmat, omega_h=np.array(model.omega_h))


def reduce_colligation(col: Colligation) -> ReducedColligation:
    """Compress to ``H0`` using columns 2.. of the completion of ``omega_h``.

    ``dim_h = 1`` gives zero-sized blocks, which is legal.
    """
    e = orthonormal_completion(col.omega_h)[:, 1:]
    eh = e.conj().T
    return ReducedColligation(
        d=col.d,
        a=np.einsum("xa,jab,by->jxy", eh, col.a, e),
        b=np.einsum("xa,jau->jxu", eh, col.b),
        c=col.c @ e,
        dmat=col.dmat.copy(),
        omega_h=col.omega_h,
        embedding=e,
    )


def colligation_of(model: InteractionModel, tol: float = DEFAULT.validation) -> tuple[Colligation, ReducedColligation]:
    col = extract_colligation(model, tol=tol)
    return col, reduce_colligation(col)


# -- generators -------------------------------------------------------------


def _basis(n: int) -> np.ndarray:
    e = np.zeros(n, dtype=complex)
    e[0] = 1.0
    return e


def _swap(n: int) -> np.ndarray:
    s = np.zeros((n * n, n * n))
    for i in range(n):
        for m in range(n):
            s[m * n + i, i * n + m] = 1.0
    return s


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def _random_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def generate(kind: str, dims: tuple[int, int, int], theta: float | None = None,
             seed: int | None = None) -> InteractionModel:
    """Build a test model.

    Parameters
    ----------
    kind : {"identity", "swap", "partial_swap", "random"}
        ``partial_swap`` is ``exp(-i theta) (cos(theta) I + i sin(theta) SWAP)``;
        ``random`` draws random vacua and a Haar unitary on the complement of
        the vacuum product, all from ``numpy.random.default_rng(seed)``.
    dims : (dim_h, dim_k, dim_p)
    """
    h, k, p = (int(x) for x in dims)
    if k != p:
        raise ShapeError(f"dim_k ({k}) must equal dim_p ({p})")
    if min(h, k) < 1:
        raise ShapeError("dimensions must be positive")
    if kind == "identity":
        return InteractionModel(h, k, p, np.eye(h * k), _basis(h), _basis(k), _basis(p))
    if kind in ("swap", "partial_swap"):
        if h != k:
            raise ShapeError(f"{kind} needs dim_h == dim_k, got {h} and {k}")
        if kind == "swap":
            u = _swap(h).astype(complex)
        else:
            if theta is None:
                raise ValueError("partial_swap needs theta")
            u = np.exp(-1j * theta) * (math.cos(theta) * np.eye(h * h) + 1j * math.sin(theta) * _swap(h))
        return InteractionModel(h, k, p, u, _basis(h), _basis(k), _basis(p))
    if kind == "random":
        rng = np.random.default_rng(seed)
        oh, ok, op = _random_unit(h, rng), _random_unit(k, rng), _random_unit(p, rng)
        w_in = orthonormal_completion(np.kron(oh, ok))
        w_out = orthonormal_completion(np.kron(oh, op))
        core = np.zeros((h * k, h * k), dtype=complex)
        core[0, 0] = 1.0
        core[1:, 1:] = _haar_unitary(h * k - 1, rng)
        return InteractionModel(h, k, p, w_out @ core @ w_in.conj().T, oh, ok, op)
    raise ValueError(f"unknown model kind {kind!r}")


# -- JSON file format -------------------------------------------------------


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _pairs(v: np.ndarray) -> str:
    return "[" + ", ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in np.ravel(v)) + "]"


def model_to_json(model: InteractionModel) -> str:
    """Serialize with 17 significant digits (bit-exact round trip)."""
    lines = [
        "{",
        f'  "dim_h": {model.dim_h},',
        f'  "dim_k": {model.dim_k},',
        f'  "dim_p": {model.dim_p},',
        f'  "omega_h": {_pairs(model.omega_h)},',
        f'  "omega_k": {_pairs(model.omega_k)},',
        f'  "omega_p": {_pairs(model.omega_p)},',
        f'  "u": {_pairs(model.u)}',
        "}",
    ]
    return "\n".join(lines) + "\n"


def _complex_array(obj, name: str, length: int) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != length:
        got = len(obj) if isinstance(obj, list) else type(obj).__name__
        raise ModelFormatError(f"{name}: expected {length} [re, im] pairs, got {got}")
    out = np.empty(length, dtype=complex)
    for i, pair in enumerate(obj):
        if not (isinstance(pair, list) and len(pair) == 2
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise ModelFormatError(f"{name}[{i}] is not a [re, im] pair of numbers")
        out[i] = complex(float(pair[0]), float(pair[1]))
    if not np.all(np.isfinite(out)):
        raise ModelFormatError(f"{name} has non-finite entries")
    return out


def model_from_json(text: str) -> InteractionModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelFormatError("model file must hold a JSON object")
    dims = {}
    for name in ("dim_h", "dim_k", "dim_p"):
        value = data.get(name)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ModelFormatError(f"{name} must be a positive integer, got {value!r}")
        dims[name] = value
    h, k, p = dims["dim_h"], dims["dim_k"], dims["dim_p"]
    if k != p:
        raise ModelFormatError(f"dimension mismatch: dim_k={k} != dim_p={p}")
    for name in ("omega_h", "omega_k", "omega_p", "u"):
        if name not in data:
            raise ModelFormatError(f"missing field {name!r}")
    u = _complex_array(data["u"], "u", h * p * h * k).reshape(h * p, h * k)
    try:
        return InteractionModel(
            h, k, p, u,
            _complex_array(data["omega_h"], "omega_h", h),
            _complex_array(data["omega_k"], "omega_k", k),
            _complex_array(data["omega_p"], "omega_p", p),
        )
    except (ShapeError, ValueError) as exc:
        raise ModelFormatError(str(exc)) from exc


def save_model(model: InteractionModel, path) -> None:
    Path(path).write_text(model_to_json(model))


def load_model(path) -> InteractionModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc}") from exc
    return model_from_json(text)
