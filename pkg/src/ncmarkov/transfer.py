"""Transfer function coefficients and the word-indexed linear system.

For a stored word ``w = (a1, ..., an)`` (time order, see :mod:`ncmarkov.words`)
the transfer coefficient is ``D`` for the empty word and
``C A_an ... A_a2 B_a1`` otherwise. The state recursion is

    x(w + (j,)) = A_j x(w) + B_j u(w),    y(w) = C x(w) + D u(w),

and with ``x(()) = 0`` the output is the word convolution
``y(c) = sum_{c = b + a} coefficient(a) u(b)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardError, ShapeError
from .linalg import as_vector, hermitian_eig
from .model import Colligation
from .words import Word, WordIndex, check_word, word_text

__all__ = [
    "TransferSeries",
    "SignalSequence",
    "coefficient",
    "series",
    "io_map",
    "toeplitz",
    "inner_defect",
    "partial_gram",
    "record_probability",
    "coefficient_rows",
    "probability_rows",
]

MAX_TOEPLITZ_ENTRIES = 5 * 10**7


@dataclass(frozen=True, eq=False)
class TransferSeries:
    """Coefficients for all words of length ``<= max_len``.

    ``coeffs[i]`` is the ``dim_y x dim_u`` coefficient of the word with index
    ``i`` in ``index``.
    """

    index: WordIndex
    coeffs: np.ndarray

    @property
    def d(self) -> int:
        return self.index.d

    @property
    def max_len(self) -> int:
        return self.index.max_len

    @property
    def dim_y(self) -> int:
        return self.coeffs.shape[1]

    @property
    def dim_u(self) -> int:
        return self.coeffs.shape[2]

    def __getitem__(self, w: Word) -> np.ndarray:
        return self.coeffs[self.index.word_to_index(tuple(w))]

    def items(self):
        return zip(self.index.words(), self.coeffs)


@dataclass(frozen=True, eq=False)
class SignalSequence:
    """One vector per word of length ``<= max_len`` (rows of ``values``)."""

    index: WordIndex
    values: np.ndarray

    @classmethod
    def zeros(cls, d: int, max_len: int, dim: int) -> "SignalSequence":
        idx = WordIndex(d, max_len)
        return cls(idx, np.zeros((idx.total, dim), dtype=complex))

    @classmethod
    def impulse(cls, d: int, max_len: int, vector) -> "SignalSequence":
        """Signal equal to ``vector`` at the empty word and zero elsewhere."""
        v = as_vector(vector)
        s = cls.zeros(d, max_len, v.shape[0])
        s.values[0] = v
        return s

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, w: Word) -> np.ndarray:
        return self.values[self.index.word_to_index(tuple(w))]


def coefficient(col: Colligation, w: Word) -> np.ndarray:
    w = check_word(w, col.d)
    if not w:
        return col.dmat.copy()
    r = col.b[w[0] - 1]
    for a in w[1:]:
        r = col.a[a - 1] @ r
    return col.c @ r


def series(col: Colligation, max_len: int) -> TransferSeries:
    """All coefficients up to ``max_len``, one level of the word tree at a time.

    The running products ``A_an ... A_a2 B_a1`` of a level are kept as one
    stacked array; extending every word by every letter is a single batched
    multiply, so the cost is one small matrix product per word.
    """
    idx = WordIndex(col.d, max_len)
    out = np.empty((idx.total, col.dim_y, col.dim_u), dtype=complex)
    out[0] = col.dmat
    if max_len == 0:
        return TransferSeries(idx, out)
    run = col.b.copy()  # words of length 1, shape (d, h, u)
    for n in range(1, max_len + 1):
        lv = idx.level(n)
        out[lv.start:lv.stop] = np.einsum("ya,wau->wyu", col.c, run)
        if n < max_len:
            run = np.einsum("jab,wbu->wjau", col.a, run).reshape(run.shape[0] * col.d, col.dim_h, col.dim_u)
    return TransferSeries(idx, out)


def io_map(col: Colligation, u: SignalSequence, x0=None) -> tuple[SignalSequence, SignalSequence]:
    """Run the state recursion over all words of ``u.index``.

    Returns the state family ``x`` and the output family ``y``. ``x0``
    defaults to zero.
    """
    if u.dim != col.dim_u:
        raise ShapeError(f"input dimension {u.dim} != {col.dim_u}")
    if u.index.d != col.d:
        raise ShapeError(f"input alphabet {u.index.d} != {col.d}")
    idx = u.index
    x = np.zeros((idx.total, col.dim_h), dtype=complex)
    if x0 is not None:
        x0 = as_vector(x0)
        if x0.shape != (col.dim_h,):
            raise ShapeError(f"x0 has length {x0.shape[0]}, expected {col.dim_h}")
        x[0] = x0
    for n in range(idx.max_len):
        cur, nxt = idx.level(n), idx.level(n + 1)
        xs, us = x[cur.start:cur.stop], u.values[cur.start:cur.stop]
        step = np.einsum("jab,wb->wja", col.a, xs) + np.einsum("jau,wu->wja", col.b, us)
        x[nxt.start:nxt.stop] = step.reshape(-1, col.dim_h)
    y = x @ col.c.T + u.values @ col.dmat.T
    return SignalSequence(idx, x), SignalSequence(idx, y)


def toeplitz(ser: TransferSeries, n: int) -> np.ndarray:
    """Truncation of the multi-analytic operator to words of length ``<= n``.

    Block ``(c, b)`` is ``coefficient(a)`` when ``c = b + a`` and zero
    otherwise; rows and columns follow :class:`WordIndex` order.
    """
    if n > ser.max_len:
        raise ValueError(f"n={n} exceeds the series length {ser.max_len}")
    idx = WordIndex(ser.d, n)
    y, u = ser.dim_y, ser.dim_u
    if (idx.total * y) * (idx.total * u) > MAX_TOEPLITZ_ENTRIES:
        raise GuardError(f"toeplitz matrix for n={n} is too large")
    words = idx.words()
    m = np.zeros((idx.total * y, idx.total * u), dtype=complex)
    for bi, b in enumerate(words):
        for a in words:
            if len(a) + len(b) > n:
                break
            ci = idx.word_to_index(b + a)
            m[ci * y:(ci + 1) * y, bi * u:(bi + 1) * u] = ser[a]
    return m


def partial_gram(ser: TransferSeries, n: int) -> np.ndarray:
    """``sum_{|w| <= n} coefficient(w)* coefficient(w)``."""
    if n > ser.max_len:
        raise ValueError(f"n={n} exceeds the series length {ser.max_len}")
    stop = ser.index.offset(n + 1)
    c = ser.coeffs[:stop]
    return np.einsum("wyu,wyv->uv", c.conj(), c)


def inner_defect(ser: TransferSeries, n: int) -> float:
    """Operator norm of ``I - partial_gram(n)`` on the input space."""
    g = partial_gram(ser, n)
    if g.shape[0] == 0:
        return 0.0
    w, _ = hermitian_eig(np.eye(g.shape[0]) - g)
    return float(np.max(np.abs(w)))


def record_probability(ser: TransferSeries, eta, w: Word) -> float:
    """``||coefficient(w) eta||^2``: probability of the detection record ``w``."""
    eta = as_vector(eta)
    if eta.shape != (ser.dim_u,):
        raise ShapeError(f"eta has length {eta.shape[0]}, expected {ser.dim_u}")
    amp = ser[w] @ eta
    return float(np.real(np.vdot(amp, amp)))


def coefficient_rows(ser: TransferSeries):
    """CSV rows ``(word, row, col, re, im, inner_defect)``; the last column is
    the inner defect of the partial sum up to the word's length."""
    defects = [inner_defect(ser, n) for n in range(ser.max_len + 1)]
    for w, c in ser.items():
        for i in range(c.shape[0]):
            for j in range(c.shape[1]):
                z = c[i, j]
                yield word_text(w), i, j, float(z.real), float(z.imag), defects[len(w)]


def probability_rows(ser: TransferSeries, eta):
    eta = as_vector(eta)
    for w, c in ser.items():
        amp = c @ eta
        yield word_text(w), float(np.real(np.vdot(amp, amp)))
