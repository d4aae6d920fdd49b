"""Dense simulation of the repeated interaction on ``H (x) K^(x)n``.

A chain state is a tensor of shape ``(dim_h, dim_k, ..., dim_k)``: the H
index first, then slot 1, slot 2, ... . Flattened in C order this gives the
index ``i_H * k^n + sum_l i_l * k^(n - l)``. Slots beyond the stored ones are
implicitly in the vacuum ``omega_k``. After ``evolve(..., n)`` slots
``1..n`` hold P coordinates (raw basis of P), later slots still K
coordinates.

The simulation is the brute-force counterpart of :mod:`ncmarkov.transfer`:
projecting the evolved state onto measurement records reproduces the
transfer coefficients applied to the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError, ShapeError
from .linalg import as_vector, orthonormal_completion
from .model import InteractionModel, canonical_frame
from .words import Word, WordIndex, word_text

__all__ = [
    "MAX_AMPLITUDES",
    "ChainState",
    "RecordDistribution",
    "embed",
    "vacuum_state",
    "evolve",
    "w_apply",
    "w_apply_vacuum_tail",
    "record_distribution",
    "v_apply",
    "ScatteringReport",
    "scattering_axioms_check",
]

MAX_AMPLITUDES = 10**7
_FREE_SLOT_TOL = 1e-10


def _check_size(dim_h: int, dim_k: int, n_slots: int) -> None:
    size = dim_h * dim_k**n_slots
    if size > MAX_AMPLITUDES:
        raise GuardError(f"{size} amplitudes for {n_slots} slots exceed {MAX_AMPLITUDES}")


@dataclass(frozen=True, eq=False)
class ChainState:
    """Amplitudes of a vector in ``H (x) K_1 (x) ... (x) K_n``."""

    n_slots: int
    tensor: np.ndarray

    @property
    def amplitudes(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def inner(self, other: "ChainState") -> complex:
        """``<self, other>``, conjugate linear in ``self``."""
        return complex(np.vdot(self.tensor, other.tensor))


def embed(model: InteractionModel, xi, eta_slots=(), n_slots: int | None = None) -> ChainState:
    """``xi (x) eta_1 (x) ... (x) eta_m (x) omega_k (x) ...`` on ``n_slots`` slots.

    ``n_slots`` defaults to the number of given slot vectors.
    """
    xi = as_vector(xi)
    if xi.shape != (model.dim_h,):
        raise ShapeError(f"xi has length {xi.shape[0]}, expected {model.dim_h}")
    etas = [as_vector(e) for e in eta_slots]
    if n_slots is None:
        n_slots = len(etas)
    if len(etas) > n_slots:
        raise ValueError(f"{len(etas)} slot vectors given for {n_slots} slots")
    for e in etas:
        if e.shape != (model.dim_k,):
            raise ShapeError(f"slot vector has length {e.shape[0]}, expected {model.dim_k}")
    _check_size(model.dim_h, model.dim_k, n_slots)
    t = xi
    for e in etas + [np.asarray(model.omega_k, dtype=complex)] * (n_slots - len(etas)):
        t = np.multiply.outer(t, e)
    return ChainState(n_slots, np.array(t, dtype=complex))


def vacuum_state(model: InteractionModel, n_slots: int) -> ChainState:
    return embed(model, model.omega_h, (), n_slots)


def _apply_at(u4: np.ndarray, t: np.ndarray, slot: int) -> np.ndarray:
    """Contract a ``[h_out, out, h_in, in]`` tensor with the (H, slot) pair."""
    out = np.tensordot(u4, t, axes=([2, 3], [0, slot]))
    return np.moveaxis(out, 1, slot)


def evolve(model: InteractionModel, state: ChainState, n: int) -> ChainState:
    """Apply ``U`` to (H, slot 1), then (H, slot 2), ..., up to slot ``n``."""
    if not 0 <= n <= state.n_slots:
        raise ValueError(f"cannot evolve {n} steps on {state.n_slots} slots")
    u4 = model.u4()
    t = state.tensor
    for slot in range(1, n + 1):
        t = _apply_at(u4, t, slot)
    return ChainState(state.n_slots, t)


def _contract_tail(model: InteractionModel, t: np.ndarray, keep: int) -> np.ndarray:
    """Project H onto ``omega_h`` and slots after ``keep`` onto ``omega_k``."""
    t = np.tensordot(np.conj(model.omega_h), t, axes=(0, 0))
    for _ in range(t.ndim - keep):
        t = np.tensordot(t, np.conj(model.omega_k), axes=(t.ndim - 1, 0))
    return t


def w_apply(model: InteractionModel, state: ChainState, n: int) -> np.ndarray:
    """``Q_n U(n) state``: a vector of ``P^(x)n`` (flattened, slot 1 major).

    The H factor and every slot after ``n`` are paired with their vacuum.
    """
    t = evolve(model, state, n).tensor
    return np.asarray(_contract_tail(model, t, n)).reshape(-1)


def w_apply_vacuum_tail(model: InteractionModel, xi, n: int) -> dict[tuple[int, ...], complex]:
    """``Q_n U(n) (xi (x) vacuum)`` with sparse storage.

    Only nonzero amplitudes are kept, keyed by the tuple of raw P indices of
    slots ``1..n``. Each step feeds a fresh vacuum slot, so models whose
    vacua are basis vectors and whose dynamics conserve a quantity (such as
    partial swaps) stay small far beyond the dense limit. The amplitude
    count is still bounded by :data:`MAX_AMPLITUDES`.
    """
    xi = as_vector(xi)
    if xi.shape != (model.dim_h,):
        raise ShapeError(f"xi has length {xi.shape[0]}, expected {model.dim_h}")
    # step[a, p, b]: U (e_b (x) omega_k) in coordinates e_a (x) f_p
    step = np.tensordot(model.u4(), model.omega_k, axes=(3, 0))
    h, p = model.dim_h, model.dim_p
    state: dict[tuple[int, ...], complex] = {(b,): complex(xi[b]) for b in range(h) if xi[b] != 0}
    for _ in range(n):
        nxt: dict[tuple[int, ...], complex] = {}
        for key, amp in state.items():
            col = step[:, :, key[0]]
            rest = key[1:]
            for a in range(h):
                for q in range(p):
                    z = col[a, q]
                    if z != 0:
                        k2 = (a,) + rest + (q,)
                        nxt[k2] = nxt.get(k2, 0j) + amp * z
        if len(nxt) > MAX_AMPLITUDES:
            raise GuardError(f"{len(nxt)} nonzero amplitudes exceed {MAX_AMPLITUDES}")
        state = nxt
    out: dict[tuple[int, ...], complex] = {}
    wh = np.conj(model.omega_h)
    for key, amp in state.items():
        z = wh[key[0]] * amp
        if z != 0:
            out[key[1:]] = out.get(key[1:], 0j) + z
    return out


@dataclass(frozen=True, eq=False)
class RecordDistribution:
    """Probabilities of complete detection records of length ``<= max_len``.

    ``amplitudes[i]`` is the ``dim_y`` vector of the record with index ``i``
    in ``index``; ``residual`` is the input mass not resolved into a complete
    record within the simulated slots.
    """

    index: WordIndex
    amplitudes: np.ndarray
    probabilities: np.ndarray
    residual: float

    def __getitem__(self, w: Word) -> float:
        return float(self.probabilities[self.index.word_to_index(tuple(w))])

    def total(self) -> float:
        return float(self.probabilities.sum())

    def rows(self):
        """CSV rows ``(word, probability)`` followed by the residual row."""
        for w, pr in zip(self.index.words(), self.probabilities):
            yield word_text(w), float(pr)
        yield "residual", self.residual


def _input_state(model: InteractionModel, eta, n_slots: int) -> ChainState:
    """Place an input-space vector (coordinates of ``H (x) omega_k^perp``) in slot 1."""
    eta = as_vector(eta)
    if eta.shape != (model.dim_u,):
        raise ShapeError(f"eta has length {eta.shape[0]}, expected {model.dim_u}")
    _check_size(model.dim_h, model.dim_k, n_slots)
    kb = canonical_frame(model).k_basis
    first = eta.reshape(model.dim_h, model.dim_k - 1) @ kb[:, 1:].T
    t = first
    for _ in range(n_slots - 1):
        t = np.multiply.outer(t, np.asarray(model.omega_k, dtype=complex))
    return ChainState(n_slots, np.array(t, dtype=complex))


def record_distribution(model: InteractionModel, eta, n: int) -> RecordDistribution:
    """Probabilities of all records of length ``<= n - 1`` for input ``eta``.

    The input occupies slot 1; one evolution over ``n`` slots is followed by
    projecting H onto ``omega_h`` and expressing every slot in the frame
    ``eps_1 = omega_p, eps_2, ...``. The record ``(a_1, ..., a_m)`` is the
    event "slots ``1..m`` show ``eps_a``, slot ``m + 1`` is not vacuum, later
    slots are vacuum".
    """
    if n < 1:
        raise ValueError("need at least one slot")
    state = _input_state(model, eta, n)
    t = _contract_tail(model, evolve(model, state, n).tensor, n)
    pb = canonical_frame(model).p_basis
    for slot in range(n):
        t = np.moveaxis(np.tensordot(t, np.conj(pb), axes=(slot, 0)), -1, slot)
    d = model.d
    index = WordIndex(d, n - 1)
    amps = np.empty((index.total, model.dim_y), dtype=complex)
    for m in range(n):
        sel = (slice(None),) * m + (slice(1, None),) + (0,) * (n - m - 1)
        lv = index.level(m)
        amps[lv.start:lv.stop] = t[sel].reshape(d**m, model.dim_y)
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    eta = as_vector(eta)
    residual = float(np.real(np.vdot(eta, eta)) - probs.sum())
    return RecordDistribution(index, amps, probs, residual)


def v_apply(model: InteractionModel, j: int, state: ChainState) -> ChainState:
    """``V_j``: drop the (vacuum) last slot, prepend ``eps_j`` and apply ``U*``.

    The result is ``U*(xi (x) eps_j) (x) eta`` for ``state = xi (x) eta``,
    with the former slots shifted one place to the right.

    Raises
    ------
    ValueError
        If the last slot is not in the vacuum (no room to prepend).
    """
    if not 1 <= j <= model.d:
        raise ValueError(f"letter {j} out of range 1..{model.d}")
    if state.n_slots < 1:
        raise ValueError("no free slot")
    t = state.tensor
    head = np.tensordot(t, np.conj(model.omega_k), axes=(t.ndim - 1, 0))
    rebuilt = np.multiply.outer(head, model.omega_k)
    if np.linalg.norm(t - rebuilt) > _FREE_SLOT_TOL * max(1.0, np.linalg.norm(t)):
        raise ValueError("no free slot: the last slot is not in the vacuum")
    eps = canonical_frame(model).p_basis[:, j - 1]
    x = np.moveaxis(np.multiply.outer(head, eps), -1, 1)
    out = np.tensordot(np.conj(model.u4()), x, axes=([0, 1], [0, 1]))
    return ChainState(state.n_slots, out)


# -- verification -----------------------------------------------------------


@dataclass
class ScatteringReport:
    """Defects of the scattering identities at a fixed truncation."""

    n_slots: int
    sample_count: int
    seed: int
    defects: dict[str, float] = field(default_factory=dict)

    @property
    def max_defect(self) -> float:
        return max(self.defects.values()) if self.defects else 0.0

    def to_dict(self) -> dict:
        return {
            "n_slots": self.n_slots,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "defects": dict(self.defects),
            "max_defect": self.max_defect,
        }


def _random_state(model: InteractionModel, rng: np.random.Generator, used: int,
                  n_slots: int, orthogonal_to_vacuum: bool) -> ChainState:
    """Random unit vector supported on slots ``1..used`` (rest vacuum).

    Draws that are (numerically) parallel to the vacuum are redrawn; with a
    one-dimensional complement a draw can coincide with the vacuum itself
    when the model was generated from the same seed.
    """
    shape = (model.dim_h,) + (model.dim_k,) * used
    vac = vacuum_state(model, n_slots).tensor
    for _ in range(100):
        t = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        for _ in range(n_slots - used):
            t = np.multiply.outer(t, np.asarray(model.omega_k, dtype=complex))
        if orthogonal_to_vacuum:
            t = t - np.vdot(vac, t) * vac
        norm = np.linalg.norm(t)
        if norm > 1e-8:
            return ChainState(n_slots, t / norm)
    raise ValueError("no room for a sample orthogonal to the vacuum")


def _matrix(states, dim: int) -> np.ndarray:
    """Amplitude vectors as columns; ``dim`` fixes the shape when empty."""
    if not states:
        return np.zeros((dim, 0), dtype=complex)
    return np.stack([s.amplitudes for s in states], axis=1)


def _gram_defect(m: np.ndarray) -> float:
    if m.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))))


def scattering_axioms_check(model: InteractionModel, n: int = 4, sample_count: int = 20,
                            seed: int = 0) -> ScatteringReport:
    """Check the scattering identities of the chain truncated to ``n`` slots.

    Reported defects (all zero in exact arithmetic for a valid model):

    ``vacuum``
        ``||U(n) vacuum - vacuum||``.
    ``row_isometry``
        ``max |<V_i a, V_j b> - delta_ij <a, b>|`` over random samples
        orthogonal to the vacuum, together with ``|<vacuum, V_j a>|``.
    ``wandering``
        Gram defect of orthonormal bases of ``H0 (x) vacuum`` and of the
        spaces ``V_w E`` for ``|w| <= n - 2``, where ``E`` is
        ``H (x) omega_k^perp`` in slot 1.
    ``span``
        Largest relative residual after projecting random samples of the
        vacuum complement of ``H (x) K_1..K_(n-1)`` onto those spaces.
    ``outgoing``
        ``max |<U*(omega_h (x) zeta) (x) vacuum, V_j a>|`` for
        ``zeta`` orthogonal to ``omega_p``.
    ``intertwining``
        ``||w_apply(V_j a, n) - eps_j (x) w_apply(a, n - 1)||`` for samples
        on ``n - 2`` slots.
    ``w_monotone``
        Largest decrease of ``||w_apply(a, m)||`` in ``m``, or excess over
        ``||a||``.
    """
    if n < 3:
        raise ValueError("scattering checks need n >= 3")
    _check_size(model.dim_h, model.dim_k, n)
    rng = np.random.default_rng(seed)
    d, h, k = model.d, model.dim_h, model.dim_k
    frame = canonical_frame(model)
    dim = h * k**n
    defects: dict[str, float] = {}

    vac = vacuum_state(model, n)
    vac_out = embed(model, model.omega_h, [model.omega_p] * n, n)
    defects["vacuum"] = float(np.linalg.norm(evolve(model, vac, n).tensor - vac_out.tensor))

    if h * k ** (n - 1) == 1:
        # the truncated space is the vacuum line itself: nothing to sample
        sample_count = 0
    samples = [_random_state(model, rng, n - 1, n, True) for _ in range(sample_count)]
    images = [[v_apply(model, j, s) for s in samples] for j in range(1, d + 1)]
    big = np.concatenate([_matrix(col, dim) for col in images], axis=1)
    base = _matrix(samples, dim)
    expected = np.kron(np.eye(d), base.conj().T @ base)
    iso = float(np.max(np.abs(big.conj().T @ big - expected))) if sample_count else 0.0
    leak = float(np.max(np.abs(vac.amplitudes.conj() @ big))) if sample_count else 0.0
    defects["row_isometry"] = max(iso, leak)

    # orthonormal bases: H0 (x) vacuum, then V_w E level by level
    hb = np.eye(h, dtype=complex)
    frame_h = orthonormal_completion(model.omega_h)
    basis = [embed(model, frame_h[:, i], (), n) for i in range(1, h)]
    level = [embed(model, hb[:, i], [frame.k_basis[:, m]], n) for i in range(h) for m in range(1, k)]
    wandering = list(level)
    for _ in range(n - 2):
        level = [v_apply(model, j, s) for j in range(1, d + 1) for s in level]
        wandering.extend(level)
    bmat = _matrix(basis + wandering, dim)
    defects["wandering"] = _gram_defect(bmat)

    span = 0.0
    for _ in range(sample_count):
        s = _random_state(model, rng, n - 1, n, True).amplitudes
        r = s - bmat @ (bmat.conj().T @ s)
        span = max(span, float(np.linalg.norm(r) / np.linalg.norm(s)))
    defects["span"] = span

    outgoing = [v_apply(model, j, vac) for j in range(2, d + 1)]
    defects["outgoing"] = float(np.max(np.abs(_matrix(outgoing, dim).conj().T @ big))) if outgoing and sample_count else 0.0

    inter = 0.0
    for _ in range(sample_count):
        s = _random_state(model, rng, n - 2, n, False)
        tail = w_apply(model, s, n - 1)
        for j in range(1, d + 1):
            lhs = w_apply(model, v_apply(model, j, s), n)
            inter = max(inter, float(np.linalg.norm(lhs - np.kron(frame.p_basis[:, j - 1], tail))))
    defects["intertwining"] = inter

    mono = 0.0
    for s in samples[: max(1, sample_count // 4)]:
        norms = [np.linalg.norm(w_apply(model, s, m)) for m in range(n + 1)]
        drops = [a - b for a, b in zip(norms, norms[1:])] + [norms[-1] - s.norm()]
        mono = max(mono, max(0.0, float(max(drops))))
    defects["w_monotone"] = mono

    return ScatteringReport(n, sample_count, seed, defects)
