"""Numerical tolerances shared by every module.

All defect and verdict thresholds live here so that they can be overridden in
one place (the CLI exposes ``--tol``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # model axioms (unitarity, vacuum condition, vacuum norms)
    validation: float = 1e-8
    # relative singular value cutoff for numerical rank
    rank: float = 1e-9
    # structural identities that hold exactly up to rounding
    arithmetic: float = 1e-10
    # verdict thresholds (observable, stable)
    verdict: float = 1e-6
    # stopping rule of the monotone fixed point iterations
    iteration: float = 1e-12
    max_iter: int = 200_000
    # gray zones: singular values of (zhat - I) in (ergodic_gray, verdict] and
    # gramian defects in (verdict, observable_gray] are not trusted
    ergodic_gray: float = 1e-12
    observable_gray: float = 1e-3
    # r >= 1 - unstable_edge is a confident "not stable"
    unstable_edge: float = 1e-9
    # Gelfand estimate horizon (power of two)
    stability_n_max: int = 64

    def with_overrides(self, **kw) -> "Tolerances":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT = Tolerances()
