"""Numerical tolerance pack.

All thresholds live here so that the whole stack can be loosened or tightened
coherently. The environment variable ``CAUSTYK_TOL`` overrides the base
subspace tolerance (default 1e-9); the remaining thresholds scale with it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

_BASE = 1e-9


@dataclass(frozen=True)
class Tolerances:
    """Bundle of numerical thresholds used across the package.

    Attributes:
        herm: allowed deviation from Hermiticity.
        orth: allowed deviation from orthonormality of basis rows.
        psd: eigenvalue floor for positive-semidefinite checks.
        sub: base rank/containment tolerance for subspaces. Rank decisions are
            scale-aware: singular values count when they exceed
            ``sub * max(sigma_max, 1)``.
        decomp: acceptance threshold for decomposition residuals.
        roundtrip: threshold for recomposition round trips.
        slide: per-step threshold for rewriting certificates.
    """

    herm: float = 1e-10
    orth: float = 1e-10
    psd: float = 1e-9
    sub: float = 1e-9
    decomp: float = 1e-6
    roundtrip: float = 1e-8
    slide: float = 1e-7

    def rank_cut(self, sigma_max: float) -> float:
        """Singular-value cutoff for rank decisions at the given scale."""
        return self.sub * max(sigma_max, 1.0)


def _from_env() -> Tolerances:
    raw = os.environ.get("CAUSTYK_TOL")
    if raw is None:
        return Tolerances()
    base = float(raw)
    if base <= 0:
        raise ValueError(f"CAUSTYK_TOL must be positive, got {raw!r}")
    s = base / _BASE
    return Tolerances(
        herm=1e-10 * s,
        orth=1e-10 * s,
        psd=1e-9 * s,
        sub=base,
        decomp=1e-6 * s,
        roundtrip=1e-8 * s,
        slide=1e-7 * s,
    )


TOLS = _from_env()
