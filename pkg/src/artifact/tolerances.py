"""Numerical tolerances shared by the analytic model, the simulator and the harness.

Every check in the package reads its threshold from a :class:`Tolerances`
instance. Pass a modified copy (``dataclasses.replace(DEFAULT, ...)``) to
override any of them.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # 4x4 model
    normalization: float = 1e-12
    closed_form: float = 1e-12
    orthogonality: float = 1e-12
    eigen: float = 1e-10
    degenerate_offdiag: float = 1e-12
    arccos_clamp: float = 1e-12
    arccos_error: float = 1e-9
    overlap: float = 1e-9
    asymptotic_gamma_max: float = 0.05
    asymptotic_ab_max: float = 0.1
    # full state vector
    norm_drift: float = 1e-9
    renormalize_every: int = 1024
    faithfulness: float = 1e-10
    # benchmark
    success_threshold: float = 0.9


DEFAULT = Tolerances()
