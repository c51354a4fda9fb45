"""Dense state-vector simulation of the phase oracles and the diffusion step.

Operators act in place on a :class:`StateVector` and return it. Every
oracle application is charged to a :class:`QueryLedger`; reductions go
through :func:`pairwise_sum` so results do not depend on how the sum is
chunked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .subspace import SetProfile
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "MAX_STATE_SIZE",
    "MembershipSets",
    "QueryLedger",
    "StateVector",
    "AncillaReport",
    "pairwise_sum",
    "apply_phase_oracle",
    "apply_intersection_flip",
    "apply_diffusion",
    "reflect_about",
    "success_probability",
    "sample_measurement",
    "verify_ancilla_intersection_oracle",
]

MAX_STATE_SIZE = 1 << 24


def pairwise_sum(x: np.ndarray):
    """Sum a 1-D array with a fixed binary tree (element i pairs with i + n/2).

    The result is a function of the input values only. Lengths that are not a
    power of two are treated as zero-padded, which is exact.
    """
    x = np.asarray(x)
    n = x.shape[0]
    if n == 0:
        return x.dtype.type(0)
    if n == 1:
        return x[0]
    m = 1 << (n - 1).bit_length()
    h = m // 2
    buf = x[:h].copy()
    buf[: n - h] += x[h:n]
    while buf.shape[0] > 1:
        h = buf.shape[0] // 2
        buf[:h] += buf[h:]
        buf = buf[:h]
    return buf[0]


@dataclass(frozen=True)
class MembershipSets:
    """Membership bitsets for A and B over ``{0, ..., n_total - 1}``."""

    n_total: int
    in_a: np.ndarray
    in_b: np.ndarray

    def __post_init__(self):
        in_a = np.asarray(self.in_a, dtype=bool).copy()
        in_b = np.asarray(self.in_b, dtype=bool).copy()
        if in_a.shape != (self.n_total,) or in_b.shape != (self.n_total,):
            raise ValueError(f"bitsets must have length n_total={self.n_total}")
        in_a.setflags(write=False)
        in_b.setflags(write=False)
        object.__setattr__(self, "in_a", in_a)
        object.__setattr__(self, "in_b", in_b)

    @classmethod
    def from_indices(cls, n_total: int, a: Iterable[int], b: Iterable[int]) -> "MembershipSets":
        a, b = list(a), list(b)
        bad = [i for i in a + b if not 0 <= i < n_total]
        if bad:
            raise ValueError(f"indices outside range({n_total}): {bad[:5]}")
        in_a = np.zeros(n_total, dtype=bool)
        in_b = np.zeros(n_total, dtype=bool)
        in_a[a] = True
        in_b[b] = True
        return cls(n_total, in_a, in_b)

    @cached_property
    def index_a(self) -> np.ndarray:
        return np.flatnonzero(self.in_a)

    @cached_property
    def index_b(self) -> np.ndarray:
        return np.flatnonzero(self.in_b)

    @cached_property
    def index_common(self) -> np.ndarray:
        return np.flatnonzero(self.in_a & self.in_b)

    def class_masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Masks of the four classes in basis order (a-only, b-only, common, neither)."""
        a, b = self.in_a, self.in_b
        return a & ~b, b & ~a, a & b, ~(a | b)

    def profile(self) -> SetProfile:
        return SetProfile(self.n_total, *(int(m.sum()) for m in self.class_masks()))


@dataclass
class QueryLedger:
    oracle_a_calls: int = 0
    oracle_b_calls: int = 0

    def charge(self, a: int = 0, b: int = 0) -> None:
        if a < 0 or b < 0:
            raise ValueError("query counts only grow")
        self.oracle_a_calls += a
        self.oracle_b_calls += b

    @property
    def total(self) -> int:
        return self.oracle_a_calls + self.oracle_b_calls


@dataclass
class StateVector:
    amplitudes: np.ndarray
    tol: Tolerances = field(default=DEFAULT, repr=False)
    applications: int = 0

    @classmethod
    def uniform(cls, n_total: int, tol: Tolerances = DEFAULT) -> "StateVector":
        if n_total > MAX_STATE_SIZE:
            raise MemoryError(f"N={n_total} exceeds the state-vector ceiling of {MAX_STATE_SIZE}")
        return cls(np.full(n_total, 1.0 / math.sqrt(n_total), dtype=complex), tol)

    @classmethod
    def basis(cls, n_total: int, k: int, tol: Tolerances = DEFAULT) -> "StateVector":
        if not 0 <= k < n_total:
            raise ValueError(f"basis index {k} outside range({n_total})")
        amps = np.zeros(n_total, dtype=complex)
        amps[k] = 1.0
        return cls(amps, tol)

    @property
    def n_total(self) -> int:
        return self.amplitudes.shape[0]

    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def norm_squared(self) -> float:
        return float(pairwise_sum(self.probabilities()))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.tol, self.applications)

    def tick(self) -> None:
        """Count one operator application; renormalize on the fixed schedule."""
        self.applications += 1
        if self.applications % self.tol.renormalize_every == 0:
            self.amplitudes /= math.sqrt(self.norm_squared())


def apply_phase_oracle(state: StateVector, which: str, sets: MembershipSets, ledger: QueryLedger) -> StateVector:
    """Negate the amplitudes of members of A or B and charge one query."""
    if which == "A":
        state.amplitudes[sets.index_a] *= -1
        ledger.charge(a=1)
    elif which == "B":
        state.amplitudes[sets.index_b] *= -1
        ledger.charge(b=1)
    else:
        raise ValueError(f"oracle must be 'A' or 'B', got {which!r}")
    state.tick()
    return state


def apply_intersection_flip(
    state: StateVector, sets: MembershipSets, ledger: QueryLedger, cost: tuple[int, int] = (2, 1)
) -> StateVector:
    """Phase flip on A & B, charged ``cost = (O_A calls, O_B calls)``.

    The default cost is that of the ancilla construction checked by
    :func:`verify_ancilla_intersection_oracle`.
    """
    state.amplitudes[sets.index_common] *= -1
    ledger.charge(*cost)
    state.tick()
    return state


def apply_diffusion(state: StateVector) -> StateVector:
    """Reflection ``I - 2|s><s|`` about the uniform state (no oracle cost)."""
    psi = state.amplitudes
    mean = pairwise_sum(psi) / psi.shape[0]
    psi -= 2.0 * mean
    state.tick()
    return state


def reflect_about(state: StateVector, axis: np.ndarray) -> StateVector:
    """Apply ``I - 2|u><u|`` for a unit vector ``u``."""
    psi = state.amplitudes
    overlap = pairwise_sum(axis.conj() * psi)
    psi -= 2.0 * overlap * axis
    state.tick()
    return state


def success_probability(state: StateVector, sets: MembershipSets) -> float:
    p = state.probabilities()[sets.index_common]
    return min(1.0, float(pairwise_sum(p)))


def sample_measurement(state: StateVector, rng_seed: int) -> int:
    """Draw a basis index from ``|psi_i|^2`` with a seeded generator."""
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(state.probabilities())
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), state.n_total - 1))


@dataclass
class AncillaReport:
    ok: bool
    max_deviation: float
    first_failure: Optional[int]
    ledger: QueryLedger

    def __str__(self):
        status = "ok" if self.ok else f"FAILED at index {self.first_failure}"
        return (
            f"ancilla oracle {status}: max deviation {self.max_deviation:.3e}, "
            f"queries O_A={self.ledger.oracle_a_calls} O_B={self.ledger.oracle_b_calls}"
        )


def verify_ancilla_intersection_oracle(sets: MembershipSets, tol: float = 1e-12, seed: int = 0) -> AncillaReport:
    """Run the O_A, H, O_B, H, O_A ancilla circuit on the doubled space.

    The index register starts in a state with non-zero amplitude on every
    basis index (random phases), the ancilla in ``|0>``. The output must equal
    the intersection phase flip on the register with the ancilla returned to
    ``|0>``.
    """
    n = sets.n_total
    if n > 1 << 12:
        raise ValueError("explicit ancilla simulation is limited to N <= 4096")
    rng = np.random.default_rng(seed)
    psi = np.exp(2j * np.pi * rng.random(n)) / math.sqrt(n)
    # column k holds the register amplitudes with the ancilla in |k>
    state = np.zeros((n, 2), dtype=complex)
    state[:, 0] = psi
    ledger = QueryLedger()

    def oracle(mask, charge):
        state[mask] = state[mask][:, ::-1]
        ledger.charge(**charge)

    def hadamard():
        c0, c1 = state[:, 0].copy(), state[:, 1].copy()
        state[:, 0] = (c0 + c1) / math.sqrt(2.0)
        state[:, 1] = (c0 - c1) / math.sqrt(2.0)

    oracle(sets.in_a, {"a": 1})
    hadamard()
    oracle(sets.in_b, {"b": 1})
    hadamard()
    oracle(sets.in_a, {"a": 1})

    expected = psi.copy()
    expected[sets.index_common] *= -1
    dev = np.maximum(np.abs(state[:, 0] - expected), np.abs(state[:, 1])) * math.sqrt(n)
    bad = np.flatnonzero(dev > tol)
    return AncillaReport(
        ok=bad.size == 0 and (ledger.oracle_a_calls, ledger.oracle_b_calls) == (2, 1),
        max_deviation=float(dev.max()) if n else 0.0,
        first_failure=int(bad[0]) if bad.size else None,
        ledger=ledger,
    )
