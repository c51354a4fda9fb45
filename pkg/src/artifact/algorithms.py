"""Drivers for the intersection-search algorithms with query accounting.

Each driver accepts either :class:`MembershipSets` (full state-vector
simulation) or a :class:`SetProfile` (the same algorithm run on the four
class amplitudes, exact for any N because every operator involved preserves
the class subspace). Both paths charge identical query counts.

* ``algorithm1``: Grover with the intersection flip built from an ancilla,
  three queries per iteration.
* ``algorithm2``: Grover onto the uniform superposition over A, then Grover
  from there with O_B, reflecting about the stage-one state.
* ``variant``: iterate ``V = I_s I_B I_s I_A``, two queries per iteration.
* ``grover_reference``: plain Grover with a single oracle for A & B, as if
  A = B; one query per iteration.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from . import statevector as sv
from .statevector import MembershipSets, QueryLedger, StateVector
from .subspace import (
    ModelError,
    SetProfile,
    amplitudes_from_profile,
    build_search_operator,
    round_half_up,
)
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ALGORITHMS",
    "TraceSample",
    "RunTrace",
    "q_opt",
    "run_algorithm1",
    "run_algorithm2",
    "run_variant",
    "run_grover_reference",
    "run_algorithm",
    "plan_schedule",
    "find_common_element",
]

ALGORITHMS = ("algorithm1", "algorithm2", "variant", "grover_reference")

Instance = Union[MembershipSets, SetProfile]


class TraceSample(NamedTuple):
    iteration: int
    cumulative_queries: int
    success_probability: float


@dataclass
class RunTrace:
    algorithm: str
    samples: list[TraceSample] = field(default_factory=list)
    planned_queries: int = 0
    q_opt_reference: float = 0.0
    planned_iterations: int = 0

    def record(self, iteration: int, queries: int, prob: float) -> None:
        if self.samples and queries <= self.samples[-1].cumulative_queries:
            raise ValueError("cumulative queries must increase strictly")
        self.samples.append(TraceSample(iteration, queries, min(1.0, max(0.0, prob))))

    def probabilities(self) -> np.ndarray:
        return np.array([s.success_probability for s in self.samples])

    def queries_to_reach(self, threshold: float) -> Optional[int]:
        for s in self.samples:
            if s.success_probability >= threshold:
                return s.cumulative_queries
        return None

    @property
    def final_probability(self) -> float:
        return self.samples[-1].success_probability if self.samples else 0.0


def q_opt(n_total: int, n_common: int) -> float:
    """Lower bound on queries, ``(pi/4) sqrt(N/M)``."""
    return math.pi / 4.0 * math.sqrt(n_total / n_common)


class _FullBackend:
    def __init__(self, sets: MembershipSets, tol: Tolerances):
        self.sets = sets
        self.state = StateVector.uniform(sets.n_total, tol)

    def oracle(self, which, ledger):
        sv.apply_phase_oracle(self.state, which, self.sets, ledger)

    def flip_common(self, ledger, cost):
        sv.apply_intersection_flip(self.state, self.sets, ledger, cost)

    def diffuse(self):
        sv.apply_diffusion(self.state)

    def snapshot(self):
        amps = self.state.amplitudes.copy()
        return amps / math.sqrt(float(sv.pairwise_sum(np.abs(amps) ** 2)))

    def reflect(self, axis):
        sv.reflect_about(self.state, axis)

    def success(self):
        return sv.success_probability(self.state, self.sets)

    def mass_on_a(self):
        return float(sv.pairwise_sum(self.state.probabilities()[self.sets.index_a]))


class _ClassBackend:
    """The algorithms on class amplitudes ``(a, b, t, p)``."""

    _FLIPS = {"A": np.array([-1.0, 1.0, -1.0, 1.0]), "B": np.array([1.0, -1.0, -1.0, 1.0])}
    _COMMON = np.array([1.0, 1.0, -1.0, 1.0])

    def __init__(self, profile: SetProfile, tol: Tolerances):
        self.source = amplitudes_from_profile(profile).as_array()
        self.v = self.source.copy()
        self.tol = tol
        self.applications = 0

    def _tick(self):
        self.applications += 1
        if self.applications % self.tol.renormalize_every == 0:
            self.v /= math.sqrt(self.v @ self.v)

    def oracle(self, which, ledger):
        self.v *= self._FLIPS[which]
        ledger.charge(**{which.lower(): 1})
        self._tick()

    def flip_common(self, ledger, cost):
        self.v *= self._COMMON
        ledger.charge(*cost)
        self._tick()

    def diffuse(self):
        self.v -= 2.0 * (self.source @ self.v) * self.source
        self._tick()

    def snapshot(self):
        return self.v / math.sqrt(self.v @ self.v)

    def reflect(self, axis):
        self.v -= 2.0 * (axis @ self.v) * axis
        self._tick()

    def success(self):
        return float(self.v[2] ** 2)

    def mass_on_a(self):
        return float(self.v[0] ** 2 + self.v[2] ** 2)


def _setup(instance: Instance, tol: Tolerances):
    if isinstance(instance, MembershipSets):
        return instance.profile(), _FullBackend(instance, tol)
    if isinstance(instance, SetProfile):
        return instance, _ClassBackend(instance, tol)
    raise TypeError(f"expected MembershipSets or SetProfile, got {type(instance).__name__}")


def _require_common(profile: SetProfile, name: str) -> None:
    if profile.count_common < 1:
        raise ValueError(f"{name} needs a non-empty intersection (|A & B| = 0)")


def plan_schedule(algorithm: str, profile: SetProfile) -> tuple[int, int]:
    """Planned ``(iterations, queries)``; for algorithm2 iterations are outer ones."""
    _require_common(profile, algorithm)
    n, m = profile.n_total, profile.count_common
    if algorithm in ("algorithm1", "grover_reference"):
        it = round_half_up(q_opt(n, m))
        return it, (3 if algorithm == "algorithm1" else 1) * it
    if algorithm == "algorithm2":
        q_a = round_half_up(math.pi / 4.0 * math.sqrt(n / profile.size_a))
        outer = round_half_up(math.pi / 4.0 * math.sqrt(profile.size_a / m))
        return outer, q_a + outer * (2 * q_a + 1)
    if algorithm == "variant":
        it = round_half_up(math.pi / (8.0 * math.sqrt(m / n)))
        return it, 2 * it
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")


def _grover_on_common(algorithm, instance, ledger, iterations, cost, tol):
    profile, be = _setup(instance, tol)
    _require_common(profile, algorithm)
    ledger = QueryLedger() if ledger is None else ledger
    per_iter = sum(cost)
    planned, planned_queries = plan_schedule(algorithm, profile)
    trace = RunTrace(algorithm, planned_queries=planned_queries,
                     q_opt_reference=q_opt(profile.n_total, profile.count_common), planned_iterations=planned)
    n_iter = planned if iterations is None else iterations
    trace.record(0, 0, be.success())
    for k in range(1, n_iter + 1):
        be.flip_common(ledger, cost)
        be.diffuse()
        trace.record(k, per_iter * k, be.success())
    return trace


def run_algorithm1(instance: Instance, ledger: Optional[QueryLedger] = None,
                   iterations: Optional[int] = None, tol: Tolerances = DEFAULT) -> RunTrace:
    """Grover iterations ``I_s I_t`` with the intersection flip costing 2 O_A + 1 O_B."""
    return _grover_on_common("algorithm1", instance, ledger, iterations, (2, 1), tol)


def run_grover_reference(instance: Instance, ledger: Optional[QueryLedger] = None,
                         iterations: Optional[int] = None, tol: Tolerances = DEFAULT) -> RunTrace:
    """Grover with one oracle marking A & B directly (the A = B situation).

    Each query is booked as an O_A call.
    """
    return _grover_on_common("grover_reference", instance, ledger, iterations, (1, 0), tol)


def run_algorithm2(instance: Instance, ledger: Optional[QueryLedger] = None,
                   iterations: Optional[int] = None, tol: Tolerances = DEFAULT) -> RunTrace:
    """Nested Grover search.

    Stage one applies ``I_s I_A`` ``q_A`` times. Stage two alternates O_B with
    the reflection about the stage-one state. That reflection equals
    ``(I_s I_A)^q_A I_s (I_A I_s)^q_A`` and is billed as ``2 q_A`` O_A calls,
    although it is simulated directly from the cached state.
    """
    profile, be = _setup(instance, tol)
    if profile.size_a < 1:
        raise ValueError("algorithm2 needs a non-empty set A")
    _require_common(profile, "algorithm2")
    ledger = QueryLedger() if ledger is None else ledger
    n, m = profile.n_total, profile.count_common
    q_a = round_half_up(math.pi / 4.0 * math.sqrt(n / profile.size_a))
    outer, planned_queries = plan_schedule("algorithm2", profile)
    per_outer = 2 * q_a + 1
    trace = RunTrace("algorithm2", planned_queries=planned_queries,
                     q_opt_reference=q_opt(n, m), planned_iterations=outer)

    trace.record(0, 0, be.success())
    for _ in range(q_a):
        be.oracle("A", ledger)
        be.diffuse()
    mass = be.mass_on_a()
    if mass < 0.99:
        warnings.warn(f"stage one left only {mass:.4f} probability on A", RuntimeWarning, stacklevel=2)
    axis = be.snapshot()

    n_outer = outer if iterations is None else iterations
    for k in range(1, n_outer + 1):
        be.oracle("B", ledger)
        be.reflect(axis)
        ledger.charge(a=2 * q_a)
        trace.record(k, q_a + k * per_outer, be.success())
    return trace


def _variant_core(instance: Instance, ledger: QueryLedger, iterations: int, tol: Tolerances):
    profile, be = _setup(instance, tol)
    probs = [be.success()]
    for _ in range(iterations):
        be.oracle("A", ledger)
        be.diffuse()
        be.oracle("B", ledger)
        be.diffuse()
        probs.append(be.success())
    return profile, be, probs


def _check_against_class_model(profile: SetProfile, sets: MembershipSets, state: StateVector,
                               iterations: int, tol: Tolerances) -> None:
    amps = amplitudes_from_profile(profile)
    V = build_search_operator(amps, tol).entries
    v = amps.as_array()
    for k in range(1, iterations + 1):
        v = V @ v
        if k % tol.renormalize_every == 0:
            v /= math.sqrt(v @ v)
    predicted = np.zeros(sets.n_total)
    for mask, coord, size in zip(sets.class_masks(), v, profile.counts()):
        if size:
            predicted[mask] = coord / math.sqrt(size)
    err = float(np.abs(state.amplitudes - predicted).max())
    if err > tol.faithfulness:
        raise ModelError(f"full simulation departs from the class model by {err:.3e}")


def run_variant(instance: Instance, ledger: Optional[QueryLedger] = None,
                iterations: Optional[int] = None, tol: Tolerances = DEFAULT) -> RunTrace:
    """Iterate ``V = I_s I_B I_s I_A`` for ``round(pi / (8 gamma))`` steps."""
    profile = instance.profile() if isinstance(instance, MembershipSets) else instance
    _require_common(profile, "variant")
    ledger = QueryLedger() if ledger is None else ledger
    planned, _ = plan_schedule("variant", profile)
    n_iter = planned if iterations is None else iterations
    _, be, probs = _variant_core(instance, ledger, n_iter, tol)
    if isinstance(be, _FullBackend):
        _check_against_class_model(profile, instance, be.state, n_iter, tol)
    trace = RunTrace("variant", planned_queries=2 * planned,
                     q_opt_reference=q_opt(profile.n_total, profile.count_common), planned_iterations=planned)
    for k, p in enumerate(probs):
        trace.record(k, 2 * k, p)
    return trace


_RUNNERS = {
    "algorithm1": run_algorithm1,
    "algorithm2": run_algorithm2,
    "variant": run_variant,
    "grover_reference": run_grover_reference,
}


def run_algorithm(name: str, instance: Instance, ledger: Optional[QueryLedger] = None,
                  iterations: Optional[int] = None, tol: Tolerances = DEFAULT) -> RunTrace:
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}") from None
    return runner(instance, ledger, iterations, tol)


def find_common_element(sets: MembershipSets, rng_seed: int, max_rounds: int = 10,
                        assumed_common: int = 1, tol: Tolerances = DEFAULT):
    """Search for an element of A & B; returns ``(element or None, ledger)``.

    Each round runs the variant sized for the current guess of ``|A & B|``,
    measures, and checks the outcome with one O_A and one O_B query. A failed
    check doubles the guess (capped at N). ``None`` after ``max_rounds``
    means the intersection is probably empty.
    """
    ledger = QueryLedger()
    rng = np.random.default_rng(rng_seed)
    n = sets.n_total
    guess = max(1, min(assumed_common, n))
    for _ in range(max_rounds):
        iterations = round_half_up(math.pi / (8.0 * math.sqrt(guess / n)))
        _, be, _ = _variant_core(sets, ledger, iterations, tol)
        k = sv.sample_measurement(be.state, int(rng.integers(2**63)))
        ledger.charge(a=1, b=1)
        if sets.in_a[k] and sets.in_b[k]:
            return k, ledger
        guess = min(2 * guess, n)
    return None, ledger
