import math
import warnings

import numpy as np
import pytest

from artifact import algorithms as alg
from artifact.algorithms import RunTrace, plan_schedule
from artifact.statevector import MembershipSets, QueryLedger
from artifact.subspace import SetProfile, round_half_up


def instance(n, a_only, b_only, common, seed=0):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    a = list(perm[:a_only]) + list(perm[a_only + b_only:a_only + b_only + common])
    b = list(perm[a_only:a_only + b_only + common])
    return MembershipSets.from_indices(n, a, b)


def dense_reflections(sets):
    n = sets.n_total
    s = np.full(n, 1 / math.sqrt(n))
    i_s = np.eye(n) - 2 * np.outer(s, s)
    o_a = np.diag(np.where(sets.in_a, -1.0, 1.0))
    o_b = np.diag(np.where(sets.in_b, -1.0, 1.0))
    return s, i_s, o_a, o_b


# ---------------------------------------------------------------- schedules

def test_plan_algorithm1_n1024():
    assert plan_schedule("algorithm1", SetProfile.from_counts(1024, 0, 0, 1)) == (25, 75)


def test_plan_algorithm1_large():
    it, queries = plan_schedule("algorithm1", SetProfile.from_counts(10**6, 0, 0, 1))
    assert it == 785 and queries == 2355


def test_plan_algorithm2_ratio_large_a():
    profile = SetProfile.from_counts(10**6, 999, 0, 1)
    _, queries = plan_schedule("algorithm2", profile)
    assert queries / alg.q_opt(10**6, 1) == pytest.approx(math.pi / 2, rel=0.06)
    assert queries == pytest.approx(math.pi**2 / 8 * 1000, rel=0.06)


def test_plan_variant_large():
    _, queries = plan_schedule("variant", SetProfile.from_counts(10**6, 5000, 5000, 1))
    assert abs(queries - math.pi / 4 * 1000) / (math.pi / 4 * 1000) <= 0.01


def test_plan_rejects_empty_intersection_and_unknown():
    with pytest.raises(ValueError):
        plan_schedule("variant", SetProfile.from_counts(64, 4, 4, 0))
    with pytest.raises(ValueError):
        plan_schedule("bogus", SetProfile.from_counts(64, 4, 4, 1))


# ---------------------------------------------------------------- traces

def test_trace_rejects_non_increasing_queries():
    t = RunTrace("x")
    t.record(0, 0, 0.1)
    with pytest.raises(ValueError):
        t.record(1, 0, 0.2)


def test_trace_queries_to_reach():
    t = RunTrace("x")
    for k, p in enumerate([0.1, 0.5, 0.92, 0.7]):
        t.record(k, 2 * k, p)
    assert t.queries_to_reach(0.9) == 4
    assert t.queries_to_reach(0.95) is None
    assert t.final_probability == 0.7


# ---------------------------------------------------------------- algorithm1

def test_algorithm1_ledger_and_success():
    sets = instance(1024, 5, 7, 1)
    led = QueryLedger()
    trace = alg.run_algorithm1(sets, led)
    assert (led.oracle_a_calls, led.oracle_b_calls) == (50, 25)
    assert trace.planned_queries == 75 == trace.samples[-1].cumulative_queries
    theta = math.asin(math.sqrt(1 / 1024))
    assert trace.final_probability == pytest.approx(math.sin(51 * theta) ** 2, abs=1e-10)


def test_grover_reference_ledger():
    led = QueryLedger()
    alg.run_grover_reference(instance(1024, 5, 7, 1), led)
    assert (led.oracle_a_calls, led.oracle_b_calls) == (25, 0)


# ---------------------------------------------------------------- algorithm2

def test_algorithm2_matches_dense_construction():
    sets = instance(256, 14, 10, 2, seed=4)
    profile = sets.profile()
    s, i_s, o_a, o_b = dense_reflections(sets)
    q_a = round_half_up(math.pi / 4 * math.sqrt(256 / profile.size_a))
    g_a = i_s @ o_a
    # reflection about the stage-one state, assembled from oracle products only
    refl = np.linalg.matrix_power(g_a, q_a) @ i_s @ np.linalg.matrix_power(o_a @ i_s, q_a)
    psi = np.linalg.matrix_power(g_a, q_a) @ s
    common = sets.in_a & sets.in_b
    expected = [float((psi[common] ** 2).sum())]
    for _ in range(6):
        psi = refl @ o_b @ psi
        expected.append(float((psi[common] ** 2).sum()))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = alg.run_algorithm2(sets, iterations=6)
    got = trace.probabilities()
    assert got[0] == pytest.approx(2 / 256, abs=1e-14)
    # first recorded point after sample 0 is after one outer iteration
    assert np.abs(got[1:] - np.array(expected[1:])).max() <= 1e-12


def test_algorithm2_n4096_nested_rotation_models():
    sets = instance(4096, 60, 30, 4, seed=1)
    led = QueryLedger()
    trace = alg.run_algorithm2(sets, led)
    p = trace.final_probability
    assert p >= 0.8
    # nested model: stage one lands exactly on |s_A>, stage two rotates by phi_B
    q_a = round_half_up(math.pi / 4 * 8)
    phi_a = math.asin(math.sqrt(64 / 4096))
    assert math.sin((2 * q_a + 1) * phi_a) ** 2 > 0.99
    phi_b = math.asin(math.sqrt(4 / 64))
    outer = trace.planned_iterations
    assert abs(p - math.sin((2 * outer + 1) * phi_b) ** 2) < 0.02
    assert (led.oracle_a_calls, led.oracle_b_calls) == (q_a + 2 * q_a * outer, outer)
    assert led.total == trace.planned_queries


def test_algorithm2_a_is_everything():
    sets = MembershipSets(64, np.ones(64, bool), np.arange(64) < 4)
    trace = alg.run_algorithm2(sets)
    assert trace.planned_iterations >= 1
    assert all(0 <= x <= 1 for x in trace.probabilities())


def test_algorithm2_rejects_empty_a():
    with pytest.raises(ValueError):
        alg.run_algorithm2(SetProfile.from_counts(64, 0, 4, 0))


# ---------------------------------------------------------------- variant

def test_variant_n4096_example():
    sets = instance(4096, 40, 40, 4)
    led = QueryLedger()
    trace = alg.run_variant(sets, led)
    assert trace.planned_iterations == 13 and trace.planned_queries == 26
    assert (led.oracle_a_calls, led.oracle_b_calls) == (13, 13)
    assert trace.final_probability >= 0.95
    # frozen from the 4x4 matrix power of the class operator
    assert trace.final_probability == pytest.approx(0.9743683485839723, abs=1e-10)


def test_variant_monotone_until_first_peak():
    trace = alg.run_variant(instance(4096, 40, 40, 4), iterations=26)
    p = trace.probabilities()
    peak = int(np.argmax(p))
    assert peak > 0 and np.all(np.diff(p[: peak + 1]) > 0)


def test_variant_equals_grover_when_sets_coincide():
    sets = instance(4096, 0, 0, 4)
    v = alg.run_variant(sets, iterations=40).probabilities()
    g = alg.run_grover_reference(sets, iterations=80).probabilities()
    assert np.abs(v - g[::2]).max() <= 1e-10


@pytest.mark.parametrize("name", alg.ALGORITHMS)
def test_full_and_class_backends_agree(name):
    sets = instance(512, 20, 9, 3, seed=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        led_full, led_cls = QueryLedger(), QueryLedger()
        full = alg.run_algorithm(name, sets, led_full, iterations=12)
        cls = alg.run_algorithm(name, sets.profile(), led_cls, iterations=12)
    assert np.abs(full.probabilities() - cls.probabilities()).max() <= 1e-10
    assert [s.cumulative_queries for s in full.samples] == [s.cumulative_queries for s in cls.samples]
    assert (led_full.oracle_a_calls, led_full.oracle_b_calls) == (led_cls.oracle_a_calls, led_cls.oracle_b_calls)


def test_run_algorithm_unknown_and_bad_instance():
    with pytest.raises(ValueError):
        alg.run_algorithm("nope", SetProfile.from_counts(16, 1, 1, 1))
    with pytest.raises(TypeError):
        alg.run_algorithm1([1, 2, 3])


def test_variant_large_n_subspace():
    trace = alg.run_variant(SetProfile.from_counts(10**6, 5000, 5000, 1))
    assert trace.planned_queries == 786
    assert trace.final_probability >= 0.98


# ---------------------------------------------------------------- find_common_element

def test_find_single_common_element():
    sets = MembershipSets.from_indices(1024, [1, 2, 3, 7], [7, 8, 9])
    trace = alg.run_variant(sets)
    assert trace.final_probability >= 0.9
    round_one = 2 * trace.planned_iterations + 2
    hits = 0
    for seed in range(40):
        k, led = alg.find_common_element(sets, seed)
        assert k == 7
        hits += led.total == round_one
    assert hits >= 32


def test_find_in_empty_intersection():
    sets = MembershipSets.from_indices(256, range(10), range(10, 20))
    k, led = alg.find_common_element(sets, 0, max_rounds=5)
    assert k is None
    bound, guess = 0, 1
    for _ in range(5):
        bound += 2 * round_half_up(math.pi / (8 * math.sqrt(guess / 256))) + 2
        guess = min(2 * guess, 256)
    assert led.total <= bound


def test_find_when_everything_is_common():
    sets = MembershipSets.from_indices(64, range(64), range(64))
    k, led = alg.find_common_element(sets, 3, assumed_common=64)
    assert k is not None and led.total <= 2 + 2


def test_find_is_deterministic():
    sets = instance(1024, 30, 30, 2, seed=9)
    assert alg.find_common_element(sets, 5)[0] == alg.find_common_element(sets, 5)[0]
