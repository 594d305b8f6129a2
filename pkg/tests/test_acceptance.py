"""Acceptance criteria, one test each.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion with the worst observed value.
"""

import time

import numpy as np
import pytest

from condstate import _kernels, sampling
from condstate.channels import jamiolkowski_to_map, jamiolkowski_to_state
from condstate.limits import mixed_causal, w_state_chain_rule
from condstate.linalg import frob_distance
from condstate.regions import RegionSpace
from condstate.verify import (
    JAMIOLKOWSKI_DIMS,
    dyadic_grid,
    suite_alt_conditionals,
    suite_barnum_knill,
    suite_classical,
    suite_duality,
    suite_info_disturbance,
    suite_pgm,
    suite_retrodiction,
    suite_steering,
)

SEED = 0


def by_name(checks):
    return {c.name: c for c in checks}


def record(record_property, *checks):
    for c in checks:
        record_property(c.name, f"{c.value:.3g}<= {c.threshold:g}" if c.passed else f"{c.value:.3g} FAILED {c.threshold:g}")


@pytest.mark.criterion(1, "Jamiolkowski round trip, 50 channels per dim pair, under 5 s")
def test_criterion_1_jamiolkowski_round_trip(record_property):
    _kernels.warmup()
    g = sampling.rng(SEED)
    worst = 0.0
    start = time.perf_counter()
    for din, dout in JAMIOLKOWSKI_DIMS:
        a, b = RegionSpace("A", din), RegionSpace("B", dout)
        for _ in range(50):
            c = jamiolkowski_to_state(sampling.random_channel(g, a, b))
            back = jamiolkowski_to_state(jamiolkowski_to_map(c))
            worst = max(worst, frob_distance(back.op, c.op))
    elapsed = time.perf_counter() - start
    record_property("max_error", f"{worst:.3g}")
    record_property("seconds", f"{elapsed:.2f}")
    assert worst <= 1e-10
    assert elapsed < 5.0


@pytest.mark.criterion(2, "predictive and retrodictive joints agree on 100 instances")
def test_criterion_2_causal_neutrality(record_property):
    c = by_name(suite_retrodiction(SEED, 100))["predictive-equals-retrodictive-joint"]
    record(record_property, c)
    assert c.passed and c.value <= 1e-8


@pytest.mark.criterion(3, "steering symmetry on 100 instances")
def test_criterion_3_steering(record_property):
    cs = by_name(suite_steering(SEED, 100))
    three = cs["steering-rightward-leftward-direct-agree"]
    avg = cs["steered-ensemble-average-equals-prior"]
    record(record_property, three, avg)
    assert three.value <= 1e-8
    assert avg.value <= 1e-10


@pytest.mark.criterion(4, "classical-oracle equivalence on the exhaustive dyadic 3x3 grid")
def test_criterion_4_classical_oracle(record_property):
    n = len(dyadic_grid())
    checks = suite_classical(SEED, n)
    worst = max(checks, key=lambda c: c.value)
    record_property("tables", n)
    record_property("operations", len(checks))
    record(record_property, worst)
    assert all(c.passed and c.value <= 1e-12 for c in checks), [c.to_json() for c in checks if not c.passed]


@pytest.mark.criterion(5, "no information gain without disturbance, 500 qubit instruments")
def test_criterion_5_info_disturbance(record_property):
    (c,) = suite_info_disturbance(SEED, 500)
    record_property("violations", int(c.value))
    record_property("verdicts", c.detail)
    assert c.value == 0


@pytest.mark.criterion(6, "W-state chain rule fails; mixed-causal closed form")
def test_criterion_6_limitations(record_property):
    dist = w_state_chain_rule().distance
    d = 2
    phi = np.eye(d).reshape(-1)
    ac = np.outer(phi, phi) / d
    # (1/d)|Phi+><Phi+|_AC (x) I_B/d, reordered to A B C
    t = np.kron(ac, np.eye(d) / d).reshape((d,) * 6)  # axes a c b | a' c' b'
    closed = t.transpose(0, 2, 1, 3, 5, 4).reshape(d**3, d**3)
    err = float(np.linalg.norm(mixed_causal(d).star_joint.matrix - closed))
    record_property("w_state_distance", f"{dist:.4g}")
    record_property("mixed_causal_error", f"{err:.3g}")
    assert dist > 1e-3
    assert err <= 1e-10


@pytest.mark.criterion(7, "Barnum-Knill map equals the Bayes inverse; unitary recovery")
def test_criterion_7_barnum_knill(record_property):
    cs = by_name(suite_barnum_knill(SEED, 50))
    eq, uni = cs["barnum-knill-equals-bayes-inverse"], cs["unitary-recovery-undoes-channel"]
    record(record_property, eq, uni)
    assert eq.value <= 1e-9
    assert uni.value <= 1e-8


@pytest.mark.criterion(8, "pretty-good measurement completeness on 50 ensembles")
def test_criterion_8_pgm(record_property):
    cs = by_name(suite_pgm(SEED, 50))
    comp, inv = cs["pgm-sums-to-support-projector"], cs["pgm-equals-hybrid-bayes-inverse"]
    record(record_property, comp, inv)
    assert comp.value <= 1e-10
    assert inv.value <= 1e-10


@pytest.mark.criterion(9, "Schrodinger-Heisenberg duality on 200 triples")
def test_criterion_9_duality(record_property):
    c = by_name(suite_duality(SEED, 200))["schrodinger-heisenberg-duality"]
    record(record_property, c)
    assert c.value <= 1e-10


@pytest.mark.criterion(10, "alternative conditionals: n=1 is standard, commuting case agrees")
def test_criterion_10_alt_conditionals(record_property):
    cs = by_name(suite_alt_conditionals(SEED, 50))
    n1, comm = cs["alt-conditional-n1-equals-standard-conditional"], cs["alt-conditionals-agree-for-commuting-joint"]
    record(record_property, n1, comm)
    assert n1.value <= 1e-10
    assert comm.value <= 1e-9
