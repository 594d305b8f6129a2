import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condstate import sampling
from condstate.channels import (
    Instrument,
    KrausChannel,
    apply_channel,
    apply_map,
    choi_operator,
    compose_conditionals,
    composed_flavor,
    dual_apply,
    instrument_channel_conditional,
    instrument_povm,
    instrument_to_conditional,
    instrument_update,
    jamiolkowski_to_map,
    jamiolkowski_to_state,
    luders_instrument,
    propagate,
    swap_conditional,
)
from condstate.conditionals import ConditionalState, conditional_from_joint, ensemble_to_conditional, povm_to_conditional
from condstate.errors import ChannelError, FlavorError, LabelCollisionError, LabelNotFoundError
from condstate.linalg import frob_distance, is_psd
from condstate.regions import LabeledOperator, RegionSpace, partial_trace, partial_transpose

from _helpers import SQ, ket

A, B, C = RegionSpace("A", 2), RegionSpace("B", 2), RegionSpace("C", 2)
DIMS = [(2, 2), (2, 3), (3, 2)]


def kraus_oracle(kraus, rho):
    return sum(k @ rho @ k.conj().T for k in kraus)


def jamiolkowski_oracle(kraus, din):
    """sum_jk |j><k| (x) E(|k><j|), built entry by entry."""
    dout = kraus[0].shape[0]
    out = np.zeros((din * dout, din * dout), complex)
    for j in range(din):
        for k in range(din):
            unit = np.zeros((din, din))
            unit[k, j] = 1
            outer = np.zeros((din, din))
            outer[j, k] = 1
            out += np.kron(outer, kraus_oracle(kraus, unit))
    return out


def test_identity_channel_is_swap():
    c = jamiolkowski_to_state(KrausChannel.identity(A, B))
    swap = np.zeros((4, 4))
    for j in range(2):
        for k in range(2):
            swap[2 * j + k, 2 * k + j] = 1
    assert np.array_equal(c.op.matrix.real, swap)
    assert c.flavor == "causal" and c.validate()
    assert frob_distance(swap_conditional(A, B).op, c.op) == 0


def test_depolarizing_channel_is_identity_over_d():
    c = jamiolkowski_to_state(KrausChannel.depolarizing(A, B))
    assert np.allclose(c.op.matrix, np.eye(4) / 2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.sampled_from(DIMS))
def test_jamiolkowski_matches_oracle_and_round_trips(seed, dims):
    g = sampling.rng(seed)
    a, b = RegionSpace("A", dims[0]), RegionSpace("B", dims[1])
    ch = sampling.random_channel(g, a, b)
    c = jamiolkowski_to_state(ch)
    assert np.allclose(c.op.matrix, jamiolkowski_oracle(ch.kraus, dims[0]), atol=1e-12)
    assert c.validate()
    m = jamiolkowski_to_map(c)
    rho = sampling.random_density(g, a)
    assert np.allclose(apply_map(m, rho).matrix, kraus_oracle(ch.kraus, rho.matrix), atol=1e-12)
    assert frob_distance(jamiolkowski_to_state(m).op, c.op) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_choi_is_partial_transpose_of_jamiolkowski(seed):
    ch = sampling.random_channel(sampling.rng(seed), A, B)
    choi = choi_operator(ch)
    assert is_psd(choi)
    assert frob_distance(choi, partial_transpose(jamiolkowski_to_state(ch).op, {"A"})) < 1e-12


def test_apply_channel_keeps_bystanders(g):
    ch = sampling.random_channel(g, A, B)
    rho = sampling.random_density(g, (A, C))
    out = apply_channel(ch, rho)
    assert out.labels == ("B", "C")
    assert frob_distance(partial_trace(out, {"B"}), partial_trace(rho, {"A"})) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.sampled_from(DIMS))
def test_schrodinger_heisenberg_duality(seed, dims):
    g = sampling.rng(seed)
    a, b = RegionSpace("A", dims[0]), RegionSpace("B", dims[1])
    ch = sampling.random_channel(g, a, b)
    rho = sampling.random_density(g, a)
    eff = sampling.random_povm_ops(g, b, 2)[0]
    lhs = np.trace(eff.matrix @ apply_channel(ch, rho).matrix)
    rhs = np.trace(dual_apply(ch, eff).matrix @ rho.matrix)
    assert abs(lhs - rhs) < 1e-12
    m = jamiolkowski_to_map(jamiolkowski_to_state(ch))
    assert frob_distance(dual_apply(m, eff), dual_apply(ch, eff)) < 1e-12
    unit = dual_apply(ch, LabeledOperator.identity((b,)))
    assert frob_distance(unit, LabeledOperator.identity((a,))) < 1e-12


def test_non_tp_kraus_rejected():
    with pytest.raises(ChannelError):
        jamiolkowski_to_state(KrausChannel(A, B, (np.eye(2) * 0.5,)))


def test_acausal_map_refuses_plain_application(g):
    c = conditional_from_joint(sampling.random_density(g, (A, B)), {"A"})
    m = jamiolkowski_to_map(c)
    with pytest.raises(FlavorError):
        apply_map(m, sampling.random_density(g, A))
    assert apply_map(m, sampling.random_density(g, A), acausal=True).labels == ("B",)


def test_propagate_label_errors(g):
    c = swap_conditional(A, B)
    with pytest.raises(LabelNotFoundError):
        propagate(sampling.random_density(g, C), c)
    with pytest.raises(LabelCollisionError):
        propagate(sampling.random_density(g, (A, B)), c)


def test_propagate_identity_channel(g):
    rho = sampling.random_density(g, A)
    out = propagate(rho, swap_conditional(A, B))
    assert np.allclose(out.matrix, rho.matrix) and out.labels == ("B",)


def test_born_rule_through_povm():
    povm = povm_to_conditional([LabeledOperator((A,), ket(1, 0)), LabeledOperator((A,), ket(0, 1))], "Y")
    rho = LabeledOperator((A,), ket(np.sqrt(0.75), np.sqrt(0.25)))
    assert np.allclose(propagate(rho, povm).matrix, np.diag([0.75, 0.25]))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_composition_matches_kraus_composition(seed):
    g = sampling.rng(seed)
    e1, e2 = sampling.random_channel(g, A, B), sampling.random_channel(g, B, C)
    comp = compose_conditionals(jamiolkowski_to_state(e2), jamiolkowski_to_state(e1))
    direct = KrausChannel(A, C, tuple(k2 @ k1 for k2 in e2.kraus for k1 in e1.kraus))
    assert comp.flavor == "causal"
    assert frob_distance(comp.op, jamiolkowski_to_state(direct).op) < 1e-12


def test_composition_flavor_rules(g):
    causal = swap_conditional(A, B)
    acausal = conditional_from_joint(sampling.random_density(g, (B, C)), {"B"})
    assert composed_flavor(causal, causal) == "causal"
    with pytest.raises(FlavorError):
        compose_conditionals(acausal, causal)
    ens = ensemble_to_conditional([sampling.random_density(g, B) for _ in range(2)], "X")
    out = compose_conditionals(acausal, ens)
    assert out.flavor == "acausal"  # acausal after classical conditioning stays acausal
    assert ConditionalState(out.op, out.conditioned, out.conditioning, "acausal").validate()


# --- instruments --------------------------------------------------------------------


def z_luders():
    return luders_instrument([ket(1, 0), ket(0, 1)], "Y", A, B)


def test_luders_update_on_plus():
    upd = instrument_update(z_luders(), LabeledOperator((A,), ket(SQ, SQ)))
    assert np.allclose(upd.probabilities, [0.5, 0.5])
    assert np.allclose(upd.posterior(0).matrix, ket(1, 0))
    assert np.allclose(upd.posterior(1).matrix, ket(0, 1))


def test_zero_probability_posterior_is_none():
    upd = instrument_update(z_luders(), LabeledOperator((A,), ket(1, 0)))
    assert upd.posterior(1) is None


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_instrument_consistency(seed):
    g = sampling.rng(seed)
    ins = sampling.random_instrument(g, RegionSpace("Y", 3, True), A, B)
    ins.check()
    rho = sampling.random_density(g, A)
    upd = instrument_update(ins, rho)
    born = [np.trace(e @ rho.matrix).real for e in ins.effects()]
    assert np.allclose(upd.probabilities, born, atol=1e-12)
    assert abs(upd.probabilities.sum() - 1) < 1e-12
    nonsel = apply_channel(ins.nonselective(), rho)
    assert frob_distance(sum(upd.blocks[1:], upd.blocks[0]), nonsel) < 1e-12
    assert instrument_to_conditional(ins).validate()
    assert instrument_povm(ins).validate()
    assert instrument_channel_conditional(ins).validate()


def test_instrument_must_sum_to_tp():
    ins = Instrument(RegionSpace("Y", 1, True), A, B, ((np.eye(2) * 0.5,),))
    with pytest.raises(ChannelError):
        ins.check()
