"""Bayesian inversion and the inference procedures built on it.

Inversion: ``c_{A|B} = c_{B|A} * (rho_A rho_B^{-1})``, i.e. conjugation by
``rho_A^{1/2} (x) rho_B^{-1/2}`` with ``rho_B`` the propagated marginal.  The
same formula serves both flavors.  Inverses are taken on supports, so results
are conditionals on ``supp(rho_B)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channels import (
    Instrument,
    KrausChannel,
    MatrixMap,
    apply_channel,
    compose_conditionals,
    dual_apply,
    instrument_channel_conditional,
    instrument_povm,
    instrument_update,
    jamiolkowski_to_state,
    map_from_function,
    propagate,
    swap_conditional,
)
from .classical import ClassicalDistribution, embed_classical, extract_classical
from .conditionals import (
    ConditionalState,
    HybridConditional,
    JointState,
    as_conditional,
    conditional_from_joint,
    hybrid_from_components,
    maybe_hybrid,
)
from .errors import (
    DimensionMismatchError,
    DomainError,
    FlavorError,
    LabelNotFoundError,
    ProbabilityZeroError,
    StateError,
    ValidationError,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    conjugate,
    frob_distance,
    herm_sqrt,
    is_density,
    spectrum,
    support_pinv,
    support_projector,
)
from .regions import LabeledOperator, embed, mul_all, partial_trace, reduce_to, tensor


def _require_density(rho: LabeledOperator, labels, what: str, tol: Tolerances):
    if rho.label_set != frozenset(labels):
        raise LabelNotFoundError(f"{what} lives on {rho.labels}, expected {sorted(labels)}")
    v = is_density(rho, tol)
    if not v:
        raise StateError(f"{what} is not a density: {v.reason}")


def _as_state(p) -> LabeledOperator:
    return embed_classical(p) if isinstance(p, ClassicalDistribution) else p


def _support_or_none(rho: LabeledOperator, tol: Tolerances):
    proj = support_projector(rho, tol)
    full = frob_distance(proj, LabeledOperator.identity(proj.regions)) <= tol.eq_tol
    return None if full else proj


def bayes_invert(c, prior: LabeledOperator, tol: Tolerances = DEFAULT_TOL):
    """Swap the roles of the two sides of ``c`` given a prior on its conditioning side."""
    cs = as_conditional(c)
    prior = _as_state(prior)
    _require_density(prior, cs.conditioning, "prior", tol)
    rho_b = propagate(prior, cs, tol)
    x = tensor(herm_sqrt(prior, tol), support_pinv(rho_b, -0.5, tol))
    op = conjugate(cs.op, x)
    out = ConditionalState(op, cs.conditioning, cs.conditioned, cs.flavor, _support_or_none(rho_b, tol))
    return maybe_hybrid(out, tol) if isinstance(c, HybridConditional) else out


def barnum_knill_map(ch: KrausChannel, prior: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> MatrixMap:
    """``F(x) = rho_A^{1/2} E^dagger[rho_B^{-1/2} x rho_B^{-1/2}] rho_A^{1/2}`` from the Kraus form."""
    _require_density(prior, {ch.input.label}, "prior", tol)
    rho_b = apply_channel(ch, prior)
    a_half = herm_sqrt(prior, tol)
    b_mhalf = support_pinv(rho_b, -0.5, tol)

    def recover(x: LabeledOperator) -> LabeledOperator:
        return conjugate(dual_apply(ch, conjugate(x, b_mhalf)), a_half)

    return map_from_function(recover, ch.output, ch.input, "causal")


def pretty_good_measurement(ensemble: HybridConditional, prior_x, tol: Tolerances = DEFAULT_TOL) -> HybridConditional:
    """``E_x = P(x) rho^{-1/2} rho_x rho^{-1/2}`` with ``rho`` the ensemble average."""
    if ensemble.kind != "ensemble":
        raise ValidationError("pretty good measurement needs an ensemble (classical conditioning)")
    probs = _probabilities(prior_x, ensemble.classical_region.dim)
    avg = None
    for p, s in zip(probs, ensemble.components):
        avg = p * s if avg is None else avg + p * s
    m = support_pinv(avg, -0.5, tol)
    comps = [p * conjugate(s, m) for p, s in zip(probs, ensemble.components)]
    return hybrid_from_components(comps, ensemble.classical_region, "povm", ensemble.flavor, _support_or_none(avg, tol))


def _probabilities(prior, n: int) -> np.ndarray:
    if isinstance(prior, ClassicalDistribution):
        p = prior.table.ravel()
    elif isinstance(prior, LabeledOperator):
        p = extract_classical(prior).table.ravel()
    else:
        p = np.asarray(prior, dtype=float).ravel()
    if p.size != n:
        raise DimensionMismatchError(f"{p.size} probabilities for {n} classical values")
    return p


def _prob_floor(probs: np.ndarray, tol: Tolerances) -> float:
    return tol.eig_zero * max(float(np.max(probs, initial=0.0)), 1e-300)


def fuchs_posterior_states(povm: HybridConditional, prior: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> HybridConditional:
    """``rho^{1/2} E_y rho^{1/2} / Tr[E_y rho]``; zero-probability outcomes stay undefined."""
    if povm.kind != "povm":
        raise ValidationError("posterior states need a POVM (classical conditioned side)")
    _require_density(prior, povm.conditioning, "prior", tol)
    root = herm_sqrt(prior, tol)
    probs = np.array([max(float(np.real(np.trace(e.matrix @ prior.matrix))), 0.0) for e in povm.components])
    floor = _prob_floor(probs, tol)
    comps, defined = [], []
    for p, e in zip(probs, povm.components):
        ok = p > floor
        comps.append(conjugate(e, root) / p if ok else 0.0 * e)
        defined.append(ok)
    support = None if all(defined) else LabeledOperator.from_diag((povm.classical_region,), np.array(defined, float))
    return hybrid_from_components(comps, povm.classical_region, "ensemble", povm.flavor, support, defined)


# ---------------------------------------------------------------------------
# retrodiction


@dataclass(frozen=True)
class RetrodictionResult:
    retro_states: HybridConditional  # on the measured region given Y
    retro_povm: HybridConditional  # X given the prepared region
    predictive_joint: LabeledOperator  # on XY
    retrodictive_joint: LabeledOperator
    joint: ClassicalDistribution
    measured_state: LabeledOperator
    outcome_distribution: LabeledOperator

    @property
    def discrepancy(self) -> float:
        return frob_distance(self.predictive_joint, self.retrodictive_joint)


def _conditional_of_channel(channel) -> ConditionalState:
    if isinstance(channel, KrausChannel):
        return jamiolkowski_to_state(channel)
    return as_conditional(channel)


def retrodict(prior_x, ensemble: HybridConditional, povm: HybridConditional, channel=None, tol: Tolerances = DEFAULT_TOL) -> RetrodictionResult:
    """Prepare X -> A (-> B) -> measure Y, described forwards and backwards."""
    rx = _as_state(prior_x)
    rho_a = propagate(rx, ensemble, tol)
    retro_povm = bayes_invert(ensemble, rx, tol)
    if channel is None:
        if povm.conditioning != ensemble.conditioned:
            raise LabelNotFoundError("POVM must act on the prepared regions")
        rho_y = propagate(rho_a, povm, tol)
        inner = partial_trace(mul_all(povm.op, ensemble.op), ensemble.conditioned)
        pred = conjugate(inner, herm_sqrt(rx, tol))
        retro_states = bayes_invert(povm, rho_a, tol)
        inner_r = partial_trace(mul_all(retro_povm.op, retro_states.op), ensemble.conditioned)
        retro = conjugate(inner_r, herm_sqrt(rho_y, tol))
        measured = rho_a
    else:
        chan = _conditional_of_channel(channel)
        if chan.conditioning != ensemble.conditioned or povm.conditioning != chan.conditioned:
            raise LabelNotFoundError("labels must chain X -> A -> B -> Y")
        rho_b = propagate(rho_a, chan, tol)
        rho_y = propagate(rho_b, povm, tol)
        a_b = ensemble.conditioned | chan.conditioned
        inner = partial_trace(mul_all(povm.op, chan.op, ensemble.op), a_b)
        pred = conjugate(inner, herm_sqrt(rx, tol))
        chan_inv = bayes_invert(chan, rho_a, tol)
        retro_states = bayes_invert(povm, rho_b, tol)
        inner_r = partial_trace(mul_all(retro_povm.op, chan_inv.op, retro_states.op), a_b)
        retro = conjugate(inner_r, herm_sqrt(rho_y, tol))
        measured = rho_b
    x_label = ensemble.classical_label
    y_label = povm.classical_label
    joint = extract_classical(pred, tol, (x_label, y_label))
    return RetrodictionResult(retro_states, retro_povm, pred, retro, joint, measured, rho_y)


# ---------------------------------------------------------------------------
# conditioning


def condition_on_classical(h: HybridConditional, x: int) -> LabeledOperator:
    """The component ``sigma_{A|X=x}``."""
    if h.kind != "ensemble":
        raise ValidationError("conditioning on a classical value needs classical conditioning")
    if not 0 <= x < len(h.components):
        raise IndexError(f"value {x} out of range for {len(h.components)} classical values")
    if not h.defined[x]:
        raise ProbabilityZeroError(f"conditional is undefined at value {x}")
    return h.components[x]


def point_state(region, x: int) -> LabeledOperator:
    return LabeledOperator.ket_bra(region, x, x)


def jeffrey_update(c, new_marginal: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """Propagate a revised marginal through an unchanged conditional."""
    cs = as_conditional(c)
    new_marginal = _as_state(new_marginal)
    _require_density(new_marginal, cs.conditioning, "posterior marginal", tol)
    return propagate(new_marginal, cs, tol)


# ---------------------------------------------------------------------------
# steering


@dataclass(frozen=True)
class SteeringResult:
    outcome_probs: ClassicalDistribution
    steered_states: tuple  # densities on A, None where P(y) = 0
    effective_povm: tuple  # effects on A
    prior: LabeledOperator
    route_discrepancy: float

    def average(self) -> LabeledOperator:
        total = 0.0 * self.prior
        for p, s in zip(self.outcome_probs.table.ravel(), self.steered_states):
            if s is not None:
                total = total + p * s
        return total


def _acausal_joint(joint) -> JointState:
    j = JointState(joint) if isinstance(joint, LabeledOperator) else joint
    if j.flavor != "acausal":
        raise FlavorError("steering needs an acausal joint state")
    return j


def steering_ensemble(joint, povm_b: HybridConditional, tol: Tolerances = DEFAULT_TOL) -> SteeringResult:
    """States of A after measuring B, by two routes.

    Route one inverts the POVM against ``rho_B`` and pushes the resulting
    ensemble through ``rho_{A|B}``.  Route two pulls the POVM back to A
    through ``rho_{B|A}`` and inverts against ``rho_A``.
    """
    j = _acausal_joint(joint)
    b = povm_b.conditioning
    a = j.op.label_set - b
    if not b < j.op.label_set or not a:
        raise LabelNotFoundError("POVM must act on a proper subset of the joint's regions")
    rho_a, rho_b = reduce_to(j.op, a), reduce_to(j.op, b)
    probs_op = propagate(rho_b, povm_b, tol)
    probs = extract_classical(probs_op, tol).table.ravel()

    states_b = bayes_invert(povm_b, rho_b, tol)
    a_given_b = conditional_from_joint(j, b, tol)
    route1 = compose_conditionals(a_given_b, states_b, tol)

    b_given_a = conditional_from_joint(j, a, tol)
    y_given_a = compose_conditionals(povm_b, b_given_a, tol)
    route2 = bayes_invert(y_given_a, rho_a, tol)

    floor = _prob_floor(probs, tol)
    steered = tuple(comp if p > floor else None for p, comp in zip(probs, route1.components))
    gap = max(
        frob_distance(p * c1, p * c2) for p, c1, c2 in zip(probs, route1.components, route2.components)
    )
    return SteeringResult(
        ClassicalDistribution((povm_b.classical_label,), probs),
        steered,
        tuple(y_given_a.components),
        rho_a,
        gap,
    )


@dataclass(frozen=True)
class SteeringJoint:
    direct: LabeledOperator
    rightward: LabeledOperator
    leftward: LabeledOperator

    @property
    def max_discrepancy(self) -> float:
        return max(
            frob_distance(self.direct, self.rightward),
            frob_distance(self.direct, self.leftward),
            frob_distance(self.rightward, self.leftward),
        )


def steering_joint(joint, povm_a: HybridConditional, povm_b: HybridConditional, tol: Tolerances = DEFAULT_TOL) -> SteeringJoint:
    """Outcome joint of measurements on both halves of an acausal joint, three ways."""
    j = _acausal_joint(joint)
    a, b = povm_a.conditioning, povm_b.conditioning
    if a & b or (a | b) != j.op.label_set:
        raise LabelNotFoundError("the two POVMs must act on complementary regions of the joint")
    ab = a | b
    direct = partial_trace(mul_all(tensor(povm_a.op, povm_b.op), j.op), ab)

    rho_a, rho_b = reduce_to(j.op, a), reduce_to(j.op, b)
    rho_x = propagate(rho_a, povm_a, tol)
    rho_y = propagate(rho_b, povm_b, tol)
    a_given_x = bayes_invert(povm_a, rho_a, tol)
    b_given_y = bayes_invert(povm_b, rho_b, tol)
    b_given_a = conditional_from_joint(j, a, tol)
    a_given_b = conditional_from_joint(j, b, tol)

    right = partial_trace(mul_all(povm_b.op, b_given_a.op, a_given_x.op), ab)
    right = conjugate(right, herm_sqrt(rho_x, tol))
    left = partial_trace(mul_all(povm_a.op, a_given_b.op, b_given_y.op), ab)
    left = conjugate(left, herm_sqrt(rho_y, tol))
    return SteeringJoint(direct, right, left)


# ---------------------------------------------------------------------------
# measurement update rules


def projection_update(prior: LabeledOperator, effect: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """``E^{1/2} rho E^{1/2} / Tr[E rho]``."""
    out = conjugate(prior, herm_sqrt(effect, tol))
    p = out.trace().real
    if p <= tol.eig_zero:
        raise ProbabilityZeroError("effect has zero probability on the prior")
    return out / p


def conditioning_update(prior: LabeledOperator, effect: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """``rho^{1/2} E rho^{1/2} / Tr[E rho]``."""
    out = conjugate(effect, herm_sqrt(prior, tol))
    p = out.trace().real
    if p <= tol.eig_zero:
        raise ProbabilityZeroError("effect has zero probability on the prior")
    return out / p


@dataclass(frozen=True)
class UpdateDecomposition:
    nonselective: LabeledOperator  # on the output region
    conditioned: LabeledOperator  # selective output, normalized
    retro_conditioned: LabeledOperator  # input region conditioned on y
    probability: float


def update_rule_decompose(ins: Instrument, prior: LabeledOperator, y: int, tol: Tolerances = DEFAULT_TOL) -> UpdateDecomposition:
    if not 0 <= y < ins.outcome.dim:
        raise IndexError(f"outcome {y} out of range for {ins.outcome.dim} outcomes")
    upd = instrument_update(ins, prior, tol)
    nonsel = propagate(prior, instrument_channel_conditional(ins, tol), tol)
    p = float(upd.probabilities[y])
    if p <= _prob_floor(upd.probabilities, tol):
        raise ProbabilityZeroError(f"outcome {y} has zero probability")
    posts = fuchs_posterior_states(instrument_povm(ins, tol), prior, tol)
    return UpdateDecomposition(nonsel, upd.blocks[y] / p, posts.components[y], p)


@dataclass(frozen=True)
class InfoDisturbance:
    informative: bool
    disturbing: bool
    information: float
    disturbance: float


def info_disturbance_check(ins: Instrument, threshold: float = 1e-8, tol: Tolerances = DEFAULT_TOL) -> InfoDisturbance:
    """Distance of the POVM from ``{P(y) I}`` and of the channel from the identity."""
    if ins.input.dim != ins.output.dim:
        raise DimensionMismatchError("information-disturbance check needs equal input and output dimensions")
    d = ins.input.dim
    info = 0.0
    for e in instrument_povm(ins, tol).components:
        flat = e.trace() / d * LabeledOperator.identity(e.regions)
        info = max(info, frob_distance(e, flat))
    chan = instrument_channel_conditional(ins, tol)
    dist = frob_distance(chan.op, swap_conditional(ins.input, ins.output).op)
    return InfoDisturbance(info > threshold, dist > threshold, info, dist)


# ---------------------------------------------------------------------------
# alternative conditionals


def alt_conditional(joint, conditioning, n, *, fallback: str | None = None, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """``(rho_AB^{1/n} * rho_A^{-1/n})^n``; ``n = math.inf`` gives ``exp(log rho_AB - log rho_A)``.

    At ``n = inf`` a rank-deficient joint raises :class:`DomainError` unless
    ``fallback="support"``, which evaluates the exponent on the joint's support
    and warns.
    """
    j = _acausal_joint(joint)
    cond = frozenset([conditioning]) if isinstance(conditioning, str) else frozenset(conditioning)
    if not cond or not cond < j.op.label_set:
        raise LabelNotFoundError(f"conditioning {sorted(cond)} must be a proper subset of {j.op.labels}")
    rho_a = reduce_to(j.op, cond)
    if n == math.inf:
        return _cerf_adami(j.op, rho_a, fallback, tol)
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer or infinity, got {n!r}")
    n = int(n)
    if n == 1:
        return conjugate(j.op, support_pinv(rho_a, -0.5, tol))
    inner = conjugate(support_pinv(j.op, 1.0 / n, tol), support_pinv(rho_a, -0.5 / n, tol))
    return support_pinv(inner, float(n), tol)


def _cerf_adami(rho_ab: LabeledOperator, rho_a: LabeledOperator, fallback, tol: Tolerances) -> LabeledOperator:
    sp = spectrum(rho_ab, tol)
    log_a = _support_log(rho_a, tol)
    if sp.support_rank == len(sp.eigenvalues):
        if sp.eigenvalues[-1] <= 0:
            raise DomainError("joint has a non-positive eigenvalue")
        log_ab = rho_ab.with_matrix(sp.reconstruct(np.log(sp.eigenvalues)))
        gen = log_ab - log_a
        return _expm_herm(gen, tol)
    if fallback != "support":
        raise DomainError(
            f"logarithm undefined: joint has rank {sp.support_rank} < {len(sp.eigenvalues)}; "
            "pass fallback='support' to evaluate on the joint's support"
        )
    warnings.warn("joint is rank deficient; evaluating the exponent on its support", RuntimeWarning, stacklevel=3)
    v = sp.eigenvalues[: sp.support_rank]
    basis = sp.eigenvectors[:, : sp.support_rank]
    la = embed(log_a, rho_ab.regions)
    gen = np.diag(np.log(v)) - basis.conj().T @ la.matrix @ basis
    gen = 0.5 * (gen + gen.conj().T)
    lam, vec = np.linalg.eigh(gen)
    small = (vec * np.exp(lam)) @ vec.conj().T
    return rho_ab.with_matrix(basis @ small @ basis.conj().T)


def _support_log(rho: LabeledOperator, tol: Tolerances) -> LabeledOperator:
    sp = spectrum(rho, tol)
    vals = np.zeros_like(sp.eigenvalues)
    on = sp.eigenvalues > sp.cutoff
    vals[on] = np.log(sp.eigenvalues[on])
    return rho.with_matrix(sp.reconstruct(vals))


def _expm_herm(m: LabeledOperator, tol: Tolerances) -> LabeledOperator:
    h = 0.5 * (m.matrix + m.matrix.conj().T)
    lam, vec = np.linalg.eigh(h)
    return m.with_matrix((vec * np.exp(lam)) @ vec.conj().T)
