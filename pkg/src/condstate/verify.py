"""Property suites behind ``condstate verify``.

Every suite is a function ``(seed, count, tol) -> list[Check]``.  A check
aggregates one property over all generated instances: ``value`` is the worst
case seen and ``detail`` records how many instances passed.  Suites draw from
their own PCG64 stream seeded with ``seed`` so results do not depend on which
other suites ran.
"""

from __future__ import annotations

import itertools
import math
import warnings
from typing import Callable

import numpy as np

from . import sampling
from .bayes import (
    alt_conditional,
    barnum_knill_map,
    bayes_invert,
    fuchs_posterior_states,
    info_disturbance_check,
    jeffrey_update,
    pretty_good_measurement,
    retrodict,
    steering_ensemble,
    steering_joint,
)
from .channels import (
    Instrument,
    KrausChannel,
    apply_channel,
    apply_map,
    choi_operator,
    compose_conditionals,
    dual_apply,
    jamiolkowski_to_map,
    jamiolkowski_to_state,
    propagate,
)
from .classical import (
    ClassicalConditionalTable,
    embed_classical,
    oracle_bayes,
    oracle_compose,
    oracle_conditional,
    oracle_jeffrey,
    oracle_propagate,
)
from .conditionals import (
    JointState,
    conditional_from_joint,
    ensemble_to_conditional,
    hybrid_from_components,
    povm_to_conditional,
)
from .limits import mixed_causal, w_state_chain_rule
from .linalg import DEFAULT_TOL, Tolerances, conjugate, frob_distance, support_pinv
from .regions import LabeledOperator, RegionSpace, partial_transpose, reduce_to
from .scenario import Check, check_gt, check_le

DEFAULT_COUNTS = {
    "jamiolkowski": 150,
    "retrodiction": 100,
    "steering": 100,
    "classical": 495,
    "info-disturbance": 500,
    "limitations": 1,
    "barnum-knill": 50,
    "pgm": 50,
    "duality": 200,
    "alt-conditionals": 50,
    "bayes": 50,
}


class _Worst:
    """Running maximum plus pass count for one aggregated check."""

    def __init__(self, name: str, threshold: float):
        self.name, self.threshold = name, threshold
        self.value = 0.0
        self.n = self.ok = 0

    def add(self, v: float):
        v = float(v)
        self.n += 1
        self.ok += v <= self.threshold
        self.value = max(self.value, v)

    def check(self) -> Check:
        return Check(self.name, self.ok == self.n, self.value, self.threshold, f"{self.ok}/{self.n} passed")


def _matrix_units(r: RegionSpace):
    for j in range(r.dim):
        for k in range(r.dim):
            yield LabeledOperator.ket_bra(r, j, k)


# ---------------------------------------------------------------------------
# channels


JAMIOLKOWSKI_DIMS = ((2, 2), (2, 3), (3, 2))


def suite_jamiolkowski(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    s2m2s = _Worst("jamiolkowski-state-map-state-round-trip", 1e-10)
    m2s2m = _Worst("jamiolkowski-map-state-map-on-matrix-units", 1e-10)
    causal = _Worst("cpt-channel-image-is-causal-conditional", 0.0)
    choi = _Worst("choi-equals-partial-transpose-of-jamiolkowski", 1e-10)
    for i in range(count):
        din, dout = JAMIOLKOWSKI_DIMS[i % len(JAMIOLKOWSKI_DIMS)]
        a, b = RegionSpace("A", din), RegionSpace("B", dout)
        ch = sampling.random_channel(g, a, b)
        c = jamiolkowski_to_state(ch, tol)
        m = jamiolkowski_to_map(c)
        s2m2s.add(frob_distance(jamiolkowski_to_state(m, tol).op, c.op))
        m2s2m.add(max(frob_distance(apply_map(m, u), apply_channel(ch, u)) for u in _matrix_units(a)))
        causal.add(0.0 if c.validate(tol) else 1.0)
        choi.add(frob_distance(partial_transpose(choi_operator(ch), {"A"}), c.op))
    return [s2m2s.check(), m2s2m.check(), causal.check(), choi.check()]


def suite_duality(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    w = _Worst("schrodinger-heisenberg-duality", 1e-10)
    unital = _Worst("dual-of-cpt-map-is-unital", 1e-10)
    for i in range(count):
        din, dout = int(g.integers(2, 4)), int(g.integers(2, 4))
        a, b = RegionSpace("A", din), RegionSpace("B", dout)
        ch = sampling.random_channel(g, a, b)
        rho = sampling.random_density(g, a)
        e = sampling.random_povm_ops(g, b, 2)[0]
        lhs = np.trace(e.matrix @ apply_channel(ch, rho).matrix)
        rhs = np.trace(dual_apply(ch, e).matrix @ rho.matrix)
        w.add(abs(lhs - rhs))
        unital.add(frob_distance(dual_apply(ch, LabeledOperator.identity((b,))), LabeledOperator.identity((a,))))
    return [w.check(), unital.check()]


# ---------------------------------------------------------------------------
# inversion and inference


def _random_prepare_measure(g, with_channel: bool):
    nx, da, ny = (int(v) for v in g.integers(2, 4, size=3))
    x = RegionSpace("X", nx, True)
    a = RegionSpace("A", da)
    y = RegionSpace("Y", ny, True)
    px = LabeledOperator.from_diag((x,), sampling.random_probabilities(g, nx))
    ens = ensemble_to_conditional([sampling.random_density(g, a) for _ in range(nx)], x)
    if with_channel:
        b = RegionSpace("B", int(g.integers(2, 4)))
        ch = sampling.random_channel(g, a, b)
        povm = povm_to_conditional(sampling.random_povm_ops(g, b, ny), y)
        return px, ens, povm, ch
    povm = povm_to_conditional(sampling.random_povm_ops(g, a, ny), y)
    return px, ens, povm, None


def suite_retrodiction(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    eq = _Worst("predictive-equals-retrodictive-joint", 1e-8)
    reduced = _Worst("intervening-channel-reduces-to-composed-povm", 1e-8)
    for i in range(count):
        px, ens, povm, ch = _random_prepare_measure(g, with_channel=bool(i % 2))
        res = retrodict(px, ens, povm, ch, tol)
        eq.add(res.discrepancy)
        if ch is not None:
            pulled = compose_conditionals(povm, jamiolkowski_to_state(ch, tol), tol)
            short = retrodict(px, ens, pulled, None, tol)
            reduced.add(frob_distance(short.predictive_joint, res.predictive_joint))
    return [eq.check(), reduced.check()]


def _random_epr_instance(g):
    da, db = (int(v) for v in g.integers(2, 4, size=2))
    nx, ny = (int(v) for v in g.integers(2, 4, size=2))
    a, b = RegionSpace("A", da), RegionSpace("B", db)
    joint = sampling.random_density(g, (a, b))
    povm_a = povm_to_conditional(sampling.random_povm_ops(g, a, nx), RegionSpace("X", nx, True))
    povm_b = povm_to_conditional(sampling.random_povm_ops(g, b, ny), RegionSpace("Y", ny, True))
    return joint, povm_a, povm_b


def suite_steering(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    three = _Worst("steering-rightward-leftward-direct-agree", 1e-8)
    routes = _Worst("steering-bayes-then-propagate-equals-propagate-then-bayes", 1e-8)
    avg = _Worst("steered-ensemble-average-equals-prior", 1e-10)
    for _ in range(count):
        joint, povm_a, povm_b = _random_epr_instance(g)
        three.add(steering_joint(joint, povm_a, povm_b, tol).max_discrepancy)
        res = steering_ensemble(joint, povm_b, tol)
        routes.add(res.route_discrepancy)
        avg.add(frob_distance(res.average(), res.prior))
    return [three.check(), routes.check(), avg.check()]


def suite_bayes(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    w = _Worst("double-bayes-inversion-recovers-conditional", 1e-8)
    for _ in range(count):
        a, b = RegionSpace("A", int(g.integers(2, 4))), RegionSpace("B", int(g.integers(2, 4)))
        c = jamiolkowski_to_state(sampling.random_channel(g, a, b), tol)
        prior = sampling.random_density(g, a)
        back = bayes_invert(bayes_invert(c, prior, tol), propagate(prior, c, tol), tol)
        w.add(frob_distance(back.op, c.op))
    return [w.check()]


def suite_barnum_knill(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    eq = _Worst("barnum-knill-equals-bayes-inverse", 1e-9)
    unitary = _Worst("unitary-recovery-undoes-channel", 1e-8)
    for _ in range(count):
        a, b = RegionSpace("A", int(g.integers(2, 4))), RegionSpace("B", int(g.integers(2, 4)))
        ch = sampling.random_channel(g, a, b)
        prior = sampling.random_density(g, a)
        bk = barnum_knill_map(ch, prior, tol)
        inv = bayes_invert(jamiolkowski_to_state(ch, tol), prior, tol)
        eq.add(frob_distance(jamiolkowski_to_state(bk, tol).op, inv.op))

        u_out = RegionSpace("B", a.dim)
        uch = KrausChannel.unitary(sampling.random_unitary(g, a.dim), a, u_out)
        rec = barnum_knill_map(uch, sampling.random_density(g, a), tol)
        unitary.add(max(frob_distance(apply_map(rec, apply_channel(uch, x)), x) for x in _matrix_units(a)))
    return [eq.check(), unitary.check()]


def suite_pgm(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    complete = _Worst("pgm-sums-to-support-projector", 1e-10)
    bayes = _Worst("pgm-equals-hybrid-bayes-inverse", 1e-10)
    for _ in range(count):
        n, d = int(g.integers(2, 5)), int(g.integers(2, 4))
        a, x = RegionSpace("A", d), RegionSpace("X", n, True)
        probs = sampling.random_probabilities(g, n)
        rank = int(g.integers(1, d + 1))
        ens = ensemble_to_conditional([sampling.random_density(g, a, rank) for _ in range(n)], x)
        pgm = pretty_good_measurement(ens, probs, tol)
        avg = propagate(LabeledOperator.from_diag((x,), probs), ens, tol)
        total = sum(pgm.components[1:], pgm.components[0])
        complete.add(frob_distance(total, support_pinv(avg, 0, tol)))
        inv = bayes_invert(ens, LabeledOperator.from_diag((x,), probs), tol)
        bayes.add(frob_distance(pgm.op, inv.op))
    return [complete.check(), bayes.check()]


# ---------------------------------------------------------------------------
# information and disturbance


def _sweep_instrument(g, i: int, y: RegionSpace, a: RegionSpace, b: RegionSpace) -> Instrument:
    """Cycle through generic, outcome-independent unitary, and trivial instruments.

    Generic draws are almost surely informative and disturbing, so the other
    two families make sure the sweep also visits the uninformative verdicts.
    """
    kind = i % 3
    if kind == 0:
        return sampling.random_instrument(g, y, a, b)
    w = np.sqrt(sampling.random_probabilities(g, y.dim))
    u = sampling.random_unitary(g, a.dim) if kind == 1 else np.eye(a.dim)
    return Instrument(y, a, b, tuple((wy * u,) for wy in w))


def suite_info_disturbance(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    a, b, y = RegionSpace("A", 2), RegionSpace("B", 2), RegionSpace("Y", 2, True)
    violations = 0
    counts = {(True, True): 0, (True, False): 0, (False, True): 0, (False, False): 0}
    for i in range(count):
        ins = _sweep_instrument(g, i, y, a, b)
        r = info_disturbance_check(ins, 1e-8, tol)
        counts[(r.informative, r.disturbing)] += 1
        violations += r.informative and not r.disturbing
    detail = ", ".join(f"informative={k[0]} disturbing={k[1]}: {v}" for k, v in counts.items())
    return [Check("no-information-gain-without-disturbance", violations == 0, float(violations), 0.0, detail)]


# ---------------------------------------------------------------------------
# breakdowns of the calculus


def suite_limitations(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    w = w_state_chain_rule(tol)
    checks = [check_gt("w-state-conditional-chain-rule-fails", w.distance, 1e-3)]
    for d in range(2, 2 + max(1, count)):
        mc = mixed_causal(d, tol)
        sfx = f"-d{d}"
        checks += [
            check_le("mixed-causal-star-product-closed-form" + sfx, mc.star_error, 1e-10),
            check_le("mixed-causal-plain-product-closed-form" + sfx, mc.product_closed_form_error, 1e-10),
            check_le("mixed-causal-plain-product-keeps-marginals" + sfx, max(mc.product_marginal_errors.values()), 1e-10),
            check_gt("mixed-causal-plain-product-not-hermitian" + sfx, mc.hermiticity_defect, 0.1),
            check_gt("mixed-causal-star-product-loses-a-marginal" + sfx, max(mc.star_marginals.values()), 1e-3),
        ]
    return checks


# ---------------------------------------------------------------------------
# alternative conditionals


def commuting_joint(g, da: int, db: int) -> LabeledOperator:
    """``(U_A (x) U_B) diag(p) (U_A (x) U_B)^dagger``: commutes with ``rho_A (x) I``."""
    a, b = RegionSpace("A", da), RegionSpace("B", db)
    p = sampling.random_probabilities(g, da * db)
    u = np.kron(sampling.random_unitary(g, da), sampling.random_unitary(g, db))
    return LabeledOperator((a, b), (u * p) @ u.conj().T)


def suite_alt_conditionals(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    g = sampling.rng(seed)
    n1 = _Worst("alt-conditional-n1-equals-standard-conditional", 1e-10)
    comm = _Worst("alt-conditionals-agree-for-commuting-joint", 1e-9)
    step = _Worst("alt-conditional-n2-matches-stepwise-formula", 1e-10)
    for _ in range(count):
        da, db = (int(v) for v in g.integers(2, 4, size=2))
        joint = sampling.random_density(g, (RegionSpace("A", da), RegionSpace("B", db)))
        std = conditional_from_joint(joint, {"A"}, tol).op
        n1.add(frob_distance(alt_conditional(joint, "A", 1, tol=tol), std))

        rho_a = reduce_to(joint, {"A"})
        root = support_pinv(joint, 0.5, tol)
        inner = conjugate(root, support_pinv(rho_a, -0.25, tol))
        step.add(frob_distance(alt_conditional(joint, "A", 2, tol=tol), inner @ inner))

        cj = commuting_joint(g, da, db)
        outs = [alt_conditional(cj, "A", n, tol=tol) for n in (1, 2, 3, math.inf)]
        comm.add(max(frob_distance(outs[0], o) for o in outs[1:]))
    return [n1.check(), comm.check(), step.check()]


# ---------------------------------------------------------------------------
# classical oracle


def dyadic_grid(side: int = 3, quanta: int = 4) -> list[np.ndarray]:
    """Every ``side x side`` table with entries in ``{0, 1/quanta, ..., 1}`` summing to one."""
    cells = side * side
    out = []
    for bars in itertools.combinations(range(quanta + cells - 1), cells - 1):
        edges = (-1,) + bars + (quanta + cells - 1,)
        counts = [edges[i + 1] - edges[i] - 1 for i in range(cells)]
        out.append(np.array(counts, dtype=float).reshape(side, side) / quanta)
    return out


def _diag_op(table: np.ndarray, labels) -> LabeledOperator:
    regs = tuple(RegionSpace(lab, n, True) for lab, n in zip(labels, table.shape))
    return LabeledOperator.from_diag(regs, table.ravel())


def _cond_from_sr(cond_sr: np.ndarray, defined: np.ndarray, of: str, given: str):
    return embed_classical(ClassicalConditionalTable((of,), (given,), cond_sr, defined))


def _filled(cond_sr: np.ndarray, defined: np.ndarray) -> np.ndarray:
    """Give undefined columns a point mass so the table becomes a channel."""
    out = cond_sr.copy()
    out[0, ~defined] = 1.0
    return out


def classical_errors(t: np.ndarray, other: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> dict[str, float]:
    """Embedded-operator error against plain-array arithmetic for one joint table ``t[r, s]``.

    ``other`` supplies a second table for composition and Jeffrey updates.
    """
    err = {}
    p_r = t.sum(axis=1)
    joint = JointState(_diag_op(t, "RS"))
    cond_sr, defined = oracle_conditional(t, 1)  # axes [s, r]
    cond = _cond_from_sr(cond_sr, defined, "S", "R")

    lib = conditional_from_joint(joint, {"R"}, tol)
    err["conditional"] = max(frob_distance(lib.op, cond.op), frob_distance(lib.support_op(), cond.support_op()))

    prior = _diag_op(p_r, "R")
    err["propagate"] = frob_distance(propagate(prior, cond, tol), _diag_op(oracle_propagate(cond_sr, p_r), "S"))

    inv_rs, inv_def = oracle_bayes(cond_sr, p_r)
    oracle_inv = _cond_from_sr(inv_rs, inv_def, "R", "S")
    err["bayes-invert"] = frob_distance(bayes_invert(cond, prior, tol).op, oracle_inv.op)

    later_ts, later_def = oracle_conditional(other, 1)
    later = _cond_from_sr(later_ts, later_def, "T", "S")
    err["compose"] = frob_distance(compose_conditionals(later, cond, tol).op, _diag_op(oracle_compose(later_ts, cond_sr), "TR"))

    p_post = other.sum(axis=0)
    err["jeffrey"] = frob_distance(jeffrey_update(cond, _diag_op(p_post, "R"), tol), _diag_op(oracle_jeffrey(cond_sr, p_post), "S"))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        err["alt-conditionals"] = max(
            frob_distance(alt_conditional(joint, "R", n, fallback="support", tol=tol), cond.op)
            for n in (1, 2, 3, math.inf)
        )

    r_reg, s_reg = RegionSpace("R", 3, True), RegionSpace("S", 3, True)
    comps = [_diag_op(cond_sr[:, r], "S") for r in range(3)]
    ens = hybrid_from_components(comps, r_reg, "ensemble", "acausal", cond.support, tuple(defined))
    err["pretty-good-measurement"] = frob_distance(pretty_good_measurement(ens, p_r, tol).op, oracle_inv.op)

    effects = [_diag_op(cond_sr[s], "R") for s in range(3)]
    povm = hybrid_from_components(effects, s_reg, "povm", "causal")
    post = fuchs_posterior_states(povm, prior, tol)
    err["posterior-states"] = frob_distance(post.op, oracle_inv.op)

    # retrodiction: R -> S -> T
    ens_rs = hybrid_from_components(comps, r_reg, "ensemble", "causal", cond.support, tuple(defined))
    meas_ts = _filled(later_ts, later_def)
    povm_t = hybrid_from_components([_diag_op(meas_ts[k], "S") for k in range(3)], RegionSpace("T", 3, True), "povm")
    res = retrodict(prior, ens_rs, povm_t, None, tol)
    want = (meas_ts @ (cond_sr * p_r[None, :])).T  # [r, t]
    err["retrodiction"] = max(float(np.max(np.abs(res.joint.table - want))), res.discrepancy)

    # steering: measure S of the joint with P(T|S)
    st = steering_ensemble(joint, povm_t, tol)
    joint_rt = t @ meas_ts.T
    p_t = joint_rt.sum(axis=0)
    st_err = float(np.max(np.abs(st.outcome_probs.table - p_t)))
    for k, s in enumerate(st.steered_states):
        if p_t[k] > 0:
            st_err = max(st_err, frob_distance(s, _diag_op(joint_rt[:, k] / p_t[k], "R")))
    err["steering"] = st_err

    # Barnum-Knill recovery of the classical channel
    full = _filled(cond_sr, defined)
    kraus = []
    for r in range(3):
        for s in range(3):
            if full[s, r] > 0:
                k = np.zeros((3, 3))
                k[s, r] = math.sqrt(full[s, r])
                kraus.append(k)
    ch = KrausChannel(r_reg, s_reg, tuple(kraus))
    bk = jamiolkowski_to_state(barnum_knill_map(ch, prior, tol), tol)
    err["barnum-knill"] = frob_distance(bk.op, oracle_inv.op)
    return err


def suite_classical(seed: int, count: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    grid = dyadic_grid()
    order = np.arange(len(grid))
    if count < len(grid):
        order = sampling.rng(seed).permutation(len(grid))[:count]
    worst: dict[str, _Worst] = {}
    for i in order:
        errs = classical_errors(grid[i], grid[(i + 1) % len(grid)], tol)
        for k, v in errs.items():
            worst.setdefault(k, _Worst(f"classical-oracle-{k}", 1e-12)).add(v)
    return [w.check() for w in worst.values()]


SUITES: dict[str, Callable[[int, int, Tolerances], list[Check]]] = {
    "jamiolkowski": suite_jamiolkowski,
    "retrodiction": suite_retrodiction,
    "steering": suite_steering,
    "classical": suite_classical,
    "info-disturbance": suite_info_disturbance,
    "limitations": suite_limitations,
    "barnum-knill": suite_barnum_knill,
    "pgm": suite_pgm,
    "duality": suite_duality,
    "alt-conditionals": suite_alt_conditionals,
    "bayes": suite_bayes,
}


def run_suites(names=None, seed: int = 0, count: int | None = None, tol: Tolerances = DEFAULT_TOL) -> dict[str, list[Check]]:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; available: {', '.join(SUITES)}")
    return {n: SUITES[n](seed, DEFAULT_COUNTS[n] if count is None else count, tol) for n in names}
