"""Conditional states, joint states, and the conversions between them.

A conditional state ``c`` carries two disjoint label sets: ``conditioned``
(the B in B|A) and ``conditioning`` (the A).  Acausal conditionals are PSD
with ``Tr_B c = I_A``; causal ones are partial transposes over A of acausal
ones.  When the conditioning marginal is rank deficient the identity is
replaced by the support projector, stored on the conditional as
``support`` (``None`` means the full identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classical import classical_blocks
from .errors import (
    ClassicalityError,
    DimensionMismatchError,
    FlavorError,
    IsometryError,
    LabelCollisionError,
    LabelNotFoundError,
    POVMError,
    StateError,
    ValidationError,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    Verdict,
    frob_distance,
    is_acausal_conditional,
    is_causal_conditional,
    is_density,
    is_psd,
    star,
    star_inv,
    support_projector,
)
from .regions import (
    LabeledOperator,
    RegionSpace,
    embed,
    partial_transpose,
    reduce_to,
    tensor,
)

FLAVORS = ("acausal", "causal")


def _labels(x) -> frozenset:
    if isinstance(x, str):
        return frozenset([x])
    if isinstance(x, RegionSpace):
        return frozenset([x.label])
    return frozenset(r.label if isinstance(r, RegionSpace) else r for r in x)


@dataclass(frozen=True)
class ConditionalState:
    op: LabeledOperator
    conditioned: frozenset
    conditioning: frozenset
    flavor: str = "acausal"
    support: LabeledOperator | None = None
    projection_residual: float = 0.0

    def __post_init__(self):
        conditioned = _labels(self.conditioned)
        conditioning = _labels(self.conditioning)
        object.__setattr__(self, "conditioned", conditioned)
        object.__setattr__(self, "conditioning", conditioning)
        if self.flavor not in FLAVORS:
            raise FlavorError(f"unknown flavor {self.flavor!r}")
        if conditioned & conditioning:
            raise LabelCollisionError(f"labels {sorted(conditioned & conditioning)} on both sides")
        if conditioned | conditioning != self.op.label_set:
            raise LabelNotFoundError(
                f"sides {sorted(conditioned)}|{sorted(conditioning)} do not cover operator labels {self.op.labels}"
            )
        if self.support is not None and self.support.label_set != conditioning:
            raise LabelNotFoundError("support projector must live on the conditioning regions")

    @property
    def conditioned_regions(self) -> tuple[RegionSpace, ...]:
        return self.op.sub_regions(self.conditioned)

    @property
    def conditioning_regions(self) -> tuple[RegionSpace, ...]:
        return self.op.sub_regions(self.conditioning)

    @property
    def classical_conditioning(self) -> bool:
        return all(r.classical for r in self.conditioning_regions)

    def support_op(self) -> LabeledOperator:
        """Expected value of ``Tr_conditioned(op)``."""
        if self.support is not None:
            return self.support
        return LabeledOperator.identity(self.conditioning_regions)

    def acausal_support(self) -> LabeledOperator:
        """Support projector on the conditioning regions in the acausal frame."""
        s = self.support_op()
        return s if self.flavor == "acausal" else partial_transpose(s, self.conditioning)

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> Verdict:
        check = is_acausal_conditional if self.flavor == "acausal" else is_causal_conditional
        return check(self.op, self.conditioning, tol, self.support)

    def check(self, tol: Tolerances = DEFAULT_TOL) -> "ConditionalState":
        v = self.validate(tol)
        if not v:
            raise ValidationError(f"invalid {self.flavor} conditional: {v.reason}")
        return self

    def with_flavor(self, flavor: str) -> "ConditionalState":
        """Reinterpret; only legitimate when the conditioning side is classical."""
        if flavor == self.flavor:
            return self
        if not self.classical_conditioning:
            raise FlavorError("changing flavor of a conditional with quantum conditioning regions")
        return ConditionalState(self.op, self.conditioned, self.conditioning, flavor, self.support)

    def flipped(self) -> "ConditionalState":
        """Partial transpose over the conditioning regions, swapping flavor."""
        other = "causal" if self.flavor == "acausal" else "acausal"
        supp = None if self.support is None else partial_transpose(self.support, self.conditioning)
        return ConditionalState(
            partial_transpose(self.op, self.conditioning), self.conditioned, self.conditioning, other, supp
        )


@dataclass(frozen=True)
class JointState:
    op: LabeledOperator
    flavor: str = "acausal"
    causal_pair: tuple[frozenset, frozenset] | None = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise FlavorError(f"unknown flavor {self.flavor!r}")
        if self.flavor == "causal":
            if self.causal_pair is None:
                raise FlavorError("a causal joint state needs its (input, output) labels")
            inp, out = _labels(self.causal_pair[0]), _labels(self.causal_pair[1])
            if inp & out or (inp | out) != self.op.label_set:
                raise LabelNotFoundError("causal pair must partition the joint's labels")
            object.__setattr__(self, "causal_pair", (inp, out))

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> Verdict:
        if self.flavor == "acausal":
            return is_density(self.op, tol)
        return is_density(partial_transpose(self.op, self.causal_pair[0]), tol)

    def check(self, tol: Tolerances = DEFAULT_TOL) -> "JointState":
        v = self.validate(tol)
        if not v:
            raise StateError(f"invalid {self.flavor} joint state: {v.reason}")
        return self

    def marginal(self, labels) -> LabeledOperator:
        return reduce_to(self.op, _labels(labels))


# ---------------------------------------------------------------------------
# hybrids


@dataclass(frozen=True)
class HybridConditional:
    """Conditional with exactly one classical side.

    ``kind == "ensemble"``: classical conditioning, components are states.
    ``kind == "povm"``: classical conditioned, components are effects.
    ``defined[x]`` is False where the conditional is undefined (zero-probability
    conditioning value); those components are zero operators.
    """

    base: ConditionalState
    classical_label: str
    kind: str
    components: tuple[LabeledOperator, ...]
    defined: tuple[bool, ...] = field(default=())

    @property
    def op(self) -> LabeledOperator:
        return self.base.op

    @property
    def conditioned(self):
        return self.base.conditioned

    @property
    def conditioning(self):
        return self.base.conditioning

    @property
    def flavor(self):
        return self.base.flavor

    @property
    def quantum_regions(self) -> tuple[RegionSpace, ...]:
        return self.components[0].regions

    @property
    def classical_region(self) -> RegionSpace:
        return self.base.op.region(self.classical_label)

    def __len__(self):
        return len(self.components)

    @classmethod
    def from_base(cls, c: ConditionalState, tol: Tolerances = DEFAULT_TOL) -> "HybridConditional":
        if len(c.conditioning) == 1 and c.classical_conditioning:
            label, kind = next(iter(c.conditioning)), "ensemble"
        elif len(c.conditioned) == 1 and all(r.classical for r in c.conditioned_regions):
            label, kind = next(iter(c.conditioned)), "povm"
        else:
            raise ClassicalityError("a hybrid conditional needs a single classical region on one side")
        comps = tuple(classical_blocks(c.op, label, tol))
        if kind == "ensemble":
            supp = np.real(np.diag(c.support_op().matrix))
            defined = tuple(bool(s > 0.5) for s in supp)
        else:
            defined = tuple(True for _ in comps)
        return cls(c, label, kind, comps, defined)

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> Verdict:
        """Both flavor checks plus the per-component structure."""
        for flavor in FLAVORS:
            v = ConditionalState(self.op, self.conditioned, self.conditioning, flavor, self.base.support).validate(tol)
            if not v:
                return Verdict(False, f"{flavor} check: {v.reason}")
        if self.kind == "ensemble":
            for x, (comp, ok) in enumerate(zip(self.components, self.defined)):
                if ok:
                    v = is_density(comp, tol)
                    if not v:
                        return Verdict(False, f"component {x}: {v.reason}")
        return Verdict(True)


def as_conditional(c) -> ConditionalState:
    return c.base if isinstance(c, HybridConditional) else c


def maybe_hybrid(c: ConditionalState, tol: Tolerances = DEFAULT_TOL):
    """Wrap as a :class:`HybridConditional` when one side is a single classical region."""
    try:
        return HybridConditional.from_base(c, tol)
    except ClassicalityError:
        return c


def _classical_region(label, dim: int) -> RegionSpace:
    if isinstance(label, RegionSpace):
        if label.dim != dim:
            raise DimensionMismatchError(f"classical region {label.label!r} has dim {label.dim}, need {dim}")
        return RegionSpace(label.label, label.dim, True)
    return RegionSpace(label, dim, True)


def _hybrid_op(classical: RegionSpace, comps: Sequence[LabeledOperator]) -> LabeledOperator:
    total = None
    for x, comp in enumerate(comps):
        if comp.labels != comps[0].labels or comp.dims != comps[0].dims:
            raise DimensionMismatchError("all components must live on the same regions")
        term = tensor(LabeledOperator.ket_bra(classical, x, x), comp)
        total = term if total is None else total + term
    return total


def hybrid_from_components(
    components: Sequence[LabeledOperator],
    classical,
    kind: str,
    flavor: str = "causal",
    support: LabeledOperator | None = None,
    defined: Sequence[bool] | None = None,
) -> HybridConditional:
    """Assemble a hybrid from blocks without validating them.

    Used for computed outputs (e.g. Bayes inversions) whose support may be a
    proper subspace.
    """
    comps = tuple(components)
    x = _classical_region(classical, len(comps))
    op = _hybrid_op(x, comps)
    q = comps[0].label_set
    if kind == "povm":
        base = ConditionalState(op, {x.label}, q, flavor, support)
    elif kind == "ensemble":
        base = ConditionalState(op, q, {x.label}, flavor, support)
    else:
        raise ValueError(f"unknown hybrid kind {kind!r}")
    if defined is None:
        defined = tuple(True for _ in comps)
    return HybridConditional(base, x.label, kind, comps, tuple(bool(d) for d in defined))


def povm_to_conditional(
    povm: Sequence[LabeledOperator], outcome_label, tol: Tolerances = DEFAULT_TOL, flavor: str = "causal"
) -> HybridConditional:
    """``sum_y |y><y|_Y (x) E_y``.

    Valid in both flavors; ``causal`` is the default because measurement
    outcomes are usually downstream of the measured region.
    """
    povm = list(povm)
    if not povm:
        raise POVMError("empty POVM")
    y = _classical_region(outcome_label, len(povm))
    for i, e in enumerate(povm):
        if y.label in e.label_set:
            raise LabelCollisionError(f"outcome label {y.label!r} clashes with effect regions")
        v = is_psd(e, tol)
        if not v:
            raise POVMError(f"effect {i}: {v.reason}")
    total = povm[0]
    for e in povm[1:]:
        total = total + e
    err = frob_distance(total, LabeledOperator.identity(total.regions))
    if err > tol.eq_tol:
        raise POVMError(f"effects sum to identity only within {err:.3g}")
    op = _hybrid_op(y, povm)
    base = ConditionalState(op, {y.label}, povm[0].label_set, flavor)
    return HybridConditional(base, y.label, "povm", tuple(povm), tuple(True for _ in povm))


def ensemble_to_conditional(
    states: Sequence[LabeledOperator], value_label, tol: Tolerances = DEFAULT_TOL, flavor: str = "causal"
) -> HybridConditional:
    """``sum_x |x><x|_X (x) rho_x``; each member must be a density."""
    states = list(states)
    if not states:
        raise StateError("empty ensemble")
    x = _classical_region(value_label, len(states))
    for i, s in enumerate(states):
        if x.label in s.label_set:
            raise LabelCollisionError(f"value label {x.label!r} clashes with state regions")
        v = is_density(s, tol)
        if not v:
            raise StateError(f"ensemble member {i}: {v.reason}")
    op = _hybrid_op(x, states)
    base = ConditionalState(op, states[0].label_set, {x.label}, flavor)
    return HybridConditional(base, x.label, "ensemble", tuple(states), tuple(True for _ in states))


def hybrid_components(h) -> tuple[LabeledOperator, ...]:
    if isinstance(h, HybridConditional):
        return h.components
    return HybridConditional.from_base(h).components


# ---------------------------------------------------------------------------
# joint <-> conditional


def _projection_residual(joint: LabeledOperator, proj: LabeledOperator) -> float:
    p = embed(proj, joint.regions)
    return float(np.linalg.norm(p.matrix @ joint.matrix @ p.matrix - joint.matrix))


def conditional_from_joint(
    j: JointState | LabeledOperator, conditioning, tol: Tolerances = DEFAULT_TOL
) -> ConditionalState:
    """``c = joint * marginal^{-1}`` with the inverse taken on the marginal's support."""
    if isinstance(j, LabeledOperator):
        j = JointState(j)
    conditioning = _labels(conditioning)
    if not conditioning or not conditioning < j.op.label_set:
        raise LabelNotFoundError(f"conditioning {sorted(conditioning)} must be a proper subset of {j.op.labels}")
    if j.flavor == "causal" and conditioning != j.causal_pair[0]:
        raise FlavorError("a causal joint can only be conditioned on its input regions")
    marg = reduce_to(j.op, conditioning)
    proj = support_projector(marg, tol)
    op = star_inv(j.op, marg, tol)
    full_rank = frob_distance(proj, LabeledOperator.identity(proj.regions)) <= tol.eq_tol
    return ConditionalState(
        op,
        j.op.label_set - conditioning,
        conditioning,
        j.flavor,
        None if full_rank else proj,
        _projection_residual(j.op, proj),
    )


def joint_from_conditional(c, marginal: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> JointState:
    """``joint = c * marginal``; the flavor follows the conditional."""
    c = as_conditional(c)
    if marginal.label_set != c.conditioning:
        raise LabelNotFoundError(f"marginal on {marginal.labels} does not match conditioning {sorted(c.conditioning)}")
    v = is_density(marginal, tol)
    if not v:
        raise StateError(f"marginal is not a density: {v.reason}")
    op = star(c.op, marginal, tol)
    if c.flavor == "causal":
        return JointState(op, "causal", (c.conditioning, c.conditioned))
    return JointState(op, "acausal")


@dataclass(frozen=True)
class ChainDecomposition:
    order: tuple[str, ...]
    marginal: LabeledOperator
    conditionals: tuple[ConditionalState, ...]  # rho_{A2|A1}, rho_{A3|A1A2}, ...

    def recompose(self, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
        """Right-to-left evaluation: ``c_n * (... * (c_2 * marginal))``."""
        cur = self.marginal
        for c in self.conditionals:
            cur = star(c.op, cur, tol)
        return cur


def chain_decompose(j: JointState | LabeledOperator, order: Sequence[str], tol: Tolerances = DEFAULT_TOL) -> ChainDecomposition:
    if isinstance(j, LabeledOperator):
        j = JointState(j)
    if j.flavor != "acausal":
        raise FlavorError("chain decomposition is defined for acausal joints")
    order = tuple(order)
    if sorted(order) != sorted(j.op.labels):
        raise LabelNotFoundError(f"order {order} is not a permutation of {j.op.labels}")
    conds = []
    for k in range(len(order), 1, -1):
        marg_k = reduce_to(j.op, order[:k])
        conds.append(conditional_from_joint(marg_k, order[: k - 1], tol))
    marginal = reduce_to(j.op, order[:1])
    return ChainDecomposition(order, marginal, tuple(reversed(conds)))


def pure_conditional_from_isometry(
    u,
    input_region: RegionSpace,
    output_region: RegionSpace,
    basis_note: str = "computational",
    tol: Tolerances = DEFAULT_TOL,
) -> ConditionalState:
    """``|psi>_{B|A} = sum_j |j>_A (x) U|j>_B`` as a rank-one acausal conditional."""
    u = np.asarray(u, dtype=np.complex128)
    da, db = input_region.dim, output_region.dim
    if db < da:
        raise DimensionMismatchError(f"no pure conditional from dim {da} into smaller dim {db}")
    if u.shape != (db, da):
        raise DimensionMismatchError(f"isometry shape {u.shape}, expected {(db, da)}")
    err = float(np.linalg.norm(u.conj().T @ u - np.eye(da)))
    if err > tol.eq_tol:
        raise IsometryError(f"u^dagger u differs from identity by {err:.3g}")
    # basis vector ordering: input (A) digit then output (B) digit
    psi = np.zeros((da, db), dtype=np.complex128)
    for j in range(da):
        psi[j, :] = u[:, j]
    vec = psi.reshape(-1)
    op = LabeledOperator((input_region, output_region), np.outer(vec, vec.conj()))
    return ConditionalState(op, {output_region.label}, {input_region.label}, "acausal")
