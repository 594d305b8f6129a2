"""Channels, the Jamiolkowski isomorphism, propagation, and instruments.

Jamiolkowski convention: for a linear map E from A to B,

    J(E) = sum_{jk} |j><k|_A (x) E(|k><j|)          (entries: <j b|J|k b'>)

so that ``(E (x) id_C)(M_AC) = Tr_A[J(E) M_AC]``.  The identity channel maps
to the swap operator, and a CPT map lands on a causal conditional.  The Choi
operator (built on the unnormalized maximally entangled projector) is the
partial transpose of J over A.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .conditionals import (
    ConditionalState,
    HybridConditional,
    as_conditional,
    maybe_hybrid,
    povm_to_conditional,
)
from .classical import classical_blocks
from .errors import (
    ChannelError,
    DimensionMismatchError,
    FlavorError,
    LabelCollisionError,
    LabelNotFoundError,
    StateError,
)
from .linalg import DEFAULT_TOL, Tolerances, frob_distance, herm_sqrt, is_density
from .regions import (
    LabeledOperator,
    RegionSpace,
    merge_regions,
    padded_mul,
    partial_trace,
    tensor,
)


def _check_kraus(kraus, din: int, dout: int) -> tuple[np.ndarray, ...]:
    ks = tuple(np.array(k, dtype=np.complex128) for k in kraus)
    if not ks:
        raise ChannelError("empty Kraus collection")
    for i, k in enumerate(ks):
        if k.shape != (dout, din):
            raise DimensionMismatchError(f"Kraus operator {i} has shape {k.shape}, expected {(dout, din)}")
        k.flags.writeable = False
    return ks


def kraus_gram(kraus) -> np.ndarray:
    """``sum_mu K_mu^dagger K_mu``."""
    return sum(k.conj().T @ k for k in kraus)


@dataclass(frozen=True)
class KrausChannel:
    input: RegionSpace
    output: RegionSpace
    kraus: tuple

    def __post_init__(self):
        object.__setattr__(self, "kraus", _check_kraus(self.kraus, self.input.dim, self.output.dim))

    def tp_defect(self) -> float:
        return float(np.linalg.norm(kraus_gram(self.kraus) - np.eye(self.input.dim)))

    def is_cptp(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        return self.tp_defect() <= tol.eq_tol

    def adjoint_kraus(self) -> tuple[np.ndarray, ...]:
        return tuple(k.conj().T for k in self.kraus)

    @classmethod
    def unitary(cls, u, input: RegionSpace, output: RegionSpace) -> "KrausChannel":
        return cls(input, output, (np.asarray(u, dtype=np.complex128),))

    @classmethod
    def identity(cls, input: RegionSpace, output: RegionSpace) -> "KrausChannel":
        if input.dim != output.dim:
            raise DimensionMismatchError("identity channel needs equal dimensions")
        return cls(input, output, (np.eye(input.dim),))

    @classmethod
    def depolarizing(cls, input: RegionSpace, output: RegionSpace) -> "KrausChannel":
        """``rho -> Tr(rho) I/d_out`` via Kraus ``|b><a|/sqrt(d_out)``."""
        din, dout = input.dim, output.dim
        ks = []
        for b in range(dout):
            for a in range(din):
                k = np.zeros((dout, din))
                k[b, a] = 1 / np.sqrt(dout)
                ks.append(k)
        return cls(input, output, tuple(ks))


@dataclass(frozen=True)
class MatrixMap:
    """Linear map ``x -> Tr_in[op x]``.

    ``flavor == "causal"`` means ``op`` is the image of a CPT map; for
    ``"acausal"`` only the map composed with a transpose is CP, and
    :func:`apply_map` refuses to act unless told it is doing acausal
    propagation.
    """

    input: tuple[RegionSpace, ...]
    output: tuple[RegionSpace, ...]
    op: LabeledOperator
    flavor: str = "causal"

    def __post_init__(self):
        inp = tuple(self.input) if not isinstance(self.input, RegionSpace) else (self.input,)
        out = tuple(self.output) if not isinstance(self.output, RegionSpace) else (self.output,)
        object.__setattr__(self, "input", inp)
        object.__setattr__(self, "output", out)
        labels = {r.label for r in inp} | {r.label for r in out}
        if labels != self.op.label_set:
            raise LabelNotFoundError(f"map regions {sorted(labels)} do not match operator {self.op.labels}")

    @property
    def input_labels(self) -> frozenset:
        return frozenset(r.label for r in self.input)

    @property
    def output_labels(self) -> frozenset:
        return frozenset(r.label for r in self.output)


def map_from_function(
    f: Callable[[LabeledOperator], LabeledOperator],
    input: Sequence[RegionSpace] | RegionSpace,
    output: Sequence[RegionSpace] | RegionSpace,
    flavor: str = "causal",
) -> MatrixMap:
    """Tabulate a linear function on matrix units into a :class:`MatrixMap`."""
    inp = (input,) if isinstance(input, RegionSpace) else tuple(input)
    out = (output,) if isinstance(output, RegionSpace) else tuple(output)
    op = _jamiolkowski_from_action(f, inp)
    return MatrixMap(inp, out, op, flavor)


def _matrix_units(regions: tuple[RegionSpace, ...]):
    d = int(np.prod([r.dim for r in regions], dtype=np.int64))
    for j in range(d):
        for k in range(d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = 1.0
            yield j, k, LabeledOperator(regions, m)


def _jamiolkowski_from_action(f, inp: tuple[RegionSpace, ...]) -> LabeledOperator:
    """``sum_{jk} |j><k|_in (x) f(|k><j|_in)`` with the input in canonical order."""
    inp = merge_regions(inp)
    total = None
    for j, k, unit in _matrix_units(inp):
        image = f(unit)
        if image.label_set & {r.label for r in inp}:
            raise LabelCollisionError("map output shares labels with its input")
        kb = LabeledOperator(inp, unit.matrix.T)  # transposed unit pairs with f(unit)
        term = tensor(kb, image)
        total = term if total is None else total + term
    return total


def _kraus_jamiolkowski(kraus, inp: RegionSpace, out: RegionSpace) -> LabeledOperator:
    # <j b|J|k b'> = sum_mu K[b, k] conj(K[b', j])
    k = np.stack(kraus)
    t = np.einsum("mbk,mcj->jbkc", k, k.conj())
    d = inp.dim * out.dim
    return LabeledOperator((inp, out), t.reshape(d, d))


def jamiolkowski_to_state(ch: KrausChannel | MatrixMap, tol: Tolerances = DEFAULT_TOL) -> ConditionalState:
    if isinstance(ch, KrausChannel):
        if ch.input.label == ch.output.label:
            raise LabelCollisionError("input and output regions need distinct labels")
        if not ch.is_cptp(tol):
            raise ChannelError(f"Kraus collection is not trace preserving (defect {ch.tp_defect():.3g})")
        op = _kraus_jamiolkowski(ch.kraus, ch.input, ch.output)
        return ConditionalState(op, {ch.output.label}, {ch.input.label}, "causal")
    if isinstance(ch, MatrixMap):
        op = _jamiolkowski_from_action(lambda x: apply_map(ch, x, acausal=True), ch.input)
        return ConditionalState(op, ch.output_labels, ch.input_labels, ch.flavor)
    raise TypeError(f"not a channel: {type(ch).__name__}")


def jamiolkowski_to_map(c) -> MatrixMap:
    c = as_conditional(c)
    return MatrixMap(c.conditioning_regions, c.conditioned_regions, c.op, c.flavor)


def choi_operator(ch: KrausChannel) -> LabeledOperator:
    """``(id (x) E)(|Phi+><Phi+|)`` with ``|Phi+> = sum_j |jj>`` (unnormalized)."""
    d = ch.input.dim
    total = None
    for i in range(d):
        for j in range(d):
            image = apply_channel(ch, LabeledOperator.ket_bra(ch.input, i, j))
            term = tensor(LabeledOperator.ket_bra(ch.input, i, j), image)
            total = term if total is None else total + term
    return total


def apply_map(m: MatrixMap, x: LabeledOperator, *, acausal: bool = False) -> LabeledOperator:
    """``Tr_in[op x]``; labels of ``x`` outside the input are bystanders."""
    if m.flavor == "acausal" and not acausal:
        raise FlavorError("map is only CP after a transpose; pass acausal=True for acausal propagation")
    if not m.input_labels <= x.label_set:
        raise LabelNotFoundError(f"input {sorted(m.input_labels)} not in operand labels {x.labels}")
    if m.output_labels & x.label_set:
        raise LabelCollisionError(f"operand already carries output labels {sorted(m.output_labels & x.label_set)}")
    return partial_trace(padded_mul(m.op, x), m.input_labels)


def _local_sandwich(kraus, x: LabeledOperator, label: str, out: RegionSpace) -> LabeledOperator:
    """``sum K x K^dagger`` acting on one region of ``x``, replacing it with ``out``."""
    pos = x.labels.index(label)
    d = x.dims
    before = int(np.prod(d[:pos], dtype=np.int64))
    after = int(np.prod(d[pos + 1 :], dtype=np.int64))
    t = x.matrix.reshape(before, d[pos], after, before, d[pos], after)
    acc = 0
    for k in kraus:
        acc = acc + np.einsum("ba,pacqdr,ed->pbcqer", k, t, k.conj(), optimize=True)
    dout = kraus[0].shape[0]
    side = before * dout * after
    regions = x.regions[:pos] + (out,) + x.regions[pos + 1 :]
    return LabeledOperator(regions, acc.reshape(side, side))


def apply_channel(ch: KrausChannel, x: LabeledOperator) -> LabeledOperator:
    """Kraus action on the input region of ``x``; other regions are bystanders."""
    if ch.input.label not in x.label_set:
        raise LabelNotFoundError(f"input {ch.input.label!r} not in {x.labels}")
    if ch.output.label in x.label_set and ch.output.label != ch.input.label:
        raise LabelCollisionError(f"operand already carries output label {ch.output.label!r}")
    if x.region(ch.input.label).dim != ch.input.dim:
        raise DimensionMismatchError("operand dimension does not match channel input")
    return _local_sandwich(ch.kraus, x, ch.input.label, ch.output)


def dual_apply(ch: KrausChannel | MatrixMap, m: LabeledOperator) -> LabeledOperator:
    """Heisenberg picture: Kraus adjoints, or ``Tr_out[m op]`` for a map."""
    if isinstance(ch, KrausChannel):
        if ch.output.label not in m.label_set:
            raise LabelNotFoundError(f"output {ch.output.label!r} not in {m.labels}")
        if ch.input.label in m.label_set and ch.input.label != ch.output.label:
            raise LabelCollisionError(f"operand already carries input label {ch.input.label!r}")
        return _local_sandwich(ch.adjoint_kraus(), m, ch.output.label, ch.input)
    if isinstance(ch, MatrixMap):
        if not ch.output_labels <= m.label_set:
            raise LabelNotFoundError(f"output {sorted(ch.output_labels)} not in {m.labels}")
        return partial_trace(padded_mul(m, ch.op), ch.output_labels)
    raise TypeError(f"not a channel: {type(ch).__name__}")


# ---------------------------------------------------------------------------
# belief propagation and composition


def propagate(state: LabeledOperator, c, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """``Tr_A[c rho_A]``: the same formula for both flavors."""
    c = as_conditional(c)
    if not c.conditioning <= state.label_set:
        raise LabelNotFoundError(f"state on {state.labels} lacks conditioning {sorted(c.conditioning)}")
    if c.conditioned & state.label_set:
        raise LabelCollisionError(f"state already carries {sorted(c.conditioned & state.label_set)}")
    return partial_trace(padded_mul(c.op, state), c.conditioning)


def _flavor_set(c: ConditionalState) -> set:
    return {"acausal", "causal"} if c.classical_conditioning else {c.flavor}


def composed_flavor(later: ConditionalState, earlier: ConditionalState) -> str:
    """Causal after anything keeps the earlier flavor; acausal needs classical input."""
    if "causal" in _flavor_set(later):
        return earlier.flavor
    if earlier.classical_conditioning:
        return "acausal"
    raise FlavorError(
        "an acausal conditional cannot follow a conditional with quantum conditioning regions"
    )


def compose_conditionals(later, earlier, tol: Tolerances = DEFAULT_TOL):
    """``c_{C|A} = Tr_B[c_{C|B} c_{B|A}]``."""
    lat, ear = as_conditional(later), as_conditional(earlier)
    if lat.conditioning != ear.conditioned:
        raise LabelNotFoundError(
            f"cannot chain {sorted(lat.conditioned)}|{sorted(lat.conditioning)} after "
            f"{sorted(ear.conditioned)}|{sorted(ear.conditioning)}"
        )
    if lat.conditioned & ear.conditioning:
        raise LabelCollisionError("composition would reuse a conditioning label")
    flavor = composed_flavor(lat, ear)
    op = partial_trace(padded_mul(lat.op, ear.op), lat.conditioning)
    support = ear.support
    if lat.support is not None:
        # a support-restricted later step can shrink the support further
        t = partial_trace(op, lat.conditioned)
        support = None if frob_distance(t, LabeledOperator.identity(t.regions)) <= tol.eq_tol else t
    out = ConditionalState(op, lat.conditioned, ear.conditioning, flavor, support)
    if isinstance(later, HybridConditional) or isinstance(earlier, HybridConditional):
        return maybe_hybrid(out, tol)
    return out


# ---------------------------------------------------------------------------
# instruments


@dataclass(frozen=True)
class Instrument:
    """Outcome-indexed CP maps A -> B whose sum is trace preserving."""

    outcome: RegionSpace
    input: RegionSpace
    output: RegionSpace
    elements: tuple

    def __post_init__(self):
        elems = tuple(_check_kraus(e, self.input.dim, self.output.dim) for e in self.elements)
        if len(elems) != self.outcome.dim:
            raise DimensionMismatchError(f"{len(elems)} elements for an outcome region of dim {self.outcome.dim}")
        if len({self.outcome.label, self.input.label, self.output.label}) != 3:
            raise LabelCollisionError("outcome, input and output need distinct labels")
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "outcome", RegionSpace(self.outcome.label, self.outcome.dim, True))

    def tp_defect(self) -> float:
        total = sum(kraus_gram(e) for e in self.elements)
        return float(np.linalg.norm(total - np.eye(self.input.dim)))

    def effects(self) -> list[np.ndarray]:
        return [kraus_gram(e) for e in self.elements]

    def check(self, tol: Tolerances = DEFAULT_TOL) -> "Instrument":
        if self.tp_defect() > tol.eq_tol:
            raise ChannelError(f"instrument does not sum to a trace-preserving map (defect {self.tp_defect():.3g})")
        return self

    def nonselective(self) -> KrausChannel:
        return KrausChannel(self.input, self.output, tuple(k for e in self.elements for k in e))


def luders_instrument(povm, outcome: RegionSpace | str, input: RegionSpace, output: RegionSpace) -> Instrument:
    """Kraus ``E_y^{1/2}`` followed by the identity isometry into ``output``."""
    mats = [np.asarray(getattr(e, "matrix", e), dtype=np.complex128) for e in povm]
    if isinstance(outcome, str):
        outcome = RegionSpace(outcome, len(mats), True)
    elems = []
    for e in mats:
        root = herm_sqrt(LabeledOperator((input,), e)).matrix
        elems.append((root,))
    return Instrument(outcome, input, output, tuple(elems))


def instrument_to_conditional(ins: Instrument, tol: Tolerances = DEFAULT_TOL) -> ConditionalState:
    """``sum_y |y><y|_Y (x) J(E_y)``, a causal conditional for YB given A."""
    ins.check(tol)
    total = None
    for y, e in enumerate(ins.elements):
        term = tensor(LabeledOperator.ket_bra(ins.outcome, y, y), _kraus_jamiolkowski(e, ins.input, ins.output))
        total = term if total is None else total + term
    return ConditionalState(total, {ins.outcome.label, ins.output.label}, {ins.input.label}, "causal")


@dataclass(frozen=True)
class InstrumentUpdate:
    joint: LabeledOperator  # on YB, block diagonal over Y
    probabilities: np.ndarray
    blocks: tuple[LabeledOperator, ...]  # P(y) rho^B_y

    def posterior(self, y: int) -> LabeledOperator | None:
        p = self.probabilities[y]
        return None if p <= 0 else self.blocks[y] / p


def instrument_update(ins: Instrument, rho: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> InstrumentUpdate:
    if rho.label_set != {ins.input.label}:
        raise LabelNotFoundError(f"state must live on {ins.input.label!r}")
    v = is_density(rho, tol)
    if not v:
        raise StateError(f"input is not a density: {v.reason}")
    joint = propagate(rho, instrument_to_conditional(ins, tol), tol)
    blocks = tuple(classical_blocks(joint, ins.outcome.label, tol))
    probs = np.array([max(b.trace().real, 0.0) for b in blocks])
    return InstrumentUpdate(joint, probs, blocks)


def instrument_povm(ins: Instrument, tol: Tolerances = DEFAULT_TOL) -> HybridConditional:
    """``Tr_B`` of the instrument's conditional: the POVM it measures."""
    c = instrument_to_conditional(ins, tol)
    op = partial_trace(c.op, {ins.output.label})
    comps = classical_blocks(op, ins.outcome.label, tol)
    return povm_to_conditional(comps, ins.outcome, tol)


def instrument_channel_conditional(ins: Instrument, tol: Tolerances = DEFAULT_TOL) -> ConditionalState:
    """Non-selective conditional: the instrument's conditional with Y marginalized."""
    c = instrument_to_conditional(ins, tol)
    return ConditionalState(partial_trace(c.op, {ins.outcome.label}), {ins.output.label}, {ins.input.label}, "causal")


def swap_conditional(input: RegionSpace, output: RegionSpace) -> ConditionalState:
    """The identity channel's image: ``sum_{jk} |j><k|_A (x) |k><j|_B``."""
    return jamiolkowski_to_state(KrausChannel.identity(input, output))


def channel_distance(a: ConditionalState, b: ConditionalState) -> float:
    return frob_distance(a.op, b.op)
