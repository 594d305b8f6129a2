"""Scenario files: parsing, object construction, and task execution.

A scenario is a JSON document::

    {
      "regions": [{"label": "A", "dim": 2}, {"label": "Y", "dim": 2, "classical": true}],
      "objects": {"rho": {"type": "state", "regions": ["A"], "matrix": [[0.75, 0], [0, 0.25]]}, ...},
      "task": "propagate",
      "task_args": {"state": "rho", "through": "meas"},
      "tolerances": {"eq_tol": 1e-9}
    }

Matrix payloads are row-major lists of rows; an entry is a real number or a
two-element ``[real, imaginary]`` list.  See ``docs/scenarios.md`` for every
object type and task.

Problems are reported through three exception families: :class:`ParseError`
(malformed document), :class:`ValidationError` (well-formed but invalid
objects), and :class:`NumericalDomainError`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import sampling
from .bayes import (
    bayes_invert,
    condition_on_classical,
    jeffrey_update,
    retrodict,
    steering_ensemble,
)
from .channels import (
    Instrument,
    KrausChannel,
    apply_channel,
    instrument_channel_conditional,
    instrument_povm,
    instrument_update,
    jamiolkowski_to_state,
    propagate,
)
from .classical import ClassicalDistribution, embed_classical
from .conditionals import (
    ConditionalState,
    HybridConditional,
    JointState,
    as_conditional,
    ensemble_to_conditional,
    maybe_hybrid,
    povm_to_conditional,
)
from .errors import ParseError, StateError
from .linalg import Tolerances, frob_distance, is_density
from .regions import LabeledOperator, RegionSpace, partial_trace

TASKS = ("validate", "propagate", "bayes-invert", "retrodict", "steer", "condition", "instrument-update")


# ---------------------------------------------------------------------------
# report helpers


def _clean(x: float) -> float:
    x = float(x)
    return 0.0 if x == 0 else x


def encode_matrix(m: np.ndarray) -> list:
    return [[[_clean(z.real), _clean(z.imag)] for z in row] for row in np.asarray(m, dtype=np.complex128)]


def encode_operator(op: LabeledOperator) -> dict:
    return {
        "regions": [{"label": r.label, "dim": r.dim, "classical": r.classical} for r in op.regions],
        "matrix": encode_matrix(op.matrix),
    }


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed), "value": _clean(self.value), "threshold": self.threshold}
        if self.detail:
            out["detail"] = self.detail
        return out


def check_le(name: str, value: float, threshold: float, detail: str = "") -> Check:
    return Check(name, bool(value <= threshold), float(value), float(threshold), detail)


def check_gt(name: str, value: float, threshold: float, detail: str = "") -> Check:
    return Check(name, bool(value > threshold), float(value), float(threshold), detail)


@dataclass
class Report:
    task: str
    outputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    seed: int | None = None

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        out = {
            "task": self.task,
            "status": "ok" if self.ok else "check-failed",
            "outputs": self.outputs,
            "checks": [c.to_json() for c in self.checks],
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# parsing


def _entry(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ParseError(f"{where}: boolean is not a matrix entry")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ParseError(f"{where}: entry {x!r} is neither a number nor [real, imaginary]")


def parse_matrix(payload, where: str) -> np.ndarray:
    if not isinstance(payload, list) or not payload or not all(isinstance(r, list) for r in payload):
        raise ParseError(f"{where}: matrix must be a non-empty list of rows")
    n = len(payload)
    for i, row in enumerate(payload):
        if len(row) != n:
            raise ParseError(f"{where}: matrix is not square (row {i} has {len(row)} entries, expected {n})")
    return np.array([[_entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(payload)])


@dataclass
class Scenario:
    regions: dict
    objects: dict
    task: str
    task_args: dict
    tolerances: Tolerances
    used_randomness: bool = False


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"{where}: missing key {key!r}")
    return d[key]


def _label_list(x, where: str) -> list[str]:
    if isinstance(x, str):
        return [x]
    if isinstance(x, list) and all(isinstance(v, str) for v in x) and x:
        return list(x)
    raise ParseError(f"{where}: expected a label or a non-empty list of labels")


class _Builder:
    def __init__(self, regions: dict, tol: Tolerances, seed: int):
        self.regions = regions
        self.tol = tol
        self.seed = seed
        self._rng = None

    @property
    def rng(self):
        if self._rng is None:
            self._rng = sampling.rng(self.seed)
        return self._rng

    def region(self, label: str, where: str) -> RegionSpace:
        if label not in self.regions:
            raise ParseError(f"{where}: region {label!r} is not declared")
        return self.regions[label]

    def regs(self, spec, where: str) -> tuple[RegionSpace, ...]:
        return tuple(self.region(lab, where) for lab in _label_list(spec, where))

    def operator(self, regs, payload, where: str) -> LabeledOperator:
        m = parse_matrix(payload, where)
        side = int(np.prod([r.dim for r in regs]))
        if m.shape[0] != side:
            raise ParseError(f"{where}: matrix side {m.shape[0]} does not match regions of total dimension {side}")
        return LabeledOperator(regs, m)

    def build(self, name: str, spec: dict):
        where = f"object {name!r}"
        kind = _require(spec, "type", where)
        if kind in ("state", "operator"):
            regs = self.regs(_require(spec, "regions", where), where)
            op = self.operator(regs, _require(spec, "matrix", where), where)
            if kind == "state":
                v = is_density(op, self.tol)
                if not v:
                    raise StateError(f"{where}: not a density ({v.reason})")
            return op
        if kind == "distribution":
            reg = self.region(_require(spec, "region", where), where)
            probs = _require(spec, "probs", where)
            if not isinstance(probs, list) or len(probs) != reg.dim:
                raise ParseError(f"{where}: need {reg.dim} probabilities")
            return embed_classical(ClassicalDistribution((reg.label,), np.array(probs, dtype=float)))
        if kind == "povm":
            regs = self.regs(_require(spec, "input", where), where)
            out = self.region(_require(spec, "outcome", where), where)
            elems = _require(spec, "elements", where)
            if not isinstance(elems, list) or len(elems) != out.dim:
                raise ParseError(f"{where}: outcome region {out.label!r} has dim {out.dim} but {len(elems) if isinstance(elems, list) else '?'} elements given")
            ops = [self.operator(regs, e, f"{where} element {i}") for i, e in enumerate(elems)]
            return povm_to_conditional(ops, out, self.tol)
        if kind == "ensemble":
            regs = self.regs(_require(spec, "regions", where), where)
            val = self.region(_require(spec, "value", where), where)
            states = _require(spec, "states", where)
            if not isinstance(states, list) or len(states) != val.dim:
                raise ParseError(f"{where}: value region {val.label!r} has dim {val.dim} but {len(states) if isinstance(states, list) else '?'} states given")
            ops = [self.operator(regs, s, f"{where} state {i}") for i, s in enumerate(states)]
            return ensemble_to_conditional(ops, val, self.tol)
        if kind == "channel":
            inp = self.region(_require(spec, "input", where), where)
            out = self.region(_require(spec, "output", where), where)
            kraus = [self._rect(k, out.dim, inp.dim, f"{where} kraus {i}") for i, k in enumerate(_require(spec, "kraus", where))]
            ch = KrausChannel(inp, out, tuple(kraus))
            jamiolkowski_to_state(ch, self.tol)  # raises if not trace preserving
            return ch
        if kind == "instrument":
            inp = self.region(_require(spec, "input", where), where)
            out = self.region(_require(spec, "output", where), where)
            y = self.region(_require(spec, "outcome", where), where)
            elems = _require(spec, "elements", where)
            if not isinstance(elems, list) or len(elems) != y.dim:
                raise ParseError(f"{where}: outcome region {y.label!r} has dim {y.dim}")
            parsed = tuple(
                tuple(self._rect(k, out.dim, inp.dim, f"{where} element {i} kraus {j}") for j, k in enumerate(e))
                for i, e in enumerate(elems)
            )
            return Instrument(y, inp, out, parsed).check(self.tol)
        if kind == "conditional":
            conditioned = self.regs(_require(spec, "conditioned", where), where)
            conditioning = self.regs(_require(spec, "conditioning", where), where)
            flavor = spec.get("flavor", "acausal")
            op = self.operator(conditioned + conditioning, _require(spec, "matrix", where), where)
            c = ConditionalState(op, {r.label for r in conditioned}, {r.label for r in conditioning}, flavor)
            return maybe_hybrid(c.check(self.tol), self.tol)
        if kind == "random-state":
            regs = self.regs(_require(spec, "regions", where), where)
            return sampling.random_density(self.rng, regs, spec.get("rank"))
        if kind == "random-channel":
            inp = self.region(_require(spec, "input", where), where)
            out = self.region(_require(spec, "output", where), where)
            return sampling.random_channel(self.rng, inp, out, spec.get("kraus_count"))
        raise ParseError(f"{where}: unknown object type {kind!r}")

    def _rect(self, payload, rows: int, cols: int, where: str) -> np.ndarray:
        if not isinstance(payload, list) or not all(isinstance(r, list) for r in payload):
            raise ParseError(f"{where}: matrix must be a list of rows")
        m = np.array([[_entry(x, where) for x in row] for row in payload]) if payload else np.zeros((0, 0))
        if m.shape != (rows, cols) or any(len(r) != cols for r in payload):
            raise ParseError(f"{where}: expected a {rows}x{cols} matrix")
        return m


def parse_scenario(text: str, *, seed: int = 0, tol_override: float | None = None) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")
    regions = {}
    for i, r in enumerate(_require(doc, "regions", "scenario")):
        where = f"region {i}"
        label = _require(r, "label", where)
        dim = _require(r, "dim", where)
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise ParseError(f"{where}: dim must be a positive integer")
        if label in regions:
            raise ParseError(f"{where}: duplicate label {label!r}")
        regions[label] = RegionSpace(label, dim, bool(r.get("classical", False)))
    tol_doc = doc.get("tolerances", {}) or {}
    try:
        tol = Tolerances(**{k: float(v) for k, v in tol_doc.items()})
        if tol_override is not None:
            tol = Tolerances(tol.eig_zero, tol.herm_tol, float(tol_override))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad tolerances: {exc}") from None
    task = _require(doc, "task", "scenario")
    if task not in TASKS:
        raise ParseError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    builder = _Builder(regions, tol, seed)
    raw_objects = doc.get("objects", {})
    if not isinstance(raw_objects, dict):
        raise ParseError("objects must be a mapping from names to object specs")
    objects = {name: builder.build(name, spec) for name, spec in raw_objects.items()}
    args = doc.get("task_args", {}) or {}
    return Scenario(regions, objects, task, args, tol, builder._rng is not None)


# ---------------------------------------------------------------------------
# tasks


def _get(sc: Scenario, key: str, *types):
    name = sc.task_args.get(key)
    if name is None:
        raise ParseError(f"task {sc.task!r} needs task_args.{key}")
    if name not in sc.objects:
        raise ParseError(f"task_args.{key} refers to unknown object {name!r}")
    obj = sc.objects[name]
    if types and not isinstance(obj, types):
        raise ParseError(f"task_args.{key}: object {name!r} has the wrong type ({type(obj).__name__})")
    return obj


def _conditional_of(obj):
    if isinstance(obj, KrausChannel):
        return jamiolkowski_to_state(obj)
    return obj


def _distribution(op: LabeledOperator) -> list:
    return [_clean(x) for x in np.real(np.diag(op.matrix))]


def _hybrid_out(h: HybridConditional) -> dict:
    return {
        "classical_label": h.classical_label,
        "kind": h.kind,
        "components": [encode_operator(c) if ok else None for c, ok in zip(h.components, h.defined)],
    }


def run(sc: Scenario) -> Report:
    tol = sc.tolerances
    rep = Report(sc.task)
    t = sc.task
    if t == "validate":
        rep.outputs["objects"] = {name: type(obj).__name__ for name, obj in sorted(sc.objects.items())}
    elif t == "propagate":
        state = _get(sc, "state", LabeledOperator)
        through = _get(sc, "through")
        if isinstance(through, KrausChannel):
            out = apply_channel(through, state)
        else:
            out = propagate(state, through, tol)
        rep.outputs["state"] = encode_operator(out)
        if all(r.classical for r in out.regions):
            rep.outputs["distribution"] = _distribution(out)
        rep.checks.append(check_le("output-trace-is-one", abs(out.trace() - 1), tol.eq_tol))
    elif t == "bayes-invert":
        c = _conditional_of(_get(sc, "conditional"))
        prior = _get(sc, "prior", LabeledOperator)
        inv = bayes_invert(c, prior, tol)
        rep.outputs["inverse"] = encode_operator(inv.op)
        if isinstance(inv, HybridConditional):
            rep.outputs["hybrid"] = _hybrid_out(inv)
        v = as_conditional(inv).validate(tol)
        rep.checks.append(Check("inverse-is-valid-conditional", bool(v), 0.0 if v else 1.0, 0.0, v.reason))
        rho_b = propagate(prior, c, tol)
        back = bayes_invert(inv, rho_b, tol)
        rep.checks.append(check_le("double-inversion-recovers-input", _support_distance(back, c, prior, tol), tol.eq_tol))
    elif t == "retrodict":
        prior = _get(sc, "prior", LabeledOperator)
        ens = _get(sc, "ensemble", HybridConditional)
        povm = _get(sc, "povm", HybridConditional)
        chan = sc.task_args.get("channel")
        res = retrodict(prior, ens, povm, _get(sc, "channel") if chan else None, tol)
        rep.outputs["joint"] = {"labels": list(res.joint.labels), "table": res.joint.table.tolist()}
        rep.outputs["retro_states"] = _hybrid_out(res.retro_states)
        rep.outputs["retro_povm"] = _hybrid_out(res.retro_povm)
        rep.checks.append(check_le("predictive-equals-retrodictive", res.discrepancy, tol.eq_tol))
    elif t == "steer":
        joint = _get(sc, "joint", LabeledOperator)
        povm = _get(sc, "povm", HybridConditional)
        res = steering_ensemble(JointState(joint), povm, tol)
        rep.outputs["probabilities"] = [_clean(p) for p in res.outcome_probs.table.ravel()]
        rep.outputs["steered_states"] = [None if s is None else encode_operator(s) for s in res.steered_states]
        rep.outputs["effective_povm"] = [encode_operator(e) for e in res.effective_povm]
        rep.checks.append(check_le("steering-routes-agree", res.route_discrepancy, tol.eq_tol))
        rep.checks.append(check_le("ensemble-average-equals-prior", frob_distance(res.average(), res.prior), tol.eq_tol))
    elif t == "condition":
        if "ensemble" in sc.task_args:
            ens = _get(sc, "ensemble", HybridConditional)
            x = sc.task_args.get("value")
            if not isinstance(x, int) or isinstance(x, bool):
                raise ParseError("task_args.value must be an integer")
            out = condition_on_classical(ens, x)
            point = LabeledOperator.ket_bra(ens.classical_region, x, x)
            two_step = propagate(point, ens, tol)
            rep.checks.append(check_le("component-equals-point-propagation", frob_distance(out, two_step), tol.eq_tol))
        else:
            c = _conditional_of(_get(sc, "conditional"))
            marg = _get(sc, "marginal", LabeledOperator)
            out = jeffrey_update(c, marg, tol)
            rep.checks.append(check_le("output-trace-is-one", abs(out.trace() - 1), tol.eq_tol))
        rep.outputs["state"] = encode_operator(out)
        if all(r.classical for r in out.regions):
            rep.outputs["distribution"] = _distribution(out)
    elif t == "instrument-update":
        ins = _get(sc, "instrument", Instrument)
        state = _get(sc, "state", LabeledOperator)
        upd = instrument_update(ins, state, tol)
        rep.outputs["probabilities"] = [_clean(p) for p in upd.probabilities]
        rep.outputs["posteriors"] = [
            None if upd.posterior(y) is None else encode_operator(upd.posterior(y)) for y in range(len(upd.blocks))
        ]
        rep.outputs["joint"] = encode_operator(upd.joint)
        born = propagate(state, instrument_povm(ins, tol), tol)
        born_gap = float(np.max(np.abs(np.real(np.diag(born.matrix)) - upd.probabilities)))
        rep.checks.append(check_le("probabilities-match-born-rule", born_gap, tol.eq_tol))
        nonsel = propagate(state, instrument_channel_conditional(ins, tol), tol)
        summed = partial_trace(upd.joint, {ins.outcome.label})
        rep.checks.append(check_le("selective-blocks-sum-to-nonselective", frob_distance(summed, nonsel), tol.eq_tol))
    return rep


def _support_distance(back, original, prior: LabeledOperator, tol: Tolerances) -> float:
    """Distance between ``back`` and ``original`` after restricting to supp(prior)."""
    from .linalg import conjugate, support_projector

    orig = as_conditional(original)
    p = support_projector(prior, tol)
    return frob_distance(conjugate(as_conditional(back).op, p), conjugate(orig.op, p))


def run_text(text: str, *, seed: int = 0, tol_override: float | None = None) -> Report:
    sc = parse_scenario(text, seed=seed, tol_override=tol_override)
    rep = run(sc)
    if sc.used_randomness:
        rep.seed = seed
    return rep
