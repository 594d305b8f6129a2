"""Classical probability tables and their diagonal embeddings.

The arithmetic helpers here (marginals, conditionals, Bayes, propagation,
Jeffrey updates) work on plain arrays and never touch the operator code, so
they double as the reference oracle for the classical special case.
Conditional tables use NaN-free storage: columns whose conditioning value has
zero probability are left as zeros and flagged undefined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClassicalityError, LabelNotFoundError, ShapeError, StateError
from .linalg import DEFAULT_TOL, Tolerances
from .regions import LabeledOperator, RegionSpace, block


@dataclass(frozen=True)
class ClassicalDistribution:
    """Joint distribution over classical labels; ``table`` axes follow ``labels``."""

    labels: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        t = np.asarray(self.table, dtype=float)
        if t.ndim != len(labels):
            raise ShapeError(f"table has {t.ndim} axes for labels {labels}")
        if np.any(t < 0):
            raise StateError("probabilities must be nonnegative")
        if abs(t.sum() - 1.0) > 1e-12:
            raise StateError(f"probabilities sum to {t.sum():.15g}, not 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "table", t)

    @property
    def regions(self) -> tuple[RegionSpace, ...]:
        return tuple(RegionSpace(lab, d, classical=True) for lab, d in zip(self.labels, self.table.shape))

    def marginal(self, keep) -> "ClassicalDistribution":
        keep = [lab for lab in self.labels if lab in set(keep)]
        axes = tuple(i for i, lab in enumerate(self.labels) if lab not in keep)
        return ClassicalDistribution(tuple(keep), self.table.sum(axis=axes))


@dataclass(frozen=True)
class ClassicalConditionalTable:
    """``P(of | given)``; table axes are ``of + given``.

    ``defined`` marks the conditioning values where the conditional exists;
    undefined columns are stored as zeros.
    """

    of: tuple[str, ...]
    given: tuple[str, ...]
    table: np.ndarray
    defined: np.ndarray = field(default=None)

    def __post_init__(self):
        of = (self.of,) if isinstance(self.of, str) else tuple(self.of)
        given = (self.given,) if isinstance(self.given, str) else tuple(self.given)
        t = np.asarray(self.table, dtype=float)
        if t.ndim != len(of) + len(given):
            raise ShapeError(f"table has {t.ndim} axes for {of} given {given}")
        sums = t.reshape(int(np.prod(t.shape[: len(of)])), -1).sum(axis=0).reshape(t.shape[len(of):])
        defined = self.defined
        if defined is None:
            defined = np.ones(t.shape[len(of):], dtype=bool)
        defined = np.asarray(defined, dtype=bool)
        if np.any(t < 0):
            raise StateError("conditional probabilities must be nonnegative")
        if np.any(np.abs(sums[defined] - 1.0) > 1e-12):
            raise StateError("each defined column of a conditional table must sum to 1")
        if np.any(sums[~defined] != 0):
            raise StateError("undefined columns must be zero")
        object.__setattr__(self, "of", of)
        object.__setattr__(self, "given", given)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "defined", defined)


# ---------------------------------------------------------------------------
# reference arithmetic on plain arrays


def oracle_conditional(joint: np.ndarray, n_given: int) -> tuple[np.ndarray, np.ndarray]:
    """``P(rest | first n_given axes)`` returned with axes ``rest + given``."""
    given_shape = joint.shape[:n_given]
    rest_shape = joint.shape[n_given:]
    flat = joint.reshape(int(np.prod(given_shape)), int(np.prod(rest_shape)))
    p_given = flat.sum(axis=1)
    defined = p_given > 0
    cond = np.zeros_like(flat)
    cond[defined] = flat[defined] / p_given[defined, None]
    return cond.T.reshape(rest_shape + given_shape), defined.reshape(given_shape)


def oracle_propagate(cond: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``P(s) = sum_r P(s|r) P(r)`` for a 2-axis table ``cond[s, r]``."""
    return cond @ p


def oracle_bayes(cond: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``P(r|s) = P(s|r) P(r) / P(s)`` with output axes ``[r, s]``."""
    joint_sr = cond * p[None, :]
    ps = joint_sr.sum(axis=1)
    defined = ps > 0
    out = np.zeros_like(joint_sr.T)
    out[:, defined] = joint_sr.T[:, defined] / ps[defined][None, :]
    return out, defined


def oracle_compose(later: np.ndarray, earlier: np.ndarray) -> np.ndarray:
    """``P(t|r) = sum_s P(t|s) P(s|r)``."""
    return later @ earlier


def oracle_jeffrey(cond: np.ndarray, p_post: np.ndarray) -> np.ndarray:
    return cond @ p_post


# ---------------------------------------------------------------------------
# embedding


def embed_classical(d: ClassicalDistribution | ClassicalConditionalTable):
    """Diagonal operator for a distribution; acausal conditional for a table."""
    if isinstance(d, ClassicalDistribution):
        return LabeledOperator.from_diag(d.regions, d.table.ravel())
    if isinstance(d, ClassicalConditionalTable):
        from .conditionals import ConditionalState

        shape = d.table.shape
        n_of = len(d.of)
        of_regions = tuple(RegionSpace(lab, n, True) for lab, n in zip(d.of, shape[:n_of]))
        given_regions = tuple(RegionSpace(lab, n, True) for lab, n in zip(d.given, shape[n_of:]))
        op = LabeledOperator.from_diag(of_regions + given_regions, d.table.ravel())
        support = LabeledOperator.from_diag(given_regions, d.defined.astype(float).ravel())
        return ConditionalState(op, frozenset(d.of), frozenset(d.given), "acausal", support)
    raise TypeError(f"cannot embed {type(d).__name__}")


def _diag_tensor(op: LabeledOperator, labels: tuple[str, ...], tol: Tolerances) -> np.ndarray:
    m = op.matrix
    off = m - np.diag(np.diag(m))
    if m.size and np.max(np.abs(off)) > tol.herm_tol:
        raise ClassicalityError(f"operator on {op.labels} has off-diagonal weight {np.max(np.abs(off)):.3g}")
    diag = np.diag(m)
    if np.max(np.abs(diag.imag), initial=0.0) > tol.herm_tol:
        raise ClassicalityError("diagonal entries are not real")
    t = diag.real.reshape(op.dims)
    order = [op.labels.index(lab) for lab in labels]
    return np.transpose(t, order)


def extract_classical(x, tol: Tolerances = DEFAULT_TOL, labels=None):
    """Inverse of :func:`embed_classical`.

    For operators, ``labels`` fixes the axis order (default: canonical).
    For conditional states the axis order is ``sorted(conditioned) +
    sorted(conditioning)``.
    """
    from .conditionals import ConditionalState

    if isinstance(x, LabeledOperator):
        labels = x.labels if labels is None else tuple(labels)
        if set(labels) != set(x.labels):
            raise LabelNotFoundError(f"labels {labels} do not match operator labels {x.labels}")
        t = _diag_tensor(x, labels, tol)
        t = np.where(np.abs(t) <= tol.herm_tol, 0.0, t)
        return ClassicalDistribution(labels, t)
    base = getattr(x, "base", x)
    if isinstance(base, ConditionalState):
        of = tuple(sorted(base.conditioned))
        given = tuple(sorted(base.conditioning))
        t = _diag_tensor(base.op, of + given, tol)
        supp = _diag_tensor(base.support_op(), given, tol)
        defined = supp > 0.5
        t = np.where(np.abs(t) <= tol.herm_tol, 0.0, t)
        return ClassicalConditionalTable(of, given, t, defined)
    raise TypeError(f"cannot extract a classical object from {type(x).__name__}")


def classical_blocks(op: LabeledOperator, label: str, tol: Tolerances = DEFAULT_TOL) -> list[LabeledOperator]:
    """Diagonal blocks ``<x|op|x>`` over a classical label, checking block-diagonality."""
    d = op.region(label).dim
    worst = 0.0
    for i in range(d):
        for j in range(d):
            if i != j:
                worst = max(worst, float(np.max(np.abs(block(op, label, i, j).matrix), initial=0.0)))
    if worst > tol.herm_tol:
        raise ClassicalityError(f"operator is not block-diagonal over {label!r} (off-block weight {worst:.3g})")
    return [block(op, label, i, i) for i in range(d)]
