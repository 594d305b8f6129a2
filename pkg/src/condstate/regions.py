"""Labeled tensor-product operators.

A :class:`LabeledOperator` is a dense complex matrix over an ordered product
of :class:`RegionSpace` factors.  The stored order is always canonical
(lexicographic by label); constructors accept any order and permute.  The
composite index is mixed-radix row-major over the canonical order, so the
last label varies fastest.

Binary operations pad missing factors with identities before acting, which
is the notational convention ``M_AB N_BC = (M_AB (x) I_C)(I_A (x) N_BC)``.
Full traces land on the empty label set as 1x1 operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatchError,
    LabelCollisionError,
    LabelNotFoundError,
    ShapeError,
)


@dataclass(frozen=True)
class RegionSpace:
    label: str
    dim: int
    classical: bool = False
    basis_note: str = "computational"

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise ShapeError(f"region label must be a non-empty string, got {self.label!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ShapeError(f"region {self.label!r}: dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))


def _as_label_set(labels) -> frozenset:
    if isinstance(labels, str):
        return frozenset([labels])
    return frozenset(labels)


def merge_regions(*groups: Iterable[RegionSpace]) -> tuple[RegionSpace, ...]:
    """Union of region collections in canonical order.

    Shared labels must agree on dimension; a label is classical if any
    occurrence says so.
    """
    seen: dict[str, RegionSpace] = {}
    for group in groups:
        for r in group:
            prev = seen.get(r.label)
            if prev is None:
                seen[r.label] = r
                continue
            if prev.dim != r.dim:
                raise DimensionMismatchError(
                    f"label {r.label!r} has dimension {prev.dim} and {r.dim} in the same expression"
                )
            if r.classical and not prev.classical:
                seen[r.label] = r
    return tuple(seen[k] for k in sorted(seen))


class LabeledOperator:
    """Immutable dense operator on a product of labeled regions."""

    __slots__ = ("regions", "matrix", "_labels")

    def __init__(self, regions: Iterable[RegionSpace], matrix, *, _canonical: bool = False):
        regions = tuple(regions)
        labels = [r.label for r in regions]
        if len(set(labels)) != len(labels):
            raise LabelCollisionError(f"duplicate labels in {labels}")
        mat = np.array(matrix, dtype=np.complex128)
        side = 1
        for r in regions:
            side *= r.dim
        if mat.ndim == 0 and side == 1:
            mat = mat.reshape(1, 1)
        if mat.shape != (side, side):
            raise ShapeError(
                f"matrix shape {mat.shape} does not match regions {labels} (side {side})"
            )
        if not _canonical:
            order = sorted(range(len(regions)), key=lambda i: labels[i])
            if order != list(range(len(regions))):
                mat = _kernels.permute(mat, [r.dim for r in regions], order)
                regions = tuple(regions[i] for i in order)
        mat.flags.writeable = False
        self.regions = regions
        self.matrix = mat
        self._labels = tuple(r.label for r in regions)

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, regions: Iterable[RegionSpace]) -> "LabeledOperator":
        regions = tuple(regions)
        side = int(np.prod([r.dim for r in regions], dtype=np.int64))
        return cls(regions, np.eye(side))

    @classmethod
    def scalar(cls, value) -> "LabeledOperator":
        return cls((), np.array([[value]]), _canonical=True)

    @classmethod
    def from_diag(cls, regions: Iterable[RegionSpace], diag) -> "LabeledOperator":
        return cls(regions, np.diag(np.asarray(diag, dtype=np.complex128).ravel()))

    @classmethod
    def ket_bra(cls, region: RegionSpace, i: int, j: int) -> "LabeledOperator":
        m = np.zeros((region.dim, region.dim), dtype=np.complex128)
        m[i, j] = 1.0
        return cls((region,), m, _canonical=True)

    # -- views ----------------------------------------------------------------

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def label_set(self) -> frozenset:
        return frozenset(self._labels)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.regions)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    def region(self, label: str) -> RegionSpace:
        for r in self.regions:
            if r.label == label:
                return r
        raise LabelNotFoundError(f"label {label!r} not in {self._labels}")

    def sub_regions(self, labels) -> tuple[RegionSpace, ...]:
        return tuple(self.region(lab) for lab in sorted(_as_label_set(labels)))

    def item(self) -> complex:
        if self.regions:
            raise ShapeError(f"operator on {self._labels} is not a scalar")
        return complex(self.matrix[0, 0])

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def dag(self) -> "LabeledOperator":
        return LabeledOperator(self.regions, self.matrix.conj().T, _canonical=True)

    def with_matrix(self, matrix) -> "LabeledOperator":
        """Same regions, new entries (already in canonical order)."""
        return LabeledOperator(self.regions, matrix, _canonical=True)

    # -- arithmetic -------------------------------------------------------------

    def _aligned(self, other: "LabeledOperator"):
        if self._labels == other._labels:
            merge_regions(self.regions, other.regions)
            return self.matrix, other.matrix, self.regions
        union = merge_regions(self.regions, other.regions)
        return embed(self, union).matrix, embed(other, union).matrix, union

    def __add__(self, other):
        if not isinstance(other, LabeledOperator):
            return NotImplemented
        a, b, regs = self._aligned(other)
        return LabeledOperator(regs, a + b, _canonical=True)

    def __sub__(self, other):
        if not isinstance(other, LabeledOperator):
            return NotImplemented
        a, b, regs = self._aligned(other)
        return LabeledOperator(regs, a - b, _canonical=True)

    def __neg__(self):
        return self.with_matrix(-self.matrix)

    def __mul__(self, c):
        if isinstance(c, LabeledOperator):
            return NotImplemented
        return self.with_matrix(self.matrix * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.with_matrix(self.matrix / c)

    def __matmul__(self, other):
        if not isinstance(other, LabeledOperator):
            return NotImplemented
        return padded_mul(self, other)

    def __repr__(self):
        dims = ",".join(f"{r.label}:{r.dim}{'c' if r.classical else ''}" for r in self.regions)
        return f"LabeledOperator[{dims}]"


# ---------------------------------------------------------------------------
# algebra


def tensor(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    clash = a.label_set & b.label_set
    if clash:
        raise LabelCollisionError(f"tensor of operators sharing labels {sorted(clash)}")
    return LabeledOperator(a.regions + b.regions, np.kron(a.matrix, b.matrix))


def tensor_all(ops: Iterable[LabeledOperator]) -> LabeledOperator:
    out = LabeledOperator.scalar(1.0)
    for op in ops:
        out = tensor(out, op)
    return out


def embed(m: LabeledOperator, regions: Iterable[RegionSpace]) -> LabeledOperator:
    """Pad ``m`` with identities up to ``regions`` (a superset of its labels)."""
    regions = merge_regions(regions, m.regions)
    extra = tuple(r for r in regions if r.label not in m.label_set)
    if not extra:
        return m
    side = int(np.prod([r.dim for r in extra], dtype=np.int64))
    return LabeledOperator(m.regions + extra, np.kron(m.matrix, np.eye(side)))


def padded_mul(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    if a._labels == b._labels:
        merge_regions(a.regions, b.regions)
        return LabeledOperator(a.regions, a.matrix @ b.matrix, _canonical=True)
    if not (a.label_set & b.label_set):
        return tensor(a, b)
    union = merge_regions(a.regions, b.regions)
    return LabeledOperator(union, embed(a, union).matrix @ embed(b, union).matrix, _canonical=True)


def mul_all(*ops: LabeledOperator) -> LabeledOperator:
    out = ops[0]
    for op in ops[1:]:
        out = padded_mul(out, op)
    return out


def _mask(m: LabeledOperator, labels) -> tuple[bool, ...]:
    labels = _as_label_set(labels)
    missing = labels - m.label_set
    if missing:
        raise LabelNotFoundError(f"labels {sorted(missing)} not in operator on {m.labels}")
    return tuple(lab in labels for lab in m.labels)


def partial_trace(m: LabeledOperator, traced) -> LabeledOperator:
    mask = _mask(m, traced)
    if not any(mask):
        return m
    keep = tuple(r for r, t in zip(m.regions, mask) if not t)
    if not keep:
        return LabeledOperator.scalar(np.trace(m.matrix))
    return LabeledOperator(keep, _kernels.ptrace(m.matrix, m.dims, mask), _canonical=True)


def reduce_to(m: LabeledOperator, kept) -> LabeledOperator:
    """Marginal on ``kept``: trace out everything else."""
    kept = _as_label_set(kept)
    _mask(m, kept)
    return partial_trace(m, m.label_set - kept)


def partial_transpose(m: LabeledOperator, flipped) -> LabeledOperator:
    mask = _mask(m, flipped)
    if not any(mask):
        return m
    return LabeledOperator(m.regions, _kernels.ptranspose(m.matrix, m.dims, mask), _canonical=True)


def relabel(m: LabeledOperator, mapping: Mapping[str, str | RegionSpace]) -> LabeledOperator:
    """Rename regions; a mapping value may be a label or a replacement region."""
    _mask(m, mapping.keys())
    new = []
    for r in m.regions:
        target = mapping.get(r.label)
        if target is None:
            new.append(r)
        elif isinstance(target, RegionSpace):
            if target.dim != r.dim:
                raise DimensionMismatchError(f"cannot relabel {r.label!r} (dim {r.dim}) to dim {target.dim}")
            new.append(target)
        else:
            new.append(RegionSpace(target, r.dim, r.classical, r.basis_note))
    return LabeledOperator(new, m.matrix)


def block(m: LabeledOperator, label: str, i: int, j: int) -> LabeledOperator:
    """The operator ``<i|_label m |j>_label`` on the remaining regions."""
    _mask(m, [label])
    pos = m.labels.index(label)
    d = m.dims
    before = int(np.prod(d[:pos], dtype=np.int64))
    after = int(np.prod(d[pos + 1 :], dtype=np.int64))
    t = m.matrix.reshape(before, d[pos], after, before, d[pos], after)[:, i, :, :, j, :]
    rest = m.regions[:pos] + m.regions[pos + 1 :]
    return LabeledOperator(rest, t.reshape(before * after, before * after), _canonical=True)


def same_regions(a: LabeledOperator, b: LabeledOperator) -> bool:
    return a.labels == b.labels and a.dims == b.dims
