"""Hermitian spectral kernels and validity predicates.

All cutoffs come from an explicit :class:`Tolerances` value; nothing here
reads global state.  Eigenvalues with magnitude at most
``eig_zero * spectral_radius`` are treated as zero: tiny negatives are
clamped, anything more negative raises :class:`NegativityError`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError, NegativityError, ShapeError
from .regions import LabeledOperator, padded_mul, partial_trace, partial_transpose, same_regions


@dataclass(frozen=True)
class Tolerances:
    eig_zero: float = 1e-10
    herm_tol: float = 1e-10
    eq_tol: float = 1e-9

    def __post_init__(self):
        for name in ("eig_zero", "herm_tol", "eq_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be strictly positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns
    support_rank: int
    cutoff: float

    def reconstruct(self, values=None) -> np.ndarray:
        lam = self.eigenvalues if values is None else values
        v = self.eigenvectors
        return (v * lam) @ v.conj().T


class Verdict:
    """Boolean predicate result carrying a diagnostic reason."""

    __slots__ = ("ok", "reason")

    def __init__(self, ok: bool, reason: str = ""):
        self.ok = bool(ok)
        self.reason = reason

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return f"Verdict({self.ok}, {self.reason!r})"


def hermiticity_defect(m: LabeledOperator) -> float:
    return float(np.max(np.abs(m.matrix - m.matrix.conj().T))) if m.side else 0.0


def spectrum(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> HermitianSpectrum:
    defect = hermiticity_defect(m)
    if defect > tol.herm_tol:
        raise ShapeError(f"operator on {m.labels} is not Hermitian (defect {defect:.3g})")
    h = 0.5 * (m.matrix + m.matrix.conj().T)
    lam, vec = np.linalg.eigh(h)
    lam = lam[::-1].copy()
    vec = vec[:, ::-1].copy()
    radius = float(np.max(np.abs(lam))) if lam.size else 0.0
    cutoff = tol.eig_zero * radius
    rank = int(np.sum(lam > cutoff))
    return HermitianSpectrum(lam, vec, rank, cutoff)


def _psd_spectrum(m: LabeledOperator, tol: Tolerances) -> HermitianSpectrum:
    sp = spectrum(m, tol)
    if sp.eigenvalues.size and sp.eigenvalues[-1] < -sp.cutoff:
        raise NegativityError(
            f"operator on {m.labels} has eigenvalue {sp.eigenvalues[-1]:.3g} below -{sp.cutoff:.3g}"
        )
    return sp


def support_pinv(m: LabeledOperator, power: float, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """Raise the support eigenvalues of a PSD operator to ``power``; kernel maps to 0.

    ``power = 0`` gives the support projector.
    """
    sp = _psd_spectrum(m, tol)
    lam = sp.eigenvalues
    on = lam > sp.cutoff
    vals = np.zeros_like(lam)
    vals[on] = lam[on] ** power
    return m.with_matrix(sp.reconstruct(vals))


def herm_sqrt(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    return support_pinv(m, 0.5, tol)


def support_projector(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    return support_pinv(m, 0.0, tol)


def herm_function(m: LabeledOperator, f, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """Apply a scalar function to the spectrum of a Hermitian operator."""
    sp = spectrum(m, tol)
    return m.with_matrix(sp.reconstruct(f(sp.eigenvalues)))


def herm_log(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    sp = _psd_spectrum(m, tol)
    if sp.support_rank < len(sp.eigenvalues):
        raise DomainError(f"log of rank-deficient operator on {m.labels} (rank {sp.support_rank})")
    return m.with_matrix(sp.reconstruct(np.log(sp.eigenvalues)))


def herm_exp(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    return herm_function(m, np.exp, tol)


def conjugate(m: LabeledOperator, x: LabeledOperator) -> LabeledOperator:
    """``x m x`` with identity padding (x Hermitian, so this is x m x^dagger)."""
    return padded_mul(padded_mul(x, m), x)


def star(m: LabeledOperator, n: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """``m * n = n^{1/2} m n^{1/2}``."""
    return conjugate(m, herm_sqrt(n, tol))


def star_inv(m: LabeledOperator, n: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> LabeledOperator:
    """``m * n^{-1}``, with the inverse taken on the support of ``n``."""
    return conjugate(m, support_pinv(n, -0.5, tol))


def frob_distance(a: LabeledOperator, b: LabeledOperator) -> float:
    if not same_regions(a, b):
        raise DimensionMismatchError(f"cannot compare operators on {a.labels}{a.dims} and {b.labels}{b.dims}")
    return float(np.linalg.norm(a.matrix - b.matrix))


def is_projector(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    err = float(np.linalg.norm(m.matrix @ m.matrix - m.matrix))
    herm = hermiticity_defect(m)
    if herm > tol.herm_tol:
        return Verdict(False, f"not Hermitian (defect {herm:.3g})")
    if err > tol.eq_tol:
        return Verdict(False, f"not idempotent (error {err:.3g})")
    return Verdict(True)


def is_psd(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    herm = hermiticity_defect(m)
    if herm > tol.herm_tol:
        return Verdict(False, f"not Hermitian (defect {herm:.3g})")
    sp = spectrum(m, tol)
    if sp.eigenvalues.size and sp.eigenvalues[-1] < -sp.cutoff:
        return Verdict(False, f"negative eigenvalue {sp.eigenvalues[-1]:.3g}")
    return Verdict(True)


def is_density(m: LabeledOperator, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    v = is_psd(m, tol)
    if not v:
        return v
    tr = m.trace()
    if abs(tr - 1.0) > tol.eq_tol:
        return Verdict(False, f"trace {tr.real:.12g} differs from 1")
    return Verdict(True)


def is_acausal_conditional(
    m: LabeledOperator,
    conditioning,
    tol: Tolerances = DEFAULT_TOL,
    support: LabeledOperator | None = None,
) -> Verdict:
    """PSD and ``Tr_conditioned(m)`` equal to the identity (or ``support``)."""
    conditioning = frozenset([conditioning]) if isinstance(conditioning, str) else frozenset(conditioning)
    if not conditioning <= m.label_set:
        return Verdict(False, f"conditioning labels {sorted(conditioning - m.label_set)} missing")
    v = is_psd(m, tol)
    if not v:
        return v
    marg = partial_trace(m, m.label_set - conditioning)
    target = LabeledOperator.identity(marg.regions) if support is None else support
    if not same_regions(marg, target):
        return Verdict(False, "support projector lives on the wrong regions")
    err = frob_distance(marg, target)
    if err > tol.eq_tol:
        what = "identity" if support is None else "support projector"
        return Verdict(False, f"partial trace over conditioned regions differs from {what} by {err:.3g}")
    return Verdict(True)


def is_causal_conditional(
    m: LabeledOperator,
    conditioning,
    tol: Tolerances = DEFAULT_TOL,
    support: LabeledOperator | None = None,
) -> Verdict:
    """Partial transpose over the conditioning regions is an acausal conditional."""
    conditioning = frozenset([conditioning]) if isinstance(conditioning, str) else frozenset(conditioning)
    if not conditioning <= m.label_set:
        return Verdict(False, f"conditioning labels {sorted(conditioning - m.label_set)} missing")
    flipped_support = None if support is None else partial_transpose(support, conditioning)
    return is_acausal_conditional(partial_transpose(m, conditioning), conditioning, tol, flipped_support)
