"""Constructions where the calculus breaks down.

* A three-qubit W-type state for which the chain rule does not survive
  conditioning on a third region.
* A maximally entangled AC pair sent through the identity channel A -> B:
  the star-product joint is a valid operator but loses the AB and BC
  correlations, while the plain product keeps every bipartite marginal and
  stops being Hermitian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import swap_conditional
from .linalg import DEFAULT_TOL, Tolerances, frob_distance, hermiticity_defect, star, star_inv
from .regions import LabeledOperator, RegionSpace, padded_mul, reduce_to, tensor


def w_state(a: str = "A", b: str = "B", c: str = "C") -> LabeledOperator:
    """``|psi> = (|001> + |010>)/2 + |100>/sqrt(2)`` on ``a b c``."""
    psi = np.zeros(8)
    psi[0b001] = 0.5
    psi[0b010] = 0.5
    psi[0b100] = 1 / np.sqrt(2)
    regs = (RegionSpace(a, 2), RegionSpace(b, 2), RegionSpace(c, 2))
    return LabeledOperator(regs, np.outer(psi, psi))


@dataclass(frozen=True)
class WStateReport:
    lhs: LabeledOperator  # rho_{AB|C}
    rhs: LabeledOperator  # rho_{B|AC} * rho_{A|C}
    distance: float


def w_state_chain_rule(tol: Tolerances = DEFAULT_TOL) -> WStateReport:
    rho = w_state()
    rho_c = reduce_to(rho, {"C"})
    rho_ac = reduce_to(rho, {"A", "C"})
    lhs = star_inv(rho, rho_c, tol)
    a_given_c = star_inv(rho_ac, rho_c, tol)
    b_given_ac = star_inv(rho, rho_ac, tol)
    rhs = star(b_given_ac, a_given_c, tol)
    return WStateReport(lhs, rhs, frob_distance(lhs, rhs))


def maximally_entangled(r1: RegionSpace, r2: RegionSpace) -> LabeledOperator:
    """``(1/d)|Phi+><Phi+|`` with ``|Phi+> = sum_j |jj>``."""
    d = r1.dim
    phi = np.eye(d).reshape(-1)
    return LabeledOperator((r1, r2), np.outer(phi, phi) / d)


@dataclass(frozen=True)
class MixedCausalReport:
    star_joint: LabeledOperator
    closed_form: LabeledOperator
    star_error: float
    star_marginals: dict
    product: LabeledOperator
    product_closed_form_error: float
    product_marginal_errors: dict
    hermiticity_defect: float


def mixed_causal(d: int = 2, tol: Tolerances = DEFAULT_TOL) -> MixedCausalReport:
    A, B, C = RegionSpace("A", d), RegionSpace("B", d), RegionSpace("C", d)
    rho_ac = maximally_entangled(A, C)
    chan = swap_conditional(A, B)
    joint = star(chan.op, rho_ac, tol)
    closed = tensor(rho_ac, LabeledOperator.identity((B,)) / d)
    product = padded_mul(chan.op, rho_ac)
    # (1/d) sum_{jkm} |j><k|_A (x) |m><j|_B (x) |m><k|_C
    t = np.zeros((d,) * 6, dtype=np.complex128)
    for j in range(d):
        for k in range(d):
            for m in range(d):
                t[j, m, m, k, j, k] = 1.0 / d
    product_closed = LabeledOperator((A, B, C), t.reshape(d**3, d**3))
    expected = {
        "AB": star(chan.op, reduce_to(rho_ac, {"A"}), tol),
        "AC": rho_ac,
        "BC": maximally_entangled(B, C),
    }
    prod_err = {k: frob_distance(reduce_to(product, set(k)), v) for k, v in expected.items()}
    star_marg = {k: frob_distance(reduce_to(joint, set(k)), v) for k, v in expected.items()}
    return MixedCausalReport(
        joint,
        closed,
        frob_distance(joint, closed),
        star_marg,
        product,
        frob_distance(product, product_closed),
        prod_err,
        hermiticity_defect(product),
    )


@dataclass(frozen=True)
class LimitationReport:
    w_state: WStateReport
    mixed_causal: MixedCausalReport


def limitation_demos(tol: Tolerances = DEFAULT_TOL) -> LimitationReport:
    return LimitationReport(w_state_chain_rule(tol), mixed_causal(2, tol))
