import numpy as np
import pytest

from condstate.limits import maximally_entangled, mixed_causal, w_state, w_state_chain_rule
from condstate.linalg import is_density
from condstate.regions import RegionSpace


def test_w_state_is_normalized_pure():
    rho = w_state()
    assert is_density(rho)
    assert np.allclose(rho.matrix @ rho.matrix, rho.matrix)


def test_w_state_chain_rule_fails():
    assert w_state_chain_rule().distance > 1e-3


@pytest.mark.parametrize("d", [2, 3])
def test_mixed_causal(d):
    r = mixed_causal(d)
    assert r.star_error < 1e-10
    assert r.product_closed_form_error < 1e-12
    assert max(r.product_marginal_errors.values()) < 1e-10
    assert r.hermiticity_defect > 0.1
    # the star product keeps AC and replaces B by the maximally mixed state
    assert r.star_marginals["AC"] < 1e-10
    assert r.star_marginals["AB"] > 0.1 and r.star_marginals["BC"] > 0.1


def test_maximally_entangled_is_pure():
    rho = maximally_entangled(RegionSpace("A", 3), RegionSpace("B", 3))
    assert is_density(rho)
    assert np.isclose(np.trace(rho.matrix @ rho.matrix).real, 1.0)
