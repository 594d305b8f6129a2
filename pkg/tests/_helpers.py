import numpy as np

from condstate.regions import LabeledOperator

SQ = 1 / np.sqrt(2)


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return np.outer(v, v.conj())


def op(region, *amps):
    return LabeledOperator((region,), ket(*amps))


def close(a, b, tol=1e-10):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol
