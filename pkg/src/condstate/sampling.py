"""Seeded random objects.

Every generator takes a ``numpy.random.Generator``; :func:`rng` builds one
from an integer seed with the PCG64 bit generator (numpy's default), so a
seed fixes the whole corpus.

Channels: draw ``n`` complex Gaussian matrices ``G_mu`` (dout x din), form
``S = sum G^dagger G`` and whiten, ``K_mu = G_mu S^{-1/2}``.  Instruments use
the same whitened collection and deal the Kraus operators into outcomes by a
random partition in which every outcome receives at least one operator.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .channels import Instrument, KrausChannel
from .regions import LabeledOperator, RegionSpace


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _ginibre(g: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return g.standard_normal((rows, cols)) + 1j * g.standard_normal((rows, cols))


def _inv_sqrt(m: np.ndarray) -> np.ndarray:
    lam, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v / np.sqrt(lam)) @ v.conj().T


def random_density_matrix(g: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    x = _ginibre(g, d, d if rank is None else rank)
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def random_density(g: np.random.Generator, regions: Sequence[RegionSpace] | RegionSpace, rank: int | None = None) -> LabeledOperator:
    regions = (regions,) if isinstance(regions, RegionSpace) else tuple(regions)
    d = int(np.prod([r.dim for r in regions]))
    return LabeledOperator(regions, random_density_matrix(g, d, rank))


def random_unitary(g: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(g, d, d))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases[None, :]


def random_kraus(g: np.random.Generator, din: int, dout: int, n: int | None = None) -> list[np.ndarray]:
    n = din * dout if n is None else n
    gs = [_ginibre(g, dout, din) for _ in range(n)]
    w = _inv_sqrt(sum(k.conj().T @ k for k in gs))
    return [k @ w for k in gs]


def random_channel(g: np.random.Generator, input: RegionSpace, output: RegionSpace, n: int | None = None) -> KrausChannel:
    return KrausChannel(input, output, tuple(random_kraus(g, input.dim, output.dim, n)))


def random_povm(g: np.random.Generator, d: int, n: int) -> list[np.ndarray]:
    raw = []
    for _ in range(n):
        x = _ginibre(g, d, d)
        raw.append(x @ x.conj().T)
    w = _inv_sqrt(sum(raw))
    return [w @ a @ w for a in raw]


def random_povm_ops(g: np.random.Generator, region: RegionSpace, n: int) -> list[LabeledOperator]:
    return [LabeledOperator((region,), e) for e in random_povm(g, region.dim, n)]


def random_probabilities(g: np.random.Generator, n: int) -> np.ndarray:
    return g.dirichlet(np.ones(n))


def random_ensemble(g: np.random.Generator, region: RegionSpace, n: int) -> tuple[np.ndarray, list[LabeledOperator]]:
    probs = random_probabilities(g, n)
    states = [random_density(g, region) for _ in range(n)]
    return probs, states


def random_instrument(
    g: np.random.Generator,
    outcome: RegionSpace,
    input: RegionSpace,
    output: RegionSpace,
    n_kraus: int | None = None,
) -> Instrument:
    k = outcome.dim
    n = max(k, input.dim * output.dim if n_kraus is None else n_kraus)
    kraus = random_kraus(g, input.dim, output.dim, n)
    owner = np.concatenate([np.arange(k), g.integers(0, k, size=n - k)])
    g.shuffle(owner)
    elements = tuple(tuple(kraus[i] for i in range(n) if owner[i] == y) for y in range(k))
    return Instrument(outcome, input, output, elements)
