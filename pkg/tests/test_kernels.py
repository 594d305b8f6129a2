import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condstate import _kernels
from condstate.regions import LabeledOperator, RegionSpace, partial_trace, partial_transpose


@pytest.fixture(params=["numba", "numpy"], scope="module")
def backend(request):
    if request.param == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    prev = _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


def _oracle_ptrace(m, dims, mask):
    n = len(dims)
    t = m.reshape(tuple(dims) * 2)
    letters = "abcdefgh"
    rows = list(letters[:n])
    cols = [letters[i] if mask[i] else letters[i].upper() for i in range(n)]
    out = "".join(r for r, k in zip(rows, mask) if not k) + "".join(c for c, k in zip(cols, mask) if not k)
    kept = int(np.prod([d for d, k in zip(dims, mask) if not k]))
    return np.einsum("".join(rows) + "".join(cols) + "->" + out, t).reshape(kept, kept)


def _oracle_ptranspose(m, dims, mask):
    n = len(dims)
    t = m.reshape(tuple(dims) * 2)
    axes = list(range(2 * n))
    for i in range(n):
        if mask[i]:
            axes[i], axes[n + i] = axes[n + i], axes[i]
    return t.transpose(axes).reshape(m.shape)


dims_st = st.lists(st.integers(1, 3), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(dims=dims_st, data=st.data())
def test_ptrace_matches_einsum(backend, dims, data):
    mask = tuple(data.draw(st.lists(st.booleans(), min_size=len(dims), max_size=len(dims))))
    side = int(np.prod(dims))
    g = np.random.default_rng(len(dims) * 7 + side)
    m = g.standard_normal((side, side)) + 1j * g.standard_normal((side, side))
    if all(mask):
        return
    assert np.allclose(_kernels.ptrace(m, tuple(dims), mask), _oracle_ptrace(m, dims, mask))


@settings(max_examples=60, deadline=None)
@given(dims=dims_st, data=st.data())
def test_ptranspose_matches_axis_swap(backend, dims, data):
    mask = tuple(data.draw(st.lists(st.booleans(), min_size=len(dims), max_size=len(dims))))
    side = int(np.prod(dims))
    g = np.random.default_rng(side)
    m = g.standard_normal((side, side)) + 1j * g.standard_normal((side, side))
    assert np.array_equal(_kernels.ptranspose(m, tuple(dims), mask), _oracle_ptranspose(m, dims, mask))


@settings(max_examples=40, deadline=None)
@given(dims=dims_st, data=st.data())
def test_permute_matches_kron_reorder(backend, dims, data):
    perm = data.draw(st.permutations(range(len(dims))))
    g = np.random.default_rng(len(dims))
    factors = [g.standard_normal((d, d)) for d in dims]
    full = factors[0]
    for f in factors[1:]:
        full = np.kron(full, f)
    want = factors[perm[0]]
    for i in perm[1:]:
        want = np.kron(want, factors[i])
    assert np.allclose(_kernels.permute(full.astype(complex), tuple(dims), list(perm)), want)


def test_backends_agree():
    g = np.random.default_rng(0)
    dims, mask = (2, 3, 2), (False, True, False)
    m = g.standard_normal((12, 12)) + 1j * g.standard_normal((12, 12))
    prev = _kernels.set_backend("numpy")
    try:
        ref_t, ref_p = _kernels.ptrace(m, dims, mask), _kernels.ptranspose(m, dims, mask)
    finally:
        _kernels.set_backend(prev)
    if _kernels.HAVE_NUMBA:
        _kernels.set_backend("numba")
        try:
            assert np.array_equal(_kernels.ptranspose(m, dims, mask), ref_p)
            assert np.allclose(_kernels.ptrace(m, dims, mask), ref_t, atol=1e-14)
        finally:
            _kernels.set_backend(prev)


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")


def test_labeled_ops_use_selected_backend(backend):
    a, b = RegionSpace("A", 2), RegionSpace("B", 3)
    m = LabeledOperator((a, b), np.arange(36).reshape(6, 6))
    assert _kernels.backend() == backend
    assert np.allclose(partial_trace(m, {"A"}).matrix, m.matrix[:3, :3] + m.matrix[3:, 3:])
    assert np.allclose(partial_transpose(partial_transpose(m, {"B"}), {"B"}).matrix, m.matrix)


def test_env_flag_selects_numpy(tmp_path):
    import subprocess
    import sys

    code = "from condstate import _kernels; print(_kernels.backend())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"CONDSTATE_DISABLE_NUMBA": "1", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
