"""Index-shuffling kernels behind the labeled operator algebra.

Every kernel has two implementations with identical signatures:

* a numba ``@njit`` loop over precomputed mixed-radix offset tables, and
* a pure-numpy path built from ``reshape``/``transpose``/``einsum``.

The numba path is used when numba imports cleanly and the environment
variable ``CONDSTATE_DISABLE_NUMBA`` is unset or ``0``.  ``set_backend`` flips
the choice at runtime (tests and the benchmark use it).

Index convention: a composite basis index is row-major over the region
order, i.e. ``index = sum(digit[i] * stride[i])`` with
``stride[i] = prod(dims[i+1:])``.
"""

import os
from functools import lru_cache

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _env_wants_numba():
    return os.environ.get("CONDSTATE_DISABLE_NUMBA", "0").strip() in ("", "0")


_USE_NUMBA = HAVE_NUMBA and _env_wants_numba()


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"``; returns the previous backend name."""
    global _USE_NUMBA
    previous = backend()
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not importable")
        _USE_NUMBA = True
    elif name == "numpy":
        _USE_NUMBA = False
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def backend():
    return "numba" if _USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# offset tables (shared by the numba path)


def _strides(dims):
    strides = [1] * len(dims)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    return strides


@lru_cache(maxsize=512)
def _split_offsets(dims, mask):
    """Offsets of the masked and unmasked sub-indices inside the full index.

    Returns ``(off_in, off_out)`` where ``off_in[k]`` is the contribution to
    the full index of the k-th joint value of the masked regions (row-major
    in their original relative order), and likewise for ``off_out``.
    """
    strides = _strides(dims)
    sel = [i for i in range(len(dims)) if mask[i]]
    rest = [i for i in range(len(dims)) if not mask[i]]

    def table(idx):
        off = np.zeros(1, dtype=np.int64)
        for i in idx:
            off = (off[:, None] + np.arange(dims[i], dtype=np.int64)[None, :] * strides[i]).ravel()
        return off

    return table(sel), table(rest)


@lru_cache(maxsize=512)
def _perm_table(dims, perm):
    """``table[i]`` = destination index of source basis index ``i``.

    The destination orders regions as ``[dims[p] for p in perm]``.
    """
    n = len(dims)
    new_dims = tuple(dims[p] for p in perm)
    new_strides = _strides(new_dims)
    # source region perm[k] sits at destination position k
    dest_stride = [0] * n
    for k, p in enumerate(perm):
        dest_stride[p] = new_strides[k]
    table = np.zeros(1, dtype=np.int64)
    for i in range(n):
        table = (table[:, None] + np.arange(dims[i], dtype=np.int64)[None, :] * dest_stride[i]).ravel()
    return table


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _ptrace_nb(mat, off_keep, off_tr):
    nk = off_keep.shape[0]
    nt = off_tr.shape[0]
    out = np.zeros((nk, nk), dtype=mat.dtype)
    for r in range(nk):
        rr = off_keep[r]
        for c in range(nk):
            cc = off_keep[c]
            acc = 0j
            for t in range(nt):
                acc += mat[rr + off_tr[t], cc + off_tr[t]]
            out[r, c] = acc
    return out


@njit(cache=True)
def _ptranspose_nb(mat, off_flip, off_rest):
    nf = off_flip.shape[0]
    nr = off_rest.shape[0]
    n = mat.shape[0]
    out = np.empty((n, n), dtype=mat.dtype)
    for a in range(nf):
        for b in range(nr):
            i_a = off_flip[a]
            i_b = off_rest[b]
            for c in range(nf):
                for d in range(nr):
                    j_c = off_flip[c]
                    j_d = off_rest[d]
                    out[j_c + i_b, i_a + j_d] = mat[i_a + i_b, j_c + j_d]
    return out


@njit(cache=True)
def _permute_nb(mat, table):
    n = mat.shape[0]
    out = np.empty((n, n), dtype=mat.dtype)
    for i in range(n):
        ti = table[i]
        for j in range(n):
            out[ti, table[j]] = mat[i, j]
    return out


# ---------------------------------------------------------------------------
# numpy fallbacks


def _ptrace_np(mat, dims, mask):
    n = len(dims)
    keep = [i for i in range(n) if not mask[i]]
    tr = [i for i in range(n) if mask[i]]
    dk = int(np.prod([dims[i] for i in keep], dtype=np.int64))
    dt = int(np.prod([dims[i] for i in tr], dtype=np.int64))
    t = mat.reshape(tuple(dims) * 2)
    order = keep + tr + [n + i for i in keep] + [n + i for i in tr]
    t = t.transpose(order).reshape(dk, dt, dk, dt)
    return np.einsum("aibi->ab", t)


def _ptranspose_np(mat, dims, mask):
    n = len(dims)
    t = mat.reshape(tuple(dims) * 2)
    axes = list(range(2 * n))
    for i in range(n):
        if mask[i]:
            axes[i], axes[n + i] = n + i, i
    side = mat.shape[0]
    return t.transpose(axes).reshape(side, side)


def _permute_np(mat, dims, perm):
    n = len(dims)
    t = mat.reshape(tuple(dims) * 2)
    axes = list(perm) + [n + p for p in perm]
    side = mat.shape[0]
    return t.transpose(axes).reshape(side, side)


# ---------------------------------------------------------------------------
# public entry points


def ptrace(mat, dims, mask):
    """Trace out the regions whose ``mask`` entry is True."""
    dims = tuple(int(d) for d in dims)
    mask = tuple(bool(m) for m in mask)
    if _USE_NUMBA:
        off_tr, off_keep = _split_offsets(dims, mask)
        return _ptrace_nb(np.ascontiguousarray(mat, dtype=np.complex128), off_keep, off_tr)
    return _ptrace_np(np.asarray(mat, dtype=np.complex128), dims, mask)


def ptranspose(mat, dims, mask):
    """Transpose the row/column digits of the regions whose ``mask`` is True."""
    dims = tuple(int(d) for d in dims)
    mask = tuple(bool(m) for m in mask)
    if not any(mask):
        return np.array(mat, dtype=np.complex128)
    if _USE_NUMBA:
        off_flip, off_rest = _split_offsets(dims, mask)
        return _ptranspose_nb(np.ascontiguousarray(mat, dtype=np.complex128), off_flip, off_rest)
    return _ptranspose_np(np.asarray(mat, dtype=np.complex128), dims, mask)


def permute(mat, dims, perm):
    """Reorder tensor factors: the result lists regions as ``dims[perm[k]]``."""
    dims = tuple(int(d) for d in dims)
    perm = tuple(int(p) for p in perm)
    if perm == tuple(range(len(dims))):
        return np.array(mat, dtype=np.complex128)
    if _USE_NUMBA:
        return _permute_nb(np.ascontiguousarray(mat, dtype=np.complex128), _perm_table(dims, perm))
    return _permute_np(np.asarray(mat, dtype=np.complex128), dims, perm)


def warmup():
    """Compile (or load from cache) every numba kernel."""
    if not HAVE_NUMBA:
        return
    m = np.eye(4, dtype=np.complex128)
    prev = set_backend("numba")
    try:
        ptrace(m, (2, 2), (True, False))
        ptranspose(m, (2, 2), (True, False))
        permute(m, (2, 2), (1, 0))
    finally:
        set_backend(prev)
