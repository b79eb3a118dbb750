"""Hot numeric kernels with numba-compiled and pure-NumPy/Python twins.

Each kernel exists in two versions: ``*_jit`` (numba ``@njit``) and ``*_py``
(plain Python/NumPy).  The module-level names (``wick_signed_sum``,
``q_permanent``, ``mc_phase_second_moment``) point at the jit version unless
the environment variable ``SCHATTENLAB_DISABLE_NUMBA`` is set to a non-empty
value other than ``0``, or numba is not importable.  ``python -m
schattenlab.bench`` times both paths side by side.

The linear-algebra heavy parts of the package (power iterations, SVDs,
dilation conjugations) are BLAS/LAPACK bound and are deliberately not routed
through numba; these kernels cover the combinatorial sums and the Monte-Carlo
accumulation loop, which are the only pure-Python hot loops in the artifact.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("SCHATTENLAB_DISABLE_NUMBA", "").strip()
NUMBA_REQUESTED = _env in ("", "0")

if NUMBA_REQUESTED:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if not HAVE_NUMBA:
    def njit(*args, **kwargs):  # noqa: D103 - decorator passthrough
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# ---------------------------------------------------------------------------
# Signed pair-partition sum (crossing signs)
# ---------------------------------------------------------------------------
#
# For a symmetric matrix M of pair inner products, computes
#
#     sum over pairings V of {0,...,2k-1} of (-1)^{c(V)} prod_{(i,j) in V} M[i,j]
#
# where c(V) counts crossing pairs.  Expanding on the lowest unpaired index i
# with partner j contributes a local sign (-1)^{#unpaired indices strictly
# between i and j}; distributing over the remaining indices gives a
# subset-sum recursion that only depends on the mask of unpaired indices,
# hence an O(4^k * k) dynamic program instead of the (2k-1)!! tree.


def _wick_dp_py(M: np.ndarray) -> complex:
    n = M.shape[0]
    full = (1 << n) - 1
    memo = {0: 1.0 + 0.0j}

    def rec(mask: int) -> complex:
        if mask in memo:
            return memo[mask]
        i = (mask & -mask).bit_length() - 1
        acc = 0.0 + 0.0j
        sign = 1.0
        for j in range(i + 1, n):
            bit = 1 << j
            if mask & bit:
                acc += sign * M[i, j] * rec(mask & ~bit & ~(1 << i))
                sign = -sign
        memo[mask] = acc
        return acc

    return rec(full)


@njit(cache=True)
def _wick_dp_jit(M: np.ndarray) -> complex:  # pragma: no cover - jit twin
    n = M.shape[0]
    size = 1 << n
    memo = np.zeros(size, dtype=np.complex128)
    memo[0] = 1.0 + 0.0j
    # masks in increasing order; submasks are always visited first
    for mask in range(1, size):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        acc = 0.0 + 0.0j
        sign = 1.0
        for j in range(i + 1, n):
            if (mask >> j) & 1:
                sub = mask & ~(1 << j) & ~(1 << i)
                acc += sign * M[i, j] * memo[sub]
                sign = -sign
        memo[mask] = acc
    return memo[size - 1]


def wick_signed_sum_py(M: np.ndarray) -> complex:
    """Crossing-signed pairing sum of the pair matrix M (pure Python path)."""
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n % 2:
        return 0.0 + 0.0j
    return _wick_dp_py(np.asarray(M, dtype=complex))


def wick_signed_sum_jit(M: np.ndarray) -> complex:
    """Crossing-signed pairing sum of the pair matrix M (numba path)."""
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n % 2:
        return 0.0 + 0.0j
    return complex(_wick_dp_jit(np.ascontiguousarray(M, dtype=np.complex128)))


# ---------------------------------------------------------------------------
# q-weighted permanent
# ---------------------------------------------------------------------------
#
#     perm_q(M) = sum over permutations s of q^{inv(s)} prod_i M[i, s(i)]
#
# Assigning rows in order, placing row r at column j adds one inversion for
# every already-used column larger than j, so the weight of a partial
# assignment depends only on the used-column mask: an O(2^n * n) subset DP.


def q_permanent_py(M: np.ndarray, q: float) -> complex:
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    M = np.asarray(M, dtype=complex)
    size = 1 << n
    f = np.zeros(size, dtype=complex)
    f[0] = 1.0
    for mask in range(size):
        if f[mask] == 0.0:
            continue
        r = bin(mask).count("1")
        if r == n:
            continue
        larger = 0  # columns in mask above j, scanned from the top
        for j in range(n - 1, -1, -1):
            if mask & (1 << j):
                larger += 1
            else:
                f[mask | (1 << j)] += f[mask] * M[r, j] * q**larger
    return complex(f[size - 1])


@njit(cache=True)
def _qperm_jit(M: np.ndarray, q: float) -> complex:  # pragma: no cover
    n = M.shape[0]
    size = 1 << n
    f = np.zeros(size, dtype=np.complex128)
    f[0] = 1.0 + 0.0j
    for mask in range(size):
        if f[mask] == 0.0:
            continue
        r = 0
        for b in range(n):
            if (mask >> b) & 1:
                r += 1
        if r == n:
            continue
        larger = 0
        for j in range(n - 1, -1, -1):
            if (mask >> j) & 1:
                larger += 1
            else:
                f[mask | (1 << j)] += f[mask] * M[r, j] * q**larger
    return f[size - 1]


def q_permanent_jit(M: np.ndarray, q: float) -> complex:
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    return complex(_qperm_jit(np.ascontiguousarray(M, dtype=np.complex128), float(q)))


# ---------------------------------------------------------------------------
# Monte-Carlo second moment of random phase vectors
# ---------------------------------------------------------------------------
#
# Given per-sample phase arguments theta[s, j], accumulates
# mean_s exp(i theta[s,j]) * conj(exp(i theta[s,k])) as an (n, n) matrix.


def mc_phase_second_moment_py(theta: np.ndarray) -> np.ndarray:
    phases = np.exp(1j * theta)  # (samples, n)
    return phases.T @ phases.conj() / theta.shape[0]


@njit(cache=True)
def _mc_jit(theta: np.ndarray) -> np.ndarray:  # pragma: no cover
    s, n = theta.shape
    acc = np.zeros((n, n), dtype=np.complex128)
    for t in range(s):
        z = np.empty(n, dtype=np.complex128)
        for j in range(n):
            z[j] = np.cos(theta[t, j]) + 1j * np.sin(theta[t, j])
        for j in range(n):
            for k in range(n):
                acc[j, k] += z[j] * np.conj(z[k])
    return acc / s


def mc_phase_second_moment_jit(theta: np.ndarray) -> np.ndarray:
    return _mc_jit(np.ascontiguousarray(theta, dtype=np.float64))


# ---------------------------------------------------------------------------
# active selection
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    wick_signed_sum = wick_signed_sum_jit
    q_permanent = q_permanent_jit
    mc_phase_second_moment = mc_phase_second_moment_jit
else:
    wick_signed_sum = wick_signed_sum_py
    q_permanent = q_permanent_py
    mc_phase_second_moment = mc_phase_second_moment_py
